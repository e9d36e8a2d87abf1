//! PCM quantization of frame coefficients and the reconstruction error.
//!
//! The quantizer rounds to the nearest point of the alphabet `δZ` through the
//! floor formula `Q_δ(t) = δ ⌊t/δ + 1/2⌋`; midpoints between alphabet points
//! round up, and the residual `Δ_δ(t) = t − Q_δ(t)` lives in `[−δ/2, δ/2)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::frames::Frame;
use crate::parallel;
use crate::seqtools;

#[derive(Debug, Error)]
pub enum PcmError {
    #[error("quantizer step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("cannot quantize non-finite value {0}")]
    NonFiniteInput(f64),
    #[error("dimension mismatch: frame has d = {frame}, input has d = {input}")]
    DimensionMismatch { frame: usize, input: usize },
    #[error("frame is not certified tight (residual {residual:e} > tol {tol:e}); the d/N reconstruction needs a tight frame")]
    NotTight { residual: f64, tol: f64 },
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("epsilon must lie in (0, 1/2), got {0}")]
    BadEpsilon(f64),
}

/// Round-to-nearest quantizer on the alphabet `δZ`.
#[derive(Debug, Clone, Copy)]
pub struct Quantizer {
    delta: f64,
}

impl Quantizer {
    pub fn new(delta: f64) -> Result<Self, PcmError> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(PcmError::InvalidStep(delta));
        }
        Ok(Quantizer { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `δ ⌊t/δ + 1/2⌋`; ties round up by floor semantics.
    pub fn quantize(&self, t: f64) -> f64 {
        self.delta * (t / self.delta + 0.5).floor()
    }

    /// Residual `t − Q_δ(t) ∈ [−δ/2, δ/2)`.
    pub fn residual(&self, t: f64) -> f64 {
        t - self.quantize(t)
    }
}

/// Quantize one value on `δZ`.
pub fn quantize_value(t: f64, delta: f64) -> Result<f64, PcmError> {
    if !t.is_finite() {
        return Err(PcmError::NonFiniteInput(t));
    }
    Ok(Quantizer::new(delta)?.quantize(t))
}

/// Analysis coefficients `c_j = ⟨x, e_j⟩` in frame order.
pub fn analyze(frame: &Frame, x: &[f64]) -> Result<Vec<f64>, PcmError> {
    if x.len() != frame.dim() {
        return Err(PcmError::DimensionMismatch {
            frame: frame.dim(),
            input: x.len(),
        });
    }
    Ok(frame
        .vectors()
        .map(|v| v.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect())
}

/// Coefficients, quantized values, residuals, and running residual sums for
/// one `(x, F, δ)` triple.
#[derive(Debug, Clone, Serialize)]
pub struct QuantizedExpansion {
    pub delta: f64,
    /// `c_j = ⟨x, e_j⟩`.
    pub coefficients: Vec<f64>,
    /// `q_j = Q_δ(c_j)`.
    pub quantized: Vec<f64>,
    /// `y_j = c_j − q_j`.
    pub residuals: Vec<f64>,
    /// `u_0 = 0, u_j = Σ_{k≤j} y_k` (compensated summation).
    pub partial_sums: Vec<f64>,
}

impl QuantizedExpansion {
    pub fn new(frame: &Frame, x: &[f64], delta: f64) -> Result<Self, PcmError> {
        let quantizer = Quantizer::new(delta)?;
        let coefficients = analyze(frame, x)?;
        let quantized: Vec<f64> = coefficients.iter().map(|&c| quantizer.quantize(c)).collect();
        let residuals: Vec<f64> = coefficients
            .iter()
            .zip(&quantized)
            .map(|(c, q)| c - q)
            .collect();
        let partial_sums = seqtools::partial_sums(&residuals);
        Ok(QuantizedExpansion {
            delta,
            coefficients,
            quantized,
            residuals,
            partial_sums,
        })
    }
}

/// Scalar error report for one reconstruction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ErrorReport {
    /// `‖x − x̃‖`.
    pub error: f64,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub delta: f64,
    pub norm_x: f64,
}

fn require_tight(frame: &Frame) -> Result<(), PcmError> {
    if !frame.is_tight() {
        return Err(PcmError::NotTight {
            residual: frame.tight_residual(),
            tol: frame.tight_tol(),
        });
    }
    Ok(())
}

/// Quantized reconstruction `x̃ = (d/N) Σ q_j e_j` through a certified tight
/// frame, with the full expansion and the error report.
pub fn reconstruct_quantized(
    frame: &Frame,
    x: &[f64],
    delta: f64,
) -> Result<(Vec<f64>, QuantizedExpansion, ErrorReport), PcmError> {
    require_tight(frame)?;
    let expansion = QuantizedExpansion::new(frame, x, delta)?;
    let d = frame.dim();
    let n = frame.len();
    let mut x_tilde = vec![0.0_f64; d];
    for (q, v) in expansion.quantized.iter().zip(frame.vectors()) {
        for (acc, c) in x_tilde.iter_mut().zip(v) {
            *acc += q * c;
        }
    }
    let scale = d as f64 / n as f64;
    for c in x_tilde.iter_mut() {
        *c *= scale;
    }
    let error = x
        .iter()
        .zip(&x_tilde)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let norm_x = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    let report = ErrorReport {
        error,
        d,
        n,
        delta,
        norm_x,
    };
    Ok((x_tilde, expansion, report))
}

/// `E_δ(x, F) = ‖x − x̃‖`; convenience wrapper over [`reconstruct_quantized`].
pub fn error(frame: &Frame, x: &[f64], delta: f64) -> Result<f64, PcmError> {
    reconstruct_quantized(frame, x, delta).map(|(_, _, report)| report.error)
}

/// Mean square error under the white-noise residual model: `d²δ²/(12N)`.
pub fn mse_wnh(d: usize, n: usize, delta: f64) -> f64 {
    let d = d as f64;
    d * d * delta * delta / (12.0 * n as f64)
}

/// Outcome of a white-noise residual simulation.
#[derive(Debug, Clone, Serialize)]
pub struct WnhReport {
    /// Mean of `‖(d/N) Σ y_j e_j‖²` over trials.
    pub empirical_mse: f64,
    /// `d²δ²/(12N)`.
    pub model_mse: f64,
    /// Fraction of trials whose synthetic error exceeded the
    /// `(dδ/N^{1/2−ε})(σ(F)+1)` threshold.
    pub bound_violation_rate: f64,
    /// Probability allowance `2N·exp(−2N^{2ε})`.
    pub theoretical_rate: f64,
    /// Threshold the violations were counted against.
    pub threshold: f64,
    /// Frame variation estimate used in the threshold.
    pub sigma: f64,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Draw residuals i.i.d. uniform on `[−δ/2, δ/2)`, form the synthetic error
/// `(d/N)‖Σ y_j e_j‖` per trial, and report the empirical mean square error,
/// the rate of threshold violations, and the model allowance.
///
/// Trials are split into fixed blocks; each trial derives its own counter
/// stream from the seed, so the result is bitwise reproducible regardless of
/// the thread cap.
pub fn wnh_simulate(
    frame: &Frame,
    delta: f64,
    trials: u64,
    epsilon: f64,
    seed: u64,
) -> Result<WnhReport, PcmError> {
    require_tight(frame)?;
    if trials == 0 {
        return Err(PcmError::NoTrials);
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(PcmError::BadEpsilon(epsilon));
    }
    // δ = 0 is allowed here: the residual model degenerates to zero noise.
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(PcmError::InvalidStep(delta));
    }
    let d = frame.dim();
    let n = frame.len();
    let variation = seqtools::frame_variation(frame, seqtools::VariationMode::Heuristic)
        .expect("heuristic variation accepts any frame");
    let sigma = variation.sigma;
    let threshold =
        (d as f64) * delta / (n as f64).powf(0.5 - epsilon) * (sigma + 1.0);
    let theoretical_rate =
        2.0 * n as f64 * (-2.0 * (n as f64).powf(2.0 * epsilon)).exp();

    const BLOCK: usize = 8192;
    let scale = d as f64 / n as f64;
    let blocks = parallel::map_chunks(trials as usize, BLOCK, |range| {
        let mut sum_sq = 0.0_f64;
        let mut violations = 0u64;
        let mut acc = vec![0.0_f64; d];
        for trial in range {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64 + 1);
            acc.iter_mut().for_each(|a| *a = 0.0);
            for v in frame.vectors() {
                let y = (rng.gen::<f64>() - 0.5) * delta;
                for (a, c) in acc.iter_mut().zip(v) {
                    *a += y * c;
                }
            }
            let err = scale * acc.iter().map(|a| a * a).sum::<f64>().sqrt();
            sum_sq += err * err;
            if err > threshold {
                violations += 1;
            }
        }
        (sum_sq, violations)
    });
    let mut sum_sq = 0.0;
    let mut violations = 0u64;
    for (s, v) in blocks {
        sum_sq += s;
        violations += v;
    }
    Ok(WnhReport {
        empirical_mse: sum_sq / trials as f64,
        model_mse: mse_wnh(d, n, delta),
        bound_violation_rate: violations as f64 / trials as f64,
        theoretical_rate,
        threshold,
        sigma,
        d,
        n,
        delta,
        epsilon,
        trials,
        seed,
    })
}
