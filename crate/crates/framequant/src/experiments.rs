//! Scenario runners: parameter sweeps with log-log slope fits, emitted as
//! `param,value` CSV rows plus a JSON report carrying the fit, the resolved
//! configuration, and pass/fail verdicts.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::frames::{self, FramePath};
use crate::integrals::{self, RadialSpec};
use crate::parallel;
use crate::pcm;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("log-log fit needs at least 3 rows with positive values, got {0}")]
    TooFewRows(usize),
    #[error("sweep needs at least {need} parameter values, got {got}")]
    TooFewParams { need: usize, got: usize },
    #[error(transparent)]
    Frame(#[from] frames::FrameError),
    #[error(transparent)]
    Pcm(#[from] pcm::PcmError),
    #[error(transparent)]
    Integral(#[from] integrals::IntegralError),
}

/// Ordinary least squares on `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    /// Intercept in natural-log coordinates.
    pub intercept: f64,
    pub residual_rms: f64,
}

/// Fit `ln y = slope·ln x + intercept` over rows with positive coordinates.
pub fn fit_loglog(rows: &[(f64, f64)]) -> Result<LogLogFit, ExperimentError> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(ExperimentError::TooFewRows(pts.len()));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let mx = sx / n;
    let my = sy / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum();
    Ok(LogLogFit {
        slope,
        intercept,
        residual_rms: (ss / n).sqrt(),
    })
}

/// A parameter→value table with fit metadata and a replayable config echo.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub scenario: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub rows: Vec<(f64, f64)>,
    pub fit: Option<LogLogFit>,
}

impl SweepResult {
    pub fn new(
        scenario: &str,
        seed: Option<u64>,
        config: serde_json::Value,
        mut rows: Vec<(f64, f64)>,
    ) -> Self {
        rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let fit = fit_loglog(&rows).ok();
        SweepResult {
            scenario: scenario.to_string(),
            seed,
            config,
            rows,
            fit,
        }
    }

    /// `param,value` CSV with 17-significant-digit decimals and LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("param,value\n");
        for (p, v) in &self.rows {
            let _ = writeln!(out, "{p:.16e},{v:.16e}");
        }
        out
    }
}

// ------------------------------------------------------------------ plateau sweep

/// Plateau statistics over the top quartile of the sweep parameter.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PlateauStats {
    pub mean: f64,
    /// Coefficient of variation (std/mean) over the top quartile.
    pub cv: f64,
}

/// "Settles down" threshold for the plateau's coefficient of variation.
pub const PLATEAU_CV_MAX: f64 = 0.2;
/// Allowed relative gap between the plateau mean and the sphere-limit value.
pub const PLATEAU_LIMIT_REL_MAX: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct PlateauResult {
    pub sweep: SweepResult,
    pub plateau: PlateauStats,
    /// Large-N limit predicted by the reduced sphere integral.
    pub sphere_limit: f64,
    /// `|plateau.mean − sphere_limit| / sphere_limit`.
    pub rel_gap: f64,
    pub pass: bool,
}

/// Reconstruction error of a fixed planar signal against equispaced frames of
/// growing size: the error drops, then settles on a positive plateau pinned
/// by the sphere-limit integral.
pub fn plateau_run(
    x0: [f64; 2],
    delta: f64,
    n_values: &[usize],
) -> Result<PlateauResult, ExperimentError> {
    if n_values.len() < 3 {
        return Err(ExperimentError::TooFewParams {
            need: 3,
            got: n_values.len(),
        });
    }
    let chunk = (n_values.len() / 64).max(8);
    let row_chunks = parallel::map_chunks(n_values.len(), chunk, |range| {
        let mut rows = Vec::with_capacity(range.len());
        for i in range {
            let n = n_values[i];
            let frame = frames::harmonic_frame(2, n)?;
            let e = pcm::error(&frame, &x0, delta)?;
            rows.push((n as f64, e));
        }
        Ok::<_, ExperimentError>(rows)
    });
    let mut rows = Vec::with_capacity(n_values.len());
    for c in row_chunks {
        rows.extend(c?);
    }
    let sweep = SweepResult::new(
        "plateau",
        None,
        serde_json::json!({"x0": x0, "delta": delta, "n_min": n_values.first(), "n_max": n_values.last()}),
        rows,
    );
    let plateau = plateau_stats(&sweep.rows);
    let sphere_limit = integrals::sphere_limit_error(&x0, delta)?;
    let rel_gap = (plateau.mean - sphere_limit).abs() / sphere_limit;
    let pass = plateau.cv < PLATEAU_CV_MAX && plateau.mean > 0.0 && rel_gap <= PLATEAU_LIMIT_REL_MAX;
    Ok(PlateauResult {
        sweep,
        plateau,
        sphere_limit,
        rel_gap,
        pass,
    })
}

/// Mean and coefficient of variation over the top quartile of rows (by
/// parameter; rows are sorted).
pub fn plateau_stats(rows: &[(f64, f64)]) -> PlateauStats {
    let start = rows.len() - rows.len() / 4;
    let tail = &rows[start.min(rows.len() - 1)..];
    let n = tail.len() as f64;
    let mean = tail.iter().map(|r| r.1).sum::<f64>() / n;
    let var = tail.iter().map(|r| (r.1 - mean) * (r.1 - mean)).sum::<f64>() / n;
    PlateauStats {
        mean,
        cv: var.sqrt() / mean,
    }
}

// ------------------------------------------------------------------ step-size scaling

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `N = ⌈c/δ²⌉` with c ≤ 1: errors stay under the `√(δ/N)` envelope.
    SmallN,
    /// `N = ⌈c/δ²⌉` with c ≥ 4: errors scale like `δ^{3/2}`.
    LargeN,
}

/// Redundancy factors for the two regimes.
pub const SMALL_N_FACTOR: f64 = 0.25;
pub const LARGE_N_FACTOR: f64 = 4.0;
/// Acceptance window for the large-N slope of `log E` vs `log δ`.
pub const LARGE_N_SLOPE_WINDOW: (f64, f64) = (1.35, 1.65);

#[derive(Debug, Clone, Serialize)]
pub struct StepScalingResult {
    pub sweep: SweepResult,
    pub regime: Regime,
    /// Large-N only.
    pub slope: Option<f64>,
    /// Small-N only: `max E/√(δ/N)` over the grid.
    pub envelope_max: Option<f64>,
    pub pass: bool,
}

/// Error of a fixed signal against path-sampled frames tied to the step
/// size: `N = ⌈c/δ²⌉` per regime, rows `(δ, E)`.
pub fn step_scaling(
    x: &[f64],
    path: &FramePath,
    deltas: &[f64],
    regime: Regime,
) -> Result<StepScalingResult, ExperimentError> {
    if deltas.len() < 3 {
        return Err(ExperimentError::TooFewParams {
            need: 3,
            got: deltas.len(),
        });
    }
    let factor = match regime {
        Regime::SmallN => SMALL_N_FACTOR,
        Regime::LargeN => LARGE_N_FACTOR,
    };
    let mut rows = Vec::with_capacity(deltas.len());
    let mut envelope_max = 0.0_f64;
    for &delta in deltas {
        let n = ((factor / (delta * delta)).ceil() as usize).max(path.dim());
        let frame = frames::frame_path_sample(path, n)?;
        let e = pcm::error(&frame, x, delta)?;
        envelope_max = envelope_max.max(e / (delta / n as f64).sqrt());
        rows.push((delta, e));
    }
    let sweep = SweepResult::new(
        "step_scaling",
        None,
        serde_json::json!({"x": x, "deltas": deltas, "factor": factor, "regime": format!("{regime:?}")}),
        rows,
    );
    let (slope, envelope, pass) = match regime {
        Regime::LargeN => {
            let slope = sweep.fit.map(|f| f.slope);
            let ok = slope
                .map(|s| s >= LARGE_N_SLOPE_WINDOW.0 && s <= LARGE_N_SLOPE_WINDOW.1)
                .unwrap_or(false);
            (slope, None, ok)
        }
        Regime::SmallN => (None, Some(envelope_max), envelope_max.is_finite()),
    };
    Ok(StepScalingResult {
        sweep,
        regime,
        slope,
        envelope_max: envelope,
        pass,
    })
}

// ------------------------------------------------------------------ average-error checks

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RPolicy {
    /// `r = δ(m − 1/2)` for m = 1..20: the certified lower-bound grid.
    EpsZero,
    /// `r = r*(δ)`: the vanishing ratio, where the average error decays
    /// like 1/N.
    MagicRatio,
}

/// Frame size used on the lower-bound grid.
pub const EPS_ZERO_FRAME_SIZE: usize = 512;
/// Frame sizes used for the magic-ratio decay fit.
pub const MAGIC_RATIO_SIZES: [usize; 8] = [16, 32, 64, 128, 256, 512, 1024, 2048];
/// Acceptance window for the magic-ratio slope of `log 𝔈` vs `log N`.
pub const MAGIC_SLOPE_WINDOW: (f64, f64) = (-1.15, -0.85);

#[derive(Debug, Clone, Serialize)]
pub struct AvgErrorGridRow {
    pub delta: f64,
    pub rows: Vec<(f64, f64)>,
    pub fit: Option<LogLogFit>,
    /// EpsZero: number of grid points where the bound failed.
    pub violations: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AvgErrorGridResult {
    pub policy: RPolicy,
    pub per_delta: Vec<AvgErrorGridRow>,
    pub config: serde_json::Value,
    pub pass: bool,
}

/// Average-error checks on the planar harmonic family: the `δ^{3/2}/√r`
/// lower bound on the half-integer grid, or the 1/N decay at the vanishing
/// ratio.
pub fn avg_error_checks(deltas: &[f64], policy: RPolicy) -> Result<AvgErrorGridResult, ExperimentError> {
    let mut per_delta = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        match policy {
            RPolicy::EpsZero => {
                let frame = frames::harmonic_frame(2, EPS_ZERO_FRAME_SIZE)?;
                let outcomes = parallel::map_chunks(20, 1, |range| {
                    let mut out = Vec::new();
                    for i in range {
                        let m = i + 1;
                        let r = delta * (m as f64 - 0.5);
                        let spec = RadialSpec::new(r, delta)?;
                        let avg = integrals::avg_error_direct(&frame, &spec, 40_000)?;
                        let bound = 32.0 / (3.0 * std::f64::consts::PI.powf(2.5))
                            * delta.powf(1.5)
                            / r.sqrt();
                        out.push((r, avg, avg < bound));
                    }
                    Ok::<_, ExperimentError>(out)
                });
                let mut rows = Vec::new();
                let mut violations = 0;
                for chunk in outcomes {
                    for (r, avg, violated) in chunk? {
                        if violated {
                            violations += 1;
                        }
                        rows.push((r, avg));
                    }
                }
                per_delta.push(AvgErrorGridRow {
                    delta,
                    rows,
                    fit: None,
                    violations,
                    pass: violations == 0,
                });
            }
            RPolicy::MagicRatio => {
                let r = integrals::find_rstar(delta)?;
                let spec = RadialSpec::new(r, delta)?;
                let rows_res = parallel::map_chunks(MAGIC_RATIO_SIZES.len(), 1, |range| {
                    let mut out = Vec::new();
                    for i in range {
                        let n = MAGIC_RATIO_SIZES[i];
                        let frame = frames::harmonic_frame(2, n)?;
                        let avg = integrals::avg_error_direct(&frame, &spec, 40_000)?;
                        out.push((n as f64, avg));
                    }
                    Ok::<_, ExperimentError>(out)
                });
                let mut rows = Vec::new();
                for c in rows_res {
                    rows.extend(c?);
                }
                rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                let fit = fit_loglog(&rows).ok();
                let pass = fit
                    .map(|f| f.slope >= MAGIC_SLOPE_WINDOW.0 && f.slope <= MAGIC_SLOPE_WINDOW.1)
                    .unwrap_or(false);
                per_delta.push(AvgErrorGridRow {
                    delta,
                    rows,
                    fit,
                    violations: 0,
                    pass,
                });
            }
        }
    }
    let pass = per_delta.iter().all(|d| d.pass);
    Ok(AvgErrorGridResult {
        policy,
        config: serde_json::json!({"deltas": deltas, "policy": format!("{policy:?}")}),
        per_delta,
        pass,
    })
}

// ------------------------------------------------------------------ high-dimension scaling

/// Acceptance half-width around the `(d+1)/2` exponent.
pub const HIGHD_SLOPE_TOL: f64 = 0.2;
/// Cross-check frame size and allowed relative gap for d = 3.
pub const CROSSCHECK_FRAME_SIZE: usize = 4096;
pub const CROSSCHECK_REL_MAX: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct CrossCheck {
    pub n: usize,
    pub seed: u64,
    pub delta: f64,
    pub pcm_error: f64,
    pub sphere_limit: f64,
    pub rel_gap: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HighdScalingResult {
    pub sweep: SweepResult,
    pub d: usize,
    pub slope: Option<f64>,
    pub expected_slope: f64,
    /// Only populated for d = 3.
    pub crosscheck: Option<CrossCheck>,
    pub pass: bool,
}

/// Sphere-limit error against the step size along a fixed unit direction,
/// restricted to half-integer ratios so the `δ^{(d+1)/2}` law is clean; for
/// d = 3 the reduced integral is cross-checked against an actual descent
/// frame of size 4096.
pub fn highd_scaling(
    d: usize,
    x_direction: &[f64],
    deltas: &[f64],
    seed: u64,
) -> Result<HighdScalingResult, ExperimentError> {
    if deltas.len() < 3 {
        return Err(ExperimentError::TooFewParams {
            need: 3,
            got: deltas.len(),
        });
    }
    let norm = x_direction.iter().map(|c| c * c).sum::<f64>().sqrt();
    let x: Vec<f64> = x_direction.iter().map(|c| c / norm).collect();
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        rows.push((delta, integrals::sphere_limit_error(&x, delta)?));
    }
    let sweep = SweepResult::new(
        "highd_scaling",
        Some(seed),
        serde_json::json!({"d": d, "deltas": deltas}),
        rows,
    );
    let slope = sweep.fit.map(|f| f.slope);
    let expected_slope = (d as f64 + 1.0) / 2.0;
    let slope_ok = slope
        .map(|s| (s - expected_slope).abs() <= HIGHD_SLOPE_TOL)
        .unwrap_or(false);
    let crosscheck = if d == 3 {
        let delta = 2.0 / 3.0; // ratio 3/2 on the half-integer grid
        let frame = frames::funtf_equidistributed(3, CROSSCHECK_FRAME_SIZE, seed)?;
        let pcm_error = pcm::error(&frame, &x, delta)?;
        let sphere_limit = integrals::sphere_limit_error(&x, delta)?;
        let rel_gap = (pcm_error - sphere_limit).abs() / sphere_limit;
        Some(CrossCheck {
            n: CROSSCHECK_FRAME_SIZE,
            seed,
            delta,
            pcm_error,
            sphere_limit,
            rel_gap,
            pass: rel_gap <= CROSSCHECK_REL_MAX,
        })
    } else {
        None
    };
    let pass = slope_ok && crosscheck.as_ref().map(|c| c.pass).unwrap_or(true);
    Ok(HighdScalingResult {
        sweep,
        d,
        slope,
        expected_slope,
        crosscheck,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    // -------------------------------------------------------------- fits

    #[test]
    fn fit_recovers_power_law() {
        let rows: Vec<(f64, f64)> = (1..=10).map(|i| {
            let x = i as f64;
            (x, x.powf(1.5))
        }).collect();
        let fit = fit_loglog(&rows).unwrap();
        assert!(close(fit.slope, 1.5, 1e-12));
        assert!(fit.residual_rms < 1e-12);
    }

    #[test]
    fn fit_recovers_linear_with_intercept() {
        let rows: Vec<(f64, f64)> = (1..=8).map(|i| (i as f64, 2.0 * i as f64)).collect();
        let fit = fit_loglog(&rows).unwrap();
        assert!(close(fit.slope, 1.0, 1e-12));
        assert!(close(fit.intercept, 2.0_f64.ln(), 1e-12));
    }

    #[test]
    fn fit_rejects_thin_data() {
        assert!(matches!(
            fit_loglog(&[(1.0, 1.0), (2.0, 2.0)]),
            Err(ExperimentError::TooFewRows(2))
        ));
        // Non-positive values are dropped before counting.
        assert!(matches!(
            fit_loglog(&[(1.0, 1.0), (2.0, 0.0), (3.0, -1.0), (4.0, 2.0)]),
            Err(ExperimentError::TooFewRows(2))
        ));
    }

    // -------------------------------------------------------------- sweeps

    #[test]
    fn sweep_rows_are_sorted_and_csv_formats() {
        let sweep = SweepResult::new(
            "demo",
            Some(1),
            serde_json::json!({}),
            vec![(3.0, 1.0), (1.0, 2.0), (2.0, 3.0)],
        );
        assert_eq!(sweep.rows[0].0, 1.0);
        assert_eq!(sweep.rows[2].0, 3.0);
        let csv = sweep.to_csv();
        assert!(csv.starts_with("param,value\n"));
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn plateau_constant_below_threshold() {
        // δ huge: every row equals ‖x0‖.
        let x0 = [0.3, 0.4];
        let out = plateau_run(x0, 8.0, &[4, 5, 6, 7, 8]).unwrap();
        for (_, e) in &out.sweep.rows {
            assert!(close(*e, 0.5, 1e-15));
        }
        assert!(close(out.plateau.mean, 0.5, 1e-15));
        assert!(out.plateau.cv < 1e-12);
        // Sub-threshold limit equals the norm as well.
        assert!(close(out.sphere_limit, 0.5, 1e-12));
        assert!(out.pass);
    }

    #[test]
    fn plateau_no_exact_zero_rows() {
        let x0 = [std::f64::consts::PI, std::f64::consts::E];
        let ns: Vec<usize> = (10..200).collect();
        let out = plateau_run(x0, 1.0 / 16.0, &ns).unwrap();
        assert!(out.sweep.rows.iter().all(|(_, e)| *e > 0.0));
    }

    #[test]
    fn plateau_uses_top_quartile() {
        let rows: Vec<(f64, f64)> = (1..=100)
            .map(|i| (i as f64, if i > 75 { 2.0 } else { 50.0 }))
            .collect();
        let stats = plateau_stats(&rows);
        assert!(close(stats.mean, 2.0, 1e-12));
        assert!(stats.cv < 1e-12);
    }

    // -------------------------------------------------------------- scenarios

    #[test]
    fn step_scaling_small_n_envelope_bounded() {
        let path = FramePath::harmonic(2).unwrap();
        let deltas: Vec<f64> = (4..=8).map(|p| 2f64.powi(-p)).collect();
        let out = step_scaling(
            &[std::f64::consts::PI, std::f64::consts::E],
            &path,
            &deltas,
            Regime::SmallN,
        )
        .unwrap();
        assert!(out.pass);
        assert!(out.envelope_max.unwrap() < 1.0, "{:?}", out.envelope_max);
    }

    #[test]
    fn avg_error_grid_small() {
        let out = avg_error_checks(&[0.125], RPolicy::EpsZero).unwrap();
        assert!(out.pass, "violations: {}", out.per_delta[0].violations);
        assert_eq!(out.per_delta[0].rows.len(), 20);
    }

    #[test]
    fn highd_scaling_d2_slope() {
        let deltas: Vec<f64> = (2..=20).map(|m| 1.0 / (m as f64 - 0.5)).collect();
        let out = highd_scaling(2, &[1.0, 0.0], &deltas, 1).unwrap();
        assert!(out.pass);
        assert!((out.slope.unwrap() - 1.5).abs() <= HIGHD_SLOPE_TOL);
        assert!(out.crosscheck.is_none());
    }

    #[test]
    fn highd_scaling_subthreshold_is_exact() {
        // r below δ/2 on every grid point: limit equals r, slope 0 → fail.
        let deltas = [4.0, 5.0, 6.0, 8.0];
        let out = highd_scaling(2, &[0.6, 0.8], &deltas, 1).unwrap();
        for (_, v) in &out.sweep.rows {
            assert!(close(*v, 1.0, 1e-12)); // direction normalized to r = 1
        }
        assert!(!out.pass);
    }
}
