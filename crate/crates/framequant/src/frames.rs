//! Finite unit-norm tight frames of R^d.
//!
//! A frame is stored as an ordered list of N unit vectors (the order is part
//! of the data model: frame variation and Abel summation depend on it). Every
//! constructor certifies tightness by measuring the max-norm residual of
//! `F Fᵀ − (N/d) I` and records the verdict on the frame itself.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Default certification tolerance. The floating-point granularity of the
/// Gram entries grows with λ = N/d, so the tolerance follows it once λ is
/// large enough for ulp(λ) to matter.
pub fn default_tight_tol(n: usize, d: usize) -> f64 {
    let lambda = n as f64 / d as f64;
    (1e-10_f64).max(32.0 * f64::EPSILON * lambda)
}

/// Iteration cap for the frame-potential descent.
pub const FUNTF_ITERATION_CAP: usize = 100_000;

/// Tightness residual at which the descent stops.
pub const FUNTF_RESIDUAL_TARGET: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("a frame of R^{d} needs at least {d} vectors, got {n}")]
    TooFewVectors { n: usize, d: usize },
    #[error("vector {index} has norm {norm}, not unit within {tol}")]
    NotUnitNorm { index: usize, norm: f64, tol: f64 },
    #[error("vector {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("harmonic frame with even d = {d} and N = d is rank-deficient; use N > d")]
    DegenerateHarmonic { d: usize },
    #[error("frame operator is singular (rank {rank} < {d})")]
    SingularOperator { rank: usize, d: usize },
    #[error("dimension mismatch: frame has d = {frame}, input has d = {input}")]
    DimensionMismatch { frame: usize, input: usize },
    #[error("frame path evaluator returned non-unit vector at u = {u} (norm {norm})")]
    PathNotUnit { u: f64, norm: f64 },
    #[error("frame parse error: {0}")]
    Parse(String),
}

/// Result of measuring `F Fᵀ` against `(N/d) I`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TightnessReport {
    /// Max-norm of `F Fᵀ − (N/d) I`.
    pub residual: f64,
    /// `trace(F Fᵀ)/d`; equals N/d for unit-norm frames up to rounding.
    pub lambda_estimate: f64,
    /// Whether `residual ≤ tol`.
    pub pass: bool,
    /// Tolerance the verdict was taken at.
    pub tol: f64,
}

/// An ordered set of N unit vectors in R^d with a tightness certification.
#[derive(Debug, Clone)]
pub struct Frame {
    dim: usize,
    /// Row-major N×d coordinates.
    data: Vec<f64>,
    tight_tol: f64,
    tight: bool,
    tight_residual: f64,
}

impl Frame {
    /// Build a frame from row vectors, validate unit norms, and certify
    /// tightness at `tight_tol`. Rank deficiency is not an error here: the
    /// certification simply fails and downstream consumers refuse the frame.
    pub fn from_vectors(
        dim: usize,
        vectors: Vec<Vec<f64>>,
        tight_tol: f64,
    ) -> Result<Self, FrameError> {
        if dim < 2 {
            return Err(FrameError::BadDimension(dim));
        }
        let n = vectors.len();
        if n == 0 {
            return Err(FrameError::TooFewVectors { n, d: dim });
        }
        let mut data = Vec::with_capacity(n * dim);
        for (index, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(FrameError::DimensionMismatch {
                    frame: dim,
                    input: v.len(),
                });
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(FrameError::NonFinite { index });
            }
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            let norm_tol = tight_tol.max(1e-12);
            if (norm - 1.0).abs() > norm_tol {
                return Err(FrameError::NotUnitNorm {
                    index,
                    norm,
                    tol: norm_tol,
                });
            }
            data.extend_from_slice(v);
        }
        let mut frame = Frame {
            dim,
            data,
            tight_tol,
            tight: false,
            tight_residual: f64::INFINITY,
        };
        let report = verify_tight(&frame, tight_tol);
        frame.tight = report.pass;
        frame.tight_residual = report.residual;
        Ok(frame)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of vectors N.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// The j-th vector (0-based, insertion order).
    pub fn vector(&self, j: usize) -> &[f64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Whether the stored certification passed.
    pub fn is_tight(&self) -> bool {
        self.tight
    }

    pub fn tight_tol(&self) -> f64 {
        self.tight_tol
    }

    /// Residual measured when the frame was certified.
    pub fn tight_residual(&self) -> f64 {
        self.tight_residual
    }

    /// Serialize to the `framequant-frame v1` text format: a header line then
    /// one line of 17-significant-digit coordinates per vector.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "framequant-frame v1 d={} N={} tight={} tol={:e}",
            self.dim,
            self.len(),
            self.tight,
            self.tight_tol
        );
        for v in self.vectors() {
            let line: Vec<String> = v.iter().map(|c| format!("{c:.16e}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    /// Parse the `framequant-frame v1` text format and re-certify.
    pub fn from_text(text: &str) -> Result<Self, FrameError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| FrameError::Parse("empty input".into()))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("framequant-frame") || fields.next() != Some("v1") {
            return Err(FrameError::Parse("bad magic; expected 'framequant-frame v1'".into()));
        }
        let mut d = None;
        let mut n = None;
        let mut tol = None;
        for field in fields {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| FrameError::Parse(format!("bad header field '{field}'")))?;
            match key {
                "d" => d = Some(value.parse::<usize>().map_err(|e| FrameError::Parse(e.to_string()))?),
                "N" => n = Some(value.parse::<usize>().map_err(|e| FrameError::Parse(e.to_string()))?),
                "tol" => tol = Some(value.parse::<f64>().map_err(|e| FrameError::Parse(e.to_string()))?),
                "tight" => {} // recomputed below
                other => return Err(FrameError::Parse(format!("unknown header key '{other}'"))),
            }
        }
        let d = d.ok_or_else(|| FrameError::Parse("missing d".into()))?;
        let n = n.ok_or_else(|| FrameError::Parse("missing N".into()))?;
        let tol = tol.ok_or_else(|| FrameError::Parse("missing tol".into()))?;
        let mut vectors = Vec::with_capacity(n);
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let coords: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
            let coords = coords.map_err(|e| FrameError::Parse(format!("line {}: {e}", i + 2)))?;
            vectors.push(coords);
        }
        if vectors.len() != n {
            return Err(FrameError::Parse(format!(
                "header says N={n} but found {} vector lines",
                vectors.len()
            )));
        }
        Frame::from_vectors(d, vectors, tol)
    }
}

/// A 1-periodic curve of unit vectors whose equispaced samples are meant to
/// form unit-norm tight frames.
pub struct FramePath {
    dim: usize,
    kind: PathKind,
    evaluator: Box<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    Harmonic,
    CustomTable,
}

impl FramePath {
    /// The harmonic path: stacked sinusoids at frequencies `1..=d/2`, scaled
    /// to unit norm, evaluated at angle `2πu` so that sampling at
    /// `u = j/N` reproduces the harmonic frame coordinates exactly.
    pub fn harmonic(dim: usize) -> Result<Self, FrameError> {
        if dim < 2 {
            return Err(FrameError::BadDimension(dim));
        }
        Ok(FramePath {
            dim,
            kind: PathKind::Harmonic,
            evaluator: Box::new(move |u| harmonic_point(dim, std::f64::consts::TAU * u)),
        })
    }

    /// A caller-supplied path. The evaluator is checked for unit norm on a
    /// dense grid at tolerance 1e-12.
    pub fn custom(
        dim: usize,
        evaluator: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self, FrameError> {
        if dim < 2 {
            return Err(FrameError::BadDimension(dim));
        }
        let path = FramePath {
            dim,
            kind: PathKind::CustomTable,
            evaluator: Box::new(evaluator),
        };
        path.check_unit_norm(512)?;
        Ok(path)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    /// Evaluate at `u ∈ [0, 1)`.
    pub fn eval(&self, u: f64) -> Vec<f64> {
        (self.evaluator)(u)
    }

    fn check_unit_norm(&self, grid: usize) -> Result<(), FrameError> {
        for i in 0..grid {
            let u = i as f64 / grid as f64;
            let v = self.eval(u);
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(FrameError::PathNotUnit { u, norm });
            }
        }
        Ok(())
    }

    /// Seam defect `‖f(0) − f(1⁻)‖`; ~0 for 1-periodic paths.
    pub fn seam_defect(&self) -> f64 {
        let a = self.eval(0.0);
        let b = self.eval(1.0 - 1e-9);
        a.iter()
            .zip(&b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }
}

fn harmonic_point(dim: usize, t: f64) -> Vec<f64> {
    let scale = (2.0 / dim as f64).sqrt();
    let mut v = Vec::with_capacity(dim);
    if dim % 2 == 1 {
        v.push(scale / std::f64::consts::SQRT_2);
    }
    for k in 1..=(dim / 2) {
        let kt = k as f64 * t;
        v.push(scale * kt.cos());
        v.push(scale * kt.sin());
    }
    v
}

/// The harmonic frame: N equispaced samples of the harmonic path.
///
/// For even d and N = d the sine column at frequency d/2 vanishes and the
/// sample set is rank-deficient, so that corner is rejected.
pub fn harmonic_frame(d: usize, n: usize) -> Result<Frame, FrameError> {
    if d < 2 {
        return Err(FrameError::BadDimension(d));
    }
    if n < d {
        return Err(FrameError::TooFewVectors { n, d });
    }
    if d.is_multiple_of(2) && n == d {
        return Err(FrameError::DegenerateHarmonic { d });
    }
    let vectors: Vec<Vec<f64>> = (0..n)
        .map(|j| harmonic_point(d, std::f64::consts::TAU * j as f64 / n as f64))
        .collect();
    let frame = Frame::from_vectors(d, vectors, default_tight_tol(n, d))?;
    debug_assert!(frame.is_tight());
    Ok(frame)
}

/// Sample a frame path at `u = j/N`, j = 0..N−1. Tightness is measured, not
/// assumed: a degenerate path yields a frame whose certification failed.
pub fn frame_path_sample(path: &FramePath, n: usize) -> Result<Frame, FrameError> {
    if n < path.dim() {
        return Err(FrameError::TooFewVectors { n, d: path.dim() });
    }
    let vectors: Vec<Vec<f64>> = (0..n).map(|j| path.eval(j as f64 / n as f64)).collect();
    Frame::from_vectors(path.dim(), vectors, default_tight_tol(n, path.dim()))
}

/// Measure `F Fᵀ` against `(N/d) I`. Gram entries are accumulated with
/// compensated summation so the residual stays at the rounding floor even
/// for frames with millions of vectors.
pub fn verify_tight(frame: &Frame, tol: f64) -> TightnessReport {
    let d = frame.dim();
    let n = frame.len();
    let gram = gram_matrix(frame);
    let lambda = n as f64 / d as f64;
    let mut residual = 0.0_f64;
    for a in 0..d {
        for b in 0..d {
            let target = if a == b { lambda } else { 0.0 };
            residual = residual.max((gram[a * d + b] - target).abs());
        }
    }
    let trace: f64 = (0..d).map(|a| gram[a * d + a]).sum();
    TightnessReport {
        residual,
        lambda_estimate: trace / d as f64,
        pass: residual <= tol,
        tol,
    }
}

/// Row-major d×d Gram matrix `F Fᵀ = Σ_j e_j e_jᵀ`, Kahan-compensated.
pub(crate) fn gram_matrix(frame: &Frame) -> Vec<f64> {
    let d = frame.dim();
    let mut sum = vec![0.0_f64; d * d];
    let mut comp = vec![0.0_f64; d * d];
    for v in frame.vectors() {
        for a in 0..d {
            for b in a..d {
                let term = v[a] * v[b];
                let idx = a * d + b;
                let y = term - comp[idx];
                let t = sum[idx] + y;
                comp[idx] = (t - sum[idx]) - y;
                sum[idx] = t;
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            sum[a * d + b] = sum[b * d + a];
        }
    }
    sum
}

/// The canonical dual `{S⁻¹ e_j}` of a frame, with `S = F Fᵀ`.
#[derive(Debug, Clone)]
pub struct DualFrame {
    dim: usize,
    dual_data: Vec<f64>,
}

impl DualFrame {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.dual_data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.dual_data.is_empty()
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        &self.dual_data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.dual_data.chunks_exact(self.dim)
    }

    /// Reconstruct `x` from its analysis coefficients against the base frame:
    /// `Σ_j c_j S⁻¹e_j`.
    pub fn synthesize(&self, coefficients: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for (c, v) in coefficients.iter().zip(self.vectors()) {
            for (xa, va) in x.iter_mut().zip(v) {
                *xa += c * va;
            }
        }
        x
    }
}

/// Compute the canonical dual frame. Fails if the frame operator is singular.
pub fn canonical_dual(frame: &Frame) -> Result<DualFrame, FrameError> {
    let d = frame.dim();
    let gram = gram_matrix(frame);
    let inv = invert_spd(&gram, d).ok_or_else(|| {
        let rank = matrix_rank(&gram, d);
        FrameError::SingularOperator { rank, d }
    })?;
    let mut dual_data = Vec::with_capacity(frame.len() * d);
    for v in frame.vectors() {
        for a in 0..d {
            let mut s = 0.0;
            for b in 0..d {
                s += inv[a * d + b] * v[b];
            }
            dual_data.push(s);
        }
    }
    Ok(DualFrame { dim: d, dual_data })
}

/// Gauss-Jordan inverse with partial pivoting; `None` when a pivot falls
/// below the singularity threshold.
fn invert_spd(m: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut a = m.to_vec();
    let mut inv = vec![0.0; d * d];
    for i in 0..d {
        inv[i * d + i] = 1.0;
    }
    let scale: f64 = m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())).max(1.0);
    for col in 0..d {
        let pivot_row = (col..d)
            .max_by(|&r1, &r2| {
                a[r1 * d + col]
                    .abs()
                    .partial_cmp(&a[r2 * d + col].abs())
                    .unwrap()
            })
            .unwrap();
        let pivot = a[pivot_row * d + col];
        if pivot.abs() <= scale * 1e-13 {
            return None;
        }
        if pivot_row != col {
            for k in 0..d {
                a.swap(col * d + k, pivot_row * d + k);
                inv.swap(col * d + k, pivot_row * d + k);
            }
        }
        let inv_pivot = 1.0 / a[col * d + col];
        for k in 0..d {
            a[col * d + k] *= inv_pivot;
            inv[col * d + k] *= inv_pivot;
        }
        for row in 0..d {
            if row == col {
                continue;
            }
            let factor = a[row * d + col];
            if factor == 0.0 {
                continue;
            }
            for k in 0..d {
                a[row * d + k] -= factor * a[col * d + k];
                inv[row * d + k] -= factor * inv[col * d + k];
            }
        }
    }
    Some(inv)
}

/// Numerical rank of a symmetric d×d matrix by row elimination.
fn matrix_rank(m: &[f64], d: usize) -> usize {
    let mut a = m.to_vec();
    let scale: f64 = m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())).max(1.0);
    let mut rank = 0;
    let mut row = 0;
    for col in 0..d {
        let pivot_row = (row..d).max_by(|&r1, &r2| {
            a[r1 * d + col]
                .abs()
                .partial_cmp(&a[r2 * d + col].abs())
                .unwrap()
        });
        let Some(pr) = pivot_row else { break };
        if a[pr * d + col].abs() <= scale * 1e-13 {
            continue;
        }
        for k in 0..d {
            a.swap(row * d + k, pr * d + k);
        }
        for r in (row + 1)..d {
            let factor = a[r * d + col] / a[row * d + col];
            for k in 0..d {
                a[r * d + k] -= factor * a[row * d + k];
            }
        }
        rank += 1;
        row += 1;
    }
    rank
}

/// Unit-norm tight frame by frame-potential descent from seeded random
/// vectors: minimize `‖F Fᵀ − (N/d) I‖_F²` over the product of spheres with
/// projected-gradient steps, backtracking line search, and per-step
/// renormalization. Deterministic for a fixed seed.
///
/// If the residual target is not reached within the iteration cap the best
/// iterate is returned carrying a failed certification.
pub fn funtf_equidistributed(d: usize, n: usize, seed: u64) -> Result<Frame, FrameError> {
    if d < 2 {
        return Err(FrameError::BadDimension(d));
    }
    if n < d {
        return Err(FrameError::TooFewVectors { n, d });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![0.0_f64; n * d];
    for row in data.chunks_exact_mut(d) {
        loop {
            for c in row.iter_mut() {
                *c = standard_normal(&mut rng);
            }
            let norm = row.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > 1e-6 {
                for c in row.iter_mut() {
                    *c /= norm;
                }
                break;
            }
        }
    }

    let lambda = n as f64 / d as f64;
    let mut step = 0.25 / lambda;
    let max_step = 4.0 / lambda;

    let objective = |data: &[f64]| -> (f64, f64, Vec<f64>) {
        // Returns (sum of squares, max-norm residual, deviation matrix S − λI).
        let mut gram = vec![0.0_f64; d * d];
        for v in data.chunks_exact(d) {
            for a in 0..d {
                for b in a..d {
                    gram[a * d + b] += v[a] * v[b];
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                gram[a * d + b] = gram[b * d + a];
            }
        }
        let mut dev = gram;
        let mut frob = 0.0;
        let mut maxres = 0.0_f64;
        for a in 0..d {
            for b in 0..d {
                if a == b {
                    dev[a * d + b] -= lambda;
                }
                frob += dev[a * d + b] * dev[a * d + b];
                maxres = maxres.max(dev[a * d + b].abs());
            }
        }
        (frob, maxres, dev)
    };

    let (mut obj, mut res, mut dev) = objective(&data);
    let mut iterations = 0;
    while res > FUNTF_RESIDUAL_TARGET && iterations < FUNTF_ITERATION_CAP {
        iterations += 1;
        // Riemannian gradient of the Frobenius objective: 4 (S − λI) e_j,
        // projected onto the tangent space of each sphere.
        let mut grad = vec![0.0_f64; n * d];
        for (v, g) in data.chunks_exact(d).zip(grad.chunks_exact_mut(d)) {
            for a in 0..d {
                let mut s = 0.0;
                for b in 0..d {
                    s += dev[a * d + b] * v[b];
                }
                g[a] = 4.0 * s;
            }
            let dot: f64 = g.iter().zip(v).map(|(ga, va)| ga * va).sum();
            for (ga, va) in g.iter_mut().zip(v) {
                *ga -= dot * va;
            }
        }
        let mut accepted = false;
        let mut t = step;
        for _ in 0..60 {
            let mut trial = data.clone();
            for (row, g) in trial.chunks_exact_mut(d).zip(grad.chunks_exact(d)) {
                for (c, ga) in row.iter_mut().zip(g) {
                    *c -= t * ga;
                }
                let norm = row.iter().map(|c| c * c).sum::<f64>().sqrt();
                for c in row.iter_mut() {
                    *c /= norm;
                }
            }
            let (obj2, res2, dev2) = objective(&trial);
            if obj2 < obj {
                data = trial;
                obj = obj2;
                res = res2;
                dev = dev2;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break; // line search exhausted at the gradient floor
        }
        step = (t * 1.5).min(max_step);
    }

    // Exact renormalization of the returned vectors.
    for row in data.chunks_exact_mut(d) {
        let norm = row.iter().map(|c| c * c).sum::<f64>().sqrt();
        for c in row.iter_mut() {
            *c /= norm;
        }
    }
    let vectors: Vec<Vec<f64>> = data.chunks_exact(d).map(|r| r.to_vec()).collect();
    Frame::from_vectors(d, vectors, default_tight_tol(n, d).max(FUNTF_RESIDUAL_TARGET))
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; fine for seeding a descent.
    loop {
        let u1: f64 = rng.gen::<f64>();
        let u2: f64 = rng.gen::<f64>();
        if u1 > f64::MIN_POSITIVE {
            return (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        }
    }
}

pub type SphereFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A test function on the unit sphere together with its exact mean against
/// the normalized surface measure.
pub struct SphereProbe {
    pub name: String,
    pub integral: f64,
    pub f: SphereFn,
}

impl SphereProbe {
    /// Monomial probe `z₀^{e₀}·…·z_{d−1}^{e_{d−1}}`. The sphere mean is zero
    /// when any exponent is odd and otherwise
    /// `Π (eᵢ−1)!! / (d (d+2) ⋯ (d+2k−2))` with `2k = Σ eᵢ`.
    pub fn monomial(d: usize, exponents: Vec<u32>) -> Self {
        assert_eq!(exponents.len(), d);
        let total: u32 = exponents.iter().sum();
        let integral = if exponents.iter().any(|e| e % 2 == 1) {
            0.0
        } else {
            let mut num = 1.0;
            for &e in &exponents {
                num *= double_factorial(e.saturating_sub(1));
            }
            let mut den = 1.0;
            let k = total / 2;
            for i in 0..k {
                den *= (d as u32 + 2 * i) as f64;
            }
            num / den
        };
        let name = format!(
            "z^({})",
            exponents
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        let exps = exponents;
        SphereProbe {
            name,
            integral,
            f: Box::new(move |z| {
                z.iter()
                    .zip(&exps)
                    .map(|(zi, &e)| zi.powi(e as i32))
                    .product()
            }),
        }
    }
}

fn double_factorial(n: u32) -> f64 {
    let mut out = 1.0;
    let mut k = n;
    while k > 1 {
        out *= k as f64;
        k -= 2;
    }
    out
}

/// Worst-case deviation `|frame mean of f − sphere mean of f|` over probes.
pub fn equidistribution_metric(frame: &Frame, probes: &[SphereProbe]) -> f64 {
    let n = frame.len() as f64;
    probes
        .iter()
        .map(|p| {
            let mean: f64 = frame.vectors().map(|v| (p.f)(v)).sum::<f64>() / n;
            (mean - p.integral).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    // ---------------------------------------------------------- harmonic

    #[test]
    fn harmonic_2_4_is_quarter_turns() {
        let f = harmonic_frame(2, 4).unwrap();
        let expected = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (v, e) in f.vectors().zip(&expected) {
            assert!(close(v[0], e[0], 1e-15) && close(v[1], e[1], 1e-15), "{v:?} vs {e:?}");
        }
        let report = verify_tight(&f, 1e-12);
        assert!(report.pass);
        assert!(close(report.lambda_estimate, 2.0, 1e-12));
    }

    #[test]
    fn harmonic_2_3_mercedes_benz() {
        let f = harmonic_frame(2, 3).unwrap();
        for (j, v) in f.vectors().enumerate() {
            let angle = std::f64::consts::TAU * j as f64 / 3.0;
            assert!(close(v[0], angle.cos(), 1e-15));
            assert!(close(v[1], angle.sin(), 1e-15));
        }
        assert!(verify_tight(&f, 1e-12).residual < 1e-12);
    }

    #[test]
    fn harmonic_odd_d_leading_component() {
        let f = harmonic_frame(3, 5).unwrap();
        let inv_sqrt3 = 1.0 / 3.0_f64.sqrt();
        for v in f.vectors() {
            assert!(close(v[0], inv_sqrt3, 1e-15));
        }
        assert!(verify_tight(&f, 1e-10).pass);
    }

    #[test]
    fn harmonic_rejects_bad_shapes() {
        assert!(matches!(harmonic_frame(1, 5), Err(FrameError::BadDimension(1))));
        assert!(matches!(
            harmonic_frame(3, 2),
            Err(FrameError::TooFewVectors { n: 2, d: 3 })
        ));
        // Even d with N = d: the top-frequency sine column vanishes.
        assert!(matches!(
            harmonic_frame(2, 2),
            Err(FrameError::DegenerateHarmonic { d: 2 })
        ));
        assert!(matches!(
            harmonic_frame(4, 4),
            Err(FrameError::DegenerateHarmonic { d: 4 })
        ));
    }

    #[test]
    fn harmonic_tight_across_grid() {
        for d in 2..=6 {
            for n in d..=(d + 24) {
                if d % 2 == 0 && n == d {
                    continue;
                }
                let f = harmonic_frame(d, n).unwrap();
                let report = verify_tight(&f, 1e-10);
                assert!(report.pass, "d={d} N={n} residual={}", report.residual);
            }
        }
        let big = harmonic_frame(2, 100_000).unwrap();
        assert!(verify_tight(&big, 1e-10).pass);
    }

    // ---------------------------------------------------------- paths

    #[test]
    fn harmonic_path_reproduces_harmonic_frame() {
        for (d, n) in [(2usize, 4usize), (2, 256), (3, 7), (5, 11)] {
            let path = FramePath::harmonic(d).unwrap();
            let sampled = frame_path_sample(&path, n).unwrap();
            let direct = harmonic_frame(d, n).unwrap();
            for (a, b) in sampled.vectors().zip(direct.vectors()) {
                for (x, y) in a.iter().zip(b) {
                    assert!(close(*x, *y, 1e-14));
                }
            }
            assert!(sampled.is_tight());
        }
    }

    #[test]
    fn harmonic_path_seam_is_periodic() {
        let path = FramePath::harmonic(4).unwrap();
        assert!(path.seam_defect() < 1e-7);
    }

    #[test]
    fn constant_path_yields_non_tight_certification() {
        let path = FramePath::custom(2, |_| vec![1.0, 0.0]).unwrap();
        let f = frame_path_sample(&path, 8).unwrap();
        assert!(!f.is_tight());
        let report = verify_tight(&f, 1e-10);
        assert!(!report.pass);
    }

    #[test]
    fn custom_path_must_be_unit_norm() {
        assert!(matches!(
            FramePath::custom(2, |_| vec![2.0, 0.0]),
            Err(FrameError::PathNotUnit { .. })
        ));
    }

    // ---------------------------------------------------------- verify_tight

    #[test]
    fn verify_tight_reports_rank_deficiency() {
        let f = Frame::from_vectors(
            2,
            vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0]],
            1e-10,
        )
        .unwrap();
        let report = verify_tight(&f, 1e-10);
        assert!(!report.pass);
        assert!(close(report.lambda_estimate, 1.5, 1e-12));
        assert!(close(report.residual, 1.5, 1e-12));
    }

    #[test]
    fn verify_tight_harmonic_100() {
        let f = harmonic_frame(2, 100).unwrap();
        let report = verify_tight(&f, 1e-12);
        assert!(report.pass);
        assert!(close(report.lambda_estimate, 50.0, 1e-12));
    }

    // ---------------------------------------------------------- dual

    #[test]
    fn tight_frame_dual_is_scaled_copy() {
        let f = harmonic_frame(2, 4).unwrap();
        let dual = canonical_dual(&f).unwrap();
        for (v, w) in f.vectors().zip(dual.vectors()) {
            for (a, b) in v.iter().zip(w) {
                assert!(close(*b, 0.5 * a, 1e-12));
            }
        }
    }

    #[test]
    fn dual_reconstructs_non_tight_frame() {
        // A basis plus a diagonal vector: full rank, certainly not tight.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = Frame::from_vectors(
            2,
            vec![vec![1.0, 0.0], vec![s, s], vec![0.0, 1.0]],
            1e-10,
        )
        .unwrap();
        assert!(!f.is_tight());
        let dual = canonical_dual(&f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x = [rng.gen::<f64>() * 4.0 - 2.0, rng.gen::<f64>() * 4.0 - 2.0];
            let coeffs: Vec<f64> = f.vectors().map(|v| v[0] * x[0] + v[1] * x[1]).collect();
            let back = dual.synthesize(&coeffs);
            let norm_x = (x[0] * x[0] + x[1] * x[1]).sqrt().max(1e-12);
            let err = ((back[0] - x[0]).powi(2) + (back[1] - x[1]).powi(2)).sqrt();
            assert!(err <= 1e-10 * norm_x.max(1.0), "err={err}");
        }
    }

    #[test]
    fn dual_of_rank_deficient_frame_fails() {
        let f = Frame::from_vectors(2, vec![vec![1.0, 0.0], vec![-1.0, 0.0]], 1e-10).unwrap();
        assert!(matches!(
            canonical_dual(&f),
            Err(FrameError::SingularOperator { rank: 1, d: 2 })
        ));
    }

    // ---------------------------------------------------------- funtf

    #[test]
    fn funtf_2d_converges_across_seeds() {
        for seed in 0..10 {
            let f = funtf_equidistributed(2, 5, seed).unwrap();
            assert!(f.is_tight(), "seed {seed}");
            assert!(verify_tight(&f, FUNTF_RESIDUAL_TARGET).pass, "seed {seed}");
        }
    }

    #[test]
    fn funtf_3d_converges() {
        let f = funtf_equidistributed(3, 6, 7).unwrap();
        assert!(verify_tight(&f, FUNTF_RESIDUAL_TARGET).pass);
    }

    #[test]
    fn funtf_n_equals_d_is_orthonormal() {
        let f = funtf_equidistributed(3, 3, 11).unwrap();
        // Unit-norm tight with N = d forces pairwise orthogonality.
        for i in 0..3 {
            for j in (i + 1)..3 {
                let dot: f64 = f
                    .vector(i)
                    .iter()
                    .zip(f.vector(j))
                    .map(|(a, b)| a * b)
                    .sum();
                assert!(dot.abs() < 1e-7, "dot({i},{j}) = {dot}");
            }
        }
    }

    #[test]
    fn funtf_is_deterministic_per_seed() {
        let a = funtf_equidistributed(3, 17, 99).unwrap();
        let b = funtf_equidistributed(3, 17, 99).unwrap();
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn funtf_norms_exactly_renormalized() {
        let f = funtf_equidistributed(4, 21, 3).unwrap();
        for v in f.vectors() {
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-14);
        }
    }

    // ---------------------------------------------------------- equidistribution

    #[test]
    fn harmonic_first_coordinate_square_is_half() {
        for n in [3usize, 8, 64] {
            let f = harmonic_frame(2, n).unwrap();
            let probe = SphereProbe::monomial(2, vec![2, 0]);
            assert!(close(probe.integral, 0.5, 1e-15));
            let dev = equidistribution_metric(&f, &[probe]);
            assert!(dev < 1e-12, "N={n} dev={dev}");
        }
    }

    #[test]
    fn repeated_vector_has_deviation_one() {
        let f = Frame::from_vectors(2, vec![vec![1.0, 0.0]; 4], 1e-10).unwrap();
        let probe = SphereProbe::monomial(2, vec![1, 0]);
        assert!(close(equidistribution_metric(&f, &[probe]), 1.0, 1e-15));
    }

    #[test]
    fn funtf_equidistribution_improves_with_n() {
        let probes: Vec<SphereProbe> = [
            vec![2, 0, 0],
            vec![0, 2, 0],
            vec![4, 0, 0],
            vec![2, 2, 0],
            vec![0, 2, 2],
            vec![1, 1, 0],
            vec![3, 1, 0],
        ]
        .into_iter()
        .map(|e| SphereProbe::monomial(3, e))
        .collect();
        let small = funtf_equidistributed(3, 20, 1234).unwrap();
        let large = funtf_equidistributed(3, 200, 1234).unwrap();
        let dev_small = equidistribution_metric(&small, &probes);
        let dev_large = equidistribution_metric(&large, &probes);
        assert!(
            dev_large < dev_small,
            "dev(200)={dev_large} not below dev(20)={dev_small}"
        );
    }

    // ---------------------------------------------------------- text format

    #[test]
    fn text_round_trip() {
        let f = funtf_equidistributed(3, 9, 5).unwrap();
        let text = f.to_text();
        assert!(text.starts_with("framequant-frame v1 d=3 N=9 tight="));
        let back = Frame::from_text(&text).unwrap();
        assert_eq!(back.dim(), 3);
        assert_eq!(back.len(), 9);
        for (a, b) in f.vectors().zip(back.vectors()) {
            assert_eq!(a, b, "17 significant digits must round-trip exactly");
        }
    }

    #[test]
    fn text_parse_rejects_garbage() {
        assert!(Frame::from_text("").is_err());
        assert!(Frame::from_text("framequant-frame v2 d=2 N=1 tight=true tol=1e-10").is_err());
        assert!(Frame::from_text("framequant-frame v1 d=2 N=2 tight=true tol=1e-10\n1 0\n").is_err());
    }

    // ---------------------------------------------------------- sphere probe

    #[test]
    fn monomial_integrals_match_known_values() {
        assert!(close(SphereProbe::monomial(2, vec![2, 0]).integral, 0.5, 1e-15));
        assert!(close(SphereProbe::monomial(2, vec![4, 0]).integral, 3.0 / 8.0, 1e-15));
        assert!(close(SphereProbe::monomial(2, vec![2, 2]).integral, 1.0 / 8.0, 1e-15));
        assert!(close(SphereProbe::monomial(3, vec![2, 0, 0]).integral, 1.0 / 3.0, 1e-15));
        assert!(close(SphereProbe::monomial(3, vec![1, 1, 1]).integral, 0.0, 1e-15));
        assert!(close(SphereProbe::monomial(4, vec![2, 2, 0, 0]).integral, 1.0 / 24.0, 1e-15));
    }
}
