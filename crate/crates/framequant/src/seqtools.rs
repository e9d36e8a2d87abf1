//! Sequence-level diagnostics: compensated partial sums, the Abel-summation
//! form of the reconstruction error, exact arc discrepancy on the 1-torus,
//! Koksma / Erdős–Turán bounds, and frame variation.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::frames::Frame;
use crate::parallel;
use crate::pcm::{self, PcmError};

#[derive(Debug, Error)]
pub enum SeqError {
    #[error("point set must contain at least one point")]
    EmptyPointSet,
    #[error("point {index} is not finite")]
    NonFinitePoint { index: usize },
    #[error("exact variation search is limited to N ≤ {max}; got N = {n} (use heuristic mode)")]
    ExactLimit { n: usize, max: usize },
    #[error(transparent)]
    Pcm(#[from] PcmError),
}

/// Largest N accepted by the exact Hamiltonian-path search.
pub const EXACT_VARIATION_LIMIT: usize = 12;

/// Running sums `u_0 = 0, u_j = u_{j−1} + y_j` with Kahan compensation.
pub fn partial_sums(residuals: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(residuals.len() + 1);
    out.push(0.0);
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for &y in residuals {
        let adj = y - comp;
        let t = sum + adj;
        comp = (t - sum) - adj;
        sum = t;
        out.push(sum);
    }
    out
}

/// Reconstruction error through the summation-by-parts form
/// `(d/N)‖Σ_{j<N} u_j (e_j − e_{j+1}) + u_N e_N‖`. Algebraically identical to
/// [`pcm::error`]; computing both ways checks the rearrangement identity.
pub fn error_via_abel(frame: &Frame, x: &[f64], delta: f64) -> Result<f64, SeqError> {
    let expansion = {
        if !frame.is_tight() {
            return Err(SeqError::Pcm(PcmError::NotTight {
                residual: frame.tight_residual(),
                tol: frame.tight_tol(),
            }));
        }
        pcm::QuantizedExpansion::new(frame, x, delta)?
    };
    let d = frame.dim();
    let n = frame.len();
    let u = &expansion.partial_sums;
    let mut acc = vec![0.0_f64; d];
    for j in 0..n - 1 {
        let uj = u[j + 1];
        let ej = frame.vector(j);
        let ej1 = frame.vector(j + 1);
        for a in 0..d {
            acc[a] += uj * (ej[a] - ej1[a]);
        }
    }
    let un = u[n];
    let last = frame.vector(n - 1);
    for a in 0..d {
        acc[a] += un * last[a];
    }
    let scale = d as f64 / n as f64;
    Ok(scale * acc.iter().map(|a| a * a).sum::<f64>().sqrt())
}

// ------------------------------------------------------------------ torus

/// Points on the 1-torus, stored in the window `[−1/2, 1/2)`.
#[derive(Debug, Clone)]
pub struct TorusPointSet {
    points: Vec<f64>,
}

/// Reduce a real number mod 1 into `[−1/2, 1/2)`.
pub fn reduce_to_window(t: f64) -> f64 {
    let r = t - (t + 0.5).floor();
    // floor rounding can land exactly on +1/2; fold it back.
    if r >= 0.5 {
        r - 1.0
    } else {
        r
    }
}

impl TorusPointSet {
    pub fn new(values: &[f64]) -> Result<Self, SeqError> {
        if values.is_empty() {
            return Err(SeqError::EmptyPointSet);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SeqError::NonFinitePoint { index });
        }
        Ok(TorusPointSet {
            points: values.iter().map(|&v| reduce_to_window(v)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

/// An extremal arc, reported as (start, length) with the start at a data
/// point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Arc {
    pub start: f64,
    pub length: f64,
}

/// Exact arc discrepancy plus optional Erdős–Turán bounds.
#[derive(Debug, Clone, Serialize)]
pub struct DiscrepancyReport {
    pub disc: f64,
    pub arc: Arc,
    pub et: BTreeMap<u32, f64>,
}

/// Exact supremum of `|#points in arc / N − |arc||` over all torus arcs.
///
/// The sup is attained in the limit at arcs whose endpoints sit at data
/// points, approached from either side; enumerating the four open/closed
/// endpoint combinations for every ordered pair of distinct values is exact.
/// O(M²) over M distinct values, parallelized over left endpoints with a
/// deterministic tie rule (smallest start, then smallest length, wins).
pub fn discrepancy(points: &TorusPointSet) -> DiscrepancyReport {
    discrepancy_with_bounds(points, &[])
}

/// [`discrepancy`] plus Erdős–Turán upper bounds for each requested K.
pub fn discrepancy_with_bounds(points: &TorusPointSet, ks: &[u32]) -> DiscrepancyReport {
    let n = points.len() as f64;
    let mut sorted = points.points().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut values = Vec::new();
    let mut mult = Vec::new();
    for &p in &sorted {
        if values.last() == Some(&p) {
            *mult.last_mut().unwrap() += 1usize;
        } else {
            values.push(p);
            mult.push(1);
        }
    }
    let m = values.len();
    let mut cum = vec![0usize; m + 1];
    for i in 0..m {
        cum[i + 1] = cum[i] + mult[i];
    }
    let total = cum[m];

    // Candidate deviations for the arc from values[i] to values[j]
    // (counterclockwise), with each endpoint either closed or open-limit.
    let best_for = |i: usize| -> (f64, f64, f64) {
        let mut best = (0.0_f64, f64::INFINITY, f64::INFINITY);
        let mut consider = |dev: f64, start: f64, length: f64| {
            if dev > best.0
                || (dev == best.0 && (start, length) < (best.1, best.2))
            {
                best = (dev, start, length);
            }
        };
        for j in 0..m {
            if i == j {
                // Degenerate arc [v, v]: count m_i over length 0; the
                // complementary open arc approaches length 1 missing m_i
                // points. Both deviations equal m_i / N.
                consider(mult[i] as f64 / n, values[i], 0.0);
                consider(mult[i] as f64 / n, values[i], 1.0);
                continue;
            }
            let length = reduce_to_window(values[j] - values[i] - 0.5) + 0.5; // (v_j − v_i) mod 1
            let closed = if i <= j {
                cum[j + 1] - cum[i]
            } else {
                total - (cum[i] - cum[j + 1])
            } as f64;
            for (count, len) in [
                (closed, length),
                (closed - mult[i] as f64, length),
                (closed - mult[j] as f64, length),
                (closed - (mult[i] + mult[j]) as f64, length),
            ] {
                consider((count / n - len).abs(), values[i], len);
            }
        }
        best
    };

    let chunk = m.div_euclid(64).max(8);
    let bests = parallel::map_chunks(m, chunk, |range| {
        let mut best = (0.0_f64, f64::INFINITY, f64::INFINITY);
        for i in range {
            let b = best_for(i);
            if b.0 > best.0 || (b.0 == best.0 && (b.1, b.2) < (best.1, best.2)) {
                best = b;
            }
        }
        best
    });
    let mut best = (0.0_f64, f64::INFINITY, f64::INFINITY);
    for b in bests {
        if b.0 > best.0 || (b.0 == best.0 && (b.1, b.2) < (best.1, best.2)) {
            best = b;
        }
    }

    let mut et = BTreeMap::new();
    for &k in ks {
        et.insert(k, erdos_turan_bound(points, k));
    }
    DiscrepancyReport {
        disc: best.0,
        arc: Arc {
            start: best.1,
            length: best.2,
        },
        et,
    }
}

/// Erdős–Turán upper bound with the classical explicit constants:
/// `1/(K+1) + 3 Σ_{k≤K} |Σ_j e^{2πik u_j}| / (k N)`.
pub fn erdos_turan_bound(points: &TorusPointSet, k_max: u32) -> f64 {
    let k_max = k_max.max(1);
    let n = points.len() as f64;
    let mut sum = 0.0;
    for k in 1..=k_max {
        let (mut re, mut im) = (0.0_f64, 0.0_f64);
        for &u in points.points() {
            let phase = std::f64::consts::TAU * k as f64 * u;
            re += phase.cos();
            im += phase.sin();
        }
        sum += re.hypot(im) / (k as f64 * n);
    }
    1.0 / (k_max as f64 + 1.0) + 3.0 * sum
}

// ------------------------------------------------------------------ koksma

/// A bounded-variation test function on the window `[−1/2, 1/2)`.
pub struct KoksmaProbe {
    pub name: String,
    /// Upper bound on the total variation of `f`.
    pub var_bound: f64,
    /// Exact integral when known; otherwise computed by adaptive quadrature.
    pub integral: Option<f64>,
    pub f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KoksmaOutcome {
    /// `|sample mean − ∫ f|`.
    pub lhs: f64,
    /// `Var(f) · Disc`.
    pub rhs: f64,
    pub holds: bool,
}

/// Check `|mean over points − ∫f| ≤ Var(f)·Disc(points)` for one probe.
pub fn koksma_check(points: &TorusPointSet, probe: &KoksmaProbe) -> KoksmaOutcome {
    let mean = points.points().iter().map(|&u| (probe.f)(u)).sum::<f64>()
        / points.len() as f64;
    let integral = probe
        .integral
        .unwrap_or_else(|| adaptive_simpson(&probe.f, -0.5, 0.5, 1e-11, 60));
    let lhs = (mean - integral).abs();
    let rhs = probe.var_bound * discrepancy(points).disc;
    KoksmaOutcome {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    }
}

/// Adaptive Simpson quadrature; subdivides until the local Richardson
/// estimate meets the tolerance, so isolated jumps only cost local depth.
pub fn adaptive_simpson<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> f64 {
    fn simpson<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64 + ?Sized>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, max_depth)
}

// ------------------------------------------------------------------ variation

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariationMode {
    /// True minimum over all orderings (Held–Karp); N ≤ 12.
    Exact,
    /// Nearest-neighbor construction plus 2-opt improvement; any N.
    Heuristic,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariationReport {
    /// Path length `Σ ‖e_{p(j)} − e_{p(j+1)}‖` for the reported order.
    pub sigma: f64,
    /// Visiting order (0-based frame indices).
    pub order: Vec<usize>,
    /// Whether `sigma` is the true minimum.
    pub exact: bool,
}

/// Minimal (exact) or near-minimal (heuristic) total edge length of a
/// Hamiltonian path through the frame vectors.
pub fn frame_variation(frame: &Frame, mode: VariationMode) -> Result<VariationReport, SeqError> {
    let n = frame.len();
    if n == 1 {
        return Ok(VariationReport {
            sigma: 0.0,
            order: vec![0],
            exact: true,
        });
    }
    let dist = |a: usize, b: usize| -> f64 {
        frame
            .vector(a)
            .iter()
            .zip(frame.vector(b))
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    match mode {
        VariationMode::Exact => {
            if n > EXACT_VARIATION_LIMIT {
                return Err(SeqError::ExactLimit {
                    n,
                    max: EXACT_VARIATION_LIMIT,
                });
            }
            let full = 1usize << n;
            // dp[mask][last]: shortest path covering `mask` ending at `last`.
            let mut dp = vec![f64::INFINITY; full * n];
            let mut parent = vec![usize::MAX; full * n];
            for v in 0..n {
                dp[(1 << v) * n + v] = 0.0;
            }
            for mask in 1..full {
                for last in 0..n {
                    if mask & (1 << last) == 0 {
                        continue;
                    }
                    let cur = dp[mask * n + last];
                    if !cur.is_finite() {
                        continue;
                    }
                    for next in 0..n {
                        if mask & (1 << next) != 0 {
                            continue;
                        }
                        let nmask = mask | (1 << next);
                        let cand = cur + dist(last, next);
                        if cand < dp[nmask * n + next] {
                            dp[nmask * n + next] = cand;
                            parent[nmask * n + next] = last;
                        }
                    }
                }
            }
            let full_mask = full - 1;
            let (mut last, mut sigma) = (0, f64::INFINITY);
            for v in 0..n {
                if dp[full_mask * n + v] < sigma {
                    sigma = dp[full_mask * n + v];
                    last = v;
                }
            }
            let mut order = Vec::with_capacity(n);
            let mut mask = full_mask;
            let mut cur = last;
            loop {
                order.push(cur);
                let p = parent[mask * n + cur];
                mask &= !(1 << cur);
                if p == usize::MAX {
                    break;
                }
                cur = p;
            }
            order.reverse();
            Ok(VariationReport {
                sigma,
                order,
                exact: true,
            })
        }
        VariationMode::Heuristic => {
            // Nearest-neighbor chain from vertex 0.
            let mut order = Vec::with_capacity(n);
            let mut used = vec![false; n];
            order.push(0);
            used[0] = true;
            for _ in 1..n {
                let cur = *order.last().unwrap();
                let mut best = usize::MAX;
                let mut best_d = f64::INFINITY;
                for (v, &taken) in used.iter().enumerate() {
                    if !taken {
                        let dv = dist(cur, v);
                        if dv < best_d {
                            best_d = dv;
                            best = v;
                        }
                    }
                }
                order.push(best);
                used[best] = true;
            }
            let path_len = |ord: &[usize]| -> f64 {
                ord.windows(2).map(|w| dist(w[0], w[1])).sum()
            };
            // 2-opt: reverse order[i..=j] when it shortens the path.
            let mut improved = true;
            let mut passes = 0;
            while improved && passes < 60 {
                improved = false;
                passes += 1;
                for i in 0..n - 1 {
                    for j in (i + 1)..n {
                        let left_old = if i > 0 { dist(order[i - 1], order[i]) } else { 0.0 };
                        let right_old = if j + 1 < n { dist(order[j], order[j + 1]) } else { 0.0 };
                        let left_new = if i > 0 { dist(order[i - 1], order[j]) } else { 0.0 };
                        let right_new = if j + 1 < n { dist(order[i], order[j + 1]) } else { 0.0 };
                        if left_new + right_new < left_old + right_old - 1e-15 {
                            order[i..=j].reverse();
                            improved = true;
                        }
                    }
                }
            }
            Ok(VariationReport {
                sigma: path_len(&order),
                order,
                exact: false,
            })
        }
    }
}
