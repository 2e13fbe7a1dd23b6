//! Rate functions `R(T,Q,D)` and `Rᶜ(T,Q,D)` in their one-parameter dual
//! forms, the channel-induced distortion, and the boundary quantities that
//! say where exponents stay finite.

use serde::Serialize;

use crate::error::{mismatch, Result};
use crate::extended::{ExtendedReal, Finite, Infinite};
use crate::optimize::{maximize_halfline, S_CAP};
use crate::prob::{log_sum_exp, Channel, Compositions, Distribution, DistortionModel};

/// Slack used when deciding the divergent / boundary / finite trichotomy.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateResult {
    pub value: ExtendedReal,
    pub optimizer_s: ExtendedReal,
    pub converged: bool,
    pub evaluations: usize,
}

impl RateResult {
    fn infinite() -> Self {
        RateResult { value: Infinite, optimizer_s: Infinite, converged: true, evaluations: 0 }
    }
}

/// Precomputed `ln Q` over the support and `d - D` per row, shared by the
/// objective evaluations.
pub(crate) struct Rows<'a> {
    lq: Vec<(usize, f64)>,
    d: &'a DistortionModel,
    level: f64,
}

impl<'a> Rows<'a> {
    pub(crate) fn new(q: &Distribution, d: &'a DistortionModel, level: f64) -> Self {
        Rows { lq: q.support().map(|i| (i, q[i].ln())).collect(), d, level }
    }

    /// `ln Σ_x̂ Q(x̂) e^{-s[d(x,x̂)-D]}`.
    #[inline]
    pub(crate) fn ln_s(&self, x: usize, s: f64) -> f64 {
        let row = &self.d.values()[x];
        log_sum_exp(self.lq.iter().map(|&(j, l)| l - s * (row[j] - self.level)))
    }

    /// `min_{x̂∈supp Q} d(x,x̂) - D` and the `Q`-mass on the minimisers.
    pub(crate) fn min_gap(&self, x: usize) -> (f64, f64) {
        let row = &self.d.values()[x];
        let m = self.lq.iter().map(|&(j, _)| row[j]).fold(f64::INFINITY, f64::min);
        let mass = self.lq.iter().filter(|&&(j, _)| row[j] == m).map(|&(_, l)| l.exp()).sum();
        (m - self.level, mass)
    }

    /// Mean of `d - D` under the tilted kernel `W_s(x̂|x) ∝ Q e^{-s(d-D)}`.
    fn tilted_mean(&self, x: usize, s: f64) -> f64 {
        let row = &self.d.values()[x];
        let z = self.ln_s(x, s);
        self.lq
            .iter()
            .map(|&(j, l)| {
                let a = row[j] - self.level;
                (l - s * a - z).exp() * a
            })
            .sum()
    }
}

fn check(t: &Distribution, q: &Distribution, d: &DistortionModel) -> Result<()> {
    d.check_shape(t.alphabet_size(), q.alphabet_size())
}

/// `R(T,Q,D) = sup_{s≥0} −Σ T(x) ln Σ Q(x̂) e^{−s[d(x,x̂)−D]}`.
pub fn rtqd(t: &Distribution, q: &Distribution, d: &DistortionModel, level: f64) -> Result<RateResult> {
    check(t, q, d)?;
    Ok(rtqd_unchecked(t.probs(), q, d, level))
}

pub(crate) fn rtqd_unchecked(t: &[f64], q: &Distribution, d: &DistortionModel, level: f64) -> RateResult {
    let rows = Rows::new(q, d, level);
    let live: Vec<(usize, f64)> = t.iter().copied().enumerate().filter(|&(_, p)| p > 0.0).collect();
    let scale = 1.0 + level.abs() + d.d_max() - d.d_min();

    // The objective is concave with asymptotic slope Σ T(x) min_x̂ (d − D);
    // its sign decides divergence.
    let mut slope = 0.0;
    let mut limit = 0.0;
    for &(x, p) in &live {
        let (gap, mass) = rows.min_gap(x);
        slope += p * gap;
        limit -= p * mass.ln();
    }
    if slope > BOUNDARY_TOL * scale {
        return RateResult::infinite();
    }
    let mean: f64 = live
        .iter()
        .map(|&(x, p)| p * rows.lq.iter().map(|&(j, l)| l.exp() * (d.d(x, j) - level)).sum::<f64>())
        .sum();
    if mean <= 0.0 {
        return RateResult { value: Finite(0.0), optimizer_s: Finite(0.0), converged: true, evaluations: 1 };
    }
    if slope >= -BOUNDARY_TOL * scale {
        // Nondecreasing objective: the supremum is the s → ∞ limit.
        return RateResult { value: Finite(limit.max(0.0)), optimizer_s: Infinite, converged: true, evaluations: 0 };
    }
    let f = |s: f64| -live.iter().map(|&(x, p)| p * rows.ln_s(x, s)).sum::<f64>();
    let o = maximize_halfline(f, S_CAP);
    RateResult {
        value: Finite(o.fx.max(0.0)),
        optimizer_s: Finite(o.x),
        converged: o.converged && !o.at_cap,
        evaluations: o.evals,
    }
}

/// `Rᶜ(T,Q,D) = sup_{μ≥0} −(1+μ) Σ T ln Σ Q e^{−(μ/(1+μ))[d−D]}` for a joint
/// `T` flattened in the row order of `d`.
pub fn rtqd_coupled(t: &Distribution, q: &Distribution, d: &DistortionModel, level: f64) -> Result<RateResult> {
    check(t, q, d)?;
    Ok(rtqd_coupled_unchecked(t.probs(), q, d, level))
}

pub(crate) fn rtqd_coupled_unchecked(t: &[f64], q: &Distribution, d: &DistortionModel, level: f64) -> RateResult {
    let rows = Rows::new(q, d, level);
    let live: Vec<(usize, f64)> = t.iter().copied().enumerate().filter(|&(_, p)| p > 0.0).collect();
    let base = |s: f64| -live.iter().map(|&(x, p)| p * rows.ln_s(x, s)).sum::<f64>();
    // g(μ) = (1+μ)·base(μ/(1+μ)); as μ → ∞ it grows like μ·base(1).
    let at_one = base(1.0);
    let scale = 1.0 + level.abs() + d.d_max() - d.d_min();
    if at_one > BOUNDARY_TOL * scale {
        return RateResult::infinite();
    }
    let g = |mu: f64| (1.0 + mu) * base(mu / (1.0 + mu));
    let o = maximize_halfline(g, S_CAP);
    if o.at_cap && at_one >= -BOUNDARY_TOL * scale {
        let limit = -live.iter().map(|&(x, p)| p * rows.tilted_mean(x, 1.0)).sum::<f64>();
        let value = limit.max(o.fx).max(0.0);
        return RateResult { value: Finite(value), optimizer_s: Infinite, converged: true, evaluations: o.evals };
    }
    RateResult {
        value: Finite(o.fx.max(0.0)),
        optimizer_s: Finite(o.x),
        converged: o.converged && !o.at_cap,
        evaluations: o.evals,
    }
}

/// `d((x,y),x̂) = ln P(y|x)/P(y|x̂)`, rows x-major then y.
pub fn channel_distortion(p: &Channel) -> DistortionModel {
    let (nx, ny) = (p.input_size(), p.output_size());
    let values = (0..nx)
        .flat_map(|x| (0..ny).map(move |y| (x, y)))
        .map(|(x, y)| (0..nx).map(|xh| p.p(x, y).ln() - p.p(xh, y).ln()).collect())
        .collect();
    DistortionModel::new(values).expect("channel log-ratios are finite")
}

/// `max_x sup_{s≥0} −ln Σ Q e^{−s[d(x,·)−D]}`; ties go to the smallest `x`.
pub fn r_max(q: &Distribution, d: &DistortionModel, level: f64) -> Result<ExtendedReal> {
    Ok(r_max_over(q, d, level, 0..d.rows())?.0)
}

/// `r_max` over a subset of rows, with the maximising row.
pub(crate) fn r_max_over(
    q: &Distribution,
    d: &DistortionModel,
    level: f64,
    rows: impl IntoIterator<Item = usize>,
) -> Result<(ExtendedReal, usize)> {
    if d.cols() != q.alphabet_size() {
        return Err(mismatch("distortion columns differ from codebook alphabet"));
    }
    let mut best = (Finite(f64::NEG_INFINITY), 0);
    let mut point = vec![0.0; d.rows()];
    for x in rows {
        point[x] = 1.0;
        let v = rtqd_unchecked(&point, q, d, level).value;
        point[x] = 0.0;
        if v > best.0 {
            best = (v, x);
        }
    }
    Ok(best)
}

pub fn d_bounds(d: &DistortionModel) -> (f64, f64) {
    (d.d_min(), d.d_max())
}

/// `D_min(Q) = min_y min_{x,x̂ ∈ supp Q} ln P(y|x)/P(y|x̂)`.
pub fn d_min_of_q(q: &Distribution, p: &Channel) -> Result<f64> {
    p.check_input(q)?;
    let s: Vec<usize> = q.support().collect();
    if s.is_empty() {
        return Err(crate::Error::EmptySupport);
    }
    let mut m = f64::INFINITY;
    for y in 0..p.output_size() {
        let hi = s.iter().map(|&x| p.p(x, y)).fold(f64::NEG_INFINITY, f64::max);
        let lo = s.iter().map(|&x| p.p(x, y)).fold(f64::INFINITY, f64::min);
        m = m.min(lo.ln() - hi.ln());
    }
    Ok(m)
}

/// Grid settings for [`r_min_boundary`].
#[derive(Debug, Clone, Copy)]
pub struct BoundaryGrid {
    pub denominator: u32,
    pub refinement_rounds: u32,
    pub tol: f64,
}

impl Default for BoundaryGrid {
    fn default() -> Self {
        BoundaryGrid { denominator: 24, refinement_rounds: 1, tol: 1e-6 }
    }
}

/// Smallest `R ≥ 0` with `min_T Rᶜ(T,Q,D+R) ≤ R`, by bisection on `R` with the
/// inner minimum taken over a grid of joint types on `supp Q × Y`.
pub fn r_min_boundary(q: &Distribution, p: &Channel, level: f64, grid: BoundaryGrid) -> Result<ExtendedReal> {
    p.check_input(q)?;
    let d = channel_distortion(p);
    let ny = p.output_size();
    let cells: Vec<usize> = q.support().flat_map(|x| (0..ny).map(move |y| x * ny + y)).collect();
    let nrows = d.rows();
    let m = grid.denominator;
    let points: Vec<Vec<u32>> = Compositions::new(cells.len(), m).collect();

    let rc = |w: &[f64], r: f64| -> f64 {
        let mut t = vec![0.0; nrows];
        for (&c, &v) in cells.iter().zip(w) {
            t[c] = v;
        }
        rtqd_coupled_unchecked(&t, q, &d, level + r).value.to_f64()
    };
    let min_rc = |r: f64| -> f64 {
        let scores: Vec<f64> = {
            use rayon::prelude::*;
            points
                .par_iter()
                .map(|c| rc(&c.iter().map(|&v| v as f64 / m as f64).collect::<Vec<_>>(), r))
                .collect()
        };
        let i = crate::optimize::argmax(&scores.iter().map(|v| -v).collect::<Vec<_>>());
        let mut w: Vec<f64> = points[i].iter().map(|&v| v as f64 / m as f64).collect();
        let mut best = scores[i];
        let mut h = 1.0 / m as f64;
        for _ in 0..grid.refinement_rounds {
            h /= 2.0;
            let mut improved = true;
            while improved {
                improved = false;
                for a in 0..w.len() {
                    for b in 0..w.len() {
                        if a == b || w[b] < h {
                            continue;
                        }
                        let mut cand = w.clone();
                        cand[a] += h;
                        cand[b] -= h;
                        let v = rc(&cand, r);
                        if v < best - 1e-15 {
                            best = v;
                            w = cand;
                            improved = true;
                        }
                    }
                }
            }
        }
        best
    };

    let feasible = |r: f64| min_rc(r) <= r + 1e-12;
    let cap = (-level).max(0.0);
    if feasible(0.0) {
        return Ok(Finite(0.0));
    }
    let (mut lo, mut hi) = (0.0, cap);
    while hi - lo > grid.tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Finite(hi))
}
