//! Brute-force evaluation of the variational definitions over rational
//! simplex grids. Slow and independent of the dual formulas it checks.
//!
//! Kernel minimisations are exact over the `W` grid without enumerating the
//! product of rows: the constraint and objective are both `T`-weighted sums
//! over rows, so each row is reduced to its Pareto frontier and frontiers are
//! merged pairwise with dominance pruning.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponent::{ExponentKind, Model};
use crate::extended::{ExtendedReal, Finite, Infinite};
use crate::optimize::maximize_halfline;
use crate::prob::{kl, Channel, Compositions, Distribution, DistortionModel, JointDistribution};
use crate::rate::{channel_distortion, rtqd_coupled_unchecked, rtqd_unchecked};

/// Feasibility slack on every constraint, so exact-boundary grid points count.
pub const SLACK: f64 = 1e-9;
/// Constant in the grid error budget [`tolerance`].
pub const TOL_CONSTANT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub denominator: u32,
    /// Extra passes of pairwise moves on grids of denominator `m·2^k` around
    /// the best type.
    pub refinement_rounds: u32,
}

impl GridSpec {
    pub fn new(denominator: u32) -> Self {
        GridSpec { denominator, refinement_rounds: 0 }
    }
}

/// How the inner rate `R(T,Q,D)` is evaluated inside type minimisations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerRate {
    /// Dual formula; exact.
    #[default]
    Explicit,
    /// Nested kernel grid, for auditing the dual formula itself.
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Error,
    Correct,
}

/// `tol(m) = C·(1/m)·max(|ln p_min|, d_max − d_min)`.
pub fn tolerance(m: u32, min_prob: f64, d_spread: f64) -> f64 {
    TOL_CONSTANT / m as f64 * min_prob.ln().abs().max(d_spread)
}

type Frontier = Vec<(f64, f64)>;

/// Keep points not weakly dominated in both coordinates (lower is better).
fn lower_frontier(mut pts: Frontier) -> Frontier {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out = Vec::new();
    let mut best = f64::INFINITY;
    for p in pts {
        if p.1 < best {
            best = p.1;
            out.push(p);
        }
    }
    out
}

fn merge(acc: &Frontier, row: &Frontier, w: f64) -> Frontier {
    let mut pts = Vec::with_capacity(acc.len() * row.len());
    for &(a, b) in acc {
        for &(c, d) in row {
            pts.push((a + w * c, b + w * d));
        }
    }
    lower_frontier(pts)
}

/// Smallest second coordinate among frontier points with first ≤ `cap`.
fn min_under(f: &Frontier, cap: f64) -> ExtendedReal {
    f.iter().take_while(|p| p.0 <= cap).last().map_or(Infinite, |p| Finite(p.1))
}

/// Per-row `(distortion, divergence)` over the kernel grid on `supp Q`.
struct KernelRows {
    per_row: Vec<Vec<(f64, f64)>>,
}

impl KernelRows {
    fn new(q: &Distribution, d: &DistortionModel, m: u32) -> Self {
        let supp: Vec<usize> = q.support().collect();
        let qs: Vec<f64> = supp.iter().map(|&j| q[j]).collect();
        let ws: Vec<Vec<f64>> = Compositions::new(supp.len(), m)
            .map(|c| c.into_iter().map(|v| v as f64 / m as f64).collect())
            .collect();
        let per_row = (0..d.rows())
            .map(|x| {
                ws.iter()
                    .map(|w| {
                        let dist: f64 = w.iter().zip(&supp).map(|(&wv, &j)| wv * d.d(x, j)).sum();
                        (dist, kl(w, &qs))
                    })
                    .collect()
            })
            .collect();
        KernelRows { per_row }
    }

    /// Frontier of `Σ_x T(x)·(f(row point))` over all kernel choices.
    fn combined(&self, t: &[f64], map: impl Fn((f64, f64)) -> (f64, f64)) -> Frontier {
        let mut acc: Frontier = vec![(0.0, 0.0)];
        for (x, &tx) in t.iter().enumerate() {
            if tx > 0.0 {
                let row = lower_frontier(self.per_row[x].iter().map(|&p| map(p)).collect());
                acc = merge(&acc, &row, tx);
            }
        }
        acc
    }

    /// `min Σ T div` s.t. `Σ T dist ≤ D`.
    fn rate(&self, t: &[f64], level: f64) -> ExtendedReal {
        min_under(&self.combined(t, |p| p), level + SLACK).max(Finite(0.0))
    }

    /// `min Σ T div` s.t. `Σ T (dist + div) ≤ D`.
    fn coupled_rate(&self, t: &[f64], level: f64) -> ExtendedReal {
        min_under(&self.combined(t, |(dist, div)| (dist + div, div)), level + SLACK).max(Finite(0.0))
    }

    /// Whether some kernel has `Σ T div ≤ R` and `Σ T(dist+div) ≤ D+R`.
    fn tilde1_feasible(&self, t: &[f64], rate: f64, level: f64) -> bool {
        let f = self.combined(t, |(dist, div)| (div, dist + div));
        min_under(&f, rate + SLACK) <= Finite(level + rate + SLACK)
    }
}

fn check_source(t: &Distribution, q: &Distribution, d: &DistortionModel) -> Result<()> {
    d.check_shape(t.alphabet_size(), q.alphabet_size())
}

/// `min_W D(T∘W‖T×Q)` s.t. `d(T∘W) ≤ D` over the kernel grid; `+∞` if no
/// grid kernel is feasible.
pub fn rtqd_brute(t: &Distribution, q: &Distribution, d: &DistortionModel, level: f64, grid: GridSpec) -> Result<ExtendedReal> {
    check_source(t, q, d)?;
    Ok(KernelRows::new(q, d, grid.denominator).rate(t.probs(), level))
}

/// `min_W D(T∘W‖T×Q)` s.t. `d(T∘W) + D(T∘W‖T×Q) ≤ D` over the kernel grid.
pub fn rtqd_coupled_brute(
    t: &Distribution,
    q: &Distribution,
    d: &DistortionModel,
    level: f64,
    grid: GridSpec,
) -> Result<ExtendedReal> {
    check_source(t, q, d)?;
    Ok(KernelRows::new(q, d, grid.denominator).coupled_rate(t.probs(), level))
}

/// Minimum of `f(T)` over types on the support cells, with optional local
/// refinement. `cells[i]` is the coordinate in the full vector that grid
/// coordinate `i` fills.
fn type_min<F>(n: usize, cells: &[usize], grid: GridSpec, f: F) -> ExtendedReal
where
    F: Fn(&[f64]) -> ExtendedReal + Sync,
{
    let m = grid.denominator;
    let embed = |c: &[f64]| {
        let mut t = vec![0.0; n];
        for (&i, &v) in cells.iter().zip(c) {
            t[i] = v;
        }
        t
    };
    let pts: Vec<Vec<u32>> = Compositions::new(cells.len(), m).collect();
    let vals: Vec<ExtendedReal> = pts
        .par_iter()
        .map(|c| f(&embed(&c.iter().map(|&v| v as f64 / m as f64).collect::<Vec<_>>())))
        .collect();
    let mut bi = 0;
    for (i, v) in vals.iter().enumerate() {
        if *v < vals[bi] {
            bi = i;
        }
    }
    let mut best = vals[bi];
    if grid.refinement_rounds == 0 || best == Infinite {
        return best;
    }
    let mut c: Vec<f64> = pts[bi].iter().map(|&v| v as f64 / m as f64).collect();
    let mut h = 1.0 / m as f64;
    for _ in 0..grid.refinement_rounds {
        h /= 2.0;
        loop {
            let mut improved = false;
            for a in 0..c.len() {
                for b in 0..c.len() {
                    if a == b || c[b] < h * (1.0 - 1e-12) {
                        continue;
                    }
                    let mut cand = c.clone();
                    cand[a] += h;
                    cand[b] = (cand[b] - h).max(0.0);
                    let v = f(&embed(&cand));
                    if v < best {
                        best = v;
                        c = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    best
}

fn inner_rate<'a>(
    q: &'a Distribution,
    d: &'a DistortionModel,
    grid: GridSpec,
    inner: InnerRate,
) -> Box<dyn Fn(&[f64], f64) -> ExtendedReal + Sync + 'a> {
    match inner {
        InnerRate::Explicit => Box::new(move |t, level| rtqd_unchecked(t, q, d, level).value),
        InnerRate::Grid => {
            let rows = KernelRows::new(q, d, grid.denominator);
            Box::new(move |t, level| rows.rate(t, level))
        }
    }
}

fn plus(v: ExtendedReal, r: f64) -> ExtendedReal {
    match v {
        Finite(x) => Finite((x - r).max(0.0)),
        Infinite => Infinite,
    }
}

fn add(a: f64, b: ExtendedReal) -> ExtendedReal {
    match b {
        Finite(x) => ExtendedReal::from_f64(a + x),
        Infinite => Infinite,
    }
}

/// `min_T { D(T‖P) + |R(T,Q,D) − R|⁺ }` over the type grid on `supp P`.
pub fn success_brute(
    p: &Distribution,
    q: &Distribution,
    d: &DistortionModel,
    level: f64,
    rate: f64,
    grid: GridSpec,
    inner: InnerRate,
) -> Result<ExtendedReal> {
    check_source(p, q, d)?;
    let r = inner_rate(q, d, grid, inner);
    let cells: Vec<usize> = p.support().collect();
    Ok(type_min(p.alphabet_size(), &cells, grid, |t| add(kl(t, p.probs()), plus(r(t, level), rate))))
}

/// `min { D(T‖P) : R(T,Q,D) ≥ R }` over the type grid; `+∞` if empty.
pub fn failure_brute(
    p: &Distribution,
    q: &Distribution,
    d: &DistortionModel,
    level: f64,
    rate: f64,
    grid: GridSpec,
    inner: InnerRate,
) -> Result<ExtendedReal> {
    check_source(p, q, d)?;
    let r = inner_rate(q, d, grid, inner);
    let cells: Vec<usize> = p.support().collect();
    Ok(type_min(p.alphabet_size(), &cells, grid, |t| {
        if r(t, level) >= Finite(rate - SLACK) {
            Finite(kl(t, p.probs()))
        } else {
            Infinite
        }
    }))
}

/// Lower convex envelope of the grid `E_f(·)` at `rate`, by conjugation over
/// the type grid: `sup_{ρ≥0} { min_T [D(T‖P) − ρ·R(T,Q,D)] + ρR }`.
/// `+∞` above the largest grid rate; `0` when some type has `R(T,Q,D) = +∞`
/// (the envelope of a bounded nondecreasing function is flat).
pub fn failure_envelope_brute(
    p: &Distribution,
    q: &Distribution,
    d: &DistortionModel,
    level: f64,
    rate: f64,
    grid: GridSpec,
    inner: InnerRate,
) -> Result<ExtendedReal> {
    check_source(p, q, d)?;
    let r = inner_rate(q, d, grid, inner);
    let cells: Vec<usize> = p.support().collect();
    let n = p.alphabet_size();
    let m = grid.denominator;
    let pts: Vec<(f64, ExtendedReal)> = Compositions::new(cells.len(), m)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|c| {
            let mut t = vec![0.0; n];
            for (&i, &v) in cells.iter().zip(c) {
                t[i] = v as f64 / m as f64;
            }
            (kl(&t, p.probs()), r(&t, level))
        })
        .collect();
    if pts.iter().any(|pt| pt.1 == Infinite) {
        return Ok(Finite(0.0));
    }
    let pts: Vec<(f64, f64)> = pts.into_iter().map(|(a, b)| (a, b.to_f64())).collect();
    let top = pts.iter().map(|pt| pt.1).fold(f64::NEG_INFINITY, f64::max);
    if rate > top + SLACK {
        return Ok(Infinite);
    }
    let g = |rho: f64| pts.iter().map(|&(dv, rt)| dv - rho * rt).fold(f64::INFINITY, f64::min) + rho * rate;
    let o = maximize_halfline(g, ENVELOPE_RHO_CAP);
    Ok(Finite(o.fx.max(0.0)))
}

/// `ρ` cap of the conjugate search in [`failure_envelope_brute`].
pub const ENVELOPE_RHO_CAP: f64 = 1e6;

/// Joint types on `supp Q × Y`, flattened in channel-distortion row order.
fn joint_cells(q: &Distribution, p: &Channel) -> Vec<usize> {
    let ny = p.output_size();
    q.support().flat_map(|x| (0..ny).map(move |y| x * ny + y)).collect()
}

/// Error kind: `min_T { D(T‖Q∘P) + |R(T,Q,D) − R|⁺ }`.
/// Correct kind: `min_T { D(T‖Q∘P) + |R − R(T,Q,D)|⁺ }`.
pub fn channel_exponent_brute(
    q: &Distribution,
    p: &Channel,
    rate: f64,
    level: f64,
    kind: ChannelKind,
    grid: GridSpec,
    inner: InnerRate,
) -> Result<ExtendedReal> {
    let qp = JointDistribution::compose(q, p)?.flatten();
    let d = channel_distortion(p);
    let r = inner_rate(q, &d, grid, inner);
    let cells = joint_cells(q, p);
    Ok(type_min(qp.alphabet_size(), &cells, grid, |t| {
        let div = kl(t, qp.probs());
        let rt = r(t, level);
        match kind {
            ChannelKind::Error => add(div, plus(rt, rate)),
            ChannelKind::Correct => match rt {
                Finite(x) => Finite(div + (rate - x).max(0.0)),
                Infinite => Finite(div),
            },
        }
    }))
}

/// `(Ẽ₁, Ẽ₂)` on the grid.
///
/// `Ẽ₁ = min D(T‖Q∘P)` over types admitting a kernel with
/// `d(T∘W) + D(T∘W‖T×Q) ≤ D + R` and `D(T∘W‖T×Q) ≤ R`.
/// The second component is `min_T {D(T‖Q∘P) + |R(T,Q,D) − R|⁺}`, which has
/// the same minimum against `Ẽ₁` as the constrained `E₂` (the remaining
/// branch of that minimum is dominated by `Ẽ₁`).
pub fn forney_brute(
    q: &Distribution,
    p: &Channel,
    rate: f64,
    level: f64,
    grid: GridSpec,
    inner: InnerRate,
) -> Result<(ExtendedReal, ExtendedReal)> {
    let qp = JointDistribution::compose(q, p)?.flatten();
    let d = channel_distortion(p);
    let cells = joint_cells(q, p);
    let n = qp.alphabet_size();
    let e1 = match inner {
        InnerRate::Explicit => type_min(n, &cells, grid, |t| {
            if rtqd_coupled_unchecked(t, q, &d, level + rate).value <= Finite(rate + SLACK) {
                Finite(kl(t, qp.probs()))
            } else {
                Infinite
            }
        }),
        InnerRate::Grid => {
            let rows = KernelRows::new(q, &d, grid.denominator);
            type_min(n, &cells, grid, |t| {
                if rows.tilde1_feasible(t, rate, level) {
                    Finite(kl(t, qp.probs()))
                } else {
                    Infinite
                }
            })
        }
    };
    let e2 = channel_exponent_brute(q, p, rate, level, ChannelKind::Error, grid, inner)?;
    Ok((e1, e2))
}

/// Brute-force counterpart of an exponent kind, where one exists. Envelope
/// kinds map to the grid envelope of the true exponent.
pub fn brute(kind: ExponentKind, model: &Model, rate: f64, level: f64, grid: GridSpec) -> Result<Option<ExtendedReal>> {
    let inner = InnerRate::Explicit;
    let v = match (kind, model) {
        (ExponentKind::Success, Model::Source { p, q, d }) => success_brute(p, q, d, level, rate, grid, inner)?,
        (ExponentKind::FailureEnvelope, Model::Source { p, q, d }) => failure_envelope_brute(p, q, d, level, rate, grid, inner)?,
        (ExponentKind::Success | ExponentKind::FailureEnvelope, Model::Channel { q, p }) => {
            return brute(kind, &Model::induced_source(q, p)?, rate, level, grid)
        }
        (ExponentKind::GallagerError, Model::Channel { q, p }) => {
            channel_exponent_brute(q, p, rate, 0.0, ChannelKind::Error, grid, inner)?
        }
        (ExponentKind::ErrorExtended, Model::Channel { q, p }) => {
            channel_exponent_brute(q, p, rate, level, ChannelKind::Error, grid, inner)?
        }
        (ExponentKind::Correct, Model::Channel { q, p }) => {
            channel_exponent_brute(q, p, rate, 0.0, ChannelKind::Correct, grid, inner)?
        }
        (ExponentKind::CorrectExtendedEnvelope, Model::Channel { q, p }) => {
            let Model::Source { p: src, q, d } = Model::induced_source(q, p)? else { unreachable!() };
            failure_envelope_brute(&src, &q, &d, level, rate, grid, inner)?
        }
        (ExponentKind::ForneyTradeoff, Model::Channel { q, p }) => {
            let (a, b) = forney_brute(q, p, rate, level, grid, inner)?;
            a.min(b)
        }
        (ExponentKind::EBound, _) => return Ok(None),
        (k, Model::Source { .. }) => return Err(Error::Spec(format!("kind `{k}` needs a channel model"))),
    };
    Ok(Some(v))
}

/// Grid error budget for a model: `tol(m)` with its smallest probability and
/// distortion spread.
pub fn model_tolerance(model: &Model, m: u32) -> f64 {
    match model {
        Model::Source { p, q, d } => tolerance(m, p.min_positive().min(q.min_positive()), d.d_max() - d.d_min()),
        Model::Channel { q, p } => {
            let d = channel_distortion(p);
            tolerance(m, q.min_positive().min(p.min_entry()), d.d_max() - d.d_min())
        }
    }
}
