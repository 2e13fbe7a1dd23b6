//! Closed-form exponents. Every formula here is a two-parameter supremum of
//! `F(s,ρ) − ρR` with `F(s,ρ) = −ln Σ_i w_i A_i(s)^ρ`; the families below
//! supply `w` and `A` for the source and channel settings.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::{ExtendedReal, Finite, Infinite};
use crate::optimize::{grid_golden_max, log_grid, maximize_halfline, Opt, S_CAP};
use crate::prob::{log_sum_exp, Channel, Distribution, DistortionModel, JointDistribution};
use crate::rate::{channel_distortion, BOUNDARY_TOL};

pub mod channel;
pub mod forney;
pub mod maximize;
pub mod source;

pub use channel::{correct_exponent, correct_extended_envelope, e0, e_bound, error_extended, gallager_error_exponent};
pub use forney::{forney_tradeoff_exponent, r_min, FORNEY_EPS};
pub use maximize::{capacity, maximize_over_q, maximize_over_q_with, QSearch};
pub use source::{failure_envelope, failure_inner_minima, success_exponent, tangent_type};

/// Cap on `ρ` for the envelope kinds.
pub const RHO_CAP: f64 = 64.0;
/// Points in the log-spaced `s` scan used where the inner landscape can be multimodal.
pub const S_GRID_POINTS: usize = 512;
/// Smallest nonzero node of that scan.
pub const S_GRID_MIN: f64 = 1.0 / 256.0;
/// Exponent values below this are round-off around zero.
pub const ZERO_SNAP: f64 = 1e-14;
/// Distance below which a point counts as sitting on a boundary.
pub const FLAG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentKind {
    Success,
    FailureEnvelope,
    GallagerError,
    ErrorExtended,
    Correct,
    CorrectExtendedEnvelope,
    ForneyTradeoff,
    EBound,
}

impl ExponentKind {
    pub const ALL: [ExponentKind; 8] = [
        ExponentKind::Success,
        ExponentKind::FailureEnvelope,
        ExponentKind::GallagerError,
        ExponentKind::ErrorExtended,
        ExponentKind::Correct,
        ExponentKind::CorrectExtendedEnvelope,
        ExponentKind::ForneyTradeoff,
        ExponentKind::EBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExponentKind::Success => "success",
            ExponentKind::FailureEnvelope => "failure-envelope",
            ExponentKind::GallagerError => "gallager-error",
            ExponentKind::ErrorExtended => "error-extended",
            ExponentKind::Correct => "correct",
            ExponentKind::CorrectExtendedEnvelope => "correct-extended-envelope",
            ExponentKind::ForneyTradeoff => "forney-tradeoff",
            ExponentKind::EBound => "e-bound",
        }
    }

    pub fn is_source(self) -> bool {
        matches!(self, ExponentKind::Success | ExponentKind::FailureEnvelope)
    }
}

impl fmt::Display for ExponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExponentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ExponentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Spec(format!("unknown exponent kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryFlag {
    AtDMin,
    AtRMin,
    EnvelopeOnly,
    /// Outside the regime where the formula applies; the value is the
    /// conventional zero.
    OutOfRegime,
    /// The outer supremum was still increasing at the `ρ` cap.
    RhoCap,
}

impl BoundaryFlag {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryFlag::AtDMin => "at_D_min",
            BoundaryFlag::AtRMin => "at_R_min",
            BoundaryFlag::EnvelopeOnly => "envelope_only",
            BoundaryFlag::OutOfRegime => "out_of_regime",
            BoundaryFlag::RhoCap => "rho_cap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentResult {
    pub kind: ExponentKind,
    pub value: ExtendedReal,
    pub optimizer_rho: f64,
    pub optimizer_s: ExtendedReal,
    /// `(Ẽ₁, Ẽ₂)` for the Forney kind.
    pub component_values: Option<(ExtendedReal, ExtendedReal)>,
    /// ε-relaxed upper form at flagged Forney points.
    pub relaxed_upper: Option<ExtendedReal>,
    pub boundary_flags: BTreeSet<BoundaryFlag>,
}

impl ExponentResult {
    pub(crate) fn new(kind: ExponentKind, value: ExtendedReal, rho: f64, s: ExtendedReal) -> Self {
        let value = snap(value);
        ExponentResult {
            kind,
            value,
            optimizer_rho: rho,
            optimizer_s: s,
            component_values: None,
            relaxed_upper: None,
            boundary_flags: BTreeSet::new(),
        }
    }

    pub(crate) fn flag(mut self, f: BoundaryFlag) -> Self {
        self.boundary_flags.insert(f);
        self
    }

    pub fn flags_string(&self) -> String {
        self.boundary_flags.iter().map(|f| f.name()).collect::<Vec<_>>().join("|")
    }
}

/// Round-off around an exact zero is reported as zero.
pub(crate) fn snap(v: ExtendedReal) -> ExtendedReal {
    match v {
        Finite(x) if x < ZERO_SNAP => Finite(0.0),
        v => v,
    }
}

/// Either a lossy-source model or a channel with its input distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Source { p: Distribution, q: Distribution, d: DistortionModel },
    Channel { q: Distribution, p: Channel },
}

impl Model {
    /// The source model obtained from a channel by taking `Q∘P` as the source
    /// and the log-likelihood-ratio distortion.
    pub fn induced_source(q: &Distribution, p: &Channel) -> Result<Model> {
        let joint = JointDistribution::compose(q, p)?;
        Ok(Model::Source { p: joint.flatten(), q: q.clone(), d: channel_distortion(p) })
    }
}

/// Dispatch on `kind`. Source kinds accept a channel model via its induced
/// source; channel kinds require a channel.
pub fn evaluate(kind: ExponentKind, model: &Model, rate: f64, level: f64) -> Result<ExponentResult> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::Spec(format!("rate must be a finite nonnegative number, got {rate}")));
    }
    if !level.is_finite() {
        return Err(Error::Spec(format!("distortion level must be finite, got {level}")));
    }
    match (kind, model) {
        (ExponentKind::Success, Model::Source { p, q, d }) => success_exponent(p, q, d, level, rate),
        (ExponentKind::FailureEnvelope, Model::Source { p, q, d }) => failure_envelope(p, q, d, level, rate),
        (k @ (ExponentKind::Success | ExponentKind::FailureEnvelope), Model::Channel { q, p }) => evaluate(k, &Model::induced_source(q, p)?, rate, level),
        (ExponentKind::GallagerError, Model::Channel { q, p }) => gallager_error_exponent(q, p, rate),
        (ExponentKind::ErrorExtended, Model::Channel { q, p }) => error_extended(q, p, rate, level),
        (ExponentKind::Correct, Model::Channel { q, p }) => correct_exponent(q, p, rate),
        (ExponentKind::CorrectExtendedEnvelope, Model::Channel { q, p }) => correct_extended_envelope(q, p, rate, level),
        (ExponentKind::ForneyTradeoff, Model::Channel { q, p }) => forney_tradeoff_exponent(q, p, rate, level),
        (ExponentKind::EBound, Model::Channel { q, p }) => e_bound(q, p, rate, level),
        (k, Model::Source { .. }) => Err(Error::Spec(format!("kind `{k}` needs a channel model"))),
    }
}

/// Rows `i` of a tilted family: log-weights `ln w_i` and `ln A_i(s)`.
pub(crate) trait Family {
    fn len(&self) -> usize;
    fn ln_w(&self, i: usize) -> f64;
    fn ln_a(&self, s: f64, out: &mut Vec<f64>);
    /// `(min_x̂ d − D, ln mass of the minimisers)` per row: the `s → ∞`
    /// asymptote `ln A_i(s) ≈ −s·gap + ln mass`.
    fn asymptote(&self, i: usize) -> (f64, f64);
    fn scale(&self) -> f64;
}

/// `F(s,ρ) = −ln Σ w_i A_i(s)^ρ`.
pub(crate) fn f_value<F: Family>(fam: &F, s: f64, rho: f64, buf: &mut Vec<f64>) -> f64 {
    fam.ln_a(s, buf);
    -log_sum_exp(buf.iter().enumerate().map(|(i, &a)| fam.ln_w(i) + rho * a))
}

fn gaps<F: Family>(fam: &F) -> Vec<(f64, f64)> {
    (0..fam.len()).map(|i| fam.asymptote(i)).collect()
}

/// Whether every row has a strictly positive gap: then `F(s,ρ) → ∞` for `ρ > 0`.
pub(crate) fn diverges<F: Family>(fam: &F) -> bool {
    let tol = BOUNDARY_TOL * fam.scale();
    gaps(fam).iter().all(|&(g, _)| g > tol)
}

/// `lim_{s→∞} F(s,ρ)` for `ρ>0` when every gap is ≥ 0, `None` otherwise.
fn f_limit<F: Family>(fam: &F, rho: f64) -> Option<f64> {
    let tol = BOUNDARY_TOL * fam.scale();
    let g = gaps(fam);
    if g.iter().any(|&(gap, _)| gap < -tol) {
        return None;
    }
    let zero = g.iter().enumerate().filter(|(_, &(gap, _))| gap <= tol);
    Some(-log_sum_exp(zero.map(|(i, &(_, lm))| fam.ln_w(i) + rho * lm).collect::<Vec<_>>()))
}

/// `sup_{s ≥ 0} F(s,ρ)` for `ρ ∈ [0,1]`-type families where `F` is concave in `s`.
pub(crate) fn sup_s_halfline<F: Family>(fam: &F, rho: f64) -> (f64, ExtendedReal) {
    if rho == 0.0 {
        return (0.0, Finite(0.0));
    }
    let mut buf = Vec::with_capacity(fam.len());
    // Rows with a positive gap enter as e^{−ρ·s·gap}: the optimum sits near
    // s ∝ 1/ρ, so the cap scales with it.
    let cap = S_CAP.max(S_CAP / rho);
    let o = maximize_halfline(|s| f_value(fam, s, rho, &mut buf), cap);
    if o.at_cap {
        if let Some(l) = f_limit(fam, rho) {
            if l >= o.fx {
                return (l, Infinite);
            }
        }
    }
    (o.fx, Finite(o.x))
}

/// `sup_{0 ≤ s ≤ 1} F(s,ρ)`.
pub(crate) fn sup_s_unit<F: Family>(fam: &F, rho: f64) -> (f64, f64) {
    if rho == 0.0 {
        return (0.0, 0.0);
    }
    let mut buf = Vec::with_capacity(fam.len());
    let o = crate::optimize::golden_max(|s| f_value(fam, s, rho, &mut buf), 0.0, 1.0);
    (o.fx, o.x)
}

/// Concave outer search over `ρ ∈ [0, 1]`.
pub(crate) fn sup_rho_unit<G: FnMut(f64) -> f64>(g: G) -> Opt {
    crate::optimize::golden_max(g, 0.0, 1.0)
}

/// `sup_{s ≥ 0} ln Σ w_i A_i(s)^{−ρ}`: grid scan plus golden refinement, with
/// the `s → ∞` limit taken into account. Multimodal in general.
pub(crate) fn sup_s_envelope_inner<F: Family>(fam: &F, rho: f64, grid: &[f64]) -> (f64, ExtendedReal) {
    if rho == 0.0 {
        return (0.0, Finite(0.0));
    }
    let mut buf = Vec::with_capacity(fam.len());
    let o = grid_golden_max(|s| -f_value(fam, s, -rho, &mut buf), grid);
    // As s → ∞ the sum tends to Σ_{gap=0} w_i mass_i^{−ρ} when every gap ≤ 0.
    let tol = BOUNDARY_TOL * fam.scale();
    let g = gaps(fam);
    if g.iter().all(|&(gap, _)| gap <= tol) {
        let zero: Vec<f64> = g
            .iter()
            .enumerate()
            .filter(|(_, &(gap, _))| gap >= -tol)
            .map(|(i, &(_, lm))| fam.ln_w(i) - rho * lm)
            .collect();
        let l = log_sum_exp(zero);
        if l > o.fx {
            return (l, Infinite);
        }
    }
    (o.fx, Finite(o.x))
}

/// `sup_i sup_s −ln A_i(s)`: the largest rate any single row can demand.
pub(crate) fn family_r_max<F: Family>(fam: &F) -> ExtendedReal {
    let tol = BOUNDARY_TOL * fam.scale();
    let mut best = 0.0_f64;
    let mut buf = Vec::with_capacity(fam.len());
    for i in 0..fam.len() {
        let (gap, lm) = fam.asymptote(i);
        if gap > tol {
            return Infinite;
        }
        let v = if gap >= -tol {
            -lm
        } else {
            maximize_halfline(
                |s| {
                    fam.ln_a(s, &mut buf);
                    -buf[i]
                },
                S_CAP,
            )
            .fx
        };
        best = best.max(v);
    }
    Finite(best)
}

/// `sup_{ρ∈[0,1]} sup_{s≥0} F − ρR`: the success / extended-error shape.
pub(crate) fn double_sup_unit_halfline<F: Family>(fam: &F, rate: f64) -> (ExtendedReal, f64, ExtendedReal) {
    if diverges(fam) {
        return (Infinite, 1.0, Infinite);
    }
    let mut s_at = Finite(0.0);
    let o = sup_rho_unit(|rho| sup_s_halfline(fam, rho).0 - rho * rate);
    if o.x > 0.0 {
        s_at = sup_s_halfline(fam, o.x).1;
    }
    (Finite(o.fx.max(0.0)), o.x, s_at)
}

/// `sup_{ρ≥0} {−sup_s ln Σ w A^{−ρ} + ρR}` with finiteness settled first.
pub(crate) fn envelope<F: Family>(fam: &F, rate: f64, kind: ExponentKind) -> ExponentResult {
    let tol = BOUNDARY_TOL * fam.scale();
    if gaps(fam).iter().any(|&(gap, _)| gap > tol) {
        return ExponentResult::new(kind, Finite(0.0), 0.0, Finite(0.0)).flag(BoundaryFlag::OutOfRegime);
    }
    let rmax = family_r_max(fam).to_f64();
    if rate > rmax + 1e-12 {
        return ExponentResult::new(kind, Infinite, f64::INFINITY, Infinite).flag(BoundaryFlag::EnvelopeOnly);
    }
    let grid = log_grid(S_GRID_POINTS, S_GRID_MIN, S_CAP);
    let o = maximize_halfline(|rho| -sup_s_envelope_inner(fam, rho, &grid).0 + rho * rate, RHO_CAP);
    let s = if o.x > 0.0 { sup_s_envelope_inner(fam, o.x, &grid).1 } else { Finite(0.0) };
    let mut r = ExponentResult::new(kind, Finite(o.fx.max(0.0)), o.x, s).flag(BoundaryFlag::EnvelopeOnly);
    if o.at_cap {
        r = r.flag(BoundaryFlag::RhoCap);
    }
    r
}
