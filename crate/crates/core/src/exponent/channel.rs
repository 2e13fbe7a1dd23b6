//! Channel coding exponents: Gallager's error exponent, the correct-decoding
//! exponent, their extensions to a log-likelihood margin `D`, and E_bound.

use super::{
    double_sup_unit_halfline, envelope, f_value, sup_rho_unit, sup_s_unit, BoundaryFlag,
    ExponentKind, ExponentResult, Family, FLAG_TOL,
};
use crate::error::Result;
use crate::extended::{Finite, Infinite};
use crate::optimize::{golden_max, grid_golden_max};
use crate::prob::{log_sum_exp, Channel, Distribution};
use crate::rate::d_min_of_q;

/// Pairs `(x, y)` with `Q(x) > 0`, weight `Q(x)P(y|x)` and
/// `ln A_xy(s) = s(D − ln P(y|x)) + ln Σ_x̂ Q(x̂) P(y|x̂)^s`.
pub(crate) struct ChannelFamily {
    lq: Vec<(usize, f64)>,
    lp: Vec<Vec<f64>>,
    live: Vec<(usize, usize, f64)>,
    ny: usize,
    level: f64,
    scale: f64,
}

impl ChannelFamily {
    pub(crate) fn new(q: &Distribution, p: &Channel, level: f64) -> Result<Self> {
        p.check_input(q)?;
        let lq: Vec<(usize, f64)> = q.support().map(|x| (x, q[x].ln())).collect();
        let lp: Vec<Vec<f64>> = p.rows().iter().map(|r| r.probs().iter().map(|v| v.ln()).collect()).collect();
        let ny = p.output_size();
        let live = lq
            .iter()
            .flat_map(|&(x, l)| (0..ny).map(move |y| (x, y, l)))
            .map(|(x, y, l)| (x, y, l + lp[x][y]))
            .collect();
        let spread = lp.iter().flatten().fold(0.0_f64, |m, v| m.max(-v));
        Ok(ChannelFamily { lq, lp, live, ny, level, scale: 1.0 + level.abs() + 2.0 * spread })
    }

    /// `ln Σ_x̂ Q(x̂) P(y|x̂)^s` for every `y`.
    fn lse_y(&self, s: f64) -> Vec<f64> {
        (0..self.ny).map(|y| log_sum_exp(self.lq.iter().map(|&(x, l)| l + s * self.lp[x][y]))).collect()
    }

}

impl Family for ChannelFamily {
    fn len(&self) -> usize {
        self.live.len()
    }

    fn ln_w(&self, i: usize) -> f64 {
        self.live[i].2
    }

    fn ln_a(&self, s: f64, out: &mut Vec<f64>) {
        let l = self.lse_y(s);
        out.clear();
        out.extend(self.live.iter().map(|&(x, y, _)| s * (self.level - self.lp[x][y]) + l[y]));
    }

    fn asymptote(&self, i: usize) -> (f64, f64) {
        let (x, y, _) = self.live[i];
        let best = self.lq.iter().map(|&(j, _)| self.lp[j][y]).fold(f64::NEG_INFINITY, f64::max);
        let mass = self.lq.iter().filter(|&&(j, _)| self.lp[j][y] == best).map(|&(_, l)| l.exp()).sum::<f64>();
        (self.lp[x][y] - best - self.level, mass.ln())
    }

    fn scale(&self) -> f64 {
        self.scale
    }
}

/// `E₀(s,ρ,Q,D) = −ln Σ Q(x)P(y|x) [Σ_x̂ Q(x̂) (P(y|x)/P(y|x̂) · e^{−D})^{−s}]^ρ`.
pub fn e0(s: f64, rho: f64, q: &Distribution, p: &Channel, level: f64) -> Result<f64> {
    let fam = ChannelFamily::new(q, p, level)?;
    Ok(f_value(&fam, s, rho, &mut Vec::new()))
}

/// Gallager: `sup_{0≤ρ≤1} { −ln Σ_y [Σ Q(x̂) P(y|x̂)^{1/(1+ρ)}]^{1+ρ} − ρR }`.
pub fn gallager_error_exponent(q: &Distribution, p: &Channel, rate: f64) -> Result<ExponentResult> {
    p.check_input(q)?;
    let lq: Vec<(usize, f64)> = q.support().map(|x| (x, q[x].ln())).collect();
    let e0g = |rho: f64| {
        let a = 1.0 + rho;
        -log_sum_exp(
            (0..p.output_size())
                .map(|y| a * log_sum_exp(lq.iter().map(|&(x, l)| l + p.p(x, y).ln() / a)))
                .collect::<Vec<_>>(),
        )
    };
    let o = sup_rho_unit(|rho| e0g(rho) - rho * rate);
    let s = if o.x > 0.0 { 1.0 / (1.0 + o.x) } else { 0.0 };
    Ok(ExponentResult::new(ExponentKind::GallagerError, Finite(o.fx.max(0.0)), o.x, Finite(s)))
}

/// Points of the `ρ` scan for the correct-decoding exponent: uniform on
/// `[0,1)` plus a geometric approach to `1`.
fn correct_rho_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..256).map(|i| i as f64 / 256.0).collect();
    g.extend((9..=40).map(|k| 1.0 - 0.5_f64.powi(k)));
    g
}

/// `sup_{0≤ρ<1} { −ln Σ_y [Σ Q(x̂) P(y|x̂)^{1/(1−ρ)}]^{1−ρ} + ρR }`, with the
/// `ρ → 1` limit `−ln Σ_y max_{x̂∈supp Q} P(y|x̂) + R` included exactly.
pub fn correct_exponent(q: &Distribution, p: &Channel, rate: f64) -> Result<ExponentResult> {
    p.check_input(q)?;
    let lq: Vec<(usize, f64)> = q.support().map(|x| (x, q[x].ln())).collect();
    let ny = p.output_size();
    let e0c = |rho: f64| {
        let a = 1.0 - rho;
        -log_sum_exp(
            (0..ny).map(|y| a * log_sum_exp(lq.iter().map(|&(x, l)| l + p.p(x, y).ln() / a))).collect::<Vec<_>>(),
        )
    };
    let o = grid_golden_max(|rho| e0c(rho) + rho * rate, &correct_rho_grid());
    let limit = -log_sum_exp(
        (0..ny)
            .map(|y| lq.iter().map(|&(x, _)| p.p(x, y).ln()).fold(f64::NEG_INFINITY, f64::max))
            .collect::<Vec<_>>(),
    ) + rate;
    let (value, rho) = if limit > o.fx { (limit, 1.0) } else { (o.fx, o.x) };
    Ok(ExponentResult::new(ExponentKind::Correct, Finite(value.max(0.0)), rho, Finite(0.0)))
}

fn at_d_min(q: &Distribution, p: &Channel, level: f64) -> Result<bool> {
    Ok((level - d_min_of_q(q, p)?).abs() <= FLAG_TOL)
}

/// `sup_{0≤ρ≤1} sup_{0≤s≤1} {E₀(s,ρ,Q,D) − ρR}` with its optimiser.
pub(crate) fn e_bound_raw(fam: &ChannelFamily, rate: f64) -> (f64, f64, f64) {
    let o = sup_rho_unit(|rho| sup_s_unit(fam, rho).0 - rho * rate);
    let s = sup_s_unit(fam, o.x).1;
    (o.fx.max(0.0), o.x, s)
}

/// `E_e(R,D) = sup_{0≤ρ≤1} sup_{s≥0} {E₀(s,ρ,Q,D) − ρR}`, `+∞` iff `D < D_min(Q)`.
///
/// The unit-square optimum is kept as a candidate, so the result never
/// falls below [`e_bound`] through round-off.
pub fn error_extended(q: &Distribution, p: &Channel, rate: f64, level: f64) -> Result<ExponentResult> {
    let fam = ChannelFamily::new(q, p, level)?;
    let mut r = error_extended_fam(&fam, rate);
    if at_d_min(q, p, level)? {
        r = r.flag(BoundaryFlag::AtDMin);
    }
    Ok(r)
}

pub(crate) fn error_extended_fam(fam: &ChannelFamily, rate: f64) -> ExponentResult {
    let (value, rho, s) = double_sup_unit_halfline(fam, rate);
    let (vb, rb, sb) = e_bound_raw(fam, rate);
    let (value, rho, s) = match value {
        Finite(v) if vb > v => (Finite(vb), rb, Finite(sb)),
        _ => (value, rho, s),
    };
    ExponentResult::new(ExponentKind::ErrorExtended, value, rho, s)
}

/// `E_bound(Q,R,D) = sup_{0≤ρ≤1} sup_{0≤s≤1} {E₀(s,ρ,Q,D) − ρR}`.
pub fn e_bound(q: &Distribution, p: &Channel, rate: f64, level: f64) -> Result<ExponentResult> {
    let fam = ChannelFamily::new(q, p, level)?;
    let (v, rho, s) = e_bound_raw(&fam, rate);
    Ok(ExponentResult::new(ExponentKind::EBound, Finite(v), rho, Finite(s)))
}

/// Envelope of the extended correct-decoding exponent; zero (flagged) for `D < 0`.
pub fn correct_extended_envelope(q: &Distribution, p: &Channel, rate: f64, level: f64) -> Result<ExponentResult> {
    let fam = ChannelFamily::new(q, p, level)?;
    Ok(envelope(&fam, rate, ExponentKind::CorrectExtendedEnvelope))
}

/// `max_{s∈[0,1]} min_{(x,y)} −ln A_xy(s)`.
pub(crate) fn unit_maxmin(fam: &ChannelFamily) -> (f64, f64) {
    let mut buf = Vec::new();
    let o = golden_max(
        |s| {
            fam.ln_a(s, &mut buf);
            -buf.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        },
        0.0,
        1.0,
    );
    (o.fx, o.x)
}

pub(crate) fn infinite_result(kind: ExponentKind) -> ExponentResult {
    ExponentResult::new(kind, Infinite, f64::INFINITY, Infinite)
}
