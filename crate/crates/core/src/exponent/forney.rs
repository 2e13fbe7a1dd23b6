//! Forney's optimum erasure/list decoder: `min{Ẽ₁, Ẽ₂}`.

use super::channel::{e_bound_raw, error_extended_fam, infinite_result, unit_maxmin, ChannelFamily};
use super::{f_value, snap, BoundaryFlag, ExponentKind, ExponentResult, FLAG_TOL};
use crate::error::Result;
use crate::extended::{ExtendedReal, Finite, Infinite};
use crate::optimize::{golden_max, maximize_halfline};
use crate::prob::{Channel, Distribution};
use crate::rate::d_min_of_q;

/// Step used for the ε-relaxed upper form at boundary points.
pub const FORNEY_EPS: f64 = 1e-7;
/// `ρ` cap for `Ẽ₁`, whose outer range is the whole half-line.
pub const RHO1_CAP: f64 = 1048576.0;

/// Rate below which `Ẽ₁ = +∞`:
/// `R_min(Q,D) = max{0, sup_{0≤s≤1} min_{(x,y): Q(x)>0} −ln Σ Q(x̂) e^{−s[d−D]}}`.
pub fn r_min(q: &Distribution, p: &Channel, level: f64) -> Result<f64> {
    let fam = ChannelFamily::new(q, p, level)?;
    Ok(unit_maxmin(&fam).0.max(0.0))
}

struct Tilde1 {
    value: ExtendedReal,
    rho: f64,
    s: f64,
    capped: bool,
}

/// `Ẽ₁ = sup_{ρ≥0} sup_{0≤s≤1} {E₀(s,ρ) − ρR}`; never below E_bound.
fn tilde1(fam: &ChannelFamily, rate: f64) -> Tilde1 {
    let rmin = unit_maxmin(fam).0;
    if rate < rmin - 1e-12 {
        return Tilde1 { value: Infinite, rho: f64::INFINITY, s: 1.0, capped: false };
    }
    let mut buf = Vec::new();
    let mut inner = |rho: f64| {
        if rho == 0.0 {
            return (0.0, 0.0);
        }
        let o = golden_max(|s| f_value(fam, s, rho, &mut buf), 0.0, 1.0);
        (o.fx, o.x)
    };
    let o = maximize_halfline(|rho| inner(rho).0 - rho * rate, RHO1_CAP);
    let (vb, rb, sb) = e_bound_raw(fam, rate);
    if vb > o.fx {
        return Tilde1 { value: snap(Finite(vb)), rho: rb, s: sb, capped: false };
    }
    let s = inner(o.x).1;
    Tilde1 { value: snap(Finite(o.fx)), rho: o.x, s, capped: o.at_cap }
}

fn tradeoff(fam: &ChannelFamily, rate: f64) -> (ExponentResult, bool) {
    let t1 = tilde1(fam, rate);
    let e2 = error_extended_fam(fam, rate);
    let value = t1.value.min(e2.value);
    let mut r = if t1.value <= e2.value {
        ExponentResult::new(ExponentKind::ForneyTradeoff, value, t1.rho, Finite(t1.s))
    } else {
        ExponentResult { kind: ExponentKind::ForneyTradeoff, ..e2.clone() }
    };
    r.component_values = Some((t1.value, e2.value));
    (r, t1.capped && t1.value <= e2.value)
}

/// `min{Ẽ₁(R,D), Ẽ₂(R,D)}` with `Ẽ₂ = E_e(R,D)`. Points with `D = D_min(Q)`
/// or `R = R_min(Q,D)` are flagged and carry the relaxed upper form
/// `min{Ẽ₁(R−ε,D), Ẽ₂(R,D−ε)}`.
pub fn forney_tradeoff_exponent(q: &Distribution, p: &Channel, rate: f64, level: f64) -> Result<ExponentResult> {
    let fam = ChannelFamily::new(q, p, level)?;
    let (mut r, capped) = tradeoff(&fam, rate);
    if capped {
        r = r.flag(BoundaryFlag::RhoCap);
    }
    let mut boundary = false;
    if (level - d_min_of_q(q, p)?).abs() <= FLAG_TOL {
        r = r.flag(BoundaryFlag::AtDMin);
        boundary = true;
    }
    if (rate - unit_maxmin(&fam).0.max(0.0)).abs() <= FLAG_TOL {
        r = r.flag(BoundaryFlag::AtRMin);
        boundary = true;
    }
    if boundary {
        let t1 = tilde1(&fam, (rate - FORNEY_EPS).max(0.0)).value;
        let e2 = error_extended_fam(&ChannelFamily::new(q, p, level - FORNEY_EPS)?, rate).value;
        r.relaxed_upper = Some(t1.min(e2));
    }
    if r.value == Infinite {
        let mut inf = infinite_result(ExponentKind::ForneyTradeoff);
        inf.component_values = r.component_values;
        inf.boundary_flags = r.boundary_flags;
        inf.relaxed_upper = r.relaxed_upper;
        return Ok(inf);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::{e_bound, error_extended};

    #[test]
    fn degenerate_q_components() {
        let p = Channel::new(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.3, 0.6]]).unwrap();
        let q = Distribution::point(2, 1);
        for &(r, dl) in &[(0.05, -0.1), (0.2, -0.1), (0.1, 0.2), (0.0, 0.0)] {
            let f = forney_tradeoff_exponent(&q, &p, r, dl).unwrap();
            let (t1, t2) = f.component_values.unwrap();
            let want1 = if r >= (-dl).max(0.0) { Finite(0.0) } else { Infinite };
            let want2 = if dl >= 0.0 { Finite(0.0) } else { Infinite };
            assert_eq!(t1, want1, "R={r} D={dl}");
            assert_eq!(t2, want2, "R={r} D={dl}");
            assert_eq!(f.value, t1.min(t2));
            assert!((r_min(&q, &p, dl).unwrap() - (-dl).max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn chain_on_bsc() {
        let p = Channel::bsc(0.22).unwrap();
        let q = Distribution::new(vec![0.4, 0.6]).unwrap();
        for &(r, dl) in &[(0.02, 0.0), (0.05, 0.1), (0.1, -0.2), (0.3, -0.5)] {
            let ee = error_extended(&q, &p, r, dl).unwrap().value;
            let f = forney_tradeoff_exponent(&q, &p, r, dl).unwrap().value;
            let eb = e_bound(&q, &p, r, dl).unwrap().value;
            assert!(ee >= f && f >= eb, "R={r} D={dl}: {ee} {f} {eb}");
            if dl >= 0.0 {
                assert!(ee.gap(eb) < 1e-9);
            }
        }
    }
}
