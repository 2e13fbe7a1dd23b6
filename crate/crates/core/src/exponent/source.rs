//! Lossy source coding: encoding success exponent and the lower convex
//! envelope of the failure exponent.

use super::{
    double_sup_unit_halfline, envelope, f_value, BoundaryFlag, ExponentKind, ExponentResult, Family, FLAG_TOL,
};
use crate::error::Result;
use crate::optimize::{local_maxima, log_grid, S_CAP};
use crate::prob::{log_sum_exp, Distribution, DistortionModel};
use crate::rate::Rows;

/// Source letters in the support of `P`, each with `A_x(s) = Σ Q e^{−s(d−D)}`.
pub(crate) struct SourceFamily<'a> {
    rows: Rows<'a>,
    live: Vec<(usize, f64)>,
    scale: f64,
}

impl<'a> SourceFamily<'a> {
    pub(crate) fn new(p: &Distribution, q: &Distribution, d: &'a DistortionModel, level: f64) -> Result<Self> {
        d.check_shape(p.alphabet_size(), q.alphabet_size())?;
        Ok(SourceFamily {
            rows: Rows::new(q, d, level),
            live: p.support().map(|x| (x, p[x].ln())).collect(),
            scale: 1.0 + level.abs() + d.d_max() - d.d_min(),
        })
    }
}

impl Family for SourceFamily<'_> {
    fn len(&self) -> usize {
        self.live.len()
    }

    fn ln_w(&self, i: usize) -> f64 {
        self.live[i].1
    }

    fn ln_a(&self, s: f64, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.live.iter().map(|&(x, _)| self.rows.ln_s(x, s)));
    }

    fn asymptote(&self, i: usize) -> (f64, f64) {
        let (gap, mass) = self.rows.min_gap(self.live[i].0);
        (gap, mass.ln())
    }

    fn scale(&self) -> f64 {
        self.scale
    }
}

/// `E_s(R,D) = sup_{0≤ρ≤1} { −inf_{s≥0} ln Σ P(x) [Σ Q(x̂) e^{−s[d−D]}]^ρ − ρR }`.
pub fn success_exponent(
    p: &Distribution,
    q: &Distribution,
    d: &DistortionModel,
    level: f64,
    rate: f64,
) -> Result<ExponentResult> {
    let fam = SourceFamily::new(p, q, d, level)?;
    let (value, rho, s) = double_sup_unit_halfline(&fam, rate);
    let mut r = ExponentResult::new(ExponentKind::Success, value, rho, s);
    if (level - d.d_min()).abs() <= FLAG_TOL {
        r = r.flag(BoundaryFlag::AtDMin);
    }
    Ok(r)
}

/// Lower convex envelope of `E_f(R,D)`:
/// `sup_{ρ≥0} { −sup_{s≥0} ln Σ P(x) [Σ Q(x̂) e^{−s[d−D]}]^{−ρ} + ρR }`.
/// Zero (flagged) when `D < max_x min_x̂ d`; `+∞` above `r_max(D)`.
pub fn failure_envelope(
    p: &Distribution,
    q: &Distribution,
    d: &DistortionModel,
    level: f64,
    rate: f64,
) -> Result<ExponentResult> {
    let fam = SourceFamily::new(p, q, d, level)?;
    Ok(envelope(&fam, rate, ExponentKind::FailureEnvelope))
}

/// Local minima in `s` of `E₀(s,ρ) = −ln Σ P [Σ Q e^{−s(d−D)}]^{−ρ}` on a
/// log-spaced scan of `points` nodes over `[0, 2¹⁶]`, each refined, sorted by `s`.
/// Returns `(s, E₀)` pairs.
pub fn failure_inner_minima(
    p: &Distribution,
    q: &Distribution,
    d: &DistortionModel,
    level: f64,
    rho: f64,
    points: usize,
) -> Result<Vec<(f64, f64)>> {
    let fam = SourceFamily::new(p, q, d, level)?;
    let mut buf = Vec::new();
    let grid = log_grid(points, 1.0 / 256.0, S_CAP);
    // E₀(s,ρ) = F(s,−ρ); its minima are maxima of −F.
    let modes = local_maxima(|s| -f_value(&fam, s, -rho, &mut buf), &grid);
    Ok(modes.into_iter().map(|o| (o.x, -o.fx)).collect())
}

/// The tilted type `T(x) ∝ P(x) A_x(s)^{−ρ}` touching the envelope at `(s, ρ)`.
pub fn tangent_type(
    p: &Distribution,
    q: &Distribution,
    d: &DistortionModel,
    level: f64,
    s: f64,
    rho: f64,
) -> Result<Distribution> {
    let fam = SourceFamily::new(p, q, d, level)?;
    let mut buf = Vec::new();
    fam.ln_a(s, &mut buf);
    let logs: Vec<f64> = (0..fam.len()).map(|i| fam.ln_w(i) - rho * buf[i]).collect();
    let z = log_sum_exp(logs.iter().copied());
    let mut t = vec![0.0; p.alphabet_size()];
    for (i, &(x, _)) in fam.live.iter().enumerate() {
        t[x] = (logs[i] - z).exp();
    }
    Distribution::normalized(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extended::{Finite, Infinite};
    use crate::rate::rtqd;

    fn bsc_source() -> (Distribution, Distribution, DistortionModel, f64) {
        let p = 0.22;
        let l = ((1.0 - p) / p as f64).ln();
        let src = Distribution::new(vec![(1.0 - p) / 2.0, p / 2.0, p / 2.0, (1.0 - p) / 2.0]).unwrap();
        let d = DistortionModel::new(vec![vec![0.0, l], vec![0.0, -l], vec![-l, 0.0], vec![l, 0.0]]).unwrap();
        (src, Distribution::uniform(2), d, l)
    }

    #[test]
    fn success_zero_above_rate_function() {
        let (p, q, d, l) = bsc_source();
        let level = 0.0;
        let r = rtqd(&p, &q, &d, level).unwrap().value.to_f64();
        let e = success_exponent(&p, &q, &d, level, r + 0.01).unwrap();
        assert_eq!(e.value, Finite(0.0));
        let e = success_exponent(&p, &q, &d, level, r * 0.5).unwrap();
        assert!(e.value.to_f64() > 0.0);
        // Past D_max every codeword works.
        assert_eq!(success_exponent(&p, &q, &d, l, 0.0).unwrap().value, Finite(0.0));
        // Below D_min nothing does.
        assert_eq!(success_exponent(&p, &q, &d, -l - 0.01, 0.3).unwrap().value, Infinite);
        assert!(success_exponent(&p, &q, &d, -l, 0.3).unwrap().boundary_flags.contains(&BoundaryFlag::AtDMin));
    }

    #[test]
    fn failure_envelope_regimes() {
        let (p, q, d, _) = bsc_source();
        let r = rtqd(&p, &q, &d, 0.0).unwrap().value.to_f64();
        assert_eq!(failure_envelope(&p, &q, &d, 0.0, r * 0.9).unwrap().value, Finite(0.0));
        assert!(failure_envelope(&p, &q, &d, 0.0, r * 1.1).unwrap().value.to_f64() > 0.0);
        assert_eq!(failure_envelope(&p, &q, &d, 0.0, 10.0).unwrap().value, Infinite);
        let neg = failure_envelope(&p, &q, &d, -0.1, 0.2).unwrap();
        assert!(neg.boundary_flags.contains(&BoundaryFlag::OutOfRegime));
    }
}
