//! Maximisation over the codebook distribution `Q`, and capacity.

use rayon::prelude::*;

use super::{evaluate, ExponentKind, ExponentResult, Model};
use crate::error::{Error, Result};
use crate::extended::{ExtendedReal, Finite, Infinite};
use crate::prob::{simplex_grid, Channel, Distribution, JointDistribution};
use crate::rate::{channel_distortion, rtqd};

/// Simplex-grid seeding followed by pairwise mass exchange with step halving.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QSearch {
    pub denominator: u32,
    pub rounds: u32,
}

impl Default for QSearch {
    fn default() -> Self {
        QSearch { denominator: 16, rounds: 3 }
    }
}

/// Maximise `f` over distributions on `k` letters. Deterministic: the grid is
/// scanned in colexicographic order and the first maximiser wins ties.
pub fn maximize_over_q_with<F>(k: usize, search: QSearch, f: F) -> (Distribution, ExtendedReal)
where
    F: Fn(&Distribution) -> ExtendedReal + Sync,
{
    let grid: Vec<Distribution> = simplex_grid(k, search.denominator).collect();
    let vals: Vec<ExtendedReal> = grid.par_iter().map(&f).collect();
    let mut bi = 0;
    for (i, v) in vals.iter().enumerate() {
        if *v > vals[bi] {
            bi = i;
        }
    }
    let mut w = grid[bi].probs().to_vec();
    let mut best = vals[bi];
    if best == Infinite {
        return (grid[bi].clone(), best);
    }
    let mut h = 1.0 / search.denominator as f64;
    for _ in 0..search.rounds {
        h /= 2.0;
        loop {
            let mut improved = false;
            for a in 0..k {
                for b in 0..k {
                    if a == b || w[b] < h * (1.0 - 1e-12) {
                        continue;
                    }
                    let mut cand = w.clone();
                    cand[a] += h;
                    cand[b] = (cand[b] - h).max(0.0);
                    let v = f(&Distribution::from_raw(cand.clone()));
                    if v > best && v.gap(best) > 1e-15 {
                        best = v;
                        w = cand;
                        improved = true;
                    }
                }
            }
            if !improved || best == Infinite {
                break;
            }
        }
        if best == Infinite {
            break;
        }
    }
    let s: f64 = w.iter().sum();
    (Distribution::from_raw(w.into_iter().map(|v| v / s).collect()), best)
}

/// `max_Q` of an exponent kind for channel `p`. For `D < 0` and `R < −D` the
/// error-type exponents are `+∞`, witnessed by a degenerate `Q`.
pub fn maximize_over_q(
    p: &Channel,
    rate: f64,
    level: f64,
    kind: ExponentKind,
    search: QSearch,
) -> Result<(Distribution, ExponentResult)> {
    if !matches!(kind, ExponentKind::ErrorExtended | ExponentKind::ForneyTradeoff | ExponentKind::EBound) {
        return Err(Error::Spec(format!("maximize-q supports error-extended, forney-tradeoff, e-bound; got `{kind}`")));
    }
    let k = p.input_size();
    if level < 0.0 && rate < -level && kind != ExponentKind::EBound {
        let q = Distribution::point(k, 0);
        let r = evaluate(kind, &Model::Channel { q: q.clone(), p: p.clone() }, rate, level)?;
        return Ok((q, r));
    }
    let (q, _) = maximize_over_q_with(k, search, |q| {
        evaluate(kind, &Model::Channel { q: q.clone(), p: p.clone() }, rate, level)
            .map(|r| r.value)
            .unwrap_or(Finite(f64::NEG_INFINITY))
    });
    let r = evaluate(kind, &Model::Channel { q: q.clone(), p: p.clone() }, rate, level)?;
    Ok((q, r))
}

/// `C(P) = max_Q R(Q∘P, Q, 0)` in nats.
pub fn capacity(p: &Channel) -> Result<(Distribution, f64)> {
    let d = channel_distortion(p);
    let rate = |q: &Distribution| -> ExtendedReal {
        let t = JointDistribution::compose(q, p).expect("shape checked").flatten();
        rtqd(&t, q, &d, 0.0).map(|r| r.value).unwrap_or(Finite(0.0))
    };
    let (q, v) = maximize_over_q_with(p.input_size(), QSearch { denominator: 16, rounds: 40 }, rate);
    Ok((q, v.to_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::error_extended;
    use std::f64::consts::LN_2;

    #[test]
    fn capacity_examples() {
        let (q, c) = capacity(&Channel::bsc(0.22).unwrap()).unwrap();
        let hb = -(0.22f64 * 0.22f64.ln() + 0.78 * 0.78f64.ln());
        assert!((c - (LN_2 - hb)).abs() < 1e-10);
        assert!((q[0] - 0.5).abs() < 1e-9);
        let (_, c) = capacity(&Channel::new(vec![vec![0.2, 0.8]; 3]).unwrap()).unwrap();
        assert!(c.abs() < 1e-12);
        let e = 1e-6;
        let p = Channel::new(vec![vec![1.0 - 2.0 * e, e, e], vec![e, 1.0 - 2.0 * e, e], vec![e, e, 1.0 - 2.0 * e]]).unwrap();
        let (_, c) = capacity(&p).unwrap();
        let at_uniform = crate::prob::mutual_information(&Distribution::uniform(3), &p).unwrap();
        assert!((c - at_uniform).abs() < 1e-9 && (c - 3f64.ln()).abs() < 1e-4);
    }

    #[test]
    fn negative_margin_short_circuits() {
        let p = Channel::bsc(0.22).unwrap();
        let (q, r) = maximize_over_q(&p, 0.05, -0.1, ExponentKind::ErrorExtended, QSearch::default()).unwrap();
        assert!(q.is_degenerate());
        assert_eq!(r.value, Infinite);
    }

    #[test]
    fn symmetric_channel_prefers_uniform() {
        let p = Channel::bsc(0.22).unwrap();
        let (q, r) = maximize_over_q(&p, 0.05, 0.0, ExponentKind::ErrorExtended, QSearch::default()).unwrap();
        let u = error_extended(&Distribution::uniform(2), &p, 0.05, 0.0).unwrap().value;
        assert!((q[0] - 0.5).abs() < 1.0 / 16.0);
        assert!(r.value.gap(u) < 1e-9);
    }
}
