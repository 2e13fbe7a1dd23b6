//! `(R, D)` sweeps and their CSV form.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponent::{evaluate, ExponentKind, ExponentResult, Model};
use crate::extended::ExtendedReal;

pub const CSV_HEADER: &str = "kind,R,D,value,rho_star,s_star,flags";

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRequest {
    pub kind: ExponentKind,
    /// Strictly increasing.
    pub rates: Vec<f64>,
    pub levels: Vec<f64>,
}

impl CurveRequest {
    pub fn new(kind: ExponentKind, rates: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if rates.is_empty() || levels.is_empty() {
            return Err(Error::Spec("curve needs at least one rate and one level".into()));
        }
        if rates.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Spec("rate grid must be strictly increasing".into()));
        }
        Ok(CurveRequest { kind, rates, levels })
    }

    /// `n` evenly spaced rates from `lo` to `hi` inclusive.
    pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        match n {
            0 => vec![],
            1 => vec![lo],
            _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub rate: f64,
    pub level: f64,
    pub result: ExponentResult,
}

/// Level-major, then rate. Evaluated in parallel; the order is fixed.
pub fn sweep(model: &Model, req: &CurveRequest) -> Result<Vec<CurvePoint>> {
    let jobs: Vec<(f64, f64)> = req.levels.iter().flat_map(|&l| req.rates.iter().map(move |&r| (r, l))).collect();
    jobs.par_iter()
        .map(|&(rate, level)| evaluate(req.kind, model, rate, level).map(|result| CurvePoint { rate, level, result }))
        .collect()
}

/// Shortest round-trip decimal; `inf` for infinity.
pub fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

pub fn fmt_ext(v: ExtendedReal) -> String {
    fmt_f64(v.to_f64())
}

pub fn csv_row(p: &CurvePoint) -> String {
    let r = &p.result;
    format!(
        "{},{},{},{},{},{},{}",
        r.kind,
        fmt_f64(p.rate),
        fmt_f64(p.level),
        fmt_ext(r.value),
        fmt_f64(r.optimizer_rho),
        fmt_ext(r.optimizer_s),
        r.flags_string()
    )
}

pub fn write_csv<W: Write>(mut w: W, points: &[CurvePoint]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for p in points {
        writeln!(w, "{}", csv_row(p))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{Channel, Distribution};

    #[test]
    fn rows_are_ordered_and_inf_is_literal() {
        let model = Model::Channel { q: Distribution::uniform(2), p: Channel::bsc(0.22).unwrap() };
        let req = CurveRequest::new(ExponentKind::Success, vec![0.0, 0.05, 0.1], vec![-2.0, 0.0]).unwrap();
        let pts = sweep(&model, &req).unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!((pts[0].rate, pts[0].level), (0.0, -2.0));
        assert_eq!((pts[3].rate, pts[3].level), (0.0, 0.0));
        let mut buf = Vec::new();
        write_csv(&mut buf, &pts).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().nth(1).unwrap();
        assert!(first.starts_with("success,0,-2,inf,"), "{first}");
        for line in text.lines().skip(1) {
            assert_eq!(line.split(',').count(), 7);
        }
    }

    #[test]
    fn rejects_unsorted_rates() {
        assert!(CurveRequest::new(ExponentKind::Success, vec![0.1, 0.1], vec![0.0]).is_err());
    }
}
