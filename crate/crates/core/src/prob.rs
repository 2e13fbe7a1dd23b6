//! Distributions, channels, distortion matrices and the information measures
//! built on them. Everything here is immutable once constructed.

use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::extended::ExtendedReal;

/// Input normalisation tolerance.
pub const SUM_TOL: f64 = 1e-12;

/// `ln Σ exp(v)`, with `-∞` for an empty or all `-∞` input.
pub fn log_sum_exp(v: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let m = v.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    let s: f64 = v.into_iter().map(|x| (x - m).exp()).sum();
    m + s.ln()
}

/// `x ln(x/y)` with `0 ln 0 = 0` and `+∞` for unsupported mass.
#[inline]
pub(crate) fn xlogxy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if y == 0.0 {
        f64::INFINITY
    } else {
        x * (x / y).ln()
    }
}

pub fn validate_probs(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(mismatch("empty probability vector"));
    }
    for (index, &value) in p.iter().enumerate() {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::NegativeEntry { index, value });
        }
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(Error::NonStochastic { sum });
    }
    Ok(())
}

pub fn validate_channel(rows: &[Vec<f64>]) -> Result<()> {
    let width = rows.first().map(Vec::len).ok_or_else(|| mismatch("channel has no rows"))?;
    for (x, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(mismatch(format!("channel row {x} has {} entries, expected {width}", row.len())));
        }
        validate_probs(row)?;
        if let Some(y) = row.iter().position(|&v| v == 0.0) {
            return Err(Error::ZeroChannelEntry { x, y });
        }
    }
    Ok(())
}

pub fn validate_joint(rows: &[Vec<f64>]) -> Result<()> {
    let width = rows.first().map(Vec::len).ok_or_else(|| mismatch("joint distribution has no rows"))?;
    if rows.iter().any(|r| r.len() != width) {
        return Err(mismatch("ragged joint distribution"));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    validate_probs(&flat)
}

fn renormalize(mut p: Vec<f64>) -> Vec<f64> {
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= s);
    p
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates, then renormalises exactly.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        validate_probs(&probs)?;
        Ok(Distribution { probs: renormalize(probs) })
    }

    /// Accepts any nonnegative vector with positive mass and rescales it.
    pub fn normalized(probs: Vec<f64>) -> Result<Self> {
        for (index, &value) in probs.iter().enumerate() {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::NegativeEntry { index, value });
            }
        }
        if probs.iter().sum::<f64>() <= 0.0 {
            return Err(Error::EmptySupport);
        }
        Ok(Distribution { probs: renormalize(probs) })
    }

    pub fn uniform(k: usize) -> Self {
        Distribution { probs: vec![1.0 / k as f64; k] }
    }

    pub fn point(k: usize, at: usize) -> Self {
        let mut probs = vec![0.0; k];
        probs[at] = 1.0;
        Distribution { probs }
    }

    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        Distribution { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(i, _)| i)
    }

    pub fn is_degenerate(&self) -> bool {
        self.support().count() == 1
    }

    pub fn min_positive(&self) -> f64 {
        self.probs.iter().copied().filter(|&p| p > 0.0).fold(f64::INFINITY, f64::min)
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.probs[i]
    }
}

/// Row-stochastic, strictly positive `P(y|x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Channel {
    rows: Vec<Distribution>,
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        validate_channel(&rows)?;
        Ok(Channel { rows: rows.into_iter().map(|r| Distribution { probs: renormalize(r) }).collect() })
    }

    /// Binary symmetric channel with crossover `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        Channel::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].alphabet_size()
    }

    pub fn row(&self, x: usize) -> &Distribution {
        &self.rows[x]
    }

    #[inline]
    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.rows[x].probs[y]
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    pub fn min_entry(&self) -> f64 {
        self.rows.iter().map(Distribution::min_positive).fold(f64::INFINITY, f64::min)
    }

    /// Output marginal `Σ_x q(x) P(y|x)`.
    pub fn output_marginal(&self, q: &Distribution) -> Result<Vec<f64>> {
        self.check_input(q)?;
        Ok((0..self.output_size())
            .map(|y| (0..self.input_size()).map(|x| q[x] * self.p(x, y)).sum())
            .collect())
    }

    pub(crate) fn check_input(&self, q: &Distribution) -> Result<()> {
        if q.alphabet_size() != self.input_size() {
            return Err(mismatch(format!(
                "input distribution has {} letters, channel has {} inputs",
                q.alphabet_size(),
                self.input_size()
            )));
        }
        Ok(())
    }
}

/// `T(x,y)` over X×Y.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    probs: Vec<Vec<f64>>,
}

impl JointDistribution {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        validate_joint(&probs)?;
        let s: f64 = probs.iter().flatten().sum();
        Ok(JointDistribution { probs: probs.into_iter().map(|r| r.into_iter().map(|v| v / s).collect()).collect() })
    }

    /// `Q∘P`.
    pub fn compose(q: &Distribution, p: &Channel) -> Result<Self> {
        p.check_input(q)?;
        let probs = (0..p.input_size())
            .map(|x| (0..p.output_size()).map(|y| q[x] * p.p(x, y)).collect())
            .collect();
        Ok(JointDistribution { probs })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.probs
    }

    /// Flattened x-major, matching `channel_distortion` row order.
    pub fn flatten(&self) -> Distribution {
        Distribution { probs: self.probs.iter().flatten().copied().collect() }
    }

    pub fn x_marginal(&self) -> Distribution {
        Distribution { probs: self.probs.iter().map(|r| r.iter().sum()).collect() }
    }
}

/// `W(x̂|·)`: one distribution per conditioning index.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalKernel {
    rows: Vec<Distribution>,
}

impl ConditionalKernel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows.first().map(Vec::len).ok_or_else(|| mismatch("kernel has no rows"))?;
        if rows.iter().any(|r| r.len() != width) {
            return Err(mismatch("ragged kernel"));
        }
        Ok(ConditionalKernel { rows: rows.into_iter().map(Distribution::new).collect::<Result<_>>()? })
    }

    /// Every row equal to `q`.
    pub fn constant(rows: usize, q: &Distribution) -> Self {
        ConditionalKernel { rows: vec![q.clone(); rows] }
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }
}

/// `d(x, x̂)` in nats with cached extrema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionModel {
    values: Vec<Vec<f64>>,
    #[serde(skip)]
    d_min: f64,
    #[serde(skip)]
    d_max: f64,
}

impl DistortionModel {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        let width = values.first().map(Vec::len).ok_or_else(|| mismatch("distortion matrix has no rows"))?;
        if width == 0 || values.iter().any(|r| r.len() != width) {
            return Err(mismatch("ragged distortion matrix"));
        }
        if let Some(v) = values.iter().flatten().find(|v| !v.is_finite()) {
            return Err(Error::Spec(format!("non-finite distortion value {v}")));
        }
        let d_min = values.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let d_max = values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(DistortionModel { values, d_min, d_max })
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    #[inline]
    pub fn d(&self, x: usize, xh: usize) -> f64 {
        self.values[x][xh]
    }

    pub fn rows(&self) -> usize {
        self.values.len()
    }

    pub fn cols(&self) -> usize {
        self.values[0].len()
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    /// Shape check against a source alphabet of `rows` and codebook alphabet of `cols`.
    pub fn check_shape(&self, rows: usize, cols: usize) -> Result<()> {
        if self.rows() != rows || self.cols() != cols {
            return Err(mismatch(format!(
                "distortion matrix is {}x{}, expected {rows}x{cols}",
                self.rows(),
                self.cols()
            )));
        }
        Ok(())
    }
}

pub fn kl_divergence(t: &Distribution, p: &Distribution) -> Result<ExtendedReal> {
    if t.alphabet_size() != p.alphabet_size() {
        return Err(mismatch("kl_divergence arguments differ in size"));
    }
    Ok(ExtendedReal::from_f64(kl(t.probs(), p.probs())))
}

/// Unchecked divergence on slices; `+∞` on unsupported mass.
pub(crate) fn kl(t: &[f64], p: &[f64]) -> f64 {
    let v: f64 = t.iter().zip(p).map(|(&a, &b)| xlogxy(a, b)).sum();
    // Rounding can push an exact zero slightly negative.
    v.max(0.0)
}

pub fn entropy(p: &Distribution) -> f64 {
    -p.probs.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum::<f64>()
}

/// `I(Q∘P)` in nats.
pub fn mutual_information(q: &Distribution, p: &Channel) -> Result<f64> {
    let out = p.output_marginal(q)?;
    let mut i = 0.0;
    for x in 0..p.input_size() {
        if q[x] == 0.0 {
            continue;
        }
        for (y, &py) in out.iter().enumerate() {
            i += q[x] * p.p(x, y) * (p.p(x, y) / py).ln();
        }
    }
    Ok(i.max(0.0))
}

/// `Σ T(x) W(x̂|x) d(x,x̂)`.
pub fn average_distortion(t: &Distribution, w: &ConditionalKernel, d: &DistortionModel) -> Result<f64> {
    if w.rows.len() != t.alphabet_size() {
        return Err(mismatch("kernel rows differ from source alphabet"));
    }
    d.check_shape(t.alphabet_size(), w.rows[0].alphabet_size())?;
    Ok(t.probs
        .iter()
        .zip(&w.rows)
        .enumerate()
        .map(|(x, (&tx, row))| tx * row.probs.iter().enumerate().map(|(xh, &wv)| wv * d.d(x, xh)).sum::<f64>())
        .sum())
}

/// Integer compositions of `m` into `k` parts, colexicographic order.
#[derive(Debug, Clone)]
pub struct Compositions {
    cur: Vec<u32>,
    done: bool,
}

impl Compositions {
    pub fn new(k: usize, m: u32) -> Self {
        assert!(k >= 1, "simplex dimension must be positive");
        let mut cur = vec![0; k];
        cur[0] = m;
        Compositions { cur, done: false }
    }
}

impl Iterator for Compositions {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let k = self.cur.len();
        match self.cur[..k - 1].iter().position(|&c| c > 0) {
            Some(i) => {
                let t = self.cur[i];
                self.cur[i] = 0;
                self.cur[0] = t - 1;
                self.cur[i + 1] += 1;
            }
            None => self.done = true,
        }
        Some(out)
    }
}

/// All distributions on `k` letters with denominator `m`.
pub fn simplex_grid(k: usize, m: u32) -> impl Iterator<Item = Distribution> {
    Compositions::new(k, m)
        .map(move |c| Distribution { probs: c.into_iter().map(|v| v as f64 / m as f64).collect() })
}

/// `C(m+k-1, k-1)`.
pub fn simplex_grid_len(k: usize, m: u32) -> u64 {
    let n = m as u64 + k as u64 - 1;
    let r = (k as u64 - 1).min(m as u64);
    (0..r).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}
