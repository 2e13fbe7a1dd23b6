//! Monte-Carlo simulation of random codebooks.
//!
//! Codewords are drawn through their joint type with the source (or received)
//! word: the letters of an i.i.d. `Qⁿ` codeword that sit under the positions
//! holding letter `a` form a multinomial `(n_a, Q)` sample, and the decision
//! statistics depend on nothing else. Each trial owns a ChaCha8 stream keyed
//! by `(n, trial)` under the master seed, so counts do not depend on how the
//! trials are scheduled.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution as _};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{mismatch, Error, Result};
use crate::prob::{log_sum_exp, Channel, Distribution, DistortionModel};

pub const DEFAULT_CODEBOOK_CAP: u64 = 1 << 20;
/// Normal quantile for the 95% Wilson interval.
pub const WILSON_Z: f64 = 1.96;
const TRIAL_BITS: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    SourceEncode,
    ChannelMargin,
    Forney,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::SourceEncode => "source-encode",
            Experiment::ChannelMargin => "channel-margin",
            Experiment::Forney => "forney",
        }
    }

    /// `(count, alt_count)` event names.
    pub fn events(self) -> (&'static str, &'static str) {
        match self {
            Experiment::SourceEncode => ("success", "failure"),
            Experiment::ChannelMargin => ("error_le", "error_lt"),
            Experiment::Forney => ("error_lt", "error_le"),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "source" | "source-encode" => Ok(Experiment::SourceEncode),
            "channel" | "margin" | "channel-margin" => Ok(Experiment::ChannelMargin),
            "forney" => Ok(Experiment::Forney),
            _ => Err(Error::Spec(format!("unknown experiment `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub block_lengths: Vec<usize>,
    pub rate: f64,
    pub level: f64,
    pub trials: u64,
    pub master_seed: u64,
    pub experiment: Experiment,
    pub codebook_cap: u64,
}

impl SimConfig {
    pub fn new(experiment: Experiment, block_lengths: Vec<usize>, rate: f64, level: f64, trials: u64, master_seed: u64) -> Self {
        SimConfig { block_lengths, rate, level, trials, master_seed, experiment, codebook_cap: DEFAULT_CODEBOOK_CAP }
    }

    /// `round(e^{nR})` codewords for source coding, one more for channels.
    pub fn codebook_size(&self, n: usize) -> Result<u64> {
        let base = (n as f64 * self.rate).exp().round();
        let extra = u64::from(self.experiment != Experiment::SourceEncode);
        if !(base <= self.codebook_cap as f64) || base + extra as f64 > self.codebook_cap as f64 {
            let m = if base.is_finite() && base < u64::MAX as f64 { base as u64 + extra } else { u64::MAX };
            return Err(Error::CodebookTooLarge { m, cap: self.codebook_cap });
        }
        Ok((base as u64).max(1) + extra)
    }

    fn check(&self) -> Result<()> {
        if !self.rate.is_finite() || self.rate < 0.0 || !self.level.is_finite() {
            return Err(Error::Spec("rate must be finite and nonnegative, level finite".into()));
        }
        if self.block_lengths.is_empty() || self.block_lengths.contains(&0) {
            return Err(Error::Spec("block lengths must be positive".into()));
        }
        if self.trials == 0 || self.trials >= 1 << TRIAL_BITS {
            return Err(Error::Spec(format!("trials must be in 1..2^{TRIAL_BITS}")));
        }
        for &n in &self.block_lengths {
            self.codebook_size(n)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerN {
    pub n: usize,
    pub codebook_size: u64,
    pub trials: u64,
    pub count: u64,
    /// The companion event counted on the same draws.
    pub alt_count: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl PerN {
    fn new(n: usize, codebook_size: u64, trials: u64, count: u64, alt_count: u64) -> Self {
        let (ci_low, ci_high) = wilson(count, trials, WILSON_Z);
        PerN { n, codebook_size, trials, count, alt_count, p_hat: count as f64 / trials as f64, ci_low, ci_high }
    }

    /// Wilson half-width over `z`.
    pub fn wilson_se(&self) -> f64 {
        (self.ci_high - self.ci_low) / (2.0 * WILSON_Z)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub experiment: Experiment,
    pub event: &'static str,
    pub alt_event: &'static str,
    pub per_n: Vec<PerN>,
    pub exponent_estimate: Option<f64>,
    pub slope_stderr: Option<f64>,
}

impl SimResult {
    fn new(experiment: Experiment, per_n: Vec<PerN>) -> Self {
        let (event, alt_event) = experiment.events();
        let mut r = SimResult { experiment, event, alt_event, per_n, exponent_estimate: None, slope_stderr: None };
        r.refit();
        r
    }

    fn refit(&mut self) {
        let fit = estimate_exponent(self).ok();
        self.exponent_estimate = fit.map(|f| f.0);
        self.slope_stderr = fit.map(|f| f.1);
    }

    /// The same run viewed through the companion event (failure instead of
    /// success, `<` instead of `≤`).
    pub fn alternate(&self) -> SimResult {
        let per_n = self.per_n.iter().map(|p| PerN::new(p.n, p.codebook_size, p.trials, p.alt_count, p.count)).collect();
        let mut r = SimResult { event: self.alt_event, alt_event: self.event, per_n, ..self.clone() };
        r.refit();
        r
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,trials,count,p_hat,ci_low,ci_high")?;
        for p in &self.per_n {
            writeln!(w, "{},{},{},{},{},{}", p.n, p.trials, p.count, p.p_hat, p.ci_low, p.ci_high)?;
        }
        Ok(())
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Least-squares slope of `−ln p̂` against `n` over the points with a
/// nonzero count; the standard error propagates each point's Wilson interval
/// (on the log scale) through the slope's linear weights.
pub fn estimate_exponent(r: &SimResult) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64, f64)> = r
        .per_n
        .iter()
        .filter(|p| p.count > 0)
        .map(|p| (p.n as f64, p.p_hat, (p.ci_high.ln() - p.ci_low.ln()) / (2.0 * WILSON_Z)))
        .collect();
    regress(&pts)
}

/// `(n, p, σ of ln p)` triples to `(slope, stderr)`.
pub fn regress(pts: &[(f64, f64, f64)]) -> Result<(f64, f64)> {
    if pts.len() < 3 {
        return Err(Error::InsufficientData(pts.len()));
    }
    let k = pts.len() as f64;
    let nbar = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let ybar = pts.iter().map(|p| -p.1.ln()).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - nbar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData(1));
    }
    let slope = pts.iter().map(|p| (p.0 - nbar) * (-p.1.ln() - ybar)).sum::<f64>() / sxx;
    let var: f64 = pts.iter().map(|p| ((p.0 - nbar) / sxx).powi(2) * p.2 * p.2).sum();
    Ok((slope, var.sqrt()))
}

/// Chained-binomial multinomial sampler.
#[derive(Debug, Clone)]
struct Multinomial {
    // p_k / (p_k + … + p_last)
    cond: Vec<f64>,
}

impl Multinomial {
    fn new(d: &Distribution) -> Self {
        let p = d.probs();
        let mut tail = 0.0;
        let mut cond = vec![0.0; p.len()];
        for k in (0..p.len()).rev() {
            tail += p[k];
            cond[k] = if tail > 0.0 { (p[k] / tail).min(1.0) } else { 0.0 };
        }
        Multinomial { cond }
    }

    fn sample<R: Rng>(&self, n: u64, rng: &mut R, out: &mut [u64]) {
        let mut rem = n;
        let last = self.cond.len() - 1;
        for (k, &c) in self.cond.iter().enumerate() {
            if k == last || rem == 0 {
                out[k] = if k == last { rem } else { 0 };
                continue;
            }
            let b = Binomial::new(rem, c).expect("probability in [0,1]").sample(rng);
            out[k] = b;
            rem -= b;
        }
    }
}

/// Exact log-likelihood differences from integer count differences: inputs
/// whose `P(y|x)` coincide share one coefficient, so ties stay exact.
#[derive(Debug, Clone)]
struct LogLik {
    // per y: (class representative per x, ln P(y|rep))
    class: Vec<Vec<usize>>,
    ln: Vec<Vec<f64>>,
}

impl LogLik {
    fn new(p: &Channel) -> Self {
        let (nx, ny) = (p.input_size(), p.output_size());
        let mut class = vec![vec![0; nx]; ny];
        let mut ln = vec![vec![0.0; nx]; ny];
        for y in 0..ny {
            for x in 0..nx {
                class[y][x] = (0..=x).find(|&a| p.p(a, y) == p.p(x, y)).unwrap_or(x);
                ln[y][x] = p.p(x, y).ln();
            }
        }
        LogLik { class, ln }
    }

    /// `Σ_y Σ_x diff[x][y]·ln P(y|x)`, grouping equal coefficients first.
    fn eval(&self, diff: &[Vec<i64>], acc: &mut [i64]) -> f64 {
        let mut total = 0.0;
        for (y, class) in self.class.iter().enumerate() {
            acc.iter_mut().for_each(|a| *a = 0);
            for (x, &c) in class.iter().enumerate() {
                acc[c] += diff[x][y];
            }
            for (x, &a) in acc.iter().enumerate() {
                if a != 0 {
                    total += a as f64 * self.ln[y][x];
                }
            }
        }
        total
    }
}

fn trial_rng(base: &ChaCha8Rng, n: usize, trial: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(((n as u64) << TRIAL_BITS) | trial);
    rng
}

fn run<F>(cfg: &SimConfig, expected: Experiment, trial: F) -> Result<SimResult>
where
    F: Fn(&mut ChaCha8Rng, usize, u64) -> (bool, bool) + Sync,
{
    if cfg.experiment != expected {
        return Err(Error::Spec(format!("config is for `{}`, not `{expected}`", cfg.experiment)));
    }
    cfg.check()?;
    let base = ChaCha8Rng::seed_from_u64(cfg.master_seed);
    let mut per_n = Vec::with_capacity(cfg.block_lengths.len());
    for &n in &cfg.block_lengths {
        let m = cfg.codebook_size(n)?;
        let (count, alt) = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let (a, b) = trial(&mut trial_rng(&base, n, t), n, m);
                (u64::from(a), u64::from(b))
            })
            .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
        per_n.push(PerN::new(n, m, cfg.trials, count, alt));
    }
    Ok(SimResult::new(expected, per_n))
}

/// Encoding success `{∃m: d(X, X̂_m) ≤ nD}`; `alt_count` is the failures.
pub fn simulate_source(cfg: &SimConfig, p: &Distribution, q: &Distribution, d: &DistortionModel) -> Result<SimResult> {
    d.check_shape(p.alphabet_size(), q.alphabet_size())?;
    let (sp, sq) = (Multinomial::new(p), Multinomial::new(q));
    let (nx, nxh) = (p.alphabet_size(), q.alphabet_size());
    run(cfg, Experiment::SourceEncode, |rng, n, m| {
        let threshold = n as f64 * cfg.level;
        let mut xc = vec![0; nx];
        let mut c = vec![0; nxh];
        sp.sample(n as u64, rng, &mut xc);
        for _ in 0..m {
            let mut total = 0.0;
            for (x, &k) in xc.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                sq.sample(k, rng, &mut c);
                for (xh, &j) in c.iter().enumerate() {
                    if j != 0 {
                        total += j as f64 * d.d(x, xh);
                    }
                }
            }
            if total <= threshold {
                return (true, false);
            }
        }
        (false, true)
    })
}

struct ChannelDraw {
    // n_{x,y} − c_{x,y} for the current competitor
    diff: Vec<Vec<i64>>,
    own: Vec<Vec<i64>>,
    ny: Vec<u64>,
    c: Vec<u64>,
    acc: Vec<i64>,
}

struct ChannelSampler {
    sq: Multinomial,
    rows: Vec<Multinomial>,
    ll: LogLik,
    nx: usize,
    ny: usize,
}

impl ChannelSampler {
    fn new(q: &Distribution, p: &Channel) -> Result<Self> {
        if q.alphabet_size() != p.input_size() {
            return Err(mismatch(format!(
                "input distribution has {} letters, channel has {} inputs",
                q.alphabet_size(),
                p.input_size()
            )));
        }
        Ok(ChannelSampler {
            sq: Multinomial::new(q),
            rows: p.rows().iter().map(Multinomial::new).collect(),
            ll: LogLik::new(p),
            nx: p.input_size(),
            ny: p.output_size(),
        })
    }

    /// Transmitted word and channel output as a joint type.
    fn transmit<R: Rng>(&self, n: usize, rng: &mut R) -> ChannelDraw {
        let mut xc = vec![0; self.nx];
        self.sq.sample(n as u64, rng, &mut xc);
        let mut own = vec![vec![0i64; self.ny]; self.nx];
        let mut ny = vec![0u64; self.ny];
        let mut row = vec![0u64; self.ny];
        for (x, &k) in xc.iter().enumerate() {
            self.rows[x].sample(k, rng, &mut row);
            for y in 0..self.ny {
                own[x][y] = row[y] as i64;
                ny[y] += row[y];
            }
        }
        ChannelDraw { diff: own.clone(), own, ny, c: vec![0; self.nx], acc: vec![0; self.nx] }
    }

    /// `ln P(Y|X₁) − ln P(Y|X_m)` for a fresh competitor.
    fn competitor<R: Rng>(&self, st: &mut ChannelDraw, rng: &mut R) -> f64 {
        for x in 0..self.nx {
            st.diff[x].copy_from_slice(&st.own[x]);
        }
        for y in 0..self.ny {
            if st.ny[y] == 0 {
                continue;
            }
            self.sq.sample(st.ny[y], rng, &mut st.c);
            for x in 0..self.nx {
                st.diff[x][y] -= st.c[x] as i64;
            }
        }
        self.ll.eval(&st.diff, &mut st.acc)
    }
}

/// Margin-decoder error `{∃m′≠m: ln P(Y|X_m)/P(Y|X_{m′}) ≤ nD}`; `alt_count`
/// is the same event with `<`.
pub fn simulate_channel_margin(cfg: &SimConfig, q: &Distribution, p: &Channel) -> Result<SimResult> {
    let s = ChannelSampler::new(q, p)?;
    run(cfg, Experiment::ChannelMargin, |rng, n, m| {
        let threshold = n as f64 * cfg.level;
        let mut st = s.transmit(n, rng);
        let mut le = false;
        for _ in 1..m {
            let a = s.competitor(&mut st, rng);
            le |= a <= threshold;
            if a < threshold {
                return (true, true);
            }
        }
        (le, false)
    })
}

/// Forney's event `{ln P(Y|X_m) − ln Σ_{m′≠m} P(Y|X_{m′}) < nD}`;
/// `alt_count` is the same event with `≤`.
pub fn simulate_forney(cfg: &SimConfig, q: &Distribution, p: &Channel) -> Result<SimResult> {
    let s = ChannelSampler::new(q, p)?;
    run(cfg, Experiment::Forney, |rng, n, m| {
        let threshold = n as f64 * cfg.level;
        let mut st = s.transmit(n, rng);
        let neg: Vec<f64> = (1..m).map(|_| -s.competitor(&mut st, rng)).collect();
        let stat = -log_sum_exp(neg.iter().copied());
        (stat < threshold, stat <= threshold)
    })
}

/// Exhaustive enumeration of all sequences, for checking the simulator at
/// tiny block lengths. Costs grow as `|alphabet|^{n·(codewords involved)}`.
pub mod exact {
    use super::*;

    const MAX_SEQUENCES: u64 = 1 << 26;

    fn sequences(k: usize, n: usize) -> Result<Vec<Vec<usize>>> {
        let total = (k as u64).checked_pow(n as u32).filter(|&t| t <= MAX_SEQUENCES);
        let total = total.ok_or_else(|| Error::Spec(format!("{k}^{n} sequences is too many to enumerate")))?;
        Ok((0..total)
            .map(|mut i| {
                (0..n)
                    .map(|_| {
                        let v = (i % k as u64) as usize;
                        i /= k as u64;
                        v
                    })
                    .collect()
            })
            .collect())
    }

    fn seq_prob(p: &Distribution, s: &[usize]) -> f64 {
        s.iter().map(|&a| p[a]).product()
    }

    /// `P_s = Σ_x Pⁿ(x)·[1 − (1 − Pr{d(x, X̂) ≤ nD})^M]`.
    pub fn source_success(p: &Distribution, q: &Distribution, d: &DistortionModel, level: f64, n: usize, m: u64) -> Result<f64> {
        d.check_shape(p.alphabet_size(), q.alphabet_size())?;
        let xs = sequences(p.alphabet_size(), n)?;
        let xhs = sequences(q.alphabet_size(), n)?;
        let thr = n as f64 * level;
        Ok(xs
            .iter()
            .map(|x| {
                let g: f64 = xhs
                    .iter()
                    .filter(|xh| x.iter().zip(xh.iter()).map(|(&a, &b)| d.d(a, b)).sum::<f64>() <= thr)
                    .map(|xh| seq_prob(q, xh))
                    .sum();
                seq_prob(p, x) * (1.0 - (1.0 - g).powf(m as f64))
            })
            .sum())
    }

    struct Pairs {
        xs: Vec<Vec<usize>>,
        ys: Vec<Vec<usize>>,
    }

    fn pairs(q: &Distribution, p: &Channel, n: usize) -> Result<Pairs> {
        if q.alphabet_size() != p.input_size() {
            return Err(mismatch("input distribution and channel disagree"));
        }
        Ok(Pairs { xs: sequences(p.input_size(), n)?, ys: sequences(p.output_size(), n)? })
    }

    fn joint(q: &Distribution, p: &Channel, x: &[usize], y: &[usize]) -> f64 {
        x.iter().zip(y).map(|(&a, &b)| q[a] * p.p(a, b)).product()
    }

    fn margin(p: &Channel, x1: &[usize], x: &[usize], y: &[usize]) -> f64 {
        (0..y.len())
            .map(|i| {
                let (a, b) = (p.p(x1[i], y[i]), p.p(x[i], y[i]));
                if a == b {
                    0.0
                } else {
                    a.ln() - b.ln()
                }
            })
            .sum()
    }

    /// Margin-decoder error probability with `M − 1` i.i.d. competitors.
    pub fn margin_error(q: &Distribution, p: &Channel, level: f64, n: usize, m: u64, strict: bool) -> Result<f64> {
        let pr = pairs(q, p, n)?;
        let thr = n as f64 * level;
        let mut total = 0.0;
        for x1 in &pr.xs {
            for y in &pr.ys {
                let w = joint(q, p, x1, y);
                if w == 0.0 {
                    continue;
                }
                let g: f64 = pr
                    .xs
                    .iter()
                    .filter(|x| {
                        let a = margin(p, x1, x, y);
                        if strict {
                            a < thr
                        } else {
                            a <= thr
                        }
                    })
                    .map(|x| seq_prob(q, x))
                    .sum();
                total += w * (1.0 - (1.0 - g).powf((m - 1) as f64));
            }
        }
        Ok(total)
    }

    /// Forney error probability by enumerating every competitor tuple.
    pub fn forney_error(q: &Distribution, p: &Channel, level: f64, n: usize, m: u64, strict: bool) -> Result<f64> {
        let pr = pairs(q, p, n)?;
        let k = (m - 1) as u32;
        let nx = pr.xs.len() as u64;
        let tuples = nx.checked_pow(k).filter(|&t| t.saturating_mul((pr.xs.len() * pr.ys.len()) as u64) <= 1 << 34);
        let tuples = tuples.ok_or_else(|| Error::Spec("too many competitor tuples to enumerate".into()))?;
        let thr = n as f64 * level;
        let mut total = 0.0;
        for x1 in &pr.xs {
            for y in &pr.ys {
                let w = joint(q, p, x1, y);
                if w == 0.0 {
                    continue;
                }
                let neg: Vec<f64> = pr.xs.iter().map(|x| -margin(p, x1, x, y)).collect();
                let qx: Vec<f64> = pr.xs.iter().map(|x| seq_prob(q, x)).collect();
                let mut idx = vec![0usize; k as usize];
                let mut acc = 0.0;
                for _ in 0..tuples {
                    let stat = -log_sum_exp(idx.iter().map(|&i| neg[i]));
                    if (strict && stat < thr) || (!strict && stat <= thr) {
                        acc += idx.iter().map(|&i| qx[i]).product::<f64>();
                    }
                    for slot in idx.iter_mut() {
                        *slot += 1;
                        if *slot < pr.xs.len() {
                            break;
                        }
                        *slot = 0;
                    }
                }
                total += w * acc;
            }
        }
        Ok(total)
    }
}
