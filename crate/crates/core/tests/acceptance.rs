//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Built with `harness = false` so the lines always reach the terminal. The
//! process fails if a criterion fails that is not listed in `KNOWN_FAIL`;
//! those are printed as FAIL all the same, next to the checks that show what
//! the formulas do give.

mod common;

use std::f64::consts::LN_2;
use std::time::{Duration, Instant};

use rcexp_core::exponent::{
    correct_exponent, correct_extended_envelope, e_bound, error_extended, failure_envelope, failure_inner_minima,
    forney_tradeoff_exponent, maximize_over_q_with, r_min, success_exponent, tangent_type, QSearch,
};
use rcexp_core::extended::{Finite, Infinite};
use rcexp_core::montecarlo::{exact, simulate_channel_margin, simulate_forney, simulate_source, Experiment, SimConfig, SimResult};
use rcexp_core::oracle::{channel_exponent_brute, failure_brute, failure_envelope_brute, model_tolerance, rtqd_brute, success_brute, tolerance, ChannelKind, GridSpec, InnerRate};
use rcexp_core::prob::{kl_divergence, mutual_information};
use rcexp_core::rate::{channel_distortion, r_max, r_min_boundary, rtqd, BoundaryGrid};
use rcexp_core::{Channel, Distribution, DistortionModel, ExtendedReal, JointDistribution, Model};

/// Criteria that do not hold as stated; see the supplementary lines.
const KNOWN_FAIL: &[&str] = &["3", "5"];

struct Report {
    unexpected: Vec<String>,
}

impl Report {
    fn line(&mut self, id: &str, title: &str, pass: bool, elapsed: Duration, limit: Duration, detail: String) {
        let within = elapsed <= limit;
        let ok = pass && within;
        println!(
            "criterion {id:<5} {} {title}: {detail}; {:.2} s (limit {} s)",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        if !ok && !KNOWN_FAIL.contains(&id) {
            self.unexpected.push(id.to_string());
        }
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn source_parts(m: &Model) -> (Distribution, Distribution, DistortionModel) {
    match m {
        Model::Source { p, q, d } => (p.clone(), q.clone(), d.clone()),
        Model::Channel { .. } => panic!("expected a source model"),
    }
}

fn induced(q: &Distribution, p: &Channel) -> (Distribution, Distribution, DistortionModel) {
    source_parts(&Model::induced_source(q, p).unwrap())
}

fn c1(rep: &mut Report) {
    let t0 = Instant::now();
    let mut g = common::rng(101);
    let (mut gap, mut sdev) = (0.0f64, 0.0f64);
    for i in 0..25 {
        let (nx, ny) = (2 + i % 4, 2 + (i * 3) % 4);
        let p = common::channel(&mut g, nx, ny);
        let q = common::dist(&mut g, nx);
        let t = JointDistribution::compose(&q, &p).unwrap().flatten();
        let r = rtqd(&t, &q, &channel_distortion(&p), 0.0).unwrap();
        let mi = mutual_information(&q, &p).unwrap();
        gap = gap.max((r.value.to_f64() - mi).abs());
        sdev = sdev.max((r.optimizer_s.to_f64() - 1.0).abs());
    }
    let pass = gap <= 1e-9 && sdev <= 1e-4;
    rep.line("1", "R(Q∘P,Q,0) = I(Q∘P), s* = 1", pass, t0.elapsed(), secs(10), format!("max gap {gap:.2e}, max |s*−1| {sdev:.2e} over 25 channels"));
}

fn c2(rep: &mut Report) {
    let t0 = Instant::now();
    let mut g = common::rng(202);
    let mut worst_rate = f64::NEG_INFINITY;
    for _ in 0..20 {
        let t = common::dist(&mut g, 3);
        let q = common::dist(&mut g, 3);
        let d = common::distortion(&mut g, 3, 3);
        let lo: f64 = (0..3).map(|x| t[x] * (0..3).map(|j| d.d(x, j)).fold(f64::INFINITY, f64::min)).sum();
        let hi: f64 = (0..3).map(|x| (0..3).map(|j| t[x] * q[j] * d.d(x, j)).sum::<f64>()).sum();
        let level = lo + (hi - lo) * rand::Rng::random_range(&mut g, 0.05..0.95);
        let e = rtqd(&t, &q, &d, level).unwrap().value;
        let b = rtqd_brute(&t, &q, &d, level, GridSpec::new(60)).unwrap();
        let tol = tolerance(60, t.min_positive().min(q.min_positive()), d.d_max() - d.d_min());
        worst_rate = worst_rate.max(b.gap(e) - tol);
    }
    let mut worst = [f64::NEG_INFINITY; 4];
    let grid = GridSpec::new(40);
    for _ in 0..6 {
        let p = common::dist(&mut g, 2);
        let q = common::dist(&mut g, 2);
        let d = common::distortion(&mut g, 2, 2);
        let src = Model::Source { p: p.clone(), q: q.clone(), d: d.clone() };
        let tol = model_tolerance(&src, 40);
        let lvl = 0.5 * (d.d_min() + d.d_max());
        // The envelope formula needs D ≥ max_x min_x̂ d.
        let floor = (0..2).map(|x| d.d(x, 0).min(d.d(x, 1))).fold(f64::NEG_INFINITY, f64::max);
        let flvl = floor + 0.5 * (d.d_max() - floor);
        let rm = r_max(&q, &d, flvl).unwrap().to_f64();
        for &rate in &[0.02, 0.1, 0.25] {
            let e = success_exponent(&p, &q, &d, lvl, rate).unwrap().value;
            let b = success_brute(&p, &q, &d, lvl, rate, grid, InnerRate::Explicit).unwrap();
            worst[0] = worst[0].max(b.gap(e) - tol);
        }
        for &frac in &[0.3, 0.6, 0.9] {
            let rate = frac * rm;
            let e = failure_envelope(&p, &q, &d, flvl, rate).unwrap().value;
            let b = failure_envelope_brute(&p, &q, &d, flvl, rate, grid, InnerRate::Explicit).unwrap();
            worst[1] = worst[1].max(b.gap(e) - tol);
        }
        let ch = common::channel(&mut g, 2, 2);
        let cm = Model::Channel { q: q.clone(), p: ch.clone() };
        let ctol = model_tolerance(&cm, 40);
        let mi = mutual_information(&q, &ch).unwrap();
        for &(rate, level) in &[(0.3 * mi, 0.0), (0.1 * mi, 0.05), (0.5 * mi, -0.1)] {
            let e = error_extended(&q, &ch, rate, level).unwrap().value;
            let b = channel_exponent_brute(&q, &ch, rate, level, ChannelKind::Error, grid, InnerRate::Explicit).unwrap();
            worst[2] = worst[2].max(b.gap(e) - ctol);
        }
        for &rate in &[1.2 * mi, 2.0 * mi + 0.1, 0.5 * mi] {
            let e = correct_exponent(&q, &ch, rate).unwrap().value;
            let b = channel_exponent_brute(&q, &ch, rate, 0.0, ChannelKind::Correct, grid, InnerRate::Explicit).unwrap();
            worst[3] = worst[3].max(b.gap(e) - ctol);
        }
    }
    let pass = worst_rate <= 0.0 && worst.iter().all(|&w| w <= 0.0);
    rep.line(
        "2",
        "explicit forms vs grid oracles",
        pass,
        t0.elapsed(),
        secs(300),
        format!(
            "max (gap − tol): rate {worst_rate:.2e}, success {:.2e}, failure {:.2e}, error {:.2e}, correct {:.2e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    );
}

/// `E_s` at a rate far beyond every tangency, where it has flattened out.
fn large_rate_limit(p: &Distribution, q: &Distribution, d: &DistortionModel, level: f64) -> ExtendedReal {
    success_exponent(p, q, d, level, 1e4).unwrap().value
}

fn c3(rep: &mut Report) {
    let t0 = Instant::now();
    let spec = common::fixture("bsc22.json");
    let (p, q, d) = source_parts(&spec.source_model().unwrap());
    let pr = 0.22f64;
    let l = ((1.0 - pr) / pr).ln();
    let d_star = -pr * l;
    let target = (1.0 / pr).ln();
    let mut below = Vec::new();
    let mut reach_zero = true;
    let mut rate_zero = Vec::new();
    for &level in &spec.scaled_levels().unwrap() {
        if level < d_star - 1e-12 {
            let v = large_rate_limit(&p, &q, &d, level).to_f64();
            below.push((level, v));
        } else {
            let r0 = rtqd(&p, &q, &d, level).unwrap().value.to_f64();
            let at = success_exponent(&p, &q, &d, level, r0 + 1e-9).unwrap().value.to_f64();
            let before = success_exponent(&p, &q, &d, level, 0.5 * r0).unwrap().value.to_f64();
            reach_zero &= r0.is_finite() && at <= 1e-9 && before > 0.0;
            rate_zero.push(r0);
        }
    }
    let below_dmin = [d.d_min() - 0.05, d.d_min() - 1.0]
        .iter()
        .all(|&lv| success_exponent(&p, &q, &d, lv, 0.3).unwrap().value == Infinite);
    let limit_ok = below.iter().all(|&(_, v)| (v - target).abs() <= 1e-3);
    let fmt: Vec<String> = below.iter().map(|(l, v)| format!("D={l:.4}: {v:.4}")).collect();
    rep.line(
        "3",
        "BSC fixture: success exponent",
        limit_ok && reach_zero && below_dmin,
        t0.elapsed(),
        secs(30),
        format!(
            "large-R limit vs ln(1/p)={target:.4}: [{}]; zero at finite R for D≥D*: {reach_zero} (R0 = {:?}); +inf below D_min: {below_dmin}",
            fmt.join(", "),
            rate_zero.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>()
        ),
    );

    // What the limit is: min D(T‖P) over types meeting Σ T(x) min_x̂ d ≤ D.
    // Here min_x̂ d is −L on {b, c} and 0 on {a, d}, so the constraint is
    // T(b)+T(c) ≥ −D/L and the minimum is a binary divergence.
    let t1 = Instant::now();
    let mut sup_ok = true;
    let mut parts = Vec::new();
    for &(level, v) in &below {
        let mass = -level / l;
        let want = kl_divergence(&Distribution::new(vec![mass, 1.0 - mass]).unwrap(), &Distribution::new(vec![pr, 1.0 - pr]).unwrap())
            .unwrap()
            .to_f64();
        sup_ok &= (v - want).abs() <= 1e-3;
        parts.push(format!("D={level:.4}: {v:.4} vs {want:.4}"));
    }
    let at_dmin = large_rate_limit(&p, &q, &d, d.d_min()).to_f64();
    sup_ok &= (at_dmin - target).abs() <= 1e-3;
    let grid_lim = success_brute(&p, &q, &d, below[0].0, 1e4, GridSpec::new(200), InnerRate::Explicit).unwrap().to_f64();
    sup_ok &= (grid_lim - below[0].1).abs() <= tolerance(200, pr / 2.0, 2.0 * l);
    rep.line(
        "3-sup",
        "BSC fixture: large-R limit = min{D(T‖P): Σ T min d ≤ D}",
        sup_ok,
        t1.elapsed(),
        secs(30),
        format!("[{}]; grid oracle {grid_lim:.4}; at D=D_min {at_dmin:.5} vs ln(1/p) {target:.5}", parts.join(", ")),
    );
}

fn c4(rep: &mut Report) {
    let t0 = Instant::now();
    let spec = common::fixture("bsc22-envelope.json");
    let (p, q, d) = source_parts(&spec.source_model().unwrap());
    let target = (1.0f64 / 0.78).ln();
    let mut worst = 0.0f64;
    let mut vals = Vec::new();
    for &level in &spec.scaled_levels().unwrap() {
        let rm = r_max(&q, &d, level).unwrap().to_f64();
        let v = failure_envelope(&p, &q, &d, level, rm).unwrap().value.to_f64();
        let near = failure_envelope(&p, &q, &d, level, rm - 1e-9).unwrap().value.to_f64();
        worst = worst.max((v - target).abs()).max((near - target).abs());
        vals.push(format!("{v:.5}"));
    }
    rep.line(
        "4",
        "BSC fixture: envelope at r_max",
        worst <= 2e-3,
        t0.elapsed(),
        secs(30),
        format!("ln(1/(1−p)) = {target:.5}, values [{}], max gap {worst:.2e}", vals.join(", ")),
    );
}

fn two_minima(p: &Distribution, q: &Distribution, d: &DistortionModel, rho: f64) -> Vec<(f64, f64)> {
    failure_inner_minima(p, q, d, 0.0, rho, 1 << 14)
        .unwrap()
        .into_iter()
        .filter(|&(s, _)| s > 0.0 && s < rcexp_core::optimize::S_CAP)
        .collect()
}

fn c5(rep: &mut Report) {
    let t0 = Instant::now();
    let spec = common::fixture("five-letter.json");
    let (p, q, d) = source_parts(&spec.source_model().unwrap());
    let m = two_minima(&p, &q, &d, 0.65);
    let literal = m.len() == 2 && (m[0].1 - m[1].1).abs() <= 1e-6;

    // The caption's ρ is rounded; find where the two minima tie.
    let diff = |rho: f64| {
        let m = two_minima(&p, &q, &d, rho);
        m[0].1 - m[1].1
    };
    let (mut a, mut b) = (0.6, 0.7);
    let fa = diff(a);
    for _ in 0..50 {
        let c = 0.5 * (a + b);
        if (diff(c) > 0.0) == (fa > 0.0) {
            a = c;
        } else {
            b = c;
        }
    }
    let rho = 0.5 * (a + b);
    let mt = two_minima(&p, &q, &d, rho);
    let tie = mt.len() == 2 && (mt[0].1 - mt[1].1).abs() <= 1e-6;

    let rates: Vec<f64> = mt
        .iter()
        .map(|&(s, _)| {
            let t = tangent_type(&p, &q, &d, 0.0, s, rho).unwrap();
            rtqd(&t, &q, &d, 0.0).unwrap().value.to_f64()
        })
        .collect();
    let grid = GridSpec { denominator: 40, refinement_rounds: 2 };
    let mut best_gap = f64::NEG_INFINITY;
    let mut at = (0.0, 0.0, 0.0);
    for frac in [0.25, 0.5, 0.75] {
        let r = rates[0] + frac * (rates[1] - rates[0]);
        let env = failure_envelope(&p, &q, &d, 0.0, r).unwrap().value.to_f64();
        let bf = failure_brute(&p, &q, &d, 0.0, r, grid, InnerRate::Explicit).unwrap().to_f64();
        if bf - env > best_gap {
            best_gap = bf - env;
            at = (r, bf, env);
        }
    }
    let above = best_gap > 1e-3;
    let el = t0.elapsed();
    rep.line(
        "5",
        "five-letter fixture: two minima at ρ=0.65 and E_f above envelope",
        literal && above,
        el,
        secs(120),
        format!(
            "{} minima at ρ=0.65: {:?}; |ΔE₀| = {:.2e}; brute E_f − envelope = {best_gap:.4} at R={:.4} ({:.4} vs {:.4})",
            m.len(),
            m.iter().map(|&(s, e)| format!("s={s:.4} E₀={e:.6}")).collect::<Vec<_>>(),
            if m.len() == 2 { (m[0].1 - m[1].1).abs() } else { f64::NAN },
            at.0,
            at.1,
            at.2
        ),
    );
    rep.line(
        "5-tie",
        "five-letter fixture: two minima tie at the located slope ρ*",
        tie && above,
        el,
        secs(120),
        format!(
            "ρ* = {rho:.6}, minima {:?}, |ΔE₀| = {:.2e}; tangent rates R(T₁)={:.5}, R(T₂)={:.5}",
            mt.iter().map(|&(s, e)| format!("s={s:.4} E₀={e:.8}")).collect::<Vec<_>>(),
            (mt[0].1 - mt[1].1).abs(),
            rates[0],
            rates[1]
        ),
    );
}

fn c6(rep: &mut Report) {
    let t0 = Instant::now();
    let mut g = common::rng(606);
    let pos = [(0.02, 0.0), (0.05, 0.1), (0.1, 0.05), (0.2, 0.3), (0.4, 0.0)];
    let neg = [(0.02, -0.5), (0.05, -0.1), (0.1, -0.3), (0.3, -0.2), (0.5, -0.05)];
    let (mut eq_gap, mut chain) = (0.0f64, f64::NEG_INFINITY);
    for i in 0..20 {
        let k = if i < 10 { 2 } else { 3 };
        let p = common::channel(&mut g, k, k);
        let q = common::dist(&mut g, k);
        for &(r, l) in &pos {
            let ee = error_extended(&q, &p, r, l).unwrap().value;
            let f = forney_tradeoff_exponent(&q, &p, r, l).unwrap().value;
            let eb = e_bound(&q, &p, r, l).unwrap().value;
            eq_gap = eq_gap.max(ee.gap(f)).max(f.gap(eb)).max(ee.gap(eb));
        }
        for &(r, l) in &neg {
            let ee = error_extended(&q, &p, r, l).unwrap().value;
            let f = forney_tradeoff_exponent(&q, &p, r, l).unwrap().value;
            let eb = e_bound(&q, &p, r, l).unwrap().value;
            // Positive entries are violations.
            let v1 = if ee >= f { 0.0 } else { f.to_f64() - ee.to_f64() };
            let v2 = match (f, eb) {
                (Infinite, _) => 0.0,
                (Finite(_), Infinite) => f64::INFINITY,
                (Finite(a), Finite(b)) => b - a - 1e-12,
            };
            chain = chain.max(v1).max(v2);
        }
    }
    rep.line(
        "6",
        "E_e = Forney = E_bound for D≥0, ordered for D<0",
        eq_gap <= 1e-8 && chain <= 0.0,
        t0.elapsed(),
        secs(60),
        format!("max gap D≥0 {eq_gap:.2e}; worst chain violation D<0 {chain:.2e}"),
    );
}

fn c7(rep: &mut Report) {
    let t0 = Instant::now();
    let mut g = common::rng(707);
    let p = common::channel(&mut g, 3, 3);
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    // The bisection form is reported alongside; on 9 joint cells the default
    // T-grid is far too large, so it runs on a coarse one.
    let coarse = BoundaryGrid { denominator: 8, refinement_rounds: 2, tol: 1e-6 };
    for &level in &[-0.5, -0.1, 0.0, 0.2] {
        let (qstar, v) = maximize_over_q_with(3, QSearch::default(), |q| Finite(r_min(q, &p, level).unwrap()));
        let want = (-level).max(0.0);
        worst = worst.max((v.to_f64() - want).abs());
        let b = r_min_boundary(&qstar, &p, level, coarse).unwrap().to_f64();
        parts.push(format!("D={level}: {:.6} (bisection at Q* {b:.4})", v.to_f64()));
    }
    rep.line(
        "7",
        "max_Q R_min(Q,D) = max{0,−D}",
        worst <= 1e-3,
        t0.elapsed(),
        secs(120),
        format!("[{}], max gap {worst:.2e}", parts.join("; ")),
    );
}

fn c8(rep: &mut Report) {
    let t0 = Instant::now();
    let mut g = common::rng(808);
    let (mut w1, mut w2) = (0.0f64, 0.0f64);
    for i in 0..10 {
        let (nx, ny) = (2 + i % 2, 2 + (i / 2) % 2);
        let p = common::channel(&mut g, nx, ny);
        let q = common::dist(&mut g, nx);
        let (src, qq, d) = induced(&q, &p);
        for &(r, l) in &[(0.05, 0.0), (0.1, 0.1), (0.2, -0.1), (0.3, 0.3), (0.01, -0.4)] {
            let a = success_exponent(&src, &qq, &d, l, r).unwrap().value;
            let b = error_extended(&q, &p, r, l).unwrap().value;
            w1 = w1.max(a.gap(b));
        }
        let mi = mutual_information(&q, &p).unwrap();
        for &(r, l) in &[(mi + 0.05, 0.0), (mi + 0.2, 0.1), (0.5 * mi, 0.0), (mi + 0.1, 0.3), (mi, -0.1)] {
            let a = failure_envelope(&src, &qq, &d, l, r).unwrap().value;
            let b = correct_extended_envelope(&q, &p, r, l).unwrap().value;
            w2 = w2.max(a.gap(b));
        }
    }
    rep.line(
        "8",
        "source forms under the channel substitution",
        w1 <= 1e-9 && w2 <= 1e-9,
        t0.elapsed(),
        secs(60),
        format!("max |E_s − E_e| {w1:.2e}, max |envelope − correct envelope| {w2:.2e}"),
    );
}

fn c9_config() -> (SimConfig, Distribution, DistortionModel) {
    let cfg = SimConfig::new(Experiment::SourceEncode, vec![40, 80, 120, 160], LN_2 / 40.0, 0.3125, 1_000_000, 7);
    let d = DistortionModel::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    (cfg, Distribution::uniform(2), d)
}

fn csv(r: &SimResult) -> Vec<u8> {
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    buf
}

fn within(sim: &SimResult, want: &[f64]) -> f64 {
    sim.per_n
        .iter()
        .zip(want)
        .map(|(p, &w)| (p.p_hat - w).abs() / p.wilson_se().max(1e-300))
        .fold(0.0, f64::max)
}

fn c9(rep: &mut Report) -> Vec<u8> {
    let t0 = Instant::now();
    let (cfg, u, d) = c9_config();
    let engine = success_exponent(&u, &u, &d, cfg.level, cfg.rate).unwrap().value.to_f64();
    let sim = simulate_source(&cfg, &u, &u, &d).unwrap();
    let slope = sim.exponent_estimate.unwrap_or(f64::NAN);
    let rel = (slope - engine).abs() / engine;
    let in_band = (0.05..=0.12).contains(&engine);

    // Exact enumeration at tiny n: source, margin (both inequalities), Forney.
    let trials = 200_000;
    let p3 = Distribution::new(vec![0.5, 0.3, 0.2]).unwrap();
    let q2 = Distribution::new(vec![0.4, 0.6]).unwrap();
    let d32 = DistortionModel::new(vec![vec![0.0, 0.9], vec![0.35, 0.1], vec![1.0, 0.45]]).unwrap();
    let ch = Channel::new(vec![vec![0.8, 0.2], vec![0.3, 0.7]]).unwrap();
    let qc = Distribution::new(vec![0.45, 0.55]).unwrap();
    let ch3 = Channel::new(vec![vec![0.6, 0.3, 0.1], vec![0.2, 0.5, 0.3], vec![0.25, 0.25, 0.5]]).unwrap();
    let q3 = Distribution::new(vec![0.3, 0.3, 0.4]).unwrap();
    let mut z = 0.0f64;
    for (n, m) in [(3usize, 3u64), (5, 2), (6, 3)] {
        let c = SimConfig::new(Experiment::SourceEncode, vec![n], (m as f64).ln() / n as f64, 0.37, trials, 11);
        let s = simulate_source(&c, &p3, &q2, &d32).unwrap();
        let want = exact::source_success(&p3, &q2, &d32, 0.37, n, m).unwrap();
        z = z.max(within(&s, &[want])).max(within(&s.alternate(), &[1.0 - want]));
    }
    for (n, level) in [(4usize, 0.1), (6, -0.05)] {
        let c = SimConfig::new(Experiment::ChannelMargin, vec![n], LN_2 / n as f64, level, trials, 12);
        let s = simulate_channel_margin(&c, &qc, &ch).unwrap();
        let m = c.codebook_size(n).unwrap();
        z = z.max(within(&s, &[exact::margin_error(&qc, &ch, level, n, m, false).unwrap()]));
        z = z.max(within(&s.alternate(), &[exact::margin_error(&qc, &ch, level, n, m, true).unwrap()]));
        let c = SimConfig { experiment: Experiment::Forney, ..c };
        let s = simulate_forney(&c, &qc, &ch).unwrap();
        z = z.max(within(&s, &[exact::forney_error(&qc, &ch, level, n, m, true).unwrap()]));
        z = z.max(within(&s.alternate(), &[exact::forney_error(&qc, &ch, level, n, m, false).unwrap()]));
    }
    let c = SimConfig::new(Experiment::ChannelMargin, vec![4], LN_2 / 4.0, 0.2, trials, 13);
    let s = simulate_channel_margin(&c, &q3, &ch3).unwrap();
    z = z.max(within(&s, &[exact::margin_error(&q3, &ch3, 0.2, 4, 3, false).unwrap()]));

    let ps: Vec<String> = sim.per_n.iter().map(|p| format!("n={} M={} p̂={:.3e}", p.n, p.codebook_size, p.p_hat)).collect();
    rep.line(
        "9",
        "Monte-Carlo slope vs E_s, exact enumeration at n≤6",
        in_band && rel <= 0.15 && z <= 5.0,
        t0.elapsed(),
        secs(900),
        format!(
            "E_s = {engine:.5}, slope = {slope:.5} ± {:.5} (rel gap {:.1}%); [{}]; worst enumeration deviation {z:.2} Wilson SE",
            sim.slope_stderr.unwrap_or(f64::NAN),
            100.0 * rel,
            ps.join(", ")
        ),
    );
    csv(&sim)
}

fn c10(rep: &mut Report, reference: &[u8]) {
    let t0 = Instant::now();
    let (cfg, u, d) = c9_config();
    let mut same = true;
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let out = pool.install(|| csv(&simulate_source(&cfg, &u, &u, &d).unwrap()));
        same &= out == reference;
    }
    rep.line("10", "byte-identical CSV across thread counts", same, t0.elapsed(), secs(900), format!("1 and 3 worker threads vs default pool: identical = {same}"));
}

/// `cargo test --test acceptance -- 7 9` runs a subset; 10 needs 9.
fn main() {
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let on = |id: &str| only.is_empty() || only.iter().any(|a| a == id);
    let mut rep = Report { unexpected: Vec::new() };
    let all: [(&str, fn(&mut Report)); 8] = [("1", c1), ("2", c2), ("3", c3), ("4", c4), ("5", c5), ("6", c6), ("7", c7), ("8", c8)];
    for (id, f) in all {
        if on(id) {
            f(&mut rep);
        }
    }
    if on("9") || on("10") {
        let reference = c9(&mut rep);
        if on("10") {
            c10(&mut rep, &reference);
        }
    }
    if rep.unexpected.is_empty() {
        println!("acceptance: no unexpected failures");
    } else {
        println!("acceptance: unexpected failures in {:?}", rep.unexpected);
        std::process::exit(1);
    }
}
