//! `rcexp`: random-coding exponents from JSON model specs.
//!
//! Data goes to standard output or `--out`; diagnostics go to standard
//! error. Exit codes: 2 bad spec, 3 shape mismatch, 4 unwritable output,
//! 5 codebook too large.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use rcexp_core::curve::{self, CurveRequest};
use rcexp_core::exponent::{capacity, maximize_over_q, QSearch};
use rcexp_core::montecarlo::{simulate_channel_margin, simulate_forney, simulate_source, Experiment, SimConfig, SimResult, DEFAULT_CODEBOOK_CAP};
use rcexp_core::oracle::{self, GridSpec};
use rcexp_core::{evaluate, Error, ExponentKind, ExponentResult, ExtendedReal, Model, ModelSpec};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::DimensionMismatch(_)) => 3,
            CliError::Core(Error::CodebookTooLarge { .. }) => 5,
            CliError::Core(Error::InsufficientData(_)) => 1,
            CliError::Core(_) | CliError::Read { .. } | CliError::Usage(_) => 2,
            CliError::Write { .. } => 4,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "rcexp", version, about = "Random-coding exponents for finite-alphabet source and channel models")]
struct Cli {
    /// Worker threads for sweeps, oracles and simulations. Outputs do not
    /// depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Io {
    /// JSON model spec.
    spec: PathBuf,
    /// Write data here instead of standard output; a `<out>.meta.json`
    /// sidecar records how it was produced.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate one exponent (or `capacity`) at a single (R, D).
    Compute {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        kind: String,
        #[arg(long, short = 'R', default_value_t = 0.0)]
        rate: f64,
        /// Distortion level, in the spec's `d_scale` units.
        #[arg(long = "D", visible_alias = "level", default_value_t = 0.0, allow_negative_numbers = true)]
        level: f64,
        /// Add the brute-force value on a grid of this denominator.
        #[arg(long)]
        oracle: Option<u32>,
        /// Also write the parsed spec back out to this path.
        #[arg(long)]
        dump_spec: Option<PathBuf>,
    },
    /// Sweep a rate grid for each distortion level; CSV output.
    Curve {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        kind: String,
        /// Explicit rate grid, strictly increasing.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["r_max", "points"])]
        rates: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.0)]
        r_min: f64,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Distortion levels (spec units); defaults to the spec's `levels`.
        #[arg(long = "D", visible_alias = "levels", value_delimiter = ',', allow_negative_numbers = true)]
        levels: Option<Vec<f64>>,
    },
    /// Monte-Carlo simulation of random codebooks; per-n CSV plus a summary.
    Simulate {
        #[command(flatten)]
        io: Io,
        /// source, channel-margin or forney.
        #[arg(long)]
        experiment: String,
        /// Block lengths.
        #[arg(long = "n", value_delimiter = ',', required = true)]
        block_lengths: Vec<usize>,
        #[arg(long, short = 'R')]
        rate: f64,
        #[arg(long = "D", visible_alias = "level", default_value_t = 0.0, allow_negative_numbers = true)]
        level: f64,
        /// Trials per block length; `1e6` style accepted.
        #[arg(long, value_parser = parse_count, default_value = "100000")]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CODEBOOK_CAP)]
        cap: u64,
        /// Report the companion event: failure for source runs, `<` for
        /// margin runs, `≤` for Forney runs.
        #[arg(long)]
        alt: bool,
        /// Add the engine's exponent and the relative gap to the summary.
        #[arg(long)]
        compare: bool,
        /// Summary JSON path; defaults to `<out>.summary.json`, or standard
        /// error without `--out`.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Maximise an error-type exponent over the input distribution.
    MaximizeQ {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        kind: String,
        #[arg(long, short = 'R')]
        rate: f64,
        #[arg(long = "D", visible_alias = "level", default_value_t = 0.0, allow_negative_numbers = true)]
        level: f64,
        #[arg(long, default_value_t = 16)]
        denominator: u32,
        #[arg(long, default_value_t = 3)]
        rounds: u32,
    },
    /// Channel capacity in nats (and bits).
    Capacity {
        #[command(flatten)]
        io: Io,
    },
    /// Compare explicit formulas with the grid oracles; CSV output.
    OracleAudit {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 40)]
        m: u32,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.2,0.5")]
        rates: Vec<f64>,
        #[arg(long = "D", visible_alias = "levels", value_delimiter = ',', allow_negative_numbers = true)]
        levels: Option<Vec<f64>>,
        /// Restrict to these kinds.
        #[arg(long, value_delimiter = ',')]
        kinds: Option<Vec<String>>,
    },
}

fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64 => Ok(v as u64),
        _ => Err(format!("`{s}` is not a nonnegative integer count")),
    }
}

fn load(path: &Path) -> Result<ModelSpec> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    let spec = ModelSpec::from_json(&text).map_err(|e| match e {
        Error::Spec(m) => Error::Spec(format!("{}: {m}", path.display())),
        e => e,
    })?;
    spec.validate()?;
    Ok(spec)
}

fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        Value::Null
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn ext(v: ExtendedReal) -> Value {
    num(v.to_f64())
}

fn result_json(r: &ExponentResult, rate: f64, level: f64) -> Value {
    let mut v = json!({
        "kind": r.kind.name(),
        "R": num(rate),
        "D": num(level),
        "value": ext(r.value),
        "optimizer_rho": num(r.optimizer_rho),
        "optimizer_s": ext(r.optimizer_s),
        "boundary_flags": r.boundary_flags.iter().map(|f| f.name()).collect::<Vec<_>>(),
    });
    if let Some((a, b)) = r.component_values {
        v["component_values"] = json!([ext(a), ext(b)]);
    }
    if let Some(u) = r.relaxed_upper {
        v["relaxed_upper"] = ext(u);
    }
    v
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("json serialises");
    s.push(b'\n');
    s
}

struct Run {
    argv: Vec<String>,
    started: Instant,
}

impl Run {
    /// Data to `out` (plus sidecar) or standard output.
    fn emit(&self, out: &Option<PathBuf>, spec: &ModelSpec, spec_path: &Path, data: &[u8]) -> Result<()> {
        match out {
            None => io::stdout().write_all(data).map_err(|source| CliError::Write { path: "<stdout>".into(), source }),
            Some(path) => {
                write_file(path, data)?;
                self.sidecar(path, spec, spec_path)
            }
        }
    }

    fn sidecar(&self, path: &Path, spec: &ModelSpec, spec_path: &Path) -> Result<()> {
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let meta = json!({
            "tool": "rcexp",
            "version": env!("CARGO_PKG_VERSION"),
            "argv": self.argv,
            "spec": spec_path.display().to_string(),
            "spec_name": spec.name,
            "threads": rayon::current_num_threads(),
            "created_unix": created,
            "elapsed_seconds": self.started.elapsed().as_secs_f64(),
        });
        write_file(&suffixed(path, ".meta.json"), &pretty(&meta))
    }
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, data: &[u8]) -> Result<()> {
    fs::write(path, data).map_err(|source| CliError::Write { path: path.into(), source })
}

fn kind(s: &str) -> Result<ExponentKind> {
    Ok(s.parse()?)
}

fn compute(run: &Run, io: &Io, kind_s: &str, rate: f64, level: f64, m: Option<u32>, dump: &Option<PathBuf>) -> Result<()> {
    let spec = load(&io.spec)?;
    if let Some(path) = dump {
        write_file(path, spec.to_json().as_bytes())?;
    }
    if kind_s == "capacity" {
        return capacity_cmd(run, io, &spec);
    }
    let k = kind(kind_s)?;
    let model = spec.model_for(k)?;
    let level = spec.scale_level(level)?;
    let r = evaluate(k, &model, rate, level)?;
    let mut v = result_json(&r, rate, level);
    if let Some(m) = m {
        v["oracle"] = match oracle::brute(k, &model, rate, level, GridSpec::new(m))? {
            Some(b) => json!({
                "m": m,
                "value": ext(b),
                "gap": num(b.gap(r.value)),
                "tolerance": num(oracle::model_tolerance(&model, m)),
            }),
            None => json!({ "m": m, "value": Value::Null, "note": "no brute-force form for this kind" }),
        };
    }
    run.emit(&io.out, &spec, &io.spec, &pretty(&v))
}

#[allow(clippy::too_many_arguments)]
fn curve_cmd(
    run: &Run,
    io: &Io,
    kind_s: &str,
    rates: &Option<Vec<f64>>,
    r_min: f64,
    r_max: Option<f64>,
    points: usize,
    levels: &Option<Vec<f64>>,
) -> Result<()> {
    let spec = load(&io.spec)?;
    let k = kind(kind_s)?;
    let model = spec.model_for(k)?;
    let rates = match (rates, r_max) {
        (Some(r), _) => r.clone(),
        (None, Some(hi)) => CurveRequest::linspace(r_min, hi, points),
        (None, None) => return Err(CliError::Usage("give --rates or --r-max".into())),
    };
    let levels = match levels {
        Some(l) => l.iter().map(|&x| spec.scale_level(x)).collect::<rcexp_core::Result<Vec<_>>>()?,
        None if spec.levels.is_empty() => vec![0.0],
        None => spec.scaled_levels()?,
    };
    let req = CurveRequest::new(k, rates, levels)?;
    let pts = curve::sweep(&model, &req)?;
    let mut buf = Vec::new();
    curve::write_csv(&mut buf, &pts).expect("in-memory write");
    run.emit(&io.out, &spec, &io.spec, &buf)
}

fn engine_kind(e: Experiment, alt: bool) -> ExponentKind {
    match (e, alt) {
        (Experiment::SourceEncode, false) => ExponentKind::Success,
        (Experiment::SourceEncode, true) => ExponentKind::FailureEnvelope,
        (Experiment::ChannelMargin, _) => ExponentKind::ErrorExtended,
        (Experiment::Forney, _) => ExponentKind::ForneyTradeoff,
    }
}

fn summary_json(res: &SimResult, cfg: &SimConfig) -> Value {
    json!({
        "experiment": res.experiment.name(),
        "event": res.event,
        "alt_event": res.alt_event,
        "R": num(cfg.rate),
        "D": num(cfg.level),
        "seed": cfg.master_seed,
        "trials_per_n": cfg.trials,
        "per_n": res.per_n.iter().map(|p| json!({
            "n": p.n,
            "codebook_size": p.codebook_size,
            "count": p.count,
            "alt_count": p.alt_count,
            "p_hat": num(p.p_hat),
            "ci_low": num(p.ci_low),
            "ci_high": num(p.ci_high),
        })).collect::<Vec<_>>(),
        "slope": res.exponent_estimate.map_or(Value::Null, num),
        "stderr": res.slope_stderr.map_or(Value::Null, num),
    })
}

#[allow(clippy::too_many_arguments)]
fn simulate_cmd(
    run: &Run,
    io: &Io,
    experiment: &str,
    block_lengths: &[usize],
    rate: f64,
    level: f64,
    trials: u64,
    seed: u64,
    cap: u64,
    alt: bool,
    compare: bool,
    summary: &Option<PathBuf>,
) -> Result<()> {
    let spec = load(&io.spec)?;
    let e: Experiment = experiment.parse()?;
    let level = spec.scale_level(level)?;
    let mut cfg = SimConfig::new(e, block_lengths.to_vec(), rate, level, trials, seed);
    cfg.codebook_cap = cap;
    let res = match e {
        Experiment::SourceEncode => match spec.source_model()? {
            Model::Source { p, q, d } => simulate_source(&cfg, &p, &q, &d)?,
            Model::Channel { .. } => unreachable!(),
        },
        Experiment::ChannelMargin | Experiment::Forney => match spec.channel_model()? {
            Model::Channel { q, p } if e == Experiment::Forney => simulate_forney(&cfg, &q, &p)?,
            Model::Channel { q, p } => simulate_channel_margin(&cfg, &q, &p)?,
            Model::Source { .. } => unreachable!(),
        },
    };
    let res = if alt { res.alternate() } else { res };
    let mut csv = Vec::new();
    res.write_csv(&mut csv).expect("in-memory write");
    let mut sum = summary_json(&res, &cfg);
    if compare {
        let k = engine_kind(e, alt);
        let model = if e == Experiment::SourceEncode { spec.source_model()? } else { spec.channel_model()? };
        let engine = evaluate(k, &model, rate, level)?.value;
        let gap = match (res.exponent_estimate, engine) {
            (Some(s), ExtendedReal::Finite(v)) if v > 0.0 => num((s - v).abs() / v),
            _ => Value::Null,
        };
        sum["compare"] = json!({
            "engine_kind": k.name(),
            "engine_value": ext(engine),
            "relative_gap": gap,
            "p_hat_at_largest_n": res.per_n.last().map_or(Value::Null, |p| num(p.p_hat)),
        });
    }
    run.emit(&io.out, &spec, &io.spec, &csv)?;
    let target = summary.clone().or_else(|| io.out.as_ref().map(|o| suffixed(o, ".summary.json")));
    match target {
        Some(path) => write_file(&path, &pretty(&sum)),
        None => {
            eprintln!("{}", String::from_utf8_lossy(&pretty(&sum)).trim_end());
            Ok(())
        }
    }
}

fn maximize_cmd(run: &Run, io: &Io, kind_s: &str, rate: f64, level: f64, search: QSearch) -> Result<()> {
    let spec = load(&io.spec)?;
    let p = spec.channel_matrix()?;
    let level = spec.scale_level(level)?;
    let (q, r) = maximize_over_q(&p, rate, level, kind(kind_s)?, search)?;
    let v = json!({ "q": q.probs(), "result": result_json(&r, rate, level) });
    run.emit(&io.out, &spec, &io.spec, &pretty(&v))
}

fn capacity_cmd(run: &Run, io: &Io, spec: &ModelSpec) -> Result<()> {
    let p = spec.channel_matrix()?;
    let (q, c) = capacity(&p)?;
    let v = json!({ "kind": "capacity", "q": q.probs(), "value": num(c), "value_bits": num(c / std::f64::consts::LN_2) });
    run.emit(&io.out, spec, &io.spec, &pretty(&v))
}

fn audit_cmd(run: &Run, io: &Io, m: u32, rates: &[f64], levels: &Option<Vec<f64>>, kinds: &Option<Vec<String>>) -> Result<()> {
    let spec = load(&io.spec)?;
    let kinds: Vec<ExponentKind> = match kinds {
        Some(ks) => ks.iter().map(|k| kind(k)).collect::<Result<_>>()?,
        None => ExponentKind::ALL
            .into_iter()
            .filter(|k| *k != ExponentKind::EBound)
            .filter(|k| if k.is_source() { spec.has_source() || spec.has_channel() } else { spec.has_channel() })
            .collect(),
    };
    let levels = match levels {
        Some(l) => l.iter().map(|&x| spec.scale_level(x)).collect::<rcexp_core::Result<Vec<_>>>()?,
        None if spec.levels.is_empty() => vec![0.0],
        None => spec.scaled_levels()?,
    };
    let mut out = String::from("kind,R,D,explicit,oracle,gap,tol,within\n");
    let mut bad = 0;
    for &k in &kinds {
        let model = spec.model_for(k)?;
        let tol = oracle::model_tolerance(&model, m);
        for &level in &levels {
            for &rate in rates {
                let e = evaluate(k, &model, rate, level)?.value;
                let Some(b) = oracle::brute(k, &model, rate, level, GridSpec::new(m))? else { continue };
                let gap = b.gap(e);
                bad += usize::from(gap > tol);
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    k.name(),
                    curve::fmt_f64(rate),
                    curve::fmt_f64(level),
                    curve::fmt_ext(e),
                    curve::fmt_ext(b),
                    curve::fmt_f64(gap),
                    curve::fmt_f64(tol),
                    gap <= tol
                ));
            }
        }
    }
    eprintln!("oracle-audit: {bad} point(s) outside the grid tolerance");
    run.emit(&io.out, &spec, &io.spec, out.as_bytes())
}

fn dispatch(run: &Run, cmd: &Cmd) -> Result<()> {
    match cmd {
        Cmd::Compute { io, kind, rate, level, oracle, dump_spec } => compute(run, io, kind, *rate, *level, *oracle, dump_spec),
        Cmd::Curve { io, kind, rates, r_min, r_max, points, levels } => curve_cmd(run, io, kind, rates, *r_min, *r_max, *points, levels),
        Cmd::Simulate { io, experiment, block_lengths, rate, level, trials, seed, cap, alt, compare, summary } => {
            simulate_cmd(run, io, experiment, block_lengths, *rate, *level, *trials, *seed, *cap, *alt, *compare, summary)
        }
        Cmd::MaximizeQ { io, kind, rate, level, denominator, rounds } => {
            maximize_cmd(run, io, kind, *rate, *level, QSearch { denominator: *denominator, rounds: *rounds })
        }
        Cmd::Capacity { io } => capacity_cmd(run, io, &load(&io.spec)?),
        Cmd::OracleAudit { io, m, rates, levels, kinds } => audit_cmd(run, io, *m, rates, levels, kinds),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = Run { argv: std::env::args().collect(), started: Instant::now() };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&run, &cli.cmd)),
            Err(e) => Err(CliError::Usage(format!("cannot start {n} threads: {e}"))),
        },
        None => dispatch(&run, &cli.cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rcexp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
