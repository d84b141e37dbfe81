//! Command-line front end. CSV goes to standard output, diagnostics to
//! standard error.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 a simulated run
//! recovered a wrong partition, 3 a replayed log contradicts itself.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::algorithms::{replay_log, BetaMode, ReplayError, ReprConfig, RunOptions};
use crate::bounds::{self, BetaObjective};
use crate::harness::{self, Algorithm, Budget, ExperimentConfig, ExperimentResult, HarnessError};
use crate::problem::{ClassDistribution, ProblemConfig};
use crate::teachers::ReplayLog;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_INCONSISTENT: i32 = 3;

const SIGNIFICANT_DIGITS: usize = 9;

#[derive(Debug, Parser)]
#[command(name = "labelfuse", version, about = "Distributed labeling simulator and bounds calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate the efficiency bounds over an alpha grid.
    Bounds(BoundsArgs),
    /// Run one seeded experiment and print a CSV row.
    Simulate(SimulateArgs),
    /// Run an experiment per (alpha, p) grid point.
    Sweep(SweepArgs),
    /// Rebuild the partition implied by a recorded annotator log.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// `from:to:steps`, `logspace:from:to:steps` or a comma list.
    #[arg(long)]
    alpha: String,
    /// Name-consistency values; adds one c4 column each.
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    /// `theorem`, `exact`, or a fixed beta in (0, 1).
    #[arg(long, default_value = "theorem")]
    beta_mode: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgArg {
    C3,
    Repr,
    C4,
}

#[derive(Debug, Args, Default)]
struct ExperimentArgs {
    /// `key = value` file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    c: Option<usize>,
    #[arg(long, value_enum)]
    alg: Option<AlgArg>,
    /// `auto`, `auto-exact`, or a fixed beta (representatives only).
    #[arg(long)]
    beta: Option<String>,
    /// `uniform`, `zipf:<s>` or `explicit:<p1>,<p2>,...`.
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    /// Teacher budget as a fraction of c (`l = round(alpha * c)`).
    #[arg(long)]
    alpha: Option<f64>,
    /// Name consistency (c4 only).
    #[arg(long)]
    p: Option<f64>,
    /// Write the per-round trace of trial 0 to this CSV file.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    /// Alpha grid: `from:to:steps`, `logspace:from:to:steps` or a comma list.
    #[arg(long)]
    alpha: Option<String>,
    /// Comma-separated name-consistency grid (c4 only).
    #[arg(long)]
    p: Option<String>,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    /// Tab-separated `teacher, instance, name` log with a `#l=<int>` header.
    log: PathBuf,
    /// Instance count; defaults to the `#n=` header or the largest id + 1.
    #[arg(long)]
    n: Option<usize>,
    /// Write `instance,component` rows to this file.
    #[arg(long)]
    components: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Harness(HarnessError::Integrity { .. }) => EXIT_VERIFY,
            CliError::Harness(_) => EXIT_USAGE,
            CliError::Replay(ReplayError::Inconsistent { .. }) => EXIT_INCONSISTENT,
            CliError::Replay(ReplayError::Log(_)) => EXIT_USAGE,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ =
                if code == EXIT_OK { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Bounds(a) => cmd_bounds(&a, out),
        Command::Simulate(a) => cmd_simulate(&a, out, err),
        Command::Sweep(a) => cmd_sweep(&a, out, err),
        Command::Replay(a) => cmd_replay(&a, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Formats `x` with at most [`SIGNIFICANT_DIGITS`] significant digits in
/// plain decimal notation, without trailing zeros.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exponent).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (9.99.. -> 10.0..).
    let digits = s.chars().filter(char::is_ascii_digit).collect::<String>();
    let s = if digits.trim_start_matches('0').len() > SIGNIFICANT_DIGITS && decimals > 0 {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    };
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

/// Parses an alpha grid: `from:to:steps` (linear, inclusive),
/// `logspace:from:to:steps`, or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let (log, body) = match spec.strip_prefix("logspace:") {
        Some(rest) => (true, rest),
        None => (false, spec),
    };
    if body.contains(':') {
        let parts: Vec<&str> = body.split(':').collect();
        let [from, to, steps] = parts[..] else {
            return Err(format!("grid `{spec}` must look like from:to:steps"));
        };
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("bad number `{s}` in grid `{spec}`"));
        let (from, to) = (num(from)?, num(to)?);
        let steps: usize = steps.trim().parse().map_err(|_| format!("bad step count `{steps}` in grid `{spec}`"))?;
        if !(from > 0.0 && from < to && to.is_finite()) {
            return Err(format!("grid `{spec}` needs 0 < from < to"));
        }
        if steps < 2 {
            return Err(format!("grid `{spec}` needs at least 2 steps"));
        }
        let last = (steps - 1) as f64;
        return Ok((0..steps)
            .map(|i| {
                let t = i as f64 / last;
                if i == steps - 1 {
                    to
                } else if log {
                    (from.ln() + t * (to.ln() - from.ln())).exp()
                } else {
                    from + t * (to - from)
                }
            })
            .collect());
    }
    if log {
        return Err(format!("grid `{spec}` must look like logspace:from:to:steps"));
    }
    let values = body
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad number `{s}` in grid `{spec}`")))
        .collect::<Result<Vec<_>, _>>()?;
    if values.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(format!("grid `{spec}` values must be positive"));
    }
    Ok(values)
}

fn parse_list(spec: &str) -> Result<Vec<f64>, String> {
    spec.split(',').map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad number `{s}` in list `{spec}`"))).collect()
}

fn cmd_bounds(args: &BoundsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let grid = parse_grid(&args.alpha).map_err(usage)?;
    if let Some(p) = args.p.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(usage(format!("p must lie in [0, 1], got {p}")));
    }
    let mode = match args.beta_mode.as_str() {
        "theorem" => BetaMode::Auto(BetaObjective::Theorem),
        "exact" => BetaMode::Auto(BetaObjective::Exact),
        v => match v.parse::<f64>() {
            Ok(b) if b > 0.0 && b < 1.0 => BetaMode::Fixed(b),
            _ => return Err(usage(format!("--beta-mode must be theorem, exact or a value in (0, 1), got `{v}`"))),
        },
    };

    let mut header = String::from("alpha,c3,repr_theorem,repr_exact,beta_star,upper");
    for p in &args.p {
        header.push_str(&format!(",c4_p{p}"));
    }
    let mut text = header + "\n";
    for &alpha in &grid {
        let bad = |e: bounds::BoundsError| usage(e.to_string());
        let beta = match mode {
            BetaMode::Fixed(b) => b,
            BetaMode::Auto(objective) => bounds::optimize_beta(alpha, objective).map_err(bad)?.0,
        };
        let mut row = vec![
            alpha,
            bounds::c3_bound(alpha).map_err(bad)?,
            bounds::representatives_bound(alpha, beta).map_err(bad)?,
            bounds::representatives_bound_exact(alpha, beta).map_err(bad)?,
            beta,
            bounds::upper_bound(alpha).map_err(bad)?,
        ];
        for &p in &args.p {
            row.push(bounds::c4_bound(alpha, p).map_err(bad)?);
        }
        text.push_str(&row.iter().map(|&v| fmt_sig(v)).collect::<Vec<_>>().join(","));
        text.push('\n');
    }
    out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
}

/// Keys accepted in `--config` files.
const CONFIG_KEYS: &[&str] = &["n", "c", "alpha", "alg", "beta", "p", "dist", "trials", "seed"];

fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(usage(format!("{}:{}: expected `key = value`", path.display(), i + 1)));
        };
        let key = key.trim().to_ascii_lowercase();
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(usage(format!("{}:{}: unknown key `{key}`", path.display(), i + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

/// Flag values layered over the config file.
struct Settings {
    file: BTreeMap<String, String>,
}

impl Settings {
    fn load(config: Option<&Path>) -> Result<Self, CliError> {
        Ok(Settings { file: config.map(read_config).transpose()?.unwrap_or_default() })
    }

    fn get<T: std::str::FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| usage(format!("bad value `{v}` for `{key}` in config file"))),
        }
    }

    fn text(&self, key: &str, flag: Option<&str>) -> Option<String> {
        flag.map(str::to_string).or_else(|| self.file.get(key).cloned())
    }

    fn require<T: std::str::FromStr>(&self, key: &str, flag: Option<T>) -> Result<T, CliError> {
        self.get(key, flag)?.ok_or_else(|| usage(format!("missing required --{key}")))
    }
}

fn parse_alg(s: &str) -> Result<AlgArg, CliError> {
    AlgArg::from_str(s, true).map_err(|_| usage(format!("unknown algorithm `{s}` (expected c3, repr or c4)")))
}

fn parse_beta(s: &str) -> Result<ReprConfig, CliError> {
    match s {
        "auto" => Ok(ReprConfig::auto()),
        "auto-exact" => Ok(ReprConfig { mode: BetaMode::Auto(BetaObjective::Exact) }),
        v => v
            .parse::<f64>()
            .ok()
            .filter(|b| *b > 0.0 && *b < 1.0)
            .map(ReprConfig::fixed)
            .ok_or_else(|| usage(format!("--beta must be auto, auto-exact or a value in (0, 1), got `{v}`"))),
    }
}

/// Builds the experiment shared by `simulate` and `sweep`; the budget is
/// filled in per grid point.
fn base_experiment(common: &ExperimentArgs, settings: &Settings, p: f64) -> Result<ExperimentConfig, CliError> {
    let n = settings.require("n", common.n)?;
    let c = settings.require("c", common.c)?;
    let alg = match settings.text("alg", None) {
        _ if common.alg.is_some() => common.alg.unwrap(),
        Some(s) => parse_alg(&s)?,
        None => return Err(usage("missing required --alg")),
    };
    let distribution = match settings.text("dist", common.dist.as_deref()) {
        None => ClassDistribution::Uniform,
        Some(s) => s.parse().map_err(|e: crate::problem::ProblemError| usage(e.to_string()))?,
    };
    let beta = settings.text("beta", common.beta.as_deref());
    let algorithm = match alg {
        AlgArg::C3 => Algorithm::C3,
        AlgArg::C4 => Algorithm::C4,
        AlgArg::Repr => Algorithm::Representatives(parse_beta(beta.as_deref().unwrap_or("auto"))?),
    };
    if beta.is_some() && alg != AlgArg::Repr {
        return Err(usage("--beta only applies to --alg repr"));
    }
    Ok(ExperimentConfig {
        problem: ProblemConfig { n, c, distribution, seed: 0 },
        algorithm,
        budget: Budget::Alpha(1.0),
        p,
        trials: settings.get("trials", common.trials)?.unwrap_or(10),
        master_seed: settings.get("seed", common.seed)?.unwrap_or(0),
    })
}

const SIMULATE_HEADER: &str = "alg,n,c,alpha,beta,p,trials,seed,mean_labels,mean_eff,stderr,ci_lo,ci_hi,bound,upper";

fn result_row(config: &ExperimentConfig, r: &ExperimentResult) -> String {
    let beta = r.beta.map(fmt_sig).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        config.algorithm,
        r.n,
        r.c,
        fmt_sig(r.alpha),
        beta,
        fmt_sig(r.p),
        config.trials,
        config.master_seed,
        fmt_sig(r.mean_labels),
        fmt_sig(r.mean_efficiency),
        fmt_sig(r.std_err),
        fmt_sig(r.ci95_low),
        fmt_sig(r.ci95_high),
        fmt_sig(r.bound_value),
        fmt_sig(r.upper_value),
    )
}

fn summary(config: &ExperimentConfig, r: &ExperimentResult) -> String {
    format!(
        "{}: n={} c={} l={} trials={}: efficiency {:.4} +/- {:.4} (95% CI {:.4}..{:.4}), bound {:.4}, ceiling {:.4}, {:.0} labels on average",
        config.algorithm,
        r.n,
        r.c,
        r.l,
        config.trials,
        r.mean_efficiency,
        r.std_err,
        r.ci95_low,
        r.ci95_high,
        r.bound_value,
        r.upper_value,
        r.mean_labels,
    )
}

fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let settings = Settings::load(args.common.config.as_deref())?;
    let p = settings.get("p", args.p)?.unwrap_or(0.0);
    let alpha: f64 = settings.require("alpha", args.alpha)?;
    let config = ExperimentConfig { budget: Budget::Alpha(alpha), ..base_experiment(&args.common, &settings, p)? };
    config.validate()?;

    if let Some(path) = &args.trace {
        let opts = RunOptions { trace: true, ..RunOptions::default() };
        let outcome = harness::run_trial(&config, 0, &opts)?;
        let mut text = String::from("round,node_count,labels_used\n");
        for t in &outcome.trace {
            text.push_str(&format!("{},{},{}\n", t.round, t.node_count, t.labels_used));
        }
        std::fs::write(path, text).map_err(|e| io_error(path, e))?;
    }

    let result = harness::run_experiment(&config)?;
    let text = format!("{SIMULATE_HEADER}\n{}", result_row(&config, &result));
    out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
    let _ = writeln!(err, "{}", summary(&config, &result));
    Ok(())
}

fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let settings = Settings::load(args.common.config.as_deref())?;
    let grid_spec = settings.text("alpha", args.alpha.as_deref()).ok_or_else(|| usage("missing required --alpha"))?;
    let alphas = parse_grid(&grid_spec).map_err(usage)?;
    let ps = settings.text("p", args.p.as_deref()).map(|s| parse_list(&s)).transpose().map_err(usage)?;
    let base_p = ps.as_ref().and_then(|v| v.first().copied()).unwrap_or(0.0);
    let base = base_experiment(&args.common, &settings, base_p)?;
    // Validate every grid point before spending time on any of them.
    for &alpha in &alphas {
        for &p in ps.as_deref().unwrap_or(&[base_p]) {
            ExperimentConfig { budget: Budget::Alpha(alpha), p, ..base.clone() }.validate()?;
        }
    }
    let table = harness::sweep(&base, &alphas, ps.as_deref())?;
    let mut text = format!("{SIMULATE_HEADER}\n");
    for row in &table.rows {
        let config = ExperimentConfig { budget: Budget::Alpha(row.alpha), p: row.p, ..base.clone() };
        text.push_str(&result_row(&config, &row.result));
        let _ = writeln!(err, "{}", summary(&config, &row.result));
    }
    out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
}

fn cmd_replay(args: &ReplayArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let file = File::open(&args.log).map_err(|e| io_error(&args.log, e))?;
    let log = ReplayLog::parse(BufReader::new(file)).map_err(ReplayError::from)?;
    let n = args.n.unwrap_or_else(|| log.instance_count());
    let outcome = replay_log(&log, n)?;
    if let Some(path) = &args.components {
        let mut text = String::from("instance,component\n");
        for (x, k) in outcome.partition.iter().enumerate() {
            text.push_str(&format!("{x},{k}\n"));
        }
        std::fs::write(path, text).map_err(|e| io_error(path, e))?;
    }
    let text = format!(
        "n,teachers,labels,components,resolved\n{},{},{},{},{}\n",
        outcome.n,
        outcome.teachers_used,
        outcome.labels_used,
        outcome.components,
        u8::from(outcome.resolved)
    );
    out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
    let _ = writeln!(
        err,
        "{} labels from {} teachers over {} instances: {} components{}",
        outcome.labels_used,
        outcome.teachers_used,
        outcome.n,
        outcome.components,
        if outcome.resolved { ", all pairwise distinct" } else { ", some pairs still undetermined" }
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("labelfuse").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig((-1.0f64).exp()), "0.367879441");
        assert_eq!(fmt_sig(0.4), "0.4");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(123456.0), "123456");
        assert_eq!(fmt_sig(6.6626e-4), "0.00066626");
        assert_eq!(fmt_sig(9.9999999999), "10");
        assert_eq!(fmt_sig(-0.1234567891), "-0.123456789");
        assert_eq!(fmt_sig(1e12), "1000000000000");
        assert_eq!(fmt_sig(0.0), "0");
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1:2:3").unwrap(), vec![1.0, 1.5, 2.0]);
        let g = parse_grid("logspace:0.001:1:4").unwrap();
        assert!((g[1] - 0.01).abs() < 1e-15 && (g[2] - 0.1).abs() < 1e-14 && g[3] == 1.0);
        assert_eq!(parse_grid("0.1, 0.25").unwrap(), vec![0.1, 0.25]);
        assert!(parse_grid("1:1:2").is_err());
        assert!(parse_grid("0:1:5").is_err());
        assert!(parse_grid("0.1:1:1").is_err());
        assert!(parse_grid("0.1:1").is_err());
        assert!(parse_grid("logspace:0.1,0.2").is_err());
        assert!(parse_grid("0.1,-1").is_err());
    }

    #[test]
    fn bounds_table() {
        let (code, out, _) = call(&["bounds", "--alpha", "0.1:3:30", "--p", "0"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "alpha,c3,repr_theorem,repr_exact,beta_star,upper,c4_p0");
        assert_eq!(lines.len(), 31);
        let row = lines.iter().find(|l| l.starts_with("1,")).unwrap();
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[1], "0.367879441");
        assert_eq!(cols[1], cols[6]);
        assert_eq!(call(&["bounds", "--alpha", "1:1:2"]).0, EXIT_USAGE);
        assert_eq!(call(&["bounds", "--alpha", "1:2:2", "--beta-mode", "2"]).0, EXIT_USAGE);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["simulate", "--alg", "c3", "--n", "100", "--alpha", "1"]).0, EXIT_USAGE);
        assert_eq!(call(&["simulate", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(call(&[]).0, EXIT_USAGE);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
        let (code, _, err) = call(&["simulate", "--alg", "c3", "--n", "100", "--c", "10", "--alpha", "0.01"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("at least 2"), "{err}");
        assert_eq!(
            call(&["simulate", "--alg", "c3", "--n", "100", "--c", "10", "--alpha", "1", "--beta", "0.3"]).0,
            EXIT_USAGE
        );
    }

    #[test]
    fn simulate_row() {
        let args =
            ["simulate", "--alg", "repr", "--n", "3000", "--c", "30", "--alpha", "0.5", "--trials", "3", "--seed", "5"];
        let (code, out, err) = call(&args);
        assert_eq!(code, 0, "{err}");
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], SIMULATE_HEADER);
        let cols: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(cols.len(), 15);
        assert_eq!(&cols[..4], &["repr", "3000", "30", "0.5"]);
        let (beta, _) = bounds::optimize_beta(0.5, BetaObjective::Theorem).unwrap();
        assert_eq!(cols[4], fmt_sig(beta));
        assert_eq!(call(&args).1, out);
    }
}
