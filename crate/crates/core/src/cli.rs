//! Command-line front end: argument model, dispatch and exit codes.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;

use crate::dyadic::DyadicInterval;
use crate::error::{DslabError, Result};
use crate::means::{named_kernel, MeanId, MeanKind};
use crate::scalar::{parse_rational, NumericMode, Scalar};
use crate::systems::SystemId;
use crate::transforms::SampledFunction;
use crate::verification::report::{bundle, Column, ExperimentReport, Verdict};
use crate::verification::{
    monotone_blowup, power_blowup, condition_report, convergence_experiment, preset_blowup_suite,
    verify_decomposition, verify_majorant, PowerBlowupPart,
};
use crate::weights::{check_condition, Condition, WeightRepr, WeightSequence};

/// Exit status for malformed invocations and invalid parameters.
pub const EXIT_USAGE: i32 = 64;
/// Exit status when a computation needs a finer resolution than allowed.
pub const EXIT_RESOLUTION: i32 = 65;
/// Exit status when report files cannot be written.
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Parser)]
#[command(name = "dslab", version, about = "Dyadic harmonic analysis laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Subcommand, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Dump a kernel's values at every cell.
    Kernel,
    /// Check weight conditions over a dyadic grid.
    Conditions,
    /// Exact check of the Nörlund kernel decomposition.
    #[command(name = "lemma2")]
    Decomposition,
    /// Empirical constant of the Nörlund kernel majorant.
    #[command(name = "lemma3")]
    Majorant,
    /// Blow-up ratio for monotone Nörlund weights.
    #[command(name = "blowup2")]
    MonotoneBlowup,
    /// Blow-up ratio under power-type bounds.
    #[command(name = "blowup3")]
    PowerBlowup,
    /// Error of a mean against an indicator function.
    Converge,
    /// Blow-up runs for the named weight presets.
    #[command(name = "corollaries")]
    PresetSuite,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Options {
    /// Sampling resolution N (2^N cells).
    #[arg(long, global = true)]
    pub resolution: Option<u32>,
    /// Numeric mode: exact or float.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// Weight preset: constant, cesaro:α, power:α, log:α:β or custom:path.
    #[arg(long, global = true, default_value = "constant")]
    pub weights: String,
    /// α as an exact rational "num/den".
    #[arg(long, global = true)]
    pub alpha: Option<String>,
    /// p as an exact rational "num/den".
    #[arg(long, global = true)]
    pub p: Option<String>,
    /// Block exponent m.
    #[arg(long, global = true)]
    pub m: Option<u32>,
    /// Index or grid: "k", "a..b", "2^a..2^b" or a comma list.
    #[arg(long, global = true)]
    pub n: Option<String>,
    /// Kernel or mean kind.
    #[arg(long, global = true)]
    pub kind: Option<String>,
    /// Walsh system: w (Paley) or k (Kaczmarz).
    #[arg(long, global = true)]
    pub system: Option<String>,
    /// Restrict `conditions` to one condition id.
    #[arg(long, global = true)]
    pub condition: Option<String>,
    /// Part of the power-type blow-up: b or c.
    #[arg(long, global = true)]
    pub part: Option<String>,
    /// Target interval "rank:prefix" for `converge`.
    #[arg(long, global = true, default_value = "2:2")]
    pub target: String,
    /// CSV output path; a JSON summary is written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; DSLAB_THREADS takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

/// Parses an index grid: `k`, `a..b`, `2^a..2^b` or `a,b,c`.
pub fn parse_grid(text: &str) -> Result<Vec<u64>> {
    let text = text.trim();
    let num = |s: &str| -> Result<u64> {
        s.trim()
            .parse::<u64>()
            .map_err(|_| DslabError::parse(format!("bad grid entry {s:?}")))
    };
    let grid: Vec<u64> = if let Some((a, b)) = text.split_once("..") {
        match (a.trim().strip_prefix("2^"), b.trim().strip_prefix("2^")) {
            (Some(a), Some(b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if b > 62 {
                    return Err(DslabError::parse("dyadic grid exponent above 62"));
                }
                (a..=b).map(|k| 1u64 << k).collect()
            }
            (None, None) => (num(a)?..=num(b)?).collect(),
            _ => return Err(DslabError::parse(format!("mixed grid {text:?}"))),
        }
    } else {
        text.split(',').map(num).collect::<Result<_>>()?
    };
    if grid.is_empty() {
        return Err(DslabError::parse(format!("empty grid {text:?}")));
    }
    Ok(grid)
}

fn parse_mode(text: &str) -> Result<NumericMode> {
    match text {
        "exact" => Ok(NumericMode::Exact),
        "float" => Ok(NumericMode::Float),
        other => Err(DslabError::parse(format!("unknown mode {other:?}"))),
    }
}

fn required<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| DslabError::parse(format!("missing --{flag}")))
}

fn single_n(text: &str) -> Result<u64> {
    let grid = parse_grid(text)?;
    match grid.as_slice() {
        [n] => Ok(*n),
        _ => Err(DslabError::parse("expected a single --n")),
    }
}

fn small_grid(text: &str) -> Result<Vec<u32>> {
    parse_grid(text)?
        .into_iter()
        .map(|n| u32::try_from(n).map_err(|_| DslabError::parse("n too large")))
        .collect()
}

impl Options {
    fn mode_or(&self, default: NumericMode) -> Result<NumericMode> {
        self.mode.as_deref().map(parse_mode).transpose().map(|m| m.unwrap_or(default))
    }

    fn rational(&self, value: &Option<String>, flag: &str) -> Result<BigRational> {
        parse_rational(required(value, flag)?)
    }

    fn system(&self, default: SystemId) -> Result<SystemId> {
        self.system.as_deref().map(str::parse).transpose().map(|s| s.unwrap_or(default))
    }

    /// Loads the weights, rejecting float-only presets in exact mode.
    fn weights(&self, mode: NumericMode) -> Result<WeightSequence> {
        let q = WeightSequence::preset(&self.weights)?;
        if mode == NumericMode::Exact && q.repr() == WeightRepr::Float {
            return Err(DslabError::mode(format!(
                "weights {} are float-only; pass --mode float",
                q.label()
            )));
        }
        Ok(q)
    }
}

fn kernel_report<S: Scalar>(o: &Options) -> Result<ExperimentReport> {
    let n = single_n(required(&o.n, "n")?)?;
    let resolution = *required(&o.resolution, "resolution")?;
    let system = o.system(SystemId::WalshPaley)?;
    let kind = o.kind.as_deref().unwrap_or("dirichlet");
    let weights = if kind == "norlund" { Some(o.weights(S::MODE)?) } else { None };
    let values: SampledFunction<S> = named_kernel(kind, n, system, resolution, weights.as_ref())?;
    let float = S::MODE == NumericMode::Float;
    let columns = (0..values.len())
        .map(|x| {
            let name = format!("x{x}");
            if float {
                Column::float(&name)
            } else {
                Column::exact(&name)
            }
        })
        .collect();
    let mut report = ExperimentReport::new("kernel", columns)
        .param("kind", kind)
        .param("n", n)
        .param("system", system)
        .param("resolution", resolution);
    report.push_row(values.values().iter().map(Scalar::to_csv).collect());
    report.verdict = Verdict::Pass;
    Ok(report)
}

fn conditions(o: &Options, mode: NumericMode) -> Result<ExperimentReport> {
    let q = o.weights(mode)?;
    let alpha = o.alpha.as_deref().map(parse_rational).transpose()?;
    let n_max = match &o.n {
        Some(text) => *parse_grid(text)?.iter().max().unwrap(),
        None => 1 << 12,
    };
    let ids: Vec<&str> = match &o.condition {
        Some(id) => vec![id.as_str()],
        None => Condition::IDS
            .iter()
            .copied()
            .filter(|id| alpha.is_some() || Condition::parse(id, None).is_ok())
            .collect(),
    };
    let mut parts = vec![];
    for id in ids {
        let cond = Condition::parse(id, alpha.clone())?;
        let mut part = condition_report(&check_condition(&q, &cond, n_max)?);
        part.experiment = id.to_string();
        parts.push(part);
    }
    Ok(bundle("conditions", &parts).param("weights", q.label()).param("n_max", n_max))
}

fn converge(o: &Options) -> Result<ExperimentReport> {
    if o.mode_or(NumericMode::Float)? != NumericMode::Float {
        return Err(DslabError::mode("convergence runs are float-only"));
    }
    let resolution = o.resolution.unwrap_or(12);
    let (rank, prefix) = o
        .target
        .split_once(':')
        .ok_or_else(|| DslabError::parse("--target is rank:prefix"))?;
    let rank: u32 = rank.trim().parse().map_err(|_| DslabError::parse("bad target rank"))?;
    let prefix: u64 = prefix.trim().parse().map_err(|_| DslabError::parse("bad target prefix"))?;
    let f = SampledFunction::<f64>::indicator(&DyadicInterval::new(rank, prefix)?, resolution)?;
    let kind = MeanKind::parse(o.kind.as_deref().unwrap_or("fejer"))?;
    let system = o.system(SystemId::WalshKaczmarz)?;
    let grid = parse_grid(o.n.as_deref().unwrap_or("2^3..2^10"))?;
    Ok(convergence_experiment(&MeanId::new(kind, system), &f, &grid)?.param("target", &o.target))
}

/// Runs one subcommand and returns its report.
pub fn execute(command: Command, o: &Options) -> Result<ExperimentReport> {
    match command {
        Command::Kernel => match o.mode_or(NumericMode::Exact)? {
            NumericMode::Exact => kernel_report::<BigRational>(o),
            NumericMode::Float => kernel_report::<f64>(o),
        },
        Command::Conditions => conditions(o, o.mode_or(NumericMode::Exact)?),
        Command::Decomposition => {
            let mode = o.mode_or(NumericMode::Exact)?;
            if mode != NumericMode::Exact {
                return Err(DslabError::mode("the decomposition check is exact-only"));
            }
            let m = *required(&o.m, "m")?;
            verify_decomposition(&o.weights(mode)?, m, o.resolution.unwrap_or(m + 2))
        }
        Command::Majorant => {
            let q = o.weights(o.mode_or(NumericMode::Exact)?)?;
            let alpha = o.rational(&o.alpha, "alpha")?;
            let n_max = match &o.n {
                Some(text) => *parse_grid(text)?.iter().max().unwrap(),
                None => 1 << 8,
            };
            verify_majorant(&q, &alpha, n_max, o.resolution.unwrap_or(10))
        }
        Command::MonotoneBlowup => {
            let mode = o.mode_or(NumericMode::Exact)?;
            let grid = small_grid(o.n.as_deref().unwrap_or("2..8"))?;
            monotone_blowup(&o.weights(mode)?, &o.rational(&o.p, "p")?, &grid, mode)
        }
        Command::PowerBlowup => {
            let mode = o.mode_or(NumericMode::Exact)?;
            let grid = small_grid(o.n.as_deref().unwrap_or("2..10"))?;
            let part: PowerBlowupPart = o.part.as_deref().unwrap_or("b").parse()?;
            let p = o.p.as_deref().map(parse_rational).transpose()?;
            let alpha = o.rational(&o.alpha, "alpha")?;
            power_blowup(&o.weights(mode)?, &alpha, p.as_ref(), &grid, part, mode)
        }
        Command::Converge => converge(o),
        Command::PresetSuite => preset_blowup_suite(),
    }
}

/// Exit status for an error.
pub fn error_code(e: &DslabError) -> i32 {
    match e {
        DslabError::Resolution { .. } => EXIT_RESOLUTION,
        DslabError::Io(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

fn thread_count(o: &Options) -> Result<Option<usize>> {
    match std::env::var("DSLAB_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| DslabError::parse(format!("bad DSLAB_THREADS {v:?}"))),
        _ => Ok(o.threads),
    }
}

/// Runs a parsed invocation on a pool sized by `DSLAB_THREADS` or
/// `--threads`.
pub fn report_for(cli: &Cli) -> Result<ExperimentReport> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(&cli.options)? {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| DslabError::Io(format!("thread pool: {e}")))?;
    pool.install(|| execute(cli.command, &cli.options))
}

/// Parses subcommand arguments (without the program name) and runs them.
pub fn report_from_args<I, T>(args: I) -> Result<ExperimentReport>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("dslab")).chain(args.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(argv).map_err(|e| DslabError::parse(e.to_string().trim().to_string()))?;
    report_for(&cli)
}

/// Runs a parsed invocation, writing the CSV to `out` (or to files with
/// `--out`) and diagnostics to `err`. Returns the exit status.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let report = match report_for(cli) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "dslab: {e}");
            return error_code(&e);
        }
    };
    let written = match &cli.options.out {
        Some(path) => report
            .write(path)
            .map(|json| writeln!(err, "wrote {} and {}", path.display(), json.display()))
            .and_then(|r| r.map_err(DslabError::from)),
        None => out.write_all(report.to_csv().as_bytes()).map_err(DslabError::from),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "dslab: {e}");
        return error_code(&e);
    }
    let _ = writeln!(err, "verdict: {}", report.verdict);
    report.verdict.exit_code()
}

/// Parses `args` (including the program name) and runs them.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                0
            }
        }
    }
}
