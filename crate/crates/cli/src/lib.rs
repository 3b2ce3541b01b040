//! Batch front end for the `nhdmp` toolkit.
//!
//! Three subcommands share one shape: build a process from a builtin or a
//! file, run a computation, write the table to `--output` (or stdout when no
//! output is given) and print verdicts as single lines on stdout.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nhdmp::{
    certificate_chain, check_we_pq, decay_table, divergence_verdict, gen_block_example,
    ladder_process, load_process, load_qsp, qsp_mixing_example, Measure, Notion, Process,
    QspProcess, ReferenceSpace, StateSet,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] nhdmp::Error),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output(_) | CliError::Csv(_) | CliError::Json(_) => {
                EXIT_USAGE
            }
            CliError::Core(e) => match e.kind() {
                nhdmp::ErrorKind::Usage | nhdmp::ErrorKind::Io => EXIT_USAGE,
                nhdmp::ErrorKind::Validation => EXIT_VALIDATION,
                nhdmp::ErrorKind::Numerical => EXIT_NUMERICAL,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "nhdmp",
    version,
    about = "Ergodicity diagnostics for nonhomogeneous Markov and quadratic stochastic processes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gap decay table for one ergodicity notion.
    Gaps(GapsArgs),
    /// Extract minorization certificates and report the product bound.
    Certify(CertifyArgs),
    /// Quadratic process gaps, marginal gaps and certified bound.
    Qsp(QspArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    /// 4-state block chain, parameter --p.
    Block,
    /// Truncated countable-state chain, parameters --size and --rate.
    Ladder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QspBuiltin {
    /// Two-state mixing process.
    Mixing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Source {
    /// Builtin process.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    pub builtin: Option<Builtin>,
    /// Process JSON file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 0.7)]
    pub p: f64,
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    /// Poisson rate of the reference measure for the ladder chain.
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
}

impl Source {
    pub fn load(&self) -> CliResult<Process<f64>> {
        Ok(match (&self.input, self.builtin) {
            (Some(path), _) => load_process(path)?,
            (None, Some(Builtin::Block)) => gen_block_example(self.p)?,
            (None, Some(Builtin::Ladder)) => ladder_process(self.size, self.rate)?,
            (None, None) => {
                return Err(CliError::Config(
                    "one of --builtin or --input is required".into(),
                ))
            }
        })
    }
}

#[derive(Debug, Args)]
pub struct GapsArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value = "l1_weak")]
    pub notion: String,
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    /// `a..b` (inclusive) or a comma list.
    #[arg(long)]
    pub horizons: String,
    /// Target measure for strong notions, comma separated weights.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub source: Source,
    /// Certificate start times, `a..b` inclusive. Defaults to 40 steps from
    /// the first available one.
    #[arg(long)]
    pub k_range: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub window: usize,
    /// Target raw mass for windowed extraction.
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Where to write the certificate bundle (JSON).
    #[arg(long)]
    pub certs: Option<PathBuf>,
    /// Where to write the bound table (CSV).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QspArgs {
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    pub builtin: Option<QspBuiltin>,
    /// QSP JSON file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Number of steps for builtins.
    #[arg(long, default_value_t = 40)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    #[arg(long)]
    pub horizons: String,
    /// States of the set `A_k` used at every step, comma separated.
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

/// Parses `a..b` (inclusive) or `a,b,c`; the result is nonempty and strictly increasing.
pub fn parse_horizons(raw: &str) -> CliResult<Vec<usize>> {
    let bad = || {
        CliError::Config(format!(
            "invalid horizons {raw:?}: expected a..b or a comma list"
        ))
    };
    let raw = raw.trim();
    let values: Vec<usize> = if let Some((a, b)) = raw.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        raw.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<CliResult<_>>()?
    };
    if values.is_empty() {
        return Err(CliError::Config(format!("horizons {raw:?} are empty")));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config(format!(
            "horizons {raw:?} must be strictly increasing"
        )));
    }
    Ok(values)
}

fn parse_list<V: FromStr>(raw: &str, what: &str) -> CliResult<Vec<V>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("invalid {what} entry {s:?}")))
        })
        .collect()
}

fn check_epsilon(epsilon: f64) -> CliResult<()> {
    if epsilon > 0.0 && epsilon < 2.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "epsilon must lie in (0, 2), got {epsilon}"
        )))
    }
}

fn emit(path: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn cmd_gaps(args: &GapsArgs, out: &mut dyn Write) -> CliResult<()> {
    let notion: Notion = args.notion.parse()?;
    let horizons = parse_horizons(&args.horizons)?;
    let process = args.source.load()?;
    let target = match &args.target {
        Some(raw) => Some(Measure::new(parse_list(raw, "target")?)?),
        None => None,
    };
    let report = decay_table(&process, args.k, &horizons, notion, target.as_ref())?;
    let text = match args.format {
        Format::Csv => report.to_csv()?,
        Format::Json => report.to_json()? + "\n",
    };
    emit(&args.output, &text, out)
}

pub fn cmd_certify(args: &CertifyArgs, out: &mut dyn Write) -> CliResult<()> {
    check_epsilon(args.epsilon)?;
    if args.window == 0 {
        return Err(CliError::Config("window must be at least 1".into()));
    }
    let process = args.source.load()?;
    let (k_start, k_end) = match &args.k_range {
        Some(raw) => match parse_horizons(raw)?.as_slice() {
            [only] => (*only, *only),
            [first, .., last] => (*first, *last),
            [] => unreachable!("parse_horizons rejects empty ranges"),
        },
        None => (process.first_step(), process.first_step() + 39),
    };
    let certs = certificate_chain(&process, k_start, k_end, args.window, args.tau)?;
    let report = divergence_verdict(&certs, args.epsilon)?;
    if let Some(path) = &args.certs {
        fs::write(path, serde_json::to_string_pretty(&certs)? + "\n")?;
    }
    if let Some(path) = &args.output {
        fs::write(path, report.bound.to_csv()?)?;
    }
    writeln!(out, "{}", report.verdict)?;
    Ok(())
}

#[derive(Serialize)]
struct QspRow {
    k: usize,
    n: usize,
    qsp_gap: f64,
    marginal_gap: f64,
    bound: Option<f64>,
}

fn load_qsp_source(args: &QspArgs) -> CliResult<QspProcess<f64>> {
    Ok(match (&args.input, args.builtin) {
        (Some(path), _) => load_qsp(path)?,
        (None, Some(QspBuiltin::Mixing)) => qsp_mixing_example(args.steps)?,
        (None, None) => {
            return Err(CliError::Config(
                "one of --builtin or --input is required".into(),
            ))
        }
    })
}

// singleton with the largest guaranteed one-step mass at step 0
fn default_set(q: &QspProcess<f64>) -> CliResult<StateSet> {
    let n = q.n_states();
    let r: &ReferenceSpace<f64> = q.reference();
    let tensor = &q.step(0)?.tensor;
    let mut best = (f64::NEG_INFINITY, 0);
    for j in r.support() {
        let mut alpha = f64::INFINITY;
        for x in r.support() {
            for y in r.support() {
                alpha = alpha.min(tensor.get(x, y, j));
            }
        }
        if alpha > best.0 {
            best = (alpha, j);
        }
    }
    Ok(StateSet::from_indices(n, &[best.1])?)
}

pub fn cmd_qsp(args: &QspArgs, out: &mut dyn Write) -> CliResult<()> {
    check_epsilon(args.epsilon)?;
    let horizons = parse_horizons(&args.horizons)?;
    if horizons[0] <= args.k {
        return Err(nhdmp::Error::InvalidTimeRange {
            k: args.k,
            n: horizons[0],
        }
        .into());
    }
    let q = load_qsp_source(args)?;
    let n_max = *horizons.last().expect("nonempty");
    let set = match &args.set {
        Some(raw) => StateSet::from_indices(q.n_states(), &parse_list::<usize>(raw, "set")?)?,
        None => default_set(&q)?,
    };
    let report = check_we_pq(&q, &vec![set; n_max], n_max, args.epsilon)?;
    let mut rows = Vec::with_capacity(horizons.len());
    for &n in &horizons {
        let gap = q.l1_weak_gap(args.k, n)?;
        rows.push(QspRow {
            k: args.k,
            n,
            qsp_gap: gap.qsp_gap,
            marginal_gap: gap.marginal_gap,
            bound: (args.k == 0).then(|| report.divergence.bound.trajectory[n - 1]),
        });
    }
    let text = match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &rows {
                w.serialize(row)?;
            }
            String::from_utf8(
                w.into_inner()
                    .map_err(|e| CliError::Output(e.into_error()))?,
            )
            .expect("csv output is utf-8")
        }
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
    };
    emit(&args.output, &text, out)?;
    writeln!(out, "{}", report.divergence.verdict)?;
    Ok(())
}

/// Parses `argv`, installs the tolerance override and runs the command.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    if let Err(msg) = nhdmp::tolerance_from_env() {
        let _ = writeln!(err, "error: {msg}");
        return EXIT_USAGE;
    }
    let result = match &cli.command {
        Command::Gaps(a) => cmd_gaps(a, out),
        Command::Certify(a) => cmd_certify(a, out),
        Command::Qsp(a) => cmd_qsp(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
