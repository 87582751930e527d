//! The `shasmc` command line.
//!
//! Exit codes: 0 success, 1 a hypothesis or comparison was rejected,
//! 2 usage or parse error, 3 runtime error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, OnceLock};

use clap::{Args, Parser, Subcommand};

use crate::dsl::{query_lines, Model};
use crate::engine::{Run, SimConfig};
use crate::output::{write_histogram_csv, write_json, write_run_csv, OutputError};
use crate::query::BoundQuery;
use crate::smc::{execute, Payload, QueryOutput, SmcConfig, SmcError, StatResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "shasmc", version, about = "Statistical model checker for stochastic hybrid automata")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Record runs of `simulate` queries as CSV traces.
    Simulate(RunArgs),
    /// Answer probability, hypothesis, comparison, value and distance queries.
    Check(RunArgs),
    /// Parse a model (and queries) and check that it composes.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Model file.
    pub model: PathBuf,
    /// Query to type-check against the model; may be repeated.
    #[arg(short, long)]
    pub query: Vec<String>,
    /// File with one query per line.
    #[arg(short = 'f', long)]
    pub query_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Model file.
    pub model: PathBuf,
    /// Query; may be repeated.
    #[arg(short, long)]
    pub query: Vec<String>,
    /// File with one query per line; `//` starts a comment.
    #[arg(short = 'f', long)]
    pub query_file: Option<PathBuf>,
    /// Integrator time step.
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, env = "SHASMC_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Half-width of probability intervals.
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    /// Confidence parameter; also bounds both error kinds of tests.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Half-width of the indifference region of tests.
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    /// Cap on runs of sequential tests.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_runs: u64,
    /// Transitions allowed without time advancing before a run is aborted.
    #[arg(long, default_value_t = 10_000)]
    pub zeno_cap: u64,
    /// Histogram bucket width; a twentieth of the range by default.
    #[arg(long)]
    pub hist_width: Option<f64>,
    /// Write natural-log densities in histogram files.
    #[arg(long)]
    pub log_density: bool,
    /// Output directory.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<SmcError> for Failure {
    fn from(e: SmcError) -> Self {
        match e {
            SmcError::Params(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<OutputError> for Failure {
    fn from(e: OutputError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let res = match cli.command {
        Command::Validate(a) => validate(&a),
        Command::Simulate(a) => run_queries(&a, true),
        Command::Check(a) => run_queries(&a, false),
    };
    match res {
        Ok(code) => code,
        Err(f) => {
            match &f {
                Failure::Usage(m) | Failure::Runtime(m) => eprintln!("error: {m}"),
            }
            f.code()
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<Model, Failure> {
    let text = read(path)?;
    Model::parse(&text).map_err(|e| {
        let sep = if e.pos().is_some_and(|p| p.line > 0) { ":" } else { ": " };
        Failure::Usage(format!("{}{sep}{e}", path.display()))
    })
}

/// Queries from `-q` flags, then from the query file, with labels for
/// error messages.
fn collect_queries(inline: &[String], file: Option<&Path>) -> Result<Vec<(String, String)>, Failure> {
    let mut out: Vec<(String, String)> = inline
        .iter()
        .enumerate()
        .map(|(i, q)| (format!("query {}", i + 1), q.clone()))
        .collect();
    if let Some(path) = file {
        let text = read(path)?;
        for (line, q) in query_lines(&text) {
            out.push((format!("{}:{line}", path.display()), q.to_string()));
        }
    }
    Ok(out)
}

fn bind(model: &Model, label: &str, text: &str) -> Result<BoundQuery, Failure> {
    model
        .query(text)
        .map_err(|e| Failure::Usage(format!("{label}: {e}")))
}

fn validate(a: &ValidateArgs) -> Result<i32, Failure> {
    let model = load_model(&a.model)?;
    for (label, q) in collect_queries(&a.query, a.query_file.as_deref())? {
        bind(&model, &label, &q)?;
    }
    let n = &model.network;
    println!(
        "{}: ok ({} components, {} variables, {} channels)",
        a.model.display(),
        n.components.len(),
        n.decls.vars.len(),
        n.decls.channels.len()
    );
    Ok(EXIT_OK)
}

fn cancel_flag() -> Arc<AtomicBool> {
    static FLAG: OnceLock<Arc<AtomicBool>> = OnceLock::new();
    let flag = FLAG.get_or_init(|| {
        let flag = Arc::new(AtomicBool::new(false));
        let f = flag.clone();
        // Another handler may already be installed by an embedding program.
        let _ = ctrlc::set_handler(move || f.store(true, Ordering::Relaxed));
        flag
    });
    flag.store(false, Ordering::Relaxed);
    flag.clone()
}

fn config(a: &RunArgs) -> Result<SmcConfig, Failure> {
    if !(a.dt > 0.0 && a.dt.is_finite()) {
        return Err(Failure::Usage(format!("--dt must be positive, got {}", a.dt)));
    }
    let cfg = SmcConfig {
        sim: SimConfig {
            dt: a.dt,
            zeno_cap: a.zeno_cap,
            ..SimConfig::default()
        },
        seed: a.seed,
        workers: a.workers,
        eps: a.eps,
        alpha: a.alpha,
        beta: a.alpha,
        delta: a.delta,
        max_runs: a.max_runs,
        hist_width: a.hist_width,
        cancel: Some(cancel_flag()),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn run_queries(a: &RunArgs, simulate_only: bool) -> Result<i32, Failure> {
    let model = load_model(&a.model)?;
    let queries = collect_queries(&a.query, a.query_file.as_deref())?;
    if queries.is_empty() {
        return Err(Failure::Usage("no query given (use -q or --query-file)".into()));
    }
    let bound = queries
        .iter()
        .map(|(label, q)| bind(&model, label, q))
        .collect::<Result<Vec<_>, _>>()?;
    if simulate_only {
        for ((label, _), q) in queries.iter().zip(&bound) {
            if !matches!(q, BoundQuery::Simulate { .. }) {
                return Err(Failure::Usage(format!("{label}: not a `simulate` query; use `check`")));
            }
        }
    }
    let cfg = config(a)?;
    let many = queries.len() > 1;
    let mut code = EXIT_OK;
    for (k, ((_, text), q)) in queries.iter().zip(&bound).enumerate() {
        let prefix = if many { format!("q{k}_") } else { String::new() };
        match execute(&model.network, q, &cfg)? {
            QueryOutput::Runs { runs, complete } => {
                report_runs(&runs, a.out.as_deref(), &prefix)?;
                if !complete {
                    println!("{text}: incomplete");
                }
            }
            QueryOutput::Stat(mut r) => {
                r.query = text.clone();
                println!("{text}: {r}");
                eprintln!("wall time {:.3}s", r.wall_time);
                if let Some(dir) = &a.out {
                    write_stat(&r, dir, &format!("{prefix}result"), a.log_density)?;
                }
                if r.rejected() {
                    code = EXIT_REJECT;
                }
            }
        }
        if cfg.cancel.as_ref().is_some_and(|c| c.load(Ordering::Relaxed)) {
            break;
        }
    }
    Ok(code)
}

fn report_runs(runs: &[Run], out: Option<&Path>, prefix: &str) -> Result<(), Failure> {
    for (i, r) in runs.iter().enumerate() {
        let end = r.times.last().copied().unwrap_or(0.0);
        let mut line = format!(
            "run {i}: samples={} events={} end={end} termination={:?}",
            r.times.len(),
            r.events.len(),
            r.termination
        );
        if let Some(dir) = out {
            let path = dir.join(format!("{prefix}run{i}.csv"));
            write_run_csv(r, &path)?;
            line.push_str(&format!(" -> {}", path.display()));
        }
        println!("{line}");
    }
    Ok(())
}

fn write_stat(r: &StatResult, dir: &Path, stem: &str, log_density: bool) -> Result<(), Failure> {
    write_json(r, &dir.join(format!("{stem}.result.json")))?;
    let h = match &r.payload {
        Payload::Value { histogram, .. } => Some(histogram),
        Payload::Distance { histogram, .. } => histogram.as_ref(),
        _ => None,
    };
    if let Some(h) = h {
        write_histogram_csv(h, &dir.join(format!("{stem}.hist.csv")), log_density)?;
    }
    Ok(())
}
