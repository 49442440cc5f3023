//! Command-line surface: argument types, output envelopes and file formats.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 solver infeasibility.
//!
//! Traces are CSV by default. The envelope goes first as `#` comment lines,
//! then the header `u,t,k,p1,p2,component_count,c1..cK`. Summaries,
//! predictions and staircases are JSON envelopes. CSV floats carry at most
//! ten significant digits; JSON floats are written exactly.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Engine, EngineConfig, GENERATOR_IDENTITY};
use crate::ensemble::{
    compare_rows, run_ensemble, staircase_from_summary, ComparisonRow, EnsembleConfig, EnsembleSummary,
    ObservedRow, StaircasePoint, DEFAULT_P2_TOLERANCE,
};
use crate::error::BfwError;
use crate::observables::TraceRecord;
use crate::theory::{alpha_upper, predict_with_m, predict_m, TheoryOptions, TheoryPrediction, XEvaluation};

pub const SCHEMA_VERSION: &str = "bfw-output/1";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("i/o failure: {0}")]
    Io(String),
    #[error("size recursion infeasible at level m = {level}")]
    Infeasible { level: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Infeasible { .. } => 4,
        }
    }
}

impl From<BfwError> for CliError {
    fn from(e: BfwError) -> Self {
        match e {
            BfwError::Infeasible { level, .. } => CliError::Infeasible { level },
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Usage(format!("malformed input: {e}"))
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bfw", version, about = "BFW(alpha) explosive percolation: simulation and steady-state theory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one instance and write its trace.
    Simulate(SimulateArgs),
    /// Solve the steady-state theory for one or more alphas.
    Theory(TheoryArgs),
    /// Run independent instances per alpha and summarize the steady states.
    Ensemble(EnsembleArgs),
    /// Modal giant count per alpha.
    Staircase(EnsembleArgs),
    /// Table of simulated against theoretical values.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 100_000)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub sample_every: u64,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    /// Accepted-edge budget; defaults to 2n.
    #[arg(long)]
    pub max_accepted: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    /// One or more alphas, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    /// Force the giant count instead of deriving it from alpha.
    #[arg(long)]
    pub m: Option<usize>,
    /// Use the measured 0.52 as the two-giant upper bound.
    #[arg(long)]
    pub empirical_alpha2: bool,
    /// Solve x at the given alpha on every level rather than at each level's
    /// interval bound.
    #[arg(long)]
    pub x_at_alpha: bool,
    #[arg(long, default_value_t = crate::theory::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub alphas: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
    #[arg(long, default_value_t = 100_000)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0)]
    pub base_seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub sample_every: u64,
    /// Steady-state window in sampled edges; defaults to n/10.
    #[arg(long)]
    pub window: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_P2_TOLERANCE)]
    pub p2_tolerance: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Ensemble summary, or a theory file to compare theory with itself.
    #[arg(long)]
    pub summary: PathBuf,
    /// Theory predictions; computed from the summary's alphas when absent.
    #[arg(long)]
    pub theory: Option<PathBuf>,
    #[arg(long)]
    pub empirical_alpha2: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Self-describing wrapper around every emitted payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEnvelope<T> {
    pub schema_version: String,
    pub kind: String,
    pub generator_identity: String,
    pub seeds: Vec<u64>,
    pub config: serde_json::Value,
    pub payload: T,
}

impl<T> OutputEnvelope<T> {
    pub fn new(kind: &str, seeds: Vec<u64>, config: serde_json::Value, payload: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            kind: kind.to_string(),
            generator_identity: GENERATOR_IDENTITY.to_string(),
            seeds,
            config,
            payload,
        }
    }
}

/// Envelope fields written as `#` lines above a CSV body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvHeader {
    pub schema_version: String,
    pub kind: String,
    pub generator_identity: String,
    pub seeds: Vec<u64>,
    pub config: serde_json::Value,
}

/// At most ten significant digits, shortest decimal form.
pub fn format_sig10(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.9e}").parse().expect("formatted float parses");
    rounded.to_string()
}

fn writer_for(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut w = writer_for(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let file = File::open(path)?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

fn trace_columns(top_k: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["u", "t", "k", "p1", "p2", "component_count"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend((1..=top_k).map(|i| format!("c{i}")));
    cols
}

/// Writes the `#` envelope lines, the header row and one row per record.
pub fn write_trace_csv<W: Write>(
    mut w: W,
    header: &CsvHeader,
    records: &[TraceRecord],
    top_k: usize,
) -> Result<(), CliError> {
    writeln!(w, "# schema_version: {}", header.schema_version)?;
    writeln!(w, "# kind: {}", header.kind)?;
    writeln!(w, "# generator_identity: {}", header.generator_identity)?;
    writeln!(w, "# seeds: {}", serde_json::to_string(&header.seeds)?)?;
    writeln!(w, "# config: {}", serde_json::to_string(&header.config)?)?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(trace_columns(top_k))?;
    for r in records {
        let mut row = vec![
            r.u.to_string(),
            r.t.to_string(),
            r.k.to_string(),
            format_sig10(r.p1),
            format_sig10(r.p2),
            r.component_count.to_string(),
        ];
        row.extend((0..top_k).map(|i| r.top_sizes.get(i).map(|&c| format_sig10(c)).unwrap_or_default()));
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}

/// Parses a CSV trace written by [`write_trace_csv`].
pub fn read_trace_csv<R: io::Read>(r: R) -> Result<(CsvHeader, Vec<TraceRecord>), CliError> {
    let mut reader = BufReader::new(r);
    let mut fields = std::collections::HashMap::new();
    let mut body = String::new();
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        match line.strip_prefix("# ") {
            Some(meta) => {
                if let Some((key, value)) = meta.trim_end().split_once(": ") {
                    fields.insert(key.to_string(), value.to_string());
                }
            }
            None => {
                body.push_str(&line);
                break;
            }
        }
    }
    io::Read::read_to_string(&mut reader, &mut body)?;
    let take = |key: &str| {
        fields
            .get(key)
            .cloned()
            .ok_or_else(|| CliError::Usage(format!("trace header lacks `{key}`")))
    };
    let header = CsvHeader {
        schema_version: take("schema_version")?,
        kind: take("kind")?,
        generator_identity: take("generator_identity")?,
        seeds: serde_json::from_str(&take("seeds")?)?,
        config: serde_json::from_str(&take("config")?)?,
    };
    let bad = |what: &str| CliError::Usage(format!("malformed trace field `{what}`"));
    let mut csv = csv::Reader::from_reader(body.as_bytes());
    let mut records = Vec::new();
    for row in csv.records() {
        let row = row?;
        let get = |i: usize| row.get(i).ok_or_else(|| bad("missing column"));
        let int = |i: usize, name: &str| get(i)?.parse::<u64>().map_err(|_| bad(name));
        let real = |i: usize, name: &str| get(i)?.parse::<f64>().map_err(|_| bad(name));
        let top_sizes = (6..row.len())
            .map(|i| row.get(i).unwrap())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| bad("c")))
            .collect::<Result<Vec<_>, _>>()?;
        records.push(TraceRecord {
            u: int(0, "u")?,
            t: int(1, "t")?,
            k: int(2, "k")?,
            p1: real(3, "p1")?,
            p2: real(4, "p2")?,
            component_count: int(5, "component_count")? as usize,
            top_sizes,
        });
    }
    Ok((header, records))
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mut config = EngineConfig::new(args.alpha, args.nodes, args.seed)
        .with_sample_every(args.sample_every)
        .with_top_k(args.top_k);
    if let Some(max) = args.max_accepted {
        config = config.with_max_accepted(max);
    }
    config.validate()?;
    let config_json = serde_json::to_value(&config)?;
    let out = Engine::run(config)?;
    match args.format {
        Format::Csv => {
            let header = CsvHeader {
                schema_version: SCHEMA_VERSION.to_string(),
                kind: "trace".to_string(),
                generator_identity: GENERATOR_IDENTITY.to_string(),
                seeds: vec![args.seed],
                config: config_json,
            };
            let mut w = writer_for(args.out.as_deref())?;
            write_trace_csv(&mut w, &header, &out.trace, args.top_k)?;
            w.flush()?;
        }
        Format::Json => {
            let env = OutputEnvelope::new("trace", vec![args.seed], config_json, out.trace);
            write_json(args.out.as_deref(), &env)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TheoryConfigEcho {
    alphas: Vec<f64>,
    m: Option<usize>,
    options: TheoryOptions,
}

pub fn cmd_theory(args: &TheoryArgs) -> Result<(), CliError> {
    let opts = TheoryOptions {
        empirical_alpha2: args.empirical_alpha2,
        x_evaluation: if args.x_at_alpha {
            XEvaluation::SuppliedAlpha
        } else {
            XEvaluation::IntervalUpper
        },
        tol: args.tol,
    };
    if args.tol.is_nan() || args.tol <= 0.0 {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", args.tol)));
    }
    let alphas = match (args.alpha.is_empty(), args.m) {
        (false, _) => args.alpha.clone(),
        (true, Some(m)) if m >= 1 => vec![alpha_upper(m, opts.empirical_alpha2)],
        (true, Some(_)) => return Err(CliError::Usage("--m must be at least 1".into())),
        (true, None) => return Err(CliError::Usage("give --alpha or --m".into())),
    };
    let predictions = alphas
        .iter()
        .map(|&a| {
            let m = match args.m {
                Some(m) => m,
                None => predict_m(a)?,
            };
            predict_with_m(m, a, &opts)
        })
        .collect::<Result<Vec<TheoryPrediction>, BfwError>>()?;
    let echo = TheoryConfigEcho {
        alphas,
        m: args.m,
        options: opts,
    };
    let infeasible = predictions.iter().find_map(|p| p.infeasible_level);
    let env = OutputEnvelope::new("prediction", Vec::new(), serde_json::to_value(&echo)?, predictions);
    write_json(args.out.as_deref(), &env)?;
    match infeasible {
        Some(level) => Err(CliError::Infeasible { level }),
        None => Ok(()),
    }
}

fn ensemble_config(args: &EnsembleArgs) -> Result<EnsembleConfig, CliError> {
    let mut config = EnsembleConfig::new(args.alphas.clone(), args.nodes, args.instances, args.base_seed);
    config.sample_every = args.sample_every;
    config.window = args.window;
    config.p2_tolerance = args.p2_tolerance;
    config.validate()?;
    EngineConfig::new(config.alphas[0], args.nodes, 0)
        .with_sample_every(args.sample_every)
        .validate()?;
    Ok(config)
}

fn all_seeds(summary: &EnsembleSummary) -> Vec<u64> {
    summary.per_alpha.iter().flat_map(|a| a.seeds.iter().copied()).collect()
}

pub fn cmd_ensemble(args: &EnsembleArgs) -> Result<(), CliError> {
    let config = ensemble_config(args)?;
    let summary = run_ensemble(&config)?;
    let env = OutputEnvelope::new(
        "summary",
        all_seeds(&summary),
        serde_json::to_value(&config)?,
        summary,
    );
    write_json(args.out.as_deref(), &env)
}

pub fn cmd_staircase(args: &EnsembleArgs) -> Result<(), CliError> {
    let config = ensemble_config(args)?;
    let summary = run_ensemble(&config)?;
    let points: Vec<StaircasePoint> = staircase_from_summary(&summary)?;
    let env = OutputEnvelope::new(
        "staircase",
        all_seeds(&summary),
        serde_json::to_value(&config)?,
        points,
    );
    write_json(args.out.as_deref(), &env)
}

/// Reads either an ensemble summary or a prediction list as observed rows.
fn observed_rows(path: &Path) -> Result<Vec<ObservedRow>, CliError> {
    let value: OutputEnvelope<serde_json::Value> = read_json(path)?;
    match value.kind.as_str() {
        "summary" => {
            let s: EnsembleSummary = serde_json::from_value(value.payload)?;
            Ok(s.per_alpha.iter().map(ObservedRow::from_summary).collect())
        }
        "prediction" => {
            let p: Vec<TheoryPrediction> = serde_json::from_value(value.payload)?;
            Ok(p.iter().map(ObservedRow::from_prediction).collect())
        }
        other => Err(CliError::Usage(format!("cannot compare a `{other}` file"))),
    }
}

pub fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let observed = observed_rows(&args.summary)?;
    let predictions: Vec<TheoryPrediction> = match &args.theory {
        Some(path) => {
            let env: OutputEnvelope<Vec<TheoryPrediction>> = read_json(path)?;
            if env.kind != "prediction" {
                return Err(CliError::Usage(format!("{} is not a theory file", path.display())));
            }
            env.payload
        }
        None => {
            let opts = TheoryOptions {
                empirical_alpha2: args.empirical_alpha2,
                ..Default::default()
            };
            observed
                .iter()
                .map(|o| predict_with_m(predict_m(o.alpha)?, o.alpha, &opts))
                .collect::<Result<_, BfwError>>()?
        }
    };
    let rows = compare_rows(&observed, &predictions)?;
    let mut w = writer_for(args.out.as_deref())?;
    write_comparison_csv(&mut w, &rows)?;
    w.flush()?;
    Ok(())
}

/// Table laid out with one column per α and one row per quantity.
pub fn write_comparison_csv<W: Write>(w: W, rows: &[ComparisonRow]) -> Result<(), CliError> {
    let mut csv = csv::Writer::from_writer(w);
    let mut head = vec!["quantity".to_string()];
    head.extend(rows.iter().map(|r| format!("alpha={}", format_sig10(r.alpha))));
    csv.write_record(&head)?;
    let opt = |v: Option<f64>| v.map(format_sig10).unwrap_or_default();
    let mut emit = |name: String, cells: Vec<String>| -> Result<(), CliError> {
        let mut rec = vec![name];
        rec.extend(cells);
        csv.write_record(&rec)?;
        Ok(())
    };
    emit(
        "m".into(),
        rows.iter().map(|r| r.observed_m.map(|m| m.to_string()).unwrap_or_default()).collect(),
    )?;
    emit("m_theory".into(), rows.iter().map(|r| r.theory_m.to_string()).collect())?;
    let ranks = rows.iter().map(|r| r.observed_fractions.len()).max().unwrap_or(0);
    for i in 0..ranks {
        emit(
            format!("C{}", i + 1),
            rows.iter().map(|r| opt(r.observed_fractions.get(i).copied())).collect(),
        )?;
        emit(
            format!("C{}_theory", i + 1),
            rows.iter().map(|r| opt(r.fractions.get(i).map(|e| e.theory))).collect(),
        )?;
    }
    emit("sum_sq".into(), rows.iter().map(|r| opt(r.sum_sq.map(|e| e.observed))).collect())?;
    emit("sum_sq_theory".into(), rows.iter().map(|r| opt(r.sum_sq.map(|e| e.theory))).collect())?;
    emit("sum_sq_abs_error".into(), rows.iter().map(|r| opt(r.sum_sq.map(|e| e.abs_error))).collect())?;
    emit("sum_sq_rel_error".into(), rows.iter().map(|r| opt(r.sum_sq.map(|e| e.rel_error))).collect())?;
    emit("x".into(), rows.iter().map(|r| opt(r.x.map(|e| e.observed))).collect())?;
    emit("x_theory".into(), rows.iter().map(|r| opt(r.x.map(|e| e.theory))).collect())?;
    emit("x_abs_error".into(), rows.iter().map(|r| opt(r.x.map(|e| e.abs_error))).collect())?;
    emit("x_rel_error".into(), rows.iter().map(|r| opt(r.x.map(|e| e.rel_error))).collect())?;
    csv.flush()?;
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Theory(a) => cmd_theory(a),
        Command::Ensemble(a) => cmd_ensemble(a),
        Command::Staircase(a) => cmd_staircase(a),
        Command::Compare(a) => cmd_compare(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => match execute(&cli) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("bfw: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                2
            } else {
                0
            }
        }
    }
}
