//! `tabeval` command-line tool: unroll tables, evaluate predictions against
//! references, correlate reports with human ratings.

pub mod config;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use tabeval::analysis::{correlate_report, CorrelationTable, RatingAggregation, RatingRecord};
use tabeval::io::{
    parse_jsonl, parse_jsonl_with, read_text, to_jsonl, write_atomic, DatasetRecord,
    PredictionRecord,
};
use tabeval::metrics::{evaluate_corpus, unroll_checked, MacroScores, MetricReport};
use tabeval::table::Table;
use tabeval::unroll::Statement;
use thiserror::Error;

pub use config::{RunConfig, RunFlags};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}

/// How a command finished when it did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Some records failed; details went to stderr or the report.
    Partial,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Success => 0,
            Self::Partial => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "tabeval",
    version,
    about = "Semantic evaluation of generated tables"
)]
pub struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn reference tables into atomic statements.
    Unroll(UnrollArgs),
    /// Score predicted tables against references.
    Evaluate(EvaluateArgs),
    /// Correlate a report with human ratings.
    Correlate(CorrelateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct UnrollArgs {
    /// Dataset JSONL ({id, text, intent, table}).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub run: RunFlags,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Reference dataset JSONL.
    #[arg(long)]
    pub refs: PathBuf,
    /// Prediction JSONL ({id, model_id, table}).
    #[arg(long)]
    pub preds: PathBuf,
    /// Report JSON destination.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub run: RunFlags,
}

#[derive(Debug, Clone, Args)]
pub struct CorrelateArgs {
    /// Report written by `evaluate`.
    #[arg(long)]
    pub report: PathBuf,
    /// Ratings JSONL ({table_id, model_id, rater_id, overall, correctness, completeness}).
    #[arg(long)]
    pub ratings: PathBuf,
    /// Correlation JSON destination.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Unroll(a) => cmd_unroll(&a),
        Command::Evaluate(a) => {
            let (outcome, report) = cmd_evaluate(&a)?;
            print_summary(&report);
            Ok(outcome)
        }
        Command::Correlate(a) => {
            let (outcome, table) = cmd_correlate(&a)?;
            print!("{table}");
            println!("{}", correlation_json(&table)?);
            Ok(outcome)
        }
    }
}

fn read_records<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = read_text(path).map_err(|e| CliError::Io(e.to_string()))?;
    parse_jsonl(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_out(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic(path, bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn pool(n: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))
}

#[derive(Debug, Serialize)]
struct UnrolledRecord<'a> {
    id: &'a str,
    statements: Vec<Statement>,
}

pub fn cmd_unroll(args: &UnrollArgs) -> Result<Outcome, CliError> {
    let cfg = args.run.resolve()?;
    let records: Vec<DatasetRecord> = read_records(&args.input)?;
    let unroller = cfg.build_unroller()?;
    let results: Vec<Result<Vec<Statement>, String>> = pool(cfg.parallelism)?.install(|| {
        records
            .par_iter()
            .map(|rec| {
                let table =
                    Table::parse_auto(&rec.table, &rec.intent).map_err(|e| e.to_string())?;
                unroll_checked(&table, unroller.as_ref(), cfg.attribution())
                    .map(|s| s.statements)
                    .map_err(|e| e.to_string())
            })
            .collect()
    });

    let mut out = Vec::new();
    let mut failed = 0;
    for (rec, res) in records.iter().zip(results) {
        match res {
            Ok(statements) => out.push(UnrolledRecord {
                id: &rec.id,
                statements,
            }),
            Err(e) => {
                failed += 1;
                eprintln!("error: {}: {e}", rec.id);
            }
        }
    }
    write_out(
        &args.out,
        to_jsonl(&out)
            .map_err(|e| CliError::Io(e.to_string()))?
            .as_bytes(),
    )?;
    log::info!("unrolled {} of {} records", out.len(), records.len());
    Ok(if failed == 0 {
        Outcome::Success
    } else {
        Outcome::Partial
    })
}

/// One line per metric: `<scope>  <metric>  P=.. R=.. F1=..`.
pub fn summary_lines(scope: &str, m: &MacroScores) -> Vec<String> {
    let line = |name: &str, p: f64, r: f64, f: f64| {
        format!(
            "{scope:<12} {name:<10} P={p:.4} R={r:.4} F1={f:.4} (n={})",
            m.n_tables
        )
    };
    let mut lines = vec![line(
        "tabeval",
        m.tabeval.precision,
        m.tabeval.recall,
        m.tabeval.f1,
    )];
    for (metric, s) in &m.baselines {
        lines.push(line(metric.as_str(), s.precision, s.recall, s.f1));
    }
    lines
}

/// Macro summary lines on stdout; per-model lines only for multi-model runs.
pub fn print_summary(report: &MetricReport) {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    if report.models.len() > 1 {
        for m in &report.models {
            for l in summary_lines(&m.model_id, &m.macro_scores) {
                let _ = writeln!(lock, "{l}");
            }
        }
    }
    for l in summary_lines("all", &report.overall) {
        let _ = writeln!(lock, "{l}");
    }
}

/// Writes the report to `--out` and returns it. Printing is left to the caller.
pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<(Outcome, MetricReport), CliError> {
    let cfg = args.run.resolve()?;
    let refs: Vec<DatasetRecord> = read_records(&args.refs)?;
    let preds: Vec<PredictionRecord> = read_records(&args.preds)?;
    let corpus = cfg.corpus_config()?;
    let report =
        evaluate_corpus(&refs, &preds, &corpus).map_err(|e| CliError::Config(e.to_string()))?;
    write_out(
        &args.out,
        report
            .to_json()
            .map_err(|e| CliError::Io(e.to_string()))?
            .as_bytes(),
    )?;

    for w in &report.warnings {
        log::warn!("{w}");
    }
    for e in report.entries.iter().filter(|e| e.error.is_some()) {
        eprintln!(
            "error: {}/{}: {}",
            e.model_id,
            e.table_id,
            e.error.as_deref().unwrap_or("")
        );
    }
    let outcome = if report.has_failures() {
        Outcome::Partial
    } else {
        Outcome::Success
    };
    Ok((outcome, report))
}

pub fn read_ratings(path: &Path) -> Result<Vec<RatingRecord>, CliError> {
    let text = read_text(path).map_err(|e| CliError::Io(e.to_string()))?;
    parse_jsonl_with(&text, RatingRecord::validate)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn cmd_correlate(args: &CorrelateArgs) -> Result<(Outcome, CorrelationTable), CliError> {
    let text = read_text(&args.report).map_err(|e| CliError::Io(e.to_string()))?;
    let report: MetricReport = serde_json::from_str(&text)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.report.display())))?;
    let ratings = read_ratings(&args.ratings)?;
    let table = correlate_report(&report, &ratings, RatingAggregation::MeanOverRaters)
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_out(&args.out, correlation_json(&table)?.as_bytes())?;
    Ok((Outcome::Success, table))
}

fn correlation_json(table: &CorrelationTable) -> Result<String, CliError> {
    serde_json::to_string_pretty(table)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Io(e.to_string()))
}
