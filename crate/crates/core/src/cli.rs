//! Command-line driver.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use thiserror::Error;

use crate::corpus::{load_corpus, CorpusError};
use crate::error::Error;
use crate::evidence::{precombine_specific, Evidence};
use crate::optimizer::{solve, solve_fixed, SolverOptions, IMPROVEMENT_TOLERANCE};
use crate::report::{Report, ReportOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Partition nonspecific evidence into events by minimizing metaconflict.
#[derive(Debug, Clone, Parser)]
#[command(name = "metaconflict", version)]
pub struct Args {
    /// Corpus file (TOML).
    pub input: PathBuf,

    /// Write the report here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,

    #[arg(short, long, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Include the step-by-step algorithm trace.
    #[arg(long)]
    pub trace: bool,

    /// Compare against exhaustive search (at most 10 evidences).
    #[arg(long)]
    pub oracle: bool,

    /// Optimize only this number of subsets.
    #[arg(long, value_name = "R")]
    pub subsets: Option<usize>,

    /// Margin by which a transfer quotient must beat the home quotient.
    #[arg(long, default_value_t = IMPROVEMENT_TOLERANCE)]
    pub tolerance: f64,

    /// Keep evidences specific to the same event apart instead of merging them.
    #[arg(long)]
    pub no_precombine: bool,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Solve(#[from] Error),
    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("tolerance must be a finite non-negative number, got {0}")]
    Tolerance(f64),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Solve(Error::Infeasible { .. })
            | RunError::Solve(Error::OracleTooLarge(_)) => 3,
            RunError::Output { .. } => 4,
            _ => 1,
        }
    }
}

fn merged_groups(before: &[Evidence], after: &[Evidence]) -> Vec<Vec<String>> {
    after
        .iter()
        .filter(|e| !before.iter().any(|b| b.id() == e.id()))
        .map(|e| e.id().split('+').map(str::to_string).collect())
        .collect()
}

/// Loads, solves and renders; returns the report text.
pub fn render(args: &Args) -> Result<String, RunError> {
    if !(args.tolerance.is_finite() && args.tolerance >= 0.0) {
        return Err(RunError::Tolerance(args.tolerance));
    }
    let corpus = load_corpus(&args.input)?;
    let (evidences, precombined) = if args.no_precombine {
        (corpus.evidences, Vec::new())
    } else {
        let merged = precombine_specific(&corpus.evidences)?;
        let groups = merged_groups(&corpus.evidences, &merged);
        (merged, groups)
    };
    let options = SolverOptions {
        improvement_tolerance: args.tolerance,
        ..SolverOptions::default()
    };
    let dist = &corpus.distribution;
    let solution = match args.subsets {
        Some(r) => solve_fixed(&evidences, dist, r, &options)?,
        None => solve(&evidences, dist, &options)?,
    };
    let report = Report::build(
        &evidences,
        dist,
        &solution,
        precombined,
        ReportOptions {
            trace: args.trace,
            oracle: args.oracle,
        },
    )?;
    Ok(match args.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
    })
}

/// Runs the command and writes the report to its destination.
pub fn run(args: &Args) -> Result<(), RunError> {
    let text = render(args)?;
    match &args.output {
        Some(path) => std::fs::write(path, text).map_err(|source| RunError::Output {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
