//! `cfgraph`: counterfactual search and explanations from the command line.
//!
//! Reports are JSON on stdout (or `--out`); logs and the drawn seed go to
//! stderr. Exit codes: 0 success, 2 usage, 3 data, 4 oracle, 5 search.

mod common;
mod data;
mod error;
mod explain;
mod manifest;
mod oracle_spec;
mod search;
mod whitebox;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "cfgraph", version, about = "Counterfactual search for black-box graph classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Threshold correlation matrices into a dataset or a graph document.
    Ingest(data::IngestCmd),
    /// Generate a planted contrast-subgraph dataset.
    GenSynthetic(data::GenCmd),
    /// Find counterfactual graphs.
    Search(search::SearchCmd),
    /// Measure search error against a linear contrast classifier.
    WhiteboxEval(whitebox::WhiteboxCmd),
    /// Edge ranking and contrastive text for one graph.
    ExplainLocal(explain::ExplainLocalCmd),
    /// Edge counters, ROI table and region heatmaps over a dataset.
    ExplainGlobal(explain::ExplainGlobalCmd),
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Ingest(c) => data::ingest(c),
        Command::GenSynthetic(c) => data::gen_synthetic(c),
        Command::Search(c) => search::search(c),
        Command::WhiteboxEval(c) => whitebox::whitebox_eval(c),
        Command::ExplainLocal(c) => explain::explain_local(c),
        Command::ExplainGlobal(c) => explain::explain_global(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.kind.exit_code())
        }
    }
}
