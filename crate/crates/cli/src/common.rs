use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use cfgraph::search::EdgeStats;
use cfgraph::{Classifier, LabeledDataset, SearchConfig, SearchMode};
use clap::{Args, ValueEnum};

use crate::error::CliError;
use crate::manifest::sha256_hex;
use crate::oracle_spec::{self, OracleSpec};

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    #[arg(long, value_name = "SPEC", long_help = oracle_spec::SPEC_HELP)]
    pub oracle: OracleSpec,
    /// Per-request deadline for external oracles, in seconds.
    #[arg(long, value_name = "SECS", env = "CFGRAPH_ORACLE_TIMEOUT_SECS", default_value_t = 30)]
    pub oracle_timeout: u64,
}

impl OracleArgs {
    pub fn build(&self, dataset: Option<&Arc<LabeledDataset>>, n_vertices: usize) -> Result<Arc<dyn Classifier>, CliError> {
        if let Some(d) = dataset {
            oracle_spec::check_linear(&self.oracle, d.universe())?;
        }
        self.oracle
            .build(dataset, n_vertices, Duration::from_secs(self.oracle_timeout.max(1)))
    }
}

#[derive(Args, Debug, Clone)]
pub struct BudgetArgs {
    /// Oracle calls per phase.
    #[arg(long, default_value_t = 2000)]
    pub eta: usize,
    /// Overrides --eta for the forward phase.
    #[arg(long)]
    pub eta1: Option<usize>,
    /// Overrides --eta for the backward phase.
    #[arg(long)]
    pub eta2: Option<usize>,
    /// Initial edits per step.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Floor for data-driven pick weights.
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    /// Base seed; drawn at random and printed to stderr when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Record per-iteration traces.
    #[arg(long)]
    pub trace: bool,
    /// Dataset supplying data-driven weights; defaults to --dataset.
    #[arg(long, value_name = "PATH")]
    pub reference: Option<PathBuf>,
}

impl BudgetArgs {
    pub fn config(&self, mode: SearchMode, seed: u64) -> SearchConfig {
        SearchConfig {
            eta_phase1: self.eta1.unwrap_or(self.eta),
            eta_phase2: self.eta2.unwrap_or(self.eta),
            k: self.k,
            epsilon: self.epsilon,
            seed,
            mode,
            trace: self.trace,
        }
    }

    pub fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| CliError::usage(format!("thread pool: {e}")))
    }

    /// Edge statistics for data-driven mode, `None` otherwise.
    pub fn edge_stats(&self, mode: SearchMode, dataset: Option<&LabeledDataset>) -> Result<Option<EdgeStats>, CliError> {
        if mode != SearchMode::DataDriven {
            return Ok(None);
        }
        match (&self.reference, dataset) {
            (Some(path), _) => Ok(Some(EdgeStats::from_dataset(&load_dataset(path)?.0))),
            (None, Some(d)) => Ok(Some(EdgeStats::from_dataset(d))),
            (None, None) => Err(CliError::usage("data-driven mode needs --dataset or --reference")),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkMode {
    Oblivious,
    DataDriven,
}

impl From<WalkMode> for SearchMode {
    fn from(m: WalkMode) -> Self {
        match m {
            WalkMode::Oblivious => SearchMode::Oblivious,
            WalkMode::DataDriven => SearchMode::DataDriven,
        }
    }
}

/// Loads a dataset and hashes the exact bytes read.
pub fn load_dataset(path: &Path) -> Result<(Arc<LabeledDataset>, String), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let dataset = LabeledDataset::from_json_slice(&bytes)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    Ok((Arc::new(dataset), sha256_hex(&bytes)))
}

pub fn find_graph<'a>(dataset: &'a LabeledDataset, id: &str) -> Result<&'a cfgraph::LabeledGraph, CliError> {
    dataset
        .get(id)
        .ok_or_else(|| CliError::data(format!("graph id {id:?} not found in dataset")))
}

pub fn parse_vertex_set(s: &str) -> Result<cfgraph::VertexSet, String> {
    cfgraph::VertexSet::parse(s).map_err(|e| e.to_string())
}
