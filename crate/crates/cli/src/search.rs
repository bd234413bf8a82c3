//! `search`: counterfactuals for dataset graphs or a single graph document.

use std::path::PathBuf;
use std::sync::Arc;

use cfgraph::dataset::GraphDocument;
use cfgraph::search::{run_dataset_search, run_pipeline, EdgeStats, RunSummary, ScanOrder};
use cfgraph::stats::PercentileSummary;
use cfgraph::{Classifier, CounterfactualResult, Graph, OracleSession, SearchConfig, SearchMode, SearchStatus, VertexUniverse};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::common::{find_graph, load_dataset, BudgetArgs, OracleArgs};
use crate::error::{CliError, ErrorKind};
use crate::manifest::{emit_json, resolve_seed, RunManifest};

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Oblivious,
    DataDriven,
    /// Nearest oracle-confirmed opposite-class dataset graph.
    Dataset,
}

#[derive(Args, Debug)]
pub struct SearchCmd {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Graph document (`{"n_vertices", "edges"}`) searched instead of dataset graphs.
    #[arg(long, conflicts_with = "graph_id")]
    pub graph: Option<PathBuf>,
    /// Restrict to these dataset graphs; repeatable. Default: all.
    #[arg(long = "graph-id", value_name = "ID")]
    pub graph_id: Vec<String>,
    #[command(flatten)]
    pub oracle: OracleArgs,
    #[arg(long, value_enum, default_value_t = Mode::Oblivious)]
    pub mode: Mode,
    /// Seeded runs per graph; dataset mode always runs once.
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct GraphSummary {
    pub graph_id: String,
    #[serde(flatten)]
    pub summary: RunSummary,
}

/// Percentiles are over per-graph means of successful runs.
#[derive(Debug, Serialize)]
pub struct SearchSummary {
    pub graphs: usize,
    pub runs: usize,
    pub successes: usize,
    pub oracle_failures: usize,
    pub distance: Option<PercentileSummary>,
    pub phase1_distance: Option<PercentileSummary>,
    pub calls: Option<PercentileSummary>,
}

#[derive(Debug, Serialize)]
struct SearchReport {
    manifest: RunManifest,
    results: Vec<serde_json::Value>,
    per_graph: Vec<GraphSummary>,
    summary: SearchSummary,
}

/// Runs `runs` seeded searches per target. Run `r` of target `t` uses seed
/// `cfg.seed + t·runs + r`; results come back in that order.
pub fn run_targets(
    targets: &[(String, Graph)],
    classifier: &Arc<dyn Classifier>,
    cfg: &SearchConfig,
    stats: Option<&EdgeStats>,
    runs: usize,
    pool: &rayon::ThreadPool,
) -> Result<Vec<CounterfactualResult>, CliError> {
    let jobs: Vec<(usize, u64)> = (0..targets.len())
        .flat_map(|t| (0..runs).map(move |r| (t, (t * runs + r) as u64)))
        .collect();
    let results = pool.install(|| {
        jobs.par_iter()
            .map(|&(t, offset)| {
                let mut session = OracleSession::new(Arc::clone(classifier));
                let c = cfg.with_seed(cfg.seed.wrapping_add(offset));
                run_pipeline(&targets[t].1, &mut session, &c, stats).map(|r| r.with_graph_id(&targets[t].0))
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(results)
}

/// 4 if any run hit an oracle failure, 5 if none found a counterfactual.
pub fn outcome_code(results: &[CounterfactualResult]) -> u8 {
    if results.iter().any(|r| r.status == SearchStatus::OracleFailed) {
        ErrorKind::Oracle.exit_code()
    } else if !results.iter().any(CounterfactualResult::is_ok) {
        ErrorKind::Search.exit_code()
    } else {
        0
    }
}

pub fn result_json(r: &CounterfactualResult) -> serde_json::Value {
    let mut v = serde_json::to_value(r.record()).expect("record serialization cannot fail");
    if let Some(trace) = &r.trace {
        v["trace"] = serde_json::to_value(trace).expect("trace serialization cannot fail");
    }
    v
}

pub fn summarize(targets: &[(String, Graph)], results: &[CounterfactualResult]) -> (Vec<GraphSummary>, SearchSummary) {
    let per_graph: Vec<GraphSummary> = targets
        .iter()
        .map(|(id, _)| {
            let mine: Vec<CounterfactualResult> =
                results.iter().filter(|r| r.graph_id.as_deref() == Some(id)).cloned().collect();
            GraphSummary {
                graph_id: id.clone(),
                summary: RunSummary::from_results(&mine),
            }
        })
        .collect();
    let column = |f: fn(&RunSummary) -> Option<f64>| {
        let v: Vec<f64> = per_graph.iter().filter_map(|g| f(&g.summary)).collect();
        PercentileSummary::of(&v)
    };
    let summary = SearchSummary {
        graphs: targets.len(),
        runs: results.len(),
        successes: results.iter().filter(|r| r.is_ok()).count(),
        oracle_failures: results.iter().filter(|r| r.status == SearchStatus::OracleFailed).count(),
        distance: column(|s| s.mean_distance),
        phase1_distance: column(|s| s.mean_phase1_distance),
        calls: column(|s| s.mean_calls),
    };
    (per_graph, summary)
}

pub fn search(cmd: SearchCmd) -> Result<u8, CliError> {
    let mut manifest = RunManifest::new("search");
    let dataset = match &cmd.dataset {
        Some(path) => {
            let (d, sha) = load_dataset(path)?;
            manifest.dataset_sha256 = Some(sha);
            Some(d)
        }
        None => None,
    };
    let targets: Vec<(String, Graph)> = match (&cmd.graph, &dataset) {
        (Some(path), _) => {
            let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
            let doc = GraphDocument::from_json_slice(&bytes)
                .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
            let universe = match &dataset {
                Some(d) => Arc::clone(d.universe()),
                None => Arc::new(VertexUniverse::anonymous(doc.n_vertices)?),
            };
            let g = doc
                .to_graph(&universe)
                .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
            vec![("input".to_string(), g)]
        }
        (None, Some(d)) if cmd.graph_id.is_empty() => {
            d.items().iter().map(|it| (it.id.clone(), it.graph.clone())).collect()
        }
        (None, Some(d)) => cmd
            .graph_id
            .iter()
            .map(|id| find_graph(d, id).map(|it| (it.id.clone(), it.graph.clone())))
            .collect::<Result<_, _>>()?,
        (None, None) => return Err(CliError::usage("need --dataset or --graph")),
    };
    if cmd.oracle.oracle.needs_dataset() && dataset.is_none() {
        return Err(CliError::usage("builtin:knn needs --dataset"));
    }
    if cmd.runs == 0 {
        return Err(CliError::usage("--runs must be positive"));
    }
    let n_vertices = targets[0].1.universe().n();
    let classifier = cmd.oracle.build(dataset.as_ref(), n_vertices)?;
    manifest.oracle = Some(classifier.describe());
    let pool = cmd.budget.pool()?;

    let results = match cmd.mode {
        Mode::Dataset => {
            let d = dataset
                .as_ref()
                .ok_or_else(|| CliError::usage("dataset mode needs --dataset"))?;
            pool.install(|| {
                targets
                    .par_iter()
                    .map(|(id, g)| {
                        let mut session = OracleSession::new(Arc::clone(&classifier));
                        run_dataset_search(g, &mut session, d, ScanOrder::AscendingDistance).map(|r| r.with_graph_id(id))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })?
        }
        Mode::Oblivious | Mode::DataDriven => {
            let mode = if cmd.mode == Mode::DataDriven {
                SearchMode::DataDriven
            } else {
                SearchMode::Oblivious
            };
            let seed = resolve_seed(cmd.budget.seed);
            let cfg = cmd.budget.config(mode, seed);
            cfg.validate()?;
            let stats = cmd.budget.edge_stats(mode, dataset.as_deref())?;
            manifest.seed = Some(seed);
            manifest.config = Some(cfg.clone());
            run_targets(&targets, &classifier, &cfg, stats.as_ref(), cmd.runs, &pool)?
        }
    };

    let (per_graph, summary) = summarize(&targets, &results);
    let code = outcome_code(&results);
    let report = SearchReport {
        manifest,
        results: results.iter().map(result_json).collect(),
        per_graph,
        summary,
    };
    emit_json(cmd.out.as_deref(), &report)?;
    Ok(code)
}
