//! `explain-local` and `explain-global`.

use std::path::PathBuf;

use cfgraph::explain::{
    contrastive_explanation, global_counters, litmus_margin, local_runs, region_heatmap, roi_importance,
    write_global_counters, write_local_ranking, write_region_matrix, write_roi_table, EdgeImportance, ExplainError,
    FailedRun, HeatmapSide, LitmusReport, LocalExplanation,
};
use cfgraph::{Edge, Label, SearchStatus, VertexSet};
use clap::Args;
use serde::Serialize;

use crate::common::{find_graph, load_dataset, parse_vertex_set, BudgetArgs, OracleArgs, WalkMode};
use crate::error::{CliError, ErrorKind};
use crate::manifest::{emit_json, resolve_seed, RunManifest};
use crate::search::outcome_code;

#[derive(Args, Debug)]
pub struct ExplainLocalCmd {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long = "graph-id", value_name = "ID")]
    pub graph_id: String,
    #[command(flatten)]
    pub oracle: OracleArgs,
    #[arg(long, value_enum, default_value_t = WalkMode::Oblivious)]
    pub mode: WalkMode,
    /// Searches to aggregate; run `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Edges kept in the ranking.
    #[arg(long, default_value_t = 6)]
    pub top: usize,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Write the ranking here as CSV.
    #[arg(long, value_name = "CSV")]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct RankedEdge {
    edge: Edge,
    u_label: String,
    v_label: String,
    add_count: u32,
    remove_count: u32,
}

#[derive(Debug, Serialize)]
struct Contrastive {
    seed: u64,
    distance: usize,
    removed: Vec<Edge>,
    added: Vec<Edge>,
    text: String,
}

#[derive(Debug, Serialize)]
struct LocalOutput {
    manifest: RunManifest,
    graph_id: String,
    original_label: Option<Label>,
    runs: usize,
    n_counterfactuals: usize,
    failures: usize,
    ranking: Vec<RankedEdge>,
    /// Closest counterfactual found; lowest seed among ties.
    contrastive: Option<Contrastive>,
}

fn ranked(local: &LocalExplanation, rows: Vec<EdgeImportance>) -> Vec<RankedEdge> {
    rows.into_iter()
        .map(|r| RankedEdge {
            edge: r.edge,
            u_label: local.universe.label(r.edge.u).to_string(),
            v_label: local.universe.label(r.edge.v).to_string(),
            add_count: r.add_count,
            remove_count: r.remove_count,
        })
        .collect()
}

fn csv_error(path: &std::path::Path, e: ExplainError) -> CliError {
    CliError::data(format!("{}: {e}", path.display()))
}

fn create(path: &std::path::Path) -> Result<std::fs::File, CliError> {
    std::fs::File::create(path).map_err(|e| CliError::io(path, e))
}

pub fn explain_local(cmd: ExplainLocalCmd) -> Result<u8, CliError> {
    let mut manifest = RunManifest::new("explain-local");
    let (dataset, sha) = load_dataset(&cmd.dataset)?;
    manifest.dataset_sha256 = Some(sha);
    let item = find_graph(&dataset, &cmd.graph_id)?;
    if cmd.n == 0 {
        return Err(CliError::usage("--n must be positive"));
    }
    let classifier = cmd.oracle.build(Some(&dataset), dataset.universe().n())?;
    manifest.oracle = Some(classifier.describe());
    let seed = resolve_seed(cmd.budget.seed);
    let cfg = cmd.budget.config(cmd.mode.into(), seed);
    cfg.validate()?;
    let stats = cmd.budget.edge_stats(cfg.mode, Some(&dataset))?;
    manifest.seed = Some(seed);
    manifest.config = Some(cfg.clone());
    let pool = cmd.budget.pool()?;
    let results = pool.install(|| local_runs(&item.graph, &classifier, &cfg, stats.as_ref(), cmd.n))?;
    let local = LocalExplanation::from_results(&item.graph, Some(item.id.clone()), &results)?;

    let best = results
        .iter()
        .filter(|r| r.is_ok())
        .min_by_key(|r| (r.distance, r.seed));
    let contrastive = match best {
        Some(r) => {
            let cf = r.counterfactual.as_ref().expect("successful run has a counterfactual");
            let f_e = r.original_label.expect("successful run has a label");
            let c = contrastive_explanation(&item.graph, cf, f_e)?;
            Some(Contrastive {
                seed: r.seed,
                distance: r.distance,
                removed: c.removed.edges().collect(),
                added: c.added.edges().collect(),
                text: c.text,
            })
        }
        None => None,
    };
    if let Some(path) = &cmd.csv {
        write_local_ranking(create(path)?, &local, Some(cmd.top)).map_err(|e| csv_error(path, e))?;
    }
    let code = outcome_code(&results);
    emit_json(
        cmd.out.as_deref(),
        &LocalOutput {
            manifest,
            graph_id: item.id.clone(),
            original_label: results.iter().find_map(|r| r.original_label),
            runs: results.len(),
            n_counterfactuals: local.n_counterfactuals,
            failures: local.failures,
            ranking: ranked(&local, local.ranking(Some(cmd.top))),
            contrastive,
        },
    )?;
    Ok(code)
}

#[derive(Args, Debug)]
pub struct ExplainGlobalCmd {
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub oracle: OracleArgs,
    #[arg(long, value_enum, default_value_t = WalkMode::Oblivious)]
    pub mode: WalkMode,
    /// Searches per dataset graph.
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Directory for counters.csv, roi.csv and the region heatmaps.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Vertex set whose internal edges should dominate the counters; repeatable.
    #[arg(long, value_parser = parse_vertex_set, value_name = "SET")]
    pub litmus: Vec<VertexSet>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Heatmaps {
    class0_symmetry: f64,
    class1_symmetry: f64,
}

#[derive(Debug, Serialize)]
struct LitmusEntry {
    set: String,
    #[serde(flatten)]
    report: LitmusReport,
}

#[derive(Debug, Serialize)]
struct GlobalOutput {
    manifest: RunManifest,
    pairs: usize,
    total: u64,
    failures: Vec<FailedRun>,
    /// Absent when some vertex has no region.
    heatmaps: Option<Heatmaps>,
    litmus: Vec<LitmusEntry>,
    files: Vec<String>,
}

pub fn explain_global(cmd: ExplainGlobalCmd) -> Result<u8, CliError> {
    let mut manifest = RunManifest::new("explain-global");
    let (dataset, sha) = load_dataset(&cmd.dataset)?;
    manifest.dataset_sha256 = Some(sha);
    if cmd.runs == 0 {
        return Err(CliError::usage("--runs must be positive"));
    }
    for set in &cmd.litmus {
        set.check_within(dataset.universe())
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    let classifier = cmd.oracle.build(Some(&dataset), dataset.universe().n())?;
    manifest.oracle = Some(classifier.describe());
    let seed = resolve_seed(cmd.budget.seed);
    let cfg = cmd.budget.config(cmd.mode.into(), seed);
    cfg.validate()?;
    let stats = cmd.budget.edge_stats(cfg.mode, Some(&dataset))?;
    manifest.seed = Some(seed);
    manifest.config = Some(cfg.clone());
    let pool = cmd.budget.pool()?;
    let gc = pool.install(|| global_counters(&dataset, &classifier, &cfg, stats.as_ref(), cmd.runs))?;

    std::fs::create_dir_all(&cmd.out_dir).map_err(|e| CliError::io(&cmd.out_dir, e))?;
    let mut files = Vec::new();
    let path = cmd.out_dir.join("counters.csv");
    write_global_counters(create(&path)?, &gc).map_err(|e| csv_error(&path, e))?;
    files.push("counters.csv".to_string());
    let path = cmd.out_dir.join("roi.csv");
    write_roi_table(create(&path)?, &roi_importance(&gc)).map_err(|e| csv_error(&path, e))?;
    files.push("roi.csv".to_string());

    let heatmaps = match (region_heatmap(&gc, HeatmapSide::Class0), region_heatmap(&gc, HeatmapSide::Class1)) {
        (Ok(h0), Ok(h1)) => {
            for (name, m) in [("heatmap_class0.csv", &h0), ("heatmap_class1.csv", &h1)] {
                let path = cmd.out_dir.join(name);
                write_region_matrix(create(&path)?, m).map_err(|e| csv_error(&path, e))?;
                files.push(name.to_string());
            }
            Some(Heatmaps {
                class0_symmetry: h0.symmetry_score(),
                class1_symmetry: h1.symmetry_score(),
            })
        }
        (Err(ExplainError::MissingRegion { .. }), _) | (_, Err(ExplainError::MissingRegion { .. })) => None,
        (Err(e), _) | (_, Err(e)) => return Err(e.into()),
    };
    let litmus = cmd
        .litmus
        .iter()
        .map(|set| LitmusEntry {
            set: set.to_string(),
            report: litmus_margin(&gc, set),
        })
        .collect();

    let code = if gc.failures.iter().any(|f| f.status == SearchStatus::OracleFailed) {
        ErrorKind::Oracle.exit_code()
    } else if gc.provenance.is_empty() {
        ErrorKind::Search.exit_code()
    } else {
        0
    };
    emit_json(
        cmd.out.as_deref(),
        &GlobalOutput {
            manifest,
            pairs: gc.provenance.len(),
            total: gc.total(),
            failures: gc.failures.clone(),
            heatmaps,
            litmus,
            files,
        },
    )?;
    Ok(code)
}
