//! `whitebox-eval`: search against a linear contrast classifier and compare
//! with the exactly computable optimum.

use std::path::PathBuf;
use std::sync::Arc;

use cfgraph::whitebox::{
    embed_contrast, fit_linear_separator, whitebox_error, LinearContrastClassifier, Separator, Side, WhiteboxReport,
};
use cfgraph::{Classifier, Graph, VertexSet};
use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::common::{find_graph, load_dataset, parse_vertex_set, BudgetArgs, WalkMode};
use crate::error::CliError;
use crate::manifest::{emit_json, resolve_seed, RunManifest};
use crate::search::{outcome_code, run_targets};

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideArg {
    Above,
    Below,
}

#[derive(Args, Debug)]
pub struct WhiteboxCmd {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Class-1 contrast set; its induced edge count is the y coordinate.
    #[arg(long, value_parser = parse_vertex_set)]
    pub s1: VertexSet,
    /// Class-0 contrast set; its induced edge count is the x coordinate.
    #[arg(long, value_parser = parse_vertex_set)]
    pub s2: VertexSet,
    /// Separator slope. Fitted on the dataset labels when absent.
    #[arg(long, requires = "intercept", allow_hyphen_values = true)]
    pub slope: Option<f64>,
    #[arg(long, requires = "slope", allow_hyphen_values = true)]
    pub intercept: Option<f64>,
    /// Side of a given separator labeled 1; ignored when fitting.
    #[arg(long, value_enum, default_value_t = SideArg::Above)]
    pub positive_side: SideArg,
    /// Restrict to these dataset graphs; repeatable. Default: all.
    #[arg(long = "graph-id", value_name = "ID")]
    pub graph_id: Vec<String>,
    #[arg(long, value_enum, default_value_t = WalkMode::Oblivious)]
    pub mode: WalkMode,
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Write each graph's embedding and labels here.
    #[arg(long, value_name = "CSV")]
    pub points_csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct WhiteboxOutput {
    manifest: RunManifest,
    classifier: LinearContrastClassifier,
    /// Present when the separator was fitted.
    training_accuracy: Option<f64>,
    report: WhiteboxReport,
}

#[derive(Debug, Serialize)]
struct PointRow<'a> {
    graph_id: &'a str,
    label: u8,
    x: usize,
    y: usize,
    predicted: u8,
}

pub fn whitebox_eval(cmd: WhiteboxCmd) -> Result<u8, CliError> {
    let mut manifest = RunManifest::new("whitebox-eval");
    let (dataset, sha) = load_dataset(&cmd.dataset)?;
    manifest.dataset_sha256 = Some(sha);
    if cmd.runs == 0 {
        return Err(CliError::usage("--runs must be positive"));
    }
    // x counts class-0-dense edges, y class-1-dense edges.
    let (x_set, y_set) = (cmd.s2.clone(), cmd.s1.clone());
    let points = dataset
        .items()
        .iter()
        .map(|it| Ok((embed_contrast(&it.graph, &x_set, &y_set)?, it.label)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let (separator, side, training_accuracy) = match (cmd.slope, cmd.intercept) {
        (Some(m), Some(c)) => {
            let side = match cmd.positive_side {
                SideArg::Above => Side::Above,
                SideArg::Below => Side::Below,
            };
            (Separator::line(m, c), side, None)
        }
        _ => {
            let fit = fit_linear_separator(&points)?;
            (fit.separator, fit.positive_side, Some(fit.training_accuracy))
        }
    };
    let wb = LinearContrastClassifier::new(x_set, y_set, separator, side)?;
    wb.check_universe(dataset.universe())?;
    let classifier: Arc<dyn Classifier> = Arc::new(wb.clone());
    manifest.oracle = Some(classifier.describe());

    let targets: Vec<(String, Graph)> = if cmd.graph_id.is_empty() {
        dataset.items().iter().map(|it| (it.id.clone(), it.graph.clone())).collect()
    } else {
        cmd.graph_id
            .iter()
            .map(|id| find_graph(&dataset, id).map(|it| (it.id.clone(), it.graph.clone())))
            .collect::<Result<_, _>>()?
    };
    let seed = resolve_seed(cmd.budget.seed);
    let cfg = cmd.budget.config(cmd.mode.into(), seed);
    cfg.validate()?;
    let stats = cmd.budget.edge_stats(cfg.mode, Some(&dataset))?;
    manifest.seed = Some(seed);
    manifest.config = Some(cfg.clone());
    let pool = cmd.budget.pool()?;
    let results = run_targets(&targets, &classifier, &cfg, stats.as_ref(), cmd.runs, &pool)?;

    let cases: Vec<(&Graph, &cfgraph::CounterfactualResult)> = results
        .iter()
        .enumerate()
        .map(|(i, r)| (&targets[i / cmd.runs].1, r))
        .collect();
    let report = whitebox_error(&cases, &wb)?;

    if let Some(path) = &cmd.points_csv {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        for (it, (p, label)) in dataset.items().iter().zip(&points) {
            w.serialize(PointRow {
                graph_id: &it.id,
                label: (*label).into(),
                x: p.x,
                y: p.y,
                predicted: wb.classify_point(p.x as f64, p.y as f64).into(),
            })
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }

    let code = outcome_code(&results);
    emit_json(
        cmd.out.as_deref(),
        &WhiteboxOutput {
            manifest,
            classifier: wb,
            training_accuracy,
            report,
        },
    )?;
    Ok(code)
}
