//! `ingest` and `gen-synthetic`.

use std::path::PathBuf;
use std::sync::Arc;

use cfgraph::dataset::{generate_synthetic, threshold_matrix, CorrelationMatrix, GraphDocument, SyntheticParams};
use cfgraph::{Label, LabeledDataset, LabeledGraph, VertexSet, VertexUniverse};
use clap::Args;

use crate::common::parse_vertex_set;
use crate::error::CliError;
use crate::manifest::{emit, emit_json, resolve_seed, RunManifest};

#[derive(Args, Debug)]
pub struct IngestCmd {
    /// Correlation matrix CSV; repeat for several graphs.
    #[arg(long, required = true, value_name = "CSV")]
    pub matrix: Vec<PathBuf>,
    /// Class label (0 or 1) per matrix, in order. Without labels a single
    /// matrix becomes a graph document.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub label: Vec<u8>,
    /// Graph id per matrix; defaults to the file stem.
    #[arg(long)]
    pub id: Vec<String>,
    /// Keep pairs whose correlation strictly exceeds this percentile.
    #[arg(long, default_value_t = 80.0)]
    pub percentile: f64,
    /// The CSV files start with a header row.
    #[arg(long)]
    pub header: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a run manifest here.
    #[arg(long, value_name = "PATH")]
    pub manifest: Option<PathBuf>,
}

pub fn ingest(cmd: IngestCmd) -> Result<u8, CliError> {
    if !cmd.label.is_empty() && cmd.label.len() != cmd.matrix.len() {
        return Err(CliError::usage(format!(
            "{} matrices but {} labels",
            cmd.matrix.len(),
            cmd.label.len()
        )));
    }
    if cmd.label.is_empty() && cmd.matrix.len() != 1 {
        return Err(CliError::usage("several matrices need one --label each"));
    }
    if !cmd.id.is_empty() && cmd.id.len() != cmd.matrix.len() {
        return Err(CliError::usage(format!("{} matrices but {} ids", cmd.matrix.len(), cmd.id.len())));
    }
    let mut universe: Option<Arc<VertexUniverse>> = None;
    let mut graphs = Vec::with_capacity(cmd.matrix.len());
    for path in &cmd.matrix {
        let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
        let m = CorrelationMatrix::from_csv(file, cmd.header)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let u = match &universe {
            Some(u) if u.n() != m.n() => {
                return Err(CliError::data(format!(
                    "{}: {} vertices, earlier matrices have {}",
                    path.display(),
                    m.n(),
                    u.n()
                )))
            }
            Some(u) => Arc::clone(u),
            None => Arc::clone(universe.insert(Arc::new(VertexUniverse::anonymous(m.n())?))),
        };
        graphs.push(threshold_matrix(&m, cmd.percentile, u).map_err(|e| match e {
            cfgraph::dataset::DatasetError::Matrix(_) if !(0.0..=100.0).contains(&cmd.percentile) => {
                CliError::usage(e.to_string())
            }
            other => CliError::data(format!("{}: {other}", path.display())),
        })?);
    }
    let text = if cmd.label.is_empty() {
        GraphDocument::from_graph(&graphs[0]).to_json_string()
    } else {
        let items = graphs
            .into_iter()
            .enumerate()
            .map(|(i, graph)| LabeledGraph {
                id: cmd.id.get(i).cloned().unwrap_or_else(|| {
                    cmd.matrix[i].file_stem().map_or(format!("g{i:03}"), |s| s.to_string_lossy().into_owned())
                }),
                graph,
                label: Label::from_bool(cmd.label[i] == 1),
            })
            .collect();
        let universe = universe.expect("at least one matrix");
        LabeledDataset::new(universe, items)?.to_json_string()
    };
    emit(cmd.out.as_deref(), &text)?;
    if let Some(path) = &cmd.manifest {
        emit_json(Some(path), &RunManifest::new("ingest"))?;
    }
    Ok(0)
}

#[derive(Args, Debug)]
pub struct GenCmd {
    #[arg(long, default_value_t = 30)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub per_class: usize,
    /// Vertices dense in class 1.
    #[arg(long, default_value = "0-4", value_parser = parse_vertex_set)]
    pub s1: VertexSet,
    /// Vertices dense in class 0.
    #[arg(long, default_value = "5-9", value_parser = parse_vertex_set)]
    pub s2: VertexSet,
    #[arg(long, default_value_t = 0.8)]
    pub p_dense: f64,
    #[arg(long, default_value_t = 0.1)]
    pub p_sparse: f64,
    #[arg(long, default_value_t = 0.1)]
    pub p_bg: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a run manifest here.
    #[arg(long, value_name = "PATH")]
    pub manifest: Option<PathBuf>,
}

pub fn gen_synthetic(cmd: GenCmd) -> Result<u8, CliError> {
    let seed = resolve_seed(cmd.seed);
    let params = SyntheticParams {
        n_vertices: cmd.n,
        n_per_class: cmd.per_class,
        s1: cmd.s1,
        s2: cmd.s2,
        p_dense: cmd.p_dense,
        p_sparse: cmd.p_sparse,
        p_background: cmd.p_bg,
        seed,
    };
    let dataset = generate_synthetic(&params).map_err(|e| CliError::usage(e.to_string()))?;
    emit(cmd.out.as_deref(), &dataset.to_json_string())?;
    if let Some(path) = &cmd.manifest {
        let mut manifest = RunManifest::new("gen-synthetic");
        manifest.seed = Some(seed);
        emit_json(Some(path), &manifest)?;
    }
    Ok(0)
}
