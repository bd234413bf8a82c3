//! Labeled graph datasets: JSON persistence, correlation-matrix
//! thresholding and a planted contrast-subgraph generator.

use std::collections::{BTreeMap, HashSet};
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError, VertexSet, VertexUniverse};
use crate::Label;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("malformed CSV at row {row}: {message}")]
    Csv { row: usize, message: String },
    #[error("invalid correlation matrix: {0}")]
    Matrix(String),
    #[error("invalid generator parameters: {0}")]
    Generator(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl DatasetError {
    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        DatasetError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        DatasetError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<serde_json::Error> for DatasetError {
    fn from(e: serde_json::Error) -> Self {
        DatasetError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGraph {
    pub id: String,
    pub graph: Graph,
    pub label: Label,
}

/// A set of labeled graphs sharing one vertex universe.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    universe: Arc<VertexUniverse>,
    items: Vec<LabeledGraph>,
}

#[derive(Serialize, Deserialize)]
struct RawDataset {
    schema_version: u32,
    n_vertices: usize,
    #[serde(default)]
    vertex_labels: Option<Vec<String>>,
    #[serde(default)]
    regions: BTreeMap<usize, String>,
    graphs: Vec<RawGraph>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    id: String,
    label: i64,
    edges: Vec<[i64; 2]>,
}

impl LabeledDataset {
    pub fn new(universe: Arc<VertexUniverse>, items: Vec<LabeledGraph>) -> Result<Self, DatasetError> {
        let mut ids = HashSet::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            if !ids.insert(item.id.as_str()) {
                return Err(DatasetError::schema(
                    format!("graphs[{i}].id"),
                    format!("duplicate graph id {:?}", item.id),
                ));
            }
            if **item.graph.universe() != *universe {
                return Err(DatasetError::schema(format!("graphs[{i}]"), "graph over a different vertex universe"));
            }
        }
        Ok(Self { universe, items })
    }

    pub fn universe(&self) -> &Arc<VertexUniverse> {
        &self.universe
    }

    pub fn items(&self) -> &[LabeledGraph] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&LabeledGraph> {
        self.items.iter().find(|it| it.id == id)
    }

    /// Number of graphs per class, indexed by label.
    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for it in &self.items {
            counts[it.label.index()] += 1;
        }
        counts
    }

    /// Data-driven search and the dataset baseline need both classes present.
    pub fn require_both_classes(&self) -> Result<(), DatasetError> {
        let counts = self.class_counts();
        if counts[0] == 0 || counts[1] == 0 {
            return Err(DatasetError::schema(
                "graphs",
                format!("need at least one graph per class, have {counts:?}"),
            ));
        }
        Ok(())
    }

    pub fn from_json_slice(bytes: &[u8]) -> Result<Self, DatasetError> {
        let raw: RawDataset = serde_json::from_slice(bytes)?;
        Self::from_raw(raw)
    }

    pub fn from_json_str(s: &str) -> Result<Self, DatasetError> {
        Self::from_json_slice(s.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| DatasetError::io(path, e))?;
        Self::from_json_slice(&bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DatasetError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()).map_err(|e| DatasetError::io(path, e))
    }

    fn from_raw(raw: RawDataset) -> Result<Self, DatasetError> {
        if raw.schema_version != SCHEMA_VERSION {
            return Err(DatasetError::schema(
                "schema_version",
                format!("unsupported schema version {}, expected {SCHEMA_VERSION}", raw.schema_version),
            ));
        }
        let n = raw.n_vertices;
        if n < 2 {
            return Err(DatasetError::schema("n_vertices", format!("need at least 2 vertices, got {n}")));
        }
        if n > crate::graph::MAX_VERTICES {
            return Err(DatasetError::schema("n_vertices", GraphError::TooManyVertices(n).to_string()));
        }
        let labels = match raw.vertex_labels {
            Some(labels) if labels.len() != n => {
                return Err(DatasetError::schema(
                    "vertex_labels",
                    format!("expected {n} labels, got {}", labels.len()),
                ))
            }
            Some(labels) => labels,
            None => (0..n).map(|i| format!("v{i}")).collect(),
        };
        let universe = VertexUniverse::new(labels, raw.regions).map_err(|e| match e {
            GraphError::VertexOutOfRange { vertex, .. } => {
                DatasetError::schema(format!("regions.{vertex}"), e.to_string())
            }
            other => DatasetError::schema("vertex_labels", other.to_string()),
        })?;
        let universe = Arc::new(universe);

        let mut items = Vec::with_capacity(raw.graphs.len());
        for (gi, rg) in raw.graphs.into_iter().enumerate() {
            let label = Label::try_from(rg.label)
                .map_err(|m| DatasetError::schema(format!("graphs[{gi}].label"), m))?;
            let graph = graph_from_raw_edges(&universe, &rg.edges, &format!("graphs[{gi}].edges"))?;
            items.push(LabeledGraph {
                id: rg.id,
                graph,
                label,
            });
        }
        Self::new(universe, items)
    }

    pub fn to_json_string(&self) -> String {
        let raw = RawDataset {
            schema_version: SCHEMA_VERSION,
            n_vertices: self.universe.n(),
            vertex_labels: Some(self.universe.labels().to_vec()),
            regions: self.universe.region_of().clone(),
            graphs: self
                .items
                .iter()
                .map(|it| RawGraph {
                    id: it.id.clone(),
                    label: it.label as i64,
                    edges: it.graph.edges().map(|e| [e.u as i64, e.v as i64]).collect(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&raw).expect("dataset serialization cannot fail");
        s.push('\n');
        s
    }
}

fn vertex_index(v: i64, n: usize) -> Result<usize, String> {
    usize::try_from(v)
        .ok()
        .filter(|&v| v < n)
        .ok_or_else(|| format!("vertex {v} out of range for {n} vertices"))
}

fn graph_from_raw_edges(universe: &Arc<VertexUniverse>, edges: &[[i64; 2]], path: &str) -> Result<Graph, DatasetError> {
    let n = universe.n();
    let mut graph = Graph::empty(Arc::clone(universe));
    for (ei, &[a, b]) in edges.iter().enumerate() {
        let path = || format!("{path}[{ei}]");
        let a = vertex_index(a, n).map_err(|m| DatasetError::schema(path(), m))?;
        let b = vertex_index(b, n).map_err(|m| DatasetError::schema(path(), m))?;
        if a == b {
            return Err(DatasetError::schema(path(), format!("self-loop on vertex {a}")));
        }
        if !graph.insert(a, b)? {
            return Err(DatasetError::schema(path(), format!("duplicate edge [{a},{b}]")));
        }
    }
    Ok(graph)
}

/// A single unlabeled graph: `{"n_vertices": n, "edges": [[u, v], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub n_vertices: usize,
    pub edges: Vec<[i64; 2]>,
}

impl GraphDocument {
    pub fn from_graph(g: &Graph) -> Self {
        Self {
            n_vertices: g.universe().n(),
            edges: g.edges().map(|e| [e.u as i64, e.v as i64]).collect(),
        }
    }

    pub fn from_json_slice(bytes: &[u8]) -> Result<Self, DatasetError> {
        Ok(serde_json::from_slice(bytes)?)
    }

    /// Validates against `universe`, which must have exactly `n_vertices`.
    pub fn to_graph(&self, universe: &Arc<VertexUniverse>) -> Result<Graph, DatasetError> {
        if self.n_vertices != universe.n() {
            return Err(DatasetError::schema(
                "n_vertices",
                format!("graph has {} vertices, universe has {}", self.n_vertices, universe.n()),
            ));
        }
        graph_from_raw_edges(universe, &self.edges, "edges")
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string(self).expect("graph serialization cannot fail");
        s.push('\n');
        s
    }
}

/// A symmetric `n × n` correlation matrix with entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    n: usize,
    values: Vec<f64>,
}

const SYMMETRY_TOLERANCE: f64 = 1e-9;

impl CorrelationMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, DatasetError> {
        let n = rows.len();
        if n < 2 {
            return Err(DatasetError::Matrix(format!("need at least 2 rows, got {n}")));
        }
        let mut values = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(DatasetError::Matrix(format!(
                    "row {i} has {} columns, expected {n}",
                    row.len()
                )));
            }
            values.extend(row);
        }
        for i in 0..n {
            for j in 0..n {
                let x = values[i * n + j];
                if !(-1.0..=1.0).contains(&x) {
                    return Err(DatasetError::Matrix(format!("entry ({i},{j}) = {x} outside [-1, 1]")));
                }
                if j > i && (x - values[j * n + i]).abs() > SYMMETRY_TOLERANCE {
                    return Err(DatasetError::Matrix(format!(
                        "not symmetric at ({i},{j}): {x} vs {}",
                        values[j * n + i]
                    )));
                }
            }
        }
        Ok(Self { n, values })
    }

    /// Reads an `n × n` CSV of numbers, optionally skipping one header row.
    pub fn from_csv<R: Read>(reader: R, has_header: bool) -> Result<Self, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(has_header)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let row_no = i + 1 + has_header as usize;
            let record = record.map_err(|e| DatasetError::Csv {
                row: row_no,
                message: e.to_string(),
            })?;
            let row = record
                .iter()
                .enumerate()
                .map(|(j, field)| {
                    field.parse::<f64>().map_err(|_| DatasetError::Csv {
                        row: row_no,
                        message: format!("column {}: not a number: {field:?}", j + 1),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Self::from_rows(rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Off-diagonal upper-triangle values in pair-index order.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                out.push(self.get(i, j));
            }
        }
        out
    }
}

/// Nearest-rank percentile: the smallest value `t` in the sorted sample such
/// that at least `p%` of the sample is `≤ t`. `p = 0` yields the minimum.
pub fn nearest_rank_percentile(values: &[f64], percentile: f64) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((percentile / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Builds a graph with an edge wherever the correlation strictly exceeds the
/// given percentile of the off-diagonal upper-triangle values.
pub fn threshold_matrix(
    c: &CorrelationMatrix,
    percentile: f64,
    universe: Arc<VertexUniverse>,
) -> Result<Graph, DatasetError> {
    if !(0.0..=100.0).contains(&percentile) {
        return Err(DatasetError::Matrix(format!("percentile {percentile} outside [0, 100]")));
    }
    if universe.n() != c.n() {
        return Err(DatasetError::Matrix(format!(
            "matrix is {}×{} but the universe has {} vertices",
            c.n(),
            c.n(),
            universe.n()
        )));
    }
    let values = c.upper_triangle();
    let t = nearest_rank_percentile(&values, percentile);
    Ok(Graph::from_indices(
        universe,
        values.iter().enumerate().filter(|(_, &x)| x > t).map(|(i, _)| i),
    ))
}

/// Parameters of the planted contrast-subgraph generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticParams {
    pub n_vertices: usize,
    pub n_per_class: usize,
    /// Dense in class 1, sparse in class 0.
    pub s1: VertexSet,
    /// Dense in class 0, sparse in class 1.
    pub s2: VertexSet,
    pub p_dense: f64,
    pub p_sparse: f64,
    pub p_background: f64,
    pub seed: u64,
}

/// Class-0 graphs come first (`c0_000`, ...), then class 1 (`c1_000`, ...).
pub fn generate_synthetic(params: &SyntheticParams) -> Result<LabeledDataset, DatasetError> {
    let gen_err = |m: String| DatasetError::Generator(m);
    let universe = Arc::new(VertexUniverse::anonymous(params.n_vertices)?);
    params.s1.check_within(&universe)?;
    params.s2.check_within(&universe)?;
    if !params.s1.is_disjoint(&params.s2) {
        return Err(gen_err("s1 and s2 overlap".into()));
    }
    let prob_ok = |p: f64| (0.0..=1.0).contains(&p);
    if !(prob_ok(params.p_dense) && prob_ok(params.p_sparse) && prob_ok(params.p_background)) {
        return Err(gen_err("probabilities must lie in [0, 1]".into()));
    }
    if params.p_sparse >= params.p_dense {
        return Err(gen_err(format!(
            "need p_sparse < p_dense, got {} >= {}",
            params.p_sparse, params.p_dense
        )));
    }

    let m = universe.pair_count();
    let mut zone = vec![0u8; m];
    for idx in params.s1.induced_pairs(&universe) {
        zone[idx] = 1;
    }
    for idx in params.s2.induced_pairs(&universe) {
        zone[idx] = 2;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let width = params.n_per_class.max(1).to_string().len().max(3);
    let mut items = Vec::with_capacity(2 * params.n_per_class);
    for label in [Label::Zero, Label::One] {
        let (p_s1, p_s2) = match label {
            Label::One => (params.p_dense, params.p_sparse),
            Label::Zero => (params.p_sparse, params.p_dense),
        };
        for i in 0..params.n_per_class {
            let mut g = Graph::empty(Arc::clone(&universe));
            for (idx, z) in zone.iter().enumerate() {
                let p = match z {
                    1 => p_s1,
                    2 => p_s2,
                    _ => params.p_background,
                };
                // Draw unconditionally so the stream layout does not depend on p.
                let u: f64 = rng.random();
                if u < p {
                    g.insert_index(idx);
                }
            }
            items.push(LabeledGraph {
                id: format!("c{}_{:0width$}", label, i),
                graph: g,
                label,
            });
        }
    }
    LabeledDataset::new(universe, items)
}
