//! Explanations built from counterfactuals: one contrastive pair, per-graph
//! edge frequencies over many runs, and dataset-wide edge and vertex
//! counters with region-level aggregation.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::LabeledDataset;
use crate::graph::{Edge, EdgeSet, Graph, GraphError, VertexSet, VertexUniverse};
use crate::oracle::{Classifier, OracleSession};
use crate::search::weights::EdgeStats;
use crate::search::{run_pipeline, CounterfactualResult, SearchConfig, SearchError, SearchStatus};
use crate::Label;

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("vertex {vertex} has no region")]
    MissingRegion { vertex: usize },
    #[error("csv output: {0}")]
    Csv(String),
}

impl From<csv::Error> for ExplainError {
    fn from(e: csv::Error) -> Self {
        ExplainError::Csv(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContrastiveExplanation {
    /// `E \ E_c`.
    pub removed: EdgeSet,
    /// `E_c \ E`.
    pub added: EdgeSet,
    pub text: String,
    /// `E_c = E`: nothing to explain.
    pub degenerate: bool,
}

fn describe_edges(universe: &VertexUniverse, edges: &EdgeSet) -> String {
    let parts: Vec<String> = edges
        .edges()
        .map(|e| format!("{} and {}", universe.label(e.u), universe.label(e.v)))
        .collect();
    match parts.len() {
        1 => format!("the connection between {}", parts[0]),
        _ => format!("the connections between {}", parts.join("; between ")),
    }
}

/// Splits `E Δ E_c` into removals and additions and renders them with the
/// universe's vertex labels. `f_e` is the classifier's label of `E`.
pub fn contrastive_explanation(e: &Graph, e_c: &Graph, f_e: Label) -> Result<ContrastiveExplanation, GraphError> {
    let removed = e.difference(e_c)?;
    let added = e_c.difference(e)?;
    let u = e.universe();
    let degenerate = removed.is_empty() && added.is_empty();
    let mut changes = Vec::new();
    if !removed.is_empty() {
        changes.push(format!("{} were absent", describe_edges(u, &removed)));
    }
    if !added.is_empty() {
        changes.push(format!("{} were present", describe_edges(u, &added)));
    }
    let text = if degenerate {
        format!("The graph is classified as {f_e}. The counterfactual is identical to it, so it explains nothing.")
    } else {
        format!(
            "The graph is classified as {f_e}. It would be classified as {} if {}.",
            f_e.flip(),
            changes.join(" and ")
        )
    };
    Ok(ContrastiveExplanation {
        removed,
        added,
        text,
        degenerate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeImportance {
    pub edge: Edge,
    pub add_count: u32,
    pub remove_count: u32,
}

/// Edge frequencies over repeated searches from one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalExplanation {
    pub graph_id: Option<String>,
    pub universe: Arc<VertexUniverse>,
    /// Seeds of the aggregated (successful) runs.
    pub seeds: Vec<u64>,
    pub n_counterfactuals: usize,
    pub failures: usize,
    /// Per pair index: runs whose counterfactual adds the edge.
    pub add_freq: Vec<u32>,
    /// Per pair index: runs whose counterfactual removes the edge.
    pub remove_freq: Vec<u32>,
}

impl LocalExplanation {
    /// Aggregates the successful results among `results`.
    pub fn from_results(e: &Graph, graph_id: Option<String>, results: &[CounterfactualResult]) -> Result<Self, GraphError> {
        let m = e.universe().pair_count();
        let mut out = LocalExplanation {
            graph_id,
            universe: Arc::clone(e.universe()),
            seeds: Vec::new(),
            n_counterfactuals: 0,
            failures: 0,
            add_freq: vec![0; m],
            remove_freq: vec![0; m],
        };
        for r in results {
            let Some(cf) = r.counterfactual.as_ref().filter(|_| r.status == SearchStatus::Ok) else {
                out.failures += 1;
                continue;
            };
            for idx in e.symmetric_difference(cf)?.indices() {
                if e.contains_index(idx) {
                    out.remove_freq[idx] += 1;
                } else {
                    out.add_freq[idx] += 1;
                }
            }
            out.seeds.push(r.seed);
            out.n_counterfactuals += 1;
        }
        Ok(out)
    }

    /// Edges with non-zero counts, most frequent first (`add + remove`,
    /// ties by pair index), truncated to `top`.
    pub fn ranking(&self, top: Option<usize>) -> Vec<EdgeImportance> {
        let mut rows: Vec<(usize, EdgeImportance)> = (0..self.add_freq.len())
            .filter(|&i| self.add_freq[i] + self.remove_freq[i] > 0)
            .map(|i| {
                (
                    i,
                    EdgeImportance {
                        edge: self.universe.pair_at(i),
                        add_count: self.add_freq[i],
                        remove_count: self.remove_freq[i],
                    },
                )
            })
            .collect();
        rows.sort_by_key(|(i, r)| (std::cmp::Reverse(r.add_count + r.remove_count), *i));
        rows.into_iter().map(|(_, r)| r).take(top.unwrap_or(usize::MAX)).collect()
    }
}

/// Runs the pipeline `n` times from `e` with seeds `cfg.seed + i`, in
/// parallel. Results come back in seed order.
pub fn local_runs(
    e: &Graph,
    classifier: &Arc<dyn Classifier>,
    cfg: &SearchConfig,
    stats: Option<&EdgeStats>,
    n: usize,
) -> Result<Vec<CounterfactualResult>, SearchError> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut session = OracleSession::new(Arc::clone(classifier));
            run_pipeline(e, &mut session, &cfg.with_seed(cfg.seed.wrapping_add(i)), stats)
        })
        .collect()
}

/// [`local_runs`] folded into edge frequencies.
pub fn local_explanation(
    e: &Graph,
    graph_id: Option<String>,
    classifier: &Arc<dyn Classifier>,
    cfg: &SearchConfig,
    stats: Option<&EdgeStats>,
    n: usize,
) -> Result<LocalExplanation, ExplainError> {
    let results = local_runs(e, classifier, cfg, stats, n)?;
    Ok(LocalExplanation::from_results(e, graph_id, &results)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Counter {
    C0Plus,
    C0Minus,
    C1Plus,
    C1Minus,
}

impl Counter {
    pub const ALL: [Counter; 4] = [Counter::C0Plus, Counter::C0Minus, Counter::C1Plus, Counter::C1Minus];

    fn slot(self) -> usize {
        self as usize
    }

    fn of(class: Label, added: bool) -> Self {
        match (class, added) {
            (Label::Zero, true) => Counter::C0Plus,
            (Label::Zero, false) => Counter::C0Minus,
            (Label::One, true) => Counter::C1Plus,
            (Label::One, false) => Counter::C1Minus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Counter::C0Plus => "c0_plus",
            Counter::C0Minus => "c0_minus",
            Counter::C1Plus => "c1_plus",
            Counter::C1Minus => "c1_minus",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub graph_id: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedRun {
    pub graph_id: String,
    pub seed: u64,
    pub status: SearchStatus,
}

/// Per-edge counts over `(E, E_c)` pairs, split by the classifier's label
/// of `E` and by whether `E_c` adds or removes the edge.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalCounters {
    pub universe: Arc<VertexUniverse>,
    counts: Vec<[u64; 4]>,
    pub provenance: Vec<Provenance>,
    pub failures: Vec<FailedRun>,
}

impl GlobalCounters {
    pub fn new(universe: Arc<VertexUniverse>) -> Self {
        let m = universe.pair_count();
        Self {
            universe,
            counts: vec![[0; 4]; m],
            provenance: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn get(&self, counter: Counter, pair: usize) -> u64 {
        self.counts[pair][counter.slot()]
    }

    /// Sum of the four counters for one pair.
    pub fn mass(&self, pair: usize) -> u64 {
        self.counts[pair].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Adds one pair; `f_e` is the classifier's label of `e`.
    pub fn record(&mut self, e: &Graph, f_e: Label, e_c: &Graph, provenance: Provenance) -> Result<(), GraphError> {
        let diff = e.symmetric_difference(e_c)?;
        if !Arc::ptr_eq(&self.universe, e.universe()) && *self.universe != **e.universe() {
            return Err(GraphError::UniverseMismatch);
        }
        for idx in diff.indices() {
            self.counts[idx][Counter::of(f_e, !e.contains_index(idx)).slot()] += 1;
        }
        self.provenance.push(provenance);
        Ok(())
    }

    /// Folds one search result, counting unsuccessful ones as failures.
    pub fn record_result(&mut self, e: &Graph, graph_id: &str, result: &CounterfactualResult) -> Result<(), GraphError> {
        match (&result.counterfactual, result.original_label, result.status) {
            (Some(cf), Some(f_e), SearchStatus::Ok) => self.record(
                e,
                f_e,
                cf,
                Provenance {
                    graph_id: graph_id.to_string(),
                    seed: result.seed,
                },
            ),
            _ => {
                self.failures.push(FailedRun {
                    graph_id: graph_id.to_string(),
                    seed: result.seed,
                    status: result.status,
                });
                Ok(())
            }
        }
    }
}

/// Runs the pipeline `runs_per_graph` times on every dataset graph, in
/// parallel. Run `r` of graph `i` uses seed `cfg.seed + i·runs_per_graph + r`.
pub fn global_counters(
    dataset: &LabeledDataset,
    classifier: &Arc<dyn Classifier>,
    cfg: &SearchConfig,
    stats: Option<&EdgeStats>,
    runs_per_graph: usize,
) -> Result<GlobalCounters, ExplainError> {
    let jobs: Vec<(usize, u64)> = (0..dataset.len())
        .flat_map(|i| (0..runs_per_graph).map(move |r| (i, (i * runs_per_graph + r) as u64)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(i, offset)| {
            let mut session = OracleSession::new(Arc::clone(classifier));
            let c = cfg.with_seed(cfg.seed.wrapping_add(offset));
            run_pipeline(&dataset.items()[i].graph, &mut session, &c, stats)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut gc = GlobalCounters::new(Arc::clone(dataset.universe()));
    for (&(i, _), result) in jobs.iter().zip(&results) {
        let item = &dataset.items()[i];
        gc.record_result(&item.graph, &item.id, result)?;
    }
    Ok(gc)
}

/// Which class a heatmap explains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatmapSide {
    /// Upper triangle `C1+`, lower triangle `C0−`.
    Class0,
    /// Upper triangle `C0+`, lower triangle `C1−`.
    Class1,
}

impl HeatmapSide {
    pub fn counters(self) -> (Counter, Counter) {
        match self {
            HeatmapSide::Class0 => (Counter::C1Plus, Counter::C0Minus),
            HeatmapSide::Class1 => (Counter::C0Plus, Counter::C1Minus),
        }
    }
}

/// Counter sums per region pair. Both matrices are symmetric; `combined`
/// lays them out as upper and lower triangles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMatrix {
    pub regions: Vec<String>,
    pub side: HeatmapSide,
    pub upper_counter: Counter,
    pub lower_counter: Counter,
    pub upper: Vec<Vec<u64>>,
    pub lower: Vec<Vec<u64>>,
}

impl RegionMatrix {
    /// Upper triangle from `upper`, lower triangle from `lower`; the
    /// diagonal carries `upper`.
    pub fn combined(&self) -> Vec<Vec<u64>> {
        let r = self.regions.len();
        (0..r)
            .map(|i| (0..r).map(|j| if j >= i { self.upper[i][j] } else { self.lower[i][j] }).collect())
            .collect()
    }

    /// `1 − Σ|U−L| / Σ(U+L)` over off-diagonal region pairs; 1 when both are
    /// zero.
    pub fn symmetry_score(&self) -> f64 {
        let mut diff = 0u64;
        let mut total = 0u64;
        for i in 0..self.regions.len() {
            for j in (i + 1)..self.regions.len() {
                diff += self.upper[i][j].abs_diff(self.lower[i][j]);
                total += self.upper[i][j] + self.lower[i][j];
            }
        }
        if total == 0 {
            1.0
        } else {
            1.0 - diff as f64 / total as f64
        }
    }
}

/// Region order is first appearance by vertex index.
pub fn region_heatmap(gc: &GlobalCounters, side: HeatmapSide) -> Result<RegionMatrix, ExplainError> {
    let u = &gc.universe;
    let mut regions: Vec<String> = Vec::new();
    let mut slot_of: BTreeMap<&str, usize> = BTreeMap::new();
    let mut vertex_slot = Vec::with_capacity(u.n());
    for v in 0..u.n() {
        let name = u.region(v).ok_or(ExplainError::MissingRegion { vertex: v })?;
        let slot = *slot_of.entry(name).or_insert_with(|| {
            regions.push(name.to_string());
            regions.len() - 1
        });
        vertex_slot.push(slot);
    }
    let r = regions.len();
    let (up, lo) = side.counters();
    let mut upper = vec![vec![0u64; r]; r];
    let mut lower = vec![vec![0u64; r]; r];
    for idx in 0..u.pair_count() {
        let e = u.pair_at(idx);
        let (a, b) = (vertex_slot[e.u], vertex_slot[e.v]);
        let (cu, cl) = (gc.get(up, idx), gc.get(lo, idx));
        upper[a][b] += cu;
        lower[a][b] += cl;
        if a != b {
            upper[b][a] += cu;
            lower[b][a] += cl;
        }
    }
    Ok(RegionMatrix {
        regions,
        side,
        upper_counter: up,
        lower_counter: lo,
        upper,
        lower,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoiRow {
    pub vertex: usize,
    pub label: String,
    pub region: Option<String>,
    pub c0_plus: u64,
    pub c0_minus: u64,
    pub c1_plus: u64,
    pub c1_minus: u64,
}

/// Per vertex, each counter summed over incident pairs.
pub fn roi_importance(gc: &GlobalCounters) -> Vec<RoiRow> {
    let u = &gc.universe;
    let mut sums = vec![[0u64; 4]; u.n()];
    for idx in 0..u.pair_count() {
        let e = u.pair_at(idx);
        for (s, &c) in gc.counts[idx].iter().enumerate() {
            sums[e.u][s] += c;
            sums[e.v][s] += c;
        }
    }
    sums.into_iter()
        .enumerate()
        .map(|(v, s)| RoiRow {
            vertex: v,
            label: u.label(v).to_string(),
            region: u.region(v).map(str::to_string),
            c0_plus: s[0],
            c0_minus: s[1],
            c1_plus: s[2],
            c1_minus: s[3],
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LitmusReport {
    /// Mean counter mass per pair with both endpoints in the set.
    pub mean_inside: f64,
    /// Mean counter mass per pair with neither endpoint in the set.
    pub mean_outside: f64,
    /// `mean_inside / mean_outside`; infinite when the outside mass is zero
    /// and the inside mass is not.
    pub margin: f64,
}

/// Compares counter mass on pairs inside `inside` with pairs entirely
/// outside it.
pub fn litmus_margin(gc: &GlobalCounters, inside: &VertexSet) -> LitmusReport {
    let u = &gc.universe;
    let (mut mi, mut ni, mut mo, mut no) = (0u64, 0u64, 0u64, 0u64);
    for idx in 0..u.pair_count() {
        let e = u.pair_at(idx);
        match (inside.contains(e.u), inside.contains(e.v)) {
            (true, true) => {
                mi += gc.mass(idx);
                ni += 1;
            }
            (false, false) => {
                mo += gc.mass(idx);
                no += 1;
            }
            _ => {}
        }
    }
    let mean = |m: u64, n: u64| if n == 0 { 0.0 } else { m as f64 / n as f64 };
    let (mean_inside, mean_outside) = (mean(mi, ni), mean(mo, no));
    let margin = if mean_outside > 0.0 {
        mean_inside / mean_outside
    } else if mean_inside > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    LitmusReport {
        mean_inside,
        mean_outside,
        margin,
    }
}

/// Columns: edge, u_label, v_label, add_count, remove_count.
pub fn write_local_ranking<W: Write>(w: W, local: &LocalExplanation, top: Option<usize>) -> Result<(), ExplainError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["edge", "u_label", "v_label", "add_count", "remove_count"])?;
    for r in local.ranking(top) {
        out.write_record([
            format!("{}-{}", r.edge.u, r.edge.v),
            local.universe.label(r.edge.u).to_string(),
            local.universe.label(r.edge.v).to_string(),
            r.add_count.to_string(),
            r.remove_count.to_string(),
        ])?;
    }
    out.flush().map_err(|e| ExplainError::Csv(e.to_string()))
}

/// Columns: edge, u_label, v_label, c0_plus, c0_minus, c1_plus, c1_minus.
/// Pairs with all counters zero are omitted.
pub fn write_global_counters<W: Write>(w: W, gc: &GlobalCounters) -> Result<(), ExplainError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["edge", "u_label", "v_label", "c0_plus", "c0_minus", "c1_plus", "c1_minus"])?;
    for idx in 0..gc.universe.pair_count() {
        if gc.mass(idx) == 0 {
            continue;
        }
        let e = gc.universe.pair_at(idx);
        let mut row = vec![
            format!("{}-{}", e.u, e.v),
            gc.universe.label(e.u).to_string(),
            gc.universe.label(e.v).to_string(),
        ];
        row.extend(Counter::ALL.iter().map(|&c| gc.get(c, idx).to_string()));
        out.write_record(&row)?;
    }
    out.flush().map_err(|e| ExplainError::Csv(e.to_string()))
}

/// Square matrix of [`RegionMatrix::combined`] with region names as the
/// header row and first column.
pub fn write_region_matrix<W: Write>(w: W, m: &RegionMatrix) -> Result<(), ExplainError> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["region".to_string()];
    header.extend(m.regions.iter().cloned());
    out.write_record(&header)?;
    for (name, row) in m.regions.iter().zip(m.combined()) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(u64::to_string));
        out.write_record(&rec)?;
    }
    out.flush().map_err(|e| ExplainError::Csv(e.to_string()))
}

pub fn write_roi_table<W: Write>(w: W, rows: &[RoiRow]) -> Result<(), ExplainError> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush().map_err(|e| ExplainError::Csv(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::FnClassifier;
    use proptest::prelude::*;

    fn labeled_universe() -> Arc<VertexUniverse> {
        let labels = ["PCC", "mPFC", "AngL", "AngR", "Ins", "ACC"].iter().map(|s| s.to_string()).collect();
        let regions = [(0, "DMN"), (1, "DMN"), (2, "DMN"), (3, "DMN"), (4, "SAL"), (5, "SAL")]
            .into_iter()
            .map(|(v, r)| (v, r.to_string()))
            .collect();
        Arc::new(VertexUniverse::new(labels, regions).unwrap())
    }

    fn graph(u: &Arc<VertexUniverse>, edges: &[(usize, usize)]) -> Graph {
        Graph::from_edges(Arc::clone(u), edges.iter().copied()).unwrap()
    }

    #[test]
    fn two_edit_contrastive_text() {
        let u = labeled_universe();
        let e = graph(&u, &[(0, 1), (2, 3), (4, 5)]);
        let ec = graph(&u, &[(0, 1), (4, 5), (1, 4)]);
        let x = contrastive_explanation(&e, &ec, Label::One).unwrap();
        assert_eq!(x.removed.edges().collect::<Vec<_>>(), vec![Edge::new(2, 3).unwrap()]);
        assert_eq!(x.added.edges().collect::<Vec<_>>(), vec![Edge::new(1, 4).unwrap()]);
        assert_eq!(
            x.text,
            "The graph is classified as 1. It would be classified as 0 if the connection between AngL and AngR were absent \
             and the connection between mPFC and Ins were present."
        );
        assert!(!x.degenerate);
    }

    #[test]
    fn identical_pair_is_degenerate() {
        let u = labeled_universe();
        let e = graph(&u, &[(0, 1)]);
        let x = contrastive_explanation(&e, &e, Label::Zero).unwrap();
        assert!(x.degenerate && x.removed.is_empty() && x.added.is_empty());
    }

    proptest! {
        #[test]
        fn removed_and_added_partition_the_diff(a in proptest::collection::vec(any::<bool>(), 15), b in proptest::collection::vec(any::<bool>(), 15)) {
            let u = labeled_universe();
            let pick = |bits: &[bool]| Graph::from_indices(Arc::clone(&u), (0..15).filter(|&i| bits[i]));
            let (e, ec) = (pick(&a), pick(&b));
            let x = contrastive_explanation(&e, &ec, Label::Zero).unwrap();
            prop_assert_eq!(x.removed.union(&x.added).unwrap(), e.symmetric_difference(&ec).unwrap());
            prop_assert!(x.removed.intersection(&x.added).unwrap().is_empty());
        }
    }

    #[test]
    fn single_edge_oracle_concentrates_local_frequency() {
        // Label 1 iff pair 7 is present; E lacks it, so every counterfactual
        // adds exactly pair 7 once the backward phase has cleaned up.
        let u = Arc::new(VertexUniverse::anonymous(8).unwrap());
        let e = Graph::from_indices(Arc::clone(&u), [0, 3, 9, 20]);
        let oracle: Arc<dyn Classifier> = Arc::new(FnClassifier::new("pair7", |g: &Graph| Label::from_bool(g.contains_index(7))));
        let cfg = SearchConfig {
            trace: false,
            ..SearchConfig::default()
        };
        let local = local_explanation(&e, Some("g".into()), &oracle, &cfg, None, 40).unwrap();
        assert_eq!(local.n_counterfactuals + local.failures, 40);
        assert!(local.n_counterfactuals > 0);
        assert_eq!(local.add_freq[7] as usize, local.n_counterfactuals);
        let others: u32 = (0..u.pair_count()).filter(|&i| i != 7).map(|i| local.add_freq[i] + local.remove_freq[i]).sum();
        assert_eq!(others, 0);
        assert_eq!(local.ranking(Some(6)).len(), 1);
        let again = local_explanation(&e, Some("g".into()), &oracle, &cfg, None, 40).unwrap();
        assert_eq!(local, again);
    }

    #[test]
    fn counters_follow_predicted_class() {
        let u = labeled_universe();
        let mut gc = GlobalCounters::new(Arc::clone(&u));
        let e = graph(&u, &[(0, 1)]);
        let ec = graph(&u, &[(0, 1), (2, 3)]);
        let added = u.pair_index(2, 3).unwrap();
        gc.record(&e, Label::Zero, &ec, Provenance { graph_id: "a".into(), seed: 0 }).unwrap();
        assert_eq!(gc.get(Counter::C0Plus, added), 1);
        assert_eq!(gc.total(), 1);
        gc.record(&e, Label::One, &ec, Provenance { graph_id: "b".into(), seed: 0 }).unwrap();
        assert_eq!(gc.get(Counter::C0Plus, added), 1);
        assert_eq!(gc.get(Counter::C1Plus, added), 1);
        gc.record(&ec, Label::One, &e, Provenance { graph_id: "c".into(), seed: 0 }).unwrap();
        assert_eq!(gc.get(Counter::C1Minus, added), 1);
        assert_eq!(gc.provenance.len(), 3);
    }

    #[test]
    fn heatmap_triangles() {
        let u = labeled_universe();
        let mut gc = GlobalCounters::new(Arc::clone(&u));
        assert!(region_heatmap(&gc, HeatmapSide::Class1).unwrap().combined().iter().flatten().all(|&c| c == 0));
        let e = graph(&u, &[]);
        let ec = graph(&u, &[(1, 4)]);
        for seed in 0..3 {
            gc.record(&e, Label::Zero, &ec, Provenance { graph_id: "a".into(), seed }).unwrap();
        }
        let m = region_heatmap(&gc, HeatmapSide::Class1).unwrap();
        assert_eq!(m.regions, vec!["DMN", "SAL"]);
        assert_eq!(m.combined(), vec![vec![0, 3], vec![0, 0]]);
        let m0 = region_heatmap(&gc, HeatmapSide::Class0).unwrap();
        assert!(m0.combined().iter().flatten().all(|&c| c == 0));
        assert_eq!(m.symmetry_score(), 0.0);
    }

    #[test]
    fn heatmap_needs_regions() {
        let gc = GlobalCounters::new(Arc::new(VertexUniverse::anonymous(3).unwrap()));
        assert!(matches!(region_heatmap(&gc, HeatmapSide::Class0), Err(ExplainError::MissingRegion { vertex: 0 })));
    }

    #[test]
    fn star_roi_importance() {
        let u = labeled_universe();
        let mut gc = GlobalCounters::new(Arc::clone(&u));
        let e = graph(&u, &[]);
        let ec = graph(&u, &[(0, 1), (0, 2), (0, 3)]);
        gc.record(&e, Label::One, &ec, Provenance { graph_id: "a".into(), seed: 0 }).unwrap();
        let rows = roi_importance(&gc);
        assert_eq!(rows[0].c1_plus, 3);
        assert_eq!((rows[1].c1_plus, rows[2].c1_plus, rows[3].c1_plus, rows[4].c1_plus), (1, 1, 1, 0));
    }

    #[test]
    fn csv_outputs() {
        let u = labeled_universe();
        let mut gc = GlobalCounters::new(Arc::clone(&u));
        gc.record(&graph(&u, &[(0, 1)]), Label::Zero, &graph(&u, &[(4, 5)]), Provenance { graph_id: "a".into(), seed: 0 })
            .unwrap();
        let mut buf = Vec::new();
        write_global_counters(&mut buf, &gc).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "edge,u_label,v_label,c0_plus,c0_minus,c1_plus,c1_minus\n0-1,PCC,mPFC,0,1,0,0\n4-5,Ins,ACC,1,0,0,0\n"
        );
        let mut buf = Vec::new();
        write_region_matrix(&mut buf, &region_heatmap(&gc, HeatmapSide::Class1).unwrap()).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "region,DMN,SAL\nDMN,0,0\nSAL,0,1\n");
        let mut buf = Vec::new();
        write_roi_table(&mut buf, &roi_importance(&gc)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("vertex,label,region,c0_plus,c0_minus,c1_plus,c1_minus\n0,PCC,DMN,0,1,0,0\n"));
    }
}
