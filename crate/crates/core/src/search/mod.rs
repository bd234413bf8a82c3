//! Counterfactual graph search.
//!
//! The pipeline runs in two phases. The forward phase edits the input graph
//! `k` edges at a time, never touching an edge twice, until the oracle's
//! label flips. The backward phase then walks the first counterfactual back
//! toward the input along their symmetric difference, adapting the number
//! of edges toggled per step, and keeps the closest graph that is still a
//! counterfactual. Each phase comes in an oblivious flavour (uniform picks)
//! and a data-driven flavour (picks proportional to class-discrimination
//! weights from a reference dataset). [`dataset_search`] is the baseline
//! that only looks at real graphs.

mod backward;
mod dataset_search;
mod forward;
pub mod sampling;
pub mod weights;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, Graph};
use crate::oracle::{OracleError, OracleSession, Phase};
use crate::Label;

pub use backward::{backward_search, BackwardOutcome};
pub use dataset_search::{dataset_search, DatasetSearchOutcome, ScanOrder};
pub use forward::{forward_search, ForwardOutcome, ForwardStop};
pub use weights::EdgeStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Forward then backward search with uniform picks.
    Oblivious,
    /// Forward then backward search with weighted picks.
    DataDriven,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    pub eta_phase1: usize,
    pub eta_phase2: usize,
    pub k: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub mode: SearchMode,
    #[serde(default)]
    pub trace: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            eta_phase1: 2000,
            eta_phase2: 2000,
            k: 5,
            epsilon: 1e-4,
            seed: 0,
            mode: SearchMode::Oblivious,
            trace: cfg!(debug_assertions),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        if self.eta_phase1 == 0 || self.eta_phase2 == 0 {
            return Err(SearchError::Config("eta must be positive".into()));
        }
        if self.k == 0 {
            return Err(SearchError::Config("k must be positive".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(SearchError::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    Ok,
    Phase1Failed,
    OracleFailed,
    /// Dataset baseline found no oracle-confirmed opposite-class graph.
    NoCandidate,
}

/// One step of a search, for replay and contract checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub phase: Phase,
    /// 1-based iteration counter of the phase.
    pub iteration: usize,
    /// Edges edited (forward) or toggled (backward) in this iteration.
    pub k: usize,
    /// Forward: the label flipped. Backward: the candidate was kept.
    pub accepted: bool,
    /// `d(E, current)` after the iteration.
    pub distance: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterfactualResult {
    pub graph_id: Option<String>,
    pub mode: String,
    pub seed: u64,
    pub status: SearchStatus,
    pub original_label: Option<Label>,
    pub counterfactual: Option<Graph>,
    /// `d(E, E_c)`; zero when no counterfactual was found.
    pub distance: usize,
    /// `d(E, E_c¹)`, the first counterfactual's distance.
    pub phase1_distance: usize,
    pub iterations_phase1: usize,
    pub iterations_phase2: usize,
    pub calls_initial: usize,
    pub calls_phase1: usize,
    pub calls_phase2: usize,
    pub cache_hits: usize,
    pub calls_audit: usize,
    pub removed_edges: Vec<Edge>,
    pub added_edges: Vec<Edge>,
    pub error: Option<String>,
    pub trace: Option<Vec<TraceEntry>>,
}

/// Flat JSON record of a search result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub graph_id: Option<String>,
    pub mode: String,
    pub seed: u64,
    pub status: SearchStatus,
    pub distance: usize,
    pub phase1_distance: usize,
    pub calls_phase1: usize,
    pub calls_phase2: usize,
    pub calls_initial: usize,
    pub cache_hits: usize,
    pub counterfactual_edges: Option<Vec<Edge>>,
    pub removed_edges: Vec<Edge>,
    pub added_edges: Vec<Edge>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl CounterfactualResult {
    fn empty(mode: &str, seed: u64) -> Self {
        Self {
            graph_id: None,
            mode: mode.to_string(),
            seed,
            status: SearchStatus::Ok,
            original_label: None,
            counterfactual: None,
            distance: 0,
            phase1_distance: 0,
            iterations_phase1: 0,
            iterations_phase2: 0,
            calls_initial: 0,
            calls_phase1: 0,
            calls_phase2: 0,
            cache_hits: 0,
            calls_audit: 0,
            removed_edges: Vec::new(),
            added_edges: Vec::new(),
            error: None,
            trace: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == SearchStatus::Ok
    }

    /// Backend calls charged to the search (initial classification included,
    /// audits excluded).
    pub fn total_calls(&self) -> usize {
        self.calls_initial + self.calls_phase1 + self.calls_phase2
    }

    pub fn with_graph_id(mut self, id: impl Into<String>) -> Self {
        self.graph_id = Some(id.into());
        self
    }

    pub fn record(&self) -> ResultRecord {
        ResultRecord {
            graph_id: self.graph_id.clone(),
            mode: self.mode.clone(),
            seed: self.seed,
            status: self.status,
            distance: self.distance,
            phase1_distance: self.phase1_distance,
            calls_phase1: self.calls_phase1,
            calls_phase2: self.calls_phase2,
            calls_initial: self.calls_initial,
            cache_hits: self.cache_hits,
            counterfactual_edges: self.counterfactual.as_ref().map(|g| g.edges().collect()),
            removed_edges: self.removed_edges.clone(),
            added_edges: self.added_edges.clone(),
            error: self.error.clone(),
        }
    }

    fn set_counterfactual(&mut self, original: &Graph, cf: Graph) {
        self.distance = original.edit_distance(&cf).expect("same universe");
        self.removed_edges = original.difference(&cf).expect("same universe").edges().collect();
        self.added_edges = cf.difference(original).expect("same universe").edges().collect();
        self.counterfactual = Some(cf);
    }

    fn fill_calls(&mut self, session: &OracleSession) {
        self.calls_initial = session.stats(Phase::Initial).calls;
        self.calls_phase1 = session.stats(Phase::Forward).calls + session.stats(Phase::DatasetScan).calls;
        self.calls_phase2 = session.stats(Phase::Backward).calls;
        self.cache_hits = [Phase::Initial, Phase::Forward, Phase::Backward, Phase::DatasetScan]
            .iter()
            .map(|&p| session.stats(p).cache_hits)
            .sum();
        self.calls_audit = session.stats(Phase::Audit).calls;
    }

    fn fail_oracle(&mut self, e: &OracleError) {
        self.status = SearchStatus::OracleFailed;
        self.error = Some(e.to_string());
    }
}

fn mode_name(mode: SearchMode) -> &'static str {
    match mode {
        SearchMode::Oblivious => "oblivious",
        SearchMode::DataDriven => "data_driven",
    }
}

/// Classifies the input once, charged to [`Phase::Initial`].
fn initial_label(session: &mut OracleSession, e: &Graph) -> Result<Label, OracleError> {
    session.begin_phase(Phase::Initial, None);
    session.classify(e)
}

/// Re-checks a counterfactual outside the budget. A disagreement with the
/// memoized label is an oracle failure.
fn audit(session: &mut OracleSession, cf: &Graph, want: Label) -> Result<(), OracleError> {
    let got = session.audit(cf)?;
    if got != want {
        return Err(OracleError::Backend(format!(
            "audit: counterfactual classified {got}, expected {want}"
        )));
    }
    Ok(())
}

/// Runs the forward phase then the backward phase on `e`.
///
/// `stats` is required in data-driven mode. Oracle failures do not produce
/// an `Err`: the result carries status `oracle_failed` together with the best
/// counterfactual found before the failure, if any.
pub fn run_pipeline(
    e: &Graph,
    session: &mut OracleSession,
    cfg: &SearchConfig,
    stats: Option<&EdgeStats>,
) -> Result<CounterfactualResult, SearchError> {
    cfg.validate()?;
    let stats = match (cfg.mode, stats) {
        (SearchMode::DataDriven, None) => {
            return Err(SearchError::Config("data-driven mode needs a reference dataset".into()))
        }
        (SearchMode::DataDriven, Some(s)) => {
            if s.pair_count() != e.universe().pair_count() {
                return Err(SearchError::Config("reference dataset has a different vertex universe".into()));
            }
            Some(s)
        }
        (SearchMode::Oblivious, _) => None,
    };

    let mut result = CounterfactualResult::empty(mode_name(cfg.mode), cfg.seed);
    let mut rng = cfg.rng();
    let mut trace = cfg.trace.then(Vec::new);

    let f_e = match initial_label(session, e) {
        Ok(l) => l,
        Err(err) => {
            result.fail_oracle(&err);
            result.fill_calls(session);
            return Ok(result);
        }
    };
    result.original_label = Some(f_e);

    session.begin_phase(Phase::Forward, Some(cfg.eta_phase1));
    let fwd = forward_search(e, f_e, session, cfg, &mut rng, stats, trace.as_mut());
    result.iterations_phase1 = fwd.iterations;
    let first = match fwd.stop {
        ForwardStop::Flipped => fwd.graph,
        ForwardStop::BudgetSpent | ForwardStop::PoolsExhausted => {
            result.status = SearchStatus::Phase1Failed;
            result.error = Some(match fwd.stop {
                ForwardStop::BudgetSpent => "no class flip within the phase-1 budget".into(),
                _ => "ran out of editable edges before the class flipped".into(),
            });
            result.fill_calls(session);
            result.trace = trace;
            return Ok(result);
        }
        ForwardStop::Oracle(err) => {
            result.fail_oracle(&err);
            result.fill_calls(session);
            result.trace = trace;
            return Ok(result);
        }
    };
    result.phase1_distance = e.edit_distance(&first)?;

    session.begin_phase(Phase::Backward, Some(cfg.eta_phase2));
    let bwd = backward_search(e, f_e, &first, session, cfg, &mut rng, stats, trace.as_mut());
    result.iterations_phase2 = bwd.iterations;
    if let Some(err) = &bwd.oracle_error {
        result.fail_oracle(err);
    }
    let best = bwd.best;
    if result.status == SearchStatus::Ok {
        if let Err(err) = audit(session, &best, f_e.flip()) {
            result.fail_oracle(&err);
        }
    }
    result.set_counterfactual(e, best);
    result.fill_calls(session);
    result.trace = trace;
    Ok(result)
}

/// Dataset baseline packaged as a [`CounterfactualResult`].
pub fn run_dataset_search(
    e: &Graph,
    session: &mut OracleSession,
    dataset: &crate::dataset::LabeledDataset,
    order: ScanOrder,
) -> Result<CounterfactualResult, SearchError> {
    let mut result = CounterfactualResult::empty("dataset", 0);
    let f_e = match initial_label(session, e) {
        Ok(l) => l,
        Err(err) => {
            result.fail_oracle(&err);
            result.fill_calls(session);
            return Ok(result);
        }
    };
    result.original_label = Some(f_e);
    session.begin_phase(Phase::DatasetScan, None);
    let out = dataset_search(e, f_e, session, dataset, order)?;
    if let Some(err) = &out.oracle_error {
        result.fail_oracle(err);
    }
    match out.best {
        Some(i) => {
            let cf = dataset.items()[i].graph.clone();
            result.phase1_distance = e.edit_distance(&cf)?;
            if result.status == SearchStatus::Ok {
                if let Err(err) = audit(session, &cf, f_e.flip()) {
                    result.fail_oracle(&err);
                }
            }
            result.set_counterfactual(e, cf);
        }
        None if result.status == SearchStatus::Ok => {
            result.status = SearchStatus::NoCandidate;
            result.error = Some("no oracle-confirmed opposite-class graph in the dataset".into());
        }
        None => {}
    }
    result.fill_calls(session);
    Ok(result)
}

/// Averages over repeated runs of one input graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub runs: usize,
    pub successes: usize,
    pub mean_distance: Option<f64>,
    pub mean_phase1_distance: Option<f64>,
    pub mean_calls: Option<f64>,
}

impl RunSummary {
    /// Means are taken over successful runs only.
    pub fn from_results(results: &[CounterfactualResult]) -> Self {
        let ok: Vec<&CounterfactualResult> = results.iter().filter(|r| r.is_ok()).collect();
        let mean = |f: &dyn Fn(&CounterfactualResult) -> usize| {
            (!ok.is_empty()).then(|| ok.iter().map(|r| f(r) as f64).sum::<f64>() / ok.len() as f64)
        };
        Self {
            runs: results.len(),
            successes: ok.len(),
            mean_distance: mean(&|r| r.distance),
            mean_phase1_distance: mean(&|r| r.phase1_distance),
            mean_calls: mean(&|r| r.total_calls()),
        }
    }
}
