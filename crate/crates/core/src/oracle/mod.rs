//! Budgeted, call-counting access to binary graph classifiers.
//!
//! A [`Classifier`] is anything that maps a graph to a [`Label`]. The search
//! never talks to a classifier directly: it goes through an
//! [`OracleSession`], which memoizes answers, enforces the per-phase call
//! budget and keeps separate counts of real backend calls (cache misses) and
//! cache hits.

mod builtin;
mod external;

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::protocol::ProtocolError;
use crate::Label;

pub use builtin::{EdgeCountThreshold, KnnEditDistanceClassifier};
pub use external::{ExternalOracle, ExternalOptions, DEFAULT_TIMEOUT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("oracle budget exhausted in phase {0:?}")]
    BudgetExhausted(Phase),
    #[error("classifier backend failed: {0}")]
    Backend(String),
    #[error("protocol violation: {0}")]
    Protocol(#[from] ProtocolError),
    #[error("handshake failed: {0}")]
    Handshake(String),
    #[error("no response within {0:?}")]
    Timeout(std::time::Duration),
    #[error("classifier is not deterministic: cached {cached}, fresh {fresh}")]
    Nondeterministic { cached: Label, fresh: Label },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid classifier configuration: {0}")]
    Config(String),
}

impl OracleError {
    /// True for errors that mean the backend can no longer be trusted, as
    /// opposed to the session simply running out of budget.
    pub fn is_backend_failure(&self) -> bool {
        !matches!(self, OracleError::BudgetExhausted(_))
    }
}

/// A black-box binary graph classifier.
///
/// Implementations must be deterministic: the same graph always receives the
/// same label.
pub trait Classifier: Send + Sync {
    fn classify(&self, g: &Graph) -> Result<Label, OracleError>;

    /// Short human-readable descriptor, recorded in run manifests.
    fn describe(&self) -> String;
}

impl<C: Classifier + ?Sized> Classifier for Arc<C> {
    fn classify(&self, g: &Graph) -> Result<Label, OracleError> {
        (**self).classify(g)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<C: Classifier + ?Sized> Classifier for Box<C> {
    fn classify(&self, g: &Graph) -> Result<Label, OracleError> {
        (**self).classify(g)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// Wraps a closure as a classifier. Handy for analytic test oracles.
pub struct FnClassifier<F> {
    name: String,
    f: F,
}

impl<F> FnClassifier<F>
where
    F: Fn(&Graph) -> Label + Send + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self { name: name.into(), f }
    }
}

impl<F> Classifier for FnClassifier<F>
where
    F: Fn(&Graph) -> Label + Send + Sync,
{
    fn classify(&self, g: &Graph) -> Result<Label, OracleError> {
        Ok((self.f)(g))
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// Accounting bucket for oracle calls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// The single classification of the input graph shared by both phases.
    Initial,
    Forward,
    Backward,
    DatasetScan,
    /// Post-hoc validity re-checks; never budgeted.
    Audit,
}

const PHASES: [Phase; 5] = [
    Phase::Initial,
    Phase::Forward,
    Phase::Backward,
    Phase::DatasetScan,
    Phase::Audit,
];

fn slot(p: Phase) -> usize {
    PHASES.iter().position(|&q| q == p).expect("phase listed")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallStats {
    /// Backend invocations (distinct queries).
    pub calls: usize,
    /// Queries answered from the memo.
    pub cache_hits: usize,
}

impl CallStats {
    /// Every query, memoized or not.
    pub fn queries(&self) -> usize {
        self.calls + self.cache_hits
    }
}

/// One search run's view of a classifier.
pub struct OracleSession {
    backend: Arc<dyn Classifier>,
    cache: Option<HashMap<Vec<u64>, Label>>,
    phase: Phase,
    budget: Option<usize>,
    stats: [CallStats; 5],
}

impl OracleSession {
    pub fn new(backend: Arc<dyn Classifier>) -> Self {
        Self {
            backend,
            cache: Some(HashMap::new()),
            phase: Phase::Initial,
            budget: None,
            stats: [CallStats::default(); 5],
        }
    }

    pub fn without_cache(backend: Arc<dyn Classifier>) -> Self {
        Self {
            cache: None,
            ..Self::new(backend)
        }
    }

    pub fn backend(&self) -> &Arc<dyn Classifier> {
        &self.backend
    }

    /// Switches the accounting bucket. `budget` caps backend calls charged to
    /// this phase; `None` leaves it uncapped.
    pub fn begin_phase(&mut self, phase: Phase, budget: Option<usize>) {
        self.phase = phase;
        self.budget = budget;
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn stats(&self, phase: Phase) -> CallStats {
        self.stats[slot(phase)]
    }

    /// Backend calls across every phase except audits.
    pub fn total_calls(&self) -> usize {
        PHASES
            .iter()
            .filter(|&&p| p != Phase::Audit)
            .map(|&p| self.stats(p).calls)
            .sum()
    }

    pub fn remaining(&self) -> Option<usize> {
        self.budget.map(|b| b.saturating_sub(self.stats(self.phase).calls))
    }

    /// Label of `g`, charged to the current phase on a cache miss.
    pub fn classify(&mut self, g: &Graph) -> Result<Label, OracleError> {
        let s = slot(self.phase);
        if let Some(&label) = self.cache.as_ref().and_then(|c| c.get(g.words())) {
            self.stats[s].cache_hits += 1;
            return Ok(label);
        }
        if self.remaining() == Some(0) {
            return Err(OracleError::BudgetExhausted(self.phase));
        }
        let label = self.backend.classify(g)?;
        self.stats[s].calls += 1;
        if let Some(cache) = self.cache.as_mut() {
            cache.insert(g.words().to_vec(), label);
        }
        Ok(label)
    }

    /// Queries the backend directly, bypassing budget and memo, and checks
    /// the answer against any memoized label.
    pub fn audit(&mut self, g: &Graph) -> Result<Label, OracleError> {
        let fresh = self.backend.classify(g)?;
        self.stats[slot(Phase::Audit)].calls += 1;
        if let Some(&cached) = self.cache.as_ref().and_then(|c| c.get(g.words())) {
            if cached != fresh {
                return Err(OracleError::Nondeterministic { cached, fresh });
            }
        }
        Ok(fresh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexUniverse;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Counting {
        hits: AtomicUsize,
    }

    impl Classifier for Counting {
        fn classify(&self, g: &Graph) -> Result<Label, OracleError> {
            self.hits.fetch_add(1, Ordering::SeqCst);
            Ok(Label::from_bool(g.len() % 2 == 1))
        }
        fn describe(&self) -> String {
            "parity".into()
        }
    }

    fn graphs() -> (Graph, Graph) {
        let u = Arc::new(VertexUniverse::anonymous(5).unwrap());
        let a = Graph::from_edges(Arc::clone(&u), [(0, 1)]).unwrap();
        let b = Graph::from_edges(u, [(0, 1), (1, 2)]).unwrap();
        (a, b)
    }

    #[test]
    fn cache_hits_do_not_count_as_calls() {
        let backend = Arc::new(Counting { hits: AtomicUsize::new(0) });
        let mut s = OracleSession::new(backend.clone());
        let (a, b) = graphs();
        assert_eq!(s.classify(&a).unwrap(), Label::One);
        assert_eq!(s.classify(&a).unwrap(), Label::One);
        assert_eq!(s.stats(Phase::Initial), CallStats { calls: 1, cache_hits: 1 });
        s.begin_phase(Phase::Forward, Some(5));
        assert_eq!(s.classify(&b).unwrap(), Label::Zero);
        assert_eq!(s.stats(Phase::Forward).calls, 1);
        assert_eq!(backend.hits.load(Ordering::SeqCst), 2);
        assert_eq!(s.total_calls(), 2);
    }

    #[test]
    fn budget_exhaustion() {
        let mut s = OracleSession::new(Arc::new(Counting { hits: AtomicUsize::new(0) }));
        let (a, b) = graphs();
        s.begin_phase(Phase::Backward, Some(1));
        s.classify(&a).unwrap();
        assert_eq!(s.classify(&b), Err(OracleError::BudgetExhausted(Phase::Backward)));
        // Memoized graphs remain answerable.
        assert!(s.classify(&a).is_ok());
        assert_eq!(s.remaining(), Some(0));
    }

    #[test]
    fn uncached_session_counts_every_query() {
        let mut s = OracleSession::without_cache(Arc::new(Counting { hits: AtomicUsize::new(0) }));
        let (a, _) = graphs();
        s.classify(&a).unwrap();
        s.classify(&a).unwrap();
        assert_eq!(s.stats(Phase::Initial).calls, 2);
    }

    struct Flaky {
        n: AtomicUsize,
    }

    impl Classifier for Flaky {
        fn classify(&self, _: &Graph) -> Result<Label, OracleError> {
            Ok(Label::from_bool(self.n.fetch_add(1, Ordering::SeqCst).is_multiple_of(2)))
        }
        fn describe(&self) -> String {
            "flaky".into()
        }
    }

    #[test]
    fn audit_detects_nondeterminism() {
        let mut s = OracleSession::new(Arc::new(Flaky { n: AtomicUsize::new(0) }));
        let (a, _) = graphs();
        s.classify(&a).unwrap();
        assert!(matches!(s.audit(&a), Err(OracleError::Nondeterministic { .. })));
        assert_eq!(s.total_calls(), 1);
    }
}
