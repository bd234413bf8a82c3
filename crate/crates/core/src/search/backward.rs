use rand::Rng;

use super::sampling::{clamp_weight, pick_uniform, pick_weighted};
use super::weights::EdgeStats;
use super::{SearchConfig, TraceEntry};
use crate::graph::Graph;
use crate::oracle::{OracleError, OracleSession, Phase};
use crate::Label;

#[derive(Debug, Clone)]
pub struct BackwardOutcome {
    /// Closest counterfactual found; the starting one if nothing improved.
    pub best: Graph,
    pub iterations: usize,
    pub accepted: usize,
    pub oracle_error: Option<OracleError>,
}

/// Backward phase: shrinks `d(E, E_c)` starting from a counterfactual
/// `first`.
///
/// Each iteration toggles `k' = min(k, |E_d|)` edges of the pool
/// `E_d = E Δ E_c` on the current best. A candidate that is still a
/// counterfactual replaces the best, grows `k` by one and resets the pool;
/// otherwise `k` shrinks by one, and once `k` is 1 the rejected edge leaves
/// the pool. Stops after `η` iterations or when the pool is empty.
#[allow(clippy::too_many_arguments)]
pub fn backward_search<R: Rng + ?Sized>(
    e: &Graph,
    f_e: Label,
    first: &Graph,
    session: &mut OracleSession,
    cfg: &SearchConfig,
    rng: &mut R,
    stats: Option<&EdgeStats>,
    mut trace: Option<&mut Vec<TraceEntry>>,
) -> BackwardOutcome {
    let target = f_e.flip();
    let mut best = first.clone();
    let diff = |g: &Graph| -> Vec<usize> { e.symmetric_difference(g).expect("same universe").indices().collect() };
    let mut pool = diff(&best);
    let mut distance = pool.len();
    let mut k = cfg.k;
    let mut i = 0;
    let mut accepted_count = 0;
    let mut oracle_error = None;

    while i < cfg.eta_phase2 && !pool.is_empty() {
        i += 1;
        k = k.min(pool.len());
        let picked: Vec<usize> = match stats {
            None => pick_uniform(rng, pool.len(), k),
            Some(s) => {
                let weights: Vec<f64> = pool
                    .iter()
                    .map(|&idx| clamp_weight(s.backward_weight(e, f_e, idx), cfg.epsilon))
                    .collect();
                pick_weighted(rng, &weights, k)
            }
        };
        let mut candidate = best.clone();
        for &p in &picked {
            candidate.toggle_index(pool[p]);
        }
        let label = match session.classify(&candidate) {
            Ok(l) => l,
            Err(err) => {
                oracle_error = Some(err);
                break;
            }
        };
        let used_k = k;
        let accepted = label == target;
        if accepted {
            k += 1;
            best = candidate;
            pool = diff(&best);
            distance = pool.len();
            accepted_count += 1;
        } else if k > 1 {
            k -= 1;
        } else {
            let tested = pool[picked[0]];
            pool.retain(|&idx| idx != tested);
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceEntry {
                phase: Phase::Backward,
                iteration: i,
                k: used_k,
                accepted,
                distance,
            });
        }
    }

    BackwardOutcome {
        best,
        iterations: i,
        accepted: accepted_count,
        oracle_error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexUniverse;
    use crate::oracle::EdgeCountThreshold;
    use crate::search::SearchMode;
    use std::sync::Arc;

    fn cfg(seed: u64) -> SearchConfig {
        SearchConfig {
            seed,
            mode: SearchMode::Oblivious,
            trace: true,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn threshold_oracle_reaches_nine_edges() {
        let u = Arc::new(VertexUniverse::anonymous(10).unwrap());
        let e = Graph::from_indices(Arc::clone(&u), 0..12);
        let first = Graph::from_indices(Arc::clone(&u), 0..4);
        for seed in 0..25 {
            let mut s = OracleSession::new(Arc::new(EdgeCountThreshold { threshold: 10 }));
            s.begin_phase(Phase::Backward, Some(2000));
            let c = cfg(seed);
            let out = backward_search(&e, Label::One, &first, &mut s, &c, &mut c.rng(), None, None);
            assert_eq!(out.best.len(), 9, "seed {seed}");
            assert_eq!(e.edit_distance(&out.best).unwrap(), 3);
            assert!(out.oracle_error.is_none());
        }
    }

    #[test]
    fn empty_pool_returns_start_immediately() {
        let u = Arc::new(VertexUniverse::anonymous(5).unwrap());
        let e = Graph::from_indices(Arc::clone(&u), 0..3);
        let mut s = OracleSession::new(Arc::new(EdgeCountThreshold { threshold: 1 }));
        let c = cfg(1);
        let out = backward_search(&e, Label::One, &e, &mut s, &c, &mut c.rng(), None, None);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.best, e);
        assert_eq!(s.total_calls(), 0);
    }

    #[test]
    fn k_adapts_by_one_per_iteration() {
        let u = Arc::new(VertexUniverse::anonymous(12).unwrap());
        let e = Graph::from_indices(Arc::clone(&u), 0..30);
        let first = Graph::from_indices(Arc::clone(&u), 0..5);
        let mut s = OracleSession::new(Arc::new(EdgeCountThreshold { threshold: 20 }));
        s.begin_phase(Phase::Backward, Some(2000));
        let c = cfg(42);
        let mut trace = Vec::new();
        backward_search(&e, Label::One, &first, &mut s, &c, &mut c.rng(), None, Some(&mut trace));
        assert!(!trace.is_empty());
        let mut k = c.k;
        let mut pool = 25usize;
        for t in &trace {
            k = k.min(pool);
            assert_eq!(t.k, k);
            if t.accepted {
                k += 1;
                pool = t.distance;
            } else if k > 1 {
                k -= 1;
            } else {
                pool -= 1;
            }
        }
    }
}
