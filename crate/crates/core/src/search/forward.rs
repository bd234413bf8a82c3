use rand::Rng;

use super::sampling::{clamp_weight, Pool};
use super::weights::EdgeStats;
use super::{SearchConfig, TraceEntry};
use crate::graph::Graph;
use crate::oracle::{OracleError, OracleSession, Phase};
use crate::Label;

#[derive(Debug, Clone, PartialEq)]
pub enum ForwardStop {
    /// The working graph is a counterfactual.
    Flipped,
    /// `η` iterations without a class flip.
    BudgetSpent,
    /// Both candidate pools emptied before a flip.
    PoolsExhausted,
    Oracle(OracleError),
}

#[derive(Debug, Clone)]
pub struct ForwardOutcome {
    pub stop: ForwardStop,
    /// Last working graph `E'` (the first counterfactual on success).
    pub graph: Graph,
    pub iterations: usize,
    /// Every edited edge, in edit order. No edge appears twice.
    pub edited: Vec<usize>,
}

fn build_pools(e: &Graph, f_e: Label, cfg: &SearchConfig, stats: Option<&EdgeStats>) -> (Pool, Pool) {
    let m = e.universe().pair_count();
    let (absent, present): (Vec<usize>, Vec<usize>) = (0..m).partition(|&i| !e.contains_index(i));
    match stats {
        None => (Pool::Uniform(absent), Pool::Uniform(present)),
        Some(s) => {
            let weigh = |items: Vec<usize>| {
                let weights = items
                    .iter()
                    .map(|&i| clamp_weight(s.forward_weight(e, f_e, i), cfg.epsilon))
                    .collect();
                Pool::Weighted { items, weights }
            };
            (weigh(absent), weigh(present))
        }
    }
}

/// Forward phase: edits `e` by `k` edges per iteration until the label
/// differs from `f_e` or `η` iterations elapse.
///
/// Each edit flips a fair coin between adding an edge from `V² \ (E ∪ L)` and
/// removing one from `E \ L`; if the chosen pool is empty the other one is
/// used. The oracle is consulted once per iteration, after its `k` edits.
/// With `stats`, picks are proportional to `max(ε, w)` instead of uniform.
pub fn forward_search<R: Rng + ?Sized>(
    e: &Graph,
    f_e: Label,
    session: &mut OracleSession,
    cfg: &SearchConfig,
    rng: &mut R,
    stats: Option<&EdgeStats>,
    mut trace: Option<&mut Vec<TraceEntry>>,
) -> ForwardOutcome {
    let (mut additions, mut removals) = build_pools(e, f_e, cfg, stats);
    let mut working = e.clone();
    let mut edited = Vec::new();
    let mut label = f_e;
    let mut i = 0;

    while label == f_e && i < cfg.eta_phase1 {
        i += 1;
        for _ in 0..cfg.k {
            let add = rng.random::<f64>() < 0.5;
            let pool = match (add, additions.is_empty(), removals.is_empty()) {
                (_, true, true) => {
                    return ForwardOutcome {
                        stop: ForwardStop::PoolsExhausted,
                        graph: working,
                        iterations: i,
                        edited,
                    }
                }
                (true, false, _) | (false, _, true) => &mut additions,
                _ => &mut removals,
            };
            let idx = pool.take(rng).expect("pool checked non-empty");
            working.toggle_index(idx);
            edited.push(idx);
        }
        label = match session.classify(&working) {
            Ok(l) => l,
            Err(err) => {
                return ForwardOutcome {
                    stop: ForwardStop::Oracle(err),
                    graph: working,
                    iterations: i,
                    edited,
                }
            }
        };
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceEntry {
                phase: Phase::Forward,
                iteration: i,
                k: cfg.k,
                accepted: label != f_e,
                distance: edited.len(),
            });
        }
    }

    ForwardOutcome {
        stop: if label != f_e {
            ForwardStop::Flipped
        } else {
            ForwardStop::BudgetSpent
        },
        graph: working,
        iterations: i,
        edited,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexUniverse;
    use crate::oracle::{EdgeCountThreshold, FnClassifier};
    use crate::search::SearchMode;
    use std::sync::Arc;

    fn cfg(eta: usize, k: usize, seed: u64) -> SearchConfig {
        SearchConfig {
            eta_phase1: eta,
            eta_phase2: eta,
            k,
            seed,
            mode: SearchMode::Oblivious,
            trace: true,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn constant_oracle_fails_after_eta_iterations() {
        let u = Arc::new(VertexUniverse::anonymous(30).unwrap());
        let e = Graph::from_indices(Arc::clone(&u), (0..40).step_by(3));
        let mut s = OracleSession::new(Arc::new(FnClassifier::new("const", |_| Label::Zero)));
        s.begin_phase(Phase::Forward, Some(25));
        let c = cfg(25, 3, 5);
        let out = forward_search(&e, Label::Zero, &mut s, &c, &mut c.rng(), None, None);
        assert_eq!(out.stop, ForwardStop::BudgetSpent);
        assert_eq!(out.iterations, 25);
        assert_eq!(out.edited.len(), 75);
        let mut uniq = out.edited.clone();
        uniq.sort_unstable();
        uniq.dedup();
        assert_eq!(uniq.len(), 75);
        assert_eq!(s.stats(Phase::Forward).calls, 25);
    }

    #[test]
    fn single_edit_single_call() {
        let u = Arc::new(VertexUniverse::anonymous(6).unwrap());
        let e = Graph::from_indices(Arc::clone(&u), 0..4);
        let mut s = OracleSession::new(Arc::new(FnClassifier::new("const", |_| Label::One)));
        s.begin_phase(Phase::Forward, Some(1));
        let c = cfg(1, 1, 0);
        let out = forward_search(&e, Label::One, &mut s, &c, &mut c.rng(), None, None);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.edited.len(), 1);
        assert_eq!(s.stats(Phase::Forward).calls, 1);
    }

    #[test]
    fn threshold_oracle_flips_once_below_threshold() {
        let u = Arc::new(VertexUniverse::anonymous(10).unwrap());
        let e = Graph::from_indices(Arc::clone(&u), 0..12);
        let oracle = EdgeCountThreshold { threshold: 10 };
        for seed in 0..20 {
            let mut s = OracleSession::new(Arc::new(oracle));
            s.begin_phase(Phase::Forward, Some(2000));
            let c = cfg(2000, 1, seed);
            let mut trace = Vec::new();
            let out = forward_search(&e, Label::One, &mut s, &c, &mut c.rng(), None, Some(&mut trace));
            if out.stop != ForwardStop::Flipped {
                continue;
            }
            // Simulate the oracle on the recorded edit sequence: the search
            // must stop at the first prefix with fewer than 10 edges.
            let mut g = e.clone();
            let mut stop_at = None;
            for (n, &idx) in out.edited.iter().enumerate() {
                g.toggle_index(idx);
                if g.len() < 10 {
                    stop_at = Some(n + 1);
                    break;
                }
            }
            assert_eq!(stop_at, Some(out.iterations));
            assert_eq!(e.edit_distance(&out.graph).unwrap(), out.iterations);
            assert!(trace.iter().rev().skip(1).all(|t| !t.accepted));
            assert!(trace.last().unwrap().accepted);
        }
    }

    #[test]
    fn pools_exhaust_on_tiny_universe() {
        let u = Arc::new(VertexUniverse::anonymous(3).unwrap());
        let e = Graph::from_indices(Arc::clone(&u), [0]);
        let mut s = OracleSession::new(Arc::new(FnClassifier::new("const", |_| Label::Zero)));
        s.begin_phase(Phase::Forward, Some(100));
        let c = cfg(100, 2, 3);
        let out = forward_search(&e, Label::Zero, &mut s, &c, &mut c.rng(), None, None);
        assert_eq!(out.stop, ForwardStop::PoolsExhausted);
        assert_eq!(out.edited.len(), 3);
    }
}
