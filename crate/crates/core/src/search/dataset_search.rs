use super::SearchError;
use crate::dataset::LabeledDataset;
use crate::graph::Graph;
use crate::oracle::{OracleError, OracleSession};
use crate::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanOrder {
    /// Candidates sorted by ascending edit distance (stable, so dataset
    /// order breaks ties). Returns the global minimum among oracle-confirmed
    /// candidates.
    #[default]
    AscendingDistance,
    /// Candidates in dataset order.
    Dataset,
}

#[derive(Debug, Clone)]
pub struct DatasetSearchOutcome {
    /// Index into the dataset of the best oracle-confirmed candidate.
    pub best: Option<usize>,
    pub distance: Option<usize>,
    /// Candidates that passed the strict `d < δ` test, i.e. oracle queries.
    pub strict_improvements: usize,
    pub oracle_error: Option<OracleError>,
}

/// Closest real graph of the opposite ground-truth label that the oracle
/// also labels opposite to `f_e`.
///
/// The oracle is queried only for candidates strictly closer than the best
/// accepted one so far; `δ` starts at `|V²|`.
pub fn dataset_search(
    e: &Graph,
    f_e: Label,
    session: &mut OracleSession,
    dataset: &LabeledDataset,
    order: ScanOrder,
) -> Result<DatasetSearchOutcome, SearchError> {
    let target = f_e.flip();
    let mut candidates = Vec::new();
    for (i, it) in dataset.items().iter().enumerate() {
        if it.label == target {
            candidates.push((e.edit_distance(&it.graph)?, i));
        }
    }
    if order == ScanOrder::AscendingDistance {
        candidates.sort_by_key(|&(d, _)| d);
    }

    let mut delta = e.universe().pair_count();
    let mut out = DatasetSearchOutcome {
        best: None,
        distance: None,
        strict_improvements: 0,
        oracle_error: None,
    };
    for (d, i) in candidates {
        if d >= delta {
            if order == ScanOrder::AscendingDistance {
                break;
            }
            continue;
        }
        out.strict_improvements += 1;
        match session.classify(&dataset.items()[i].graph) {
            Ok(label) if label == target => {
                out.best = Some(i);
                out.distance = Some(d);
                delta = d;
            }
            Ok(_) => {}
            Err(err) => {
                out.oracle_error = Some(err);
                break;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LabeledGraph;
    use crate::graph::VertexUniverse;
    use crate::oracle::{FnClassifier, Phase};
    use std::sync::Arc;

    fn dataset(items: &[(&str, Vec<usize>, Label)]) -> LabeledDataset {
        let u = Arc::new(VertexUniverse::anonymous(6).unwrap());
        LabeledDataset::new(
            Arc::clone(&u),
            items
                .iter()
                .map(|(id, edges, label)| LabeledGraph {
                    id: id.to_string(),
                    graph: Graph::from_indices(Arc::clone(&u), edges.iter().copied()),
                    label: *label,
                })
                .collect(),
        )
        .unwrap()
    }

    fn by_size() -> Arc<FnClassifier<impl Fn(&Graph) -> Label + Send + Sync>> {
        Arc::new(FnClassifier::new("size>=3", |g: &Graph| Label::from_bool(g.len() >= 3)))
    }

    #[test]
    fn equal_distance_tie_goes_to_dataset_order() {
        let d = dataset(&[
            ("x", vec![0, 1, 2], Label::One),
            ("a", vec![5, 6, 7], Label::One),
            ("b", vec![7, 8, 9], Label::One),
        ]);
        let e = Graph::from_indices(Arc::clone(d.universe()), [10]);
        for order in [ScanOrder::AscendingDistance, ScanOrder::Dataset] {
            let mut s = OracleSession::new(by_size());
            s.begin_phase(Phase::DatasetScan, None);
            let out = dataset_search(&e, Label::Zero, &mut s, &d, order).unwrap();
            assert_eq!(out.best, Some(0));
            assert_eq!(out.distance, Some(4));
        }
    }

    #[test]
    fn no_opposite_label_means_no_calls() {
        let d = dataset(&[("a", vec![0], Label::Zero), ("b", vec![1], Label::Zero)]);
        let e = Graph::from_indices(Arc::clone(d.universe()), [2]);
        let mut s = OracleSession::new(by_size());
        let out = dataset_search(&e, Label::Zero, &mut s, &d, ScanOrder::AscendingDistance).unwrap();
        assert!(out.best.is_none());
        assert_eq!(s.total_calls(), 0);
    }

    #[test]
    fn oracle_rejections_are_skipped() {
        // "near" has the right ground truth but the oracle disagrees.
        let d = dataset(&[
            ("near", vec![0, 1], Label::One),
            ("far", vec![0, 1, 2, 3, 4], Label::One),
        ]);
        let e = Graph::from_indices(Arc::clone(d.universe()), [0]);
        let mut s = OracleSession::new(by_size());
        let out = dataset_search(&e, Label::Zero, &mut s, &d, ScanOrder::AscendingDistance).unwrap();
        assert_eq!(out.best, Some(1));
        assert_eq!(out.strict_improvements, 2);
        assert_eq!(s.total_calls(), 2);
    }
}
