use std::sync::Arc;

use super::{Classifier, OracleError};
use crate::dataset::LabeledDataset;
use crate::graph::Graph;
use crate::Label;

/// Label 1 iff the graph has at least `threshold` edges.
#[derive(Debug, Clone, Copy)]
pub struct EdgeCountThreshold {
    pub threshold: usize,
}

impl Classifier for EdgeCountThreshold {
    fn classify(&self, g: &Graph) -> Result<Label, OracleError> {
        Ok(Label::from_bool(g.len() >= self.threshold))
    }

    fn describe(&self) -> String {
        format!("builtin:threshold:{}", self.threshold)
    }
}

/// Majority vote among the `k` reference graphs nearest in edit distance.
/// Distance ties are broken by dataset order.
#[derive(Debug, Clone)]
pub struct KnnEditDistanceClassifier {
    reference: Arc<LabeledDataset>,
    k: usize,
}

impl KnnEditDistanceClassifier {
    pub fn new(reference: Arc<LabeledDataset>, k: usize) -> Result<Self, OracleError> {
        if k == 0 || k.is_multiple_of(2) {
            return Err(OracleError::Config(format!("k_neighbors must be odd and positive, got {k}")));
        }
        if k > reference.len() {
            return Err(OracleError::Config(format!(
                "k_neighbors = {k} exceeds the {} reference graphs",
                reference.len()
            )));
        }
        Ok(Self { reference, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl Classifier for KnnEditDistanceClassifier {
    fn classify(&self, g: &Graph) -> Result<Label, OracleError> {
        let mut scored = self
            .reference
            .items()
            .iter()
            .enumerate()
            .map(|(i, it)| Ok((it.graph.edit_distance(g)?, i, it.label)))
            .collect::<Result<Vec<_>, OracleError>>()?;
        scored.sort_unstable_by_key(|&(d, i, _)| (d, i));
        let ones = scored[..self.k].iter().filter(|(_, _, l)| *l == Label::One).count();
        Ok(Label::from_bool(2 * ones > self.k))
    }

    fn describe(&self) -> String {
        format!("builtin:knn:{}", self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LabeledGraph;
    use crate::graph::VertexUniverse;

    fn dataset() -> Arc<LabeledDataset> {
        let u = Arc::new(VertexUniverse::anonymous(5).unwrap());
        let mk = |id: &str, edges: &[(usize, usize)], label| LabeledGraph {
            id: id.into(),
            graph: Graph::from_edges(Arc::clone(&u), edges.iter().copied()).unwrap(),
            label,
        };
        Arc::new(
            LabeledDataset::new(
                Arc::clone(&u),
                vec![
                    mk("a", &[(0, 1), (1, 2)], Label::One),
                    mk("b", &[(0, 1), (1, 2), (2, 3)], Label::One),
                    mk("c", &[(3, 4)], Label::Zero),
                    mk("d", &[], Label::Zero),
                ],
            )
            .unwrap(),
        )
    }

    #[test]
    fn one_nn_returns_reference_label() {
        let d = dataset();
        let knn = KnnEditDistanceClassifier::new(Arc::clone(&d), 1).unwrap();
        for it in d.items() {
            assert_eq!(knn.classify(&it.graph).unwrap(), it.label);
        }
    }

    #[test]
    fn three_nn_majority() {
        let d = dataset();
        let knn = KnnEditDistanceClassifier::new(Arc::clone(&d), 3).unwrap();
        let q = Graph::from_edges(Arc::clone(d.universe()), [(0, 1)]).unwrap();
        // distances: a=1, b=2, c=2, d=1 -> nearest a, d, then b (order tie-break) -> 2 ones of 3.
        assert_eq!(knn.classify(&q).unwrap(), Label::One);
    }

    #[test]
    fn k_validation() {
        let d = dataset();
        assert!(KnnEditDistanceClassifier::new(Arc::clone(&d), 2).is_err());
        assert!(KnnEditDistanceClassifier::new(Arc::clone(&d), 5).is_err());
        assert!(KnnEditDistanceClassifier::new(d, 0).is_err());
    }

    #[test]
    fn threshold() {
        let u = Arc::new(VertexUniverse::anonymous(6).unwrap());
        let g = Graph::from_indices(Arc::clone(&u), 0..12);
        assert_eq!(EdgeCountThreshold { threshold: 10 }.classify(&g).unwrap(), Label::One);
        let g = Graph::from_indices(u, 0..9);
        assert_eq!(EdgeCountThreshold { threshold: 10 }.classify(&g).unwrap(), Label::Zero);
    }
}
