//! Class-discrimination edge weights for the data-driven searches.

use crate::dataset::LabeledDataset;
use crate::graph::Graph;
use crate::Label;

/// Per-edge occurrence counts of a reference dataset, split by label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeStats {
    counts: [Vec<u32>; 2],
}

impl EdgeStats {
    pub fn from_dataset(d: &LabeledDataset) -> Self {
        let m = d.universe().pair_count();
        let mut counts = [vec![0u32; m], vec![0u32; m]];
        for it in d.items() {
            let row = &mut counts[it.label.index()];
            for idx in it.graph.indices() {
                row[idx] += 1;
            }
        }
        Self { counts }
    }

    pub fn pair_count(&self) -> usize {
        self.counts[0].len()
    }

    /// Graphs of class `label` containing the edge at `pair`.
    pub fn count(&self, label: Label, pair: usize) -> u32 {
        self.counts[label.index()][pair]
    }

    /// `|D⁺(e)|`: graphs containing `e` whose label agrees with `predicted`,
    /// the oracle's classification of the input graph.
    pub fn concordant(&self, predicted: Label, pair: usize) -> i64 {
        self.count(predicted, pair) as i64
    }

    /// `|D⁻(e)|`: graphs containing `e` with the opposite label.
    pub fn discordant(&self, predicted: Label, pair: usize) -> i64 {
        self.count(predicted.flip(), pair) as i64
    }

    /// Forward-phase weight: `D⁺ − D⁻` for edges of the input graph,
    /// `D⁻ − D⁺` for absent edges.
    pub fn forward_weight(&self, original: &Graph, predicted: Label, pair: usize) -> i64 {
        let balance = self.concordant(predicted, pair) - self.discordant(predicted, pair);
        if original.contains_index(pair) {
            balance
        } else {
            -balance
        }
    }

    /// Backward-phase weight over the symmetric difference: `D⁺ − D⁻` for
    /// edges in `E \ E_c`, `D⁻ − D⁺` for edges in `E_c \ E`. On the
    /// difference, membership in `E` alone decides the case, so this
    /// coincides with [`forward_weight`](Self::forward_weight).
    pub fn backward_weight(&self, original: &Graph, predicted: Label, pair: usize) -> i64 {
        self.forward_weight(original, predicted, pair)
    }
}
