//! Counterfactual graph search for black-box binary graph classifiers.
//!
//! All graphs live over one shared vertex universe (node identity
//! awareness). Given a classifier that can only be queried, the search
//! engine looks for a graph of minimum edit distance that the classifier
//! labels differently, spending at most a fixed number of queries per phase.
//! Collections of counterfactuals are then folded into local and global
//! edge- and vertex-level explanations.
//!
//! Module map:
//! - [`graph`]: vertex universe, bitset graphs, set algebra.
//! - [`dataset`]: labeled datasets, correlation thresholding, synthetic generation.
//! - [`oracle`]: budgeted call-counting sessions and classifier backends.
//! - [`protocol`]: newline-delimited JSON wire format for external classifiers.
//! - [`search`]: forward/backward searches, dataset baseline, full pipeline.
//! - [`whitebox`]: linear contrast classifier, geometric optimum, error metrics.
//! - [`explain`]: contrastive, local and global explanations.
//! - [`stats`]: percentile summaries.

pub mod dataset;
pub mod explain;
pub mod graph;
pub mod oracle;
pub mod protocol;
pub mod search;
pub mod stats;
pub mod whitebox;

use serde::{Deserialize, Serialize};

pub use dataset::{LabeledDataset, LabeledGraph};
pub use graph::{Edge, EdgeSet, Graph, GraphError, VertexSet, VertexUniverse};
pub use oracle::{Classifier, OracleError, OracleSession};
pub use search::{CounterfactualResult, SearchConfig, SearchMode, SearchStatus};

/// A binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Label {
    Zero,
    One,
}

impl Label {
    pub fn flip(self) -> Self {
        match self {
            Label::Zero => Label::One,
            Label::One => Label::Zero,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_bool(one: bool) -> Self {
        if one {
            Label::One
        } else {
            Label::Zero
        }
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        l as u8
    }
}

impl TryFrom<u8> for Label {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            0 => Ok(Label::Zero),
            1 => Ok(Label::One),
            other => Err(format!("label must be 0 or 1, got {other}")),
        }
    }
}

impl TryFrom<i64> for Label {
    type Error = String;

    fn try_from(v: i64) -> Result<Self, String> {
        u8::try_from(v)
            .map_err(|_| format!("label must be 0 or 1, got {v}"))
            .and_then(Label::try_from)
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", *self as u8)
    }
}
