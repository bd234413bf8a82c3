//! A transparent classifier with a computable optimal counterfactual.
//!
//! Each graph is embedded as the point `(x, y)`: the number of its edges
//! induced by two disjoint contrast vertex sets. A line in that plane
//! separates the classes. Because every edge edit inside one of the two sets
//! moves the point by exactly one unit along one axis (and edits elsewhere
//! do not move it at all), the minimum-edit counterfactual is the closest
//! integer point on the other side of the line in L1 distance. The
//! Euclidean foot of the perpendicular is also computed for reporting.

use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError, VertexSet, VertexUniverse};
use crate::oracle::{Classifier, OracleError};
use crate::search::CounterfactualResult;
use crate::Label;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WhiteboxError {
    #[error("contrast sets must be non-empty and disjoint")]
    BadContrastSets,
    #[error("separator parameters must be finite")]
    NonFinite,
    #[error("fitting needs both labels present")]
    SingleClass,
    #[error("no integer point on the counterfactual side is reachable; nearest point ({x}, {y})")]
    Infeasible { x: usize, y: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Point of the 2-D contrast embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddedPoint {
    /// Edges induced by the class-0 contrast set.
    pub x: usize,
    /// Edges induced by the class-1 contrast set.
    pub y: usize,
}

/// `(x, y)` induced edge counts of `g` for the two vertex sets.
pub fn embed_contrast(g: &Graph, x_set: &VertexSet, y_set: &VertexSet) -> Result<EmbeddedPoint, GraphError> {
    x_set.check_within(g.universe())?;
    y_set.check_within(g.universe())?;
    Ok(EmbeddedPoint {
        x: x_set.induced_edge_count(g),
        y: y_set.induced_edge_count(g),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Separator {
    /// `y = slope · x + intercept`.
    Line { slope: f64, intercept: f64 },
    /// `x = x_intercept`.
    Vertical { x_intercept: f64 },
}

/// Which side of the separator is class 1. For a vertical separator,
/// `Above` means `x > x_intercept`. Points on the line belong to class 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Above,
    Below,
}

impl Separator {
    pub fn line(slope: f64, intercept: f64) -> Self {
        Separator::Line { slope, intercept }
    }

    fn is_finite(&self) -> bool {
        match *self {
            Separator::Line { slope, intercept } => slope.is_finite() && intercept.is_finite(),
            Separator::Vertical { x_intercept } => x_intercept.is_finite(),
        }
    }

    /// Positive above the line (right of a vertical line), zero on it.
    pub fn signed(&self, x: f64, y: f64) -> f64 {
        match *self {
            Separator::Line { slope, intercept } => y - (slope * x + intercept),
            Separator::Vertical { x_intercept } => x - x_intercept,
        }
    }

    /// Foot of the perpendicular from `(x, y)` onto the separator.
    pub fn foot(&self, x: f64, y: f64) -> (f64, f64) {
        match *self {
            Separator::Line { slope: m, intercept: c } => {
                let xc = (x + m * y - m * c) / (m * m + 1.0);
                (xc, m * xc + c)
            }
            Separator::Vertical { x_intercept } => (x_intercept, y),
        }
    }
}

/// Label 1 on the `positive_side` of the separator (line included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearContrastClassifier {
    pub x_set: VertexSet,
    pub y_set: VertexSet,
    pub separator: Separator,
    pub positive_side: Side,
}

impl LinearContrastClassifier {
    pub fn new(
        x_set: VertexSet,
        y_set: VertexSet,
        separator: Separator,
        positive_side: Side,
    ) -> Result<Self, WhiteboxError> {
        if x_set.is_empty() || y_set.is_empty() || !x_set.is_disjoint(&y_set) {
            return Err(WhiteboxError::BadContrastSets);
        }
        if !separator.is_finite() {
            return Err(WhiteboxError::NonFinite);
        }
        Ok(Self {
            x_set,
            y_set,
            separator,
            positive_side,
        })
    }

    pub fn check_universe(&self, universe: &VertexUniverse) -> Result<(), WhiteboxError> {
        self.x_set.check_within(universe)?;
        self.y_set.check_within(universe)?;
        Ok(())
    }

    pub fn embed(&self, g: &Graph) -> Result<EmbeddedPoint, GraphError> {
        embed_contrast(g, &self.x_set, &self.y_set)
    }

    pub fn classify_point(&self, x: f64, y: f64) -> Label {
        let s = self.separator.signed(x, y);
        Label::from_bool(match self.positive_side {
            Side::Above => s >= 0.0,
            Side::Below => s <= 0.0,
        })
    }

    pub fn label_of(&self, g: &Graph) -> Result<Label, GraphError> {
        let p = self.embed(g)?;
        Ok(self.classify_point(p.x as f64, p.y as f64))
    }
}

impl Classifier for LinearContrastClassifier {
    fn classify(&self, g: &Graph) -> Result<Label, OracleError> {
        Ok(self.label_of(g)?)
    }

    fn describe(&self) -> String {
        format!(
            "builtin:linear(x_set={}, y_set={}, separator={:?}, positive={:?})",
            self.x_set, self.y_set, self.separator, self.positive_side
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedSeparator {
    pub separator: Separator,
    pub positive_side: Side,
    pub training_accuracy: f64,
}

const FIT_LAMBDA: f64 = 1e-3;
const FIT_MAX_NEWTON_STEPS: usize = 200;

/// Deterministic linear fit in the plane: L2-regularized squared-hinge loss
/// on standardized coordinates, minimized by Newton steps with backtracking
/// from the zero vector.
pub fn fit_linear_separator(points: &[(EmbeddedPoint, Label)]) -> Result<FittedSeparator, WhiteboxError> {
    if !points.iter().any(|p| p.1 == Label::One) || !points.iter().any(|p| p.1 == Label::Zero) {
        return Err(WhiteboxError::SingleClass);
    }
    let n = points.len() as f64;
    let coords = |f: fn(&EmbeddedPoint) -> usize| -> (f64, f64) {
        let mean = points.iter().map(|(p, _)| f(p) as f64).sum::<f64>() / n;
        let var = points.iter().map(|(p, _)| (f(p) as f64 - mean).powi(2)).sum::<f64>() / n;
        (mean, if var > 0.0 { var.sqrt() } else { 1.0 })
    };
    let (mx, sx) = coords(|p| p.x);
    let (my, sy) = coords(|p| p.y);
    let data: Vec<(Vector3<f64>, f64)> = points
        .iter()
        .map(|(p, l)| {
            let z = Vector3::new((p.x as f64 - mx) / sx, (p.y as f64 - my) / sy, 1.0);
            (z, if *l == Label::One { 1.0 } else { -1.0 })
        })
        .collect();

    let reg = Matrix3::from_diagonal(&Vector3::new(FIT_LAMBDA, FIT_LAMBDA, 0.0));
    let objective = |w: &Vector3<f64>| -> f64 {
        let loss: f64 = data.iter().map(|(z, t)| (1.0 - t * w.dot(z)).max(0.0).powi(2)).sum::<f64>() / n;
        0.5 * (reg * w).dot(w) + loss
    };

    let mut w = Vector3::zeros();
    for _ in 0..FIT_MAX_NEWTON_STEPS {
        let mut grad = reg * w;
        let mut hess = reg + Matrix3::from_diagonal(&Vector3::new(0.0, 0.0, 1e-12));
        for (z, t) in &data {
            let margin = 1.0 - t * w.dot(z);
            if margin > 0.0 {
                grad -= z * (2.0 * t * margin / n);
                hess += z * z.transpose() * (2.0 / n);
            }
        }
        if grad.norm() < 1e-12 {
            break;
        }
        let Some(step) = hess.lu().solve(&(-grad)) else { break };
        let f0 = objective(&w);
        let mut alpha = 1.0;
        while alpha > 1e-10 && objective(&(w + step * alpha)) > f0 + 1e-4 * alpha * grad.dot(&step) {
            alpha *= 0.5;
        }
        w += step * alpha;
        if (step * alpha).norm() < 1e-14 {
            break;
        }
    }

    // Back to raw coordinates: a·x + b·y + c0 >= 0 means class 1.
    let a = w[0] / sx;
    let b = w[1] / sy;
    let c0 = w[2] - w[0] * mx / sx - w[1] * my / sy;
    let (separator, positive_side) = if b.abs() > 1e-12 * (a.abs() + b.abs()) {
        (
            Separator::Line {
                slope: -a / b,
                intercept: -c0 / b,
            },
            if b > 0.0 { Side::Above } else { Side::Below },
        )
    } else if a != 0.0 {
        (
            Separator::Vertical { x_intercept: -c0 / a },
            if a > 0.0 { Side::Above } else { Side::Below },
        )
    } else {
        return Err(WhiteboxError::SingleClass);
    };
    let tmp = LinearContrastClassifier {
        x_set: VertexSet::default(),
        y_set: VertexSet::default(),
        separator,
        positive_side,
    };
    let correct = points
        .iter()
        .filter(|(p, l)| tmp.classify_point(p.x as f64, p.y as f64) == *l)
        .count();
    Ok(FittedSeparator {
        separator,
        positive_side,
        training_accuracy: correct as f64 / n,
    })
}

/// Euclidean foot of the perpendicular from `p` onto the separator.
pub fn geometric_optimum(p: EmbeddedPoint, separator: &Separator) -> (f64, f64) {
    separator.foot(p.x as f64, p.y as f64)
}

/// The minimum-edit counterfactual of a graph under the white-box.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalCounterfactual {
    pub original: EmbeddedPoint,
    pub foot: (f64, f64),
    pub target: EmbeddedPoint,
    /// `|Δx| + |Δy|`, which equals `d(E, E*)`.
    pub edits: usize,
    pub graph: Graph,
}

/// Closest integer point (L1) on the other side of the separator within the
/// feasible box; ties prefer fewer added edges, then smaller `(x, y)`.
pub fn optimal_target(
    wb: &LinearContrastClassifier,
    p: EmbeddedPoint,
    max_x: usize,
    max_y: usize,
) -> Result<EmbeddedPoint, WhiteboxError> {
    let want = wb.classify_point(p.x as f64, p.y as f64).flip();
    let mut best: Option<((usize, usize, usize, usize), EmbeddedPoint)> = None;
    for x in 0..=max_x {
        for y in 0..=max_y {
            if wb.classify_point(x as f64, y as f64) != want {
                continue;
            }
            let l1 = x.abs_diff(p.x) + y.abs_diff(p.y);
            let adds = x.saturating_sub(p.x) + y.saturating_sub(p.y);
            let key = (l1, adds, x, y);
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                best = Some((key, EmbeddedPoint { x, y }));
            }
        }
    }
    match best {
        Some((_, t)) => Ok(t),
        None => {
            let foot = geometric_optimum(p, &wb.separator);
            Err(WhiteboxError::Infeasible {
                x: foot.0.round().clamp(0.0, max_x as f64) as usize,
                y: foot.1.round().clamp(0.0, max_y as f64) as usize,
            })
        }
    }
}

fn move_count(g: &mut Graph, pairs: &[usize], from: usize, to: usize) {
    if to < from {
        let present: Vec<usize> = pairs.iter().copied().filter(|&i| g.contains_index(i)).collect();
        for &i in present.iter().take(from - to) {
            g.remove_index(i);
        }
    } else {
        let absent: Vec<usize> = pairs.iter().copied().filter(|&i| !g.contains_index(i)).collect();
        for &i in absent.iter().take(to - from) {
            g.insert_index(i);
        }
    }
}

/// Builds `E*`: the graph reaching [`optimal_target`] with edits confined
/// to the two induced subgraphs (lowest pair indices first).
pub fn realize_optimal_graph(e: &Graph, wb: &LinearContrastClassifier) -> Result<OptimalCounterfactual, WhiteboxError> {
    let universe = Arc::clone(e.universe());
    wb.check_universe(&universe)?;
    let p = wb.embed(e)?;
    let target = optimal_target(wb, p, wb.x_set.pair_capacity(), wb.y_set.pair_capacity())?;
    let mut g = e.clone();
    move_count(&mut g, &wb.x_set.induced_pairs(&universe), p.x, target.x);
    move_count(&mut g, &wb.y_set.induced_pairs(&universe), p.y, target.y);
    Ok(OptimalCounterfactual {
        original: p,
        foot: geometric_optimum(p, &wb.separator),
        target,
        edits: p.x.abs_diff(target.x) + p.y.abs_diff(target.y),
        graph: g,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhiteboxGraphReport {
    pub graph_id: Option<String>,
    pub point: EmbeddedPoint,
    pub foot: (f64, f64),
    pub optimal_point: EmbeddedPoint,
    pub counterfactual_point: EmbeddedPoint,
    /// `d(E, E*)`.
    pub optimal_distance: usize,
    /// `d(E, E_c)`.
    pub found_distance: usize,
    /// `d(E*, E_c)`.
    pub distance_to_optimal: usize,
    /// `d(E, E_c) − d(E, E*)`.
    pub excess: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhiteboxReport {
    /// Mean `d(E*, E_c)`.
    pub mean_distance_to_optimal: Option<f64>,
    /// Mean `d(E, E_c) − d(E, E*)`.
    pub mean_excess: Option<f64>,
    pub evaluated: usize,
    pub skipped: usize,
    pub per_graph: Vec<WhiteboxGraphReport>,
}

/// Compares search results against the white-box optimum. Results without
/// a counterfactual are skipped.
pub fn whitebox_error(
    cases: &[(&Graph, &CounterfactualResult)],
    wb: &LinearContrastClassifier,
) -> Result<WhiteboxReport, WhiteboxError> {
    let mut per_graph = Vec::new();
    let mut skipped = 0;
    for (e, result) in cases {
        let Some(cf) = result.counterfactual.as_ref() else {
            skipped += 1;
            continue;
        };
        let opt = realize_optimal_graph(e, wb)?;
        let found = e.edit_distance(cf)?;
        per_graph.push(WhiteboxGraphReport {
            graph_id: result.graph_id.clone(),
            point: opt.original,
            foot: opt.foot,
            optimal_point: opt.target,
            counterfactual_point: wb.embed(cf)?,
            optimal_distance: opt.edits,
            found_distance: found,
            distance_to_optimal: opt.graph.edit_distance(cf)?,
            excess: found as i64 - opt.edits as i64,
        });
    }
    let mean = |f: &dyn Fn(&WhiteboxGraphReport) -> f64| {
        (!per_graph.is_empty()).then(|| per_graph.iter().map(f).sum::<f64>() / per_graph.len() as f64)
    };
    Ok(WhiteboxReport {
        mean_distance_to_optimal: mean(&|r| r.distance_to_optimal as f64),
        mean_excess: mean(&|r| r.excess as f64),
        evaluated: per_graph.len(),
        skipped,
        per_graph,
    })
}
