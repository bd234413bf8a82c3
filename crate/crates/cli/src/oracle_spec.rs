//! `--oracle` specifications.

use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use cfgraph::oracle::{EdgeCountThreshold, ExternalOptions, ExternalOracle, KnnEditDistanceClassifier};
use cfgraph::whitebox::{LinearContrastClassifier, Separator, Side};
use cfgraph::{Classifier, LabeledDataset, VertexSet};

use crate::error::{CliError, ErrorKind};

pub const SPEC_HELP: &str = "builtin:threshold:T | builtin:knn[:K] | builtin:linear:XSET:YSET:SLOPE:INTERCEPT[:above|below] | exec:COMMAND | tcp:HOST:PORT";

#[derive(Debug, Clone, PartialEq)]
pub enum OracleSpec {
    /// Label 1 iff `|E| >= T`.
    Threshold(usize),
    /// k-nearest neighbours by edit distance over the loaded dataset.
    Knn(usize),
    Linear(LinearContrastClassifier),
    Exec(String),
    Tcp(String),
}

impl FromStr for OracleSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(cmd) = s.strip_prefix("exec:") {
            if cmd.trim().is_empty() {
                return Err("exec: needs a command".into());
            }
            return Ok(OracleSpec::Exec(cmd.to_string()));
        }
        if let Some(addr) = s.strip_prefix("tcp:") {
            if !addr.contains(':') {
                return Err(format!("tcp address {addr:?} needs HOST:PORT"));
            }
            return Ok(OracleSpec::Tcp(addr.to_string()));
        }
        let parts: Vec<&str> = s.split(':').collect();
        let num = |v: &str, what: &str| v.parse::<usize>().map_err(|_| format!("bad {what} {v:?}"));
        match parts.as_slice() {
            ["builtin", "threshold", t] => Ok(OracleSpec::Threshold(num(t, "threshold")?)),
            ["builtin", "knn"] => Ok(OracleSpec::Knn(5)),
            ["builtin", "knn", k] => Ok(OracleSpec::Knn(num(k, "k")?)),
            ["builtin", "linear", x, y, m, c, rest @ ..] if rest.len() <= 1 => {
                let set = |v: &str| VertexSet::parse(v).map_err(|e| e.to_string());
                let float = |v: &str| v.parse::<f64>().map_err(|_| format!("bad number {v:?}"));
                let side = match rest.first() {
                    None | Some(&"above") => Side::Above,
                    Some(&"below") => Side::Below,
                    Some(other) => return Err(format!("side must be above or below, got {other:?}")),
                };
                LinearContrastClassifier::new(set(x)?, set(y)?, Separator::line(float(m)?, float(c)?), side)
                    .map(OracleSpec::Linear)
                    .map_err(|e| e.to_string())
            }
            _ => Err(format!("unrecognized oracle {s:?}; expected {SPEC_HELP}")),
        }
    }
}

impl OracleSpec {
    pub fn needs_dataset(&self) -> bool {
        matches!(self, OracleSpec::Knn(_))
    }

    /// `dataset` backs `builtin:knn`; `n_vertices` sizes the external handshake.
    pub fn build(
        &self,
        dataset: Option<&Arc<LabeledDataset>>,
        n_vertices: usize,
        timeout: Duration,
    ) -> Result<Arc<dyn Classifier>, CliError> {
        let opts = ExternalOptions { timeout };
        Ok(match self {
            OracleSpec::Threshold(t) => Arc::new(EdgeCountThreshold { threshold: *t }),
            OracleSpec::Knn(k) => {
                let d = dataset.ok_or_else(|| CliError::usage("builtin:knn needs --dataset"))?;
                Arc::new(KnnEditDistanceClassifier::new(Arc::clone(d), *k)?)
            }
            OracleSpec::Linear(wb) => Arc::new(wb.clone()),
            OracleSpec::Exec(cmd) => Arc::new(ExternalOracle::spawn(cmd, n_vertices, opts)?),
            OracleSpec::Tcp(addr) => Arc::new(ExternalOracle::connect_tcp(addr, n_vertices, opts)?),
        })
    }
}

/// Rejects a linear oracle whose contrast sets fall outside `universe`.
pub fn check_linear(spec: &OracleSpec, universe: &cfgraph::VertexUniverse) -> Result<(), CliError> {
    if let OracleSpec::Linear(wb) = spec {
        wb.check_universe(universe)
            .map_err(|e| CliError::new(ErrorKind::Usage, e.to_string()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_form() {
        assert_eq!("builtin:threshold:10".parse(), Ok(OracleSpec::Threshold(10)));
        assert_eq!("builtin:knn".parse(), Ok(OracleSpec::Knn(5)));
        assert_eq!("builtin:knn:3".parse(), Ok(OracleSpec::Knn(3)));
        assert_eq!("exec:python shim.py --x".parse(), Ok(OracleSpec::Exec("python shim.py --x".into())));
        assert_eq!("tcp:127.0.0.1:9000".parse(), Ok(OracleSpec::Tcp("127.0.0.1:9000".into())));
        let Ok(OracleSpec::Linear(wb)) = "builtin:linear:4-7:0-3:1:-0.5:below".parse() else {
            panic!("linear spec")
        };
        assert_eq!(wb.separator, Separator::line(1.0, -0.5));
        assert_eq!(wb.positive_side, Side::Below);
        assert_eq!(wb.x_set.as_slice(), &[4, 5, 6, 7]);
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "builtin:threshold",
            "builtin:threshold:-1",
            "builtin:knn:x",
            "builtin:linear:0-3:0-3:1:0",
            "builtin:linear:0-1:2-3:1:0:left",
            "exec:",
            "tcp:localhost",
            "python",
        ] {
            assert!(bad.parse::<OracleSpec>().is_err(), "{bad}");
        }
    }
}
