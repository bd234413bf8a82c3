use std::io::Write;
use std::path::Path;

use cfgraph::SearchConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Everything needed to rerun a command and get identical output bytes.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub engine_version: &'static str,
    pub command: &'static str,
    /// Arguments after the binary name, as given.
    pub arguments: Vec<String>,
    /// Base seed actually used, including one drawn when `--seed` was absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<SearchConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset_sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<String>,
}

impl RunManifest {
    pub fn new(command: &'static str) -> Self {
        Self {
            engine_version: env!("CARGO_PKG_VERSION"),
            command,
            arguments: std::env::args().skip(1).collect(),
            seed: None,
            config: None,
            dataset_sha256: None,
            oracle: None,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Returns `given`, or a fresh random seed announced on stderr.
pub fn resolve_seed(given: Option<u64>) -> u64 {
    given.unwrap_or_else(|| {
        let seed = rand::random::<u64>();
        eprintln!("seed: {seed}");
        seed
    })
}

/// Writes `text` to `out`, or stdout when absent.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::data(format!("stdout: {e}")))
        }
    }
}

pub fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    text.push('\n');
    emit(out, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_input() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
