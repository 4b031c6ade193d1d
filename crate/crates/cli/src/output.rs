//! Versioned JSON output files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const TOOL: &str = "itpack";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const PACKING_FORMAT: &str = "itpack-packing/1";
pub const CLIQUES_FORMAT: &str = "itpack-cliques/1";
pub const COLORINGS_FORMAT: &str = "itpack-colorings/1";

/// Common header of every result file.
#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, B: Serialize> {
    format: &'static str,
    tool: &'static str,
    version: &'static str,
    prng: &'static str,
    command: &'static str,
    config: &'a C,
    seed: u64,
    #[serde(flatten)]
    body: B,
}

impl<'a, C: Serialize, B: Serialize> Envelope<'a, C, B> {
    pub fn new(format: &'static str, command: &'static str, config: &'a C, seed: u64, body: B) -> Self {
        Self { format, tool: TOOL, version: VERSION, prng: itpack::PRNG_NAME, command, config, seed, body }
    }
}

/// Compact JSON with a trailing newline, to `path` or stdout.
pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string(value).expect("output types serialize");
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::invalid(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::invalid(e.to_string())),
    }
}

#[derive(Deserialize)]
struct PackingFile {
    #[serde(default)]
    format: Option<String>,
    transversals: Vec<Vec<u32>>,
}

/// Transversal rows of a packing file.
pub fn read_packing(bytes: &[u8]) -> Result<Vec<Vec<u32>>, String> {
    let file: PackingFile = serde_json::from_slice(bytes).map_err(|e| e.to_string())?;
    match file.format.as_deref() {
        None | Some(PACKING_FORMAT) => Ok(file.transversals),
        Some(other) => Err(format!("unsupported format {other:?}")),
    }
}
