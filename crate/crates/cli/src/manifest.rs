//! Run manifests.
//!
//! A manifest records everything needed to reproduce a training run: the
//! full config (including the master seed) plus the code version. The run
//! id is an FNV-1a hash of the semantic config fields only; `workers` and
//! `out` are excluded because they cannot change results. Feeding a
//! manifest back to `train --config` reruns the same run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub run_id: String,
    pub code_version: String,
    pub config: RunConfig,
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Run id for a training config: hash of the config with the
/// result-irrelevant fields pinned to fixed values.
pub fn run_id(config: &RunConfig) -> String {
    let semantic = RunConfig {
        workers: 0,
        out: String::new(),
        ..config.clone()
    };
    let canon = serde_json::to_string(&semantic).expect("config serializes");
    format!("{:016x}", fnv1a64(canon.as_bytes()))
}

/// Run id for a one-off command (evaluate, baseline): hash of a canonical
/// description of the inputs, so identical invocations stamp identical ids.
pub fn command_run_id(parts: &[&str]) -> String {
    format!("{:016x}", fnv1a64(parts.join("\x1f").as_bytes()))
}

impl Manifest {
    pub fn new(config: RunConfig) -> Manifest {
        Manifest {
            run_id: run_id(&config),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
    }
}
