use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Record of one invocation: what ran, with which settings, on which inputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: BTreeMap<String, String>,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: Option<String>,
    pub exit_code: Option<i32>,
}

pub fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn start(command: &str) -> Self {
        Self {
            command: command.to_string(),
            config: serde_json::Value::Null,
            inputs: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: now(),
            finished_at: None,
            exit_code: None,
        }
    }

    pub fn input(&mut self, name: &str, digest: String) {
        self.inputs.insert(name.to_string(), digest);
    }

    /// Writes to `path`, or as one JSON line on stderr.
    pub fn emit(mut self, exit_code: i32, path: Option<&Path>) -> Result<()> {
        self.finished_at = Some(now());
        self.exit_code = Some(exit_code);
        let text = c3gen_core::canonical::to_string(&self).context("serializing run manifest")?;
        match path {
            Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing manifest {}", p.display())),
            None => {
                eprintln!("{text}");
                Ok(())
            }
        }
    }
}
