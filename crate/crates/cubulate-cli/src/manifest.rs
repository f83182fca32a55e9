//! Run manifests: everything needed to reproduce a run, serialized
//! deterministically.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

/// Bumped whenever a field is added, removed or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Assertion { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub toolkit_version: String,
    pub subcommand: String,
    /// File name of the presentation, without its directory.
    pub presentation: Option<String>,
    pub presentation_sha256: Option<String>,
    pub seed: Option<u64>,
    pub flags: BTreeMap<String, Value>,
    pub stats: BTreeMap<String, Value>,
    pub assertions: Vec<Assertion>,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            presentation: None,
            presentation_sha256: None,
            seed: None,
            flags: BTreeMap::new(),
            stats: BTreeMap::new(),
            assertions: Vec::new(),
        }
    }

    pub fn with_presentation(mut self, name: &str, text: &str) -> Self {
        self.presentation = Some(name.to_string());
        self.presentation_sha256 = Some(sha256_hex(text.as_bytes()));
        self
    }

    pub fn flag(&mut self, key: &str, value: impl Serialize) {
        self.flags.insert(key.to_string(), serde_json::to_value(value).expect("flag serializes"));
    }

    pub fn stat(&mut self, key: &str, value: impl Serialize) {
        self.stats.insert(key.to_string(), serde_json::to_value(value).expect("stat serializes"));
    }

    pub fn assert(&mut self, a: Assertion) {
        self.assertions.push(a);
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// Pretty JSON with a trailing newline. Maps are ordered, so equal
    /// manifests give equal bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
