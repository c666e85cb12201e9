//! The versioned JSON dataset format shared by every command.
//!
//! ```json
//! {"version": 1, "guesses": [0.5, 0.6, 0.9, 0.4], "labels": [1, 0, 1, 0]}
//! ```
//!
//! `guesses`, `labels` and `probs` are each optional; commands check for the
//! arrays they need. Arrays that are present must have equal length.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guesses: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
}

impl DatasetFile {
    pub fn new(guesses: Option<Vec<f64>>, labels: Option<Vec<u8>>, probs: Option<Vec<f64>>) -> Self {
        Self {
            version: SCHEMA_VERSION,
            guesses,
            labels,
            probs,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::schema(format!("{}: {e}", path.display())))?;
        let data: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::schema(format!("{}: {e}", path.display())))?;
        data.validate()
            .map_err(|msg| CliError::schema(format!("{}: {msg}", path.display())))?;
        Ok(data)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.version
            ));
        }
        let lengths: Vec<(&str, usize)> = [
            ("guesses", self.guesses.as_ref().map(Vec::len)),
            ("labels", self.labels.as_ref().map(Vec::len)),
            ("probs", self.probs.as_ref().map(Vec::len)),
        ]
        .into_iter()
        .filter_map(|(name, len)| len.map(|l| (name, l)))
        .collect();
        if let Some(&(first, len)) = lengths.first() {
            if let Some(&(other, other_len)) = lengths.iter().find(|(_, l)| *l != len) {
                return Err(format!(
                    "{first} has length {len} but {other} has length {other_len}"
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn require_guesses(&self) -> Result<&[f64], CliError> {
        self.guesses
            .as_deref()
            .ok_or_else(|| CliError::schema("dataset has no \"guesses\" array"))
    }

    pub fn require_labels(&self) -> Result<&[u8], CliError> {
        self.labels
            .as_deref()
            .ok_or_else(|| CliError::schema("dataset has no \"labels\" array"))
    }

    /// `probs` if present, otherwise `guesses` read as probabilities.
    pub fn require_probs(&self) -> Result<&[f64], CliError> {
        self.probs
            .as_deref()
            .or(self.guesses.as_deref())
            .ok_or_else(|| CliError::schema("dataset has neither \"probs\" nor \"guesses\""))
    }
}
