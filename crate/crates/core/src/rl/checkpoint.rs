use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::policy::Policy;
use crate::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub episodes: usize,
    pub updates: usize,
    /// Curriculum level number reached.
    pub level: usize,
    /// True once the last level's promotion criterion was met.
    pub completed: bool,
    pub success_rate: f64,
}

/// A policy plus the bookkeeping needed to resume or audit it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyCheckpoint {
    pub version: u32,
    pub policy: Policy,
    pub meta: TrainingMeta,
}

impl PolicyCheckpoint {
    pub fn new(policy: Policy, meta: TrainingMeta) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            policy,
            meta,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Config(format!(
                "checkpoint version {} (expected {CHECKPOINT_VERSION})",
                self.version
            )));
        }
        if self.policy.options.is_empty() {
            return Err(Error::Config("checkpoint has an empty option set".into()));
        }
        if !self.policy.is_finite() {
            return Err(Error::Config("checkpoint has non-finite weights".into()));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self)?;
        fs::write(path, json).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })?;
        let c: Self = serde_json::from_str(&text)?;
        c.check()?;
        Ok(c)
    }
}
