//! Run configuration shared by the command line and JSON config files.
//!
//! Every field is optional; a config file supplies defaults and explicit
//! flags override it field by field.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primitives::PrimitiveKind;
use crate::sim::{Discipline, Mode, SimConfig};
use crate::topology::{GraphFormat, NetParams, RouterAddr};
use crate::verify::Suite;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    /// Subcommand the config was recorded for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primitive: Option<PrimitiveKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<RouterAddr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink: Option<RouterAddr>,
    /// Number of broadcasts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perm_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perm_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discipline: Option<Discipline>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paper_exact: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no_delays: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<GraphFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: RunConfig) -> RunConfig {
        RunConfig {
            k: over.k.or(self.k),
            m: over.m.or(self.m),
            command: over.command.or(self.command),
            primitive: over.primitive.or(self.primitive),
            root: over.root.or(self.root),
            sink: over.sink.or(self.sink),
            count: over.count.or(self.count),
            perm_file: over.perm_file.or(self.perm_file),
            perm_seed: over.perm_seed.or(self.perm_seed),
            mode: over.mode.or(self.mode),
            discipline: over.discipline.or(self.discipline),
            seed: over.seed.or(self.seed),
            max_steps: over.max_steps.or(self.max_steps),
            paper_exact: over.paper_exact.or(self.paper_exact),
            no_delays: over.no_delays.or(self.no_delays),
            format: over.format.or(self.format),
            suite: over.suite.or(self.suite),
            out: over.out.or(self.out),
        }
    }

    pub fn params(&self) -> Result<NetParams> {
        match (self.k, self.m) {
            (Some(k), Some(m)) => NetParams::new(k, m),
            _ => Err(Error::InvalidParams("both -K and -M are required".into())),
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            mode: self.mode.unwrap_or(Mode::Strict),
            discipline: self.discipline.unwrap_or(Discipline::Lifo),
            seed: self.seed.unwrap_or(0),
            max_steps: self.max_steps,
        }
    }
}
