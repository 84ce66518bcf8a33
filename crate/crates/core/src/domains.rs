//! Search configuration: parameter grids per variable and for window bounds.
//!
//! ```json
//! {
//!   "time": {"lower": 0, "upper": 30, "step": 2},
//!   "variables": {"qGust": {"lower": -0.4, "upper": 0.3, "step": 0.05}},
//!   "overrides": {"p3": {"lower": 0, "upper": 1, "step": 0.1}},
//!   "workers": 4
//! }
//! ```
//!
//! A window bound takes the `time` grid, a predicate constant takes the grid
//! of its variable, and `overrides` replaces either by parameter name.

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::template::{DomainError, DomainKind, ParamDomain, ParamKind, Template};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("domain `{name}`: {source}")]
    Domain { name: String, source: DomainError },
    #[error("no domain for parameter `{param}` over variable `{var}`")]
    MissingVariable { param: String, var: String },
    #[error("no time domain for window bound `{0}`")]
    MissingTime(String),
    #[error("worker count must be at least 1")]
    Workers,
}

/// `{lower, upper, step}` as written in the config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub lower: f64,
    pub upper: f64,
    pub step: f64,
}

impl Range {
    pub fn new(lower: f64, upper: f64, step: f64) -> Self {
        Range { lower, upper, step }
    }

    fn domain(&self, name: &str, kind: DomainKind) -> Result<ParamDomain, ConfigError> {
        ParamDomain::new(self.lower, self.upper, self.step, kind)
            .map_err(|source| ConfigError::Domain { name: name.to_string(), source })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<Range>,
    #[serde(default)]
    pub variables: IndexMap<String, Range>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub overrides: IndexMap<String, Range>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl DomainConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: DomainConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    /// Checks every range eagerly so that errors surface before a search.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(t) = &self.time {
            t.domain("time", DomainKind::Time)?;
        }
        for (name, r) in self.variables.iter().chain(&self.overrides) {
            r.domain(name, DomainKind::Value)?;
        }
        if self.workers == Some(0) {
            return Err(ConfigError::Workers);
        }
        Ok(())
    }

    pub fn workers(&self) -> usize {
        self.workers.unwrap_or(1)
    }

    /// One domain per parameter of `tpl`, in parameter order.
    pub fn resolve(&self, tpl: &Template) -> Result<Vec<ParamDomain>, ConfigError> {
        tpl.params()
            .iter()
            .map(|p| {
                let kind = if p.kind.is_time() { DomainKind::Time } else { DomainKind::Value };
                if let Some(r) = self.overrides.get(&p.name) {
                    return r.domain(&p.name, kind);
                }
                match &p.kind {
                    ParamKind::Value { var } => self
                        .variables
                        .get(var)
                        .ok_or_else(|| ConfigError::MissingVariable { param: p.name.clone(), var: var.clone() })?
                        .domain(var, kind),
                    ParamKind::TimeLower | ParamKind::TimeUpper => {
                        self.time.as_ref().ok_or_else(|| ConfigError::MissingTime(p.name.clone()))?.domain("time", kind)
                    }
                }
            })
            .collect()
    }
}
