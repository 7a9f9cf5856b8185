//! TOML switch configuration.
//!
//! ```toml
//! allow_duplicate_types = false   # optional
//!
//! [links]
//! p = [0.7, 0.8, 0.6]             # one generation probability per link
//! labels = ["alice", "bob", "carol"]  # optional, one per link
//!
//! [[types]]
//! links = [0, 1]                  # 0-based link indices
//! q = 0.9
//!
//! [arrivals]
//! rates = [0.35]                  # one per type
//! distribution = "bernoulli"      # or "poisson"; default bernoulli
//! ```
//!
//! Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{ArrivalLaw, ArrivalSpec, Topology};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchConfig {
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_duplicate_types: bool,
    pub links: LinksSection,
    pub types: Vec<TypeSection>,
    pub arrivals: ArrivalsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinksSection {
    pub p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeSection {
    pub links: Vec<usize>,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrivalsSection {
    pub rates: Vec<f64>,
    #[serde(default)]
    pub distribution: ArrivalLaw,
}

impl SwitchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config {
            key: e
                .span()
                .map(|s| text[s].lines().next().unwrap_or("").trim().to_string())
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| "<root>".into()),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            key: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    pub fn from_parts(topology: &Topology, arrivals: &ArrivalSpec) -> Self {
        SwitchConfig {
            allow_duplicate_types: !topology.duplicate_types().is_empty(),
            links: LinksSection {
                p: topology.link_success().to_vec(),
                labels: topology.user_labels().map(|l| l.to_vec()),
            },
            types: (0..topology.num_types())
                .map(|i| TypeSection {
                    links: topology.type_links(i).to_vec(),
                    q: topology.swap_success()[i],
                })
                .collect(),
            arrivals: ArrivalsSection {
                rates: arrivals.rates().to_vec(),
                distribution: arrivals.law(),
            },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn topology(&self) -> Result<Topology> {
        let k = self.links.p.len();
        for (i, t) in self.types.iter().enumerate() {
            if t.links.is_empty() {
                return Err(config_err(format!("types[{i}].links"), "link set is empty"));
            }
            if let Some(j) = t.links.iter().find(|&&j| j >= k) {
                return Err(config_err(
                    format!("types[{i}].links"),
                    format!("link index {j} out of range (links.p has {k} entries)"),
                ));
            }
        }
        let topology = Topology::new(
            self.links.p.clone(),
            self.types.iter().map(|t| t.q).collect(),
            self.types.iter().map(|t| t.links.clone()).collect(),
        )
        .map_err(|e| config_err("links/types", e.to_string()))?;
        if !self.allow_duplicate_types {
            if let Some((a, b)) = topology.duplicate_types().first() {
                return Err(config_err(
                    format!("types[{b}]"),
                    format!("duplicates types[{a}]; set allow_duplicate_types = true to keep both"),
                ));
            }
        }
        match &self.links.labels {
            Some(labels) => topology
                .with_user_labels(labels.clone())
                .map_err(|e| config_err("links.labels", e.to_string())),
            None => Ok(topology),
        }
    }

    pub fn arrivals(&self) -> Result<ArrivalSpec> {
        if self.arrivals.rates.len() != self.types.len() {
            return Err(config_err(
                "arrivals.rates",
                format!("has {} entries but there are {} types", self.arrivals.rates.len(), self.types.len()),
            ));
        }
        ArrivalSpec::new(self.arrivals.rates.clone(), self.arrivals.distribution)
            .map_err(|e| config_err("arrivals.rates", e.to_string()))
    }
}

fn config_err(key: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}
