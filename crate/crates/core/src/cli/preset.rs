//! The four reference experiments on the three-user switch: a stable and an
//! unstable arrival vector, and two sweeps of a common link probability.

use std::fmt;
use std::str::FromStr;

use crate::capacity::linear_grid;
use crate::config::{ArrivalsSection, LinksSection, SwitchConfig, TypeSection};
use crate::error::Error;
use crate::model::ArrivalLaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetName {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl PresetName {
    pub const ALL: [PresetName; 4] = [PresetName::Fig2, PresetName::Fig3, PresetName::Fig4, PresetName::Fig5];
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PresetName::Fig2 => "fig2",
            PresetName::Fig3 => "fig3",
            PresetName::Fig4 => "fig4",
            PresetName::Fig5 => "fig5",
        })
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.to_string() == s)
            .ok_or_else(|| Error::Argument(format!("unknown preset `{s}` (expected fig2, fig3, fig4 or fig5)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPreset {
    pub name: PresetName,
    /// For the sweeps this is the base instance; the grid overrides every `p_j`.
    pub config: SwitchConfig,
    pub horizon: u64,
    pub seeds: Vec<u64>,
    /// Common link probability values (sweep presets only).
    pub grid: Option<Vec<f64>>,
}

pub const FIG1_P: [f64; 3] = [0.7, 0.8, 0.6];
pub const FIG1_Q: [f64; 3] = [0.9, 0.8, 0.7];
pub const STABLE_RATES: [f64; 3] = [0.35, 0.2, 0.15];
pub const UNSTABLE_RATES: [f64; 3] = [0.45, 0.35, 0.25];
pub const DEFAULT_HORIZON: u64 = 1_000_000;

/// The three-user switch: type 1 joins users 1–2, type 2 users 2–3,
/// type 3 all three.
pub fn fig1_config(p: [f64; 3], rates: [f64; 3]) -> SwitchConfig {
    let links = [vec![0, 1], vec![1, 2], vec![0, 1, 2]];
    SwitchConfig {
        allow_duplicate_types: false,
        links: LinksSection {
            p: p.to_vec(),
            labels: None,
        },
        types: links
            .into_iter()
            .zip(FIG1_Q)
            .map(|(links, q)| TypeSection { links, q })
            .collect(),
        arrivals: ArrivalsSection {
            rates: rates.to_vec(),
            distribution: ArrivalLaw::Bernoulli,
        },
    }
}

pub fn preset(name: PresetName) -> ExperimentPreset {
    let (config, seeds, grid) = match name {
        PresetName::Fig2 => (fig1_config(FIG1_P, STABLE_RATES), vec![1, 2, 3, 4, 5], None),
        PresetName::Fig3 => (fig1_config(FIG1_P, UNSTABLE_RATES), vec![1, 2, 3, 4, 5], None),
        PresetName::Fig4 => (
            fig1_config(FIG1_P, STABLE_RATES),
            vec![1],
            Some(linear_grid(0.5, 1.0, 11)),
        ),
        PresetName::Fig5 => (
            fig1_config(FIG1_P, STABLE_RATES),
            vec![1],
            Some(linear_grid(0.75, 1.0, 11)),
        ),
    };
    ExperimentPreset {
        name,
        config,
        horizon: DEFAULT_HORIZON,
        seeds,
        grid,
    }
}
