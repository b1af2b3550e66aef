//! Experiment configuration, read from TOML or JSON.

use std::fs;
use std::path::Path;

use entroute_core::TopologyConfig;
use serde::{Deserialize, Serialize};

use crate::algorithm::Algorithm;
use crate::error::{Error, Result};

/// Topology parameters shared by every instance of an experiment.
/// The seed comes from the experiment's seed list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologySettings {
    pub area_side: f64,
    pub num_switches: u32,
    pub num_pairs: u32,
    pub avg_degree: f64,
    pub qubits_per_switch: u32,
    pub swap_prob: f64,
    pub single_link_target_prob: f64,
    pub cutoff_factor: f64,
    pub max_attempts: u32,
}

impl Default for TopologySettings {
    fn default() -> Self {
        let d = TopologyConfig::default();
        TopologySettings {
            area_side: d.area_side,
            num_switches: d.num_switches,
            num_pairs: d.num_pairs,
            avg_degree: d.avg_degree,
            qubits_per_switch: d.qubits_per_switch,
            swap_prob: d.swap_prob,
            single_link_target_prob: d.single_link_target_prob,
            cutoff_factor: d.cutoff_factor,
            max_attempts: d.max_attempts,
        }
    }
}

impl TopologySettings {
    pub fn with_seed(&self, seed: u64) -> TopologyConfig {
        TopologyConfig {
            area_side: self.area_side,
            num_switches: self.num_switches,
            num_pairs: self.num_pairs,
            avg_degree: self.avg_degree,
            qubits_per_switch: self.qubits_per_switch,
            swap_prob: self.swap_prob,
            single_link_target_prob: self.single_link_target_prob,
            cutoff_factor: self.cutoff_factor,
            max_attempts: self.max_attempts,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    #[value(name = "num_switches")]
    NumSwitches,
    #[value(name = "num_pairs")]
    NumPairs,
    #[value(name = "qubits")]
    Qubits,
    #[value(name = "swap_prob")]
    SwapProb,
    #[value(name = "avg_degree")]
    AvgDegree,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::NumSwitches => "num_switches",
            SweepParam::NumPairs => "num_pairs",
            SweepParam::Qubits => "qubits",
            SweepParam::SwapProb => "swap_prob",
            SweepParam::AvgDegree => "avg_degree",
        }
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(self, base: &TopologySettings, value: f64) -> Result<TopologySettings> {
        let integer = || {
            if value.fract() == 0.0 && value >= 0.0 && value <= f64::from(u32::MAX) {
                Ok(value as u32)
            } else {
                Err(Error::Config(format!(
                    "{} needs integer values, got {value}",
                    self.name()
                )))
            }
        };
        let mut s = base.clone();
        match self {
            SweepParam::NumSwitches => s.num_switches = integer()?,
            SweepParam::NumPairs => s.num_pairs = integer()?,
            SweepParam::Qubits => s.qubits_per_switch = integer()?,
            SweepParam::SwapProb => s.swap_prob = value,
            SweepParam::AvgDegree => s.avg_degree = value,
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub base: TopologySettings,
    pub sweep: Option<Sweep>,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<Algorithm>,
    /// Monte Carlo trials per plan; 0 skips simulation.
    pub mc_trials: u64,
    /// Wall-clock timings make the CSV differ between runs, so they are opt-in.
    pub record_runtime: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            base: TopologySettings::default(),
            sweep: None,
            seeds: (0..5).collect(),
            algorithms: Algorithm::ALL.to_vec(),
            mc_trials: 0,
            record_runtime: false,
        }
    }
}

/// One point of the sweep: its label and the topology settings it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub param: &'static str,
    pub value: Option<f64>,
    pub settings: TopologySettings,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads `.json` files as JSON and anything else as TOML.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    /// Sweep points in ascending value order, each validated.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        let mut points = match &self.sweep {
            None => vec![SweepPoint {
                param: "none",
                value: None,
                settings: self.base.clone(),
            }],
            Some(sweep) => {
                if sweep.values.is_empty() {
                    return Err(Error::Config("sweep has no values".into()));
                }
                let mut values = sweep.values.clone();
                values.sort_by(f64::total_cmp);
                values.dedup();
                values
                    .into_iter()
                    .map(|v| {
                        Ok(SweepPoint {
                            param: sweep.param.name(),
                            value: Some(v),
                            settings: sweep.param.apply(&self.base, v)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        for p in &mut points {
            p.settings.with_seed(0).validate()?;
        }
        Ok(points)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("at least one algorithm is required".into()));
        }
        self.points().map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_with_defaults() {
        let c = ExperimentConfig::from_toml(
            r#"
            seeds = [1, 2]
            algorithms = ["multi_r", "fer"]
            [base]
            num_pairs = 10
            [sweep]
            param = "qubits"
            values = [4, 2]
            "#,
        )
        .unwrap();
        assert_eq!(c.base.num_pairs, 10);
        assert_eq!(c.base.num_switches, 50);
        let pts = c.points().unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].value, Some(2.0));
        assert_eq!(pts[1].settings.qubits_per_switch, 4);
        c.validate().unwrap();
    }

    #[test]
    fn json_matches_toml() {
        let j = ExperimentConfig::from_json(r#"{"seeds":[3],"mc_trials":10}"#).unwrap();
        let t = ExperimentConfig::from_toml("seeds = [3]\nmc_trials = 10\n").unwrap();
        assert_eq!(j, t);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        let c = ExperimentConfig::from_toml("[sweep]\nparam = \"num_pairs\"\nvalues = [1.5]").unwrap();
        assert_eq!(c.validate().unwrap_err().kind(), "config");
        let c = ExperimentConfig::from_toml("[sweep]\nparam = \"swap_prob\"\nvalues = [1.5]").unwrap();
        assert_eq!(c.validate().unwrap_err().kind(), "invalid-argument");
        let c = ExperimentConfig::from_toml("seeds = []").unwrap();
        assert!(c.validate().is_err());
    }
}
