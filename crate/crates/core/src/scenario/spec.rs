use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::entanglement_possible;
use crate::link::{noise_param, LinkSpec, UserEndpoint};
use crate::optimizer::{FluxMode, GaConfig, NetworkSpec};

use super::{presets, ScenarioError};

pub const DEFAULT_TAU: f64 = 1e-9;

fn default_tau() -> f64 {
    DEFAULT_TAU
}

/// Either noise parameters directly or the detector figures they come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LinkParams {
    Noise {
        y1: f64,
        y2: f64,
    },
    Detectors {
        eta1: f64,
        dark1: f64,
        eta2: f64,
        dark2: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_b: Option<String>,
    #[serde(flatten)]
    pub params: LinkParams,
}

impl LinkEntry {
    pub fn noise(name: &str, y1: f64, y2: f64) -> Self {
        Self {
            name: name.to_string(),
            user_a: None,
            user_b: None,
            params: LinkParams::Noise { y1, y2 },
        }
    }

    fn to_link(&self, tau: f64) -> Result<LinkSpec, ScenarioError> {
        let label_a = self
            .user_a
            .clone()
            .unwrap_or_else(|| format!("{}.a", self.name));
        let label_b = self
            .user_b
            .clone()
            .unwrap_or_else(|| format!("{}.b", self.name));
        let (a, b) = match self.params {
            LinkParams::Noise { y1, y2 } => (
                UserEndpoint::from_noise(label_a, y1, tau)?,
                UserEndpoint::from_noise(label_b, y2, tau)?,
            ),
            LinkParams::Detectors {
                eta1,
                dark1,
                eta2,
                dark2,
            } => (
                UserEndpoint::new(label_a, eta1, dark1)?,
                UserEndpoint::new(label_b, eta2, dark2)?,
            ),
        };
        Ok(LinkSpec::new(self.name.clone(), a, b)?)
    }

    /// `(y1, y2)` at coincidence window `tau`.
    pub fn noise_params(&self, tau: f64) -> Result<(f64, f64), ScenarioError> {
        if let LinkParams::Noise { y1, y2 } = self.params {
            return Ok((y1, y2));
        }
        let link = self.to_link(tau)?;
        Ok((
            noise_param(&link.user_a, tau).value(),
            noise_param(&link.user_b, tau).value(),
        ))
    }
}

/// Optional GA settings; anything left out keeps the library default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossover_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stall_generations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elite_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux_upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_generations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
}

impl GaOverrides {
    pub fn apply(&self, base: GaConfig) -> GaConfig {
        GaConfig {
            population_size: self.population_size.unwrap_or(base.population_size),
            crossover_fraction: self.crossover_fraction.unwrap_or(base.crossover_fraction),
            stall_generations: self.stall_generations.unwrap_or(base.stall_generations),
            elite_count: self.elite_count.unwrap_or(base.elite_count),
            mutation_rate: self.mutation_rate.or(base.mutation_rate),
            flux_upper: self.flux_upper.or(base.flux_upper),
            rng_seed: self.seed.unwrap_or(base.rng_seed),
            max_generations: self.max_generations.unwrap_or(base.max_generations),
            independent_runs: self.runs.unwrap_or(base.independent_runs),
        }
    }

    fn is_empty(&self) -> bool {
        self == &Self::default()
    }
}

/// A network plus the channel counts to sweep and the optimizer settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default = "default_tau")]
    pub tau: f64,
    pub f_min: f64,
    pub k_list: Vec<usize>,
    #[serde(default, skip_serializing_if = "GaOverrides::is_empty")]
    pub ga: GaOverrides,
    #[serde(rename = "link")]
    pub links: Vec<LinkEntry>,
}

impl ScenarioSpec {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let spec: Self = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario specs always serialize")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |field: &str, message: String| {
            Err(ScenarioError::Invalid {
                field: field.to_string(),
                message,
            })
        };
        if self.name.trim().is_empty() {
            return invalid("name", "must not be empty".into());
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return invalid("tau", format!("{} must be positive", self.tau));
        }
        if !(0.0..=1.0).contains(&self.f_min) {
            return invalid("f_min", format!("{} outside [0, 1]", self.f_min));
        }
        if self.k_list.is_empty() {
            return invalid("k_list", "must not be empty".into());
        }
        if self.k_list[0] == 0 || self.k_list.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("k_list", "must be positive and strictly ascending".into());
        }
        if self.links.is_empty() {
            return invalid("link", "at least one link is required".into());
        }
        let mut names = HashSet::new();
        for entry in &self.links {
            if !names.insert(entry.name.as_str()) {
                return invalid("link.name", format!("duplicate link {:?}", entry.name));
            }
            let field = |f: &str| format!("link {:?}: {f}", entry.name);
            match entry.params {
                LinkParams::Noise { y1, y2 } => {
                    for (f, y) in [("y1", y1), ("y2", y2)] {
                        if !y.is_finite() || y < 0.0 {
                            return invalid(
                                &field(f),
                                format!("noise parameter {y} must be non-negative"),
                            );
                        }
                    }
                }
                LinkParams::Detectors {
                    eta1,
                    dark1,
                    eta2,
                    dark2,
                } => {
                    for (f, eta) in [("eta1", eta1), ("eta2", eta2)] {
                        if !(eta > 0.0 && eta <= 1.0) {
                            return invalid(&field(f), format!("efficiency {eta} outside (0, 1]"));
                        }
                    }
                    for (f, d) in [("dark1", dark1), ("dark2", dark2)] {
                        if !d.is_finite() || d < 0.0 {
                            return invalid(
                                &field(f),
                                format!("dark rate {d} must be non-negative"),
                            );
                        }
                    }
                }
            }
            let (y1, y2) = entry.noise_params(self.tau)?;
            if !entanglement_possible(y1, y2) {
                return Err(ScenarioError::Unentangleable(entry.name.clone()));
            }
        }
        Ok(())
    }

    pub fn network(&self, channels: usize) -> Result<NetworkSpec, ScenarioError> {
        let links = self
            .links
            .iter()
            .map(|e| e.to_link(self.tau))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(NetworkSpec::new(
            links,
            channels,
            self.tau,
            self.f_min,
            FluxMode::Uniform,
        )?)
    }

    pub fn ga_config(&self) -> GaConfig {
        self.ga.apply(GaConfig::default())
    }
}

/// Loads a built-in preset by name, otherwise reads a scenario file.
pub fn load_scenario(source: &str) -> Result<ScenarioSpec, ScenarioError> {
    if let Some(spec) = presets::preset(source) {
        return Ok(spec);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(ScenarioError::UnknownScenario(source.to_string()));
    }
    let text =
        std::fs::read_to_string(path).map_err(|e| ScenarioError::Io(format!("{source}: {e}")))?;
    ScenarioSpec::from_toml(&text)
}
