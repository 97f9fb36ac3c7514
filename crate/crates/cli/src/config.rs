//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use interconnect_core::heatwave::{FunctionSpec, InterconnectSpec, PipelineTolerances};
use interconnect_core::TimeGrid;
use serde::{Deserialize, Serialize};

use crate::CliError;

fn default_modes() -> usize {
    8
}

fn default_grid() -> usize {
    1000
}

fn default_horizon() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Functions {
    #[serde(default = "FunctionSpec::zero")]
    pub b1: FunctionSpec,
    #[serde(default = "FunctionSpec::zero")]
    pub b2: FunctionSpec,
    #[serde(default = "FunctionSpec::zero")]
    pub c1: FunctionSpec,
    #[serde(default = "FunctionSpec::zero")]
    pub c2: FunctionSpec,
    #[serde(default = "FunctionSpec::zero")]
    pub phi0: FunctionSpec,
    #[serde(default = "FunctionSpec::zero")]
    pub psi0: FunctionSpec,
    #[serde(default = "FunctionSpec::zero")]
    pub psi1: FunctionSpec,
}

impl Default for Functions {
    fn default() -> Self {
        Self {
            b1: FunctionSpec::zero(),
            b2: FunctionSpec::zero(),
            c1: FunctionSpec::zero(),
            c2: FunctionSpec::zero(),
            phi0: FunctionSpec::zero(),
            psi0: FunctionSpec::zero(),
            psi1: FunctionSpec::zero(),
        }
    }
}

/// An explicit exponential family `{w_k e^{r_k t}}` for `analyze`, instead of the heat family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub weights: Vec<f64>,
    pub rates: Vec<f64>,
    #[serde(default)]
    pub constant: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisConfig {
    /// Initial value of the synthesized control.
    #[serde(default)]
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: String,
    #[serde(default = "default_modes")]
    pub modes: usize,
    /// Number of grid intervals.
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub functions: Functions,
    #[serde(default)]
    pub tolerances: PipelineTolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthesis: Option<SynthesisConfig>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub modes: Option<usize>,
    pub grid: Option<usize>,
    pub horizon: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(n) = o.modes {
            self.modes = n;
        }
        if let Some(m) = o.grid {
            self.grid = m;
        }
        if let Some(t) = o.horizon {
            self.horizon = t;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.modes == 0 {
            return Err(CliError::Config("modes must be positive".into()));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(CliError::Config(format!(
                "horizon must be positive and finite, got {}",
                self.horizon
            )));
        }
        self.time_grid()?;
        let f = &self.functions;
        for (name, spec) in [
            ("b1", &f.b1),
            ("b2", &f.b2),
            ("c1", &f.c1),
            ("c2", &f.c2),
            ("phi0", &f.phi0),
            ("psi0", &f.psi0),
            ("psi1", &f.psi1),
        ] {
            spec.validate()
                .map_err(|e| CliError::Config(format!("functions.{name}: {e}")))?;
        }
        if let Some(family) = &self.family {
            if family.weights.len() != family.rates.len() {
                return Err(CliError::Config(format!(
                    "family has {} weights but {} rates",
                    family.weights.len(),
                    family.rates.len()
                )));
            }
            if family
                .weights
                .iter()
                .chain(&family.rates)
                .any(|v| !v.is_finite())
            {
                return Err(CliError::Config("family entries must be finite".into()));
            }
        }
        if let Some(s) = &self.synthesis {
            if !s.alpha.is_finite() {
                return Err(CliError::Config("synthesis.alpha must be finite".into()));
            }
        }
        self.interconnect_spec()?
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn time_grid(&self) -> Result<TimeGrid, CliError> {
        TimeGrid::new(self.horizon, self.grid).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn interconnect_spec(&self) -> Result<InterconnectSpec, CliError> {
        let f = self.functions.clone();
        Ok(InterconnectSpec {
            b1: f.b1,
            b2: f.b2,
            c1: f.c1,
            c2: f.c2,
            phi0: f.phi0,
            psi0: f.psi0,
            psi1: f.psi1,
            modes: self.modes,
            grid: self.time_grid()?,
            tolerances: self.tolerances,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}
