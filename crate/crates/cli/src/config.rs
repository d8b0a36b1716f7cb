//! Experiment configuration: one TOML document, flat sections per module.
//! Command-line flags are applied on top by `main`.

use std::path::PathBuf;

use ratchet_core::{Params, SimGrid, TruncationPolicy};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Model1,
    Model1Thinned,
    Model2,
    Model2Activepoint,
    Ode,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Gnuplot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TruncationKind {
    Floor,
    Window,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub gamma: f64,
    pub delta: f64,
    #[serde(default)]
    pub x0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSection {
    pub mode: TruncationKind,
    pub window_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSection {
    pub z_max: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub replicates: usize,
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_grid: Option<Vec<f64>>,
    pub params: ParamsSection,
    pub grid: GridSection,
    pub truncation: TruncationSection,
    pub ode: OdeSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelKind::Model2,
            replicates: 200,
            output_dir: PathBuf::from("ratchet-out"),
            formats: vec![Format::Csv, Format::Json],
            delta_grid: None,
            params: ParamsSection {
                gamma: 0.5,
                delta: 1.0,
                x0: 0.0,
            },
            grid: GridSection {
                dt: SimGrid::DEFAULT_DT,
                horizon: 2000.0,
                seed: 1,
            },
            truncation: TruncationSection {
                mode: TruncationKind::Window,
                window_factor: 30.0,
            },
            ode: OdeSection {
                z_max: 1e4,
                tol: 1e-12,
            },
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn core_params(&self) -> Result<Params, String> {
        let p = &self.params;
        Params::new(p.gamma, p.delta, p.x0).map_err(|e| e.to_string())
    }

    pub fn core_grid(&self) -> Result<SimGrid, String> {
        let g = &self.grid;
        SimGrid::new(g.dt, g.horizon, g.seed).map_err(|e| e.to_string())
    }

    pub fn policy(&self) -> Result<TruncationPolicy, String> {
        match self.truncation.mode {
            TruncationKind::Floor => Ok(TruncationPolicy::floor()),
            TruncationKind::Window => {
                TruncationPolicy::window(self.truncation.window_factor).map_err(|e| e.to_string())
            }
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.replicates < 1 {
            return Err("replicates must be >= 1".into());
        }
        if self.formats.is_empty() {
            return Err("at least one output format is required".into());
        }
        match (&self.delta_grid, self.model) {
            (None, ModelKind::Compare) => return Err("model = compare needs delta_grid".into()),
            (Some(_), m) if m != ModelKind::Compare => {
                return Err("delta_grid is only valid with model = compare".into())
            }
            (Some(g), _) => {
                if g.is_empty() {
                    return Err("delta_grid must not be empty".into());
                }
                for &d in g {
                    Params::at_origin(self.params.gamma, d).map_err(|e| e.to_string())?;
                }
            }
            _ => {}
        }
        if self.model == ModelKind::Compare && self.replicates < 2 {
            return Err("compare needs at least 2 replicates".into());
        }
        self.core_params()?;
        self.core_grid()?;
        self.policy()?;
        if !(self.ode.z_max.is_finite() && self.ode.z_max > 0.0 && self.ode.tol >= 1e-12) {
            return Err("ode.z_max must be > 0 and ode.tol >= 1e-12".into());
        }
        Ok(())
    }
}
