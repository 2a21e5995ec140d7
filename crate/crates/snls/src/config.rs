//! Experiment configuration: one JSON document per experiment.

use crate::error::{LabError, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use snls_core::dynamics::{Adaptivity, SimConfig, Thresholds};
use snls_core::grid::GridSpec;
use snls_core::initial::InitialData;
use snls_core::noise::{CovarianceSpec, NoiseType};
use snls_core::theory::TheoryParams;
use std::path::Path;

/// Version of the configuration document.
pub const CONFIG_SCHEMA: u32 = 1;

fn config_schema() -> u32 {
    CONFIG_SCHEMA
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Physics {
    pub sigma: f64,
    pub noise_type: NoiseType,
    /// Accept σ outside the energy-subcritical range.
    #[serde(default)]
    pub conditional_regime: bool,
}

fn default_tail() -> f64 {
    0.1
}

fn default_stride() -> usize {
    1
}

fn fixed() -> Adaptivity {
    Adaptivity::Fixed
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSection {
    pub dt: f64,
    pub t_end: f64,
    pub blowup_gradient: f64,
    #[serde(default = "default_tail")]
    pub spectral_tail_limit: f64,
    #[serde(default = "fixed")]
    pub adaptivity: Adaptivity,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default)]
    pub refinement: u32,
    #[serde(default)]
    pub checkpoints: Vec<f64>,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Also integrate at half the step to bracket a detected blow-up time.
    #[serde(default)]
    pub bracket_blowup: bool,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSection {
    #[serde(default = "one")]
    pub n_traj: usize,
    #[serde(default)]
    pub master_seed: u64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            n_traj: 1,
            master_seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputSection {
    /// Directory for record files; not part of the configuration hash.
    #[serde(default)]
    pub dir: Option<String>,
    /// Write one JSON-lines record file per trajectory.
    #[serde(default)]
    pub records: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "config_schema")]
    pub schema_version: u32,
    pub name: String,
    pub grid: GridSpec,
    pub physics: Physics,
    #[serde(default)]
    pub covariance: Option<CovarianceSpec>,
    pub initial: InitialData,
    pub run: RunSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub theory: TheoryParams,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn sim_config(&self) -> SimConfig {
        let r = &self.run;
        SimConfig {
            sigma: self.physics.sigma,
            dt: r.dt,
            t_end: r.t_end,
            blowup_gradient: r.blowup_gradient,
            spectral_tail_limit: r.spectral_tail_limit,
            adaptivity: r.adaptivity.clone(),
            record_stride: r.record_stride,
            refinement: r.refinement,
            checkpoints: r.checkpoints.clone(),
            thresholds: r.thresholds.clone(),
        }
    }

    /// Checks every cross-field constraint that does not need the initial field.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA {
            return Err(LabError::Validation(format!(
                "config schema {} is not supported (expected {CONFIG_SCHEMA})",
                self.schema_version
            )));
        }
        self.grid.validate()?;
        let dim = self.dim();
        match snls_core::validate_nonlinearity(dim, self.physics.sigma) {
            Err(snls_core::SnlsError::EnergySupercritical { .. }) if self.physics.conditional_regime => {}
            r => r?,
        }
        self.initial.validate(dim)?;
        let sim = self.sim_config();
        sim.validate()?;
        if sim.dt >= sim.t_end {
            return Err(LabError::Validation(format!(
                "dt = {} must be below t_end = {}",
                sim.dt, sim.t_end
            )));
        }
        if self.physics.noise_type != NoiseType::None && self.covariance.is_none() {
            return Err(LabError::Validation("noisy runs need a covariance section".into()));
        }
        if self.ensemble.n_traj == 0 {
            return Err(LabError::Validation("n_traj must be at least 1".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| LabError::io(&path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form, output section excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputSection::default();
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
