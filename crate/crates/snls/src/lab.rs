//! A prepared experiment: grid, ground state and noise built once, then
//! shared read-only by every trajectory.

use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use snls_core::dynamics::{self, BlowupBracket, SimConfig, TrajectoryResult};
use snls_core::ensemble::{self, Comparison, EnsembleStats};
use snls_core::grid::{FieldState, Grid};
use snls_core::ground_state::{solve_ground_state, GroundState};
use snls_core::initial::InitialData;
use snls_core::noise::{CovarianceSpec, NoiseConstants, NoiseField, NoiseType};
use snls_core::observables::initial_stats;
use snls_core::rng::NoisePath;
use snls_core::scaling_index;
use snls_core::theory::{theory_report, TheoryInputs, TheoryReport};
use std::sync::Arc;

/// Version of the report, summary and record documents.
pub const OUTPUT_SCHEMA: u32 = 1;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "SNLS_WORKERS";

/// Caveats attached to every output.
pub const NOTES: [&str; 3] = [
    "blow-up is a numerical surrogate: the gradient threshold or the spectral tail limit was crossed",
    "additive noise uses independent real and imaginary parts, each with half the covariance",
    "the radonifying condition on φ is replaced by the discrete proxy of finitely many band-limited modes",
];

pub struct Lab {
    pub config: ExperimentConfig,
    pub hash: String,
    pub grid: Arc<Grid>,
    pub ground_state: Option<GroundState>,
    pub noise: NoiseField,
    pub sim: SimConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryDocument {
    pub schema_version: u32,
    pub config_hash: String,
    pub name: String,
    pub notes: Vec<String>,
    pub report: TheoryReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDocument {
    pub schema_version: u32,
    pub config_hash: String,
    pub name: String,
    pub index: u64,
    pub seed: u64,
    pub notes: Vec<String>,
    pub result: TrajectoryResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<BlowupBracket>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub schema_version: u32,
    pub config_hash: String,
    pub name: String,
    pub master_seed: u64,
    pub notes: Vec<String>,
    pub stats: EnsembleStats,
    pub theory_comparison: Vec<Comparison>,
    /// Some comparison came out violated.
    pub any_violated: bool,
}

impl Lab {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let grid = Grid::with_default_backend(config.grid.clone())?;
        let dim = config.dim();
        let sigma = config.physics.sigma;
        let ground_state = if dim <= 3 && snls_core::validate_nonlinearity(dim, sigma).is_ok() {
            Some(solve_ground_state(dim, sigma)?)
        } else if config.initial.needs_ground_state() {
            return Err(LabError::Validation(format!(
                "initial datum needs a ground state, unavailable for n = {dim}, σ = {sigma}"
            )));
        } else {
            None
        };
        let cov = config
            .covariance
            .clone()
            .unwrap_or(CovarianceSpec::FourierDiagonal { modes: Vec::new() });
        let noise = NoiseField::new(grid.clone(), config.physics.noise_type, &cov)?;
        let sim = config.sim_config();
        let hash = config.hash();
        let lab = Self {
            config,
            hash,
            grid,
            ground_state,
            noise,
            sim,
        };
        let mut u0 = lab.representative_initial()?;
        let g0 = u0.gradient_norm_sq().sqrt();
        if !(lab.sim.blowup_gradient > g0) {
            return Err(LabError::Validation(format!(
                "blowup_gradient = {} must exceed ‖∇u₀‖ = {g0}",
                lab.sim.blowup_gradient
            )));
        }
        Ok(lab)
    }

    pub fn path(&self, index: u64) -> NoisePath {
        NoisePath::new(self.config.ensemble.master_seed, index)
    }

    pub fn initial(&self, index: u64) -> Result<FieldState> {
        Ok(self
            .config
            .initial
            .sample(self.grid.clone(), self.ground_state.as_ref(), self.path(index))?)
    }

    /// The datum with the largest `β` for random families: `c Q` at the end of
    /// the range nearest to 1.
    pub fn representative_initial(&self) -> Result<FieldState> {
        let init = match &self.config.initial {
            InitialData::RandomScaledGroundState { lo, hi } => InitialData::ScaledGroundState {
                scale: if *hi <= 1.0 { *hi } else { *lo },
            },
            other => other.clone(),
        };
        Ok(init.sample(self.grid.clone(), self.ground_state.as_ref(), self.path(0))?)
    }

    pub fn noise_constants(&self) -> NoiseConstants {
        if self.config.physics.noise_type == NoiseType::None {
            NoiseConstants::zero()
        } else {
            self.noise.constants(self.config.dim(), self.config.physics.sigma)
        }
    }

    pub fn theory(&self) -> Result<TheoryReport> {
        let gs = self
            .ground_state
            .as_ref()
            .ok_or_else(|| LabError::Validation("theory needs a ground state".into()))?;
        let mut u0 = self.representative_initial()?;
        let alpha = scaling_index(self.config.dim(), self.config.physics.sigma);
        let initial = initial_stats(&mut u0, self.config.physics.sigma, alpha);
        let init = self.config.initial.clone();
        let moment = move |q: f64| init.mass_moment(q, gs).unwrap_or(f64::NAN);
        let inputs = TheoryInputs {
            gs,
            noise_type: self.config.physics.noise_type,
            constants: self.noise_constants(),
            initial,
            mass_moment: if self.config.initial.is_random() {
                Some(&moment)
            } else {
                None
            },
            params: self.config.theory.clone(),
        };
        Ok(theory_report(&inputs)?)
    }

    pub fn theory_document(&self) -> Result<TheoryDocument> {
        Ok(TheoryDocument {
            schema_version: OUTPUT_SCHEMA,
            config_hash: self.hash.clone(),
            name: self.config.name.clone(),
            notes: notes(),
            report: self.theory()?,
        })
    }

    pub fn trajectory(&self, index: u64) -> Result<TrajectoryResult> {
        let u0 = self.initial(index)?;
        Ok(dynamics::run_trajectory(
            &self.sim,
            u0,
            &self.noise,
            self.ground_state.as_ref(),
            self.path(index),
        )?)
    }

    pub fn trajectory_document(&self, index: u64) -> Result<TrajectoryDocument> {
        let result = self.trajectory(index)?;
        let bracket = if self.config.run.bracket_blowup && result.status.blowup_time().is_some() {
            let u0 = self.initial(index)?;
            dynamics::blowup_bracket(&self.sim, &u0, &self.noise, self.ground_state.as_ref(), self.path(index))?
        } else {
            None
        };
        Ok(TrajectoryDocument {
            schema_version: OUTPUT_SCHEMA,
            config_hash: self.hash.clone(),
            name: self.config.name.clone(),
            index,
            seed: self.config.ensemble.master_seed,
            notes: notes(),
            result,
            bracket,
        })
    }

    /// Runs all trajectories on `workers` threads; results come back in index order.
    pub fn run_all(&self, workers: usize) -> Result<Vec<TrajectoryResult>> {
        let n = self.config.ensemble.n_traj as u64;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| LabError::Runtime(e.to_string()))?;
        pool.install(|| (0..n).into_par_iter().map(|i| self.trajectory(i)).collect())
    }

    pub fn summarize(&self, records: &[TrajectoryResult]) -> Result<EnsembleSummary> {
        let stats = ensemble::summarize(records, self.sim.t_end, &self.sim.checkpoints);
        let theory_comparison = match &self.ground_state {
            Some(_) => {
                let report = self.theory()?;
                ensemble::compare_with_theory(&stats, &self.hash, &report, &self.hash)?
            }
            None => Vec::new(),
        };
        let any_violated = theory_comparison
            .iter()
            .any(|c| c.verdict == ensemble::Verdict::Violated);
        Ok(EnsembleSummary {
            schema_version: OUTPUT_SCHEMA,
            config_hash: self.hash.clone(),
            name: self.config.name.clone(),
            master_seed: self.config.ensemble.master_seed,
            notes: notes(),
            stats,
            theory_comparison,
            any_violated,
        })
    }

    pub fn ensemble(&self, workers: usize) -> Result<(EnsembleSummary, Vec<TrajectoryResult>)> {
        let records = self.run_all(workers)?;
        Ok((self.summarize(&records)?, records))
    }
}

fn notes() -> Vec<String> {
    NOTES.iter().map(|s| s.to_string()).collect()
}

/// Worker count from `SNLS_WORKERS`, else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}
