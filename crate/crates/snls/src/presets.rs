//! Named configurations covering each regime of the lab.

use crate::config::{EnsembleSection, ExperimentConfig, OutputSection, Physics, RunSection, CONFIG_SCHEMA};
use snls_core::dynamics::{Adaptivity, Thresholds};
use snls_core::grid::GridSpec;
use snls_core::initial::InitialData;
use snls_core::noise::{CovarianceSpec, NoiseType};
use snls_core::theory::TheoryParams;

pub const NAMES: [&str; 15] = [
    "det-critical-below",
    "det-critical-above",
    "mult-mass-check",
    "mult-mass-check-sigma3",
    "mult-intercritical-3d-cubic",
    "mult-critical-survival",
    "mult-survival-below-tstar",
    "mult-above-threshold",
    "mult-energy-drift",
    "blowup-mult",
    "add-mass-drift",
    "add-critical",
    "add-intercritical",
    "add-above-threshold",
    "blowup-add",
];

fn run(dt: f64, t_end: f64, blowup_gradient: f64) -> RunSection {
    RunSection {
        dt,
        t_end,
        blowup_gradient,
        spectral_tail_limit: 0.1,
        adaptivity: Adaptivity::Fixed,
        record_stride: 1,
        refinement: 0,
        checkpoints: Vec::new(),
        thresholds: Thresholds::default(),
        bracket_blowup: false,
    }
}

fn base(name: &str, grid: GridSpec, sigma: f64, noise_type: NoiseType, initial: InitialData, run: RunSection) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: CONFIG_SCHEMA,
        name: name.into(),
        grid,
        physics: Physics {
            sigma,
            noise_type,
            conditional_regime: false,
        },
        covariance: None,
        initial,
        run,
        ensemble: EnsembleSection::default(),
        theory: TheoryParams::default(),
        output: OutputSection::default(),
    }
}

/// Smooth band-limited covariance `λ_ξ = strength · exp(-ξ²/(2 width²))`.
fn smooth(strength: f64, width: f64, cutoff: f64) -> Option<CovarianceSpec> {
    Some(CovarianceSpec::GaussianSpectrum { width, strength, cutoff })
}

fn ensemble(n_traj: usize, master_seed: u64) -> EnsembleSection {
    EnsembleSection { n_traj, master_seed }
}

fn cube(dim: usize, l: f64, n: usize, dealias: f64) -> GridSpec {
    GridSpec::cube(dim, l, n).with_dealias(dealias)
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let q = |scale: f64| InitialData::ScaledGroundState { scale };
    let cfg = match name {
        "det-critical-below" => {
            let mut r = run(1e-3, 10.0, 50.0);
            r.record_stride = 100;
            base(
                name,
                cube(1, 40.0, 256, 1.0),
                2.0,
                NoiseType::None,
                InitialData::GroundStateMassFraction { fraction: 0.8 },
                r,
            )
        }
        "det-critical-above" => {
            let mut r = run(1e-3, 3.0, 25.0);
            r.record_stride = 10;
            r.adaptivity = Adaptivity::Halving {
                growth_factor: 1.05,
                dt_min: 1e-7,
            };
            r.bracket_blowup = true;
            base(name, cube(1, 20.0, 1024, 1.0), 2.0, NoiseType::None, q(1.1), r)
        }
        "mult-mass-check" | "mult-mass-check-sigma3" => {
            let sigma = if name == "mult-mass-check" { 2.0 } else { 3.0 };
            let mut r = run(1e-4, 10.0, 50.0);
            r.record_stride = 1000;
            let mut c = base(name, cube(1, 40.0, 256, 1.0), sigma, NoiseType::Multiplicative, q(0.7), r);
            c.covariance = smooth(0.1, 1.0, 1.5);
            c
        }
        "mult-intercritical-3d-cubic" => {
            let mut c = base(name, cube(3, 20.0, 32, 2.0 / 3.0), 1.0, NoiseType::Multiplicative, q(0.5), run(1e-3, 1.0, 50.0));
            c.covariance = smooth(0.05, 0.5, 1.0);
            c
        }
        "mult-critical-survival" => {
            let mut r = run(2e-3, 5.0, 50.0);
            r.record_stride = 50;
            let mut c = base(
                name,
                cube(1, 40.0, 256, 1.0),
                2.0,
                NoiseType::Multiplicative,
                InitialData::GroundStateMassFraction { fraction: 0.8 },
                r,
            );
            c.covariance = smooth(0.05, 1.0, 1.5);
            c.ensemble = ensemble(200, 11);
            c
        }
        "mult-survival-below-tstar" => {
            let mut r = run(2e-3, 5.0, 30.0);
            r.record_stride = 50;
            r.thresholds.delta = Some(0.95);
            let mut c = base(name, cube(1, 40.0, 256, 1.0), 3.0, NoiseType::Multiplicative, q(0.9), r);
            c.covariance = smooth(0.16, 0.3, 0.8);
            c.ensemble = ensemble(100, 12);
            c
        }
        "mult-above-threshold" => {
            let mut c = base(
                name,
                cube(1, 40.0, 256, 2.0 / 3.0),
                3.0,
                NoiseType::Multiplicative,
                InitialData::BoostedGroundState {
                    scale: 0.9,
                    velocity: vec![2.0],
                },
                run(1e-3, 1.0, 50.0),
            );
            c.covariance = smooth(0.01, 0.5, 1.0);
            c
        }
        "mult-energy-drift" => {
            let mut r = run(1e-3, 1.0, 50.0);
            r.record_stride = 100;
            r.checkpoints = vec![0.25, 0.5, 1.0];
            let mut c = base(
                name,
                cube(1, 40.0, 256, 1.0),
                1.0,
                NoiseType::Multiplicative,
                InitialData::Gaussian {
                    amplitude: 1.0,
                    width: 2.0,
                    chirp: 0.2,
                },
                r,
            );
            c.covariance = smooth(0.2, 1.0, 2.0);
            c.ensemble = ensemble(1000, 13);
            c
        }
        "blowup-mult" => {
            let mut r = run(1e-3, 6.0, 8.0);
            r.record_stride = 20;
            r.adaptivity = Adaptivity::Halving {
                growth_factor: 1.05,
                dt_min: 1e-7,
            };
            let mut c = base(name, cube(1, 30.0, 512, 1.0), 3.0, NoiseType::Multiplicative, q(1.05), r);
            c.covariance = smooth(5e-5, 0.3, 0.8);
            c.ensemble = ensemble(100, 14);
            c.theory = TheoryParams {
                t: Some(1.5),
                eps: Some(0.02),
                ..TheoryParams::default()
            };
            c
        }
        "add-mass-drift" => {
            let mut r = run(1e-2, 0.5, 50.0);
            r.record_stride = 10;
            r.checkpoints = vec![0.1, 0.2, 0.3, 0.4, 0.5];
            let mut c = base(name, cube(1, 40.0, 128, 2.0 / 3.0), 2.0, NoiseType::Additive, InitialData::Zero, r);
            c.covariance = smooth(0.3, 1.0, 2.0);
            c.ensemble = ensemble(1000, 15);
            c
        }
        "add-critical" => {
            let mut r = run(2e-3, 2.0, 50.0);
            r.record_stride = 50;
            r.thresholds.delta = Some(0.95);
            r.checkpoints = vec![1.0, 2.0];
            let mut c = base(
                name,
                cube(1, 40.0, 256, 1.0),
                2.0,
                NoiseType::Additive,
                InitialData::GroundStateMassFraction { fraction: 0.5 },
                r,
            );
            c.covariance = smooth(0.02, 0.5, 1.0);
            c.ensemble = ensemble(100, 16);
            c.theory = TheoryParams {
                t: Some(2.0),
                delta: Some(0.95),
                ..TheoryParams::default()
            };
            c
        }
        "add-intercritical" => {
            let mut r = run(2e-3, 1.0, 30.0);
            r.record_stride = 50;
            let mut c = base(name, cube(1, 40.0, 256, 1.0), 3.0, NoiseType::Additive, q(0.4), r);
            c.covariance = smooth(1e-3, 0.5, 1.0);
            c.ensemble = ensemble(100, 17);
            c
        }
        "add-above-threshold" => {
            let mut c = base(name, cube(1, 40.0, 256, 1.0), 3.0, NoiseType::Additive, q(0.7), run(1e-3, 1.0, 30.0));
            c.covariance = smooth(0.01, 0.5, 1.0);
            c
        }
        "blowup-add" => {
            let mut r = run(1e-3, 6.0, 8.0);
            r.record_stride = 20;
            r.adaptivity = Adaptivity::Halving {
                growth_factor: 1.05,
                dt_min: 1e-7,
            };
            let mut c = base(name, cube(1, 30.0, 512, 1.0), 3.0, NoiseType::Additive, q(1.05), r);
            c.covariance = smooth(1e-7, 0.3, 0.8);
            c.ensemble = ensemble(20, 18);
            c.theory = TheoryParams {
                t: Some(1.5),
                eps: Some(0.01),
                ..TheoryParams::default()
            };
            c
        }
        _ => return None,
    };
    Some(cfg)
}
