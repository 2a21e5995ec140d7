use clap::{Args, Parser, Subcommand, ValueEnum};
use snls::config::ExperimentConfig;
use snls::error::{LabError, Result};
use snls::io;
use snls::lab::{default_workers, Lab, OUTPUT_SCHEMA, WORKERS_ENV};
use snls::presets;
use snls::verify;
use snls_core::ground_state::{solve_ground_state, GroundState};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "snls", version, about = "Stochastic focusing NLS simulator and verification lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Experiment configuration (JSON).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset; see `snls presets`.
    #[arg(long)]
    preset: Option<String>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Source {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(p), _) => ExperimentConfig::load(p)?,
            (None, Some(name)) => presets::preset(name)
                .ok_or_else(|| LabError::Validation(format!("unknown preset '{name}'")))?,
            (None, None) => return Err(LabError::Validation("pass --config FILE or --preset NAME".into())),
        };
        if let Some(s) = self.seed {
            cfg.ensemble.master_seed = s;
        }
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Quick,
    Statistical,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the ground state and print its constants.
    GroundState {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        sigma: f64,
        /// Write ground_state.json and profile.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate every closed-form bound for a configuration.
    Theory {
        #[command(flatten)]
        source: Source,
    },
    /// Integrate one trajectory.
    Simulate {
        #[command(flatten)]
        source: Source,
        /// Trajectory index within the ensemble.
        #[arg(long, default_value_t = 0)]
        index: u64,
        /// Write trajectory.jsonl and samples.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an ensemble and compare with theory.
    Ensemble {
        #[command(flatten)]
        source: Source,
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
        #[arg(long)]
        n_traj: Option<usize>,
        /// Write summary.json and per-trajectory records here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an invariant suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
        /// Also check a ground-state JSON file written by `ground-state --out`.
        #[arg(long)]
        ground_state: Option<PathBuf>,
    },
    /// List presets, or print one as a configuration file.
    Presets {
        name: Option<String>,
    },
}

fn mkdir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))
}

/// Writes to stdout; a closed pipe (`snls ... | head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(LabError::io("<stdout>", e)),
        _ => Ok(()),
    }
}

fn print<T: serde::Serialize>(value: &T) -> Result<()> {
    emit(&serde_json::to_string_pretty(value)?)
}

#[derive(serde::Serialize)]
struct GroundStateDocument<'a> {
    schema_version: u32,
    tolerance: f64,
    residuals: Vec<(&'static str, f64)>,
    ground_state: &'a GroundState,
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::GroundState { n, sigma, out } => {
            let gs = solve_ground_state(n, sigma)?;
            let tol = GroundState::default_tolerance(n);
            if let Some(dir) = &out {
                mkdir(dir)?;
                io::write_json(dir.join("ground_state.json"), &gs)?;
                io::write_profile_csv(dir.join("profile.csv"), &gs, 20.0, 0.01)?;
            }
            print(&GroundStateDocument {
                schema_version: OUTPUT_SCHEMA,
                tolerance: tol,
                residuals: gs.residuals().to_vec(),
                ground_state: &gs,
            })?;
            if let Err(f) = gs.check(tol) {
                return Err(LabError::Runtime(format!(
                    "unconverged ground state: residual {} = {:e} exceeds {:e}",
                    f.name, f.value, f.tolerance
                )));
            }
        }
        Command::Theory { source } => {
            let lab = Lab::new(source.load()?)?;
            print(&lab.theory_document()?)?;
        }
        Command::Simulate { source, index, out } => {
            let lab = Lab::new(source.load()?)?;
            let doc = lab.trajectory_document(index)?;
            if let Some(dir) = &out {
                mkdir(dir)?;
                io::write_trajectory_jsonl(dir.join("trajectory.jsonl"), &doc)?;
                io::write_samples_csv(dir.join("samples.csv"), &doc.result.samples)?;
            }
            let mut brief = doc.clone();
            brief.result.samples.clear();
            print(&brief)?;
            if doc.result.status.is_failed() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Ensemble {
            source,
            workers,
            n_traj,
            out,
        } => {
            let mut cfg = source.load()?;
            if let Some(n) = n_traj {
                cfg.ensemble.n_traj = n;
            }
            let lab = Lab::new(cfg)?;
            let (summary, records) = lab.ensemble(workers.unwrap_or_else(default_workers))?;
            if let Some(dir) = &out {
                mkdir(dir)?;
                io::write_json(dir.join("summary.json"), &summary)?;
                if lab.config.output.records {
                    for (i, r) in records.into_iter().enumerate() {
                        let doc = snls::lab::TrajectoryDocument {
                            schema_version: OUTPUT_SCHEMA,
                            config_hash: lab.hash.clone(),
                            name: lab.config.name.clone(),
                            index: i as u64,
                            seed: lab.config.ensemble.master_seed,
                            notes: summary.notes.clone(),
                            result: r,
                            bracket: None,
                        };
                        io::write_trajectory_jsonl(dir.join(format!("trajectory_{i:05}.jsonl")), &doc)?;
                    }
                }
            }
            print(&summary)?;
            if summary.any_violated {
                return Ok(ExitCode::from(3));
            }
            if summary.stats.unusable {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Verify {
            suite,
            seed,
            workers,
            ground_state,
        } => {
            let report = match suite {
                Suite::Quick => verify::quick(seed, ground_state.as_deref())?,
                Suite::Statistical => verify::statistical(seed, workers.unwrap_or_else(default_workers))?,
            };
            print(&report)?;
            if !report.passed {
                let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).collect();
                for c in failed {
                    eprintln!("FAIL {}: {} ({})", c.name, c.value, c.detail);
                }
                return Ok(ExitCode::from(3));
            }
        }
        Command::Presets { name } => match name {
            None => emit(&presets::NAMES.join("\n"))?,
            Some(n) => {
                let cfg = presets::preset(&n).ok_or_else(|| LabError::Validation(format!("unknown preset '{n}'")))?;
                emit(&cfg.to_json())?;
            }
        },
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
