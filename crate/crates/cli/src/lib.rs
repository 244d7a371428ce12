//! `egl` command-line front end: equilibrium reports, growth runs,
//! proposition sweeps and scenario validation.

pub mod error;
pub mod manifest;
pub mod number;
pub mod report;
pub mod svg;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, LevelFilter};

use egl_core::embodied::sample_curve;
use egl_core::growth::{simulate, solve_static};
use egl_core::model::{load_scenario, EconomyState, ScenarioConfig, SolverSettings};
use egl_core::par::Execution;
use egl_core::statics::{proposition_suite, PhiMode, ScenarioFamily, SuiteOptions, DEFAULT_STEP, PRNG_NAME};
use egl_core::surplus::{figure1_report, EnergyProblem};

pub use error::CliError;
use manifest::{RunManifest, Tolerances};

const CURVE_POINTS: usize = 201;

#[derive(Debug, Parser)]
#[command(name = "egl", version, about = "Energy-surplus equilibrium and growth solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one period's equilibrium and write reports and diagrams.
    Equilibrium {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the accumulation dynamics to the horizon or steady state.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario's horizon.
        #[arg(long)]
        horizon: Option<u32>,
    },
    /// Randomised comparative-statics sweep over a scenario family.
    Statics {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long)]
        out: PathBuf,
        /// Relative perturbation step.
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: f64,
        /// Treatment of the scarcity proportion when perturbing energy content.
        #[arg(long, value_enum, default_value_t = PhiArg::Held)]
        phi_mode: PhiArg,
        /// Run trials on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Parse and validate a scenario, printing its digest.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhiArg {
    Held,
    Resolved,
}

impl PhiArg {
    fn mode(self) -> PhiMode {
        match self {
            PhiArg::Held => PhiMode::HeldAtBase,
            PhiArg::Resolved => PhiMode::Resolved,
        }
    }

    fn name(self) -> &'static str {
        match self {
            PhiArg::Held => "held",
            PhiArg::Resolved => "resolved",
        }
    }
}

/// Parses arguments, runs, reports errors; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprint!("{e}");
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or_default();
            let err = CliError::Usage(first.trim_start_matches("error: ").to_string());
            eprintln!("{}", err.json_line());
            return err.exit_code();
        }
    };
    if let Err(e) = init_logging() {
        eprintln!("{}", e.json_line());
        return e.exit_code();
    }
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.json_line());
            e.exit_code()
        }
    }
}

fn init_logging() -> Result<(), CliError> {
    let level = match std::env::var("EGL_LOG").as_deref() {
        Err(_) | Ok("") => LevelFilter::Warn,
        Ok("quiet") => LevelFilter::Off,
        Ok("info") => LevelFilter::Info,
        Ok("debug") => LevelFilter::Debug,
        Ok(other) => {
            return Err(CliError::Usage(format!(
                "EGL_LOG must be quiet, info or debug, got `{other}`"
            )))
        }
    };
    // a second init (tests calling in-process) keeps the first logger
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
    Ok(())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Equilibrium { scenario, out } => run_equilibrium(scenario, out),
        Command::Simulate {
            scenario,
            out,
            horizon,
        } => run_simulate(scenario, out, *horizon),
        Command::Statics {
            family,
            seed,
            trials,
            out,
            step,
            phi_mode,
            sequential,
        } => run_statics(family, *seed, *trials as usize, out, *step, *phi_mode, *sequential),
        Command::Validate { scenario } => run_validate(scenario),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn load(path: &Path) -> Result<ScenarioConfig, CliError> {
    Ok(load_scenario(&read(path)?)?)
}

/// Output directory plus the files written into it, in order.
struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn finish(mut self, mut manifest: RunManifest) -> Result<(), CliError> {
        manifest.outputs = self.written.clone();
        manifest.outputs.push("manifest.json".into());
        self.write("manifest.json", &manifest.to_json())?;
        info!("wrote {} files to {}", self.written.len(), self.dir.display());
        Ok(())
    }
}

/// File-name-safe form of an id.
fn slug(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn run_equilibrium(scenario: &Path, out: &Path) -> Result<(), CliError> {
    let config = load(scenario)?;
    let state = EconomyState::initial(&config);
    let outcome = solve_static(&config, &state)?;
    let problem = EnergyProblem::new(&config, &state)?.with_execution(Execution::Parallel);

    let mut files = Outputs::create(out)?;
    files.write("energy_side.csv", &report::energy_side(&config, &outcome.energy).render())?;
    files.write("energy_scalars.csv", &report::energy_scalars(&config, &outcome.energy).render())?;
    files.write("demand.csv", &report::demand(&config, &outcome.consumer).render())?;
    files.write("demand_scalars.csv", &report::demand_scalars(&config, &outcome.consumer).render())?;
    for g in &outcome.energy.goods {
        let fig = figure1_report(&problem, &outcome.energy, g.index, CURVE_POINTS)?;
        let q_max = fig.meec.last().map(|p| p.0).unwrap_or(1.0);
        let points = sample_curve(problem.curve(g.index)?, q_max, CURVE_POINTS, Execution::Parallel);
        let name = slug(&g.id);
        files.write(&format!("meec_{name}.csv"), &report::meec(&points).render())?;
        files.write(&format!("figure1_{name}.svg"), &svg::figure1(&fig))?;
    }

    let mut manifest = RunManifest::new("equilibrium", config.digest());
    manifest.tolerances = Some(Tolerances::from(&config.solver));
    files.finish(manifest)
}

pub fn run_simulate(scenario: &Path, out: &Path, horizon: Option<u32>) -> Result<(), CliError> {
    let mut config = load(scenario)?;
    if let Some(h) = horizon {
        config.horizon = h;
    }
    let (traj, failure) = match simulate(&config) {
        Ok(t) => (t, None),
        Err(e) => ((*e.partial).clone(), Some(e)),
    };

    let mut files = Outputs::create(out)?;
    files.write("trajectory.csv", &report::trajectory(&traj, failure.as_ref()).render())?;
    files.write("figure2.svg", &svg::figure2(&traj))?;
    let mut manifest = RunManifest::new("simulate", config.digest());
    manifest.tolerances = Some(Tolerances::from(&config.solver));
    manifest.parameters.insert("horizon".into(), config.horizon.into());
    manifest.parameters.insert("substeps".into(), config.solver.substeps.into());
    files.finish(manifest)?;

    match failure {
        Some(e) => Err(CliError::Solve(egl_core::SolveError::Infeasible(e.to_string()))),
        None => Ok(()),
    }
}

pub fn run_statics(
    family_path: &Path,
    seed: u64,
    trials: usize,
    out: &Path,
    step: f64,
    phi: PhiArg,
    sequential: bool,
) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::Usage("trials must be at least 1".into()));
    }
    if !(step > 0.0 && step < 1.0) {
        return Err(CliError::Usage(format!("step must lie in (0, 1), got {step}")));
    }
    let text = read(family_path)?;
    let family = ScenarioFamily::from_json(&text)?;
    let digest = ScenarioConfig::digest_of(&text)?;
    let opts = SuiteOptions {
        step,
        energy_phi: phi.mode(),
        execution: if sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
    };
    let tables = proposition_suite(&family, seed, trials, &opts);

    let preamble = vec![format!(
        "prng={PRNG_NAME} seed={seed} trials={trials} step={} phi_mode={} family={digest}",
        number::g12(step),
        phi.name()
    )];
    let mut files = Outputs::create(out)?;
    files.write("sign_table.csv", &report::sign_table(&tables, preamble).render())?;
    files.write("failures.csv", &report::failures(&tables).render())?;
    files.write("discarded.csv", &report::discarded(&tables).render())?;
    let mut manifest = RunManifest::new("statics", digest);
    manifest.tolerances = Some(Tolerances::from(&SolverSettings::default()));
    manifest.parameters.insert("prng".into(), PRNG_NAME.into());
    manifest.parameters.insert("seed".into(), seed.into());
    manifest.parameters.insert("trials".into(), trials.into());
    manifest.parameters.insert("step".into(), step.into());
    manifest.parameters.insert("phi_mode".into(), phi.name().into());
    files.finish(manifest)
}

pub fn run_validate(scenario: &Path) -> Result<(), CliError> {
    let config = load(scenario)?;
    println!("ok {}", config.digest());
    println!(
        "prime_movers={} energy_goods={} non_energy_goods={} events={} horizon={}",
        config.movers.len(),
        config.energy_goods.len(),
        config.non_energy_goods.len(),
        config.events.len(),
        config.horizon
    );
    Ok(())
}
