mod commands;
mod config;
mod error;
mod output;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Profile};
use error::CliError;
use output::Run;

/// Environment variable naming the default output root.
const OUT_ROOT_VAR: &str = "BROX_OUT_ROOT";

#[derive(Parser)]
#[command(
    name = "brox",
    version,
    about = "Brox diffusion experiments: generator, spectrum and Monte Carlo checks"
)]
struct Cli {
    /// TOML experiment config; the built-in default when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run directory (default: `$BROX_OUT_ROOT/<subcommand>`, root `brox-runs`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for seed sweeps and path ensembles.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    tolerance_profile: Option<Profile>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Noise coefficients and potential per seed.
    SampleNoise,
    /// Enhanced noise norms and the Ξ_2n − Ξ_n convergence table.
    Enhance,
    /// Domain cutoff sweep and the Γ/Φ round trip.
    Gamma,
    /// Expanded generator against ½Δu + ξ·∇u.
    GeneratorCheck,
    /// Resolvent solves and their convergence in the noise level.
    Resolvent,
    /// Weighted Galerkin eigenvalues.
    Spectrum,
    /// Heat kernel rows, conservation, Chapman-Kolmogorov, resolvent powers.
    HeatKernel,
    /// Gaussian upper and lower bound constants.
    GaussianFit,
    /// Invariant density and Monte Carlo occupation distance.
    InvariantMeasure,
    /// Euler-Maruyama ensembles written as binary path files.
    Simulate,
    /// Kernel and Monte Carlo mixing rates against the spectral gap.
    Mixing,
    /// Hölder exponent of simulated paths.
    Holder,
    /// Martingale-problem z-scores for paracontrolled probes.
    MartingaleTest,
    /// Two-time finite-dimensional laws against the kernel.
    FddCheck,
    /// Aggregates finished runs below a directory into mean/CI tables.
    Report { run_dir: PathBuf },
    /// Prints the built-in config as TOML.
    DefaultConfig,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SampleNoise => "sample-noise",
            Command::Enhance => "enhance",
            Command::Gamma => "gamma",
            Command::GeneratorCheck => "generator-check",
            Command::Resolvent => "resolvent",
            Command::Spectrum => "spectrum",
            Command::HeatKernel => "heat-kernel",
            Command::GaussianFit => "gaussian-fit",
            Command::InvariantMeasure => "invariant-measure",
            Command::Simulate => "simulate",
            Command::Mixing => "mixing",
            Command::Holder => "holder",
            Command::MartingaleTest => "martingale-test",
            Command::FddCheck => "fdd-check",
            Command::Report { .. } => "report",
            Command::DefaultConfig => "default-config",
        }
    }
}

fn out_root() -> PathBuf {
    std::env::var_os(OUT_ROOT_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("brox-runs"))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config {
                field: "--threads".into(),
                message: e.to_string(),
            })?;
    }
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(p) = cli.tolerance_profile {
        cfg.tolerance_profile = p;
    }
    cfg.validate()?;
    let name = cli.command.name();
    let dir = match (&cli.out, &cfg.output) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => out_root().join(o),
        (None, None) => out_root().join(name),
    };
    let step: fn(&ExperimentConfig, &mut Run) -> Result<(), CliError> = match &cli.command {
        Command::DefaultConfig => {
            print!("{}", cfg.to_toml());
            return Ok(true);
        }
        Command::Report { run_dir } => {
            let rep = report::aggregate(run_dir)?;
            let out = cli.out.clone().unwrap_or_else(|| run_dir.clone());
            report::write(&rep, &out)?;
            println!(
                "{} runs, {} groups -> {}",
                rep.runs.len(),
                rep.groups.len(),
                out.display()
            );
            return Ok(true);
        }
        Command::SampleNoise => commands::sample_noise_cmd,
        Command::Enhance => commands::enhance,
        Command::Gamma => commands::gamma,
        Command::GeneratorCheck => commands::generator_check,
        Command::Resolvent => commands::resolvent,
        Command::Spectrum => commands::spectrum,
        Command::HeatKernel => commands::heat_kernel,
        Command::GaussianFit => commands::gaussian_fit,
        Command::InvariantMeasure => commands::invariant,
        Command::Simulate => commands::simulate,
        Command::Mixing => commands::mixing,
        Command::Holder => commands::holder,
        Command::MartingaleTest => commands::martingale,
        Command::FddCheck => commands::fdd,
    };
    let mut r = Run::create(&dir, name, &cfg, cfg.tolerance_profile.tolerances())?;
    step(&cfg, &mut r)?;
    let checks = r.finish()?;
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] {}: {} {} {}",
            c.name,
            output::num(c.value),
            c.relation,
            output::num(c.limit)
        );
    }
    println!("wrote {}", dir.display());
    Ok(checks.iter().all(|c| c.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
