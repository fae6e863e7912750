//! Experiment configuration (TOML). Every field is required in a config
//! file; the built-in default is only used when `--config` is absent, and
//! the effective config is always echoed into the run manifest.

use std::path::{Path, PathBuf};

use brox_core::noise::check_alpha;
use brox_core::spectral::PeriodicGrid;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    /// Number of consecutive seeds swept from `master_seed`.
    pub seeds: u64,
    pub tolerance_profile: Profile,
    pub grid: GridConfig,
    pub noise: NoiseConfig,
    pub generator: GeneratorConfig,
    pub spectral: SpectralConfig,
    pub mc: McConfig,
    /// Output directory; relative paths resolve against the output root.
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub m: usize,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub k_max: usize,
    pub levels: Vec<usize>,
    pub alpha: f64,
    /// Multiplies the noise; 0 gives the flat environment.
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    /// Cutoff of the domain map; estimated from the noise when absent.
    pub cutoff: Option<usize>,
    pub c_shift: f64,
    /// Resolvent steps of the first semigroup approximation; doubled twice.
    pub resolvent_steps: usize,
    pub probes: usize,
    pub probe_decay: f64,
    pub probe_kmax: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    /// Levels of the spectral subcommands; the Galerkin kernel is only
    /// resolved for levels well below `grid.k`.
    pub levels: Vec<usize>,
    pub times: Vec<f64>,
    pub fit_times: Vec<f64>,
    pub eigencount: usize,
    pub kernel_points: usize,
    pub kernel_rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub level: usize,
    /// Domain cutoff of the martingale test functions; must stay below `level`.
    pub cutoff: usize,
    pub x0: f64,
    pub dt: f64,
    pub t_end: f64,
    pub n_paths: usize,
    pub burn_in: f64,
    pub record_every: usize,
    pub bins: usize,
    pub richardson: bool,
    pub holder_horizon: f64,
    pub fdd_times: Vec<f64>,
    pub bootstrap_reps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Default,
    Strict,
}

/// Limits of the checks each subcommand declares.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub exactness: f64,
    pub round_trip: f64,
    pub gamma_one: f64,
    pub solve_residual: f64,
    pub form: f64,
    pub gmres_residual: f64,
    pub ratio_spread: f64,
    pub lambda1: f64,
    pub constant_mode: f64,
    pub row_sum: f64,
    pub detailed_balance: f64,
    pub chapman_kolmogorov: f64,
    pub halving_band: f64,
    pub fit_uniformity: f64,
    pub adjoint: f64,
    pub mixing_relative: f64,
    pub holder_band: f64,
    pub z_max: f64,
    pub bootstrap_k: f64,
    pub p_min: f64,
}

impl Profile {
    pub fn tolerances(self) -> Tolerances {
        let base = Tolerances {
            exactness: 1e-9,
            round_trip: 1e-10,
            gamma_one: 1e-12,
            solve_residual: 1e-12,
            form: 1e-9,
            gmres_residual: 1e-8,
            ratio_spread: 10.0,
            lambda1: 1e-9,
            constant_mode: 1e-8,
            row_sum: 1e-8,
            detailed_balance: 1e-8,
            chapman_kolmogorov: 1e-8,
            halving_band: 0.2,
            fit_uniformity: 2.0,
            adjoint: 1e-9,
            mixing_relative: 0.15,
            holder_band: 0.05,
            z_max: 3.0,
            bootstrap_k: 3.0,
            p_min: 0.001,
        };
        match self {
            Profile::Default => base,
            // Deterministic limits tightened by 10×; statistical ones unchanged.
            Profile::Strict => Tolerances {
                exactness: 1e-10,
                round_trip: 1e-11,
                form: 1e-10,
                gmres_residual: 1e-9,
                lambda1: 1e-10,
                constant_mode: 1e-9,
                row_sum: 1e-9,
                detailed_balance: 1e-9,
                chapman_kolmogorov: 1e-9,
                adjoint: 1e-10,
                ..base
            },
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            master_seed: 2,
            seeds: 1,
            tolerance_profile: Profile::Default,
            grid: GridConfig { m: 1024, k: 341 },
            noise: NoiseConfig {
                k_max: 341,
                levels: vec![16, 32, 64, 128, 256],
                alpha: 1.45,
                amplitude: 1.0,
            },
            generator: GeneratorConfig {
                cutoff: None,
                c_shift: 1.0,
                resolvent_steps: 4,
                probes: 5,
                probe_decay: 2.5,
                probe_kmax: 64,
            },
            spectral: SpectralConfig {
                levels: vec![16, 32, 64],
                times: vec![0.1, 0.5, 1.0],
                fit_times: brox_core::spectrum::default_times(),
                eigencount: 10,
                kernel_points: 1024,
                kernel_rows: 8,
            },
            mc: McConfig {
                level: 8,
                cutoff: 4,
                x0: 0.0,
                dt: 1e-3,
                t_end: 10.0,
                n_paths: 1000,
                burn_in: 5.0,
                record_every: 10,
                bins: 32,
                richardson: false,
                holder_horizon: 1.0,
                fdd_times: vec![0.5, 1.0],
                bootstrap_reps: 200,
            },
            output: None,
        }
    }
}

fn field_err(field: &str, msg: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.into(),
        message: msg.into(),
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let field = e.span().map(|s| text[s].to_string()).unwrap_or_default();
            CliError::Config {
                field,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn grid(&self) -> PeriodicGrid {
        PeriodicGrid::new(self.grid.m, self.grid.k).expect("validated")
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.seeds).map(|i| self.master_seed + i).collect()
    }

    pub fn max_level(&self) -> usize {
        *self.noise.levels.iter().max().expect("validated")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        PeriodicGrid::new(self.grid.m, self.grid.k).map_err(|e| field_err("grid", e.to_string()))?;
        if self.seeds == 0 {
            return Err(field_err("seeds", "must be at least 1"));
        }
        if self.noise.k_max > self.grid.k {
            return Err(field_err(
                "noise.k_max",
                format!("{} exceeds grid.k = {}", self.noise.k_max, self.grid.k),
            ));
        }
        if self.noise.levels.is_empty() {
            return Err(field_err("noise.levels", "must list at least one level"));
        }
        for (i, &n) in self.noise.levels.iter().enumerate() {
            if n == 0 || n > self.noise.k_max {
                return Err(field_err(
                    &format!("noise.levels[{i}]"),
                    format!("{n} must lie in 1..={}", self.noise.k_max),
                ));
            }
        }
        check_alpha(self.noise.alpha).map_err(|e| field_err("noise.alpha", e.to_string()))?;
        if !self.noise.amplitude.is_finite() || self.noise.amplitude < 0.0 {
            return Err(field_err("noise.amplitude", "must be finite and nonnegative"));
        }
        for (i, &n) in self.spectral.levels.iter().enumerate() {
            if n == 0 || n > self.noise.k_max {
                return Err(field_err(
                    &format!("spectral.levels[{i}]"),
                    format!("{n} must lie in 1..={}", self.noise.k_max),
                ));
            }
        }
        if self.spectral.levels.is_empty() {
            return Err(field_err("spectral.levels", "must list at least one level"));
        }
        if let Some(c) = self.generator.cutoff {
            let low = self
                .noise
                .levels
                .iter()
                .chain(&self.spectral.levels)
                .min()
                .copied()
                .unwrap_or(0);
            if c == 0 || c > low {
                return Err(field_err(
                    "generator.cutoff",
                    format!("{c} must lie in 1..={low}, the smallest level"),
                ));
            }
        }
        if self.generator.c_shift.is_nan() || self.generator.c_shift <= 0.0 {
            return Err(field_err("generator.c_shift", "must be positive"));
        }
        if self.generator.resolvent_steps == 0 {
            return Err(field_err("generator.resolvent_steps", "must be positive"));
        }
        if self.generator.probes == 0 || self.generator.probes > brox_core::probes::PROBE_SEEDS.len() {
            return Err(field_err(
                "generator.probes",
                format!("must lie in 1..={}", brox_core::probes::PROBE_SEEDS.len()),
            ));
        }
        for (name, ts) in [
            ("spectral.times", &self.spectral.times),
            ("spectral.fit_times", &self.spectral.fit_times),
        ] {
            if ts.is_empty() || ts.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                return Err(field_err(name, "must be a nonempty list of positive times"));
            }
        }
        if !self.spectral.kernel_points.is_power_of_two() || self.spectral.kernel_points < 2 * self.grid.k + 2 {
            return Err(field_err(
                "spectral.kernel_points",
                format!("must be a power of two above 2·grid.k + 1 = {}", 2 * self.grid.k + 1),
            ));
        }
        if self.spectral.kernel_rows == 0 || self.spectral.kernel_rows > self.spectral.kernel_points {
            return Err(field_err("spectral.kernel_rows", "must lie in 1..=kernel_points"));
        }
        if self.spectral.eigencount == 0 || self.spectral.eigencount > 2 * self.grid.k + 1 {
            return Err(field_err("spectral.eigencount", "must lie in 1..=2·grid.k + 1"));
        }
        let mc = &self.mc;
        if mc.level > self.noise.k_max {
            return Err(field_err("mc.level", format!("{} exceeds noise.k_max", mc.level)));
        }
        if mc.cutoff == 0 || mc.cutoff >= mc.level {
            return Err(field_err(
                "mc.cutoff",
                format!("{} must lie in 1..{}", mc.cutoff, mc.level),
            ));
        }
        if mc.dt.is_nan() || mc.dt <= 0.0 {
            return Err(field_err("mc.dt", "must be positive"));
        }
        for (name, t) in [("mc.t_end", mc.t_end), ("mc.holder_horizon", mc.holder_horizon)] {
            let steps = t / mc.dt;
            if t.is_nan() || t <= 0.0 || (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
                return Err(field_err(name, format!("{t} must be a positive multiple of mc.dt")));
            }
        }
        if !(0.0..mc.t_end).contains(&mc.burn_in) {
            return Err(field_err("mc.burn_in", "must lie in [0, mc.t_end)"));
        }
        if mc.n_paths < 2 || mc.record_every == 0 || mc.bins == 0 || mc.bootstrap_reps < 2 {
            return Err(field_err(
                "mc",
                "n_paths, bootstrap_reps >= 2 and record_every, bins >= 1 required",
            ));
        }
        if mc.fdd_times.is_empty() || mc.fdd_times.windows(2).any(|w| w[1] <= w[0]) || mc.fdd_times[0] <= 0.0 {
            return Err(field_err("mc.fdd_times", "must be increasing positive times"));
        }
        Ok(())
    }
}
