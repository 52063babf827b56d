//! Run configuration: a single JSON document, with CLI flags overriding fields.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qchaos_core::borders::Mode;
use qchaos_core::ensemble::NoiseModel;
use qchaos_core::realisations::JumpOptions;
use qchaos_core::spectrum::{PotentialKind, PotentialSpec, SolveOptions};
use qchaos_core::SystemParams;

use crate::error::{CliError, Result};
use crate::io::read_potential_csv;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSource {
    Harmonic { omega: f64 },
    Polynomial { coeffs: Vec<f64> },
    Periodic { d_s: f64, amplitude: f64 },
    /// Two-column CSV file, relative paths resolved against the config file.
    Table { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialConfig {
    #[serde(flatten)]
    pub source: PotentialSource,
    pub x_min: f64,
    pub x_max: f64,
    pub grid_n: usize,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self { source: PotentialSource::Harmonic { omega: 1.0 }, x_min: -10.0, x_max: 10.0, grid_n: 2048 }
    }
}

impl PotentialConfig {
    pub fn resolve(&self, base_dir: &Path) -> Result<PotentialSpec> {
        let kind = match &self.source {
            PotentialSource::Harmonic { omega } => PotentialKind::Harmonic { omega: *omega },
            PotentialSource::Polynomial { coeffs } => PotentialKind::Polynomial { coeffs: coeffs.clone() },
            PotentialSource::Periodic { d_s, amplitude } => {
                PotentialKind::Periodic { d_s: *d_s, amplitude: *amplitude }
            }
            PotentialSource::Table { path } => {
                let full = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
                if !full.exists() {
                    return Err(CliError::config(format!("potential file not found: {}", full.display())));
                }
                let (x, v) = read_potential_csv(&full)?;
                PotentialKind::Table { x, v }
            }
        };
        let spec = PotentialSpec { kind, x_min: self.x_min, x_max: self.x_max, grid_n: self.grid_n };
        spec.validate().map_err(|e| CliError::config(format!("potential: {e}")))?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[default]
    TimeIndependent,
    TimeDependent,
    AboveBarrier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    E,
    #[serde(rename = "eps_p")]
    EpsP,
    #[serde(rename = "omega_p")]
    OmegaP,
    #[serde(rename = "hbar")]
    Hbar,
    K,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub min: f64,
    pub max: f64,
    pub n_points: usize,
    #[serde(default)]
    pub log_scale: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(CliError::config("sweep.n_points must be >= 2"));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(CliError::config("sweep needs finite min < max"));
        }
        if self.log_scale && self.min <= 0.0 {
            return Err(CliError::config("log-scale sweep needs min > 0"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.n_points;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if self.log_scale {
                    self.min * (self.max / self.min).powf(t)
                } else {
                    self.min + t * (self.max - self.min)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleConfig {
    pub t_max: f64,
    pub dt: f64,
    pub repetitions: usize,
    pub jump: JumpOptions,
    /// Realisation-set JSON to run instead of building jump realisations.
    pub realisations: Option<PathBuf>,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self { t_max: 1000.0, dt: 0.1, repetitions: 4, jump: JumpOptions::default(), realisations: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct TunnelConfig {
    pub beta: usize,
    /// Bound-state energy `ε_s`; defaults to the PDD level of the spectrum.
    pub eps_s: Option<f64>,
    /// Realisation-set JSON to analyse instead of building jump realisations.
    pub realisations: Option<PathBuf>,
    /// Defaults to barrier `beta` of realisation 0.
    pub unperturbed_height: Option<f64>,
    /// Defaults to the spectrum's `Δε_s`.
    pub delta_eps_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassicalConfig {
    /// Run the map at this `K` instead of deriving it from the spectrum.
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub n_orbits: usize,
    pub n_steps: usize,
    /// `λ` used for `K_c`; `2π` matches the classical `K_c ≈ 1`.
    pub lambda_anh: f64,
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        Self { k: None, n_orbits: 1000, n_steps: 10_000, lambda_anh: std::f64::consts::TAU }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemParams,
    pub potential: PotentialConfig,
    pub solver: SolveOptions,
    pub n_levels: usize,
    pub mode: ModeName,
    /// Energy `E` of the analysed point.
    pub energy: f64,
    pub sweep: Option<SweepConfig>,
    pub noise: NoiseModel,
    pub ensemble: EnsembleConfig,
    pub tunnel: TunnelConfig,
    pub classical: ClassicalConfig,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemParams::default(),
            potential: PotentialConfig::default(),
            solver: SolveOptions::default(),
            n_levels: 10,
            mode: ModeName::TimeIndependent,
            energy: 0.6,
            sweep: None,
            noise: NoiseModel::default(),
            ensemble: EnsembleConfig::default(),
            tunnel: TunnelConfig::default(),
            classical: ClassicalConfig::default(),
            output_dir: PathBuf::from("qchaos-out"),
            seed: 0,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate().map_err(|e| CliError::config(format!("system: {e}")))?;
        if self.n_levels == 0 {
            return Err(CliError::config("n_levels must be >= 1"));
        }
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        self.noise.validate().map_err(|e| CliError::config(format!("noise: {e}")))?;
        if self.mode == ModeName::TimeDependent && !(self.system.omega_p > 0.0) {
            return Err(CliError::config("time_dependent mode needs system.omega_p > 0"));
        }
        if let Some(0) = self.threads {
            return Err(CliError::config("threads must be >= 1"));
        }
        Ok(())
    }

    /// Core [`Mode`] for this run; above-barrier takes `ε_s` from the periodic amplitude.
    pub fn core_mode(&self) -> Result<Mode> {
        Ok(match self.mode {
            ModeName::TimeIndependent => Mode::TimeIndependent,
            ModeName::TimeDependent => Mode::TimeDependent,
            ModeName::AboveBarrier => match self.potential.source {
                PotentialSource::Periodic { amplitude, .. } => Mode::AboveBarrier { eps_s: amplitude },
                _ => return Err(CliError::config("above_barrier mode needs a periodic potential")),
            },
        })
    }
}
