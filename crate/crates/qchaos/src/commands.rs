//! Subcommand implementations. Each command validates the resolved config,
//! writes `config.echo.json` into the output directory, computes, then writes
//! its results from the calling thread.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qchaos_core::borders::{classify, RegimeReport};
use qchaos_core::classical::{correspondence_verdict, CorrespondenceVerdict, MapParams};
use qchaos_core::ensemble::{mix_densities, NoiseModel};
use qchaos_core::grid::PddGrid;
use qchaos_core::realisations::{build_jump_realisations, JumpOptions, RealisationSet};
use qchaos_core::spectrum::{solve_bound_states_with, PotentialSpec, Spectrum};
use qchaos_core::tunnelling::{tunnelling_report, TunnellingReport};
use qchaos_core::{borders, SystemParams};

use crate::config::{PotentialSource, RunConfig};
use crate::error::{CliError, Result};
use crate::io::{ensure_dir, fmt_f64, fmt_opt, read_json, write_csv, write_json};
use crate::parallel::{self, SweepBase};

/// A config together with the directory its relative paths refer to.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

impl Run {
    pub fn new(config: RunConfig, base_dir: impl Into<PathBuf>) -> Self {
        Self { config, base_dir: base_dir.into() }
    }

    fn out(&self, name: &str) -> PathBuf {
        self.config.output_dir.join(name)
    }

    fn resolve_path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() { p.to_path_buf() } else { self.base_dir.join(p) }
    }

    /// Validates, creates the output directory and writes the echo with
    /// every input path made absolute.
    fn prepare(&self) -> Result<()> {
        self.config.validate()?;
        ensure_dir(&self.config.output_dir)?;
        let mut echo = self.config.clone();
        if let PotentialSource::Table { path } = &mut echo.potential.source {
            *path = self.resolve_path(path);
        }
        for p in [&mut echo.tunnel.realisations, &mut echo.ensemble.realisations].into_iter().flatten() {
            *p = self.resolve_path(p);
        }
        write_json(&self.out("config.echo.json"), &echo)
    }

    fn potential(&self) -> Result<PotentialSpec> {
        self.config.potential.resolve(&self.base_dir)
    }

    fn spectrum(&self, pot: &PotentialSpec) -> Result<Spectrum> {
        let c = &self.config;
        Ok(solve_bound_states_with(pot, &c.system, c.n_levels, &c.solver)?)
    }

    fn threads<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        parallel::with_threads(self.config.threads, f)
    }

    fn load_realisations(&self, path: &Path) -> Result<RealisationSet> {
        let path = self.resolve_path(path);
        let rs: RealisationSet = read_json(&path)?;
        rs.validate().map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Ok(rs)
    }

    /// Jump options with the run energy filled in for the effective `ω_p`.
    fn jump_options(&self) -> JumpOptions {
        let mut opts = self.config.ensemble.jump;
        opts.energy = opts.energy.or(Some(self.config.energy));
        opts
    }

    fn realisations(&self, from_file: Option<&PathBuf>) -> Result<RealisationSet> {
        match from_file {
            Some(p) => self.load_realisations(p),
            None => {
                let pot = self.potential()?;
                let spec = self.spectrum(&pot)?;
                Ok(build_jump_realisations(&pot, &spec, &self.config.system, &self.jump_options())?)
            }
        }
    }
}

pub fn cmd_spectrum(run: &Run) -> Result<Spectrum> {
    run.prepare()?;
    let pot = run.potential()?;
    let spec = run.spectrum(&pot)?;
    let rows = spec.levels.iter().enumerate().map(|(i, e)| vec![i.to_string(), fmt_f64(*e)]);
    write_csv(&run.out("levels.csv"), &["index", "energy"], rows)?;
    write_json(&run.out("spectrum.json"), &spec)?;
    Ok(spec)
}

/// One sweep point: the swept value and the report computed there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub report: RegimeReport,
}

pub fn cmd_borders(run: &Run) -> Result<RegimeReport> {
    run.prepare()?;
    let c = &run.config;
    let mode = c.core_mode()?;
    let pot = run.potential()?;
    let spec = run.spectrum(&pot)?;
    let report = classify(c.energy, &spec, &c.system, mode)?;
    write_json(&run.out("report.json"), &report)?;

    if let Some(sweep) = &c.sweep {
        let base = SweepBase {
            potential: &pot,
            params: c.system,
            solve: c.solver,
            n_levels: c.n_levels,
            spectrum: &spec,
            energy: c.energy,
            mode,
        };
        let points = run.threads(|| parallel::sweep(&base, sweep))??;
        let rows = points.iter().map(|(_, r)| {
            vec![
                fmt_f64(r.energy),
                fmt_f64(r.k),
                fmt_f64(r.e_c),
                fmt_opt(r.e_q),
                fmt_f64(r.k_c),
                fmt_opt(r.k_q),
                r.regime.as_str().to_string(),
            ]
        });
        write_csv(&run.out("sweep.csv"), &["E", "K", "E_c", "E_q", "K_c", "K_q", "regime"], rows)?;
        let json: Vec<SweepPoint> =
            points.into_iter().map(|(value, report)| SweepPoint { value, report }).collect();
        write_json(&run.out("sweep.json"), &json)?;
    }
    Ok(report)
}

/// Summary of all ensemble repetitions. Repetition `r` runs on RNG stream `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub seed: u64,
    pub repetitions: usize,
    pub dt: f64,
    pub n_steps: usize,
    pub noise: NoiseModel,
    pub alphas: Vec<f64>,
    pub jump_counts: Vec<u64>,
    pub redraw_counts: Vec<u64>,
    /// Occupancy frequencies pooled over repetitions.
    pub occupancy_freq: Vec<f64>,
}

pub fn cmd_ensemble(run: &Run) -> Result<EnsembleSummary> {
    run.prepare()?;
    let c = &run.config;
    let e = &c.ensemble;
    if e.repetitions == 0 {
        return Err(CliError::config("ensemble.repetitions must be >= 1"));
    }
    let rs = run.realisations(e.realisations.as_ref())?;
    let traces =
        run.threads(|| parallel::ensemble_repetitions(&rs, &c.noise, e.t_max, e.dt, c.seed, e.repetitions))??;

    let n_steps = traces[0].occupied.len();
    let mut pooled = vec![0.0; rs.n_r];
    for t in &traces {
        for (p, f) in pooled.iter_mut().zip(&t.occupancy_freq) {
            *p += f / traces.len() as f64;
        }
    }
    let summary = EnsembleSummary {
        seed: c.seed,
        repetitions: e.repetitions,
        dt: e.dt,
        n_steps,
        noise: c.noise,
        alphas: rs.alphas.clone(),
        jump_counts: traces.iter().map(|t| t.jump_count).collect(),
        redraw_counts: traces.iter().map(|t| t.redraw_count).collect(),
        occupancy_freq: pooled,
    };

    let first = &traces[0];
    let rows = first.times.iter().zip(&first.occupied).map(|(t, i)| vec![fmt_f64(*t), i.to_string()]);
    write_csv(&run.out("trace.csv"), &["t", "occupied_index"], rows)?;
    if let (Some(est), Some(exact)) =
        (mix_densities(&rs, &summary.occupancy_freq), mix_densities(&rs, &rs.alphas))
    {
        write_pdd(&run.out("pdd.csv"), &est, &exact)?;
    }
    write_json(&run.out("realisations.json"), &rs)?;
    write_json(&run.out("ensemble.json"), &summary)?;
    Ok(summary)
}

fn write_pdd(path: &Path, est: &PddGrid, exact: &PddGrid) -> Result<()> {
    let rows = (0..est.values.len())
        .map(|k| vec![fmt_f64(est.x(k)), fmt_f64(est.values[k]), fmt_f64(exact.values[k])]);
    write_csv(path, &["x", "rho_est", "rho_exact"], rows)
}

pub fn cmd_tunnel(run: &Run) -> Result<TunnellingReport> {
    run.prepare()?;
    let c = &run.config;
    let t = &c.tunnel;
    let rs = run.realisations(t.realisations.as_ref())?;

    let spectrum = if t.eps_s.is_none() || t.delta_eps_s.is_none() {
        let pot = run.potential()?;
        Some(run.spectrum(&pot)?)
    } else {
        None
    };
    let level = c.ensemble.jump.level_index;
    let eps_s = match (t.eps_s, &spectrum) {
        (Some(e), _) => e,
        (None, Some(s)) => *s
            .levels
            .get(level)
            .ok_or_else(|| CliError::config(format!("ensemble.jump.level_index {level} exceeds n_levels")))?,
        (None, None) => unreachable!(),
    };
    let delta_eps_s = t.delta_eps_s.or(spectrum.as_ref().map(|s| s.delta_eps_s)).unwrap_or_default();
    let unperturbed = match t.unperturbed_height {
        Some(h) => h,
        None => {
            let main = rs.realisations.iter().find(|r| r.ep_amplitude_shift == 0.0).unwrap_or(&rs.realisations[0]);
            *main.barrier_heights.get(t.beta).ok_or_else(|| {
                CliError::config(format!("tunnel.beta {} has no unperturbed barrier; set tunnel.unperturbed_height", t.beta))
            })?
        }
    };
    let report = tunnelling_report(&rs, t.beta, eps_s, unperturbed, delta_eps_s)?;
    write_json(&run.out("tunnel.json"), &report)?;
    Ok(report)
}

/// Verdict plus the variance series it was fitted on.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalOutcome {
    pub verdict: CorrespondenceVerdict,
    pub var_p: Vec<f64>,
}

pub fn cmd_classical(run: &Run) -> Result<ClassicalOutcome> {
    run.prepare()?;
    let c = &run.config;
    let cl = &c.classical;
    let params = SystemParams { lambda_anh: cl.lambda_anh, ..c.system };
    params.validate().map_err(|e| CliError::config(format!("classical: {e}")))?;
    let k_c = borders::k_c(&params);
    let k = match cl.k {
        Some(k) => k,
        None => {
            let pot = run.potential()?;
            let spec = run.spectrum(&pot)?;
            borders::chaoticity_k(&params, &spec, c.energy)?
        }
    };
    let map = MapParams { k: k / k_c, n_orbits: cl.n_orbits, n_steps: cl.n_steps, seed: c.seed };
    map.validate().map_err(|e| CliError::config(format!("classical: {e}")))?;
    let result = run.threads(|| parallel::standard_map(&map))??;
    let verdict = correspondence_verdict(k, k_c, &result);

    let rows = result.var_p_series.iter().enumerate().map(|(t, v)| vec![t.to_string(), fmt_f64(*v)]);
    write_csv(&run.out("var_p.csv"), &["step", "var_p"], rows)?;
    write_json(&run.out("verdict.json"), &verdict)?;
    Ok(ClassicalOutcome { verdict, var_p: result.var_p_series })
}
