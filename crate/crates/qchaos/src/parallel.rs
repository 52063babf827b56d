//! Rayon drivers. Work items are computed in parallel and collected in input
//! order, so every reduction is independent of the thread count.

use rayon::prelude::*;

use qchaos_core::borders::{classify, energy_for_k, Mode, RegimeReport};
use qchaos_core::classical::{diffusion_from_moments, orbit_moments, DiffusionResult, MapParams, Moments};
use qchaos_core::ensemble::{run_stream, EnsembleTrace, NoiseModel};
use qchaos_core::realisations::RealisationSet;
use qchaos_core::spectrum::{solve_bound_states_with, PotentialSpec, SolveOptions, Spectrum};
use qchaos_core::SystemParams;

use crate::config::{SweepConfig, SweepVariable};
use crate::error::{CliError, Result};

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::config(format!("threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Everything a sweep point needs besides the swept value.
pub struct SweepBase<'a> {
    pub potential: &'a PotentialSpec,
    pub params: SystemParams,
    pub solve: SolveOptions,
    pub n_levels: usize,
    pub spectrum: &'a Spectrum,
    pub energy: f64,
    pub mode: Mode,
}

fn sweep_point(base: &SweepBase<'_>, variable: SweepVariable, value: f64) -> Result<RegimeReport> {
    let mut params = base.params;
    let mut energy = base.energy;
    let rebuilt;
    let spec = match variable {
        SweepVariable::E => {
            energy = value;
            base.spectrum
        }
        SweepVariable::K => {
            energy = energy_for_k(&params, base.spectrum, value)?;
            base.spectrum
        }
        SweepVariable::EpsP => {
            params.eps_p = value;
            // ε* depends on ε_p through the star phase
            rebuilt = Spectrum::from_levels(base.spectrum.levels.clone(), &params, &base.solve)?;
            &rebuilt
        }
        SweepVariable::OmegaP => {
            params.omega_p = value;
            base.spectrum
        }
        SweepVariable::Hbar => {
            params.hbar = value;
            rebuilt = solve_bound_states_with(base.potential, &params, base.n_levels, &base.solve)?;
            &rebuilt
        }
    };
    Ok(classify(energy, spec, &params, base.mode)?)
}

/// One report per sweep value, in grid order.
pub fn sweep(base: &SweepBase<'_>, cfg: &SweepConfig) -> Result<Vec<(f64, RegimeReport)>> {
    cfg.values()
        .into_par_iter()
        .map(|v| sweep_point(base, cfg.variable, v).map(|r| (v, r)))
        .collect()
}

/// Independent repetitions on RNG streams `0..repetitions`.
pub fn ensemble_repetitions(
    rs: &RealisationSet,
    noise: &NoiseModel,
    t_max: f64,
    dt: f64,
    seed: u64,
    repetitions: usize,
) -> Result<Vec<EnsembleTrace>> {
    (0..repetitions as u64)
        .into_par_iter()
        .map(|s| run_stream(rs, noise, t_max, dt, seed, s).map_err(CliError::from))
        .collect()
}

/// Standard map over orbit blocks in parallel, reduced in block order.
pub fn standard_map(params: &MapParams) -> Result<DiffusionResult> {
    params.validate()?;
    let blocks: Vec<Moments> =
        (0..params.n_blocks()).into_par_iter().map(|b| orbit_moments(params, params.block(b))).collect();
    let mut total = Moments::zeros(params.n_steps);
    for m in &blocks {
        total.merge(m);
    }
    Ok(diffusion_from_moments(params.k, &total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qchaos_core::classical::iterate_standard_map;

    #[test]
    fn parallel_map_matches_sequential() {
        let p = MapParams { k: 3.0, n_orbits: 300, n_steps: 200, seed: 11 };
        let seq = iterate_standard_map(&p).unwrap();
        for threads in [1, 3, 8] {
            let par = with_threads(Some(threads), || standard_map(&p)).unwrap().unwrap();
            assert_eq!(par, seq);
        }
    }
}
