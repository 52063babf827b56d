//! Noise-triggered jumps between realisations.
//!
//! At each time step the occupied realisation is "knocked out" with a
//! probability set by the noise model and the separation to its nearest
//! neighbour; the successor is redrawn from `{αᵢ}` (which may return the same
//! realisation). The long-run time average of the occupied density estimates
//! the measured `ρ_ex = Σ αᵢ ρᵢ`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::grid::PddGrid;
use crate::math::{exp, floor, one_minus_exp_neg};
use crate::realisations::{RealisationDensity, RealisationSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Jumps at `rate0` once the noise reaches the separation, never below it.
    Threshold,
    /// Arrhenius-type rate `rate0 · exp(−sep/σ)`.
    #[default]
    Activated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma: f64,
    pub rate0: f64,
    #[serde(default)]
    pub mode: NoiseMode,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { sigma: 1.0, rate0: 1.0, mode: NoiseMode::Activated }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(input("sigma", "must be finite and >= 0"));
        }
        if !(self.rate0 >= 0.0 && self.rate0.is_finite()) {
            return Err(input("rate0", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Probability of a knock-out during one step of length `dt` for a
/// realisation separated by `sep` from its nearest neighbour.
pub fn jump_probability(sep: f64, noise: &NoiseModel, dt: f64) -> f64 {
    if noise.sigma <= 0.0 || noise.rate0 <= 0.0 {
        return 0.0;
    }
    match noise.mode {
        NoiseMode::Threshold => {
            if noise.sigma >= sep {
                one_minus_exp_neg(noise.rate0 * dt)
            } else {
                0.0
            }
        }
        NoiseMode::Activated => one_minus_exp_neg(noise.rate0 * dt * exp(-sep / noise.sigma)),
    }
}

/// Cumulative distribution of `{αᵢ}` for inverse-transform sampling.
#[derive(Debug, Clone)]
pub struct Categorical {
    cumulative: Vec<f64>,
}

impl Categorical {
    pub fn new(alphas: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = alphas
            .iter()
            .map(|a| {
                acc += a;
                acc
            })
            .collect();
        Self { cumulative }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().unwrap_or(&1.0);
        let u = rng.random::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }
}

/// Outcome of one [`step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub next: usize,
    pub redrawn: bool,
}

/// With probability `p` redraw from `dist`, otherwise stay at `current`.
/// No random numbers are consumed when `p == 0`.
pub fn step<R: Rng + ?Sized>(current: usize, p: f64, dist: &Categorical, rng: &mut R) -> StepOutcome {
    if p <= 0.0 {
        return StepOutcome { next: current, redrawn: false };
    }
    if rng.random::<f64>() < p {
        StepOutcome { next: dist.sample(rng), redrawn: true }
    } else {
        StepOutcome { next: current, redrawn: false }
    }
}

/// Reproducible RNG for repetition `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Time series and density estimates of one ensemble run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleTrace {
    pub seed: u64,
    pub stream: u64,
    pub times: Vec<f64>,
    pub occupied: Vec<u32>,
    /// Redraws that landed on a different realisation.
    pub jump_count: u64,
    /// All redraws, including re-selection of the occupied realisation.
    pub redraw_count: u64,
    pub occupancy_freq: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_ex_estimate: Option<PddGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_ex_exact: Option<PddGrid>,
}

/// `Σ wᵢ ρᵢ` over the realisations that carry a density, renormalized by the
/// weight they hold. `None` when no realisation has a density.
pub fn mix_densities(rs: &RealisationSet, weights: &[f64]) -> Option<PddGrid> {
    let template = rs.realisations.iter().find_map(|r| r.pdd.as_ref())?;
    let mut out = PddGrid { x0: template.x0, dx: template.dx, values: vec![0.0; template.values.len()] };
    let mut held = 0.0;
    for (r, w) in rs.realisations.iter().zip(weights) {
        if let Some(pdd) = &r.pdd {
            if *w == 0.0 {
                continue;
            }
            held += w;
            for (o, v) in out.values.iter_mut().zip(&pdd.values) {
                *o += w * v;
            }
        }
    }
    if held > 0.0 {
        for o in &mut out.values {
            *o /= held;
        }
    }
    Some(out)
}

/// Runs the jump process for `floor(t_max/dt)` steps on RNG stream 0.
pub fn run(rs: &RealisationSet, noise: &NoiseModel, t_max: f64, dt: f64, seed: u64) -> Result<EnsembleTrace> {
    run_stream(rs, noise, t_max, dt, seed, 0)
}

/// Same as [`run`] on an explicit RNG stream, for independent repetitions.
pub fn run_stream(
    rs: &RealisationSet,
    noise: &NoiseModel,
    t_max: f64,
    dt: f64,
    seed: u64,
    stream: u64,
) -> Result<EnsembleTrace> {
    rs.validate()?;
    noise.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(input("dt", "must be finite and > 0"));
    }
    let n_steps = floor(t_max / dt);
    if !(n_steps >= 1.0) {
        return Err(input("t_max", "need t_max/dt >= 1"));
    }
    let n_steps = n_steps as usize;
    let n = rs.n_r;
    let dist = Categorical::new(&rs.alphas);
    let probs: Vec<f64> = rs.separations().iter().map(|&s| jump_probability(s, noise, dt)).collect();

    let mut rng = stream_rng(seed, stream);
    let mut current = dist.sample(&mut rng);
    let mut counts = vec![0u64; n];
    let mut times = Vec::with_capacity(n_steps);
    let mut occupied = Vec::with_capacity(n_steps);
    let (mut jumps, mut redraws) = (0u64, 0u64);
    for k in 0..n_steps {
        times.push(k as f64 * dt);
        occupied.push(current as u32);
        counts[current] += 1;
        let out = step(current, probs[current], &dist, &mut rng);
        if out.redrawn {
            redraws += 1;
            if out.next != current {
                jumps += 1;
            }
        }
        current = out.next;
    }
    let occupancy_freq: Vec<f64> = counts.iter().map(|&c| c as f64 / n_steps as f64).collect();
    Ok(EnsembleTrace {
        seed,
        stream,
        times,
        occupied,
        jump_count: jumps,
        redraw_count: redraws,
        rho_ex_estimate: mix_densities(rs, &occupancy_freq),
        rho_ex_exact: mix_densities(rs, &rs.alphas),
        occupancy_freq,
    })
}

/// `ρ_ex(x) = ∫ δ(i) ρᵢ(x) di` by the trapezoidal rule on the tabulation of
/// `density`. `rho_of_i` must return densities on a common grid.
pub fn continuous_expectation(
    density: &RealisationDensity,
    rho_of_i: impl Fn(f64) -> PddGrid,
) -> Result<PddGrid> {
    let total = density.total();
    if (total - 1.0).abs() > crate::realisations::DENSITY_TOL {
        return Err(Error::NotNormalized { sum: total });
    }
    let mut out: Option<PddGrid> = None;
    for (k, w) in density.weights().enumerate() {
        let weight = density.delta[k] * w;
        if weight == 0.0 {
            continue;
        }
        let rho = rho_of_i(density.i(k));
        let acc = out.get_or_insert_with(|| PddGrid { x0: rho.x0, dx: rho.dx, values: vec![0.0; rho.values.len()] });
        if !acc.same_grid(&rho) {
            return Err(input("rho_of_i", "densities must share one grid"));
        }
        for (a, v) in acc.values.iter_mut().zip(&rho.values) {
            *a += weight * v;
        }
    }
    out.ok_or_else(|| input("density", "density of realisations is identically zero"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realisations::{grouped_alphas, uniform_alphas, Realisation};

    fn flat_pdd(n: usize, bump: usize) -> PddGrid {
        // normalized box density on cells bump..bump+10
        let dx = 0.1;
        let mut values = vec![0.0; n];
        for v in &mut values[bump..bump + 10] {
            *v = 1.0;
        }
        let mut g = PddGrid { x0: 0.0, dx, values };
        g.normalize();
        g
    }

    fn set(alphas: Vec<f64>, spacing: f64) -> RealisationSet {
        let realisations = (0..alphas.len())
            .map(|i| Realisation {
                index: i,
                ep_amplitude_shift: i as f64 * spacing,
                barrier_heights: vec![],
                bound: true,
                pdd: Some(flat_pdd(100, 10 * i)),
            })
            .collect();
        RealisationSet::new(realisations, alphas).unwrap()
    }

    #[test]
    fn zero_noise_never_jumps() {
        for mode in [NoiseMode::Threshold, NoiseMode::Activated] {
            let noise = NoiseModel { sigma: 0.0, rate0: 5.0, mode };
            assert_eq!(jump_probability(0.0, &noise, 1.0), 0.0);
            assert_eq!(jump_probability(1.0, &noise, 1.0), 0.0);
        }
    }

    #[test]
    fn threshold_saturates() {
        let noise = NoiseModel { sigma: 1.0, rate0: 1e3, mode: NoiseMode::Threshold };
        assert!(jump_probability(0.5, &noise, 1.0) > 1.0 - 1e-12);
        assert_eq!(jump_probability(1.5, &noise, 1.0), 0.0);
    }

    #[test]
    fn activated_zero_separation() {
        let noise = NoiseModel { sigma: 1e-9, rate0: 2.0, mode: NoiseMode::Activated };
        let p = jump_probability(0.0, &noise, 0.3);
        assert!((p - (1.0 - libm::exp(-0.6))).abs() < 1e-15);
    }

    #[test]
    fn step_identity_when_p_zero() {
        let dist = Categorical::new(&[0.5, 0.5]);
        let mut rng = stream_rng(1, 0);
        for c in 0..2 {
            assert_eq!(step(c, 0.0, &dist, &mut rng), StepOutcome { next: c, redrawn: false });
        }
    }

    #[test]
    fn step_uniform_successors() {
        let dist = Categorical::new(&uniform_alphas(4).unwrap());
        let mut rng = stream_rng(11, 0);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[step(0, 1.0, &dist, &mut rng).next] += 1;
        }
        // multinomial: σ = √(n p (1-p))
        let sigma = libm::sqrt(n as f64 * 0.25 * 0.75);
        for c in counts {
            assert!((c as f64 - 0.25 * n as f64).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn step_grouped_chi_square() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let alphas = grouped_alphas(&[2, 3, 5]).unwrap();
        let dist = Categorical::new(&alphas);
        let mut rng = stream_rng(5, 3);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[step(1, 1.0, &dist, &mut rng).next] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .zip(&alphas)
            .map(|(&c, a)| {
                let e = a * n as f64;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        let p_value = 1.0 - ChiSquared::new(2.0).unwrap().cdf(chi2);
        assert!(p_value > 0.01, "chi2={chi2} p={p_value}");
    }

    #[test]
    fn single_realisation_run() {
        let rs = set(vec![1.0], 1.0);
        let trace = run(&rs, &NoiseModel { sigma: 10.0, rate0: 10.0, mode: NoiseMode::Activated }, 100.0, 0.1, 3).unwrap();
        assert_eq!(trace.jump_count, 0);
        assert_eq!(trace.occupancy_freq, vec![1.0]);
        assert_eq!(trace.rho_ex_estimate, rs.realisations[0].pdd);
    }

    #[test]
    fn strong_noise_converges_to_mixture() {
        let rs = set(uniform_alphas(4).unwrap(), 0.1);
        let noise = NoiseModel { sigma: 1.0, rate0: 20.0, mode: NoiseMode::Activated };
        let trace = run(&rs, &noise, 5_000.0, 0.1, 42).unwrap();
        let est = trace.rho_ex_estimate.unwrap();
        let exact = trace.rho_ex_exact.unwrap();
        assert!(est.l1_distance(&exact) < 0.05);
        assert!((est.integral() - 1.0).abs() < 1e-6);
        assert!((exact.integral() - 1.0).abs() < 1e-9);
        assert!((trace.occupancy_freq.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_noise_point_mass() {
        let rs = set(uniform_alphas(4).unwrap(), 0.1);
        let noise = NoiseModel { sigma: 0.0, rate0: 20.0, mode: NoiseMode::Activated };
        let trace = run(&rs, &noise, 100.0, 0.1, 9).unwrap();
        assert_eq!(trace.jump_count, 0);
        assert_eq!(trace.occupancy_freq.iter().filter(|&&f| f == 1.0).count(), 1);
        let first = trace.occupied[0];
        assert!(trace.occupied.iter().all(|&o| o == first));
    }

    #[test]
    fn run_is_deterministic_per_seed_and_stream() {
        let rs = set(uniform_alphas(3).unwrap(), 0.5);
        let noise = NoiseModel::default();
        let a = run_stream(&rs, &noise, 50.0, 0.1, 7, 2).unwrap();
        let b = run_stream(&rs, &noise, 50.0, 0.1, 7, 2).unwrap();
        assert_eq!(a, b);
        let c = run_stream(&rs, &noise, 50.0, 0.1, 7, 3).unwrap();
        assert_ne!(a.occupied, c.occupied);
    }

    #[test]
    fn run_rejects_short_horizon() {
        let rs = set(vec![1.0], 1.0);
        assert!(run(&rs, &NoiseModel::default(), 0.05, 0.1, 1).is_err());
        assert!(run(&rs, &NoiseModel::default(), 1.0, 0.0, 1).is_err());
    }

    #[test]
    fn continuous_two_halves() {
        let density = crate::realisations::realisation_density(|i| i, (0.0, 2.0), 2001).unwrap();
        let a = flat_pdd(100, 0);
        let b = flat_pdd(100, 50);
        let rho = continuous_expectation(&density, |i| if i < 1.0 { a.clone() } else { b.clone() }).unwrap();
        // trapezoid weights put half a cell of mass at i = 1 on b; tolerance covers it
        let mut expect = a.clone();
        for (e, v) in expect.values.iter_mut().zip(&b.values) {
            *e = 0.5 * (*e + v);
        }
        assert!(rho.l1_distance(&expect) < 2e-3);
        assert!((rho.integral() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn continuous_narrow_peak() {
        // δ concentrated near i = 0.3
        let width = 1e-3;
        let cdf = |i: f64| 0.5 * (1.0 + libm::erf((i - 0.3) / (width * core::f64::consts::SQRT_2)));
        let density = crate::realisations::realisation_density(cdf, (0.0, 1.0), 20001).unwrap();
        let family = |i: f64| {
            let mut g = PddGrid { x0: 0.0, dx: 0.01, values: (0..100).map(|k| 1.0 + i * (k as f64 * 0.01)).collect() };
            g.normalize();
            g
        };
        let rho = continuous_expectation(&density, family).unwrap();
        assert!(rho.l1_distance(&family(0.3)) < 1e-4);
    }

    #[test]
    fn continuous_rejects_unnormalized() {
        let mut density = crate::realisations::realisation_density(|i| i, (0.0, 1.0), 11).unwrap();
        density.delta.iter_mut().for_each(|d| *d *= 2.0);
        assert!(continuous_expectation(&density, |_| flat_pdd(20, 0)).is_err());
    }
}
