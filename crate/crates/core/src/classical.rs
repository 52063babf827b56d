//! Chirikov standard map `p′ = p + K sin θ`, `θ′ = θ + p′ (mod 2π)`.
//!
//! Orbits start uniformly on `θ ∈ [0, 2π)` with `p = 0`. Momentum is not
//! wrapped, so its variance grows linearly in the diffusive regime. Orbits are
//! processed in fixed blocks whose moment sums are reduced in block order, so
//! any parallel schedule over blocks reproduces the sequential result bit for
//! bit.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::stream_rng;
use crate::error::{input, Result};
use crate::math::{rem_euclid, sin, TAU};
use crate::params::SystemParams;
use crate::spectrum::Spectrum;

/// Orbits per reduction block.
pub const BLOCK: usize = 64;
/// Saturation criterion: tail slope below this fraction of `K²/2`.
pub const BOUNDED_FRACTION: f64 = 0.1;
/// `K/K_c` band where the map verdict is not compared.
pub const FUZZ_BAND: (f64, f64) = (0.7, 1.3);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    #[serde(rename = "K")]
    pub k: f64,
    pub n_orbits: usize,
    pub n_steps: usize,
    pub seed: u64,
}

impl MapParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return Err(input("K", "must be finite and >= 0"));
        }
        if self.n_orbits == 0 {
            return Err(input("n_orbits", "must be >= 1"));
        }
        if self.n_steps == 0 {
            return Err(input("n_steps", "must be >= 1"));
        }
        Ok(())
    }

    pub fn n_blocks(&self) -> usize {
        self.n_orbits.div_ceil(BLOCK)
    }

    pub fn block(&self, b: usize) -> Range<usize> {
        b * BLOCK..((b + 1) * BLOCK).min(self.n_orbits)
    }
}

/// Per-step sums of `p` and `p²` over a set of orbits (index 0 is the
/// initial condition).
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub sum_p: Vec<f64>,
    pub sum_p2: Vec<f64>,
}

impl Moments {
    pub fn zeros(n_steps: usize) -> Self {
        Self { count: 0, sum_p: vec![0.0; n_steps + 1], sum_p2: vec![0.0; n_steps + 1] }
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        for (a, b) in self.sum_p.iter_mut().zip(&other.sum_p) {
            *a += b;
        }
        for (a, b) in self.sum_p2.iter_mut().zip(&other.sum_p2) {
            *a += b;
        }
    }

    pub fn variance(&self) -> Vec<f64> {
        let n = self.count as f64;
        self.sum_p
            .iter()
            .zip(&self.sum_p2)
            .map(|(s, s2)| {
                let mean = s / n;
                (s2 / n - mean * mean).max(0.0)
            })
            .collect()
    }
}

/// Moments of the orbits in `orbits`. Orbit `j` draws its initial angle from
/// RNG stream `j`.
pub fn orbit_moments(params: &MapParams, orbits: Range<usize>) -> Moments {
    let mut m = Moments::zeros(params.n_steps);
    for j in orbits {
        let mut rng = stream_rng(params.seed, j as u64);
        let mut theta = rng.random::<f64>() * TAU;
        let mut p = 0.0_f64;
        m.count += 1;
        for t in 1..=params.n_steps {
            p += params.k * sin(theta);
            theta = rem_euclid(theta + p, TAU);
            m.sum_p[t] += p;
            m.sum_p2[t] += p * p;
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionResult {
    pub var_p_series: Vec<f64>,
    #[serde(rename = "D_est")]
    pub d_est: f64,
    pub bounded: bool,
}

/// Least-squares slope of `var_p(t)` over the last half of the steps.
pub fn tail_slope(var_p: &[f64]) -> f64 {
    let n = var_p.len();
    let start = n / 2;
    let pts = &var_p[start..];
    let m = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let t_mean = (start as f64 + (n - 1) as f64) / 2.0;
    let v_mean = pts.iter().sum::<f64>() / m;
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, v) in pts.iter().enumerate() {
        let dt = (start + k) as f64 - t_mean;
        num += dt * (v - v_mean);
        den += dt * dt;
    }
    num / den
}

/// Fit and verdict from reduced moments.
pub fn diffusion_from_moments(k: f64, moments: &Moments) -> DiffusionResult {
    let var_p_series = moments.variance();
    let slope = tail_slope(&var_p_series);
    let quasilinear = 0.5 * k * k;
    DiffusionResult {
        d_est: slope.max(0.0),
        bounded: slope <= BOUNDED_FRACTION * quasilinear,
        var_p_series,
    }
}

/// Sequential reference implementation.
pub fn iterate_standard_map(params: &MapParams) -> Result<DiffusionResult> {
    params.validate()?;
    let mut total = Moments::zeros(params.n_steps);
    for b in 0..params.n_blocks() {
        total.merge(&orbit_moments(params, params.block(b)));
    }
    Ok(diffusion_from_moments(params.k, &total))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    Agrees,
    Disagrees,
    IndeterminateByDesign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceVerdict {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "K_c")]
    pub k_c: f64,
    /// Stochasticity parameter the map was run at, `K/K_c`.
    pub k_map: f64,
    #[serde(rename = "D_est")]
    pub d_est: f64,
    pub bounded: bool,
    /// `None` inside the fuzz band.
    pub agrees: Option<bool>,
    pub status: Agreement,
}

/// `K` from the spectrum at `energy` and `K_c = (2π/λ)²`. The map is run at
/// `K/K_c`, which is `K` itself for the default `λ = 2π`.
pub fn correspondence_inputs(spec: &Spectrum, params: &SystemParams, energy: f64) -> Result<(f64, f64)> {
    let k = crate::borders::chaoticity_k(params, spec, energy)?;
    Ok((k, crate::borders::k_c(params)))
}

pub fn correspondence_verdict(k: f64, k_c: f64, result: &DiffusionResult) -> CorrespondenceVerdict {
    let ratio = k / k_c;
    let diffusive_expected = ratio > 1.0;
    let (agrees, status) = if (FUZZ_BAND.0..=FUZZ_BAND.1).contains(&ratio) {
        (None, Agreement::IndeterminateByDesign)
    } else {
        let ok = diffusive_expected != result.bounded;
        (Some(ok), if ok { Agreement::Agrees } else { Agreement::Disagrees })
    };
    CorrespondenceVerdict { k, k_c, k_map: ratio, d_est: result.d_est, bounded: result.bounded, agrees, status }
}

/// Runs the map at the chaoticity implied by `(spec, params, energy)` and
/// compares its verdict to `K ≷ K_c`.
pub fn correspondence_check(
    spec: &Spectrum,
    params: &SystemParams,
    energy: f64,
    n_orbits: usize,
    n_steps: usize,
    seed: u64,
) -> Result<CorrespondenceVerdict> {
    let (k, k_c) = correspondence_inputs(spec, params, energy)?;
    let map = MapParams { k: k / k_c, n_orbits, n_steps, seed };
    let result = iterate_standard_map(&map)?;
    Ok(correspondence_verdict(k, k_c, &result))
}
