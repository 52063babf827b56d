//! Chaos borders and regime classification.
//!
//! Borders that diverge (vanishing perturbation, vanishing quantum border)
//! are returned as `f64::INFINITY` so parameter sweeps stay total.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::math::{ceil, sqrt, PI, TAU};
use crate::params::SystemParams;
use crate::spectrum::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    NoChaosBelowQuantumBorder,
    GlobalChaos,
    IntermittentChaos,
    AsymptoticRegularity,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::NoChaosBelowQuantumBorder => "no_chaos_below_quantum_border",
            Regime::GlobalChaos => "global_chaos",
            Regime::IntermittentChaos => "intermittent_chaos",
            Regime::AsymptoticRegularity => "asymptotic_regularity",
        }
    }
}

/// Kind of perturbation being analysed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    #[default]
    TimeIndependent,
    TimeDependent,
    /// Quasi-free motion above a periodic potential of amplitude `eps_s`.
    AboveBarrier { eps_s: f64 },
}

/// Classical border `E_c = (Δε_s)²/(4 ε_p g_p0) + ε*`.
pub fn classical_border(spec: &Spectrum, params: &SystemParams, eps_star: f64) -> f64 {
    let scale = params.eps_p_g_p0();
    if scale <= 0.0 {
        return f64::INFINITY;
    }
    spec.delta_eps_s * spec.delta_eps_s / (4.0 * scale) + eps_star
}

/// The perturbation energy scale `ε_p g_p0 = 2π²ħ²/(m d_p²)` of the
/// semiclassical situation.
pub fn semiclassical_eps_p_g_p0(params: &SystemParams) -> f64 {
    2.0 * PI * PI * params.hbar * params.hbar / (params.m * params.d_p * params.d_p)
}

/// Semiclassical border `E_c = ω_s² d_p² m / (8π²)`.
pub fn classical_border_semiclassical(spec: &Spectrum, params: &SystemParams) -> f64 {
    spec.omega_s * spec.omega_s * params.d_p * params.d_p * params.m / (8.0 * PI * PI)
}

/// Time to cross one perturbation period at energy `energy`, `d_p √(m/2E)`.
pub fn perturbation_period(params: &SystemParams, energy: f64) -> f64 {
    params.d_p * sqrt(params.m / (2.0 * energy))
}

/// Chaoticity `K = m ω_s² d_p² / (2E)`.
pub fn chaoticity_k(params: &SystemParams, spec: &Spectrum, energy: f64) -> Result<f64> {
    if !(energy > 0.0) {
        return Err(input("energy", "must be > 0"));
    }
    Ok(params.m * spec.omega_s * spec.omega_s * params.d_p * params.d_p / (2.0 * energy))
}

/// Energy at which [`chaoticity_k`] equals `k`.
pub fn energy_for_k(params: &SystemParams, spec: &Spectrum, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(input("K", "must be > 0"));
    }
    Ok(params.m * spec.omega_s * spec.omega_s * params.d_p * params.d_p / (2.0 * k))
}

/// Classical critical chaoticity `(2π/λ)²`.
pub fn k_c(params: &SystemParams) -> f64 {
    let r = TAU / params.lambda_anh;
    r * r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumBorder {
    pub e_q: f64,
    pub e_q_star: f64,
    /// `E*_q − E_q`.
    pub width: f64,
}

/// `E_q` is the lowest `ε*`; `E*_q` is the `⌈λ⌉`-th member of the `ε*` set.
pub fn quantum_border(spec: &Spectrum, params: &SystemParams) -> Result<QuantumBorder> {
    let idx = ceil(params.lambda_anh) as usize;
    let needed = (idx + 1).max(2);
    if spec.eps_star_set.len() < needed {
        return Err(Error::InsufficientLevels { needed, available: spec.eps_star_set.len() });
    }
    let e_q = spec.eps_star_set[0];
    let e_q_star = spec.eps_star_set[idx];
    Ok(QuantumBorder { e_q, e_q_star, width: e_q_star - e_q })
}

/// Quantum critical chaoticity `K_q = (Δε_s)² d_p² m / (2ħ² E_q)`.
pub fn k_q(spec: &Spectrum, params: &SystemParams, e_q: f64) -> f64 {
    if e_q == 0.0 {
        return f64::INFINITY;
    }
    spec.delta_eps_s * spec.delta_eps_s * params.d_p * params.d_p * params.m
        / (2.0 * params.hbar * params.hbar * e_q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowWidth {
    /// `E_c − E_q` with `E_c` evaluated at the given `ε*`.
    #[serde(with = "crate::serde_inf")]
    pub exact: f64,
    /// `(Δε_s)²/(4 ε_p g_p0)`.
    #[serde(with = "crate::serde_inf")]
    pub approximate: f64,
}

pub fn window_width(spec: &Spectrum, params: &SystemParams, eps_star: f64) -> WindowWidth {
    let e_q = spec.eps_star_set[0];
    let e_c = classical_border(spec, params, eps_star);
    WindowWidth { exact: e_c - e_q, approximate: classical_border(spec, params, 0.0) }
}

/// One interval `E_qi < E < E_ci` of pronounced chaos.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub e_q: f64,
    #[serde(with = "crate::serde_inf")]
    pub e_c: f64,
}

impl Domain {
    pub fn contains(&self, energy: f64) -> bool {
        self.e_q < energy && energy < self.e_c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domains {
    pub intervals: Vec<Domain>,
    #[serde(with = "crate::serde_inf")]
    pub delta_e: f64,
}

impl Domains {
    /// One window covering every `ε*`: the global-chaos case.
    pub fn is_merged(&self) -> bool {
        self.intervals.len() == 1
    }
}

/// Chaos domains `(E_qi, E_qi + ΔE)` for every `ε*`, with overlapping or
/// touching intervals merged. A single resulting interval is the merged
/// global-chaos window; several are the intermittent regime.
pub fn intermittent_domains(spec: &Spectrum, params: &SystemParams) -> Domains {
    // E_c(ε*₀) − ε*₀ without the cancellation
    let delta_e = window_width(spec, params, spec.eps_star_set[0]).approximate;
    let mut intervals: Vec<Domain> = Vec::new();
    for &lo in &spec.eps_star_set {
        let hi = lo + delta_e;
        match intervals.last_mut() {
            Some(last) if lo <= last.e_c => last.e_c = last.e_c.max(hi),
            _ => intervals.push(Domain { e_q: lo, e_c: hi }),
        }
    }
    Domains { intervals, delta_e }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeDependentBorders {
    /// Critical perturbation frequency `Δε_s/ħ`.
    pub omega_0c: f64,
    /// `K = (2π/λ)² (ω_s/ω_p)²`.
    pub k: f64,
    pub chaotic: bool,
}

pub fn time_dependent_borders(spec: &Spectrum, params: &SystemParams) -> Result<TimeDependentBorders> {
    let omega_p = params.omega_p;
    if !(omega_p > 0.0) {
        return Err(input("omega_p", "must be > 0 for a time-dependent perturbation"));
    }
    let omega_0c = spec.delta_eps_s / params.hbar;
    let ratio = spec.omega_s / omega_p;
    Ok(TimeDependentBorders { omega_0c, k: k_c(params) * ratio * ratio, chaotic: omega_p < omega_0c })
}

/// Above-barrier border `E_c = (d_p/d_s)² ε_s`.
pub fn above_barrier_border(params: &SystemParams, eps_s: f64) -> f64 {
    let r = params.d_p / params.d_s;
    r * r * eps_s
}

/// Every border of a parameter point plus its regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub mode: Mode,
    pub energy: f64,
    #[serde(with = "crate::serde_inf")]
    pub e_c: f64,
    pub e_c_semiclassical: f64,
    #[serde(default, with = "crate::serde_inf::option", skip_serializing_if = "Option::is_none")]
    pub e_q: Option<f64>,
    #[serde(default, with = "crate::serde_inf::option", skip_serializing_if = "Option::is_none")]
    pub e_q_star: Option<f64>,
    #[serde(default, with = "crate::serde_inf::option", skip_serializing_if = "Option::is_none")]
    pub delta_e: Option<f64>,
    #[serde(with = "crate::serde_inf")]
    pub delta_e_c: f64,
    pub k: f64,
    pub k_c: f64,
    #[serde(default, with = "crate::serde_inf::option", skip_serializing_if = "Option::is_none")]
    pub k_q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_0c: Option<f64>,
    pub t_p: f64,
    pub t_s: f64,
    pub domains: Vec<Domain>,
    pub regime: Regime,
}

/// Classifies the regime at `energy`.
///
/// Time-independent: below `E_q` there is no chaos; inside a chaos domain the
/// regime is global (single merged window) or intermittent (several domains);
/// elsewhere the motion is asymptotically regular. Time-dependent: chaos iff
/// `ω_p < ω_0c`, and no quantum border is reported. Above-barrier: chaos iff
/// `E < (d_p/d_s)² ε_s`.
pub fn classify(energy: f64, spec: &Spectrum, params: &SystemParams, mode: Mode) -> Result<RegimeReport> {
    params.validate()?;
    let e_c0 = classical_border(spec, params, spec.eps_star_set[0]);
    let t_s = TAU / spec.omega_s;
    let e_c_semiclassical = classical_border_semiclassical(spec, params);
    let kc = k_c(params);
    let lambda_prime2 = params.lambda_prime * params.lambda_prime;

    match mode {
        Mode::TimeIndependent => {
            let qb = quantum_border(spec, params)?;
            let domains = intermittent_domains(spec, params);
            let k = chaoticity_k(params, spec, energy)?;
            let regime = if energy <= qb.e_q {
                Regime::NoChaosBelowQuantumBorder
            } else if domains.intervals.iter().any(|d| d.contains(energy)) {
                if domains.is_merged() { Regime::GlobalChaos } else { Regime::IntermittentChaos }
            } else {
                Regime::AsymptoticRegularity
            };
            Ok(RegimeReport {
                mode,
                energy,
                e_c: e_c0,
                e_c_semiclassical,
                e_q: Some(qb.e_q),
                e_q_star: Some(qb.e_q_star),
                delta_e: Some(domains.delta_e),
                delta_e_c: e_c0 / lambda_prime2,
                k,
                k_c: kc,
                k_q: Some(k_q(spec, params, qb.e_q)),
                omega_0c: None,
                t_p: perturbation_period(params, energy),
                t_s,
                domains: domains.intervals,
                regime,
            })
        }
        Mode::TimeDependent => {
            let td = time_dependent_borders(spec, params)?;
            Ok(RegimeReport {
                mode,
                energy,
                e_c: e_c0,
                e_c_semiclassical,
                e_q: None,
                e_q_star: None,
                delta_e: None,
                delta_e_c: e_c0 / lambda_prime2,
                k: td.k,
                k_c: kc,
                k_q: None,
                omega_0c: Some(td.omega_0c),
                t_p: TAU / params.omega_p,
                t_s,
                domains: Vec::new(),
                regime: if td.chaotic { Regime::GlobalChaos } else { Regime::AsymptoticRegularity },
            })
        }
        Mode::AboveBarrier { eps_s } => {
            let e_c = above_barrier_border(params, eps_s);
            let k = chaoticity_k(params, spec, energy)?;
            Ok(RegimeReport {
                mode,
                energy,
                e_c,
                e_c_semiclassical,
                e_q: None,
                e_q_star: None,
                delta_e: None,
                delta_e_c: e_c / lambda_prime2,
                k,
                k_c: kc,
                k_q: None,
                omega_0c: None,
                t_p: perturbation_period(params, energy),
                t_s,
                domains: alloc::vec![Domain { e_q: 0.0, e_c }],
                regime: if energy < e_c { Regime::GlobalChaos } else { Regime::AsymptoticRegularity },
            })
        }
    }
}
