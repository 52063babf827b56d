//! Bound states of the unperturbed potential `V₀(x)` and the spectral
//! quantities the border formulas consume.
//!
//! The Hamiltonian `-(ħ²/2m) ψ'' + V₀ ψ` is discretized with the 3-point
//! symmetric stencil and Dirichlet walls at the domain ends. The resulting
//! symmetric tridiagonal matrix is solved by Sturm bisection. By default the
//! levels are Richardson-extrapolated from the requested mesh and a mesh with
//! half as many points, which removes the leading `O(h²)` error term.

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::grid::{Mesh, PddGrid};
use crate::math::{cos, sqrt, PI, TAU};
use crate::params::SystemParams;
use crate::tridiag::SymTridiagonal;

/// Shape of the unperturbed potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    /// `½ m ω² x²`.
    Harmonic { omega: f64 },
    /// `Σ coeffs[k] · xᵏ`.
    Polynomial { coeffs: Vec<f64> },
    /// Tabulated `(x, V₀(x))`, linearly interpolated, `x` strictly ascending.
    Table { x: Vec<f64>, v: Vec<f64> },
    /// `ε_s (1 − cos(2πx/d_s)) / 2`: wells at multiples of `d_s`, barriers of height `ε_s`.
    Periodic { d_s: f64, amplitude: f64 },
}

/// Potential plus the mesh it is solved on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(flatten)]
    pub kind: PotentialKind,
    pub x_min: f64,
    pub x_max: f64,
    pub grid_n: usize,
}

pub const MIN_GRID_N: usize = 64;

impl PotentialSpec {
    pub fn harmonic(omega: f64, x_min: f64, x_max: f64, grid_n: usize) -> Self {
        Self { kind: PotentialKind::Harmonic { omega }, x_min, x_max, grid_n }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_n < MIN_GRID_N {
            return Err(input("grid_n", format!("must be >= {MIN_GRID_N}, got {}", self.grid_n)));
        }
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max) {
            return Err(input("domain", "need finite x_min < x_max"));
        }
        match &self.kind {
            PotentialKind::Harmonic { omega } => {
                if !(omega.is_finite() && *omega > 0.0) {
                    return Err(input("omega", "must be finite and > 0"));
                }
            }
            PotentialKind::Polynomial { coeffs } => {
                if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(input("coeffs", "need at least one finite coefficient"));
                }
            }
            PotentialKind::Table { x, v } => {
                if x.len() != v.len() || x.len() < 2 {
                    return Err(input("table", "need >= 2 rows with matching columns"));
                }
                if x.iter().chain(v).any(|t| !t.is_finite()) {
                    return Err(input("table", "non-finite potential value"));
                }
                if x.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(input("table", "x must be strictly ascending"));
                }
                if self.x_min < x[0] || self.x_max > x[x.len() - 1] {
                    return Err(input("domain", "domain extends beyond the tabulated range"));
                }
            }
            PotentialKind::Periodic { d_s, amplitude } => {
                if !(d_s.is_finite() && *d_s > 0.0) {
                    return Err(input("d_s", "must be finite and > 0"));
                }
                if !amplitude.is_finite() {
                    return Err(input("amplitude", "must be finite"));
                }
            }
        }
        Ok(())
    }

    /// `V₀(x)`.
    pub fn eval(&self, x: f64, params: &SystemParams) -> f64 {
        match &self.kind {
            PotentialKind::Harmonic { omega } => 0.5 * params.m * omega * omega * x * x,
            PotentialKind::Polynomial { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
            PotentialKind::Table { x: xs, v } => interpolate(xs, v, x),
            PotentialKind::Periodic { d_s, amplitude } => {
                0.5 * amplitude * (1.0 - cos(TAU * x / d_s))
            }
        }
    }

    pub fn mesh(&self) -> Mesh {
        Mesh::new(self.x_min, self.x_max, self.grid_n)
    }

    pub fn sample(&self, mesh: &Mesh, params: &SystemParams) -> Vec<f64> {
        mesh.points().map(|x| self.eval(x, params)).collect()
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, PotentialKind::Periodic { .. })
    }
}

fn interpolate(xs: &[f64], vs: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&t| t <= x);
    if k == 0 {
        return vs[0];
    }
    if k >= xs.len() {
        return vs[xs.len() - 1];
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    let t = (x - x0) / (x1 - x0);
    vs[k - 1] + t * (vs[k] - vs[k - 1])
}

/// Knobs for [`solve_bound_states_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// Level whose gap to the next one is the effective `Δε_s`.
    pub reference_level: usize,
    /// Stand-in `s ∈ [0, 1]` for the unknown `sin²α` factor in `ε* = s·ε_p g_p0 + ε_sn`.
    pub star_phase: f64,
    /// Richardson-extrapolate against a mesh with half the points.
    pub extrapolate: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { reference_level: 0, star_phase: 0.0, extrapolate: true }
    }
}

/// Quasi-free zone data for periodic potentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneData {
    pub d_s: f64,
    /// Half the symmetric Brillouin zone, `π/d_s`.
    pub delta_k_s: f64,
    /// Quasi-free wavenumber of the reference level, `√(2mε)/ħ`.
    pub k_s: f64,
    /// First-order estimate of the first zone-edge gap, `2|V_G|`.
    pub first_gap: f64,
}

/// Bound-state levels and derived spectral quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub levels: Vec<f64>,
    pub reference_level: usize,
    pub delta_eps_s: f64,
    pub omega_s: f64,
    pub eps_s0: f64,
    pub eps_star_set: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zone_data: Option<ZoneData>,
}

impl Spectrum {
    /// Builds a spectrum from known levels (analytic or external).
    pub fn from_levels(levels: Vec<f64>, params: &SystemParams, opts: &SolveOptions) -> Result<Self> {
        params.validate()?;
        if levels.iter().any(|l| !l.is_finite()) {
            return Err(input("levels", "non-finite level"));
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(input("levels", "levels must be strictly ascending"));
        }
        let r = opts.reference_level;
        if levels.len() < r + 2 {
            return Err(Error::InsufficientLevels { needed: r + 2, available: levels.len() });
        }
        if !(0.0..=1.0).contains(&opts.star_phase) {
            return Err(input("star_phase", "must lie in [0, 1]"));
        }
        let delta_eps_s = levels[r + 1] - levels[r];
        let offset = opts.star_phase * params.eps_p_g_p0();
        let eps_star_set = levels.iter().map(|e| e + offset).collect();
        Ok(Self {
            eps_s0: levels[0],
            omega_s: delta_eps_s / params.hbar,
            delta_eps_s,
            eps_star_set,
            reference_level: r,
            levels,
            zone_data: None,
        })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

pub(crate) fn hamiltonian(values: &[f64], mesh: &Mesh, params: &SystemParams) -> SymTridiagonal {
    let h = mesh.spacing();
    let t = params.hbar * params.hbar / (2.0 * params.m * h * h);
    let diag = values.iter().map(|v| 2.0 * t + v).collect();
    let off = alloc::vec![-t; values.len().saturating_sub(1)];
    SymTridiagonal::new(diag, off)
}

/// Raw 3-point eigenvalues of an arbitrary potential function on `mesh`.
pub(crate) fn raw_levels(
    potential: &dyn Fn(f64) -> f64,
    mesh: &Mesh,
    params: &SystemParams,
    count: usize,
) -> Result<(SymTridiagonal, Vec<f64>)> {
    let values: Vec<f64> = mesh.points().map(potential).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(input("potential", "non-finite potential value on the mesh"));
    }
    let h = hamiltonian(&values, mesh, params);
    let levels = h.lowest_eigenvalues(count);
    Ok((h, levels))
}

/// Number of levels lying below both wall values of the potential.
fn count_confined(levels: &[f64], potential: &dyn Fn(f64) -> f64, mesh: &Mesh) -> usize {
    let wall = potential(mesh.x_min).min(potential(mesh.x_max));
    levels.iter().take_while(|&&e| e < wall).count()
}

/// Eigenvalues on `pot.grid_n` points, optionally extrapolated.
pub fn solve_levels(
    pot: &PotentialSpec,
    params: &SystemParams,
    n_levels: usize,
    extrapolate: bool,
) -> Result<Vec<f64>> {
    pot.validate()?;
    params.validate()?;
    if n_levels == 0 {
        return Err(input("n_levels", "must be >= 1"));
    }
    let v0 = |x: f64| pot.eval(x, params);
    let fine = pot.mesh();
    let (_, levels) = raw_levels(&v0, &fine, params, n_levels)?;
    let found = if pot.is_periodic() { levels.len() } else { count_confined(&levels, &v0, &fine) };
    if found < n_levels {
        return Err(Error::TooFewBoundStates { requested: n_levels, found });
    }
    if !extrapolate {
        return Ok(levels);
    }
    let coarse = Mesh::new(pot.x_min, pot.x_max, pot.grid_n / 2);
    let (_, coarse_levels) = raw_levels(&v0, &coarse, params, n_levels)?;
    let (hf, hc) = (fine.spacing(), coarse.spacing());
    let (hf2, hc2) = (hf * hf, hc * hc);
    Ok(levels
        .iter()
        .zip(&coarse_levels)
        .map(|(ef, ec)| (hc2 * ef - hf2 * ec) / (hc2 - hf2))
        .collect())
}

/// The `n_levels` lowest bound states with default [`SolveOptions`].
pub fn solve_bound_states(pot: &PotentialSpec, params: &SystemParams, n_levels: usize) -> Result<Spectrum> {
    solve_bound_states_with(pot, params, n_levels, &SolveOptions::default())
}

pub fn solve_bound_states_with(
    pot: &PotentialSpec,
    params: &SystemParams,
    n_levels: usize,
    opts: &SolveOptions,
) -> Result<Spectrum> {
    let levels = solve_levels(pot, params, n_levels, opts.extrapolate)?;
    let mut spec = Spectrum::from_levels(levels, params, opts)?;
    if let PotentialKind::Periodic { d_s, amplitude } = pot.kind {
        let reference = spec.levels[spec.reference_level].max(0.0);
        spec.zone_data = Some(ZoneData {
            d_s,
            delta_k_s: PI / d_s,
            k_s: sqrt(2.0 * params.m * reference) / params.hbar,
            first_gap: 0.5 * amplitude.abs(),
        });
    }
    Ok(spec)
}

/// Normalized probability density `|ψ_level|²` of `potential` on `mesh`.
///
/// Returns the level energy alongside the density.
pub(crate) fn level_density(
    potential: &dyn Fn(f64) -> f64,
    mesh: &Mesh,
    params: &SystemParams,
    level: usize,
) -> Result<(f64, PddGrid)> {
    let (h, levels) = raw_levels(potential, mesh, params, level + 1)?;
    let energy = levels[level];
    let psi = h.eigenvector(energy);
    let mut pdd = PddGrid {
        x0: mesh.x(0),
        dx: mesh.spacing(),
        values: psi.iter().map(|p| p * p).collect(),
    };
    pdd.normalize();
    Ok((energy, pdd))
}

/// Effective frequency `ω_s/λ` and period `T_s = 2π/ω_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveFrequency {
    pub omega_eff: f64,
    pub t_s: f64,
}

pub fn effective_frequency(spec: &Spectrum, params: &SystemParams) -> Result<EffectiveFrequency> {
    if !(params.lambda_anh >= 1.0) {
        return Err(input("lambda_anh", "must be >= 1"));
    }
    Ok(EffectiveFrequency { omega_eff: spec.omega_s / params.lambda_anh, t_s: TAU / spec.omega_s })
}

/// Quasi-free separation `2ħ²k_sΔk_s/m` with `Δk_s = π/d_s`.
pub fn quasi_free_separation(k_s: f64, d_s: f64, params: &SystemParams) -> f64 {
    2.0 * params.hbar * params.hbar * k_s * (PI / d_s) / params.m
}

/// Level separation of zone `zone_index` (1-based) of a periodic potential in
/// the quasi-free approximation, `k_s = zone_index·π/d_s`.
pub fn zone_separation(pot: &PotentialSpec, params: &SystemParams, zone_index: usize) -> Result<f64> {
    let PotentialKind::Periodic { d_s, .. } = pot.kind else {
        return Err(input("potential", "zone separation needs a periodic potential"));
    };
    if zone_index == 0 {
        return Err(input("zone_index", "zones are numbered from 1"));
    }
    let k_s = zone_index as f64 * PI / d_s;
    Ok(quasi_free_separation(k_s, d_s, params))
}
