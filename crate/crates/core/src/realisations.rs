//! The realisation set `{ℛᵢ, αᵢ, N_ℛ}`: counting, probabilities, jump
//! realisations and the continuous density of realisations.

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::grid::{Mesh, PddGrid};
use crate::math::{sqrt, TAU};
use crate::params::SystemParams;
use crate::spectrum::{self, PotentialSpec, Spectrum};

/// Tolerance on `Σαᵢ = 1`.
pub const ALPHA_SUM_TOL: f64 = 1e-12;
/// Tolerance on `∫ρᵢ dx = 1` and `∫δ di = 1`.
pub const DENSITY_TOL: f64 = 1e-9;

/// One realisation of the effective potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realisation {
    pub index: usize,
    /// Amplitude shift of the effective potential; `0` for the main group.
    #[serde(rename = "shift")]
    pub ep_amplitude_shift: f64,
    /// Height of each labelled barrier in the shifted potential.
    pub barrier_heights: Vec<f64>,
    /// `false` when the shifted potential no longer confines the level.
    #[serde(default = "yes")]
    pub bound: bool,
    #[serde(rename = "pdd_grid", default, skip_serializing_if = "Option::is_none")]
    pub pdd: Option<PddGrid>,
}

fn yes() -> bool {
    true
}

/// Complete set of realisations with their probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealisationSet {
    pub n_r: usize,
    pub alphas: Vec<f64>,
    pub realisations: Vec<Realisation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_counts: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_domain: Option<(f64, f64)>,
}

impl RealisationSet {
    pub fn new(realisations: Vec<Realisation>, alphas: Vec<f64>) -> Result<Self> {
        let rs = Self { n_r: realisations.len(), alphas, realisations, group_counts: None, omega_domain: None };
        rs.validate()?;
        Ok(rs)
    }

    /// Set with probabilities `Nᵢ/ΣN` from group counts.
    pub fn with_groups(realisations: Vec<Realisation>, counts: Vec<u64>) -> Result<Self> {
        let alphas = grouped_alphas(&counts)?;
        let mut rs = Self::new(realisations, alphas)?;
        rs.group_counts = Some(counts);
        Ok(rs)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_r == 0 || self.n_r != self.realisations.len() || self.alphas.len() != self.n_r {
            return Err(input("realisations", "n_r, alphas and realisations must agree and be non-empty"));
        }
        if self.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(input("alphas", "every alpha must lie in [0, 1]"));
        }
        let sum: f64 = self.alphas.iter().sum();
        if (sum - 1.0).abs() > ALPHA_SUM_TOL {
            return Err(Error::NotNormalized { sum });
        }
        for r in &self.realisations {
            if let Some(pdd) = &r.pdd {
                if pdd.values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
                    return Err(input("pdd", format!("realisation {} has a negative density", r.index)));
                }
                if (pdd.integral() - 1.0).abs() > DENSITY_TOL {
                    return Err(input("pdd", format!("realisation {} density is not normalized", r.index)));
                }
            }
        }
        if let Some(counts) = &self.group_counts {
            if counts.len() != self.n_r {
                return Err(input("group_counts", "one count per realisation"));
            }
        }
        Ok(())
    }

    /// Shift of realisation `i` to its nearest neighbour in shift space;
    /// `+∞` for a single realisation.
    pub fn separations(&self) -> Vec<f64> {
        let shifts: Vec<f64> = self.realisations.iter().map(|r| r.ep_amplitude_shift).collect();
        shifts
            .iter()
            .enumerate()
            .map(|(i, a)| {
                shifts
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, b)| (a - b).abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }
}

/// Number of realisations at energy `energy`:
/// `min(1 + #{ε* ∈ eps_star_set : ε* < E}, N_p)`.
///
/// The boundary facts (a single realisation below the quantum border, at most
/// `N_p` in total, unit steps at the discrete `ε*`) fix the shape; the linear
/// count in between is a modelling choice.
pub fn count_realisations(energy: f64, spec: &Spectrum, n_p: usize) -> usize {
    let below = spec.eps_star_set.iter().filter(|&&e| e < energy).count();
    (1 + below).min(n_p.max(1))
}

/// `αᵢ = 1/N_ℛ`.
pub fn uniform_alphas(n_r: usize) -> Result<Vec<f64>> {
    if n_r == 0 {
        return Err(input("n_r", "need at least one realisation"));
    }
    Ok(alloc::vec![1.0 / n_r as f64; n_r])
}

/// `αᵢ = Nᵢ/ΣNⱼ`.
pub fn grouped_alphas(counts: &[u64]) -> Result<Vec<f64>> {
    if counts.is_empty() {
        return Err(input("group_counts", "empty"));
    }
    if counts.contains(&0) {
        return Err(input("group_counts", "every group needs at least one member"));
    }
    let total: u64 = counts.iter().sum();
    Ok(counts.iter().map(|&c| c as f64 / total as f64).collect())
}

/// Clusters border energies into discernible groups: neighbours (after
/// sorting) closer than `threshold` share a group. Returns the group size of
/// each cluster in ascending energy order.
pub fn discernible_groups(border_energies: &[f64], threshold: f64) -> Vec<u64> {
    let mut sorted: Vec<f64> = border_energies.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut counts = Vec::new();
    let mut prev: Option<f64> = None;
    for e in sorted {
        match prev {
            Some(p) if e - p < threshold => *counts.last_mut().unwrap() += 1,
            _ => counts.push(1),
        }
        prev = Some(e);
    }
    counts
}

/// Default discernibility threshold, `Δε_s/10`.
pub fn default_group_threshold(spec: &Spectrum) -> f64 {
    spec.delta_eps_s / 10.0
}

/// How the `k`-th jump pair scales its shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftLadder {
    /// `±k·ħω_p·g`.
    #[default]
    Laddered,
    /// `±ħω_p·g` for every pair.
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JumpOptions {
    /// Number of perturbation harmonics retained; must be even.
    pub n_p: usize,
    pub ladder: ShiftLadder,
    /// Level whose density is the realisation PDD.
    pub level_index: usize,
    /// Energy used for the effective `ω_p` when `params.omega_p` is unset.
    pub energy: Option<f64>,
}

impl Default for JumpOptions {
    fn default() -> Self {
        Self { n_p: 2, ladder: ShiftLadder::Laddered, level_index: 0, energy: None }
    }
}

/// Perturbation frequency used for the jump shifts: `params.omega_p` when set,
/// otherwise `2π√(2E/m)/d_p`.
pub fn effective_omega_p(params: &SystemParams, energy: Option<f64>) -> Result<f64> {
    if params.omega_p > 0.0 {
        return Ok(params.omega_p);
    }
    match energy {
        Some(e) if e > 0.0 && e.is_finite() => Ok(TAU * sqrt(2.0 * e / params.m) / params.d_p),
        _ => Err(input("omega_p", "set omega_p or give a positive energy for the effective frequency")),
    }
}

/// Shifts of the main realisation followed by the `±` pairs.
pub fn jump_shifts(params: &SystemParams, omega_p: f64, n_p: usize, ladder: ShiftLadder) -> Vec<f64> {
    let quantum = params.hbar * omega_p * params.g_jump as f64;
    let mut shifts = alloc::vec![0.0];
    for k in 1..=n_p / 2 {
        let step = match ladder {
            ShiftLadder::Laddered => k as f64 * quantum,
            ShiftLadder::Flat => quantum,
        };
        shifts.push(step);
        shifts.push(-step);
    }
    shifts
}

/// Grid indices of the labelled barriers of `values`: interior local maxima,
/// or both ends of the mesh when there are none.
pub fn barrier_sites(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut sites: Vec<usize> = (1..n.saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .collect();
    if sites.is_empty() && n > 0 {
        sites.push(0);
        if n > 1 {
            sites.push(n - 1);
        }
    }
    sites
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Main realisation plus `n_p/2` pairs with amplitude shifts `±ħω_p g`.
///
/// The shift is applied on the barrier region only (where `V₀` exceeds its
/// median), so large negative shifts can turn a barrier into a well. Each
/// realisation gets the density of the configured level of its own shifted
/// potential. A realisation whose barriers all sink below the floor of the
/// unshifted well, or whose level climbs above every barrier, is kept but
/// flagged unbound, without a density or barrier heights. Probabilities are uniform.
pub fn build_jump_realisations(
    pot: &PotentialSpec,
    spec: &Spectrum,
    params: &SystemParams,
    opts: &JumpOptions,
) -> Result<RealisationSet> {
    params.validate()?;
    pot.validate()?;
    if opts.n_p % 2 == 1 {
        return Err(input("n_p", "number of harmonics must be even (pairs of jumps)"));
    }
    if opts.level_index >= spec.len() {
        return Err(Error::InsufficientLevels { needed: opts.level_index + 1, available: spec.len() });
    }
    let omega_p = effective_omega_p(params, opts.energy)?;
    let mesh: Mesh = pot.mesh();
    let base = pot.sample(&mesh, params);
    let threshold = median(&base);
    let floor = base.iter().copied().fold(f64::INFINITY, f64::min);
    let sites = barrier_sites(&base);

    let mut realisations = Vec::new();
    for (index, shift) in jump_shifts(params, omega_p, opts.n_p, opts.ladder).into_iter().enumerate() {
        let shifted = |x: f64| {
            let v = pot.eval(x, params);
            if v > threshold { v + shift } else { v }
        };
        let heights: Vec<f64> = sites.iter().map(|&i| shifted(mesh.x(i))).collect();
        let (energy, pdd) = spectrum::level_density(&shifted, &mesh, params, opts.level_index)?;
        let top = heights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // a barrier pushed below the original well floor has become a well
        let bound = top > floor && energy < top;
        realisations.push(Realisation {
            index,
            ep_amplitude_shift: shift,
            barrier_heights: if bound { heights } else { Vec::new() },
            bound,
            pdd: bound.then_some(pdd),
        });
    }
    let alphas = uniform_alphas(realisations.len())?;
    RealisationSet::new(realisations, alphas)
}

/// Tabulated density of realisations `δ(i) = dα/di` on `[i0, i0 + (n-1)·di]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealisationDensity {
    pub i0: f64,
    pub di: f64,
    pub delta: Vec<f64>,
}

impl RealisationDensity {
    pub fn i(&self, k: usize) -> f64 {
        self.i0 + k as f64 * self.di
    }

    /// Trapezoidal weights of the tabulation.
    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.delta.len();
        (0..n).map(move |k| if k == 0 || k + 1 == n { 0.5 * self.di } else { self.di })
    }

    pub fn total(&self) -> f64 {
        self.delta.iter().zip(self.weights()).map(|(d, w)| d * w).sum()
    }

    /// Trapezoidal integral over the grid nodes inside `[a, b]`.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        let n = self.delta.len();
        let mut mass = 0.0;
        for k in 0..n.saturating_sub(1) {
            let (l, r) = (self.i(k), self.i(k + 1));
            // clip each cell to [a, b], linear interpolation inside the cell
            let lo = l.max(a);
            let hi = r.min(b);
            if hi <= lo {
                continue;
            }
            let at = |t: f64| self.delta[k] + (self.delta[k + 1] - self.delta[k]) * (t - l) / (r - l);
            mass += 0.5 * (at(lo) + at(hi)) * (hi - lo);
        }
        mass
    }
}

/// Tabulates `δ(i) = dα/di` by finite differences of the cumulative
/// probability `alpha` over `omega = (a, b)` on `n` nodes and rescales it to
/// unit integral. Interior nodes use central differences, the two ends use
/// second-order one-sided stencils.
pub fn realisation_density(
    alpha: impl Fn(f64) -> f64,
    omega: (f64, f64),
    n: usize,
) -> Result<RealisationDensity> {
    let (a, b) = omega;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(input("omega", "need a finite interval a < b"));
    }
    if n < 3 {
        return Err(input("n", "need at least 3 nodes"));
    }
    let di = (b - a) / (n - 1) as f64;
    let values: Vec<f64> = (0..n).map(|k| alpha(a + k as f64 * di)).collect();
    let mut delta = Vec::with_capacity(n);
    for k in 0..n {
        let d = if k == 0 {
            (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * di)
        } else if k == n - 1 {
            (3.0 * values[k] - 4.0 * values[k - 1] + values[k - 2]) / (2.0 * di)
        } else {
            (values[k + 1] - values[k - 1]) / (2.0 * di)
        };
        delta.push(d);
    }
    for (k, d) in delta.iter_mut().enumerate() {
        if !d.is_finite() {
            return Err(input("alpha", "non-finite derivative"));
        }
        if *d < -DENSITY_TOL {
            return Err(Error::NegativeDensity { at: a + k as f64 * di, value: *d });
        }
        if *d < 0.0 {
            *d = 0.0;
        }
    }
    let mut density = RealisationDensity { i0: a, di, delta };
    let total = density.total();
    if !(total > 0.0) {
        return Err(input("alpha", "cumulative probability is constant over omega"));
    }
    for d in &mut density.delta {
        *d /= total;
    }
    Ok(density)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::SolveOptions;
    use alloc::vec;

    fn spec_with_stars(stars: Vec<f64>) -> Spectrum {
        Spectrum::from_levels(stars, &SystemParams::default(), &SolveOptions::default()).unwrap()
    }

    #[test]
    fn counting_examples() {
        let s = spec_with_stars(vec![0.5, 1.5, 2.5]);
        assert_eq!(count_realisations(1.0, &s, 10), 2);
        assert_eq!(count_realisations(0.2, &s, 10), 1);
        assert_eq!(count_realisations(10.0, &s, 3), 3);
        // strict inequality at the step
        assert_eq!(count_realisations(1.5, &s, 10), 2);
        assert_eq!(count_realisations(1.5 + 1e-12, &s, 10), 3);
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(uniform_alphas(4).unwrap(), vec![0.25; 4]);
        assert_eq!(uniform_alphas(1).unwrap(), vec![1.0]);
        let third = uniform_alphas(3).unwrap();
        assert_eq!(third.iter().sum::<f64>(), 1.0);
        assert!(uniform_alphas(0).is_err());

        assert_eq!(grouped_alphas(&[2, 3, 5]).unwrap(), vec![0.2, 0.3, 0.5]);
        assert_eq!(grouped_alphas(&[7]).unwrap(), vec![1.0]);
        assert_eq!(grouped_alphas(&[1, 1, 1, 1]).unwrap(), uniform_alphas(4).unwrap());
        assert!(grouped_alphas(&[]).is_err());
        assert!(grouped_alphas(&[1, 0]).is_err());
    }

    #[test]
    fn grouping_by_threshold() {
        assert_eq!(discernible_groups(&[1.0, 1.05, 2.0, 3.0, 3.01, 3.02], 0.1), vec![2, 1, 3]);
        assert_eq!(discernible_groups(&[0.0, 1.0], 0.1), vec![1, 1]);
    }

    #[test]
    fn shifts_pair_up() {
        let p = SystemParams { g_jump: 2, ..Default::default() };
        assert_eq!(jump_shifts(&p, 1.5, 2, ShiftLadder::Laddered), vec![0.0, 3.0, -3.0]);
        assert_eq!(jump_shifts(&p, 1.0, 4, ShiftLadder::Laddered), vec![0.0, 2.0, -2.0, 4.0, -4.0]);
        assert_eq!(jump_shifts(&p, 1.0, 4, ShiftLadder::Flat), vec![0.0, 2.0, -2.0, 2.0, -2.0]);
        assert_eq!(jump_shifts(&p, 1.0, 0, ShiftLadder::Flat), vec![0.0]);
    }

    #[test]
    fn effective_omega_p_fallback() {
        let p = SystemParams::default();
        assert!(effective_omega_p(&p, None).is_err());
        // d_p = 2π, m = 1: ω_p = √(2E)
        assert!((effective_omega_p(&p, Some(2.0)).unwrap() - 2.0).abs() < 1e-14);
        let q = SystemParams { omega_p: 0.7, ..p };
        assert_eq!(effective_omega_p(&q, Some(2.0)).unwrap(), 0.7);
    }

    #[test]
    fn barrier_sites_fallback_to_walls() {
        assert_eq!(barrier_sites(&[3.0, 1.0, 0.0, 1.0, 3.0]), vec![0, 4]);
        assert_eq!(barrier_sites(&[0.0, 2.0, 0.0, 1.0, 0.0]), vec![1, 3]);
    }

    #[test]
    fn build_jump_realisations_n_p_two() {
        let pot = PotentialSpec::harmonic(1.0, -6.0, 6.0, 400);
        let p = SystemParams { omega_p: 0.5, ..Default::default() };
        let spec = crate::spectrum::solve_bound_states(&pot, &p, 3).unwrap();
        let rs = build_jump_realisations(&pot, &spec, &p, &JumpOptions::default()).unwrap();
        assert_eq!(rs.n_r, 3);
        let shifts: Vec<f64> = rs.realisations.iter().map(|r| r.ep_amplitude_shift).collect();
        assert_eq!(shifts, vec![0.0, 0.5, -0.5]);
        assert!((rs.alphas.iter().sum::<f64>() - 1.0).abs() <= ALPHA_SUM_TOL);
        for r in &rs.realisations {
            assert!(r.bound);
            let pdd = r.pdd.as_ref().unwrap();
            assert!((pdd.integral() - 1.0).abs() < DENSITY_TOL);
            assert_eq!(r.barrier_heights.len(), 2);
        }
        // walls at x = ±(6 - h) are in the shifted region
        let h0 = rs.realisations[0].barrier_heights[0];
        assert!((rs.realisations[1].barrier_heights[0] - (h0 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn huge_negative_shift_unbinds() {
        let pot = PotentialSpec::harmonic(1.0, -3.0, 3.0, 200);
        let p = SystemParams { omega_p: 10.0, ..Default::default() };
        let spec = crate::spectrum::solve_bound_states(&pot, &p, 2).unwrap();
        let rs = build_jump_realisations(&pot, &spec, &p, &JumpOptions::default()).unwrap();
        assert_eq!(rs.n_r, 3);
        let down = &rs.realisations[2];
        assert_eq!(down.ep_amplitude_shift, -10.0);
        assert!(!down.bound);
        assert!(down.pdd.is_none());
        assert!(rs.realisations[0].bound);
    }

    #[test]
    fn odd_n_p_and_zero_g_rejected() {
        let pot = PotentialSpec::harmonic(1.0, -6.0, 6.0, 128);
        let p = SystemParams { omega_p: 0.5, ..Default::default() };
        let spec = crate::spectrum::solve_bound_states(&pot, &p, 2).unwrap();
        let odd = JumpOptions { n_p: 3, ..Default::default() };
        assert!(build_jump_realisations(&pot, &spec, &p, &odd).is_err());
        let zero_g = SystemParams { g_jump: 0, ..p };
        assert!(build_jump_realisations(&pot, &spec, &zero_g, &JumpOptions::default()).is_err());
    }

    #[test]
    fn density_uniform_and_quadratic() {
        let d = realisation_density(|i| i, (0.0, 1.0), 101).unwrap();
        assert!(d.delta.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!((d.total() - 1.0).abs() < 1e-12);

        let d = realisation_density(|i| i * i, (0.0, 1.0), 201).unwrap();
        for (k, v) in d.delta.iter().enumerate() {
            assert!((v - 2.0 * d.i(k)).abs() < 1e-6, "k={k}");
        }
        assert!((d.total() - 1.0).abs() < DENSITY_TOL);
    }

    #[test]
    fn density_rejects_decreasing_cumulative() {
        assert!(matches!(
            realisation_density(|i| 1.0 - i, (0.0, 1.0), 11),
            Err(Error::NegativeDensity { .. })
        ));
    }

    #[test]
    fn piecewise_groups_reproduce_masses() {
        // cumulative α for groups (2,3,5) occupying [0,1], [1,2], [2,3]
        let alphas = grouped_alphas(&[2, 3, 5]).unwrap();
        let cum = |i: f64| {
            let mut acc = 0.0;
            for (g, a) in alphas.iter().enumerate() {
                acc += a * (i - g as f64).clamp(0.0, 1.0);
            }
            acc
        };
        let d = realisation_density(cum, (0.0, 3.0), 3001).unwrap();
        // independent quadrature: midpoint sums of δ over each group interval
        for (g, a) in alphas.iter().enumerate() {
            let mass = d.mass_between(g as f64, g as f64 + 1.0);
            assert!((mass - a).abs() < 1e-3, "group {g}: {mass} vs {a}");
        }
    }

    #[test]
    fn separations_nearest_neighbour() {
        let mk = |i, s| Realisation { index: i, ep_amplitude_shift: s, barrier_heights: vec![], bound: true, pdd: None };
        let rs = RealisationSet::new(vec![mk(0, 0.0), mk(1, 1.0), mk(2, -3.0)], uniform_alphas(3).unwrap()).unwrap();
        assert_eq!(rs.separations(), vec![1.0, 1.0, 3.0]);
        let single = RealisationSet::new(vec![mk(0, 0.0)], vec![1.0]).unwrap();
        assert_eq!(single.separations(), vec![f64::INFINITY]);
    }

    #[test]
    fn set_validation() {
        let mk = |i| Realisation { index: i, ep_amplitude_shift: 0.0, barrier_heights: vec![], bound: true, pdd: None };
        assert!(RealisationSet::new(vec![mk(0), mk(1)], vec![0.5, 0.6]).is_err());
        assert!(RealisationSet::new(vec![], vec![]).is_err());
        let rs = RealisationSet::with_groups(vec![mk(0), mk(1)], vec![1, 3]).unwrap();
        assert_eq!(rs.alphas, vec![0.25, 0.75]);
    }
}
