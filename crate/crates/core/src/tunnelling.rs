//! Chaotic jump-tunnelling probabilities.
//!
//! Both quantities are plain realisation measures: the summed `αᵢ` of the
//! realisations whose barrier satisfies a height condition. Unbound
//! realisations have lost their barrier and count as height 0.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::realisations::RealisationSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transmission {
    pub p_beta: f64,
    pub a_set: Vec<usize>,
    /// Realisations whose height equals `ε_s` exactly (excluded from `a_set`).
    pub ties: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeJumps {
    #[serde(rename = "P_beta")]
    pub p_total: f64,
    pub a_minus_set: Vec<usize>,
}

/// Serialized tunnelling summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnellingReport {
    pub beta: usize,
    pub eps_s: f64,
    pub p_beta: f64,
    #[serde(rename = "P_beta")]
    pub p_total: f64,
    #[serde(rename = "A_set")]
    pub a_set: Vec<usize>,
    #[serde(rename = "A_minus_set")]
    pub a_minus_set: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ties: Vec<usize>,
}

/// Height of barrier `beta` in every realisation.
pub fn barrier_heights(rs: &RealisationSet, beta: usize) -> Result<Vec<f64>> {
    let available = rs
        .realisations
        .iter()
        .filter(|r| r.bound)
        .map(|r| r.barrier_heights.len())
        .min();
    match available {
        Some(n) if beta >= n => return Err(Error::BarrierOutOfRange { beta, available: n }),
        None if beta > 0 => return Err(Error::BarrierOutOfRange { beta, available: 0 }),
        _ => {}
    }
    Ok(rs
        .realisations
        .iter()
        .map(|r| if r.bound { r.barrier_heights[beta] } else { 0.0 })
        .collect())
}

/// `p_β(ε_s) = Σ_{i: height_i < ε_s} αᵢ`.
pub fn transmission(rs: &RealisationSet, beta: usize, eps_s: f64) -> Result<Transmission> {
    let heights = barrier_heights(rs, beta)?;
    let mut p_beta = 0.0;
    let mut a_set = Vec::new();
    let mut ties = Vec::new();
    for (i, (h, a)) in heights.iter().zip(&rs.alphas).enumerate() {
        if *h < eps_s {
            p_beta += a;
            a_set.push(i);
        } else if *h == eps_s {
            ties.push(i);
        }
    }
    Ok(Transmission { p_beta, a_set, ties })
}

/// `P_β = Σ αᵢ` over realisations whose barrier is lower than the
/// unperturbed one by more than `delta_eps_s`.
pub fn negative_jump_total(
    rs: &RealisationSet,
    beta: usize,
    unperturbed_height: f64,
    delta_eps_s: f64,
) -> Result<NegativeJumps> {
    if !(delta_eps_s > 0.0) {
        return Err(input("delta_eps_s", "must be > 0"));
    }
    let heights = barrier_heights(rs, beta)?;
    let cut = unperturbed_height - delta_eps_s;
    let mut p_total = 0.0;
    let mut a_minus_set = Vec::new();
    for (i, (h, a)) in heights.iter().zip(&rs.alphas).enumerate() {
        if *h < cut {
            p_total += a;
            a_minus_set.push(i);
        }
    }
    Ok(NegativeJumps { p_total, a_minus_set })
}

pub fn tunnelling_report(
    rs: &RealisationSet,
    beta: usize,
    eps_s: f64,
    unperturbed_height: f64,
    delta_eps_s: f64,
) -> Result<TunnellingReport> {
    let t = transmission(rs, beta, eps_s)?;
    let n = negative_jump_total(rs, beta, unperturbed_height, delta_eps_s)?;
    Ok(TunnellingReport {
        beta,
        eps_s,
        p_beta: t.p_beta,
        p_total: n.p_total,
        a_set: t.a_set,
        a_minus_set: n.a_minus_set,
        ties: t.ties,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realisations::{uniform_alphas, Realisation};
    use alloc::vec;

    fn fixture(heights: &[f64]) -> RealisationSet {
        let realisations = heights
            .iter()
            .enumerate()
            .map(|(i, h)| Realisation {
                index: i,
                ep_amplitude_shift: 0.0,
                barrier_heights: vec![*h],
                bound: true,
                pdd: None,
            })
            .collect();
        RealisationSet::new(realisations, uniform_alphas(heights.len()).unwrap()).unwrap()
    }

    #[test]
    fn transmission_examples() {
        let rs = fixture(&[1.2, 0.8, 2.0, 0.4]);
        let t = transmission(&rs, 0, 1.0).unwrap();
        assert_eq!(t.a_set, vec![1, 3]);
        assert_eq!(t.p_beta, 0.5);
        assert_eq!(transmission(&rs, 0, 0.1).unwrap().p_beta, 0.0);
        assert_eq!(transmission(&rs, 0, 5.0).unwrap().p_beta, 1.0);
        assert!(matches!(transmission(&rs, 1, 1.0), Err(Error::BarrierOutOfRange { beta: 1, .. })));
    }

    #[test]
    fn ties_are_excluded_and_flagged() {
        let rs = fixture(&[1.0, 0.5]);
        let t = transmission(&rs, 0, 1.0).unwrap();
        assert_eq!(t.a_set, vec![1]);
        assert_eq!(t.ties, vec![0]);
    }

    #[test]
    fn negative_jump_examples() {
        let rs = fixture(&[1.2, 0.8, 2.0, 0.4]);
        let n = negative_jump_total(&rs, 0, 1.2, 0.3).unwrap();
        assert_eq!(n.a_minus_set, vec![1, 3]);
        assert_eq!(n.p_total, 0.5);
        assert_eq!(negative_jump_total(&rs, 0, 1.2, 100.0).unwrap().p_total, 0.0);
        let flat = fixture(&[0.0; 4]);
        assert_eq!(negative_jump_total(&flat, 0, 1.0, 0.5).unwrap().p_total, 1.0);
        assert!(negative_jump_total(&rs, 0, 1.2, 0.0).is_err());
    }

    #[test]
    fn unbound_realisation_always_transmits() {
        let mut rs = fixture(&[3.0, 3.0]);
        rs.realisations[1].bound = false;
        rs.realisations[1].barrier_heights.clear();
        let t = transmission(&rs, 0, 1.0).unwrap();
        assert_eq!(t.a_set, vec![1]);
        assert_eq!(t.p_beta, 0.5);
    }

    #[test]
    fn report_json_field_names() {
        let rs = fixture(&[1.2, 0.8, 2.0, 0.4]);
        let r = tunnelling_report(&rs, 0, 1.0, 1.2, 0.3).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        for key in ["beta", "eps_s", "p_beta", "P_beta", "A_set", "A_minus_set"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}
