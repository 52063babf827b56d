//! Physical constants and perturbation parameters shared by every formula.

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::math::TAU;

/// Physical constants and potential/perturbation parameters.
///
/// `g_p0 = 2π/d_p` is always derived from `d_p` through [`SystemParams::g_p0`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub m: f64,
    pub hbar: f64,
    /// Spatial period of the perturbation.
    pub d_p: f64,
    /// Period of the unperturbed potential (above-barrier runs).
    #[serde(default = "default_period")]
    pub d_s: f64,
    /// Perturbation amplitude.
    pub eps_p: f64,
    /// Integer `g` of the jump amplitude shift `±ħω_p g`.
    #[serde(default = "default_g_jump")]
    pub g_jump: i32,
    /// Anharmonicity constant `λ` in `ω_s → ω_s/λ`.
    #[serde(default = "default_lambda")]
    pub lambda_anh: f64,
    /// Border-width constant `λ′`.
    #[serde(default = "default_lambda")]
    pub lambda_prime: f64,
    /// Perturbation frequency; `0` means "not set" in time-independent runs.
    #[serde(default)]
    pub omega_p: f64,
}

fn default_period() -> f64 {
    1.0
}

fn default_g_jump() -> i32 {
    1
}

fn default_lambda() -> f64 {
    1.0
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            m: 1.0,
            hbar: 1.0,
            d_p: TAU,
            d_s: 1.0,
            eps_p: 1.0,
            g_jump: 1,
            lambda_anh: 1.0,
            lambda_prime: 1.0,
            omega_p: 0.0,
        }
    }
}

impl SystemParams {
    /// Reciprocal-lattice vector of the perturbation, `2π/d_p`.
    pub fn g_p0(&self) -> f64 {
        TAU / self.d_p
    }

    /// `ε_p · g_p0`, the energy scale of the perturbation in the border formulas.
    pub fn eps_p_g_p0(&self) -> f64 {
        self.eps_p * self.g_p0()
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(input(field, alloc::format!("must be finite and > 0, got {v}")))
            }
        }
        positive("m", self.m)?;
        positive("hbar", self.hbar)?;
        positive("d_p", self.d_p)?;
        positive("d_s", self.d_s)?;
        if !(self.eps_p.is_finite() && self.eps_p >= 0.0) {
            return Err(input("eps_p", "must be finite and >= 0"));
        }
        if self.g_jump == 0 {
            return Err(input("g_jump", "must be a nonzero integer"));
        }
        if !(self.lambda_anh >= 1.0 && self.lambda_anh.is_finite()) {
            return Err(input("lambda_anh", "must be >= 1"));
        }
        if !(self.lambda_prime >= 1.0 && self.lambda_prime.is_finite()) {
            return Err(input("lambda_prime", "must be >= 1"));
        }
        if !(self.omega_p.is_finite() && self.omega_p >= 0.0) {
            return Err(input("omega_p", "must be finite and >= 0"));
        }
        Ok(())
    }
}
