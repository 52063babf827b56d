//! Uniform meshes and densities tabulated on them.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Interior points of a Dirichlet mesh on `[x_min, x_max]`.
///
/// The boundary points carry the zero boundary condition and are not stored,
/// so `spacing = (x_max - x_min) / (n + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Mesh {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Self {
        Self { x_min, x_max, n }
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n as f64 + 1.0)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 1.0) * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }
}

/// A density sampled on a uniform grid: `values[k]` is the value at `x0 + k·dx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PddGrid {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<f64>,
}

impl PddGrid {
    pub fn x(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.dx
    }

    /// Riemann sum over the grid. With zero Dirichlet ends this equals the
    /// trapezoidal rule on the full mesh.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx
    }

    /// L¹ distance between two densities on the same grid.
    pub fn l1_distance(&self, other: &PddGrid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.dx
    }

    pub fn same_grid(&self, other: &PddGrid) -> bool {
        self.values.len() == other.values.len()
            && (self.x0 - other.x0).abs() <= 1e-12 * (1.0 + self.x0.abs())
            && (self.dx - other.dx).abs() <= 1e-12 * self.dx.abs()
    }

    /// Rescales in place to unit integral. No-op on an all-zero density.
    pub fn normalize(&mut self) {
        let total = self.integral();
        if total > 0.0 {
            for v in &mut self.values {
                *v /= total;
            }
        }
    }
}
