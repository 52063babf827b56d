//! Symmetric tridiagonal eigenproblems.
//!
//! Eigenvalues come from Sturm-sequence bisection, eigenvectors from inverse
//! iteration. Both are `O(n)` per sweep, which keeps 4096-point meshes cheap.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::sqrt;

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`
/// (`off.len() == diag.len() - 1`).
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1), "off-diagonal length mismatch");
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `lambda` (negative LDLᵀ pivots).
    pub fn count_below(&self, lambda: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let coupling = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] / q };
            q = self.diag[i] - lambda - coupling;
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + lambda.abs() + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing every eigenvalue.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection to full precision.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.len());
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// The `count` smallest eigenvalues in ascending order.
    pub fn lowest_eigenvalues(&self, count: usize) -> Vec<f64> {
        (0..count.min(self.len())).map(|k| self.eigenvalue(k)).collect()
    }

    /// Unit-norm eigenvector for a converged eigenvalue via inverse iteration.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        let scale = self.diag.iter().fold(0.0_f64, |a, d| a.max(d.abs()))
            + self.off.iter().fold(0.0_f64, |a, e| a.max(e.abs()));
        // shift just off the eigenvalue so the factorization stays nonsingular
        let shift = lambda + 1e-13 * scale.max(1e-300);
        let mut v = vec![1.0; n];
        for (i, x) in v.iter_mut().enumerate() {
            // non-symmetric start to avoid orthogonality with odd states
            *x += 1e-3 * (i as f64 / n as f64);
        }
        let mut work = vec![0.0; n];
        for _ in 0..4 {
            self.solve_shifted(shift, &v, &mut work);
            let norm = sqrt(work.iter().map(|x| x * x).sum::<f64>());
            if !(norm.is_finite() && norm > 0.0) {
                break;
            }
            for (vi, wi) in v.iter_mut().zip(&work) {
                *vi = wi / norm;
            }
        }
        // fix the sign so the largest component is positive
        let (mut imax, mut amax) = (0, 0.0);
        for (i, x) in v.iter().enumerate() {
            if x.abs() > amax {
                amax = x.abs();
                imax = i;
            }
        }
        if v[imax] < 0.0 {
            for x in &mut v {
                *x = -*x;
            }
        }
        v
    }

    /// Solves `(T - shift·I) x = rhs` with the Thomas algorithm, replacing
    /// vanishing pivots by a tiny value.
    fn solve_shifted(&self, shift: f64, rhs: &[f64], out: &mut [f64]) {
        let n = self.len();
        let tiny = f64::EPSILON * 1e-3;
        let mut c_prime = vec![0.0; n];
        let mut pivot = self.diag[0] - shift;
        if pivot.abs() < tiny {
            pivot = tiny;
        }
        out[0] = rhs[0] / pivot;
        if n > 1 {
            c_prime[0] = self.off[0] / pivot;
        }
        for i in 1..n {
            pivot = self.diag[i] - shift - self.off[i - 1] * c_prime[i - 1];
            if pivot.abs() < tiny {
                pivot = tiny;
            }
            if i + 1 < n {
                c_prime[i] = self.off[i] / pivot;
            }
            out[i] = (rhs[i] - self.off[i - 1] * out[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            out[i] -= c_prime[i] * out[i + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn discrete_laplacian_eigenvalues_are_analytic() {
        let n = 50;
        let t = laplacian(n);
        for k in 0..n {
            let exact = 2.0 - 2.0 * libm::cos((k as f64 + 1.0) * core::f64::consts::PI / (n as f64 + 1.0));
            assert!((t.eigenvalue(k) - exact).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn eigenvector_satisfies_equation() {
        let t = SymTridiagonal::new(
            (0..40).map(|i| 2.0 + 0.01 * (i as f64)).collect(),
            vec![-1.0; 39],
        );
        for k in 0..3 {
            let lam = t.eigenvalue(k);
            let v = t.eigenvector(lam);
            let n = t.len();
            let mut resid = 0.0_f64;
            for i in 0..n {
                let mut tv = t.diag[i] * v[i];
                if i > 0 {
                    tv += t.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    tv += t.off[i] * v[i + 1];
                }
                resid = resid.max((tv - lam * v[i]).abs());
            }
            assert!(resid < 1e-10, "k={k} resid={resid}");
        }
    }

    #[test]
    fn count_below_brackets_spectrum() {
        let t = laplacian(10);
        let (lo, hi) = t.gershgorin();
        assert_eq!(t.count_below(lo - 1e-9), 0);
        assert_eq!(t.count_below(hi + 1e-9), 10);
    }
}
