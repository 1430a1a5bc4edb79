//! Dense linear algebra helpers shared by the frame, multiplier and channel code.

use nalgebra::{DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tf::{CMatrix, C64};

/// Dimension up to which operator norms use a full SVD.
pub const SVD_MAX_DIM: usize = 256;
pub const POWER_TOL: f64 = 1e-10;
pub const POWER_MAX_ITERS: usize = 10_000;
const POWER_SEED: u64 = 0x005e_ed0f_9ab0;

/// Eigenvalues (ascending) and matching eigenvectors of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix) -> Self {
        // Symmetrize so roundoff asymmetry cannot leak into the spectrum.
        let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(herm);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
        HermitianEigen { values, vectors }
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `V diag(h(lambda)) V^*`.
    pub fn apply_fn(&self, h: impl Fn(f64) -> f64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (c, &lam) in self.values.iter().enumerate() {
            let w = h(lam);
            scaled.column_mut(c).scale_mut(w);
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Largest singular value from a full SVD.
pub fn op_norm_svd(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Largest singular value by power iteration on `M^* M` from a fixed-seed
/// start vector. Stops when the Rayleigh quotient changes by less than
/// `tol` relative, or after `max_iters` steps.
pub fn op_norm_power(m: &CMatrix, tol: f64, max_iters: usize) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut v = DVector::from_fn(m.ncols(), |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    v /= C64::new(v.norm(), 0.0);
    let mut lambda = 0.0;
    for _ in 0..max_iters {
        let w = m.adjoint() * (m * &v);
        let next = v.dotc(&w).re;
        let wn = w.norm();
        if wn == 0.0 {
            return 0.0;
        }
        v = w / C64::new(wn, 0.0);
        if (next - lambda).abs() <= tol * next.abs() {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.max(0.0).sqrt()
}

/// Operator (spectral) norm: SVD up to [`SVD_MAX_DIM`], power iteration beyond.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.nrows().max(m.ncols()) <= SVD_MAX_DIM {
        op_norm_svd(m)
    } else {
        op_norm_power(m, POWER_TOL, POWER_MAX_ITERS)
    }
}

/// 2-norm condition number from singular values; infinite when singular.
pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = m.clone().singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Solves `m x = y` by LU; `None` when a pivot vanishes or the result is not finite.
pub fn solve(m: &CMatrix, y: &DVector<C64>) -> Option<DVector<C64>> {
    let x = m.clone().lu().solve(y)?;
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(x)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.norm()
}
