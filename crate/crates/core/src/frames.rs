//! Gabor systems `{pi(lambda) g : lambda in Lambda}` on Z_L: frame operator,
//! frame and Riesz bounds, canonical dual and canonical tight windows.

use serde::{Deserialize, Serialize};

use crate::error::{GaborError, Result};
use crate::linalg::HermitianEigen;
use crate::tf::{synthesis_matrix, CMatrix, Signal, TFLattice, C64};

/// Bounds within this distance of 1 make a system Parseval.
pub const PARSEVAL_TOL: f64 = 1e-10;
/// Relative threshold (times the upper bound) separating rank deficiency from roundoff.
pub const FRAME_REL_TOL: f64 = 1e-10;
/// Eigenvalues below this fraction of the largest are clipped when forming `S^{-1/2}`.
const CLIP_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameStatus {
    Parseval,
    Frame,
    RieszSequence,
    Degenerate,
}

#[derive(Debug, Clone)]
pub struct GaborSystem {
    window: Signal,
    lattice: TFLattice,
    bounds: (f64, f64),
    status: FrameStatus,
    frame_eigen: HermitianEigen,
}

impl GaborSystem {
    pub fn new(window: Signal, lattice: TFLattice) -> Result<Self> {
        if window.len() != lattice.signal_len() {
            return Err(GaborError::DimensionMismatch(format!(
                "window length {} vs lattice L={}",
                window.len(),
                lattice.signal_len()
            )));
        }
        if window.norm() == 0.0 {
            return Err(GaborError::DegenerateWindow);
        }
        let phi = synthesis_matrix(&window, &lattice);
        let frame_eigen = HermitianEigen::new(&(&phi * phi.adjoint()));
        let (lo, hi) = (frame_eigen.min().max(0.0), frame_eigen.max());
        let status = if (lo - 1.0).abs() <= PARSEVAL_TOL && (hi - 1.0).abs() <= PARSEVAL_TOL {
            FrameStatus::Parseval
        } else if lo > FRAME_REL_TOL * hi {
            FrameStatus::Frame
        } else if lattice.size() <= lattice.signal_len() && {
            let gram = HermitianEigen::new(&(phi.adjoint() * &phi));
            gram.min() > FRAME_REL_TOL * gram.max()
        } {
            FrameStatus::RieszSequence
        } else {
            FrameStatus::Degenerate
        };
        Ok(GaborSystem { window, lattice, bounds: (lo, hi), status, frame_eigen })
    }

    pub fn window(&self) -> &Signal {
        &self.window
    }

    pub fn lattice(&self) -> &TFLattice {
        &self.lattice
    }

    pub fn status(&self) -> FrameStatus {
        self.status
    }

    /// `(A, B)`: extreme eigenvalues of the frame operator.
    pub fn frame_bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn is_frame(&self) -> bool {
        matches!(self.status, FrameStatus::Frame | FrameStatus::Parseval)
    }

    /// Both bounds within `tol` of 1.
    pub fn is_parseval_within(&self, tol: f64) -> bool {
        (self.bounds.0 - 1.0).abs() <= tol && (self.bounds.1 - 1.0).abs() <= tol
    }

    /// Columns `pi(lambda) g` in lattice order.
    pub fn synthesis_matrix(&self) -> CMatrix {
        synthesis_matrix(&self.window, &self.lattice)
    }

    /// `S = sum_lambda (pi(lambda) g)(pi(lambda) g)^*`.
    pub fn frame_operator(&self) -> CMatrix {
        let phi = self.synthesis_matrix();
        &phi * phi.adjoint()
    }

    /// `G[lambda, mu] = <pi(mu) g, pi(lambda) g>`.
    pub fn gram_matrix(&self) -> CMatrix {
        let phi = self.synthesis_matrix();
        phi.adjoint() * &phi
    }

    /// Extreme eigenvalues of the lattice Gram matrix.
    pub fn riesz_check(&self) -> (f64, f64) {
        let eig = HermitianEigen::new(&self.gram_matrix());
        (eig.min().max(0.0), eig.max())
    }

    fn require_frame(&self) -> Result<()> {
        if self.is_frame() {
            Ok(())
        } else {
            Err(GaborError::NotAFrame)
        }
    }

    fn with_window(&self, transform: CMatrix) -> Result<GaborSystem> {
        let g = transform * self.window.as_vector();
        GaborSystem::new(Signal::from_vector(g)?, self.lattice)
    }

    /// System with window `S^{-1/2} g`, a Parseval frame.
    pub fn canonical_tight(&self) -> Result<GaborSystem> {
        self.require_frame()?;
        let cutoff = CLIP_REL * self.frame_eigen.max();
        if self.frame_eigen.values.iter().any(|&l| l < cutoff) {
            return Err(GaborError::NotAFrame);
        }
        let first = self.with_window(self.frame_eigen.apply_fn(|l| l.powf(-0.5)))?;
        // A second pass on the nearly tight system removes eigensolver roundoff.
        first.with_window(first.frame_eigen.apply_fn(|l| l.powf(-0.5)))
    }

    /// System with the canonical dual window `S^{-1} g`.
    pub fn canonical_dual(&self) -> Result<GaborSystem> {
        self.require_frame()?;
        let cutoff = CLIP_REL * self.frame_eigen.max();
        if self.frame_eigen.values.iter().any(|&l| l < cutoff) {
            return Err(GaborError::NotAFrame);
        }
        let inv = self.frame_eigen.apply_fn(|l| 1.0 / l);
        let g = self.window.as_vector();
        let mut dual = &inv * g;
        let s = self.frame_operator();
        let residual = g - &s * &dual;
        dual += &inv * residual;
        GaborSystem::new(Signal::from_vector(dual)?, self.lattice)
    }

    /// Analysis coefficients `<f, pi(lambda) g>`.
    pub fn analyze(&self, f: &Signal) -> Result<Vec<C64>> {
        crate::tf::stft(f, &self.window, &self.lattice)
    }

    /// `sum_lambda c_lambda pi(lambda) g`.
    pub fn synthesize(&self, coeffs: &[C64]) -> Result<Signal> {
        if coeffs.len() != self.lattice.size() {
            return Err(GaborError::DimensionMismatch(format!(
                "{} coefficients for a lattice of {} points",
                coeffs.len(),
                self.lattice.size()
            )));
        }
        let c = nalgebra::DVector::from_column_slice(coeffs);
        Signal::from_vector(self.synthesis_matrix() * c)
    }
}
