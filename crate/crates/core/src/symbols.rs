//! Kohn-Nirenberg symbols on Z_L x Z_L and generators with prescribed smoothness.
//!
//! The operator of a symbol `sigma(x, xi)` is
//! `(sigma(x, D) f)(x) = L^{-1/2} sum_xi sigma(x, xi) F f(xi) exp(2 pi i x xi / L)`
//! with `F` the unitary DFT.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::channel::SpreadingFunction;
use crate::error::{GaborError, Result};
use crate::io::SquareMatrix;
use crate::tf::{dft2, unit_root, wrapped_norm, CMatrix, TFPoint, WeightSpec, C64};

/// Symbol `sigma(x, xi)`: rows are positions, columns frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SquareMatrix", into = "SquareMatrix")]
pub struct KNSymbol {
    values: CMatrix,
}

impl TryFrom<SquareMatrix> for KNSymbol {
    type Error = GaborError;

    fn try_from(m: SquareMatrix) -> Result<Self> {
        KNSymbol::new(m.into_matrix())
    }
}

impl From<KNSymbol> for SquareMatrix {
    fn from(s: KNSymbol) -> Self {
        SquareMatrix::from_matrix(&s.values)
    }
}

impl KNSymbol {
    pub fn new(values: CMatrix) -> Result<Self> {
        if values.nrows() != values.ncols() || values.is_empty() {
            return Err(GaborError::DimensionMismatch(format!(
                "symbol must be square and non-empty, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(GaborError::InvalidParameter("symbol has non-finite entries".into()));
        }
        Ok(KNSymbol { values })
    }

    pub fn constant(len: usize, c: C64) -> Self {
        KNSymbol { values: CMatrix::from_element(len, len, c) }
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &CMatrix {
        &self.values
    }
}

/// Kernel matrix `K[x, y] = L^{-1} sum_xi sigma(x, xi) exp(2 pi i (x - y) xi / L)`.
pub fn kn_operator(sig: &KNSymbol) -> CMatrix {
    let len = sig.len();
    let mut planner = FftPlanner::new();
    let plan = planner.plan_fft_inverse(len);
    let mut out = CMatrix::zeros(len, len);
    let mut row = vec![C64::new(0.0, 0.0); len];
    let scale = 1.0 / len as f64;
    for x in 0..len {
        for (xi, slot) in row.iter_mut().enumerate() {
            *slot = sig.values[(x, xi)];
        }
        // row[d] = sum_xi sigma(x, xi) exp(2 pi i d xi / L)
        plan.process(&mut row);
        for y in 0..len {
            out[(x, y)] = row[(x + len - y) % len] * scale;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolKind {
    /// Fourier envelope `(1 + |zeta|_2)^{-s}`.
    PolyDecay { s: f64 },
    /// Fourier envelope `exp(-alpha |zeta|_2^beta)`.
    ExpDecay { alpha: f64, beta: f64 },
    Identity,
    /// Flat envelope on `|zeta|_inf <= bandwidth`, zero outside.
    Bandlimited { bandwidth: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolFamilySpec {
    #[serde(flatten)]
    pub kind: SymbolKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

fn default_amplitude() -> f64 {
    1.0
}

impl SymbolFamilySpec {
    pub fn poly(s: f64, seed: u64) -> Self {
        SymbolFamilySpec { kind: SymbolKind::PolyDecay { s }, seed, amplitude: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(GaborError::InvalidParameter(format!("amplitude must be positive, got {}", self.amplitude)));
        }
        match self.kind {
            SymbolKind::PolyDecay { s } => WeightSpec::Polynomial { s }.validate(),
            SymbolKind::ExpDecay { alpha, beta } => WeightSpec::Exponential { alpha, beta }.validate(),
            SymbolKind::Identity | SymbolKind::Bandlimited { .. } => Ok(()),
        }
    }

    /// Prescribed magnitude of the unitary 2-D DFT at frequency `zeta`.
    pub fn envelope(&self, zeta: TFPoint, len: usize) -> f64 {
        match self.kind {
            SymbolKind::PolyDecay { s } => self.amplitude / WeightSpec::Polynomial { s }.at(zeta, len),
            SymbolKind::ExpDecay { alpha, beta } => self.amplitude / WeightSpec::Exponential { alpha, beta }.at(zeta, len),
            SymbolKind::Bandlimited { bandwidth } => {
                if wrapped_norm(zeta, len) <= bandwidth {
                    self.amplitude
                } else {
                    0.0
                }
            }
            SymbolKind::Identity => {
                if zeta == (TFPoint { x: 0, xi: 0 }) {
                    self.amplitude * len as f64
                } else {
                    0.0
                }
            }
        }
    }
}

/// Builds `sigma` as the inverse unitary 2-D DFT of `envelope(zeta) exp(i phi(zeta))`
/// with phases drawn from a ChaCha8 stream seeded by `spec.seed`, row-major in `zeta`.
pub fn generate_symbol(spec: &SymbolFamilySpec, len: usize) -> Result<KNSymbol> {
    if len < 8 {
        return Err(GaborError::InvalidParameter(format!("symbol generation needs L >= 8, got {len}")));
    }
    spec.validate()?;
    if let SymbolKind::Identity = spec.kind {
        return Ok(KNSymbol::constant(len, C64::new(spec.amplitude, 0.0)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut coeffs = CMatrix::zeros(len, len);
    for p in 0..len {
        for q in 0..len {
            let phase = 2.0 * PI * rng.gen::<f64>();
            coeffs[(p, q)] = C64::from_polar(spec.envelope(TFPoint { x: p, xi: q }, len), phase);
        }
    }
    KNSymbol::new(dft2(&coeffs, true))
}

/// Symbol of the superposition `sum sigma_hat(eta, u) M_eta T_{-u}`:
/// `sigma(x, xi) = sum sigma_hat(eta, u) exp(2 pi i (eta x + u xi) / L)`.
pub fn spreading_to_symbol(spread: &SpreadingFunction) -> KNSymbol {
    let len = spread.signal_len();
    let mut sig = CMatrix::zeros(len, len);
    for (eta, u, tap) in spread.taps() {
        if tap == C64::new(0.0, 0.0) {
            continue;
        }
        for x in 0..len {
            let mx = tap * unit_root(eta * x as i64, len);
            for xi in 0..len {
                sig[(x, xi)] += mx * unit_root((u * xi) as i64, len);
            }
        }
    }
    KNSymbol { values: sig }
}
