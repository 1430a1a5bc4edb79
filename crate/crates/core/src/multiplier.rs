//! Gabor multipliers `M_a f = sum_mu a_mu <f, pi(mu) g> pi(mu) g`.

use serde::{Deserialize, Serialize};

use crate::error::{GaborError, Result};
use crate::frames::GaborSystem;
use crate::linalg::op_norm;
use crate::tf::{CMatrix, Signal, TFLattice, C64};

/// One complex value per lattice point, in lattice enumeration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymbolRepr", into = "SymbolRepr")]
pub struct MultiplierSymbol {
    lattice: TFLattice,
    values: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymbolRepr {
    lattice: TFLattice,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<SymbolRepr> for MultiplierSymbol {
    type Error = GaborError;

    fn try_from(r: SymbolRepr) -> Result<Self> {
        if r.re.len() != r.im.len() {
            return Err(GaborError::DimensionMismatch("re/im length differ".into()));
        }
        MultiplierSymbol::new(r.lattice, r.re.iter().zip(&r.im).map(|(&a, &b)| C64::new(a, b)).collect())
    }
}

impl From<MultiplierSymbol> for SymbolRepr {
    fn from(s: MultiplierSymbol) -> Self {
        SymbolRepr {
            lattice: s.lattice,
            re: s.values.iter().map(|z| z.re).collect(),
            im: s.values.iter().map(|z| z.im).collect(),
        }
    }
}

impl MultiplierSymbol {
    pub fn new(lattice: TFLattice, values: Vec<C64>) -> Result<Self> {
        if values.len() != lattice.size() {
            return Err(GaborError::DimensionMismatch(format!(
                "symbol has {} entries, lattice has {} points",
                values.len(),
                lattice.size()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(GaborError::InvalidParameter("symbol has non-finite entries".into()));
        }
        Ok(MultiplierSymbol { lattice, values })
    }

    pub fn constant(lattice: TFLattice, c: C64) -> Self {
        MultiplierSymbol { lattice, values: vec![c; lattice.size()] }
    }

    /// Indicator of the lattice point with index `idx`.
    pub fn indicator(lattice: TFLattice, idx: usize) -> Self {
        let mut values = vec![C64::new(0.0, 0.0); lattice.size()];
        values[idx] = C64::new(1.0, 0.0);
        MultiplierSymbol { lattice, values }
    }

    pub fn lattice(&self) -> &TFLattice {
        &self.lattice
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> Self {
        MultiplierSymbol { lattice: self.lattice, values: self.values.iter().map(|z| z.conj()).collect() }
    }
}

/// Operator norm next to the bound `B ||a||_inf` it must respect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBound {
    pub op_norm: f64,
    pub bound: f64,
}

impl NormBound {
    pub fn holds(&self) -> bool {
        self.op_norm <= self.bound * (1.0 + 1e-10) + 1e-300
    }
}

#[derive(Debug, Clone)]
pub struct GaborMultiplier<'a> {
    sys: &'a GaborSystem,
    symbol: MultiplierSymbol,
}

impl<'a> GaborMultiplier<'a> {
    pub fn new(sys: &'a GaborSystem, symbol: MultiplierSymbol) -> Result<Self> {
        if symbol.lattice() != sys.lattice() {
            return Err(GaborError::DimensionMismatch("symbol lattice differs from system lattice".into()));
        }
        Ok(GaborMultiplier { sys, symbol })
    }

    pub fn symbol(&self) -> &MultiplierSymbol {
        &self.symbol
    }

    pub fn apply(&self, f: &Signal) -> Result<Signal> {
        let coeffs = self.sys.analyze(f)?;
        let scaled: Vec<C64> = coeffs.iter().zip(&self.symbol.values).map(|(c, a)| c * a).collect();
        self.sys.synthesize(&scaled)
    }

    /// Dense matrix `Phi diag(a) Phi^*`.
    pub fn to_matrix(&self) -> CMatrix {
        multiplier_matrix(&self.sys.synthesis_matrix(), &self.symbol.values)
    }

    pub fn norm_bound_check(&self) -> NormBound {
        let op = op_norm(&self.to_matrix());
        NormBound { op_norm: op, bound: self.sys.frame_bounds().1 * self.symbol.sup_norm() }
    }
}

pub(crate) fn multiplier_matrix(phi: &CMatrix, a: &[C64]) -> CMatrix {
    let mut scaled = phi.clone();
    for (c, &w) in a.iter().enumerate() {
        scaled.column_mut(c).iter_mut().for_each(|z| *z *= w);
    }
    scaled * phi.adjoint()
}
