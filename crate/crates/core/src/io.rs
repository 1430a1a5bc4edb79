//! JSON file schemas shared by symbols, operators and decompositions.

use serde::{Deserialize, Serialize};

use crate::decomp::SideDiagDecomp;
use crate::error::{GaborError, Result};
use crate::multiplier::MultiplierSymbol;
use crate::tf::{CMatrix, Signal, TFLattice, TFPoint, C64};

/// `{"L": int, "re": [[...]], "im": [[...]]}`, row-major in the first index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SquareMatrixRepr")]
pub struct SquareMatrix {
    #[serde(rename = "L")]
    len: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SquareMatrixRepr {
    #[serde(rename = "L")]
    len: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl TryFrom<SquareMatrixRepr> for SquareMatrix {
    type Error = GaborError;

    fn try_from(r: SquareMatrixRepr) -> Result<Self> {
        let ok_rows = |rows: &Vec<Vec<f64>>| rows.len() == r.len && rows.iter().all(|row| row.len() == r.len);
        if r.len == 0 || !ok_rows(&r.re) || !ok_rows(&r.im) {
            return Err(GaborError::DimensionMismatch(format!("matrix file must hold two {0}x{0} arrays", r.len)));
        }
        if r.re.iter().chain(&r.im).flatten().any(|v| !v.is_finite()) {
            return Err(GaborError::InvalidParameter("matrix has non-finite entries".into()));
        }
        Ok(SquareMatrix { len: r.len, re: r.re, im: r.im })
    }
}

impl SquareMatrix {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let len = m.nrows();
        SquareMatrix {
            len,
            re: (0..len).map(|r| (0..m.ncols()).map(|c| m[(r, c)].re).collect()).collect(),
            im: (0..len).map(|r| (0..m.ncols()).map(|c| m[(r, c)].im).collect()).collect(),
        }
    }

    pub fn into_matrix(self) -> CMatrix {
        CMatrix::from_fn(self.len, self.len, |r, c| C64::new(self.re[r][c], self.im[r][c]))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// One side-diagonal symbol, tagged with its shift `nu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideDiagonalEntry {
    pub nu: TFPoint,
    pub symbol: MultiplierSymbol,
}

/// Serialized form of a [`SideDiagDecomp`]: the Parseval window plus one
/// symbol per lattice point, in lattice order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolFamilyFile {
    pub lattice: TFLattice,
    pub window: Signal,
    pub symbols: Vec<SideDiagonalEntry>,
}

impl SymbolFamilyFile {
    pub fn from_decomp(d: &SideDiagDecomp) -> Self {
        let lat = *d.lattice();
        SymbolFamilyFile {
            lattice: lat,
            window: d.system().window().clone(),
            symbols: d
                .symbols()
                .iter()
                .enumerate()
                .map(|(nu, s)| SideDiagonalEntry { nu: lat.point(nu), symbol: s.clone() })
                .collect(),
        }
    }

    pub fn into_decomp(self) -> Result<SideDiagDecomp> {
        let sys = crate::frames::GaborSystem::new(self.window, self.lattice)?;
        for (i, e) in self.symbols.iter().enumerate() {
            if self.lattice.index_of(e.nu) != Some(i) {
                return Err(GaborError::InvalidParameter(format!("symbol {i} is tagged with nu {:?} out of order", e.nu)));
            }
        }
        SideDiagDecomp::from_symbols(sys, self.symbols.into_iter().map(|e| e.symbol).collect())
    }
}
