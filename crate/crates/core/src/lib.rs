//! Finite-dimensional Gabor analysis of operators on Z_L.
//!
//! * [`tf`]: DFT, time-frequency shifts, lattices, windows, sampled STFT.
//! * [`frames`]: Gabor systems, frame bounds, canonical dual and tight windows.
//! * [`multiplier`]: Gabor multipliers and their norm bound.
//! * [`decomp`]: side-diagonal decomposition into shifted multipliers,
//!   truncation errors and decay profiles.
//! * [`symbols`]: Kohn-Nirenberg quantization and symbol generators.
//! * [`channel`]: doubly dispersive link simulation with banded equalizers.

pub mod channel;
pub mod decomp;
pub mod error;
pub mod frames;
pub mod io;
pub mod linalg;
pub mod multiplier;
pub mod symbols;
pub mod tf;

pub use error::{GaborError, Result};
pub use tf::{CMatrix, C64};
