//! Side-diagonal decomposition of operators into shifted Gabor multipliers.
//!
//! For a Parseval system every L x L operator `A` satisfies
//!
//! ```text
//! A = sum_nu pi(nu) M_{a_nu},   a_nu(mu) = <A pi(mu) g, pi(mu + nu) g> exp(2 pi i nu_x mu_xi / L)
//! ```
//!
//! with `nu` running over the lattice mod L. Each symbol `a_nu` collects one
//! cyclic side-diagonal of the channel matrix `M[lambda, mu] = <A pi(mu) g, pi(lambda) g>`.
//! Truncating the sum to `|nu| <= N` (lattice steps, wrapped l-infinity) gives
//! the approximations whose error `E_N` is measured here.

use serde::{Deserialize, Serialize};

use crate::error::{GaborError, Result};
use crate::frames::GaborSystem;
use crate::linalg::op_norm;
use crate::multiplier::{multiplier_matrix, MultiplierSymbol};
use crate::tf::{commutation_phase, tf_shift_matrix, CMatrix, TFLattice};

/// Parseval tolerance required by [`decompose`].
pub const DECOMP_PARSEVAL_TOL: f64 = 1e-8;
/// Relative floor below which profile and error values count as roundoff.
pub const NOISE_FLOOR: f64 = 1e-13;

#[cfg(feature = "parallel")]
macro_rules! par_map {
    ($range:expr, $f:expr) => {{
        use rayon::prelude::*;
        $range.into_par_iter().map($f).collect::<Vec<_>>()
    }};
}

#[cfg(not(feature = "parallel"))]
macro_rules! par_map {
    ($range:expr, $f:expr) => {
        $range.into_iter().map($f).collect::<Vec<_>>()
    };
}

pub(crate) use par_map;

/// `M[lambda, mu] = <A pi(mu) g, pi(lambda) g>` over the system's lattice.
pub fn channel_matrix(op: &CMatrix, sys: &GaborSystem) -> Result<CMatrix> {
    let len = sys.lattice().signal_len();
    if op.shape() != (len, len) {
        return Err(GaborError::DimensionMismatch(format!(
            "operator is {}x{}, system has L={len}",
            op.nrows(),
            op.ncols()
        )));
    }
    let phi = sys.synthesis_matrix();
    Ok(phi.adjoint() * (op * &phi))
}

/// One multiplier symbol per side-diagonal `nu`, indexed in lattice order.
#[derive(Debug, Clone)]
pub struct SideDiagDecomp {
    sys: GaborSystem,
    symbols: Vec<MultiplierSymbol>,
}

impl SideDiagDecomp {
    pub fn system(&self) -> &GaborSystem {
        &self.sys
    }

    pub fn lattice(&self) -> &TFLattice {
        self.sys.lattice()
    }

    /// Symbol `a_nu` for the side-diagonal with lattice index `nu`.
    pub fn symbol(&self, nu: usize) -> &MultiplierSymbol {
        &self.symbols[nu]
    }

    pub fn symbols(&self) -> &[MultiplierSymbol] {
        &self.symbols
    }

    /// Builds a decomposition from explicit symbols.
    pub fn from_symbols(sys: GaborSystem, symbols: Vec<MultiplierSymbol>) -> Result<Self> {
        let lat = *sys.lattice();
        if symbols.len() != lat.size() || symbols.iter().any(|s| *s.lattice() != lat) {
            return Err(GaborError::DimensionMismatch(format!(
                "need {} symbols on the system lattice, got {}",
                lat.size(),
                symbols.len()
            )));
        }
        Ok(SideDiagDecomp { sys, symbols })
    }

    /// `sup_mu |a_nu(mu)|` for every `nu`.
    pub fn sup_norms(&self) -> Vec<f64> {
        self.symbols.iter().map(MultiplierSymbol::sup_norm).collect()
    }

    /// `sum_{|nu| > n} ||a_nu||_inf`, the bound on the truncation error `E_n`.
    pub fn tail_sum(&self, n: usize) -> f64 {
        let lat = self.lattice();
        self.symbols
            .iter()
            .enumerate()
            .filter(|(nu, _)| lat.lattice_norm(*nu) > n)
            .map(|(_, s)| s.sup_norm())
            .fold(0.0, |acc, x| acc + x)
    }

    /// Coefficient matrix `C` with `sum_{nu in keep} pi(nu) M_{a_nu} = Phi C Phi^*`.
    ///
    /// Uses `pi(nu) pi(mu) = exp(-2 pi i nu_x mu_xi / L) pi(mu + nu)`, so
    /// `C[mu + nu, mu] = a_nu(mu) exp(-2 pi i nu_x mu_xi / L)`.
    fn coefficient_matrix(&self, keep: impl Fn(usize) -> bool) -> CMatrix {
        let lat = self.lattice();
        let len = lat.signal_len();
        let n = lat.size();
        let mut c = CMatrix::zeros(n, n);
        for nu in (0..n).filter(|&nu| keep(nu)) {
            let nu_pt = lat.point(nu);
            for (mu, val) in self.symbols[nu].values().iter().enumerate() {
                let phase = commutation_phase(nu_pt, lat.point(mu), len).conj();
                c[(lat.add_indices(mu, nu), mu)] = val * phase;
            }
        }
        c
    }

    fn synthesize_coefficients(&self, c: &CMatrix) -> CMatrix {
        let phi = self.sys.synthesis_matrix();
        &phi * c * phi.adjoint()
    }

    /// `sum_nu pi(nu) M_{a_nu}` over all side-diagonals.
    pub fn reconstruct(&self) -> CMatrix {
        self.synthesize_coefficients(&self.coefficient_matrix(|_| true))
    }

    /// `sum_{|nu| <= n} pi(nu) M_{a_nu}`.
    pub fn truncate_reconstruct(&self, n: usize) -> CMatrix {
        let lat = *self.lattice();
        self.synthesize_coefficients(&self.coefficient_matrix(|nu| lat.lattice_norm(nu) <= n))
    }

    /// Literal sum of shift matrices times dense multiplier matrices.
    ///
    /// Costs `n_lattice` dense products; used to cross-check [`Self::reconstruct`].
    pub fn reconstruct_by_multipliers(&self) -> CMatrix {
        let lat = *self.lattice();
        let len = lat.signal_len();
        let phi = self.sys.synthesis_matrix();
        let terms = par_map!(0..lat.size(), |nu: usize| {
            tf_shift_matrix(lat.point(nu), len) * multiplier_matrix(&phi, self.symbols[nu].values())
        });
        terms.into_iter().fold(CMatrix::zeros(len, len), |acc, t| acc + t)
    }
}

/// Side-diagonal symbols of a channel matrix; `with_phase = false` drops the
/// commutation factor (only useful to demonstrate that it is needed).
pub(crate) fn side_diagonal_symbols(m: &CMatrix, lat: &TFLattice, with_phase: bool) -> Vec<MultiplierSymbol> {
    let len = lat.signal_len();
    par_map!(0..lat.size(), |nu: usize| {
        let nu_pt = lat.point(nu);
        let values = (0..lat.size())
            .map(|mu| {
                let entry = m[(lat.add_indices(mu, nu), mu)];
                if with_phase {
                    entry * commutation_phase(nu_pt, lat.point(mu), len)
                } else {
                    entry
                }
            })
            .collect();
        MultiplierSymbol::new(*lat, values).expect("side-diagonal has one entry per lattice point")
    })
}

/// Decomposes `op` into shifted Gabor multipliers over a Parseval system.
pub fn decompose(op: &CMatrix, sys: &GaborSystem) -> Result<SideDiagDecomp> {
    if !sys.is_parseval_within(DECOMP_PARSEVAL_TOL) {
        return Err(GaborError::NotParseval);
    }
    let m = channel_matrix(op, sys)?;
    let symbols = side_diagonal_symbols(&m, sys.lattice(), true);
    Ok(SideDiagDecomp { sys: sys.clone(), symbols })
}

/// Truncation errors `E_N` for a list of cutoffs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxResult {
    pub ns: Vec<usize>,
    pub errors: Vec<f64>,
    /// `sum_{|nu| > N} ||a_nu||_inf` for each cutoff.
    pub tail_bounds: Vec<f64>,
    pub op_norm: f64,
    /// Slope of `ln E_N` against `ln N` over `fit_range`; NaN when fewer than two usable points.
    pub fitted_rate: f64,
    pub fit_range: (usize, usize),
    /// Positions `i` where `errors[i] > errors[i - 1] + 1e-12 * op_norm`.
    pub monotone_violations: Vec<usize>,
}

/// Least-squares slope through `(x, y)` pairs; `None` for fewer than two distinct x.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Measures `E_N = ||A - sum_{|nu| <= N} pi(nu) M_{a_nu}||_op` for each `N` in `ns`.
pub fn approx_error_sweep(
    op: &CMatrix,
    sys: &GaborSystem,
    ns: &[usize],
    fit_range: Option<(usize, usize)>,
) -> Result<ApproxResult> {
    let d = decompose(op, sys)?;
    Ok(sweep_decomposition(op, &d, ns, fit_range))
}

/// As [`approx_error_sweep`] for an existing decomposition of `op`.
pub fn sweep_decomposition(
    op: &CMatrix,
    d: &SideDiagDecomp,
    ns: &[usize],
    fit_range: Option<(usize, usize)>,
) -> ApproxResult {
    let fit_range = fit_range.unwrap_or_else(|| d.lattice().default_fit_range());
    let norm = op_norm(op);
    let errors = par_map!(ns.to_vec(), |n: usize| op_norm(&(op - d.truncate_reconstruct(n))));
    let tail_bounds = ns.iter().map(|&n| d.tail_sum(n)).collect();
    let points: Vec<(f64, f64)> = ns
        .iter()
        .zip(&errors)
        .filter(|(&n, &e)| n >= 1 && n >= fit_range.0 && n <= fit_range.1 && e > NOISE_FLOOR * norm)
        .map(|(&n, &e)| ((n as f64).ln(), e.ln()))
        .collect();
    let monotone_violations = (1..errors.len()).filter(|&i| errors[i] > errors[i - 1] + 1e-12 * norm).collect();
    ApproxResult {
        ns: ns.to_vec(),
        errors,
        tail_bounds,
        op_norm: norm,
        fitted_rate: fit_slope(&points).unwrap_or(f64::NAN),
        fit_range,
        monotone_violations,
    }
}

/// Smallest measured cutoff with `E_N <= eps`.
pub fn cutoff_for_tolerance(res: &ApproxResult, eps: f64) -> Result<usize> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(GaborError::InvalidParameter(format!("tolerance must be positive, got {eps}")));
    }
    res.ns
        .iter()
        .zip(&res.errors)
        .find(|(_, &e)| e <= eps)
        .map(|(&n, _)| n)
        .ok_or(GaborError::ToleranceUnreachable)
}

/// Side-diagonal envelope of a channel matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    /// `h(nu) = max_mu |M[mu + nu, mu]|`, lattice order.
    pub h: Vec<f64>,
    /// `max_{|nu| = n} h(nu)` for `n = 0..=max lattice norm`.
    pub shell_max: Vec<f64>,
    /// Slope of `ln h` against `ln(1 + |nu|)` over `fit_range`; `-inf` when the
    /// profile vanishes there.
    pub fitted_exponent: f64,
    pub fit_range: (usize, usize),
}

/// Envelope `h` of `m` and its fitted power-law exponent.
///
/// The fit runs over shell maxima with `fit_range.0 <= n <= fit_range.1`,
/// dropping values below [`NOISE_FLOOR`] times the profile maximum.
pub fn decay_profile(m: &CMatrix, lat: &TFLattice, fit_range: Option<(usize, usize)>) -> Result<DecayProfile> {
    let n = lat.size();
    if m.shape() != (n, n) {
        return Err(GaborError::DimensionMismatch(format!(
            "channel matrix is {}x{}, lattice has {n} points",
            m.nrows(),
            m.ncols()
        )));
    }
    let fit_range = fit_range.unwrap_or_else(|| lat.default_fit_range());
    let h: Vec<f64> = (0..n)
        .map(|nu| (0..n).map(|mu| m[(lat.add_indices(mu, nu), mu)].norm()).fold(0.0, f64::max))
        .collect();
    let mut shell_max = vec![0.0; lat.max_lattice_norm() + 1];
    for (nu, &v) in h.iter().enumerate() {
        let s = &mut shell_max[lat.lattice_norm(nu)];
        *s = f64::max(*s, v);
    }
    let peak = h.iter().copied().fold(0.0, f64::max);
    let points: Vec<(f64, f64)> = shell_max
        .iter()
        .enumerate()
        .filter(|&(k, &v)| k >= fit_range.0 && k <= fit_range.1 && v > NOISE_FLOOR * peak)
        .map(|(k, &v)| ((1.0 + k as f64).ln(), v.ln()))
        .collect();
    let fitted_exponent = fit_slope(&points).unwrap_or(f64::NEG_INFINITY);
    Ok(DecayProfile { h, shell_max, fitted_exponent, fit_range })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tf::{periodized_gaussian, Signal, TFPoint, C64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tight(len: usize, a: usize, b: usize) -> GaborSystem {
        let lat = TFLattice::new(len, a, b).unwrap();
        GaborSystem::new(periodized_gaussian(len, 1.0).unwrap(), lat).unwrap().canonical_tight().unwrap()
    }

    fn random_op(len: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(len, len, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    /// Orthonormal Gabor basis: delta window on the (1, L) lattice.
    fn delta_basis(len: usize) -> GaborSystem {
        GaborSystem::new(Signal::delta(len, 0), TFLattice::new(len, 1, len).unwrap()).unwrap()
    }

    #[test]
    fn zero_operator_has_zero_symbols() {
        let sys = tight(24, 4, 4);
        let d = decompose(&CMatrix::zeros(24, 24), &sys).unwrap();
        assert!(d.sup_norms().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn identity_round_trip_and_gram_channel() {
        let sys = tight(24, 4, 4);
        let id = CMatrix::identity(24, 24);
        assert!((channel_matrix(&id, &sys).unwrap() - sys.gram_matrix()).norm() < 1e-13);
        let rec = decompose(&id, &sys).unwrap().reconstruct();
        assert!((rec - &id).norm() <= 1e-10 * id.norm());

        let ortho = delta_basis(8);
        let id8 = CMatrix::identity(8, 8);
        assert!((channel_matrix(&id8, &ortho).unwrap() - &id8).norm() < 1e-15);
    }

    #[test]
    fn lattice_shift_concentrates_on_its_side_diagonal() {
        let len = 8;
        let sys = delta_basis(len);
        let lat = *sys.lattice();
        let nu0 = lat.index_of(TFPoint::new(3, 0, len)).unwrap();
        let d = decompose(&tf_shift_matrix(lat.point(nu0), len), &sys).unwrap();
        for (nu, s) in d.sup_norms().iter().enumerate() {
            if nu == nu0 {
                assert!((s - 1.0).abs() < 1e-14);
                assert!(d.symbol(nu).values().iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-14));
            } else {
                assert!(*s < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_non_parseval_system() {
        let lat = TFLattice::new(24, 4, 4).unwrap();
        let sys = GaborSystem::new(periodized_gaussian(24, 1.0).unwrap(), lat).unwrap();
        assert_eq!(decompose(&CMatrix::identity(24, 24), &sys).unwrap_err(), GaborError::NotParseval);
    }

    #[test]
    fn fast_and_literal_reconstructions_agree() {
        let sys = tight(24, 4, 3);
        let op = random_op(24, 3);
        let d = decompose(&op, &sys).unwrap();
        let fast = d.reconstruct();
        let slow = d.reconstruct_by_multipliers();
        assert!((&fast - &slow).norm() <= 1e-12 * op.norm());
        assert!((&fast - &op).norm() <= 1e-10 * op.norm());
    }

    #[test]
    fn dropping_the_commutation_phase_breaks_reconstruction() {
        let sys = tight(24, 4, 4);
        let op = random_op(24, 8);
        let m = channel_matrix(&op, &sys).unwrap();
        let wrong = SideDiagDecomp::from_symbols(sys.clone(), side_diagonal_symbols(&m, sys.lattice(), false)).unwrap();
        assert!((wrong.reconstruct() - &op).norm() > 0.1 * op.norm());
        assert!((wrong.reconstruct_by_multipliers() - &op).norm() > 0.1 * op.norm());
    }

    #[test]
    fn truncation_edges() {
        let sys = tight(24, 4, 4);
        let op = random_op(24, 4);
        let d = decompose(&op, &sys).unwrap();
        let zeroth = d.truncate_reconstruct(0);
        let phi = sys.synthesis_matrix();
        assert!((zeroth - multiplier_matrix(&phi, d.symbol(0).values())).norm() < 1e-12);
        let full = d.reconstruct();
        for n in [3, 12, 100] {
            assert!((d.truncate_reconstruct(n) - &full).norm() < 1e-12 * full.norm());
        }
    }

    #[test]
    fn band_mask_on_orthonormal_system() {
        let len = 16;
        let sys = delta_basis(len);
        let lat = *sys.lattice();
        let op = random_op(len, 21);
        let m = channel_matrix(&op, &sys).unwrap();
        let d = decompose(&op, &sys).unwrap();
        for n in [0, 1, 3, 5] {
            let banded = channel_matrix(&d.truncate_reconstruct(n), &sys).unwrap();
            let oracle = CMatrix::from_fn(lat.size(), lat.size(), |l, mu| {
                if lat.lattice_norm(lat.sub_indices(l, mu)) <= n {
                    m[(l, mu)]
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            assert!((banded - oracle).norm() < 1e-10);
        }
    }

    #[test]
    fn identity_profile_matches_window_autocorrelation() {
        let sys = tight(24, 4, 4);
        let lat = *sys.lattice();
        let prof = decay_profile(&sys.gram_matrix(), &lat, None).unwrap();
        let g = sys.window();
        for (nu, &h) in prof.h.iter().enumerate() {
            let shifted = crate::tf::tf_shift(lat.point(nu), g);
            assert!((h - g.inner(&shifted).norm()).abs() <= 1e-12);
        }
    }

    #[test]
    fn identity_matrix_profile_is_sentinel() {
        let lat = TFLattice::new(48, 4, 4).unwrap();
        let prof = decay_profile(&CMatrix::identity(144, 144), &lat, None).unwrap();
        assert_eq!(prof.h[0], 1.0);
        assert!(prof.h[1..].iter().all(|&v| v == 0.0));
        assert_eq!(prof.fitted_exponent, f64::NEG_INFINITY);
    }

    #[test]
    fn random_matrix_profile_is_flat() {
        let lat = TFLattice::new(48, 4, 4).unwrap();
        let m = random_op(144, 9);
        let prof = decay_profile(&m, &lat, None).unwrap();
        assert!(prof.fitted_exponent.abs() <= 0.5, "slope {}", prof.fitted_exponent);
    }

    #[test]
    fn cutoff_scan() {
        let res = ApproxResult {
            ns: vec![0, 1, 2, 3, 4],
            errors: vec![1.0, 0.7, 0.4, 0.1, 0.0],
            tail_bounds: vec![0.0; 5],
            op_norm: 1.0,
            fitted_rate: f64::NAN,
            fit_range: (1, 3),
            monotone_violations: vec![],
        };
        assert_eq!(cutoff_for_tolerance(&res, 1.0).unwrap(), 0);
        assert_eq!(cutoff_for_tolerance(&res, 5.0).unwrap(), 0);
        // Oracle: first index whose error is at most half of E(0).
        let eps = 0.5 * res.errors[0];
        let first = res.errors.iter().position(|&e| e <= eps).unwrap();
        assert_eq!(cutoff_for_tolerance(&res, eps).unwrap(), res.ns[first]);
        let inexact = ApproxResult { errors: vec![1.0, 0.5, 0.2, 0.1, 1e-12], ..res.clone() };
        assert_eq!(cutoff_for_tolerance(&inexact, 1e-15).unwrap_err(), GaborError::ToleranceUnreachable);
        assert!(cutoff_for_tolerance(&res, 0.0).is_err());
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = (1..8).map(|n| ((n as f64).ln(), -3.0 * (n as f64).ln() + 0.4)).collect();
        assert!((fit_slope(&pts).unwrap() + 3.0).abs() < 1e-12);
        assert!(fit_slope(&pts[..1]).is_none());
    }
}
