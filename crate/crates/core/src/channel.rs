//! Link simulation over a doubly dispersive channel.
//!
//! QPSK data `c` is synthesized with a Gabor Riesz sequence, distorted by
//! `identity_weight * I + sum sigma_hat(eta, u) M_eta T_{-u}`, optionally hit
//! with white Gaussian noise, and analyzed back to `y = M(sigma) c + noise`.
//! Equalizers then solve with the diagonal, a wrapped band, or all of `M(sigma)`.

use std::fmt;
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::decomp::{channel_matrix, par_map};
use crate::error::{GaborError, Result};
use crate::frames::GaborSystem;
use crate::linalg::{condition_number, solve};
use crate::symbols::{kn_operator, spreading_to_symbol};
use crate::tf::{periodized_gaussian, CMatrix, Signal, TFLattice, C64};

/// Minimum Gram eigenvalue for coefficients to count as identifiable.
pub const RIESZ_MIN_EIG: f64 = 1e-8;
/// Diagonal entries at or below this magnitude make the diagonal equalizer undefined.
pub const DIAGONAL_MIN: f64 = 1e-12;

/// Spreading function supported on delays `0..=max_delay` (samples) and
/// Dopplers `-max_doppler..=max_doppler` (bins).
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadingFunction {
    len: usize,
    max_delay: usize,
    max_doppler: usize,
    /// Row-major: `taps[(eta + max_doppler) * (max_delay + 1) + u]`.
    taps: Vec<C64>,
}

impl SpreadingFunction {
    pub fn new(len: usize, max_delay: usize, max_doppler: usize, taps: Vec<C64>) -> Result<Self> {
        if 4 * max_delay >= len || 4 * max_doppler >= len {
            return Err(GaborError::InvalidParameter(format!(
                "spreading support tau0={max_delay}, nu0={max_doppler} must stay below L/4 = {}",
                len as f64 / 4.0
            )));
        }
        let expected = (2 * max_doppler + 1) * (max_delay + 1);
        if taps.len() != expected {
            return Err(GaborError::DimensionMismatch(format!("expected {expected} taps, got {}", taps.len())));
        }
        if taps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(GaborError::InvalidParameter("spreading taps must be finite".into()));
        }
        Ok(SpreadingFunction { len, max_delay, max_doppler, taps })
    }

    /// Single unit tap at the origin.
    pub fn identity(len: usize) -> Self {
        SpreadingFunction { len, max_delay: 0, max_doppler: 0, taps: vec![C64::new(1.0, 0.0)] }
    }

    pub fn zero(len: usize) -> Self {
        SpreadingFunction { len, max_delay: 0, max_doppler: 0, taps: vec![C64::new(0.0, 0.0)] }
    }

    /// Independent complex Gaussian taps with power profile `exp(-u / tau0)`
    /// over delay and flat over Doppler, rescaled to total energy `energy`.
    pub fn random<R: Rng>(
        len: usize,
        max_delay: usize,
        max_doppler: usize,
        energy: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !(energy >= 0.0 && energy.is_finite()) {
            return Err(GaborError::InvalidParameter(format!("tap energy must be >= 0, got {energy}")));
        }
        let mut taps = Vec::with_capacity((2 * max_doppler + 1) * (max_delay + 1));
        for _eta in 0..=2 * max_doppler {
            for u in 0..=max_delay {
                let power = if max_delay == 0 { 1.0 } else { (-(u as f64) / max_delay as f64).exp() };
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                taps.push(C64::new(re, im) * (power / 2.0).sqrt());
            }
        }
        let total: f64 = taps.iter().map(|z| z.norm_sqr()).sum();
        let scale = if total > 0.0 { (energy / total).sqrt() } else { 0.0 };
        taps.iter_mut().for_each(|z| *z *= scale);
        Self::new(len, max_delay, max_doppler, taps)
    }

    pub fn signal_len(&self) -> usize {
        self.len
    }

    pub fn max_delay(&self) -> usize {
        self.max_delay
    }

    pub fn max_doppler(&self) -> usize {
        self.max_doppler
    }

    pub fn tap(&self, eta: i64, u: usize) -> C64 {
        let nu0 = self.max_doppler as i64;
        if eta.abs() > nu0 || u > self.max_delay {
            return C64::new(0.0, 0.0);
        }
        self.taps[(eta + nu0) as usize * (self.max_delay + 1) + u]
    }

    /// `(eta, u, value)` over the support grid.
    pub fn taps(&self) -> impl Iterator<Item = (i64, usize, C64)> + '_ {
        let width = self.max_delay + 1;
        let nu0 = self.max_doppler as i64;
        self.taps.iter().enumerate().map(move |(i, &v)| ((i / width) as i64 - nu0, i % width, v))
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|z| z.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub spread: SpreadingFunction,
    pub identity_weight: f64,
    /// Received SNR in dB; `None` means noiseless.
    pub snr_db: Option<f64>,
}

impl ChannelSpec {
    pub fn identity(len: usize) -> Self {
        ChannelSpec { spread: SpreadingFunction::zero(len), identity_weight: 1.0, snr_db: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.identity_weight >= 0.0 && self.identity_weight.is_finite()) {
            return Err(GaborError::InvalidParameter("identity weight must be >= 0".into()));
        }
        if self.identity_weight + self.spread.energy() <= 0.0 {
            return Err(GaborError::InvalidParameter("channel is identically zero".into()));
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(GaborError::InvalidParameter(format!("snr must be finite, got {snr}")));
            }
        }
        Ok(())
    }

    /// L x L matrix of `identity_weight * I + sigma(x, D)`.
    pub fn operator(&self) -> CMatrix {
        let len = self.spread.signal_len();
        kn_operator(&spreading_to_symbol(&self.spread)) + CMatrix::identity(len, len) * C64::new(self.identity_weight, 0.0)
    }
}

/// `{(+-1 +- i) / sqrt 2}`, unit average power.
pub fn qpsk_symbols<R: Rng>(n: usize, rng: &mut R) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let re = if rng.gen::<bool>() { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
            let im = if rng.gen::<bool>() { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
            C64::new(re, im)
        })
        .collect()
}

/// Nearest QPSK point by independent sign decisions.
pub fn slice_qpsk(z: C64) -> C64 {
    C64::new(FRAC_1_SQRT_2.copysign(z.re), FRAC_1_SQRT_2.copysign(z.im))
}

/// Bit errors between two QPSK symbols (0, 1 or 2).
pub fn qpsk_bit_errors(sent: C64, decided: C64) -> usize {
    usize::from(sent.re.is_sign_positive() != decided.re.is_sign_positive())
        + usize::from(sent.im.is_sign_positive() != decided.im.is_sign_positive())
}

/// `f = sum_mu c_mu pi(mu) g`; refuses systems whose Gram matrix is near singular.
pub fn modulate(c: &[C64], sys: &GaborSystem) -> Result<Signal> {
    let (lo, _) = sys.riesz_check();
    if lo <= RIESZ_MIN_EIG {
        return Err(GaborError::NotRieszSequence);
    }
    sys.synthesize(c)
}

/// Applies `ch` to `f`; noise, when requested, is drawn from `rng`.
pub fn transmit<R: Rng>(f: &Signal, ch: &ChannelSpec, rng: &mut R) -> Result<Signal> {
    ch.validate()?;
    if f.len() != ch.spread.signal_len() {
        return Err(GaborError::DimensionMismatch(format!(
            "signal length {} vs channel L={}",
            f.len(),
            ch.spread.signal_len()
        )));
    }
    apply_operator(&ch.operator(), f, ch.snr_db, rng)
}

fn apply_operator<R: Rng>(h: &CMatrix, f: &Signal, snr_db: Option<f64>, rng: &mut R) -> Result<Signal> {
    let mut out = h * f.as_vector();
    if let Some(snr) = snr_db {
        let power = out.norm_squared() / out.len() as f64;
        let sigma = (power * 10f64.powf(-snr / 10.0) / 2.0).sqrt();
        for z in out.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *z += C64::new(re, im) * sigma;
        }
    }
    Signal::from_vector(out)
}

/// `y_lambda = <f_tilde, pi(lambda) g>`.
pub fn demodulate(f_tilde: &Signal, sys: &GaborSystem) -> Result<Vec<C64>> {
    sys.analyze(f_tilde)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", content = "band", rename_all = "snake_case")]
pub enum EqualizerMethod {
    Diagonal,
    Banded(usize),
    Full,
}

impl EqualizerMethod {
    pub fn name(&self) -> &'static str {
        match self {
            EqualizerMethod::Diagonal => "diagonal",
            EqualizerMethod::Banded(_) => "banded",
            EqualizerMethod::Full => "full",
        }
    }

    pub fn band(&self) -> Option<usize> {
        match *self {
            EqualizerMethod::Banded(n) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for EqualizerMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EqualizerMethod::Banded(n) => write!(f, "banded({n})"),
            other => f.write_str(other.name()),
        }
    }
}

/// `M` with entries outside the wrapped band `|lambda - mu| <= n` (lattice steps) zeroed.
pub fn band_matrix(m: &CMatrix, lat: &TFLattice, n: usize) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |l, mu| {
        if lat.lattice_norm(lat.sub_indices(l, mu)) <= n {
            m[(l, mu)]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Estimates `c` from `y = M c` (before slicing).
pub fn equalize(y: &[C64], m: &CMatrix, lat: &TFLattice, method: EqualizerMethod) -> Result<Vec<C64>> {
    let n = lat.size();
    if m.shape() != (n, n) || y.len() != n {
        return Err(GaborError::DimensionMismatch(format!(
            "equalizer needs a {n}x{n} matrix and {n} measurements, got {}x{} and {}",
            m.nrows(),
            m.ncols(),
            y.len()
        )));
    }
    match method {
        EqualizerMethod::Diagonal => {
            if (0..n).any(|i| m[(i, i)].norm() <= DIAGONAL_MIN) {
                return Err(GaborError::DiagonalUndefined);
            }
            Ok(y.iter().enumerate().map(|(i, v)| v / m[(i, i)]).collect())
        }
        EqualizerMethod::Banded(band) => solve_system(&band_matrix(m, lat, band), y),
        EqualizerMethod::Full => solve_system(m, y),
    }
}

fn solve_system(m: &CMatrix, y: &[C64]) -> Result<Vec<C64>> {
    solve(m, &DVector::from_column_slice(y)).map(|x| x.as_slice().to_vec()).ok_or(GaborError::SingularEqualizer)
}

/// Parameters of a seeded Monte-Carlo link experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    #[serde(rename = "L")]
    pub len: usize,
    pub a: usize,
    pub b: usize,
    pub width: f64,
    pub tau0: usize,
    pub nu0: usize,
    pub identity_weight: f64,
    pub tap_energy: f64,
    pub snr_db: Option<f64>,
    pub bands: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            len: 128,
            a: 16,
            b: 16,
            width: 1.0,
            tau0: 2,
            nu0: 1,
            identity_weight: 1.0,
            tap_energy: 0.25,
            snr_db: Some(20.0),
            bands: vec![0, 1, 2, 4],
            trials: 50,
            seed: 1,
        }
    }
}

impl LinkConfig {
    /// Diagonal, then each band in order, then full.
    pub fn methods(&self) -> Vec<EqualizerMethod> {
        std::iter::once(EqualizerMethod::Diagonal)
            .chain(self.bands.iter().map(|&n| EqualizerMethod::Banded(n)))
            .chain(std::iter::once(EqualizerMethod::Full))
            .collect()
    }

    pub fn system(&self) -> Result<GaborSystem> {
        let lat = TFLattice::new(self.len, self.a, self.b)?;
        GaborSystem::new(periodized_gaussian(self.len, self.width)?, lat)
    }
}

/// Random stream of trial `trial`: the master seed selects the key, the trial the stream.
pub fn trial_rng(master_seed: u64, trial: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(trial as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: EqualizerMethod,
    pub mse: f64,
    pub bit_errors: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub cond: f64,
    pub outcomes: Vec<MethodOutcome>,
}

/// Aggregate over trials: median MSE and residual, pooled BER, median condition number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualizerReport {
    pub method: EqualizerMethod,
    pub mse: f64,
    pub ber: f64,
    pub residual: f64,
    pub cond: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    pub reports: Vec<EqualizerReport>,
    pub trials: Vec<TrialOutcome>,
    pub bits_per_trial: usize,
}

/// Sample median (mean of the middle pair for even counts); NaN when empty.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    }
}

fn run_trial(cfg: &LinkConfig, sys: &GaborSystem, methods: &[EqualizerMethod], trial: usize) -> Result<TrialOutcome> {
    let lat = sys.lattice();
    let mut rng = trial_rng(cfg.seed, trial);
    let spread = SpreadingFunction::random(cfg.len, cfg.tau0, cfg.nu0, cfg.tap_energy, &mut rng)?;
    let ch = ChannelSpec { spread, identity_weight: cfg.identity_weight, snr_db: cfg.snr_db };
    ch.validate()?;
    let h = ch.operator();
    let m = channel_matrix(&h, sys)?;
    let data = qpsk_symbols(lat.size(), &mut rng);
    let f = sys.synthesize(&data)?;
    let received = apply_operator(&h, &f, ch.snr_db, &mut rng)?;
    let y = demodulate(&received, sys)?;
    let y_vec = DVector::from_column_slice(&y);
    let outcomes = methods
        .iter()
        .map(|&method| {
            let est = equalize(&y, &m, lat, method)?;
            let est_vec = DVector::from_column_slice(&est);
            let mse = est.iter().zip(&data).map(|(e, c)| (e - c).norm_sqr()).sum::<f64>() / data.len() as f64;
            let bit_errors = est.iter().zip(&data).map(|(e, c)| qpsk_bit_errors(*c, slice_qpsk(*e))).sum();
            let residual = (&m * est_vec - &y_vec).norm();
            Ok(MethodOutcome { method, mse, bit_errors, residual })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialOutcome { trial, cond: condition_number(&m), outcomes })
}

/// Runs `cfg.trials` independent seeded trials and aggregates per method.
///
/// Trial `t` draws taps, data and noise from [`trial_rng`]`(seed, t)`, so
/// the result does not depend on scheduling.
pub fn run_link_simulation(cfg: &LinkConfig) -> Result<LinkReport> {
    if cfg.trials == 0 {
        return Err(GaborError::InvalidParameter("trials must be >= 1".into()));
    }
    let sys = cfg.system()?;
    let (lo, _) = sys.riesz_check();
    if lo <= RIESZ_MIN_EIG {
        return Err(GaborError::NotRieszSequence);
    }
    let methods = cfg.methods();
    let trials = par_map!(0..cfg.trials, |t: usize| run_trial(cfg, &sys, &methods, t))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let bits_per_trial = 2 * sys.lattice().size();
    let conds: Vec<f64> = trials.iter().map(|t| t.cond).collect();
    let cond = median(&conds);
    let reports = methods
        .iter()
        .enumerate()
        .map(|(k, &method)| {
            let mses: Vec<f64> = trials.iter().map(|t| t.outcomes[k].mse).collect();
            let residuals: Vec<f64> = trials.iter().map(|t| t.outcomes[k].residual).collect();
            let errors: usize = trials.iter().map(|t| t.outcomes[k].bit_errors).sum();
            EqualizerReport {
                method,
                mse: median(&mses),
                ber: errors as f64 / (bits_per_trial * trials.len()) as f64,
                residual: median(&residuals),
                cond,
            }
        })
        .collect();
    Ok(LinkReport { reports, trials, bits_per_trial })
}

/// Deterministic helper for tests and demos: a seeded random channel.
pub fn random_channel(cfg: &LinkConfig, seed: u64) -> Result<ChannelSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = SpreadingFunction::random(cfg.len, cfg.tau0, cfg.nu0, cfg.tap_energy, &mut rng)?;
    Ok(ChannelSpec { spread, identity_weight: cfg.identity_weight, snr_db: cfg.snr_db })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tf::{tf_shift, TFPoint};

    fn riesz_system() -> GaborSystem {
        LinkConfig::default().system().unwrap()
    }

    #[test]
    fn spreading_support_is_validated() {
        assert!(SpreadingFunction::new(16, 4, 0, vec![C64::new(0.0, 0.0); 5]).is_err());
        assert!(SpreadingFunction::new(16, 1, 1, vec![C64::new(0.0, 0.0); 5]).is_err());
        let s = SpreadingFunction::new(16, 1, 1, (0..6).map(|i| C64::new(i as f64, 0.0)).collect()).unwrap();
        assert_eq!(s.tap(-1, 0), C64::new(0.0, 0.0));
        assert_eq!(s.tap(1, 1), C64::new(5.0, 0.0));
        assert_eq!(s.tap(2, 0), C64::new(0.0, 0.0));
        assert_eq!(s.taps().count(), 6);
    }

    #[test]
    fn random_taps_have_requested_energy_and_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = SpreadingFunction::random(64, 3, 2, 0.1, &mut rng).unwrap();
        assert!((s.energy() - 0.1).abs() < 1e-14);
        assert_eq!(s.taps().count(), 5 * 4);
        let mut rng2 = ChaCha8Rng::seed_from_u64(4);
        assert_eq!(SpreadingFunction::random(64, 3, 2, 0.1, &mut rng2).unwrap(), s);
    }

    #[test]
    fn modulate_basics() {
        let sys = riesz_system();
        let n = sys.lattice().size();
        assert_eq!(modulate(&vec![C64::new(0.0, 0.0); n], &sys).unwrap(), Signal::zeros(128));
        let mut c = vec![C64::new(0.0, 0.0); n];
        c[9] = C64::new(1.0, 0.0);
        let atom = tf_shift(sys.lattice().point(9), sys.window());
        assert!(modulate(&c, &sys).unwrap().max_abs_diff(&atom) < 1e-14);

        let redundant = LinkConfig { len: 48, a: 4, b: 4, ..LinkConfig::default() }.system().unwrap();
        let c = vec![C64::new(1.0, 0.0); redundant.lattice().size()];
        assert_eq!(modulate(&c, &redundant).unwrap_err(), GaborError::NotRieszSequence);
    }

    #[test]
    fn identity_and_convolution_channels() {
        let sys = riesz_system();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = sys.synthesize(&qpsk_symbols(64, &mut rng)).unwrap();
        let out = transmit(&f, &ChannelSpec::identity(128), &mut rng).unwrap();
        assert!(out.max_abs_diff(&f) < 1e-13);

        let taps = vec![C64::new(0.5, 0.0), C64::new(0.0, 0.25), C64::new(-0.1, 0.0)];
        let spread = SpreadingFunction::new(128, 2, 0, taps.clone()).unwrap();
        let ch = ChannelSpec { spread, identity_weight: 0.0, snr_db: None };
        let out = transmit(&f, &ch, &mut rng).unwrap();
        // Oracle: circular correlation sum_u taps[u] f(t + u).
        for t in 0..128 {
            let expect: C64 = (0..3).map(|u| taps[u] * f[(t + u) % 128]).sum();
            assert!((out[t] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn demodulated_identity_channel_is_gram_times_data() {
        let sys = riesz_system();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = qpsk_symbols(64, &mut rng);
        let f = modulate(&c, &sys).unwrap();
        let y = demodulate(&f, &sys).unwrap();
        let expect = sys.gram_matrix() * DVector::from_column_slice(&c);
        for (a, b) in y.iter().zip(expect.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        let zero = demodulate(&Signal::zeros(128), &sys).unwrap();
        assert!(zero.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn equalizers_on_diagonal_matrix_and_wide_band() {
        let lat = TFLattice::new(16, 4, 4).unwrap();
        let d = CMatrix::from_fn(16, 16, |i, j| if i == j { C64::new(1.0 + i as f64, 0.5) } else { C64::new(0.0, 0.0) });
        let c: Vec<C64> = (0..16).map(|i| C64::new(i as f64, -1.0)).collect();
        let y: Vec<C64> = (&d * DVector::from_column_slice(&c)).as_slice().to_vec();
        for method in [EqualizerMethod::Diagonal, EqualizerMethod::Banded(0), EqualizerMethod::Full] {
            let est = equalize(&y, &d, &lat, method).unwrap();
            assert!(est.iter().zip(&c).all(|(a, b)| (a - b).norm() < 1e-12));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = CMatrix::from_fn(16, 16, |i, j| {
            C64::new(if i == j { 4.0 } else { 0.0 } + rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let wide = equalize(&y, &m, &lat, EqualizerMethod::Banded(lat.max_lattice_norm())).unwrap();
        let full = equalize(&y, &m, &lat, EqualizerMethod::Full).unwrap();
        assert!(wide.iter().zip(&full).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn equalizer_errors() {
        let lat = TFLattice::new(16, 4, 4).unwrap();
        let y = vec![C64::new(1.0, 0.0); 16];
        let mut m = CMatrix::identity(16, 16);
        m[(3, 3)] = C64::new(0.0, 0.0);
        assert_eq!(equalize(&y, &m, &lat, EqualizerMethod::Diagonal).unwrap_err(), GaborError::DiagonalUndefined);
        assert_eq!(equalize(&y, &m, &lat, EqualizerMethod::Full).unwrap_err(), GaborError::SingularEqualizer);
        assert_eq!(equalize(&y, &m, &lat, EqualizerMethod::Banded(1)).unwrap_err(), GaborError::SingularEqualizer);
    }

    #[test]
    fn band_mask_uses_wrapped_lattice_distance() {
        let lat = TFLattice::new(16, 4, 4).unwrap();
        let ones = CMatrix::from_element(16, 16, C64::new(1.0, 0.0));
        let b0 = band_matrix(&ones, &lat, 0);
        assert_eq!(b0, CMatrix::identity(16, 16));
        // Lattice is 4 x 4, so every pair is within wrapped distance 2.
        assert_eq!(band_matrix(&ones, &lat, 2), ones);
        let i = lat.index_of(TFPoint::new(0, 0, 16)).unwrap();
        let j = lat.index_of(TFPoint::new(12, 4, 16)).unwrap();
        assert_eq!(band_matrix(&ones, &lat, 1)[(i, j)], C64::new(1.0, 0.0));
    }

    #[test]
    fn qpsk_slicing() {
        let s = FRAC_1_SQRT_2;
        assert_eq!(slice_qpsk(C64::new(0.1, -3.0)), C64::new(s, -s));
        assert_eq!(qpsk_bit_errors(C64::new(s, s), C64::new(-s, s)), 1);
        assert_eq!(qpsk_bit_errors(C64::new(s, s), C64::new(-s, -s)), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let syms = qpsk_symbols(100, &mut rng);
        assert!(syms.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15 && slice_qpsk(*z) == *z));
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }
}
