//! Time-frequency primitives on the cyclic group Z_L.
//!
//! Time shifts are measured in samples and frequency shifts in DFT bins, so
//! a point of the time-frequency plane is a pair `(x, xi)` of residues mod L.
//! The shift `pi(x, xi)` acts by `f(t) -> exp(2 pi i xi t / L) f(t - x)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{GaborError, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// `exp(2 pi i k / L)` with `k` reduced exactly in integer arithmetic first.
pub fn unit_root(k: i64, len: usize) -> C64 {
    let r = k.rem_euclid(len as i64) as f64;
    C64::from_polar(1.0, 2.0 * PI * r / len as f64)
}

/// A finite complex signal of length L.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignalRepr", into = "SignalRepr")]
pub struct Signal {
    values: DVector<C64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignalRepr {
    #[serde(rename = "L")]
    len: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<SignalRepr> for Signal {
    type Error = GaborError;

    fn try_from(r: SignalRepr) -> Result<Self> {
        if r.re.len() != r.len || r.im.len() != r.len {
            return Err(GaborError::DimensionMismatch(format!(
                "signal declares L={} but has {} real and {} imaginary parts",
                r.len,
                r.re.len(),
                r.im.len()
            )));
        }
        Signal::new(r.re.iter().zip(&r.im).map(|(&re, &im)| C64::new(re, im)).collect())
    }
}

impl From<Signal> for SignalRepr {
    fn from(s: Signal) -> Self {
        SignalRepr {
            len: s.len(),
            re: s.values.iter().map(|z| z.re).collect(),
            im: s.values.iter().map(|z| z.im).collect(),
        }
    }
}

impl Signal {
    pub fn new(values: Vec<C64>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(values))
    }

    pub fn from_vector(values: DVector<C64>) -> Result<Self> {
        if values.is_empty() {
            return Err(GaborError::InvalidParameter("signal must be non-empty".into()));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(GaborError::InvalidParameter("signal has non-finite entries".into()));
        }
        Ok(Signal { values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Signal { values: DVector::zeros(len) }
    }

    /// Unit impulse at `t`.
    pub fn delta(len: usize, t: usize) -> Self {
        let mut s = Self::zeros(len);
        s.values[t % len] = C64::new(1.0, 0.0);
        s
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        self.values.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<C64> {
        &self.values
    }

    pub fn into_vector(self) -> DVector<C64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.norm()
    }

    /// `<self, other>`, conjugate-linear in the second argument.
    pub fn inner(&self, other: &Signal) -> C64 {
        self.values.iter().zip(other.values.iter()).map(|(f, h)| f * h.conj()).sum()
    }

    pub fn scale(&self, c: C64) -> Signal {
        Signal { values: &self.values * c }
    }

    pub fn max_abs_diff(&self, other: &Signal) -> f64 {
        self.values.iter().zip(other.values.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for Signal {
    type Output = C64;

    fn index(&self, t: usize) -> &C64 {
        &self.values[t]
    }
}

/// A point `(x, xi)` of the discrete time-frequency plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TFPoint {
    pub x: usize,
    pub xi: usize,
}

impl TFPoint {
    /// Reduces both coordinates mod `len`.
    pub fn new(x: i64, xi: i64, len: usize) -> Self {
        let l = len as i64;
        TFPoint { x: x.rem_euclid(l) as usize, xi: xi.rem_euclid(l) as usize }
    }

    pub fn add(self, other: TFPoint, len: usize) -> TFPoint {
        TFPoint { x: (self.x + other.x) % len, xi: (self.xi + other.xi) % len }
    }

    pub fn neg(self, len: usize) -> TFPoint {
        TFPoint { x: (len - self.x) % len, xi: (len - self.xi) % len }
    }
}

fn wrap(c: usize, len: usize) -> usize {
    let c = c % len;
    c.min(len - c)
}

/// l-infinity norm of the componentwise wrapped distances to the origin.
pub fn wrapped_norm(nu: TFPoint, len: usize) -> usize {
    wrap(nu.x, len).max(wrap(nu.xi, len))
}

/// Separable lattice `a Z_L x b Z_L`.
///
/// Points are enumerated row-major: index `j * (L / b) + k` is the point
/// `(j a, k b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LatticeRepr", into = "LatticeRepr")]
pub struct TFLattice {
    len: usize,
    a: usize,
    b: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeRepr {
    #[serde(rename = "L")]
    len: usize,
    a: usize,
    b: usize,
}

impl TryFrom<LatticeRepr> for TFLattice {
    type Error = GaborError;

    fn try_from(r: LatticeRepr) -> Result<Self> {
        TFLattice::new(r.len, r.a, r.b)
    }
}

impl From<TFLattice> for LatticeRepr {
    fn from(l: TFLattice) -> Self {
        LatticeRepr { len: l.len, a: l.a, b: l.b }
    }
}

impl TFLattice {
    pub fn new(len: usize, a: usize, b: usize) -> Result<Self> {
        if len == 0 {
            return Err(GaborError::InvalidLattice("L must be positive".into()));
        }
        if a == 0 || !len.is_multiple_of(a) {
            return Err(GaborError::InvalidLattice("a must divide L".into()));
        }
        if b == 0 || !len.is_multiple_of(b) {
            return Err(GaborError::InvalidLattice("b must divide L".into()));
        }
        Ok(TFLattice { len, a, b })
    }

    pub fn signal_len(&self) -> usize {
        self.len
    }

    pub fn time_step(&self) -> usize {
        self.a
    }

    pub fn freq_step(&self) -> usize {
        self.b
    }

    /// Number of time positions `L / a`.
    pub fn time_count(&self) -> usize {
        self.len / self.a
    }

    /// Number of frequency positions `L / b`.
    pub fn freq_count(&self) -> usize {
        self.len / self.b
    }

    pub fn size(&self) -> usize {
        self.time_count() * self.freq_count()
    }

    pub fn redundancy(&self) -> f64 {
        self.len as f64 / (self.a * self.b) as f64
    }

    /// Lattice coordinates `(j, k)` of the point with the given index.
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.freq_count(), idx % self.freq_count())
    }

    pub fn index_of_coords(&self, j: usize, k: usize) -> usize {
        (j % self.time_count()) * self.freq_count() + k % self.freq_count()
    }

    pub fn point(&self, idx: usize) -> TFPoint {
        let (j, k) = self.coords(idx);
        TFPoint { x: j * self.a, xi: k * self.b }
    }

    pub fn index_of(&self, p: TFPoint) -> Option<usize> {
        let (x, xi) = (p.x % self.len, p.xi % self.len);
        (x % self.a == 0 && xi % self.b == 0).then(|| self.index_of_coords(x / self.a, xi / self.b))
    }

    pub fn points(&self) -> impl Iterator<Item = TFPoint> + '_ {
        (0..self.size()).map(move |i| self.point(i))
    }

    /// Index of `point(i) + point(j)`.
    pub fn add_indices(&self, i: usize, j: usize) -> usize {
        let (ji, ki) = self.coords(i);
        let (jj, kj) = self.coords(j);
        self.index_of_coords(ji + jj, ki + kj)
    }

    /// Index of `point(i) - point(j)`.
    pub fn sub_indices(&self, i: usize, j: usize) -> usize {
        let (ji, ki) = self.coords(i);
        let (jj, kj) = self.coords(j);
        self.index_of_coords(ji + self.time_count() - jj, ki + self.freq_count() - kj)
    }

    /// Wrapped l-infinity norm of a lattice point counted in lattice steps.
    ///
    /// Truncation sets, band masks and decay fits are all measured in this
    /// unit; for `a = b` it equals `wrapped_norm(point) / a`.
    pub fn lattice_norm(&self, idx: usize) -> usize {
        let (j, k) = self.coords(idx);
        wrap(j, self.time_count()).max(wrap(k, self.freq_count()))
    }

    /// Largest lattice norm attained on the torus.
    pub fn max_lattice_norm(&self) -> usize {
        (self.time_count() / 2).max(self.freq_count() / 2)
    }

    /// `[2, L / (2 max(a, b)) - 1]`: the decay fit window in lattice steps.
    pub fn default_fit_range(&self) -> (usize, usize) {
        let hi = (self.len / (2 * self.a.max(self.b))).saturating_sub(1);
        (2, hi.max(2))
    }
}

/// Polynomial `(1 + r)^s` or sub-exponential `exp(alpha r^beta)` weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    Polynomial { s: f64 },
    Exponential { alpha: f64, beta: f64 },
}

impl WeightSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightSpec::Polynomial { s } if !(s >= 0.0 && s.is_finite()) => {
                Err(GaborError::InvalidParameter(format!("weight exponent s={s} must be >= 0")))
            }
            WeightSpec::Exponential { alpha, beta } if !(alpha > 0.0 && beta > 0.0 && beta <= 1.0) => {
                Err(GaborError::InvalidParameter(format!(
                    "exponential weight needs alpha > 0 and beta in (0, 1], got alpha={alpha} beta={beta}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Weight at radius `r >= 0`; always `>= 1` with `v(0) = 1`.
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            WeightSpec::Polynomial { s } => (1.0 + r).powf(s),
            WeightSpec::Exponential { alpha, beta } => (alpha * r.powf(beta)).exp(),
        }
    }

    /// Weight of a time-frequency point under the wrapped Euclidean metric.
    pub fn at(&self, nu: TFPoint, len: usize) -> f64 {
        let (x, xi) = (wrap(nu.x, len) as f64, wrap(nu.xi, len) as f64);
        self.eval(x.hypot(xi))
    }
}

fn fft(buf: &mut [C64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let plan = if inverse { planner.plan_fft_inverse(buf.len()) } else { planner.plan_fft_forward(buf.len()) };
    plan.process(buf);
}

/// Unitary DFT: `F f(k) = L^{-1/2} sum_t f(t) exp(-2 pi i k t / L)`.
pub fn dft(f: &Signal) -> Signal {
    let mut buf: Vec<C64> = f.as_slice().to_vec();
    let scale = 1.0 / (buf.len() as f64).sqrt();
    fft(&mut buf, false);
    buf.iter_mut().for_each(|z| *z *= scale);
    Signal { values: DVector::from_vec(buf) }
}

/// Inverse of [`dft`].
pub fn idft(f: &Signal) -> Signal {
    let mut buf: Vec<C64> = f.as_slice().to_vec();
    let scale = 1.0 / (buf.len() as f64).sqrt();
    fft(&mut buf, true);
    buf.iter_mut().for_each(|z| *z *= scale);
    Signal { values: DVector::from_vec(buf) }
}

/// Unitary 2-D DFT of a square matrix (both axes transformed).
pub fn dft2(m: &CMatrix, inverse: bool) -> CMatrix {
    let (rows, cols) = m.shape();
    let mut out = m.clone();
    let mut planner = FftPlanner::new();
    let row_plan = if inverse { planner.plan_fft_inverse(cols) } else { planner.plan_fft_forward(cols) };
    let col_plan = if inverse { planner.plan_fft_inverse(rows) } else { planner.plan_fft_forward(rows) };
    let mut buf = vec![C64::new(0.0, 0.0); cols.max(rows)];
    for r in 0..rows {
        for c in 0..cols {
            buf[c] = out[(r, c)];
        }
        row_plan.process(&mut buf[..cols]);
        for c in 0..cols {
            out[(r, c)] = buf[c];
        }
    }
    for c in 0..cols {
        let col = out.column_mut(c);
        buf[..rows].copy_from_slice(col.as_slice());
        col_plan.process(&mut buf[..rows]);
        out.column_mut(c).as_mut_slice().copy_from_slice(&buf[..rows]);
    }
    out / C64::new(((rows * cols) as f64).sqrt(), 0.0)
}

/// `pi(z) f (t) = exp(2 pi i xi t / L) f(t - x)`.
pub fn tf_shift(z: TFPoint, f: &Signal) -> Signal {
    let len = f.len();
    let values = DVector::from_fn(len, |t, _| {
        let src = (t + len - z.x % len) % len;
        unit_root((z.xi * t) as i64, len) * f[src]
    });
    Signal { values }
}

/// The L x L matrix of `pi(z)`.
pub fn tf_shift_matrix(z: TFPoint, len: usize) -> CMatrix {
    let mut m = CMatrix::zeros(len, len);
    for t in 0..len {
        let src = (t + len - z.x % len) % len;
        m[(t, src)] = unit_root((z.xi * t) as i64, len);
    }
    m
}

/// The scalar `c` with `pi(mu + nu) = c pi(nu) pi(mu)`, namely `exp(2 pi i nu_x mu_xi / L)`.
pub fn commutation_phase(nu: TFPoint, mu: TFPoint, len: usize) -> C64 {
    unit_root((nu.x % len * (mu.xi % len)) as i64, len)
}

/// Sampled short-time Fourier transform `V_g f(lambda) = <f, pi(lambda) g>`
/// over the lattice, in lattice enumeration order.
pub fn stft(f: &Signal, g: &Signal, lat: &TFLattice) -> Result<Vec<C64>> {
    let len = lat.signal_len();
    if f.len() != len || g.len() != len {
        return Err(GaborError::DimensionMismatch(format!(
            "signal length {} / window length {} vs lattice L={len}",
            f.len(),
            g.len()
        )));
    }
    if g.norm() == 0.0 {
        return Err(GaborError::DegenerateWindow);
    }
    let mut planner = FftPlanner::new();
    let plan = planner.plan_fft_forward(len);
    let mut out = Vec::with_capacity(lat.size());
    let mut buf = vec![C64::new(0.0, 0.0); len];
    for j in 0..lat.time_count() {
        let x = j * lat.time_step();
        for (t, slot) in buf.iter_mut().enumerate() {
            *slot = f[t] * g[(t + len - x) % len].conj();
        }
        plan.process(&mut buf);
        out.extend((0..lat.freq_count()).map(|k| buf[k * lat.freq_step()]));
    }
    Ok(out)
}

/// Synthesis matrix: L x n_lattice with column `i` equal to `pi(lambda_i) g`.
pub fn synthesis_matrix(g: &Signal, lat: &TFLattice) -> CMatrix {
    let len = lat.signal_len();
    let mut phi = CMatrix::zeros(len, lat.size());
    for (i, p) in lat.points().enumerate() {
        for t in 0..len {
            let src = (t + len - p.x) % len;
            phi[(t, i)] = unit_root((p.xi * t) as i64, len) * g[src];
        }
    }
    phi
}

/// Periodized Gaussian `sum_{|k| <= 4} exp(-pi (t + kL)^2 / (width L))`,
/// normalized to unit l2 norm.
pub fn periodized_gaussian(len: usize, width: f64) -> Result<Signal> {
    const TAIL: i64 = 4;
    if !(width > 0.0 && width.is_finite()) {
        return Err(GaborError::InvalidParameter(format!("window width must be positive, got {width}")));
    }
    if len == 0 {
        return Err(GaborError::InvalidParameter("L must be positive".into()));
    }
    let l = len as f64;
    let raw: Vec<f64> = (0..len)
        .map(|t| {
            (-TAIL..=TAIL)
                .map(|k| {
                    let u = t as f64 + k as f64 * l;
                    (-PI * u * u / (width * l)).exp()
                })
                .sum()
        })
        .collect();
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    Signal::from_real(&raw.iter().map(|v| v / norm).collect::<Vec<_>>())
}
