//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::time::{Duration, Instant};

use gabormult_core::channel::{
    demodulate, equalize, modulate, qpsk_bit_errors, qpsk_symbols, run_link_simulation, slice_qpsk, transmit,
    EqualizerMethod, LinkConfig, SpreadingFunction, ChannelSpec,
};
use gabormult_core::decomp::{channel_matrix, decompose, sweep_decomposition, decay_profile};
use gabormult_core::frames::GaborSystem;
use gabormult_core::linalg::{op_norm_power, op_norm_svd, POWER_MAX_ITERS, POWER_TOL};
use gabormult_core::multiplier::{GaborMultiplier, MultiplierSymbol};
use gabormult_core::symbols::{generate_symbol, kn_operator, SymbolFamilySpec};
use gabormult_core::tf::{periodized_gaussian, stft, tf_shift, Signal, TFLattice};
use gabormult_core::{CMatrix, C64};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn tight_system(len: usize, a: usize, b: usize) -> GaborSystem {
    let lat = TFLattice::new(len, a, b).expect("lattice");
    GaborSystem::new(periodized_gaussian(len, 1.0).expect("window"), lat)
        .expect("system")
        .canonical_tight()
        .expect("tight")
}

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

/// 1. Exact representation at (48, 4, 4): 20 random operators, rel. Frobenius error <= 1e-10, <= 10 s.
fn exact_representation() -> Outcome {
    let start = Instant::now();
    let sys = tight_system(48, 4, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let op = random_matrix(48, 48, &mut rng);
        let rec = decompose(&op, &sys).map_err(|e| e.to_string())?.reconstruct();
        worst = worst.max((rec - &op).norm() / op.norm());
    }
    let elapsed = start.elapsed();
    check(worst <= 1e-10 && within(elapsed, 10), format!("worst rel error {worst:.2e}, {elapsed:.2?}"))
}

/// 2. Parseval identities: tight bounds within 1e-10 of 1, unit multiplier equals I within 1e-10.
fn parseval_identities() -> Outcome {
    let sys = tight_system(48, 4, 4);
    let (a, b) = sys.frame_bounds();
    let unit = MultiplierSymbol::constant(*sys.lattice(), C64::new(1.0, 0.0));
    let m = GaborMultiplier::new(&sys, unit).map_err(|e| e.to_string())?.to_matrix();
    let dev = op_norm_svd(&(m - CMatrix::identity(48, 48)));
    let bounds_dev = (a - 1.0).abs().max((b - 1.0).abs());
    check(bounds_dev <= 1e-10 && dev <= 1e-10, format!("bounds ({a:.12}, {b:.12}), ||M_1 - I|| = {dev:.2e}"))
}

/// 3. Multiplier norm bound on the Parseval system: 100 random symbols, <= 30 s.
fn multiplier_norm_bound() -> Outcome {
    let start = Instant::now();
    let sys = tight_system(48, 4, 4);
    let lat = *sys.lattice();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..100 {
        let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
        let values = (0..lat.size())
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * scale)
            .collect();
        let a = MultiplierSymbol::new(lat, values).map_err(|e| e.to_string())?;
        let sup = a.sup_norm();
        let nb = GaborMultiplier::new(&sys, a).map_err(|e| e.to_string())?.norm_bound_check();
        worst_excess = worst_excess.max(nb.op_norm - sup);
    }
    let elapsed = start.elapsed();
    check(
        worst_excess <= 1e-10 && within(elapsed, 30),
        format!("max(||M_a|| - ||a||_inf) = {worst_excess:.2e}, {elapsed:.2?}"),
    )
}

struct SymbolRun {
    s: f64,
    exponent: f64,
    rate: f64,
    final_rel: f64,
    tail_worst: f64,
    monotone_violations: usize,
}

fn symbol_runs() -> Result<(Vec<SymbolRun>, Duration), String> {
    let start = Instant::now();
    let len = 96;
    let sys = tight_system(len, 4, 4);
    let lat = *sys.lattice();
    let ns: Vec<usize> = (0..=lat.max_lattice_norm()).collect();
    let mut runs = Vec::new();
    for s in [2.0, 4.0, 6.0] {
        let sig = generate_symbol(&SymbolFamilySpec::poly(s, 7), len).map_err(|e| e.to_string())?;
        let op = kn_operator(&sig);
        let m = channel_matrix(&op, &sys).map_err(|e| e.to_string())?;
        let prof = decay_profile(&m, &lat, None).map_err(|e| e.to_string())?;
        let d = decompose(&op, &sys).map_err(|e| e.to_string())?;
        let res = sweep_decomposition(&op, &d, &ns, None);
        let tail_worst = res.errors.iter().zip(&res.tail_bounds).map(|(e, t)| e - t).fold(f64::NEG_INFINITY, f64::max);
        runs.push(SymbolRun {
            s,
            exponent: prof.fitted_exponent,
            rate: res.fitted_rate,
            final_rel: res.errors.last().copied().unwrap_or(f64::NAN) / res.op_norm,
            tail_worst,
            monotone_violations: res.monotone_violations.len(),
        });
    }
    Ok((runs, start.elapsed()))
}

/// 4. Side-diagonal decay exponent <= -(s - 0.75) for s in {2, 4, 6} at L = 96, monotone in s.
fn almost_diagonalization(runs: &[SymbolRun]) -> Outcome {
    let each = runs.iter().all(|r| r.exponent <= -(r.s - 0.75));
    let monotone = runs.windows(2).all(|w| w[1].exponent < w[0].exponent);
    let detail: Vec<String> = runs.iter().map(|r| format!("s={}: {:.3} (<= {:.2})", r.s, r.exponent, -(r.s - 0.75))).collect();
    check(each && monotone, format!("{}; monotone={monotone}", detail.join(", ")))
}

/// 5. E_N slope <= -(s - 2) + 0.75 and E at maximal N <= 1e-10 ||A||, <= 2 min.
fn approximation_rate(runs: &[SymbolRun], elapsed: Duration) -> Outcome {
    let each = runs
        .iter()
        .all(|r| r.rate <= -(r.s - 2.0) + 0.75 && r.final_rel <= 1e-10 && r.monotone_violations == 0);
    let detail: Vec<String> = runs
        .iter()
        .map(|r| format!(
            "s={}: slope {:.3} (<= {:.2}), E_max/||A|| {:.1e}, {} increases",
            r.s,
            r.rate,
            -(r.s - 2.0) + 0.75,
            r.final_rel,
            r.monotone_violations
        ))
        .collect();
    check(each && within(elapsed, 120), format!("{}; {elapsed:.2?}", detail.join(", ")))
}

/// 6. E_N <= sum_{|nu| > N} ||a_nu||_inf at every N (slack 1e-10).
fn truncation_tail(runs: &[SymbolRun]) -> Outcome {
    // Also on a generic operator, where the tail sum is far from tight.
    let sys = tight_system(48, 4, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let op = random_matrix(48, 48, &mut rng);
    let d = decompose(&op, &sys).map_err(|e| e.to_string())?;
    let ns: Vec<usize> = (0..=sys.lattice().max_lattice_norm()).collect();
    let res = sweep_decomposition(&op, &d, &ns, None);
    let random_worst = res.errors.iter().zip(&res.tail_bounds).map(|(e, t)| e - t).fold(f64::NEG_INFINITY, f64::max);
    let worst = runs.iter().map(|r| r.tail_worst).fold(random_worst, f64::max);
    check(worst <= 1e-10, format!("max(E_N - tail) = {worst:.2e}"))
}

/// 7. Noiseless y = M c to 1e-10 at (128, 16, 16); full equalizer gives BER = 0.
fn channel_consistency() -> Outcome {
    let cfg = LinkConfig { snr_db: None, ..LinkConfig::default() };
    let sys = cfg.system().map_err(|e| e.to_string())?;
    let lat = *sys.lattice();
    let mut worst = 0.0f64;
    let mut bit_errors = 0;
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let spread = SpreadingFunction::random(cfg.len, cfg.tau0, cfg.nu0, cfg.tap_energy, &mut rng).map_err(|e| e.to_string())?;
        let ch = ChannelSpec { spread, identity_weight: cfg.identity_weight, snr_db: None };
        let c = qpsk_symbols(lat.size(), &mut rng);
        let f = modulate(&c, &sys).map_err(|e| e.to_string())?;
        let y = demodulate(&transmit(&f, &ch, &mut rng).map_err(|e| e.to_string())?, &sys).map_err(|e| e.to_string())?;
        let m = channel_matrix(&ch.operator(), &sys).map_err(|e| e.to_string())?;
        let yv = DVector::from_column_slice(&y);
        worst = worst.max((&m * DVector::from_column_slice(&c) - &yv).norm() / yv.norm());
        let est = equalize(&y, &m, &lat, EqualizerMethod::Full).map_err(|e| e.to_string())?;
        bit_errors += est.iter().zip(&c).map(|(e, s)| qpsk_bit_errors(*s, slice_qpsk(*e))).sum::<usize>();
    }
    check(worst <= 1e-10 && bit_errors == 0, format!("max ||y - Mc||/||y|| = {worst:.2e}, full-equalizer bit errors {bit_errors}"))
}

/// 8. Banded equalization beats diagonal at tau0=2, nu0=1, 20 dB, 50 trials; MSE nonincreasing in N.
///
/// Monte-Carlo tolerance for "nonincreasing": the later median may exceed the
/// earlier one by at most two standard errors of the paired median
/// difference, `2 * 1.2533 * sd(diff) / sqrt(trials)`.
fn banded_improvement() -> Outcome {
    let start = Instant::now();
    let cfg = LinkConfig { tau0: 2, nu0: 1, snr_db: Some(20.0), bands: vec![0, 1, 2, 4], trials: 50, seed: 1, ..LinkConfig::default() };
    let report = run_link_simulation(&cfg).map_err(|e| e.to_string())?;
    let median_of = |m: EqualizerMethod| report.reports.iter().find(|r| r.method == m).map(|r| r.mse).unwrap_or(f64::NAN);
    let diag = median_of(EqualizerMethod::Diagonal);
    let band2 = median_of(EqualizerMethod::Banded(2));
    let mse_of = |k: usize| -> Vec<f64> {
        let pos = cfg.methods().iter().position(|&m| m == EqualizerMethod::Banded(cfg.bands[k])).unwrap();
        report.trials.iter().map(|t| t.outcomes[pos].mse).collect()
    };
    let mut monotone = true;
    let mut steps = Vec::new();
    for k in 1..cfg.bands.len() {
        let (prev, next) = (mse_of(k - 1), mse_of(k));
        let diffs: Vec<f64> = next.iter().zip(&prev).map(|(n, p)| n - p).collect();
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (diffs.len() - 1) as f64).sqrt();
        let tol = 2.0 * 1.2533 * sd / (diffs.len() as f64).sqrt();
        let (mp, mn) = (median_of(EqualizerMethod::Banded(cfg.bands[k - 1])), median_of(EqualizerMethod::Banded(cfg.bands[k])));
        monotone &= mn <= mp + tol;
        steps.push(format!("N={}: {mn:.3e}", cfg.bands[k]));
    }
    let elapsed = start.elapsed();
    check(
        band2 < diag && monotone && within(elapsed, 120),
        format!(
            "median MSE diagonal {diag:.3e}, banded(0) {:.3e}, {}; monotone={monotone}; {elapsed:.2?}",
            median_of(EqualizerMethod::Banded(0)),
            steps.join(", ")
        ),
    )
}

/// 9. Power iteration vs SVD (20 matrices, 1e-8); STFT and channel matrix vs brute force (1e-12, L <= 32).
fn oracle_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut norm_worst = 0.0f64;
    for k in 0..20 {
        let n = 8 + 3 * k;
        let m = random_matrix(n, n, &mut rng);
        let svd = op_norm_svd(&m);
        norm_worst = norm_worst.max((op_norm_power(&m, POWER_TOL, POWER_MAX_ITERS) - svd).abs() / svd);
    }

    let mut stft_worst = 0.0f64;
    let mut chan_worst = 0.0f64;
    for (len, a, b) in [(32, 1, 1), (32, 4, 4), (24, 3, 4), (16, 4, 4)] {
        let lat = TFLattice::new(len, a, b).unwrap();
        let g = Signal::new((0..len).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect()).unwrap();
        let f = Signal::new((0..len).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect()).unwrap();
        let fast = stft(&f, &g, &lat).unwrap();
        for (i, p) in lat.points().enumerate() {
            // <f, pi(p) g> by a direct double loop.
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..len {
                let phase = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * ((p.xi * t) % len) as f64 / len as f64);
                acc += f[t] * (phase * g[(t + len - p.x) % len]).conj();
            }
            stft_worst = stft_worst.max((fast[i] - acc).norm());
        }

        let sys = GaborSystem::new(g.clone(), lat).unwrap();
        let op = random_matrix(len, len, &mut rng);
        let m = channel_matrix(&op, &sys).unwrap();
        let atoms: Vec<Signal> = lat.points().map(|p| tf_shift(p, &g)).collect();
        for (l, al) in atoms.iter().enumerate() {
            for (mu, am) in atoms.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..len {
                    let mut row = C64::new(0.0, 0.0);
                    for c in 0..len {
                        row += op[(r, c)] * am[c];
                    }
                    acc += row * al[r].conj();
                }
                chan_worst = chan_worst.max((m[(l, mu)] - acc).norm());
            }
        }
    }
    check(
        norm_worst <= 1e-8 && stft_worst <= 1e-12 && chan_worst <= 1e-12,
        format!("power/SVD rel {norm_worst:.2e}, stft {stft_worst:.2e}, channel matrix {chan_worst:.2e}"),
    )
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 exact representation", exact_representation()),
        ("2 Parseval identities", parseval_identities()),
        ("3 multiplier norm bound", multiplier_norm_bound()),
    ];
    match symbol_runs() {
        Ok((runs, elapsed)) => {
            results.push(("4 almost-diagonalization rate", almost_diagonalization(&runs)));
            results.push(("5 approximation rate", approximation_rate(&runs, elapsed)));
            results.push(("6 truncation-tail inequality", truncation_tail(&runs)));
        }
        Err(e) => {
            for name in ["4 almost-diagonalization rate", "5 approximation rate", "6 truncation-tail inequality"] {
                results.push((name, Err(e.clone())));
            }
        }
    }
    results.push(("7 channel consistency", channel_consistency()));
    results.push(("8 banded-equalizer improvement", banded_improvement()));
    results.push(("9 oracle agreement", oracle_agreement()));

    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
