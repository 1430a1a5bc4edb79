//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export takes plain numbers and returns a JSON string for the page to plot.

use gabormult_core::channel::{run_link_simulation, LinkConfig};
use gabormult_core::decomp::{channel_matrix, decay_profile, decompose, sweep_decomposition};
use gabormult_core::frames::GaborSystem;
use gabormult_core::symbols::{generate_symbol, kn_operator, SymbolFamilySpec};
use gabormult_core::tf::{periodized_gaussian, TFLattice};
use gabormult_core::{CMatrix, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> std::result::Result<String, JsError> {
    serde_json::to_string(value).map_err(js_err)
}

fn setup(len: usize, a: usize, b: usize, s: f64, seed: u64) -> Result<(GaborSystem, CMatrix)> {
    let lat = TFLattice::new(len, a, b)?;
    let sys = GaborSystem::new(periodized_gaussian(len, 1.0)?, lat)?.canonical_tight()?;
    let op = kn_operator(&generate_symbol(&SymbolFamilySpec::poly(s, seed), len)?);
    Ok((sys, op))
}

#[derive(Serialize)]
struct DecayView {
    shell_max: Vec<f64>,
    fitted_exponent: Option<f64>,
    fit_range: (usize, usize),
}

fn decay_view(len: usize, a: usize, b: usize, s: f64, seed: u64) -> Result<DecayView> {
    let (sys, op) = setup(len, a, b, s, seed)?;
    let p = decay_profile(&channel_matrix(&op, &sys)?, sys.lattice(), None)?;
    Ok(DecayView {
        shell_max: p.shell_max,
        fitted_exponent: p.fitted_exponent.is_finite().then_some(p.fitted_exponent),
        fit_range: p.fit_range,
    })
}

/// Largest side-diagonal entry per lattice-norm shell for a random symbol of smoothness `s`.
#[wasm_bindgen]
pub fn decay_profile_json(len: usize, a: usize, b: usize, s: f64, seed: u64) -> std::result::Result<String, JsError> {
    to_json(&decay_view(len, a, b, s, seed).map_err(js_err)?)
}

#[derive(Serialize)]
struct SweepView {
    ns: Vec<usize>,
    errors: Vec<f64>,
    tail_bounds: Vec<f64>,
    op_norm: f64,
    fitted_rate: Option<f64>,
}

fn sweep_view(len: usize, a: usize, b: usize, s: f64, seed: u64) -> Result<SweepView> {
    let (sys, op) = setup(len, a, b, s, seed)?;
    let d = decompose(&op, &sys)?;
    let ns: Vec<usize> = (0..=sys.lattice().max_lattice_norm()).collect();
    let r = sweep_decomposition(&op, &d, &ns, None);
    Ok(SweepView {
        ns: r.ns,
        errors: r.errors,
        tail_bounds: r.tail_bounds,
        op_norm: r.op_norm,
        fitted_rate: r.fitted_rate.is_finite().then_some(r.fitted_rate),
    })
}

/// Truncation error and tail-sum bound for every cutoff up to the full sum.
#[wasm_bindgen]
pub fn approx_sweep_json(len: usize, a: usize, b: usize, s: f64, seed: u64) -> std::result::Result<String, JsError> {
    to_json(&sweep_view(len, a, b, s, seed).map_err(js_err)?)
}

#[derive(Serialize)]
struct MethodView {
    label: String,
    mse: f64,
    ber: f64,
}

fn channel_view(tau0: usize, nu0: usize, snr_db: f64, trials: usize, seed: u64) -> Result<Vec<MethodView>> {
    let cfg = LinkConfig { tau0, nu0, snr_db: Some(snr_db), trials, seed, ..LinkConfig::default() };
    let report = run_link_simulation(&cfg)?;
    Ok(report.reports.iter().map(|r| MethodView { label: r.method.to_string(), mse: r.mse, ber: r.ber }).collect())
}

/// Median MSE and BER per equalizer at `(L, a, b) = (128, 16, 16)`.
#[wasm_bindgen]
pub fn channel_json(tau0: usize, nu0: usize, snr_db: f64, trials: usize, seed: u64) -> std::result::Result<String, JsError> {
    to_json(&channel_view(tau0, nu0, snr_db, trials, seed).map_err(js_err)?)
}
