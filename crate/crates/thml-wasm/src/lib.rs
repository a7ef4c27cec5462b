//! Browser bindings for the theta laboratory: three interactive operations
//! behind `wasm_bindgen`, each returning a JSON string the demo page plots.
//!
//! Build for the web with
//! `cargo build -p thml-wasm --release --target wasm32-unknown-unknown`
//! followed by `wasm-bindgen --target web` (see the repo README).

use serde_json::json;
use wasm_bindgen::prelude::*;

use thml::char_group::{CharacterGroup, Parity};
use thml::gcd_energy;
use thml::highprec::DEFAULT_LADDER;
use thml::mollifier::{self, MollifierSpec};
use thml::primes::is_prime;
use thml::sieve;
use thml::theta::{self, Decision};

/// Largest modulus the single-threaded demo accepts.
const P_LIMIT: u64 = 200_000;

fn err_json(msg: impl std::fmt::Display) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

fn parity_of(name: &str) -> Result<Parity, String> {
    match name {
        "even" => Ok(Parity::Even),
        "odd" => Ok(Parity::Odd),
        other => Err(format!("parity must be even or odd, got '{other}'")),
    }
}

fn check_p(p: u64) -> Result<(), String> {
    if !is_prime(p) || p < 3 {
        return Err(format!("p = {p} is not an odd prime"));
    }
    if p > P_LIMIT {
        return Err(format!("p = {p} beyond the demo limit {P_LIMIT}"));
    }
    Ok(())
}

pub fn theta_spectrum_json(p: u64, x: f64, parity: &str) -> String {
    match theta_spectrum_impl(p, x, parity) {
        Ok(s) => s,
        Err(e) => err_json(e),
    }
}

fn theta_spectrum_impl(p: u64, x: f64, parity: &str) -> Result<String, String> {
    check_p(p)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(format!("x = {x} must be positive"));
    }
    let parity = parity_of(parity)?;
    let group = CharacterGroup::build(p).map_err(|e| e.to_string())?;
    let batch = theta::theta_all(&group, x, parity).map_err(|e| e.to_string())?;
    let mut undecided = 0u64;
    let mut min_abs = f64::INFINITY;
    let points: Vec<serde_json::Value> = batch
        .iter()
        .map(|t| {
            let abs = t.value.norm();
            min_abs = min_abs.min(abs);
            if theta::is_nonzero(t) == Decision::Undecided {
                undecided += 1;
            }
            json!([t.j.0, abs, t.value.re, t.value.im])
        })
        .collect();
    Ok(json!({
        "p": p,
        "x": x,
        "parity": parity.as_str(),
        "count": batch.len(),
        "undecided": undecided,
        "min_abs": min_abs,
        "error_radius": batch.first().map(|t| t.error_radius).unwrap_or(0.0),
        "points": points,
    })
    .to_string())
}

pub fn census_json(p: u64, x: f64, y: f64) -> String {
    match census_impl(p, x, y) {
        Ok(s) => s,
        Err(e) => err_json(e),
    }
}

fn census_impl(p: u64, x: f64, y: f64) -> Result<String, String> {
    check_p(p)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(format!("x = {x} must be positive"));
    }
    let group = CharacterGroup::build(p).map_err(|e| e.to_string())?;
    let y_opt = if y > 0.0 { Some(y) } else { None };
    let mut out = Vec::new();
    for parity in [Parity::Even, Parity::Odd] {
        let spec = MollifierSpec::build(p, y_opt, parity).map_err(|e| e.to_string())?;
        let report = mollifier::nonvanishing_census(&group, x, parity, Some(&spec), DEFAULT_LADDER)
            .map_err(|e| e.to_string())?;
        out.push(json!({
            "parity": parity.as_str(),
            "nonvanishing": report.nonvanishing,
            "undecided": report.undecided,
            "half_order": group.half_order(),
            "m1": report.m1,
            "m2": report.m2,
            "cs_lower_bound": report.cs_lower_bound,
            "support_size": spec.support.len(),
            "support_y": spec.y,
            "m_cutoff": spec.m_cutoff,
            "closed_form_residuals": report.closed_form_residuals,
        }));
    }
    Ok(json!({
        "p": p,
        "x": x,
        "normalized": out
            .iter()
            .map(|r| r["nonvanishing"].as_u64().unwrap_or(0))
            .sum::<u64>() as f64
            * (p as f64).ln().sqrt()
            / (p as f64 * 2.0),
        "reports": out,
    })
    .to_string())
}

pub fn rough_frontier_json(n: u64, y_csv: &str) -> String {
    match rough_frontier_impl(n, y_csv) {
        Ok(s) => s,
        Err(e) => err_json(e),
    }
}

fn rough_frontier_impl(n: u64, y_csv: &str) -> Result<String, String> {
    if !(10..=2_000_000).contains(&n) {
        return Err(format!("N = {n} outside the demo range [10, 2e6]"));
    }
    let mut ys = Vec::new();
    for tok in y_csv.split(',') {
        let t = tok.trim();
        if t.is_empty() {
            continue;
        }
        let y: f64 = t.parse().map_err(|e| format!("bad y '{t}': {e}"))?;
        if y < 1.0 || y > n as f64 {
            return Err(format!("y = {y} outside [1, N]"));
        }
        ys.push(y);
    }
    if ys.is_empty() || ys.len() > 24 {
        return Err("need between 1 and 24 grid values".into());
    }
    let brun = sieve::brun_ratio_scan(n, &ys);
    let mut rows = Vec::new();
    for row in &brun {
        let set = sieve::rough_set(n, row.y);
        let r = gcd_energy::ratio_r(&set).map_err(|e| e.to_string())?;
        rows.push(json!({
            "y": row.y,
            "phi": row.phi,
            "zeta1y": row.zeta1y,
            "brun_ratio": row.ratio,
            "in_regime": row.in_regime,
            "density": set.density(),
            "r_over_n2": r / (n as f64 * n as f64),
        }));
    }
    let all = sieve::IntegerSet::all(n);
    let primes = sieve::IntegerSet::primes(n);
    Ok(json!({
        "n": n,
        "r_all_over_n2": gcd_energy::ratio_r(&all).map_err(|e| e.to_string())? / (n as f64 * n as f64),
        "r_primes_over_n2": gcd_energy::ratio_r(&primes).map_err(|e| e.to_string())? / (n as f64 * n as f64),
        "rows": rows,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn theta_spectrum(p: u64, x: f64, parity: &str) -> String {
    theta_spectrum_json(p, x, parity)
}

#[wasm_bindgen]
pub fn census(p: u64, x: f64, y: f64) -> String {
    census_json(p, x, y)
}

#[wasm_bindgen]
pub fn rough_frontier(n: u64, y_csv: &str) -> String {
    rough_frontier_json(n, y_csv)
}
