//! Mollified moments and the non-vanishing census.
//!
//! The mollifier M(chi) = sum over m in A of conj(chi(m)), with A a rough
//! subset of [1, sqrt(p)], smooths the theta family so Cauchy-Schwarz
//! M1^2 <= count * M2 yields a lower bound on #{chi : theta(x, chi) != 0}.
//! Both moments are computed two ways: directly over the character family,
//! and through the orthogonality closed form as a congruence sum; the two
//! routes must agree to 1e-9 relative.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::char_group::{CharacterGroup, Parity};
use crate::dft::{CztPlan, TransformSign};
use crate::error::{Error, Result};
use crate::highprec::decide_with_ladder;
use crate::sieve::{rough_set, IntegerSet};
use crate::summation::{KahanComplex, KahanSum};
use crate::theta::{self, Decision};
use crate::util::{inv_mod_prime, isqrt};

/// Serialization schema version for MomentReport.
pub const REPORT_SCHEMA: u32 = 1;

/// Evaluation route for the mollified moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Sum over characters, using the batched theta engine.
    Direct,
    /// Orthogonality closed form: congruence-constrained double series.
    Closed,
}

/// Mollifier support: cutoff M = floor(sqrt(p)), coefficients c_m in {0, 1}
/// carried as the support set A.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MollifierSpec {
    pub p: u64,
    pub m_cutoff: u64,
    pub support: IntegerSet,
    pub parity: Parity,
    /// Sieve parameter behind the support; None for custom supports.
    pub y: Option<f64>,
}

impl MollifierSpec {
    /// Support as the y-rough numbers up to floor(sqrt(p)); y = None picks
    /// the default scale exp(sqrt(log p)).
    pub fn build(p: u64, y: Option<f64>, parity: Parity) -> Result<MollifierSpec> {
        if !crate::primes::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let m_cutoff = isqrt(p);
        let y_eff = y.unwrap_or_else(|| (p as f64).ln().sqrt().exp());
        let support = rough_set(m_cutoff, y_eff);
        Ok(MollifierSpec {
            p,
            m_cutoff,
            support,
            parity,
            y: Some(y_eff),
        })
    }

    /// Custom support; elements must stay within [1, floor(sqrt(p))].
    pub fn with_support(p: u64, elements: Vec<u64>, parity: Parity) -> Result<MollifierSpec> {
        if !crate::primes::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let m_cutoff = isqrt(p);
        let support = IntegerSet::custom(m_cutoff, elements)?;
        Ok(MollifierSpec {
            p,
            m_cutoff,
            support,
            parity,
            y: None,
        })
    }

    pub fn check_group(&self, group: &CharacterGroup) -> Result<()> {
        if self.p != group.p() {
            return Err(Error::GroupMismatch {
                spec_p: self.p,
                group_p: group.p(),
            });
        }
        Ok(())
    }
}

/// M(chi_j) for every character, by a forward transform of the support
/// indicator over discrete-log coordinates.
pub fn mollifier_values(group: &CharacterGroup, spec: &MollifierSpec) -> Result<Vec<Complex64>> {
    spec.check_group(group)?;
    let order = group.order() as usize;
    let mut coeff = vec![Complex64::new(0.0, 0.0); order];
    for &m in spec.support.elements() {
        let k = group
            .dlog(m)
            .expect("support elements are below sqrt(p) < p");
        coeff[k as usize] += Complex64::new(1.0, 0.0);
    }
    // M(chi_j) = sum_k c(g^k) omega^{-jk}
    let plan = CztPlan::new(order, TransformSign::Negative);
    Ok(plan.transform(&coeff))
}

/// First mollified moment M1 = sum over chi of M(chi) theta(x, chi), one
/// parity class. The direct route returns the real part; the imaginary part
/// cancels by chi <-> conj(chi) pairing and is checked by the test suite.
pub fn moment_m1(
    group: &CharacterGroup,
    spec: &MollifierSpec,
    x: f64,
    method: Method,
) -> Result<f64> {
    match method {
        Method::Direct => Ok(moment_m1_complex(group, spec, x)?.re),
        Method::Closed => moment_m1_closed(group, spec, x),
    }
}

pub fn moment_m1_complex(
    group: &CharacterGroup,
    spec: &MollifierSpec,
    x: f64,
) -> Result<Complex64> {
    spec.check_group(group)?;
    let thetas = theta::theta_all(group, x, spec.parity)?;
    let mols = mollifier_values(group, spec)?;
    let mut acc = KahanComplex::new();
    for tv in &thetas {
        acc.add(mols[tv.j.0 as usize] * tv.value);
    }
    Ok(acc.value())
}

/// Orthogonality image of M1: (p-1)/2 * sum over m in A of the full
/// congruence series sum over n = +-m (mod p) of w(n) e^{-pi n^2 x / p},
/// signed for odd parity. Truncated at the theta truncation point.
fn moment_m1_closed(group: &CharacterGroup, spec: &MollifierSpec, x: f64) -> Result<f64> {
    spec.check_group(group)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::NonPositiveX(x));
    }
    let p = group.p();
    let c = PI * x / p as f64;
    let n0 = theta::truncation(p, x, spec.parity).n0;
    let odd = spec.parity == Parity::Odd;
    let mut acc = KahanSum::new();
    for &m in spec.support.elements() {
        // n = m, m + p, m + 2p, ... carries +; n = p - m, 2p - m, ... carries
        // the parity sign
        let mut n = m;
        while n <= n0 {
            let nf = n as f64;
            let w = if odd { nf } else { 1.0 };
            acc.add(w * (-c * nf * nf).exp());
            n += p;
        }
        let neg_sign = if odd { -1.0 } else { 1.0 };
        let mut n = p - m;
        while n <= n0 {
            let nf = n as f64;
            let w = if odd { nf } else { 1.0 };
            acc.add(neg_sign * w * (-c * nf * nf).exp());
            n += p;
        }
    }
    Ok(group.half_order() as f64 * acc.value())
}

/// Second mollified moment M2 = sum over chi of |M(chi) theta(x, chi)|^2.
pub fn moment_m2(
    group: &CharacterGroup,
    spec: &MollifierSpec,
    x: f64,
    method: Method,
) -> Result<f64> {
    spec.check_group(group)?;
    match method {
        Method::Direct => {
            let thetas = theta::theta_all(group, x, spec.parity)?;
            let mols = mollifier_values(group, spec)?;
            let mut acc = KahanSum::new();
            for tv in &thetas {
                acc.add((mols[tv.j.0 as usize] * tv.value).norm_sqr());
            }
            Ok(acc.value())
        }
        Method::Closed => moment_m2_closed(group, spec, x),
    }
}

/// Orthogonality image of M2: (p-1)/2 * sum over (m1, m2) in A^2 and over
/// n1, n2 >= 1 coprime to p with m1 n1 = +-m2 n2 (mod p) of
/// w(n1) w(n2) e^{-pi (n1^2 + n2^2) x / p}, the minus branch signed for odd
/// parity.
fn moment_m2_closed(group: &CharacterGroup, spec: &MollifierSpec, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::NonPositiveX(x));
    }
    let p = group.p();
    let c = PI * x / p as f64;
    let n0 = theta::truncation(p, x, spec.parity).n0;
    let odd = spec.parity == Parity::Odd;
    let elems = spec.support.elements();

    let pair_sums: Vec<f64> = elems
        .par_iter()
        .map(|&m1| {
            let mut acc = KahanSum::new();
            for &m2 in elems {
                let inv_m2 = inv_mod_prime(m2, p);
                let factor = m1 % p * inv_m2 % p;
                for n1 in 1..=n0 {
                    if n1 % p == 0 {
                        continue;
                    }
                    let n1f = n1 as f64;
                    let w1 = if odd { n1f } else { 1.0 };
                    let e1 = (-c * n1f * n1f).exp();
                    // n2 = +factor n1 (mod p) carries +, n2 = -factor n1 the
                    // parity sign; both residues are nonzero here
                    let r_plus = factor * (n1 % p) % p;
                    let r_minus = p - r_plus;
                    for (r, sign) in [(r_plus, 1.0), (r_minus, if odd { -1.0 } else { 1.0 })] {
                        let mut n2 = r;
                        while n2 <= n0 {
                            if n2 > 0 {
                                let n2f = n2 as f64;
                                let w2 = if odd { n2f } else { 1.0 };
                                acc.add(sign * w1 * w2 * e1 * (-c * n2f * n2f).exp());
                            }
                            n2 += p;
                        }
                    }
                }
            }
            acc.value()
        })
        .collect();

    let mut total = KahanSum::new();
    for s in pair_sums {
        total.add(s);
    }
    Ok(group.half_order() as f64 * total.value())
}

/// Plain moment S_2k = sum over chi of |theta(x, chi)|^(2k); k = 0 returns
/// the character count (p-1)/2.
pub fn plain_moment(group: &CharacterGroup, x: f64, k: u32, parity: Parity) -> Result<f64> {
    if k == 0 {
        return Ok(group.half_order() as f64);
    }
    let thetas = theta::theta_all(group, x, parity)?;
    let mut acc = KahanSum::new();
    for tv in &thetas {
        acc.add(tv.value.norm_sqr().powi(k as i32));
    }
    Ok(acc.value())
}

/// Census plus moments for one (p, x, parity).
///
/// Field names are part of the serialization schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentReport {
    pub schema: u32,
    pub p: u64,
    pub x: f64,
    pub parity: Parity,
    pub m1: f64,
    pub m2: f64,
    /// k -> S_2k over the parity class.
    pub s2k: BTreeMap<u32, f64>,
    pub nonvanishing: u64,
    pub undecided: u64,
    pub cs_lower_bound: f64,
    /// Relative dual-route residuals [m1, m2] when the closed forms ran.
    pub closed_form_residuals: Option<[f64; 2]>,
    /// Highest ladder rung that had to run.
    pub max_precision_bits: u32,
}

/// Count provably nonzero theta values over one parity class, escalating
/// undecided characters through the precision ladder.
///
/// Without a mollifier spec the moments use M(chi) = 1 (support {1}), which
/// is the unmollified Cauchy-Schwarz bound; with a spec the closed-form
/// routes also run and their relative residuals are reported.
pub fn nonvanishing_census(
    group: &CharacterGroup,
    x: f64,
    parity: Parity,
    spec: Option<&MollifierSpec>,
    ladder: &[u32],
) -> Result<MomentReport> {
    let thetas = theta::theta_all(group, x, parity)?;
    let default_spec;
    let spec_ref = match spec {
        Some(s) => {
            s.check_group(group)?;
            s
        }
        None => {
            default_spec = MollifierSpec::with_support(group.p(), vec![1], parity)?;
            &default_spec
        }
    };

    let mut nonvanishing = 0u64;
    let mut undecided = 0u64;
    let mut max_bits = 53u32;
    for tv in &thetas {
        match theta::is_nonzero(tv) {
            Decision::Nonzero => nonvanishing += 1,
            Decision::Undecided => {
                let (decision, bits, _) = decide_with_ladder(group, tv.j, x, parity, ladder)?;
                max_bits = max_bits.max(bits);
                match decision {
                    Decision::Nonzero => nonvanishing += 1,
                    Decision::Undecided => undecided += 1,
                }
            }
        }
    }

    let mols = mollifier_values(group, spec_ref)?;
    let mut m1_acc = KahanComplex::new();
    let mut m2_acc = KahanSum::new();
    for tv in &thetas {
        let mt = mols[tv.j.0 as usize] * tv.value;
        m1_acc.add(mt);
        m2_acc.add(mt.norm_sqr());
    }
    let m1 = m1_acc.value().re;
    let m2 = m2_acc.value();

    let mut s2k = BTreeMap::new();
    for k in [1u32, 2] {
        let mut acc = KahanSum::new();
        for tv in &thetas {
            acc.add(tv.value.norm_sqr().powi(k as i32));
        }
        s2k.insert(k, acc.value());
    }

    let closed_form_residuals = if spec.is_some() {
        let m1_closed = moment_m1(group, spec_ref, x, Method::Closed)?;
        let m2_closed = moment_m2(group, spec_ref, x, Method::Closed)?;
        Some([
            crate::util::rel_diff(m1, m1_closed),
            crate::util::rel_diff(m2, m2_closed),
        ])
    } else {
        None
    };

    let cs_lower_bound = if m2 > 0.0 { m1 * m1 / m2 } else { 0.0 };
    let report = MomentReport {
        schema: REPORT_SCHEMA,
        p: group.p(),
        x,
        parity,
        m1,
        m2,
        s2k,
        nonvanishing,
        undecided,
        cs_lower_bound,
        closed_form_residuals,
        max_precision_bits: max_bits,
    };
    debug_assert!(cauchy_schwarz_slack(&report, &thetas, &mols) >= 0.0);
    Ok(report)
}

/// (count + undecided) * M2 - M1^2 plus the error allowance the radii permit;
/// nonnegative for every census.
pub fn cauchy_schwarz_slack(
    report: &MomentReport,
    thetas: &[theta::ThetaValue],
    mols: &[Complex64],
) -> f64 {
    let mut m1_err = 0.0;
    let mut m2_err = 0.0;
    for tv in thetas {
        let mabs = mols[tv.j.0 as usize].norm();
        m1_err += mabs * tv.error_radius;
        m2_err += 2.0 * mabs * mabs * tv.value.norm() * tv.error_radius
            + (mabs * tv.error_radius).powi(2);
    }
    let count = (report.nonvanishing + report.undecided) as f64;
    let allowance = 2.0 * report.m1.abs() * m1_err + m1_err * m1_err + count * m2_err;
    count * report.m2 - report.m1 * report.m1 + allowance
}

/// One prime's row in the census trend scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CensusScanRow {
    pub p: u64,
    pub count: u64,
    pub undecided: u64,
    pub cs_lower_bound: f64,
    /// p / sqrt(log p), the scale of the expected lower bound.
    pub scale: f64,
    /// count * sqrt(log p) / p, bounded below across the scan.
    pub normalized: f64,
}

/// Census across a list of primes with the default rough mollifier.
pub fn census_scan(
    primes: &[u64],
    x: f64,
    parity: Parity,
    y: Option<f64>,
    ladder: &[u32],
) -> Result<Vec<CensusScanRow>> {
    primes
        .par_iter()
        .map(|&p| {
            let group = CharacterGroup::build(p)?;
            let spec = MollifierSpec::build(p, y, parity)?;
            let report = nonvanishing_census(&group, x, parity, Some(&spec), ladder)?;
            let logp = (p as f64).ln();
            Ok(CensusScanRow {
                p,
                count: report.nonvanishing,
                undecided: report.undecided,
                cs_lower_bound: report.cs_lower_bound,
                scale: p as f64 / logp.sqrt(),
                normalized: report.nonvanishing as f64 * logp.sqrt() / p as f64,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CancellationRow {
    pub n: u64,
    /// (1/(p-1)) sum over all characters of |sum_{k<=n} chi(k)|.
    pub mean_abs: f64,
    pub ratio_to_sqrt_n: f64,
}

/// Average absolute partial character sum over all p-1 characters, for a
/// grid of cutoffs; the measured side of the square-root cancellation bound.
pub fn first_moment_cancellation(
    group: &CharacterGroup,
    n_grid: &[u64],
) -> Result<Vec<CancellationRow>> {
    let p = group.p();
    let order = group.order() as usize;
    let plan = CztPlan::new(order, TransformSign::Positive);
    n_grid
        .iter()
        .map(|&n| {
            if n > p {
                return Err(Error::InvalidArgument(format!("N = {n} exceeds p = {p}")));
            }
            let mut counts = vec![Complex64::new(0.0, 0.0); order];
            for k in 1..=n {
                if let Some(d) = group.dlog(k) {
                    counts[d as usize] += Complex64::new(1.0, 0.0);
                }
            }
            let spectrum = plan.transform(&counts);
            let mut acc = KahanSum::new();
            for v in &spectrum {
                acc.add(v.norm());
            }
            let mean_abs = acc.value() / order as f64;
            Ok(CancellationRow {
                n,
                mean_abs,
                ratio_to_sqrt_n: mean_abs / (n as f64).sqrt(),
            })
        })
        .collect()
}
