//! Theta functions of Dirichlet characters with rigorous error radii.
//!
//! For even chi: theta(x, chi) = sum_{n>=1} chi(n) exp(-pi n^2 x / p).
//! For odd chi the summand carries an extra factor n. Every value comes with
//! an `error_radius` covering series truncation plus floating-point rounding,
//! so "nonzero" claims are decidable: |value| > error_radius proves the true
//! value is nonzero, anything else stays undecided.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::char_group::{CharIndex, CharacterGroup, Parity};
use crate::dft::{CztPlan, TransformSign};
use crate::error::{Error, Result};
use crate::summation::{KahanComplex, KahanSum};

/// Multiplier on machine epsilon covering per-term evaluation and compensated
/// accumulation error in the direct path.
const DIRECT_ROUNDING_EPS_FACTOR: f64 = 12.0;

/// Truncation threshold: the geometric tail bound must fall below this factor
/// times the largest summand.
const TAIL_REL_EPS: f64 = 1e-18;

/// One theta value with its accounting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThetaValue {
    pub value: Complex64,
    /// Bound on |true - computed|: geometric tail bound plus rounding.
    pub error_radius: f64,
    /// Last summed index N0.
    pub truncation_n: u64,
    pub x: f64,
    pub j: CharIndex,
    pub parity: Parity,
}

/// W_chi = theta(1, chi) / conj(theta(1, chi)), defined only when theta(1, chi)
/// is provably nonzero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootNumber {
    pub w: Complex64,
    pub j: CharIndex,
    pub defined: bool,
    /// Bound on |true W - computed w| when defined.
    pub error_radius: f64,
}

/// Outcome of a zero test against the error radius. "Zero" is never claimed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Nonzero,
    Undecided,
}

pub fn is_nonzero(tv: &ThetaValue) -> Decision {
    if tv.value.norm() > tv.error_radius {
        Decision::Nonzero
    } else {
        Decision::Undecided
    }
}

/// Functional-equation check result.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum FeOutcome {
    /// residual = |theta(x,chi) - W/x^e * theta(1/x, conj chi)|, with the
    /// tolerance the combined error radii allow.
    Checked { residual: f64, tolerance: f64 },
    /// Root number numerically indistinguishable from 0/0.
    Undecided,
}

pub(crate) struct Truncation {
    pub n0: u64,
    pub tail_bound: f64,
}

/// ln of the dominating geometric tail quantity after n0 terms.
///
/// With q = exp(-c(2 n0 + 1)):
/// even tail <= exp(-c n0^2) / (1 - q);
/// odd tail  <= exp(-c n0^2) * (n0 q / (1 - q) + q / (1 - q)^2).
pub(crate) fn ln_tail_bound(c: f64, n0: u64, parity: Parity) -> f64 {
    let n0f = n0 as f64;
    let ln_q = -c * (2.0 * n0f + 1.0);
    let q = ln_q.exp();
    let ln_one_minus_q = (-q).ln_1p();
    match parity {
        Parity::Even => -c * n0f * n0f - ln_one_minus_q,
        Parity::Odd => {
            // exp(-c n0^2) * q * (n0 (1 - q) + 1) / (1 - q)^2
            -c * n0f * n0f + ln_q + (n0f * (1.0 - q) + 1.0).ln() - 2.0 * ln_one_minus_q
        }
    }
}

fn ln_max_term(c: f64, parity: Parity) -> f64 {
    match parity {
        Parity::Even => -c,
        Parity::Odd => {
            let peak = (1.0 / (2.0 * c)).sqrt();
            let mut best = -c; // n = 1
            for n in [peak.floor(), peak.ceil()] {
                if n >= 1.0 {
                    best = best.max(n.ln() - c * n * n);
                }
            }
            best
        }
    }
}

/// Smallest n0 whose tail bound drops below exp(ln_threshold).
pub(crate) fn choose_n0(c: f64, parity: Parity, ln_threshold: f64) -> u64 {
    let mut hi = 1u64;
    while ln_tail_bound(c, hi, parity) > ln_threshold {
        hi *= 2;
        assert!(hi < 1 << 40, "truncation point diverged (c = {c})");
    }
    let mut lo = hi / 2;
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if ln_tail_bound(c, mid, parity) > ln_threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

pub(crate) fn truncation(p: u64, x: f64, parity: Parity) -> Truncation {
    let c = PI * x / p as f64;
    let ln_max = ln_max_term(c, parity);
    let n0 = choose_n0(c, parity, ln_max + TAIL_REL_EPS.ln());
    Truncation {
        n0,
        tail_bound: ln_tail_bound(c, n0, parity).exp(),
    }
}

fn check_args(group: &CharacterGroup, j: CharIndex, x: f64, parity: Parity) -> Result<()> {
    group.check_index(j)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::NonPositiveX(x));
    }
    if j.parity() != parity {
        return Err(Error::ParityMismatch {
            j: j.0,
            j_parity: j.parity().as_str(),
            requested: parity.as_str(),
        });
    }
    Ok(())
}

/// Truncated series evaluation of theta(x, chi_j), one character at a time.
pub fn theta_direct(
    group: &CharacterGroup,
    j: CharIndex,
    x: f64,
    parity: Parity,
) -> Result<ThetaValue> {
    check_args(group, j, x, parity)?;
    let p = group.p();
    let c = PI * x / p as f64;
    let tr = truncation(p, x, parity);
    let mut acc = KahanComplex::new();
    let mut abs = KahanSum::new();
    for n in 1..=tr.n0 {
        let Some(k) = group.dlog(n) else { continue };
        let nf = n as f64;
        let mut term = (-c * nf * nf).exp();
        if parity == Parity::Odd {
            term *= nf;
        }
        acc.add(group.root_power(j.0 * k) * term);
        abs.add(term);
    }
    let rounding = DIRECT_ROUNDING_EPS_FACTOR * f64::EPSILON * abs.value();
    Ok(ThetaValue {
        value: acc.value(),
        error_radius: tr.tail_bound + rounding,
        truncation_n: tr.n0,
        x,
        j,
        parity,
    })
}

/// Theta for every character of one parity at once.
///
/// Summands are accumulated per residue class r mod p, W(r) = sum over
/// n = r (p) of the weighted Gaussian term; theta(x, chi_j) is then the
/// length-(p-1) transform sum_k W(g^k) omega^{jk} with omega = exp(2 pi i/(p-1)),
/// evaluated by the chirp-z plan. Output order follows ascending j of the
/// requested parity.
pub fn theta_all(group: &CharacterGroup, x: f64, parity: Parity) -> Result<Vec<ThetaValue>> {
    let probe = match parity {
        Parity::Even => CharIndex(0),
        Parity::Odd => CharIndex(1),
    };
    check_args(group, probe, x, parity)?;
    let p = group.p();
    let order = group.order();
    let c = PI * x / p as f64;
    let tr = truncation(p, x, parity);

    let mut residue_sums = vec![0.0f64; p as usize];
    let mut abs = KahanSum::new();
    for n in 1..=tr.n0 {
        let r = (n % p) as usize;
        if r == 0 {
            continue;
        }
        let nf = n as f64;
        let mut term = (-c * nf * nf).exp();
        if parity == Parity::Odd {
            term *= nf;
        }
        residue_sums[r] += term;
        abs.add(term);
    }

    let mut v = vec![Complex64::new(0.0, 0.0); order as usize];
    for r in 1..p {
        let k = group.dlog(r).expect("r in [1, p-1]");
        v[k as usize] = Complex64::new(residue_sums[r as usize], 0.0);
    }
    let plan = CztPlan::new(order as usize, TransformSign::Positive);
    let spectrum = plan.transform(&v);

    let fft_len = (2 * order as usize - 1).next_power_of_two().max(2);
    let dft_eps_factor = 4.0 * (fft_len as f64).log2() + 20.0;
    let error_radius = tr.tail_bound + dft_eps_factor * f64::EPSILON * abs.value();

    Ok(group
        .indices_of_parity(parity)
        .into_iter()
        .map(|j| ThetaValue {
            value: spectrum[j.0 as usize],
            error_radius,
            truncation_n: tr.n0,
            x,
            j,
            parity,
        })
        .collect())
}

/// Root number from theta at the central point x = 1. Rejected for j = 0.
pub fn root_number(group: &CharacterGroup, j: CharIndex) -> Result<RootNumber> {
    if j.0 == 0 {
        return Err(Error::PrincipalCharacter);
    }
    let t = theta_direct(group, j, 1.0, j.parity())?;
    let norm = t.value.norm();
    if norm <= t.error_radius {
        return Ok(RootNumber {
            w: Complex64::new(0.0, 0.0),
            j,
            defined: false,
            error_radius: f64::INFINITY,
        });
    }
    // w = t / conj(t); first-order error |dw| <= 2 |dt| / |t|.
    let w = t.value / t.value.conj();
    let error_radius = 2.0 * t.error_radius / (norm - t.error_radius);
    Ok(RootNumber {
        w,
        j,
        defined: true,
        error_radius,
    })
}

/// Residual of theta(x, chi) = W/x^e * theta(1/x, conj chi) with e = 1/2 for
/// even chi and e = 3/2 for odd chi.
pub fn functional_equation_residual(
    group: &CharacterGroup,
    j: CharIndex,
    x: f64,
) -> Result<FeOutcome> {
    if j.0 == 0 {
        return Err(Error::PrincipalCharacter);
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::NonPositiveX(x));
    }
    let parity = j.parity();
    let rn = root_number(group, j)?;
    if !rn.defined {
        return Ok(FeOutcome::Undecided);
    }
    let j_conj = CharIndex((group.order() - j.0) % group.order());
    let lhs = theta_direct(group, j, x, parity)?;
    let rhs_theta = theta_direct(group, j_conj, 1.0 / x, parity)?;
    let exponent = match parity {
        Parity::Even => 0.5,
        Parity::Odd => 1.5,
    };
    let scale = x.powf(exponent);
    let rhs = rn.w * rhs_theta.value / scale;
    let residual = (lhs.value - rhs).norm();
    let tolerance = lhs.error_radius
        + (rhs_theta.error_radius
            + rn.error_radius * (rhs_theta.value.norm() + rhs_theta.error_radius))
            / scale
        + 8.0 * f64::EPSILON * (lhs.value.norm() + rhs.norm());
    Ok(FeOutcome::Checked {
        residual,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: plain truncated series straight from the definition.
    fn theta_oracle(p: u64, j: u64, x: f64, n_terms: u64) -> Complex64 {
        let grp = CharacterGroup::build(p).unwrap();
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 1..=n_terms {
            let chi = grp.character_value(CharIndex(j), n);
            let nf = n as f64;
            let weight = if j % 2 == 0 { 1.0 } else { nf };
            acc += chi * weight * (-PI * nf * nf * x / p as f64).exp();
        }
        acc
    }

    #[test]
    fn p5_fixtures() {
        // Frozen from the truncated-series oracle below (40 terms).
        let grp = CharacterGroup::build(5).unwrap();
        let t0 = theta_direct(&grp, CharIndex(0), 1.0, Parity::Even).unwrap();
        assert!((t0.value.re - 0.6180341750).abs() < 1e-9);
        assert!((t0.value - theta_oracle(5, 0, 1.0, 40)).norm() < 1e-12);

        let t2 = theta_direct(&grp, CharIndex(2), 1.0, Parity::Even).unwrap();
        assert!((t2.value.re - 0.4490281119).abs() < 1e-9);
        assert!((t2.value - theta_oracle(5, 2, 1.0, 40)).norm() < 1e-12);

        let t1 = theta_direct(&grp, CharIndex(1), 1.0, Parity::Odd).unwrap();
        assert!((t1.value - Complex64::new(0.5333158831, 0.1515038661)).norm() < 1e-9);
        assert!((t1.value - theta_oracle(5, 1, 1.0, 40)).norm() < 1e-12);
    }

    #[test]
    fn argument_checks() {
        let grp = CharacterGroup::build(5).unwrap();
        assert!(matches!(
            theta_direct(&grp, CharIndex(1), 1.0, Parity::Even),
            Err(Error::ParityMismatch { .. })
        ));
        assert!(matches!(
            theta_direct(&grp, CharIndex(0), 0.0, Parity::Even),
            Err(Error::NonPositiveX(_))
        ));
        assert!(matches!(
            theta_direct(&grp, CharIndex(9), 1.0, Parity::Even),
            Err(Error::IndexRange { .. })
        ));
    }

    #[test]
    fn batch_matches_direct() {
        for p in [3u64, 5, 13, 101, 499] {
            let grp = CharacterGroup::build(p).unwrap();
            for x in [0.5, 1.0, 2.0] {
                for parity in [Parity::Even, Parity::Odd] {
                    let batch = theta_all(&grp, x, parity).unwrap();
                    assert_eq!(batch.len(), ((p - 1) / 2) as usize);
                    for tv in &batch {
                        let direct = theta_direct(&grp, tv.j, x, parity).unwrap();
                        let diff = (tv.value - direct.value).norm();
                        assert!(
                            diff <= tv.error_radius + direct.error_radius,
                            "p={p} x={x} j={} diff={diff:e} radii={:e}",
                            tv.j.0,
                            tv.error_radius + direct.error_radius
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn p13_batch_equivalence_tight() {
        let grp = CharacterGroup::build(13).unwrap();
        let batch = theta_all(&grp, 1.0, Parity::Even).unwrap();
        assert_eq!(batch.len(), 6);
        for tv in &batch {
            let direct = theta_direct(&grp, tv.j, 1.0, Parity::Even).unwrap();
            assert!((tv.value - direct.value).norm() < 1e-12);
        }
    }

    #[test]
    fn p5_even_batch_values() {
        let grp = CharacterGroup::build(5).unwrap();
        let batch = theta_all(&grp, 1.0, Parity::Even).unwrap();
        assert!((batch[0].value.re - 0.6180341750).abs() < 1e-9);
        assert!((batch[1].value.re - 0.4490281119).abs() < 1e-9);
    }

    #[test]
    fn conjugation_symmetry() {
        // chi_{p-1-j} is the conjugate character; real summands force
        // theta(x, conj chi) = conj theta(x, chi).
        for p in [7u64, 29, 101] {
            let grp = CharacterGroup::build(p).unwrap();
            for j in 1..p - 1 {
                let jc = (p - 1 - j) % (p - 1);
                let parity = Parity::of_index(j);
                let a = theta_direct(&grp, CharIndex(j), 1.0, parity).unwrap();
                let b = theta_direct(&grp, CharIndex(jc), 1.0, parity).unwrap();
                assert!((a.value - b.value.conj()).norm() < 1e-12, "p={p} j={j}");
            }
        }
    }

    #[test]
    fn odd_pair_conjugates_p5() {
        let grp = CharacterGroup::build(5).unwrap();
        let batch = theta_all(&grp, 1.0, Parity::Odd).unwrap();
        assert_eq!((batch[0].j.0, batch[1].j.0), (1, 3));
        assert!((batch[0].value - batch[1].value.conj()).norm() < 1e-12);
    }

    #[test]
    fn tail_bound_sound_under_doubling() {
        for p in [5u64, 101, 997] {
            let grp = CharacterGroup::build(p).unwrap();
            for x in [0.5, 1.0, 2.0] {
                for (j, parity) in [(2u64, Parity::Even), (1, Parity::Odd)] {
                    let tv = theta_direct(&grp, CharIndex(j), x, parity).unwrap();
                    let refined = theta_oracle(p, j, x, 2 * tv.truncation_n);
                    assert!(
                        (tv.value - refined).norm() <= tv.error_radius,
                        "p={p} x={x} j={j}"
                    );
                }
            }
        }
    }

    #[test]
    fn tail_bound_formula_dominates() {
        // error_radius must dominate exp(-c n0^2) / (1 - exp(-c (2 n0 + 1)))
        for p in [5u64, 499] {
            let grp = CharacterGroup::build(p).unwrap();
            for x in [0.5, 1.0, 2.0] {
                let tv = theta_direct(&grp, CharIndex(2), x, Parity::Even).unwrap();
                let c = PI * x / p as f64;
                let n0 = tv.truncation_n as f64;
                let q = (-c * (2.0 * n0 + 1.0)).exp();
                let bound = (-c * n0 * n0).exp() / (1.0 - q);
                assert!(tv.error_radius >= bound);
            }
        }
    }

    #[test]
    fn root_number_unimodular() {
        let grp = CharacterGroup::build(5).unwrap();
        let rn = root_number(&grp, CharIndex(2)).unwrap();
        assert!(rn.defined);
        // theta(1, chi_2) is real positive, so w = 1.
        assert!((rn.w - Complex64::new(1.0, 0.0)).norm() < 1e-10);

        let g7 = CharacterGroup::build(7).unwrap();
        for j in 1..6 {
            let rn = root_number(&g7, CharIndex(j)).unwrap();
            assert!(rn.defined);
            assert!((rn.w.norm() - 1.0).abs() < 1e-10, "j={j}");
        }
        assert!(matches!(
            root_number(&grp, CharIndex(0)),
            Err(Error::PrincipalCharacter)
        ));
    }

    #[test]
    fn functional_equation_even() {
        let grp = CharacterGroup::build(5).unwrap();
        match functional_equation_residual(&grp, CharIndex(2), 2.0).unwrap() {
            FeOutcome::Checked {
                residual,
                tolerance,
            } => {
                assert!(residual < 1e-10, "residual={residual:e}");
                assert!(residual <= tolerance);
            }
            FeOutcome::Undecided => panic!("undecided"),
        }
        // x = 1 is an identity by construction of w.
        match functional_equation_residual(&grp, CharIndex(2), 1.0).unwrap() {
            FeOutcome::Checked { residual, .. } => assert!(residual < 1e-12),
            FeOutcome::Undecided => panic!("undecided"),
        }
    }

    #[test]
    fn functional_equation_odd_exponent_three_halves() {
        let grp = CharacterGroup::build(7).unwrap();
        match functional_equation_residual(&grp, CharIndex(1), 2.0).unwrap() {
            FeOutcome::Checked {
                residual,
                tolerance,
            } => {
                assert!(residual < 1e-10, "residual={residual:e}");
                assert!(residual <= tolerance);
            }
            FeOutcome::Undecided => panic!("undecided"),
        }
        // The same check with exponent 1/2 must fail by a wide margin,
        // pinning the 3/2 choice.
        let j = CharIndex(1);
        let rn = root_number(&grp, j).unwrap();
        let lhs = theta_direct(&grp, j, 2.0, Parity::Odd).unwrap();
        let rhs_theta = theta_direct(&grp, CharIndex(5), 0.5, Parity::Odd).unwrap();
        let wrong = (lhs.value - rn.w * rhs_theta.value / 2.0f64.sqrt()).norm();
        assert!(wrong > 1e-3, "exponent 1/2 should not satisfy the equation");
    }

    #[test]
    fn is_nonzero_decisions() {
        let grp = CharacterGroup::build(5).unwrap();
        let t = theta_direct(&grp, CharIndex(2), 1.0, Parity::Even).unwrap();
        assert_eq!(is_nonzero(&t), Decision::Nonzero);
        let t0 = theta_direct(&grp, CharIndex(0), 1.0, Parity::Even).unwrap();
        assert_eq!(is_nonzero(&t0), Decision::Nonzero);

        let artificial = ThetaValue {
            value: Complex64::new(1e-20, 0.0),
            error_radius: 1e-15,
            truncation_n: 10,
            x: 1.0,
            j: CharIndex(0),
            parity: Parity::Even,
        };
        assert_eq!(is_nonzero(&artificial), Decision::Undecided);
    }
}
