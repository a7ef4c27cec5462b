//! Software high-precision theta evaluation, the escalation path for values
//! the f64 engine leaves undecided.
//!
//! The ladder walks mantissa widths (default 53 -> 128 -> 256 bits) until
//! |theta| exceeds the radius claimed at that width. Entries that stay
//! undecided at the top rung are reported, never dropped.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use std::f64::consts::PI;

use crate::char_group::{CharIndex, CharacterGroup, Parity};
use crate::error::{Error, Result};
use crate::theta::{self, Decision};

/// Default precision ladder in mantissa bits. The first rung is the plain
/// f64 engine.
pub const DEFAULT_LADDER: &[u32] = &[53, 128, 256];

const RM: RoundingMode = RoundingMode::None;

/// Theta value evaluated with `prec_bits` of mantissa.
#[derive(Debug, Clone)]
pub struct PreciseTheta {
    pub re: f64,
    pub im: f64,
    pub norm: f64,
    pub error_radius: f64,
    pub prec_bits: u32,
    pub truncation_n: u64,
}

impl PreciseTheta {
    pub fn decision(&self) -> Decision {
        if self.norm > self.error_radius {
            Decision::Nonzero
        } else {
            Decision::Undecided
        }
    }
}

fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if x.is_nan() {
        return f64::NAN;
    }
    let sign = match x.sign() {
        Some(Sign::Neg) => -1.0,
        _ => 1.0,
    };
    let exp = x.exponent().unwrap_or(0);
    let words = x.mantissa_digits().unwrap_or(&[]);
    // mantissa words are little-endian with the top bit of the last word set
    let mut frac = 0.0f64;
    for (i, w) in words.iter().rev().take(2).enumerate() {
        frac += (*w as f64) * (2.0f64).powi(-64 * (i as i32 + 1));
    }
    sign * frac * (2.0f64).powi(exp)
}

/// Evaluate theta(x, chi_j) with the requested mantissa width.
///
/// Gaussian factors are produced by the two-multiplication recurrence
/// f(n+1) = f(n) * s(n), s(n+1) = s(n) * q^2 with q = exp(-pi x / p), so only
/// one transcendental call is made for the exponentials. Character values use
/// sin/cos of reduced angles, cached per distinct root-of-unity index.
pub fn theta_precise(
    group: &CharacterGroup,
    j: CharIndex,
    x: f64,
    parity: Parity,
    prec_bits: u32,
) -> Result<PreciseTheta> {
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
    if !(2..=900).contains(&prec_bits) {
        return Err(Error::HighPrecision(format!(
            "precision {prec_bits} bits outside the supported 2..=900 range"
        )));
    }
    let p = group.p();
    let order = group.order();
    let wp = prec_bits as usize + 32;
    let mut cc = Consts::new().map_err(|e| Error::HighPrecision(format!("{e:?}")))?;

    // Truncation: tail below max_term * 2^-(prec_bits + 10).
    let c = PI * x / p as f64;
    let ln_threshold = match parity {
        Parity::Even => -c,
        Parity::Odd => {
            let peak = (1.0 / (2.0 * c)).sqrt().max(1.0);
            peak.ln() - c * peak * peak
        }
    } - (prec_bits as f64 + 10.0) * std::f64::consts::LN_2;
    let n0 = theta::choose_n0(c, parity, ln_threshold);

    let pi_big = cc.pi(wp, RM);
    let x_big = BigFloat::from_f64(x, wp);
    let p_big = BigFloat::from_f64(p as f64, wp);
    let c_big = pi_big.mul(&x_big, wp, RM).div(&p_big, wp, RM);
    let q1 = c_big.neg().exp(wp, RM, &mut cc); // exp(-c)
    let q2 = q1.mul(&q1, wp, RM);

    // f = exp(-c n^2), s = exp(-c (2n + 1))
    let mut f = q1.clone();
    let mut s = q1.mul(&q2, wp, RM);

    let two_pi = pi_big.mul(&BigFloat::from_f64(2.0, wp), wp, RM);
    let order_big = BigFloat::from_f64(order as f64, wp);
    let mut root_cache: std::collections::HashMap<u64, (BigFloat, BigFloat)> =
        std::collections::HashMap::new();

    let mut re = BigFloat::from_f64(0.0, wp);
    let mut im = BigFloat::from_f64(0.0, wp);
    let mut abs_sum = 0.0f64;
    for n in 1..=n0 {
        if let Some(k) = group.dlog(n) {
            let idx = (j.0 % order) * k % order;
            let (cos_v, sin_v) = root_cache
                .entry(idx)
                .or_insert_with(|| {
                    let angle = two_pi
                        .mul(&BigFloat::from_f64(idx as f64, wp), wp, RM)
                        .div(&order_big, wp, RM);
                    (angle.cos(wp, RM, &mut cc), angle.sin(wp, RM, &mut cc))
                })
                .clone();
            let term = if parity == Parity::Odd {
                f.mul(&BigFloat::from_f64(n as f64, wp), wp, RM)
            } else {
                f.clone()
            };
            re = re.add(&term.mul(&cos_v, wp, RM), wp, RM);
            im = im.add(&term.mul(&sin_v, wp, RM), wp, RM);
            abs_sum += to_f64(&term).abs();
        }
        f = f.mul(&s, wp, RM);
        s = s.mul(&q2, wp, RM);
    }

    let tail = theta::ln_tail_bound(c, n0, parity).exp();
    let rounding = 8.0 * n0 as f64 * (2.0f64).powi(-(wp as i32)) * abs_sum;
    let re_f = to_f64(&re);
    let im_f = to_f64(&im);
    Ok(PreciseTheta {
        re: re_f,
        im: im_f,
        norm: re_f.hypot(im_f),
        error_radius: tail + rounding,
        prec_bits,
        truncation_n: n0,
    })
}

/// Walk the ladder until a rung proves theta nonzero.
///
/// Returns the decision, the deciding precision, and the last high-precision
/// value when any rung beyond f64 ran.
pub fn decide_with_ladder(
    group: &CharacterGroup,
    j: CharIndex,
    x: f64,
    parity: Parity,
    ladder: &[u32],
) -> Result<(Decision, u32, Option<PreciseTheta>)> {
    let mut last = None;
    for (i, &bits) in ladder.iter().enumerate() {
        if i == 0 && bits <= 53 {
            let tv = theta::theta_direct(group, j, x, parity)?;
            if theta::is_nonzero(&tv) == Decision::Nonzero {
                return Ok((Decision::Nonzero, bits, None));
            }
            continue;
        }
        let pt = theta_precise(group, j, x, parity, bits)?;
        let decision = pt.decision();
        last = Some(pt);
        if decision == Decision::Nonzero {
            return Ok((Decision::Nonzero, bits, last));
        }
    }
    Ok((Decision::Undecided, *ladder.last().unwrap_or(&53), last))
}
