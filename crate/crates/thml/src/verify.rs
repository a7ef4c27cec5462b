//! Cross-module property suite behind `thml verify`.
//!
//! Each check recomputes an invariant against an oracle or closed form and
//! reports the worst case it saw. The acceptance test suite runs the same
//! properties at their full sizes; this is the operational smoke version.

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::char_group::{CharIndex, CharacterGroup, Parity};
use crate::dft::{dft_naive, CztPlan, TransformSign};
use crate::gcd_energy;
use crate::highprec::DEFAULT_LADDER;
use crate::mollifier::{self, Method, MollifierSpec};
use crate::primes::primes_up_to;
use crate::sieve::{self, rough_set, IntegerSet};
use crate::theta::{self, FeOutcome};
use crate::util::{gcd, isqrt, rel_diff};

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name, pass, detail }
}

fn closed_orthogonality(p: u64, m: u64, n: u64, parity: Parity) -> f64 {
    let half = (p - 1) as f64 / 2.0;
    if m % p == 0 || n % p == 0 {
        return 0.0;
    }
    match parity {
        Parity::Even => {
            if m % p == n % p || (m + n) % p == 0 {
                half
            } else {
                0.0
            }
        }
        Parity::Odd => {
            if m % p == n % p {
                half
            } else if (m + n) % p == 0 {
                -half
            } else {
                0.0
            }
        }
    }
}

pub fn run_suite(quick: bool) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let p_cap = if quick { 61 } else { 151 };

    // orthogonality against the closed forms, both parities, all (m, n)
    {
        let mut worst = 0.0f64;
        for p in primes_up_to(p_cap).into_iter().skip(1) {
            let grp = CharacterGroup::build(p).unwrap();
            for m in 1..=p {
                for n in 1..=p {
                    for parity in [Parity::Even, Parity::Odd] {
                        let got = grp.orthogonality_sum_complex(m, n, parity);
                        let want = closed_orthogonality(p, m, n, parity);
                        worst = worst
                            .max((got.re - want).abs() / p as f64)
                            .max(got.im.abs() / p as f64);
                    }
                }
            }
        }
        out.push(check(
            "orthogonality_closed_form",
            worst < 1e-9,
            format!("max |err|/p = {worst:.2e} over p <= {p_cap}"),
        ));
    }

    // parity classification chi_j(p-1) = (-1)^j
    {
        let mut worst = 0.0f64;
        for p in primes_up_to(p_cap).into_iter().skip(1) {
            let grp = CharacterGroup::build(p).unwrap();
            for j in 0..p - 1 {
                let v = grp.character_value(CharIndex(j), p - 1);
                let want = if j % 2 == 0 { 1.0 } else { -1.0 };
                worst = worst.max((v.re - want).abs()).max(v.im.abs());
            }
        }
        out.push(check(
            "parity_classification",
            worst < 1e-12,
            format!("max deviation {worst:.2e}"),
        ));
    }

    // chirp-z against the quadratic DFT
    {
        let mut rng = StdRng::seed_from_u64(101);
        let mut worst = 0.0f64;
        for len in [1usize, 2, 3, 17, 96, 97, 256, 522] {
            let x: Vec<Complex64> = (0..len)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            for sign in [TransformSign::Negative, TransformSign::Positive] {
                let plan = CztPlan::new(len, sign);
                let got = plan.transform(&x);
                let want = dft_naive(&x, sign);
                for (g, w) in got.iter().zip(&want) {
                    worst = worst.max((g - w).norm() / len as f64);
                }
            }
        }
        out.push(check(
            "chirp_z_vs_naive_dft",
            worst < 1e-9,
            format!("max |err|/len = {worst:.2e}"),
        ));
    }

    // theta batch vs direct on random (p, j, x)
    {
        let mut rng = StdRng::seed_from_u64(7);
        let primes: Vec<u64> = primes_up_to(499).into_iter().skip(1).collect();
        let mut worst = 0.0f64;
        let trials = if quick { 12 } else { 50 };
        for _ in 0..trials {
            let p = primes[rng.gen_range(0..primes.len())];
            let grp = CharacterGroup::build(p).unwrap();
            let x = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
            let parity = if rng.gen_bool(0.5) {
                Parity::Even
            } else {
                Parity::Odd
            };
            let batch = theta::theta_all(&grp, x, parity).unwrap();
            let pick = rng.gen_range(0..batch.len());
            let tv = &batch[pick];
            let direct = theta::theta_direct(&grp, tv.j, x, parity).unwrap();
            let allowed = tv.error_radius + direct.error_radius;
            worst = worst.max((tv.value - direct.value).norm() / allowed);
        }
        out.push(check(
            "theta_batch_vs_direct",
            worst <= 1.0,
            format!("max diff/allowance = {worst:.3}"),
        ));
    }

    // claimed f64 radii against 256-bit ground truth
    {
        let mut rng = StdRng::seed_from_u64(13);
        let primes: Vec<u64> = primes_up_to(499).into_iter().skip(1).collect();
        let mut worst = 0.0f64;
        let trials = if quick { 6 } else { 25 };
        for _ in 0..trials {
            let p = primes[rng.gen_range(0..primes.len())];
            let grp = CharacterGroup::build(p).unwrap();
            let x = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
            let j = rng.gen_range(0..p - 1);
            let parity = Parity::of_index(j);
            let coarse = theta::theta_direct(&grp, CharIndex(j), x, parity).unwrap();
            let fine = crate::highprec::theta_precise(&grp, CharIndex(j), x, parity, 256).unwrap();
            let true_err = (coarse.value.re - fine.re).hypot(coarse.value.im - fine.im);
            worst = worst.max(true_err / coarse.error_radius);
        }
        out.push(check(
            "theta_radius_soundness",
            worst <= 1.0,
            format!("max |f64 - 256bit| / claimed radius = {worst:.3}"),
        ));
    }

    // functional equation and |W| = 1
    {
        let primes: Vec<u64> = primes_up_to(if quick { 61 } else { 199 })
            .into_iter()
            .filter(|&p| p >= 5)
            .collect();
        let mut worst_ratio = 0.0f64;
        let mut worst_w = 0.0f64;
        let mut undecided = 0u64;
        for &p in &primes {
            let grp = CharacterGroup::build(p).unwrap();
            for j in 1..p - 1 {
                let rn = theta::root_number(&grp, CharIndex(j)).unwrap();
                if rn.defined {
                    worst_w = worst_w.max((rn.w.norm() - 1.0).abs());
                } else {
                    undecided += 1;
                }
                for x in [0.5, 2.0] {
                    match theta::functional_equation_residual(&grp, CharIndex(j), x).unwrap() {
                        FeOutcome::Checked {
                            residual,
                            tolerance,
                        } => {
                            worst_ratio = worst_ratio.max(residual / tolerance);
                        }
                        FeOutcome::Undecided => undecided += 1,
                    }
                }
            }
        }
        out.push(check(
            "functional_equation",
            worst_ratio <= 1.0 && worst_w <= 1e-8 && undecided == 0,
            format!(
                "max residual/tolerance = {worst_ratio:.3}, max ||W|-1| = {worst_w:.2e}, undecided = {undecided}"
            ),
        ));
    }

    // rough sieve against trial division
    {
        let n = if quick { 1_000 } else { 5_000 };
        let mut ok = true;
        for y in [2.0, 7.0, 19.5, 50.0] {
            let set = rough_set(n, y);
            let oracle: Vec<u64> = (1..=n)
                .filter(|&v| {
                    let m = v;
                    let mut d = 2u64;
                    while d * d <= m {
                        if m % d == 0 {
                            return d as f64 > y;
                        }
                        d += 1;
                    }
                    m == 1 || m as f64 > y
                })
                .collect();
            ok &= set.elements() == oracle.as_slice();
        }
        out.push(check(
            "rough_sieve_vs_trial_division",
            ok,
            format!("N = {n}"),
        ));
    }

    // gcd dichotomy
    {
        let mut violations = 0u64;
        for n_max in [300u64, 500] {
            for y in [2.0, 5.0, 10.0, (n_max as f64).sqrt()] {
                let set = rough_set(n_max, y);
                for (i, &m) in set.elements().iter().enumerate() {
                    for &n in &set.elements()[i..] {
                        if n % m != 0 && gcd(m, n) as f64 >= n_max as f64 / y {
                            violations += 1;
                        }
                    }
                }
            }
        }
        out.push(check(
            "gcd_dichotomy",
            violations == 0,
            format!("{violations} violations"),
        ));
    }

    // GCD-sum fast path vs brute force
    {
        let mut rng = StdRng::seed_from_u64(23);
        let mut worst = 0.0f64;
        for _ in 0..if quick { 10 } else { 40 } {
            let n = rng.gen_range(5..1_500u64);
            let elems: Vec<u64> = (1..=n).filter(|_| rng.gen_bool(0.25)).collect();
            if elems.is_empty() {
                continue;
            }
            let set = IntegerSet::custom(n, elems).unwrap();
            let naive = gcd_energy::gcd_sum_naive(&set).unwrap();
            let fast = gcd_energy::gcd_sum_fast(&set).unwrap();
            worst = worst.max(rel_diff(naive, fast));
        }
        out.push(check(
            "gcd_sum_fast_vs_naive",
            worst < 1e-9,
            format!("max rel diff {worst:.2e}"),
        ));
    }

    // energies vs quadruple brute force
    {
        let mut rng = StdRng::seed_from_u64(29);
        let mut ok = true;
        for _ in 0..if quick { 10 } else { 30 } {
            let n = rng.gen_range(2..35u64);
            let size = rng.gen_range(1..=(n as usize).min(7));
            let mut elems = Vec::new();
            while elems.len() < size {
                let v = rng.gen_range(1..=n);
                if !elems.contains(&v) {
                    elems.push(v);
                }
            }
            elems.sort_unstable();
            let set = IntegerSet::custom(n, elems).unwrap();
            let mut cross = 0u64;
            let mut selfe = 0u64;
            for &a in set.elements() {
                for &c in set.elements() {
                    for b in 1..=n {
                        for d in 1..=n {
                            if a * b == c * d {
                                cross += 1;
                                if set.contains(b) && set.contains(d) {
                                    selfe += 1;
                                }
                            }
                        }
                    }
                }
            }
            ok &= gcd_energy::energy_cross(&set, n).unwrap() == cross;
            ok &= gcd_energy::energy_self(&set).unwrap() == selfe;
        }
        out.push(check(
            "energy_vs_brute_force",
            ok,
            "table == quadruple loop".into(),
        ));
    }

    // quadruple count against the quadruple loop, plus monotonicity
    {
        let mut ok = true;
        let mut prev = 0u64;
        for x in [4u64, 10, 100, 400] {
            let lim = isqrt(x) + 1;
            let mut brute = 0u64;
            for m1 in 1..=lim {
                for n1 in 1..=lim {
                    for m2 in 1..=lim {
                        for n2 in 1..=lim {
                            if m1 * n1 == m2 * n2 && m1 * m1 + n1 * n1 + m2 * m2 + n2 * n2 <= x {
                                brute += 1;
                            }
                        }
                    }
                }
            }
            let got = gcd_energy::quadruple_count(x as f64);
            ok &= got == brute && got >= prev;
            prev = got;
        }
        out.push(check("quadruple_count_vs_brute", ok, "x <= 400".into()));
    }

    // congruence solution counts against brute force
    {
        let mut rng = StdRng::seed_from_u64(31);
        let mut ok = true;
        for &p in &[7u64, 31, 101] {
            for _ in 0..10 {
                let m2 = rng.gen_range(1..p);
                let m1 = rng.gen_range(1..=m2);
                let x = rng.gen_range(0..=p);
                let mut brute = 0u64;
                for n1 in 1..=x {
                    for n2 in 1..=x {
                        let l = m1 * n1 % p;
                        let r = m2 * n2 % p;
                        if l == r || (l + r) % p == 0 {
                            brute += 1;
                        }
                    }
                }
                ok &= gcd_energy::congruence_count(m1, m2, x, p).unwrap() == brute;
            }
        }
        out.push(check(
            "congruence_count_vs_brute",
            ok,
            "O(x) path == O(x^2) loop".into(),
        ));
    }

    // functional chain bounds on set families
    {
        let mut ok = true;
        let mut worst_split = 0.0f64;
        for (n, y) in [(2_000u64, 5.0), (5_000, 13.0)] {
            let set = rough_set(n, y);
            let s = gcd_energy::gcd_sum(&set).unwrap();
            let sigma = gcd_energy::sigma_minus_one_sum(&set);
            let size = set.len() as f64;
            ok &= s >= sigma - 1e-9 && sigma >= size - 1e-9;
            let r = gcd_energy::ratio_r(&set).unwrap();
            ok &= r <= n as f64 * size * (1.0 + 1e-12);
            let e = gcd_energy::energy_cross(&set, n).unwrap();
            ok &= e as f64 >= n as f64 * size;
            // divisor-pair split of the GCD sum, with its recorded constant
            let split = gcd_energy::divisor_pair_sum(&set);
            let envelope = size + (n as f64).ln() + n as f64 / y;
            worst_split = worst_split.max(split / envelope);
            ok &= split <= 4.0 * envelope;
        }
        out.push(check(
            "gcd_sum_chain_bounds",
            ok,
            format!("divisor split constant C = {worst_split:.3}"),
        ));
    }

    // dual-route moments
    {
        let primes: Vec<u64> = if quick {
            vec![13, 61]
        } else {
            vec![13, 61, 199, 499]
        };
        let mut worst = 0.0f64;
        for &p in &primes {
            let grp = CharacterGroup::build(p).unwrap();
            for parity in [Parity::Even, Parity::Odd] {
                for elems in [vec![], vec![1], (1..=isqrt(p)).collect::<Vec<_>>()] {
                    let spec = MollifierSpec::with_support(p, elems, parity).unwrap();
                    let d1 = mollifier::moment_m1(&grp, &spec, 1.0, Method::Direct).unwrap();
                    let c1 = mollifier::moment_m1(&grp, &spec, 1.0, Method::Closed).unwrap();
                    let d2 = mollifier::moment_m2(&grp, &spec, 1.0, Method::Direct).unwrap();
                    let c2 = mollifier::moment_m2(&grp, &spec, 1.0, Method::Closed).unwrap();
                    worst = worst.max(rel_diff(d1, c1)).max(rel_diff(d2, c2));
                }
            }
        }
        out.push(check(
            "dual_route_moments",
            worst < 1e-9,
            format!("max rel residual {worst:.2e}"),
        ));
    }

    // census: Cauchy-Schwarz at the countable level, no undecided entries
    {
        let primes: Vec<u64> = if quick {
            vec![101, 499]
        } else {
            vec![101, 499, 1009]
        };
        let mut ok = true;
        let mut undecided = 0u64;
        for &p in &primes {
            let grp = CharacterGroup::build(p).unwrap();
            for parity in [Parity::Even, Parity::Odd] {
                let spec = MollifierSpec::build(p, None, parity).unwrap();
                let report =
                    mollifier::nonvanishing_census(&grp, 1.0, parity, Some(&spec), DEFAULT_LADDER)
                        .unwrap();
                undecided += report.undecided;
                let lhs = (report.nonvanishing + report.undecided) as f64 * report.m2;
                ok &= lhs >= report.m1 * report.m1 - 1e-9 * report.m1.abs().max(1.0);
                ok &= report.nonvanishing + report.undecided <= grp.half_order();
            }
        }
        out.push(check(
            "census_cauchy_schwarz",
            ok && undecided == 0,
            format!("undecided = {undecided}"),
        ));
    }

    // Brun ratio behaviour at scan scale
    {
        let n = if quick { 100_000 } else { 1_000_000 };
        let rows = sieve::brun_ratio_scan(n, &[2.0, 10.0, 20.0, 50.0]);
        let ok = (rows[0].ratio - 1.0).abs() < 1e-9
            && rows.iter().all(|r| r.ratio > 0.85 && r.ratio < 1.15);
        let detail: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.ratio)).collect();
        out.push(check("brun_ratio_scan", ok, detail.join(" ")));
    }

    // partial character sums lose to sqrt(N)
    {
        let grp = CharacterGroup::build(10_007).unwrap();
        let rows = mollifier::first_moment_cancellation(&grp, &[100]).unwrap();
        out.push(check(
            "first_moment_cancellation",
            rows[0].ratio_to_sqrt_n < 1.0,
            format!("ratio at N=100: {:.4}", rows[0].ratio_to_sqrt_n),
        ));
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_is_green() {
        let outcomes = run_suite(true);
        for o in &outcomes {
            assert!(o.pass, "{}: {}", o.name, o.detail);
        }
        assert!(outcomes.len() >= 14);
    }
}
