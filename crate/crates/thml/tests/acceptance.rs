//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Criterion 10's second inequality is a known desk-scale shortfall of the
//! asymptotic parameter choice (the rough set at y = exp(sqrt(log N)) does
//! not overtake the full interval until N ~ 1e6); the test states the claim
//! exactly and is expected red there. Everything else must be green.

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use std::f64::consts::PI;

use thml::char_group::{CharIndex, CharacterGroup, Parity};
use thml::gcd_energy;
use thml::highprec::DEFAULT_LADDER;
use thml::mollifier::{self, Method, MollifierSpec};
use thml::primes::{primes_in_range, primes_up_to};
use thml::sieve::{self, rough_set, IntegerSet};
use thml::theta::{self, FeOutcome};
use thml::util::{gcd, isqrt, rel_diff};

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion} {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

#[test]
fn criterion_01_orthogonality_exactness() {
    let started = std::time::Instant::now();
    let worst = primes_up_to(199)
        .into_par_iter()
        .skip(1)
        .map(|p| {
            let grp = CharacterGroup::build(p).unwrap();
            let half = (p - 1) as f64 / 2.0;
            let mut worst = 0.0f64;
            for m in 1..=p {
                for n in 1..=p {
                    for parity in [Parity::Even, Parity::Odd] {
                        let got = grp.orthogonality_sum_complex(m, n, parity);
                        let want = if m % p == 0 || n % p == 0 {
                            0.0
                        } else {
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
                        };
                        let err = ((got.re - want).abs()).max(got.im.abs()) / p as f64;
                        worst = worst.max(err);
                    }
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    let pass = worst < 1e-9;
    report(
        "01 orthogonality_exactness",
        pass,
        &format!(
            "max |err|/p = {worst:.3e} over p <= 199 in {:.1?}",
            started.elapsed()
        ),
    );
    assert!(pass);
    assert!(started.elapsed().as_secs() < 30);
}

#[test]
fn criterion_02_functional_equation() {
    let started = std::time::Instant::now();
    let primes: Vec<u64> = primes_up_to(499).into_iter().filter(|&p| p >= 5).collect();
    let (worst_ratio, worst_w) = primes
        .par_iter()
        .map(|&p| {
            let grp = CharacterGroup::build(p).unwrap();
            let mut worst_ratio = 0.0f64;
            let mut worst_w = 0.0f64;
            for j in 1..p - 1 {
                let rn = theta::root_number(&grp, CharIndex(j)).unwrap();
                assert!(rn.defined, "undecided root number at p={p} j={j}");
                worst_w = worst_w.max((rn.w.norm() - 1.0).abs());
                for x in [0.5, 2.0] {
                    match theta::functional_equation_residual(&grp, CharIndex(j), x).unwrap() {
                        FeOutcome::Checked {
                            residual,
                            tolerance,
                        } => {
                            worst_ratio = worst_ratio.max(residual / tolerance);
                        }
                        FeOutcome::Undecided => panic!("undecided FE at p={p} j={j} x={x}"),
                    }
                }
            }
            (worst_ratio, worst_w)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let pass = worst_ratio <= 1.0 && worst_w <= 1e-8;
    report(
        "02 functional_equation",
        pass,
        &format!(
            "max residual/radii = {worst_ratio:.3}, max ||W|-1| = {worst_w:.2e}, 5 <= p <= 499, x in {{0.5, 2}} in {:.1?}",
            started.elapsed()
        ),
    );
    assert!(pass);
    assert!(started.elapsed().as_secs() < 120);
}

#[test]
fn criterion_03_dual_route_moments() {
    let started = std::time::Instant::now();
    let primes: Vec<u64> = primes_up_to(499).into_iter().skip(1).collect();
    let worst = primes
        .par_iter()
        .map(|&p| {
            let grp = CharacterGroup::build(p).unwrap();
            let mut worst = 0.0f64;
            for parity in [Parity::Even, Parity::Odd] {
                let rough_default = MollifierSpec::build(p, None, parity).unwrap();
                let supports: Vec<Vec<u64>> = vec![
                    vec![],
                    vec![1],
                    rough_default.support.elements().to_vec(),
                    (1..=isqrt(p)).collect(),
                ];
                for elems in supports {
                    let spec = MollifierSpec::with_support(p, elems, parity).unwrap();
                    let d1 = mollifier::moment_m1(&grp, &spec, 1.0, Method::Direct).unwrap();
                    let c1 = mollifier::moment_m1(&grp, &spec, 1.0, Method::Closed).unwrap();
                    let d2 = mollifier::moment_m2(&grp, &spec, 1.0, Method::Direct).unwrap();
                    let c2 = mollifier::moment_m2(&grp, &spec, 1.0, Method::Closed).unwrap();
                    worst = worst.max(rel_diff(d1, c1)).max(rel_diff(d2, c2));
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    let pass = worst < 1e-9;
    report(
        "03 dual_route_moments",
        pass,
        &format!(
            "max relative residual = {worst:.3e} over p <= 499, both parities, A in {{empty, {{1}}, rough, full}} in {:.1?}",
            started.elapsed()
        ),
    );
    assert!(pass);
    assert!(started.elapsed().as_secs() < 120);
}

/// Character tables for p = 5 hardcoded from first principles; the oracle
/// shares nothing with the group/dlog machinery.
fn p5_theta_oracle(chi: [f64; 5], x: f64) -> f64 {
    let mut acc = 0.0;
    for n in (1u64..=60).rev() {
        acc += chi[(n % 5) as usize] * (-PI * (n * n) as f64 * x / 5.0).exp();
    }
    acc
}

#[test]
fn criterion_04_p5_fixture() {
    let chi0 = [0.0, 1.0, 1.0, 1.0, 1.0];
    let chi2 = [0.0, 1.0, -1.0, -1.0, 1.0]; // Legendre symbol mod 5
    let t0_oracle = p5_theta_oracle(chi0, 1.0);
    let t2_oracle = p5_theta_oracle(chi2, 1.0);
    let m1_oracle = t0_oracle + t2_oracle;
    let m2_oracle = t0_oracle * t0_oracle + t2_oracle * t2_oracle;
    let cs_oracle = m1_oracle * m1_oracle / m2_oracle;
    // frozen from the oracle itself; summing 5-decimal-rounded terms by hand
    // lands ~1.5e-4 away, so the oracle output is the anchor
    assert!((t0_oracle - 0.6180341750).abs() < 1e-9);
    assert!((t2_oracle - 0.4490281119).abs() < 1e-9);
    assert!((m1_oracle - 1.0670622869).abs() < 1e-9);
    assert!((m2_oracle - 0.5835924868).abs() < 1e-9);
    assert!((cs_oracle - 1.9510565163).abs() < 1e-9);

    let grp = CharacterGroup::build(5).unwrap();
    let t0 = theta::theta_direct(&grp, CharIndex(0), 1.0, Parity::Even).unwrap();
    let t2 = theta::theta_direct(&grp, CharIndex(2), 1.0, Parity::Even).unwrap();
    let spec = MollifierSpec::with_support(5, vec![1], Parity::Even).unwrap();
    let m1 = mollifier::moment_m1(&grp, &spec, 1.0, Method::Direct).unwrap();
    let m2 = mollifier::moment_m2(&grp, &spec, 1.0, Method::Direct).unwrap();
    let census =
        mollifier::nonvanishing_census(&grp, 1.0, Parity::Even, Some(&spec), DEFAULT_LADDER)
            .unwrap();

    let errs = [
        (t0.value.re - t0_oracle).abs(),
        (t2.value.re - t2_oracle).abs(),
        (m1 - m1_oracle).abs(),
        (m2 - m2_oracle).abs(),
        (census.cs_lower_bound - cs_oracle).abs(),
    ];
    let worst = errs.iter().fold(0.0f64, |a, &b| a.max(b));
    let pass = worst < 1e-4 && census.nonvanishing == 2 && census.cs_lower_bound <= 2.0;
    report(
        "04 p5_fixture",
        pass,
        &format!(
            "theta0={:.6} theta2={:.6} m1={:.6} m2={:.6} cs={:.4} <= census {} (max |impl - oracle| = {worst:.2e})",
            t0.value.re, t2.value.re, m1, m2, census.cs_lower_bound, census.nonvanishing
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_05_census_trend() {
    let started = std::time::Instant::now();
    let primes = primes_in_range(1_000, 10_000);
    assert_eq!(primes.len(), 1061);
    let rows = mollifier::census_scan(&primes, 1.0, Parity::Even, None, DEFAULT_LADDER).unwrap();
    let undecided: u64 = rows.iter().map(|r| r.undecided).sum();
    let min_norm = rows
        .iter()
        .map(|r| r.normalized)
        .fold(f64::INFINITY, f64::min);
    let floor_ok = rows
        .iter()
        .all(|r| r.count >= r.cs_lower_bound.floor() as u64);
    let pass = min_norm >= 0.5 && floor_ok && undecided == 0;
    report(
        "05 census_trend",
        pass,
        &format!(
            "1061 primes in [1e3, 1e4]: min count*sqrt(log p)/p = {min_norm:.4}, undecided = {undecided}, count >= floor(cs) everywhere: {floor_ok} in {:.1?}",
            started.elapsed()
        ),
    );
    assert!(pass);
    assert!(started.elapsed().as_secs() < 600);
}

#[test]
fn criterion_06_quadruple_asymptotic() {
    let started = std::time::Instant::now();
    let fit = gcd_energy::quadruple_fit(&[1e4, 1e5, 1e6]);
    let pass = fit.a >= 0.33 && fit.a <= 0.42;
    report(
        "06 quadruple_asymptotic",
        pass,
        &format!(
            "a = {:.5} in [0.33, 0.42] (target 3/8 = 0.375), b = {:.5}, counts = {:?} in {:.1?}",
            fit.a,
            fit.b,
            fit.samples,
            started.elapsed()
        ),
    );
    assert!(pass);
    assert!(started.elapsed().as_secs() < 300);
}

#[test]
fn criterion_07_brun_ratio() {
    let started = std::time::Instant::now();
    let rows = sieve::brun_ratio_scan(1_000_000, &[10.0, 20.0, 50.0]);
    let pass = rows.iter().all(|r| r.ratio >= 0.9 && r.ratio <= 1.1);
    let detail: Vec<String> = rows
        .iter()
        .map(|r| format!("y={}: {:.6}", r.y, r.ratio))
        .collect();
    report(
        "07 brun_ratio",
        pass,
        &format!("{} in {:.1?}", detail.join(", "), started.elapsed()),
    );
    assert!(pass);
    assert!(started.elapsed().as_secs() < 30);
}

#[test]
fn criterion_08_gcd_dichotomy_exhaustive() {
    let started = std::time::Instant::now();
    let violations: u64 = (1u64..=500)
        .into_par_iter()
        .map(|n_max| {
            let mut bad = 0u64;
            for y in [2.0, 5.0, 10.0, (n_max as f64).sqrt()] {
                let set = rough_set(n_max, y);
                for (i, &m) in set.elements().iter().enumerate() {
                    for &n in &set.elements()[i..] {
                        if n % m != 0 && gcd(m, n) as f64 >= n_max as f64 / y {
                            bad += 1;
                        }
                    }
                }
            }
            bad
        })
        .sum();
    let pass = violations == 0;
    report(
        "08 gcd_dichotomy_exhaustive",
        pass,
        &format!(
            "{violations} exceptions over all N <= 500, y in {{2, 5, 10, sqrt(N)}} in {:.1?}",
            started.elapsed()
        ),
    );
    assert!(pass);
    assert!(started.elapsed().as_secs() < 10);
}

#[test]
fn criterion_09_oracle_equivalence() {
    let started = std::time::Instant::now();
    let mut rng = StdRng::seed_from_u64(0xACCE97);
    let mut instances = 0u32;
    let mut gcd_worst = 0.0f64;
    while instances < 100 {
        let n = rng.gen_range(10..=300u64);

        // rough sieve vs trial division
        let y = rng.gen_range(1.5..20.0);
        let set = rough_set(n, y);
        let oracle: Vec<u64> = (1..=n)
            .filter(|&v| {
                let mut d = 2u64;
                while d * d <= v {
                    if v % d == 0 {
                        return d as f64 > y;
                    }
                    d += 1;
                }
                v == 1 || v as f64 > y
            })
            .collect();
        assert_eq!(set.elements(), oracle.as_slice(), "rough N={n} y={y}");

        // gcd sum fast vs naive on a random subset
        let elems: Vec<u64> = (1..=n).filter(|_| rng.gen_bool(0.3)).collect();
        if elems.is_empty() {
            continue;
        }
        let sub = IntegerSet::custom(n, elems).unwrap();
        let naive = gcd_energy::gcd_sum_naive(&sub).unwrap();
        let fast = gcd_energy::gcd_sum_fast(&sub).unwrap();
        gcd_worst = gcd_worst.max(rel_diff(naive, fast));

        // energies vs quadruple enumeration on a thin subset
        let small_n = rng.gen_range(2..=30u64);
        let size = rng.gen_range(1..=(small_n as usize).min(6));
        let mut picks = Vec::new();
        while picks.len() < size {
            let v = rng.gen_range(1..=small_n);
            if !picks.contains(&v) {
                picks.push(v);
            }
        }
        picks.sort_unstable();
        let tiny = IntegerSet::custom(small_n, picks).unwrap();
        let mut cross = 0u64;
        let mut selfe = 0u64;
        for &a in tiny.elements() {
            for &c in tiny.elements() {
                for b in 1..=small_n {
                    for d in 1..=small_n {
                        if a * b == c * d {
                            cross += 1;
                            if tiny.contains(b) && tiny.contains(d) {
                                selfe += 1;
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(gcd_energy::energy_cross(&tiny, small_n).unwrap(), cross);
        assert_eq!(gcd_energy::energy_self(&tiny).unwrap(), selfe);

        instances += 1;
    }
    let pass = gcd_worst < 1e-9;
    report(
        "09 oracle_equivalence",
        pass,
        &format!(
            "100 randomized instances (N <= 300); max gcd-sum rel diff = {gcd_worst:.2e}; energies and sieves exact in {:.1?}",
            started.elapsed()
        ),
    );
    assert!(pass);
    assert!(started.elapsed().as_secs() < 60);
}

#[test]
fn criterion_10_frontier_ordering() {
    let started = std::time::Instant::now();
    let n = 100_000u64;
    let y = ((n as f64).ln().sqrt()).exp();
    let rough = rough_set(n, y);
    let r_rough = gcd_energy::ratio_r(&rough).unwrap();
    let r_primes = gcd_energy::ratio_r(&IntegerSet::primes(n)).unwrap();
    let r_all = gcd_energy::ratio_r(&IntegerSet::all(n)).unwrap();
    let beats_primes = r_rough > r_primes;
    let beats_all = r_rough > r_all;
    let pass = beats_primes && beats_all;
    report(
        "10 frontier_ordering",
        pass,
        &format!(
            "N=1e5, y=exp(sqrt(log N))={y:.2}: R(rough)={r_rough:.4e} vs R(primes)={r_primes:.4e} ({}) and R(all)={r_all:.4e} ({}); the all-comparison is a known desk-scale shortfall of the asymptotic y (crossover near N=1e6), see the decisions ledger; computed in {:.1?}",
            if beats_primes { "ok" } else { "violated" },
            if beats_all { "ok" } else { "violated" },
            started.elapsed()
        ),
    );
    assert!(started.elapsed().as_secs() < 300);
    assert!(
        pass,
        "R(rough(exp(sqrt(log N)))) > R([1,N]) fails at N=1e5: {r_rough:.4e} <= {r_all:.4e}"
    );
}

#[test]
fn criterion_11_cauchy_schwarz_invariant() {
    let started = std::time::Instant::now();
    let mut worst_margin = f64::INFINITY;
    let mut censuses = 0u32;
    for &p in &[5u64, 13, 101, 499, 1009, 4999, 10007] {
        let grp = CharacterGroup::build(p).unwrap();
        for parity in [Parity::Even, Parity::Odd] {
            let specs: Vec<Option<MollifierSpec>> = vec![
                None,
                Some(MollifierSpec::build(p, None, parity).unwrap()),
                Some(MollifierSpec::with_support(p, (1..=isqrt(p)).collect(), parity).unwrap()),
            ];
            for spec in &specs {
                let report_data = mollifier::nonvanishing_census(
                    &grp,
                    1.0,
                    parity,
                    spec.as_ref(),
                    DEFAULT_LADDER,
                )
                .unwrap();
                let thetas = theta::theta_all(&grp, 1.0, parity).unwrap();
                let unit = MollifierSpec::with_support(p, vec![1], parity).unwrap();
                let mols: Vec<Complex64> =
                    mollifier::mollifier_values(&grp, spec.as_ref().unwrap_or(&unit)).unwrap();
                let slack = mollifier::cauchy_schwarz_slack(&report_data, &thetas, &mols);
                worst_margin = worst_margin.min(slack);
                censuses += 1;
            }
        }
    }
    let pass = worst_margin >= 0.0;
    report(
        "11 cauchy_schwarz_invariant",
        pass,
        &format!(
            "(count + undecided) * M2 >= M1^2 within accumulated radii for {censuses} censuses; tightest slack = {worst_margin:.3e} in {:.1?}",
            started.elapsed()
        ),
    );
    assert!(pass);
}
