//! Small integer helpers shared across modules.

/// Binary GCD. `gcd(0, n) = n`.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            core::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Modular inverse mod a prime, by Fermat.
pub fn inv_mod_prime(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    pow_mod(a, p - 2, p)
}

/// Floor of the square root, exact for all u64.
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

pub fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// Relative difference with a floor to keep 0-vs-0 comparisons meaningful.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_basics() {
        assert_eq!(gcd(0, 7), 7);
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(gcd(17, 29), 1);
        assert_eq!(gcd(2u64.pow(40), 2u64.pow(20) * 3), 2u64.pow(20));
    }

    #[test]
    fn pow_mod_matches_naive() {
        for &(b, e, m) in &[(2u64, 10u64, 1000u64), (3, 0, 7), (5, 3, 13), (10, 20, 97)] {
            let mut acc = 1u64;
            for _ in 0..e {
                acc = acc * b % m;
            }
            assert_eq!(pow_mod(b, e, m), acc);
        }
    }

    #[test]
    fn isqrt_edges() {
        for n in 0..2000u64 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n, "n={n}");
        }
        assert_eq!(isqrt(u64::MAX), 4294967295);
        assert_eq!(isqrt(10007), 100);
    }

    #[test]
    fn inverse_mod_prime() {
        for a in 1..31u64 {
            assert_eq!(mul_mod(a, inv_mod_prime(a, 31), 31), 1);
        }
    }
}
