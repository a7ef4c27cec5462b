//! Multiplicative group mod p: primitive root, discrete-log table, Dirichlet
//! character evaluation and orthogonality relations.
//!
//! Characters mod an odd prime p are indexed by j in [0, p-2] through a fixed
//! primitive root g: chi_j(n) = exp(2*pi*i * j * dlog(n) / (p-1)). The smallest
//! primitive root is always chosen so indexing is reproducible across runs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::primes::is_prime;
use crate::summation::KahanComplex;
use crate::util::pow_mod;

/// Character parity: chi(-1) = +1 (even) or -1 (odd).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_index(j: u64) -> Parity {
        if j % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Index j of the character chi_j; valid range is [0, p-2].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CharIndex(pub u64);

impl CharIndex {
    pub fn parity(self) -> Parity {
        Parity::of_index(self.0)
    }
}

/// Default memory budget for group tables (dlog + roots of unity).
pub const DEFAULT_GROUP_BUDGET: u64 = 2 << 30;

/// Magic bytes of the binary dlog cache format.
pub const DLOG_CACHE_MAGIC: &[u8; 4] = b"THML";
/// Version of the binary dlog cache format.
pub const DLOG_CACHE_VERSION: u32 = 1;

/// The multiplicative group mod p with its discrete-log table.
///
/// Immutable after construction and safe to share across threads.
#[derive(Debug, Clone)]
pub struct CharacterGroup {
    p: u64,
    g: u64,
    order: u64,
    /// dlog[n] = k with g^k = n (mod p), for n in [1, p-1]; dlog[0] is a sentinel.
    dlog: Vec<u32>,
    /// roots[k] = exp(2*pi*i*k/(p-1))
    roots: Vec<Complex64>,
}

/// Smallest primitive root mod an odd prime.
pub fn find_primitive_root(p: u64) -> Result<u64> {
    if p % 2 == 0 {
        return Err(Error::EvenModulus(p));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let order = p - 1;
    let mut prime_factors = Vec::new();
    let mut rest = order;
    let mut q = 2u64;
    while q * q <= rest {
        if rest % q == 0 {
            prime_factors.push(q);
            while rest % q == 0 {
                rest /= q;
            }
        }
        q += 1;
    }
    if rest > 1 {
        prime_factors.push(rest);
    }
    for g in 2..p {
        if prime_factors.iter().all(|&q| pow_mod(g, order / q, p) != 1) {
            return Ok(g);
        }
    }
    unreachable!("every odd prime has a primitive root")
}

impl CharacterGroup {
    pub fn build(p: u64) -> Result<CharacterGroup> {
        CharacterGroup::build_with_budget(p, DEFAULT_GROUP_BUDGET)
    }

    pub fn build_with_budget(p: u64, budget: u64) -> Result<CharacterGroup> {
        let g = find_primitive_root(p)?;
        let required = Self::required_bytes(p);
        if required > budget {
            return Err(Error::MemoryBudget {
                what: "character group tables",
                p,
                required,
                budget,
            });
        }
        let order = p - 1;
        let mut dlog = vec![u32::MAX; p as usize];
        let mut acc = 1u64;
        for k in 0..order {
            dlog[acc as usize] = k as u32;
            acc = acc * g % p;
        }
        debug_assert_eq!(acc, 1);
        let roots = (0..order)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / order as f64))
            .collect();
        Ok(CharacterGroup {
            p,
            g,
            order,
            dlog,
            roots,
        })
    }

    /// Bytes needed for the dlog table plus the roots-of-unity table.
    pub fn required_bytes(p: u64) -> u64 {
        4 * p + 16 * (p - 1)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn primitive_root(&self) -> u64 {
        self.g
    }

    /// Group order p - 1 (= number of characters).
    pub fn order(&self) -> u64 {
        self.order
    }

    /// Number of characters of one parity, (p-1)/2.
    pub fn half_order(&self) -> u64 {
        self.order / 2
    }

    /// Discrete log of n mod p; None when p | n.
    pub fn dlog(&self, n: u64) -> Option<u64> {
        let r = (n % self.p) as usize;
        if r == 0 {
            None
        } else {
            Some(self.dlog[r] as u64)
        }
    }

    /// g^k mod p.
    pub fn root_power(&self, k: u64) -> Complex64 {
        self.roots[(k % self.order) as usize]
    }

    pub fn check_index(&self, j: CharIndex) -> Result<()> {
        if j.0 >= self.order {
            Err(Error::IndexRange {
                j: j.0,
                max: self.order - 1,
            })
        } else {
            Ok(())
        }
    }

    /// chi_j(n): exp(2*pi*i*j*dlog(n)/(p-1)) for gcd(n, p) = 1, else 0.
    pub fn character_value(&self, j: CharIndex, n: u64) -> Complex64 {
        match self.dlog(n) {
            None => Complex64::new(0.0, 0.0),
            Some(k) => self.roots[((j.0 % self.order) * k % self.order) as usize],
        }
    }

    /// Indices of all characters with the given parity, ascending.
    pub fn indices_of_parity(&self, parity: Parity) -> Vec<CharIndex> {
        let start = match parity {
            Parity::Even => 0,
            Parity::Odd => 1,
        };
        (start..self.order).step_by(2).map(CharIndex).collect()
    }

    /// Direct summation of chi(m) * conj(chi(n)) over all characters of one parity.
    ///
    /// Closed form: even parity gives (p-1)/2 when m = +-n (mod p) and
    /// gcd(m, p) = 1, else 0; odd parity gives +(p-1)/2 when n = m and
    /// -(p-1)/2 when n = -m. The imaginary part of the direct sum must vanish
    /// to rounding, which the verification suite checks.
    pub fn orthogonality_sum(&self, m: u64, n: u64, parity: Parity) -> f64 {
        self.orthogonality_sum_complex(m, n, parity).re
    }

    pub fn orthogonality_sum_complex(&self, m: u64, n: u64, parity: Parity) -> Complex64 {
        let (km, kn) = match (self.dlog(m), self.dlog(n)) {
            (Some(a), Some(b)) => (a, b),
            // chi(m) or chi(n) is identically zero
            _ => return Complex64::new(0.0, 0.0),
        };
        let d = (km + self.order - kn) % self.order;
        let start = match parity {
            Parity::Even => 0,
            Parity::Odd => 1,
        };
        let mut acc = KahanComplex::new();
        for j in (start..self.order).step_by(2) {
            acc.add(self.roots[(j * d % self.order) as usize]);
        }
        acc.value()
    }

    /// Serialize the dlog table in the binary cache layout:
    /// magic "THML", format version u32, p u64, then p-1 little-endian u32 entries.
    pub fn write_dlog_cache<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(DLOG_CACHE_MAGIC)?;
        w.write_all(&DLOG_CACHE_VERSION.to_le_bytes())?;
        w.write_all(&self.p.to_le_bytes())?;
        let mut buf = Vec::with_capacity(4 * (self.p as usize - 1));
        for n in 1..self.p as usize {
            buf.extend_from_slice(&self.dlog[n].to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    /// Rebuild a group from the binary cache layout, re-validating the table.
    pub fn read_dlog_cache<R: Read>(mut r: R) -> Result<CharacterGroup> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != DLOG_CACHE_MAGIC {
            return Err(Error::CacheFormat(format!("bad magic {magic:?}")));
        }
        let mut v4 = [0u8; 4];
        r.read_exact(&mut v4)?;
        let version = u32::from_le_bytes(v4);
        if version != DLOG_CACHE_VERSION {
            return Err(Error::CacheFormat(format!(
                "version {version}, expected {DLOG_CACHE_VERSION}"
            )));
        }
        let mut v8 = [0u8; 8];
        r.read_exact(&mut v8)?;
        let p = u64::from_le_bytes(v8);
        if p < 3 || p % 2 == 0 || !is_prime(p) {
            return Err(Error::CacheFormat(format!("p = {p} is not an odd prime")));
        }
        let order = p - 1;
        let mut raw = vec![0u8; 4 * order as usize];
        r.read_exact(&mut raw)?;
        let mut dlog = vec![u32::MAX; p as usize];
        let mut seen = vec![false; order as usize];
        let mut g = 0u64;
        for n in 1..p as usize {
            let k = u32::from_le_bytes(raw[4 * (n - 1)..4 * n].try_into().unwrap());
            if k as u64 >= order || seen[k as usize] {
                return Err(Error::CacheFormat(format!(
                    "dlog table is not a bijection at n = {n}"
                )));
            }
            seen[k as usize] = true;
            dlog[n] = k;
            if k == 1 {
                g = n as u64;
            }
        }
        if dlog[1] != 0 || g == 0 || g != find_primitive_root(p)? {
            return Err(Error::CacheFormat("inconsistent generator".into()));
        }
        let roots = (0..order)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / order as f64))
            .collect();
        Ok(CharacterGroup {
            p,
            g,
            order,
            dlog,
            roots,
        })
    }

    pub fn write_dlog_cache_file(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        {
            let mut f = std::fs::File::create(&tmp)?;
            self.write_dlog_cache(&mut f)?;
            f.sync_all()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn read_dlog_cache_file(path: &Path) -> Result<CharacterGroup> {
        let f = std::fs::File::open(path)?;
        CharacterGroup::read_dlog_cache(std::io::BufReader::new(f))
    }
}
