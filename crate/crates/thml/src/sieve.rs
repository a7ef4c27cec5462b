//! Integer-set families and rough-number sieving.
//!
//! A y-rough number has every prime factor > y, with P-(1) = +infinity so 1
//! belongs to every rough set. Phi(x, y) counts rough numbers up to x;
//! zeta(1, y) is the Mertens product governing their density.

use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::primes::primes_up_to;
use crate::summation::KahanSum;

/// Sieve segment length (elements per block).
const SEGMENT_LEN: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "family")]
pub enum SetFamily {
    All,
    Primes,
    Rough { y: f64 },
    Custom,
}

impl std::fmt::Display for SetFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SetFamily::All => write!(f, "all"),
            SetFamily::Primes => write!(f, "primes"),
            SetFamily::Rough { y } => write!(f, "rough(y={y})"),
            SetFamily::Custom => write!(f, "custom"),
        }
    }
}

/// A finite subset of [1, N], sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegerSet {
    n_max: u64,
    elements: Vec<u64>,
    family: SetFamily,
}

impl IntegerSet {
    pub fn all(n: u64) -> IntegerSet {
        IntegerSet {
            n_max: n,
            elements: (1..=n).collect(),
            family: SetFamily::All,
        }
    }

    pub fn primes(n: u64) -> IntegerSet {
        IntegerSet {
            n_max: n,
            elements: primes_up_to(n),
            family: SetFamily::Primes,
        }
    }

    /// Validated custom set: elements must be distinct, ascending, in [1, n].
    pub fn custom(n: u64, elements: Vec<u64>) -> Result<IntegerSet> {
        for pair in elements.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::InvalidSet(format!(
                    "elements not strictly increasing at {} >= {}",
                    pair[0], pair[1]
                )));
            }
        }
        if let Some(&first) = elements.first() {
            if first == 0 {
                return Err(Error::InvalidSet("0 is not allowed".into()));
            }
        }
        if let Some(&last) = elements.last() {
            if last > n {
                return Err(Error::InvalidSet(format!("element {last} exceeds N = {n}")));
            }
        }
        Ok(IntegerSet {
            n_max: n,
            elements,
            family: SetFamily::Custom,
        })
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn family(&self) -> SetFamily {
        self.family
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn max_element(&self) -> Option<u64> {
        self.elements.last().copied()
    }

    pub fn contains(&self, v: u64) -> bool {
        self.elements.binary_search(&v).is_ok()
    }

    /// |B| / N.
    pub fn density(&self) -> f64 {
        self.elements.len() as f64 / self.n_max as f64
    }

    /// Newline-delimited decimal export.
    pub fn write_elements<W: Write>(&self, mut w: W) -> Result<()> {
        for &e in &self.elements {
            writeln!(w, "{e}")?;
        }
        Ok(())
    }

    pub fn write_elements_file(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_elements(std::io::BufWriter::new(f))
    }

    /// Import a custom set from newline-delimited decimals, validating the
    /// set invariants. N defaults to the largest element when not given.
    pub fn read_elements<R: BufRead>(r: R, n_max: Option<u64>) -> Result<IntegerSet> {
        let mut elements = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let v: u64 = t
                .parse()
                .map_err(|e| Error::InvalidSet(format!("line {}: {e}", lineno + 1)))?;
            elements.push(v);
        }
        let n = n_max.unwrap_or_else(|| elements.last().copied().unwrap_or(1));
        IntegerSet::custom(n, elements)
    }

    pub fn read_elements_file(path: &Path, n_max: Option<u64>) -> Result<IntegerSet> {
        let f = std::fs::File::open(path)?;
        IntegerSet::read_elements(std::io::BufReader::new(f), n_max)
    }
}

/// Visit [1, N] in segments, marking multiples of the given primes; calls
/// `emit(n)` for every survivor in ascending order.
fn sieve_segments(n: u64, primes: &[u64], mut emit: impl FnMut(u64)) {
    let mut mark = vec![false; SEGMENT_LEN as usize];
    let mut lo = 1u64;
    while lo <= n {
        let hi = (lo + SEGMENT_LEN - 1).min(n);
        let len = (hi - lo + 1) as usize;
        mark[..len].fill(false);
        for &p in primes {
            if p > hi {
                break;
            }
            // first multiple of p in [lo, hi]
            let mut m = lo.div_ceil(p) * p;
            while m <= hi {
                mark[(m - lo) as usize] = true;
                m += p;
            }
        }
        for i in 0..len {
            if !mark[i] {
                emit(lo + i as u64);
            }
        }
        lo = hi + 1;
    }
}

/// The y-rough numbers up to N: every n <= N with P-(n) > y, including 1.
pub fn rough_set(n: u64, y: f64) -> IntegerSet {
    let limit = y.floor().max(0.0).min(n as f64) as u64;
    let primes = primes_up_to(limit);
    let mut elements = Vec::new();
    sieve_segments(n, &primes, |v| elements.push(v));
    IntegerSet {
        n_max: n,
        elements,
        family: SetFamily::Rough { y },
    }
}

/// Phi(x, y) = #{n <= x : P-(n) > y}, counting-only segmented sieve.
pub fn phi_count(x: u64, y: f64) -> u64 {
    let limit = y.floor().max(0.0).min(x as f64) as u64;
    let primes = primes_up_to(limit);
    let mut count = 0u64;
    sieve_segments(x, &primes, |_| count += 1);
    count
}

/// zeta(1, y) = prod_{p <= y} (1 - 1/p)^-1; empty product = 1.
pub fn mertens_product(y: f64) -> f64 {
    let limit = y.floor().max(0.0) as u64;
    let mut acc = 1.0f64;
    for p in primes_up_to(limit) {
        acc *= 1.0 / (1.0 - 1.0 / p as f64);
    }
    acc
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BrunRatioRow {
    pub y: f64,
    pub phi: u64,
    pub zeta1y: f64,
    /// Phi(N, y) * zeta(1, y) / N; approaches 1 inside the Brun regime.
    pub ratio: f64,
    /// Whether 2 <= y <= N^(1/(10 log log N)), the range where the asymptotic
    /// formula is asserted. Out-of-regime rows are still computed.
    pub in_regime: bool,
}

/// Upper limit of the Brun-regime parameter range, exp(ln N / (10 ln ln N)).
pub fn brun_regime_limit(n: u64) -> f64 {
    let ln_n = (n as f64).ln();
    if ln_n <= 1.0 {
        return 2.0;
    }
    (ln_n / (10.0 * ln_n.ln())).exp()
}

pub fn brun_ratio_scan(n: u64, y_grid: &[f64]) -> Vec<BrunRatioRow> {
    let limit = brun_regime_limit(n);
    y_grid
        .iter()
        .map(|&y| {
            let phi = phi_count(n, y);
            let zeta1y = mertens_product(y);
            BrunRatioRow {
                y,
                phi,
                zeta1y,
                ratio: phi as f64 * zeta1y / n as f64,
                in_regime: (2.0..=limit).contains(&y),
            }
        })
        .collect()
}

/// Sum of 1/n over the y-rough numbers up to N, compensated.
pub fn harmonic_rough_sum(n: u64, y: f64) -> f64 {
    let limit = y.floor().max(0.0).min(n as f64) as u64;
    let primes = primes_up_to(limit);
    let mut acc = KahanSum::new();
    sieve_segments(n, &primes, |v| acc.add(1.0 / v as f64));
    acc.value()
}
