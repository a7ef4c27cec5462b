//! Arbitrary-length discrete Fourier transforms.
//!
//! Character-family batches need transforms of length p - 1, which is almost
//! never smooth. The chirp-z (Bluestein) factorization
//! `jk = (j^2 + k^2 - (j - k)^2) / 2`
//! turns a length-L transform into a cyclic convolution of length >= 2L - 1,
//! padded to a power of two and done with a radix-2 FFT. Chirp exponents are
//! reduced mod 2L in integer arithmetic before touching sin/cos, so the phase
//! stays accurate for large L.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Sign of the transform exponent: `X[j] = sum_k x[k] exp(sign * 2*pi*i*j*k / L)`.
///
/// Neither direction applies a 1/L normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformSign {
    Negative,
    Positive,
}

impl TransformSign {
    fn as_f64(self) -> f64 {
        match self {
            TransformSign::Negative => -1.0,
            TransformSign::Positive => 1.0,
        }
    }
}

/// Radix-2 FFT plan with precomputed twiddles.
pub struct FftPlan {
    n: usize,
    // exp(-2*pi*i*k/n) for k < n/2
    twiddles: Vec<Complex64>,
}

impl FftPlan {
    pub fn new(n: usize) -> FftPlan {
        assert!(n.is_power_of_two(), "FFT length must be a power of two");
        let twiddles = (0..n / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
            .collect();
        FftPlan { n, twiddles }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n);
        bit_reverse_permute(buf);
        let n = self.n;
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * step];
                    let u = buf[start + k];
                    let v = buf[start + k + half] * w;
                    buf[start + k] = u + v;
                    buf[start + k + half] = u - v;
                }
            }
            len <<= 1;
        }
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        for v in buf.iter_mut() {
            *v = v.conj();
        }
        self.forward(buf);
        let scale = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v = v.conj() * scale;
        }
    }
}

fn bit_reverse_permute(buf: &mut [Complex64]) {
    let n = buf.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
}

/// Chirp-z plan for one (length, sign) pair; reusable across inputs.
pub struct CztPlan {
    len: usize,
    fft: FftPlan,
    // exp(sign * pi * i * (t^2 mod 2L) / L), t < L
    chirp: Vec<Complex64>,
    // forward FFT of the cyclically embedded conjugate chirp
    chirp_spectrum: Vec<Complex64>,
}

impl CztPlan {
    pub fn new(len: usize, sign: TransformSign) -> CztPlan {
        assert!(len >= 1);
        let s = sign.as_f64();
        let two_l = 2 * len as u128;
        let chirp: Vec<Complex64> = (0..len as u128)
            .map(|t| {
                let r = (t * t) % two_l;
                Complex64::from_polar(1.0, s * PI * r as f64 / len as f64)
            })
            .collect();
        let m = (2 * len - 1).next_power_of_two();
        let fft = FftPlan::new(m);
        let mut b = vec![Complex64::new(0.0, 0.0); m];
        b[0] = chirp[0].conj();
        for t in 1..len {
            b[t] = chirp[t].conj();
            b[m - t] = chirp[t].conj();
        }
        fft.forward(&mut b);
        CztPlan {
            len,
            fft,
            chirp,
            chirp_spectrum: b,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn transform(&self, input: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(input.len(), self.len);
        let m = self.chirp_spectrum.len();
        let mut a = vec![Complex64::new(0.0, 0.0); m];
        for (k, (&x, &c)) in input.iter().zip(&self.chirp).enumerate() {
            a[k] = x * c;
        }
        self.fft.forward(&mut a);
        for (v, &b) in a.iter_mut().zip(&self.chirp_spectrum) {
            *v *= b;
        }
        self.fft.inverse(&mut a);
        (0..self.len).map(|j| self.chirp[j] * a[j]).collect()
    }
}

/// Quadratic-time DFT, used as the oracle for the chirp-z path.
pub fn dft_naive(input: &[Complex64], sign: TransformSign) -> Vec<Complex64> {
    let l = input.len();
    let s = sign.as_f64();
    let roots: Vec<Complex64> = (0..l)
        .map(|t| Complex64::from_polar(1.0, s * 2.0 * PI * t as f64 / l as f64))
        .collect();
    (0..l)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &x) in input.iter().enumerate() {
                acc += x * roots[(j * k) % l];
            }
            acc
        })
        .collect()
}
