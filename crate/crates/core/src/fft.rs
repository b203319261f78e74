//! Iterative radix-2 complex FFT (power-of-two lengths) with a 2D
//! row-column driver. Forward uses the e^{-i} convention; inverse divides
//! by the length.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::math;

/// Precomputed twiddle plan for one length.
pub struct Fft {
    pub len: usize,
    // twiddles[k] = e^{-2 pi i k / len}, k < len/2
    twiddles: Vec<Complex64>,
}

impl Fft {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(invalid("fft length must be a nonzero power of two"));
        }
        let half = len / 2;
        let mut twiddles = Vec::with_capacity(half.max(1));
        for k in 0..half.max(1) {
            let th = -2.0 * core::f64::consts::PI * k as f64 / len as f64;
            twiddles.push(Complex64::new(math::cos(th), math::sin(th)));
        }
        Ok(Fft { len, twiddles })
    }

    /// In-place forward transform.
    pub fn forward(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.len);
        self.transform(data, false);
    }

    /// In-place inverse transform (normalized by 1/len).
    pub fn inverse(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.len);
        self.transform(data, true);
        let scale = 1.0 / self.len as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&self, data: &mut [Complex64], invert: bool) {
        let n = self.len;
        if n <= 1 {
            return;
        }
        // bit-reversal permutation
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = (i.reverse_bits() >> (usize::BITS - bits)) & (n - 1);
            if j > i {
                data.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let step = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let mut w = self.twiddles[k * step];
                    if invert {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            size <<= 1;
        }
    }
}

/// 2D transform over a row-major `n x n` buffer: rows, then columns.
pub struct Fft2 {
    pub n: usize,
    plan: Fft,
}

impl Fft2 {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Fft2 { n, plan: Fft::new(n)? })
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, false)
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, true)
    }

    fn apply(&self, data: &mut [Complex64], invert: bool) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n);
        for row in data.chunks_exact_mut(n) {
            if invert {
                self.plan.inverse(row);
            } else {
                self.plan.forward(row);
            }
        }
        let mut col = alloc::vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = data[i * n + j];
            }
            if invert {
                self.plan.inverse(&mut col);
            } else {
                self.plan.forward(&mut col);
            }
            for i in 0..n {
                data[i * n + j] = col[i];
            }
        }
    }
}

/// Integer frequency index for bin `k` of an `n`-point transform
/// (`0, 1, ..., n/2, -n/2+1, ..., -1`).
pub fn freq_index(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}
