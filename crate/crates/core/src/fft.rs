//! Radix-2 complex transforms on power-of-two lines and row-major `N^d` boxes.

use alloc::vec::Vec;
use num_complex::Complex64;

/// Precomputed twiddles and bit-reversal permutation for one line length.
#[derive(Debug, Clone)]
pub struct Radix2 {
    n: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl Radix2 {
    /// `n` must be a power of two.
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "radix-2 length must be a power of two");
        let twiddles = (0..n / 2)
            .map(|k| {
                let theta = -2.0 * core::f64::consts::PI * k as f64 / n as f64;
                Complex64::new(libm::cos(theta), libm::sin(theta))
            })
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Self { n, twiddles, bitrev }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalized in-place transform; `inverse` flips the exponent sign.
    pub fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        debug_assert_eq!(buf.len(), n);
        for i in 0..n {
            let j = self.bitrev[i];
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

/// Transform every axis of a row-major `n^dim` array in place.
///
/// The forward direction scales by `1/n^dim`; the inverse is unnormalized.
pub fn transform_nd(plan: &Radix2, dim: usize, data: &mut [Complex64], inverse: bool) {
    let n = plan.len();
    let total = n.pow(dim as u32);
    debug_assert_eq!(data.len(), total);
    let mut line = alloc::vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + i * stride];
                }
                plan.process(&mut line, inverse);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
    if !inverse {
        let scale = 1.0 / total as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}
