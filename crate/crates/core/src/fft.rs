//! Radix-2 FFT and real linear convolution.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    pub fn conj(self) -> Self {
        Complex::new(self.re, -self.im)
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, o: Complex) -> Complex {
        Complex::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

/// In-place iterative FFT. `buf.len()` must be a power of two.
/// The inverse transform is unnormalised.
pub fn fft_in_place(buf: &mut [Complex], inverse: bool) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "FFT length must be a power of two");
    let mut j = 0;
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
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let (s, c) = libm::sincos(ang * k as f64);
                let w = Complex::new(c, s);
                let u = buf[start + k];
                let v = buf[start + k + half] * w;
                buf[start + k] = u + v;
                buf[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }
}

/// Linear convolution of two real sequences.
pub fn convolve_real(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let mut out = circular_convolve_real(a, b, out_len.next_power_of_two());
    out.truncate(out_len);
    out
}

/// Circular convolution of two real sequences zero-padded to `size`
/// (a power of two, at least as long as either input).
///
/// Both inputs ride in one complex transform (first as the real part, second
/// as the imaginary part); their spectra are separated by conjugate symmetry.
pub fn circular_convolve_real(a: &[f64], b: &[f64], size: usize) -> Vec<f64> {
    assert!(a.len() <= size && b.len() <= size, "inputs longer than the embedding");
    let mut z = vec![Complex::default(); size];
    for (i, &x) in a.iter().enumerate() {
        z[i].re = x;
    }
    for (i, &x) in b.iter().enumerate() {
        z[i].im = x;
    }
    fft_in_place(&mut z, false);
    let mut prod = vec![Complex::default(); size];
    for k in 0..size {
        let zk = z[k];
        let zr = z[(size - k) % size].conj();
        let fa = Complex::new(0.5 * (zk.re + zr.re), 0.5 * (zk.im + zr.im));
        // (zk - zr) / (2i)
        let d = zk - zr;
        let fb = Complex::new(0.5 * d.im, -0.5 * d.re);
        prod[k] = fa * fb;
    }
    fft_in_place(&mut prod, true);
    let inv = 1.0 / size as f64;
    prod.iter().map(|c| c.re * inv).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    #[test]
    fn convolution_matches_naive() {
        let a = [1.0, -2.0, 3.5, 0.25, 7.0];
        let b = [0.5, 4.0, -1.0];
        let fast = convolve_real(&a, &b);
        let slow = naive(&a, &b);
        for (x, y) in fast.iter().zip(&slow) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn roundtrip() {
        let mut v: Vec<Complex> = (0..8).map(|i| Complex::new(i as f64, -(i as f64) / 2.0)).collect();
        let orig = v.clone();
        fft_in_place(&mut v, false);
        fft_in_place(&mut v, true);
        for (x, y) in v.iter().zip(&orig) {
            assert!((x.re / 8.0 - y.re).abs() < 1e-12 && (x.im / 8.0 - y.im).abs() < 1e-12);
        }
    }
}
