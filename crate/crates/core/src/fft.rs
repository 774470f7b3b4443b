//! Radix-2 FFT over any [`Real`] scalar.
//!
//! Roots of unity are generated from half-angle recurrences rather than
//! `sin`/`cos`, so they carry the full working precision of the scalar type.

use std::ops::{Add, Mul, Neg, Sub};

use crate::bigfloat::Real;

#[derive(Debug, Clone, Copy)]
pub struct Complex<R> {
    pub re: R,
    pub im: R,
}

impl<R: Real> Complex<R> {
    pub fn new(re: R, im: R) -> Self {
        Self { re, im }
    }

    pub fn real(re: R) -> Self {
        Self { re, im: R::zero() }
    }

    pub fn zero() -> Self {
        Self::real(R::zero())
    }

    pub fn conj(self) -> Self {
        Self { re: self.re, im: -self.im }
    }

    pub fn scale(self, s: R) -> Self {
        Self { re: self.re * s, im: self.im * s }
    }

    pub fn mul_pow2(self, e: i64) -> Self {
        Self { re: self.re.mul_pow2(e), im: self.im.mul_pow2(e) }
    }
}

impl<R: Real> Add for Complex<R> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { re: self.re + o.re, im: self.im + o.im }
    }
}

impl<R: Real> Sub for Complex<R> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { re: self.re - o.re, im: self.im - o.im }
    }
}

impl<R: Real> Mul for Complex<R> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}

impl<R: Real> Neg for Complex<R> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}

/// `table[j] = exp(2πi·j/order)` for `j < order`.
#[derive(Debug, Clone)]
pub struct RootTable<R> {
    order: usize,
    table: Vec<Complex<R>>,
}

impl<R: Real> RootTable<R> {
    /// `order` must be a power of two.
    pub fn new(order: usize) -> Self {
        assert!(order.is_power_of_two(), "root table order {order} is not a power of two");
        let levels = order.trailing_zeros() as usize;
        // principal[m] = exp(2πi / 2^m).
        let mut principal = Vec::with_capacity(levels + 1);
        principal.push(Complex::real(R::one()));
        if levels >= 1 {
            principal.push(Complex::real(-R::one()));
        }
        if levels >= 2 {
            principal.push(Complex::new(R::zero(), R::one()));
        }
        let half = R::from_f64(0.5);
        for m in 3..=levels {
            let prev: Complex<R> = principal[m - 1];
            // cos(θ/2) = √((1 + cos θ)/2), sin(θ/2) = sin θ / (2 cos(θ/2)).
            let c = ((R::one() + prev.re) * half).sqrt();
            let s = prev.im * (c.mul_pow2(1)).recip();
            principal.push(Complex::new(c, s));
        }
        let mut table = vec![Complex::zero(); order];
        table[0] = Complex::real(R::one());
        for b in 0..levels {
            let p = 1usize << b;
            let w = principal[levels - b];
            for j in 0..p {
                table[j + p] = table[j] * w;
            }
        }
        Self { order, table }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `exp(2πi·j/n)` for `n` dividing the table order.
    pub fn root(&self, j: usize, n: usize) -> Complex<R> {
        debug_assert!(self.order % n == 0);
        self.table[(j % n) * (self.order / n)]
    }
}

/// In-place unscaled DFT of length `buf.len()` (a power of two dividing the
/// table order). `inverse = false` uses `exp(−2πi jk/N)`, `true` uses `+`.
pub fn fft<R: Real>(buf: &mut [Complex<R>], roots: &RootTable<R>, inverse: bool) {
    let n = buf.len();
    assert!(n.is_power_of_two() && roots.order() % n == 0, "bad FFT length {n}");
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = roots.order() / len;
        for start in (0..n).step_by(len) {
            for j in 0..half {
                let w = roots.table[j * step];
                let w = if inverse { w } else { w.conj() };
                let a = buf[start + j];
                let b = buf[start + j + half] * w;
                buf[start + j] = a + b;
                buf[start + j + half] = a - b;
            }
        }
        len *= 2;
    }
}

/// Below this length products are computed directly.
const SCHOOLBOOK_LIMIT: usize = 24;

/// Product of two real polynomials given by coefficients (lowest first).
pub fn multiply<R: Real>(a: &[R], b: &[R], roots: &RootTable<R>) -> Vec<R> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    if a.len().min(b.len()) <= SCHOOLBOOK_LIMIT {
        let mut out = vec![R::zero(); out_len];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = out[i + j] + x * y;
            }
        }
        return out;
    }
    let n = out_len.next_power_of_two();
    let load = |src: &[R]| {
        let mut v = vec![Complex::zero(); n];
        for (slot, &x) in v.iter_mut().zip(src) {
            *slot = Complex::real(x);
        }
        v
    };
    let mut fa = load(a);
    let mut fb = load(b);
    fft(&mut fa, roots, false);
    fft(&mut fb, roots, false);
    for (x, &y) in fa.iter_mut().zip(&fb) {
        *x = *x * y;
    }
    fft(&mut fa, roots, true);
    let shift = -(n.trailing_zeros() as i64);
    fa[..out_len].iter().map(|z| z.re.mul_pow2(shift)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigfloat::BigFloat;

    fn naive_product(a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    #[test]
    fn roots_match_trig() {
        let t = RootTable::<f64>::new(64);
        for j in 0..64 {
            let th = 2.0 * std::f64::consts::PI * j as f64 / 64.0;
            let z = t.root(j, 64);
            assert!((z.re - th.cos()).abs() < 1e-15 && (z.im - th.sin()).abs() < 1e-15, "j = {j}");
        }
    }

    #[test]
    fn extended_roots_are_unit_and_exact() {
        type B = BigFloat<2>;
        let t = RootTable::<B>::new(1 << 10);
        for j in [1usize, 3, 100, 511, 777] {
            let z = t.root(j, 1 << 10);
            let norm = z.re * z.re + z.im * z.im - B::one();
            assert!(norm.to_f64().abs() < 1e-34, "|z|² − 1 = {:e}", norm.to_f64());
        }
        // z^1024 = 1 via repeated squaring of the first root.
        let mut z = t.root(1, 1 << 10);
        for _ in 0..10 {
            z = z * z;
        }
        assert!((z.re - B::one()).to_f64().abs() < 1e-33);
        assert!(z.im.to_f64().abs() < 1e-33);
    }

    #[test]
    fn fft_round_trip() {
        let roots = RootTable::<f64>::new(16);
        let orig: Vec<Complex<f64>> = (0..16).map(|i| Complex::new(i as f64, (i * i) as f64 * 0.1)).collect();
        let mut buf = orig.clone();
        fft(&mut buf, &roots, false);
        fft(&mut buf, &roots, true);
        for (a, b) in buf.iter().zip(&orig) {
            assert!((a.re / 16.0 - b.re).abs() < 1e-12 && (a.im / 16.0 - b.im).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_is_dft() {
        let roots = RootTable::<f64>::new(8);
        let x: Vec<f64> = vec![1.0, 2.0, 0.5, -1.0, 3.0, 0.0, 0.25, 4.0];
        let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::real(v)).collect();
        fft(&mut buf, &roots, false);
        for (k, z) in buf.iter().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, &v) in x.iter().enumerate() {
                let th = -2.0 * std::f64::consts::PI * (j * k) as f64 / 8.0;
                re += v * th.cos();
                im += v * th.sin();
            }
            assert!((z.re - re).abs() < 1e-12 && (z.im - im).abs() < 1e-12);
        }
    }

    #[test]
    fn multiply_matches_schoolbook() {
        let roots = RootTable::<f64>::new(256);
        let a: Vec<f64> = (0..70).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let b: Vec<f64> = (0..50).map(|i| ((i * 13) % 7) as f64 * 0.5).collect();
        let got = multiply(&a, &b, &roots);
        let want = naive_product(&a, &b);
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-9, "{g} vs {w}");
        }
    }

    #[test]
    fn extended_multiply_error_is_far_below_f64() {
        type B = BigFloat<2>;
        let roots = RootTable::<B>::new(128);
        let a: Vec<B> = (0..40).map(|i| B::from_f64(1.0 / (i as f64 + 1.0))).collect();
        let b: Vec<B> = (0..30).map(|i| B::from_f64(0.5f64.powi(i))).collect();
        let fast = multiply(&a, &b, &roots);
        for (m, f) in fast.iter().enumerate() {
            let mut exact = B::zero();
            for i in 0..a.len() {
                if m >= i && m - i < b.len() {
                    exact = exact + a[i] * b[m - i];
                }
            }
            assert!((*f - exact).to_f64().abs() < 1e-34, "m = {m}");
        }
    }
}
