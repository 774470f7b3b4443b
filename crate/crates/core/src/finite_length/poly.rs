//! Generating-polynomial engine.
//!
//! Row `u` is carried as `P_u(x) = Σ_{r=1}^{u} Q(u, r) x^{r−1}` plus the
//! absorbed mass `Q(u, 0)` as a scalar. One decoding step maps it to
//!
//! ```text
//! G(x) = (q x + c)^{u−1} · P_u(x / (q x + c)),   c = 1 − q_u,
//! P_{u−1}(x) = (G(x) − G(0)) / x,   Q(u−1, 0) = Q(u, 0) + G(0).
//! ```
//!
//! Per step:
//!
//! 1. Compose with the Möbius map in coefficient space. Reversing `P_u`
//!    gives `R(y) = Σ_m Q(u, u−m) y^m`, and `T(z) = R(q + c z)` satisfies
//!    `G(x) = x^{u−1} T(1/x)`. `T` is built by divide and conquer from the
//!    powers `(q + c z)^{2^j}`. Those powers have nonnegative coefficients
//!    summing to one, so every product is free of cancellation.
//! 2. Evaluate `G` at the nodes `x̂_i = ω^{2i+1}`, `ω = exp(iπ/N)`, by a
//!    twisted FFT. These nodes form a geometric progression, and
//!    `q x̂ + c` never vanishes on them.
//! 3. Subtract `G(0)`, divide by `x̂_i`, and interpolate back with the
//!    inverse twisted FFT.
//!
//! A step costs `O(u log² u)`. Row sums are checked for drift after every
//! step.

use crate::bigfloat::{BigFloat, Real};
use crate::degree_dist::DegreeDistribution;
use crate::error::{Error, Result};
use crate::fft::{fft, multiply, Complex, RootTable};
use crate::sampler::CodeParameters;

use super::{precompute_q, Engine, FiniteLengthResult, QTransferParams, QVector};

pub const DEFAULT_PRECISION_BITS: u32 = 128;
/// Row-sum drift beyond which the result is rejected.
pub const PRECISION_LOSS_THRESHOLD: f64 = 1e-4;

const LEAF: usize = 32;

pub fn dp_poly(dist: &DegreeDistribution, params: &CodeParameters, precision_bits: u32) -> Result<FiniteLengthResult> {
    dp_poly_with(dist, params, precision_bits, false)
}

pub fn dp_poly_with(
    dist: &DegreeDistribution,
    params: &CodeParameters,
    precision_bits: u32,
    full_table: bool,
) -> Result<FiniteLengthResult> {
    let tp = precompute_q(dist, params)?;
    match precision_bits {
        1..=53 => run::<f64>(&tp, full_table),
        54..=128 => run::<BigFloat<2>>(&tp, full_table),
        129..=192 => run::<BigFloat<3>>(&tp, full_table),
        193..=256 => run::<BigFloat<4>>(&tp, full_table),
        _ => Err(Error::UnsupportedPrecision(precision_bits)),
    }
}

/// `(p, 1 − p)` with the smaller of the two taken from its accurate source
/// and the other as its exact complement, so the pair sums to one.
fn pair<R: Real>(p: f64, ln_one_minus_p: f64) -> (R, R) {
    if p <= 0.5 {
        let pr = R::from_f64(p);
        (pr, R::one() - pr)
    } else {
        let cr = R::from_f64(ln_one_minus_p.exp());
        (R::one() - cr, cr)
    }
}

/// Coefficients of `(a + b z)^h`.
fn linear_power<R: Real>(a: R, b: R, h: usize, roots: &RootTable<R>) -> Vec<R> {
    let mut result = vec![R::one()];
    let mut base = vec![a, b];
    let mut e = h;
    while e > 0 {
        if e & 1 == 1 {
            result = multiply(&result, &base, roots);
        }
        e >>= 1;
        if e > 0 {
            base = multiply(&base, &base, roots);
        }
    }
    result
}

struct Thinner<'a, R> {
    q: R,
    c: R,
    /// `pows[j]` holds `(q + c z)^{2^j}`.
    pows: Vec<Vec<R>>,
    roots: &'a RootTable<R>,
}

impl<'a, R: Real> Thinner<'a, R> {
    fn new(q: R, c: R, max_len: usize, roots: &'a RootTable<R>) -> Self {
        let mut pows = vec![vec![q, c]];
        while max_len > LEAF && (1usize << pows.len()) < max_len {
            let last = pows.last().expect("nonempty");
            let next = multiply(last, last, roots);
            pows.push(next);
        }
        Self { q, c, pows, roots }
    }

    /// `Σ_m a[m] (q + c z)^m`.
    fn apply(&self, a: &[R]) -> Vec<R> {
        let n = a.len();
        if n <= LEAF {
            let mut out = vec![a[n - 1]];
            for &coef in a[..n - 1].iter().rev() {
                let mut next = vec![R::zero(); out.len() + 1];
                for (i, &v) in out.iter().enumerate() {
                    next[i] = next[i] + self.q * v;
                    next[i + 1] = self.c * v;
                }
                next[0] = next[0] + coef;
                out = next;
            }
            return out;
        }
        let j = (usize::BITS - 1 - (n - 1).leading_zeros()) as usize;
        let h = 1usize << j;
        let lo = self.apply(&a[..h]);
        let hi = self.apply(&a[h..]);
        let mut out = multiply(&self.pows[j], &hi, self.roots);
        for (o, &l) in out.iter_mut().zip(&lo) {
            *o = *o + l;
        }
        out
    }
}

fn run<R: Real>(tp: &QTransferParams, keep: bool) -> Result<FiniteLengthResult> {
    let k = tp.k;
    let order = (2 * k + 2).next_power_of_two().max(4) * 2;
    let roots = RootTable::<R>::new(order);

    let (p1, c1) = pair::<R>(tp.p1, (-tp.p1).ln_1p());
    let first = linear_power(c1, p1, k, &roots);
    let mut absorbed = first[0];
    let mut poly: Vec<R> = first[1..].to_vec();
    let mut table = keep.then(Vec::new);
    let mut max_dev = drift(&poly, absorbed);

    for u in (2..=k).rev() {
        if let Some(t) = table.as_mut() {
            t.push(snapshot(u, &poly, absorbed));
        }
        let (q, c) = pair::<R>(tp.q[u], tp.ln_one_minus_q[u]);
        let reversed: Vec<R> = poly.iter().rev().copied().collect();
        let t = Thinner::new(q, c, u, &roots).apply(&reversed);
        // G(x) = Σ_r g_r x^r with g_r = t_{u−1−r}; g_0 is the newly absorbed mass.
        let g: Vec<R> = t.iter().rev().copied().collect();
        let g0 = g[0];

        let n = u.next_power_of_two();
        let shift = -(n.trailing_zeros() as i64);
        let mut buf = vec![Complex::zero(); n];
        for (r, &coef) in g.iter().enumerate() {
            buf[r] = roots.root(r, 2 * n).scale(coef);
        }
        fft(&mut buf, &roots, true);
        for (i, v) in buf.iter_mut().enumerate() {
            *v = (*v - Complex::real(g0)) * roots.root(2 * i + 1, 2 * n).conj();
        }
        fft(&mut buf, &roots, false);
        poly = (0..u - 1).map(|r| (buf[r] * roots.root(r, 2 * n).conj()).re.mul_pow2(shift)).collect();
        absorbed = absorbed + g0;

        let dev = drift(&poly, absorbed);
        max_dev = max_dev.max(dev);
        if !(dev <= PRECISION_LOSS_THRESHOLD) {
            return Err(Error::PrecisionLoss { deviation: dev, threshold: PRECISION_LOSS_THRESHOLD });
        }
    }
    if let Some(t) = table.as_mut() {
        t.push(snapshot(1, &poly, absorbed));
    }
    Ok(FiniteLengthResult {
        p_error: absorbed.to_f64().clamp(0.0, 1.0),
        engine: Engine::Poly,
        row_sum_max_dev: max_dev,
        full_table: table,
    })
}

fn drift<R: Real>(poly: &[R], absorbed: R) -> f64 {
    let total = poly.iter().fold(absorbed, |s, &v| s + v);
    (total - R::one()).to_f64().abs()
}

fn snapshot<R: Real>(u: usize, poly: &[R], absorbed: R) -> QVector {
    let mut probs = Vec::with_capacity(poly.len() + 1);
    probs.push(absorbed.to_f64());
    probs.extend(poly.iter().map(|v| v.to_f64()));
    QVector { u, probs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_length::{dp_naive, dp_naive_with, NaiveOptions};

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-12)
    }

    #[test]
    fn worked_example() {
        let d = DegreeDistribution::validate(&[(1, 0.5), (2, 0.5)], 3).unwrap();
        let p = CodeParameters::new(3, 3.0).unwrap();
        for bits in [53, 128, 192, 256] {
            let r = dp_poly_with(&d, &p, bits, true).unwrap();
            assert!((r.p_error - 0.40625).abs() < 1e-9, "bits = {bits}");
            let rows = r.full_table.unwrap();
            assert!((rows[1].probs[2] - 0.40625).abs() < 1e-12);
        }
    }

    #[test]
    fn degree_one_only() {
        let d = DegreeDistribution::validate(&[(1, 1.0)], 10).unwrap();
        let r = dp_poly(&d, &CodeParameters::new(10, 10.0).unwrap(), 128).unwrap();
        assert!(r.p_error.abs() < 1e-12);
        let r = dp_poly(&d, &CodeParameters::new(10, 7.0).unwrap(), 128).unwrap();
        assert!((r.p_error - (1.0 - 0.7f64.powi(10))).abs() < 1e-12);
    }

    #[test]
    fn matches_naive_tables() {
        let k = 70;
        let d = DegreeDistribution::soliton_robust(k, 0.1, 0.5).unwrap();
        let p = CodeParameters::new(k, 77.0).unwrap();
        let naive = dp_naive_with(&d, &p, &NaiveOptions { full_table: true, ..Default::default() }).unwrap();
        let poly = dp_poly_with(&d, &p, 128, true).unwrap();
        assert!(rel_close(poly.p_error, naive.p_error, 1e-9));
        for (a, b) in poly.full_table.unwrap().iter().zip(naive.full_table.unwrap().iter()) {
            assert_eq!(a.u, b.u);
            for (x, y) in a.probs.iter().zip(&b.probs) {
                assert!((x - y).abs() < 1e-12, "u = {}", a.u);
            }
        }
        assert!(poly.row_sum_max_dev < 1e-12);
    }

    #[test]
    fn f64_precision_also_agrees() {
        let k = 120;
        let d = DegreeDistribution::soliton_ideal(k).unwrap();
        let p = CodeParameters::new(k, 132.0).unwrap();
        let naive = dp_naive(&d, &p).unwrap();
        let poly = dp_poly(&d, &p, 53).unwrap();
        assert!(rel_close(poly.p_error, naive.p_error, 1e-6));
    }

    #[test]
    fn nothing_received_and_single_input() {
        let d = DegreeDistribution::soliton_ideal(40).unwrap();
        assert_eq!(dp_poly(&d, &CodeParameters::new(40, 0.0).unwrap(), 128).unwrap().p_error, 1.0);
        let d1 = DegreeDistribution::validate(&[(1, 1.0)], 1).unwrap();
        let r = dp_poly(&d1, &CodeParameters::new(1, 0.25).unwrap(), 128).unwrap();
        assert!((r.p_error - 0.75).abs() < 1e-15);
    }

    #[test]
    fn precision_validation() {
        let d = DegreeDistribution::soliton_ideal(4).unwrap();
        let p = CodeParameters::new(4, 4.0).unwrap();
        assert_eq!(dp_poly(&d, &p, 0), Err(Error::UnsupportedPrecision(0)));
        assert_eq!(dp_poly(&d, &p, 512), Err(Error::UnsupportedPrecision(512)));
    }
}
