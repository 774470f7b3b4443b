//! Scalar types for the generating-polynomial engine.
//!
//! [`Real`] abstracts over `f64` and [`BigFloat`], a binary floating-point
//! number with an `L`-limb (64·L bit) mantissa and a 64-bit exponent. Only
//! the handful of operations the FFT pipeline needs are provided: `+ − ×`,
//! negation, scaling by powers of two, reciprocal and square root (the last
//! two by Newton iteration from an `f64` seed). Rounding is to nearest with
//! ties away from zero; bits below the guard limb are truncated.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::numeric::ldexp;

pub trait Real:
    Copy + Send + Sync + fmt::Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    /// Mantissa precision in bits.
    const BITS: u32;
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn mul_pow2(self, e: i64) -> Self;
    fn recip(self) -> Self;
    fn sqrt(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
}

impl Real for f64 {
    const BITS: u32 = 53;
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn mul_pow2(self, e: i64) -> Self {
        ldexp(self, e)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// Largest supported limb count.
pub const MAX_LIMBS: usize = 4;

#[derive(Clone, Copy, PartialEq, Eq)]
pub struct BigFloat<const L: usize> {
    neg: bool,
    /// Value is `mant · 2^(exp − 64L)`.
    exp: i64,
    /// Little-endian limbs; the top bit of `mant[L-1]` is set unless zero.
    mant: [u64; L],
}

impl<const L: usize> fmt::Debug for BigFloat<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigFloat<{L}>({:e})", self.to_f64())
    }
}

type Buf = [u64; MAX_LIMBS * 2 + 2];

impl<const L: usize> BigFloat<L> {
    pub const ZERO: Self = Self { neg: false, exp: 0, mant: [0; L] };

    pub fn is_zero(&self) -> bool {
        self.mant[L - 1] == 0
    }

    pub fn abs(self) -> Self {
        Self { neg: false, ..self }
    }

    fn cmp_mag(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        self.exp.cmp(&other.exp).then_with(|| {
            for i in (0..L).rev() {
                match self.mant[i].cmp(&other.mant[i]) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }

    /// Rounds a normalized `L+1` limb buffer (`buf[0]` is the guard limb).
    fn round(neg: bool, mut exp: i64, buf: &Buf) -> Self {
        let mut mant = [0u64; L];
        mant.copy_from_slice(&buf[1..=L]);
        if buf[0] >> 63 == 1 {
            let mut carry = true;
            for limb in mant.iter_mut() {
                let (v, c) = limb.overflowing_add(1);
                *limb = v;
                carry = c;
                if !carry {
                    break;
                }
            }
            if carry {
                mant[L - 1] = 1 << 63;
                exp += 1;
            }
        }
        Self { neg, exp, mant }
    }

    /// Loads the mantissa into `buf[1..=L]` shifted right by `shift` bits.
    fn load_shifted(&self, shift: u64, buf: &mut Buf) {
        let width = L + 1;
        buf[..width].fill(0);
        let limb_shift = (shift / 64) as usize;
        let bit_shift = (shift % 64) as u32;
        for i in 0..L {
            // Source limb i sits at buffer position i+1 before shifting.
            let pos = i + 1;
            if pos < limb_shift {
                continue;
            }
            let dst = pos - limb_shift;
            if bit_shift == 0 {
                buf[dst] |= self.mant[i];
            } else {
                buf[dst] |= self.mant[i] >> bit_shift;
                if dst > 0 {
                    buf[dst - 1] |= self.mant[i] << (64 - bit_shift);
                }
            }
        }
    }

    fn add_mag(big: &Self, small: &Self, neg: bool) -> Self {
        let d = (big.exp - small.exp) as u64;
        if d >= 64 * (L as u64 + 1) {
            return Self { neg, ..*big };
        }
        let mut a: Buf = [0; MAX_LIMBS * 2 + 2];
        let mut b: Buf = [0; MAX_LIMBS * 2 + 2];
        big.load_shifted(0, &mut a);
        small.load_shifted(d, &mut b);
        let mut carry = false;
        for i in 0..=L {
            let (s1, c1) = a[i].overflowing_add(b[i]);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            a[i] = s2;
            carry = c1 || c2;
        }
        let mut exp = big.exp;
        if carry {
            for i in 0..=L {
                let next = if i < L { a[i + 1] } else { 1 };
                a[i] = (a[i] >> 1) | (next << 63);
            }
            exp += 1;
        }
        Self::round(neg, exp, &a)
    }

    fn sub_mag(big: &Self, small: &Self, neg: bool) -> Self {
        let d = (big.exp - small.exp) as u64;
        if d >= 64 * (L as u64 + 1) {
            return Self { neg, ..*big };
        }
        let mut a: Buf = [0; MAX_LIMBS * 2 + 2];
        let mut b: Buf = [0; MAX_LIMBS * 2 + 2];
        big.load_shifted(0, &mut a);
        small.load_shifted(d, &mut b);
        let mut borrow = false;
        for i in 0..=L {
            let (s1, b1) = a[i].overflowing_sub(b[i]);
            let (s2, b2) = s1.overflowing_sub(borrow as u64);
            a[i] = s2;
            borrow = b1 || b2;
        }
        debug_assert!(!borrow);
        let mut lz = 0u32;
        let mut top = None;
        for i in (0..=L).rev() {
            if a[i] != 0 {
                top = Some(i);
                lz += a[i].leading_zeros();
                break;
            }
            lz += 64;
        }
        if top.is_none() {
            return Self::ZERO;
        }
        let limb_shift = (lz / 64) as usize;
        let bit_shift = lz % 64;
        if lz > 0 {
            for i in (0..=L).rev() {
                let src = i as isize - limb_shift as isize;
                let hi = if src >= 0 { a[src as usize] } else { 0 };
                let lo = if src >= 1 { a[src as usize - 1] } else { 0 };
                a[i] = if bit_shift == 0 { hi } else { (hi << bit_shift) | (lo >> (64 - bit_shift)) };
            }
        }
        Self::round(neg, big.exp - lz as i64, &a)
    }

    fn add_signed(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (big, small) = match self.cmp_mag(&other) {
            Ordering::Less => (other, self),
            _ => (self, other),
        };
        if self.neg == other.neg {
            Self::add_mag(&big, &small, big.neg)
        } else if big.cmp_mag(&small) == Ordering::Equal {
            Self::ZERO
        } else {
            Self::sub_mag(&big, &small, big.neg)
        }
    }

    fn mul_impl(self, other: Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        let mut p: Buf = [0; MAX_LIMBS * 2 + 2];
        for i in 0..L {
            let mut carry: u128 = 0;
            for j in 0..L {
                let t = p[i + j] as u128 + self.mant[i] as u128 * other.mant[j] as u128 + carry;
                p[i + j] = t as u64;
                carry = t >> 64;
            }
            p[i + L] = carry as u64;
        }
        let mut exp = self.exp + other.exp;
        if p[2 * L - 1] >> 63 == 0 {
            for i in (0..2 * L).rev() {
                let lo = if i > 0 { p[i - 1] >> 63 } else { 0 };
                p[i] = (p[i] << 1) | lo;
            }
            exp -= 1;
        }
        let mut buf: Buf = [0; MAX_LIMBS * 2 + 2];
        buf[..=L].copy_from_slice(&p[L - 1..2 * L]);
        Self::round(self.neg != other.neg, exp, &buf)
    }

    fn newton_steps() -> usize {
        // Seeds carry ~50 correct bits and each step doubles them.
        let mut bits = 50u32;
        let mut steps = 1;
        while bits < 64 * L as u32 + 8 {
            bits *= 2;
            steps += 1;
        }
        steps
    }
}

impl<const L: usize> Add for BigFloat<L> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.add_signed(rhs)
    }
}

impl<const L: usize> Sub for BigFloat<L> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.add_signed(-rhs)
    }
}

impl<const L: usize> Mul for BigFloat<L> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_impl(rhs)
    }
}

impl<const L: usize> Neg for BigFloat<L> {
    type Output = Self;
    fn neg(self) -> Self {
        if self.is_zero() {
            self
        } else {
            Self { neg: !self.neg, ..self }
        }
    }
}

impl<const L: usize> Real for BigFloat<L> {
    const BITS: u32 = 64 * L as u32;

    fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "BigFloat::from_f64 on {x}");
        if x == 0.0 {
            return Self::ZERO;
        }
        let bits = x.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 { (frac, -1074) } else { (frac | (1 << 52), biased - 1075) };
        let lz = m.leading_zeros();
        let mut mant = [0u64; L];
        mant[L - 1] = m << lz;
        Self { neg: x < 0.0, exp: e - lz as i64 + 64, mant }
    }

    fn to_f64(self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let v = ldexp(self.mant[L - 1] as f64, self.exp - 64);
        if self.neg {
            -v
        } else {
            v
        }
    }

    fn mul_pow2(self, e: i64) -> Self {
        if self.is_zero() {
            self
        } else {
            Self { exp: self.exp + e, ..self }
        }
    }

    fn recip(self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        let scaled = Self { exp: 0, ..self };
        let two = Self::from_f64(2.0);
        let mut y = Self::from_f64(1.0 / scaled.to_f64());
        for _ in 0..Self::newton_steps() {
            y = y * (two - scaled * y);
        }
        y.mul_pow2(-self.exp)
    }

    fn sqrt(self) -> Self {
        assert!(!self.neg, "square root of a negative number");
        if self.is_zero() {
            return self;
        }
        let odd = self.exp.rem_euclid(2);
        let scaled = Self { exp: odd, ..self };
        let three = Self::from_f64(3.0);
        let mut y = Self::from_f64(1.0 / scaled.to_f64().sqrt());
        for _ in 0..Self::newton_steps() {
            y = (y * (three - scaled * y * y)).mul_pow2(-1);
        }
        (scaled * y).mul_pow2((self.exp - odd) / 2)
    }
}
