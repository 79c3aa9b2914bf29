//! The real-scalar abstraction shared by every kernel.
//!
//! Kernels are generic over [`Real`]; `f64` is the double-precision
//! comparator and [`MpFloat`] carries the configurable working precision.

use crate::mpfloat::MpFloat;
use num_complex::Complex;
use num_traits::{Num, One, Zero};
use std::fmt::{Debug, Display};
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, RemAssign, SubAssign};

pub trait Real:
    Copy
    + Send
    + Sync
    + 'static
    + Debug
    + Display
    + PartialOrd
    + Num
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + RemAssign
{
    /// Mantissa bits of the representation.
    const MANTISSA_BITS: u32;

    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn from_i64(v: i64) -> Self;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn pi() -> Self;
    /// Exact multiplication by `2^k`.
    fn mul_pow2(self, k: i32) -> Self;
    /// Decimal scientific notation with `digits` significant digits.
    fn to_sci(self, digits: usize) -> String;
    fn parse_decimal(s: &str) -> Option<Self>;

    fn half() -> Self {
        Self::one().mul_pow2(-1)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Decimal digits carried by the representation.
    fn decimal_digits() -> u32 {
        (Self::MANTISSA_BITS as f64 * std::f64::consts::LOG10_2).floor() as u32
    }

    /// Row-major complex product `a (m×k) · b (k×n)`.
    ///
    /// Types may substitute a faster kernel; any override must stay within
    /// the usual normwise bound `|error| ≲ k·u·|a|·|b|`.
    fn cgemm(a: &[Cx<Self>], b: &[Cx<Self>], m: usize, k: usize, n: usize) -> Vec<Cx<Self>> {
        naive_cgemm(a, b, m, k, n)
    }
}

pub fn naive_cgemm<T: Real>(a: &[Cx<T>], b: &[Cx<T>], m: usize, k: usize, n: usize) -> Vec<Cx<T>> {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    let mut c = vec![Cx::new(T::zero(), T::zero()); m * n];
    for i in 0..m {
        let row = &mut c[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip.re.is_zero() && aip.im.is_zero() {
                continue;
            }
            for (cij, bpj) in row.iter_mut().zip(&b[p * n..(p + 1) * n]) {
                *cij += aip * *bpj;
            }
        }
    }
    c
}

pub type Cx<T> = Complex<T>;

impl Real for f64 {
    const MANTISSA_BITS: u32 = 53;

    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn mul_pow2(self, k: i32) -> Self {
        self * 2f64.powi(k)
    }
    fn to_sci(self, digits: usize) -> String {
        format!("{:.*e}", digits.max(1) - 1, self)
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

impl<const N: usize> Zero for MpFloat<N> {
    fn zero() -> Self {
        Self::ZERO
    }
    fn is_zero(&self) -> bool {
        MpFloat::is_zero(self)
    }
}

impl<const N: usize> One for MpFloat<N> {
    fn one() -> Self {
        MpFloat::one()
    }
}

impl<const N: usize> Num for MpFloat<N> {
    type FromStrRadixErr = ParseRealError;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, ParseRealError> {
        if radix != 10 {
            return Err(ParseRealError);
        }
        MpFloat::parse_decimal(s).ok_or(ParseRealError)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseRealError;

impl Display for ParseRealError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("invalid decimal literal")
    }
}

impl std::error::Error for ParseRealError {}

impl<const N: usize> Real for MpFloat<N> {
    const MANTISSA_BITS: u32 = 64 * N as u32;

    fn from_f64(v: f64) -> Self {
        MpFloat::from_f64(v)
    }
    fn to_f64(self) -> f64 {
        MpFloat::to_f64(&self)
    }
    fn from_i64(v: i64) -> Self {
        MpFloat::from_i64(v)
    }
    fn abs(self) -> Self {
        MpFloat::abs(self)
    }
    fn sqrt(self) -> Self {
        MpFloat::sqrt(self)
    }
    fn exp(self) -> Self {
        MpFloat::exp(self)
    }
    fn ln(self) -> Self {
        MpFloat::ln(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        MpFloat::sin_cos(self)
    }
    fn pi() -> Self {
        MpFloat::pi()
    }
    fn mul_pow2(self, k: i32) -> Self {
        MpFloat::mul_pow2(self, k as i64)
    }
    fn to_sci(self, digits: usize) -> String {
        self.to_sci_string(digits)
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        MpFloat::parse_decimal(s)
    }
    fn cgemm(a: &[Cx<Self>], b: &[Cx<Self>], m: usize, k: usize, n: usize) -> Vec<Cx<Self>> {
        if N >= 2 && m * k * n >= 64 && k <= crate::mpfloat::GEMM_MAX_INNER {
            crate::mpfloat::cgemm(a, b, m, k, n)
        } else {
            naive_cgemm(a, b, m, k, n)
        }
    }
}

/// Squared modulus.
#[inline]
pub fn norm_sqr<T: Real>(z: &Cx<T>) -> T {
    z.re * z.re + z.im * z.im
}

#[inline]
pub fn cabs<T: Real>(z: &Cx<T>) -> T {
    norm_sqr(z).sqrt()
}

/// `e^{i x}`.
pub fn cis<T: Real>(x: T) -> Cx<T> {
    let (s, c) = x.sin_cos();
    Cx::new(c, s)
}

pub fn cx<T: Real>(re: f64, im: f64) -> Cx<T> {
    Cx::new(T::from_f64(re), T::from_f64(im))
}

pub fn creal<T: Real>(re: T) -> Cx<T> {
    Cx::new(re, T::zero())
}

pub fn czero<T: Real>() -> Cx<T> {
    Cx::new(T::zero(), T::zero())
}

pub fn cone<T: Real>() -> Cx<T> {
    Cx::new(T::one(), T::zero())
}

/// `z * i`.
#[inline]
pub fn times_i<T: Real>(z: Cx<T>) -> Cx<T> {
    Cx::new(-z.im, z.re)
}

/// Complex square root, principal branch.
pub fn csqrt<T: Real>(z: Cx<T>) -> Cx<T> {
    if z.re.is_zero() && z.im.is_zero() {
        return z;
    }
    let r = cabs(&z);
    let half = T::half();
    if z.re >= T::zero() {
        let t = ((r + z.re) * half).sqrt();
        Cx::new(t, z.im / (t + t))
    } else {
        let t = ((r - z.re) * half).sqrt();
        let re = z.im.abs() / (t + t);
        let im = if z.im < T::zero() { -t } else { t };
        Cx::new(re, im)
    }
}
