//! Fixed-width multi-limb binary floating point.
//!
//! `MpFloat<N>` stores a sign, an unbounded (`i64`) binary exponent and an
//! `N`-limb normalized mantissa, giving `64 * N` bits of significand. All
//! operations are pure integer arithmetic, so results are bit-identical on
//! every platform and independent of thread count. Basic operations round to
//! nearest using one guard limb; division, square root and the elementary
//! functions are accurate to a few units in the last place.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};
use std::sync::OnceLock;

mod gemm;
pub(crate) use gemm::{cgemm, MAX_INNER as GEMM_MAX_INNER};

/// Multi-limb float with `64 * N` mantissa bits.
///
/// Value is `(-1)^neg * (mant / 2^(64N)) * 2^exp` with the top bit of
/// `mant[N-1]` set, or exactly zero when every limb is zero.
#[derive(Clone, Copy)]
pub struct MpFloat<const N: usize> {
    mant: [u64; N],
    exp: i64,
    neg: bool,
}

/// Widest supported mantissa, in limbs.
pub const MAX_LIMBS: usize = 24;

/// Limb count of the cached constants; every supported width rounds from it.
const CONST_LIMBS: usize = 20;

impl<const N: usize> MpFloat<N> {
    pub const ZERO: Self = Self {
        mant: [0; N],
        exp: 0,
        neg: false,
    };

    pub const BITS: u32 = 64 * N as u32;

    const WIDTH_OK: () = assert!(N >= 1 && N <= MAX_LIMBS, "unsupported limb count");

    #[inline]
    pub fn is_zero(&self) -> bool {
        #[allow(clippy::let_unit_value)]
        let _ = Self::WIDTH_OK;
        self.mant[N - 1] == 0
    }

    #[inline]
    pub fn is_sign_negative(&self) -> bool {
        self.neg
    }

    pub fn one() -> Self {
        let mut mant = [0u64; N];
        mant[N - 1] = 1 << 63;
        Self {
            mant,
            exp: 1,
            neg: false,
        }
    }

    /// Binary exponent such that `2^(e-1) <= |x| < 2^e`; `None` for zero.
    pub fn exponent(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exp)
        }
    }

    #[inline]
    pub fn abs(self) -> Self {
        Self { neg: false, ..self }
    }

    /// Multiplies by `2^k` exactly.
    #[inline]
    pub fn mul_pow2(self, k: i64) -> Self {
        if self.is_zero() {
            self
        } else {
            Self {
                exp: self.exp + k,
                ..self
            }
        }
    }

    pub fn from_u64(v: u64) -> Self {
        if v == 0 {
            return Self::ZERO;
        }
        let lz = v.leading_zeros();
        let mut mant = [0u64; N];
        mant[N - 1] = v << lz;
        Self {
            mant,
            exp: 64 - lz as i64,
            neg: false,
        }
    }

    pub fn from_i64(v: i64) -> Self {
        let r = Self::from_u64(v.unsigned_abs());
        if v < 0 {
            -r
        } else {
            r
        }
    }

    /// Exact conversion; non-finite input maps to zero (callers validate first).
    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 || !v.is_finite() {
            return Self::ZERO;
        }
        let bits = v.to_bits();
        let neg = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        // v = m * 2^e
        let mut r = Self::from_u64(m);
        r.exp += e;
        r.neg = neg;
        r
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let top = self.mant[N - 1];
        // 53 significant bits with round-to-nearest via the f64 conversion
        let mut v = top as f64;
        if N > 1 && (top & 0x7ff) == 0x400 && self.mant[N - 2] != 0 {
            // sticky bits below a tie push the rounding up
            v = (top | 1) as f64;
        }
        let e = self.exp - 64;
        let r = if e > 1100 {
            f64::INFINITY
        } else if e < -1200 {
            0.0
        } else {
            scale_f64(v, e as i32)
        };
        if self.neg {
            -r
        } else {
            r
        }
    }

    /// Widens or narrows to another limb count with round-to-nearest.
    pub fn convert<const M: usize>(&self) -> MpFloat<M> {
        if self.is_zero() {
            return MpFloat::<M>::ZERO;
        }
        let mut mant = [0u64; M];
        let mut guard = 0u64;
        for (k, limb) in mant.iter_mut().enumerate().rev() {
            let src = k as isize + N as isize - M as isize;
            if src >= 0 {
                *limb = self.mant[src as usize];
            }
        }
        let gsrc = N as isize - M as isize - 1;
        if gsrc >= 0 {
            guard = self.mant[gsrc as usize];
        }
        let mut r = MpFloat::<M> {
            mant,
            exp: self.exp,
            neg: self.neg,
        };
        if guard >> 63 == 1 {
            r.round_up();
        }
        r
    }

    #[inline]
    fn round_up(&mut self) {
        for limb in self.mant.iter_mut() {
            let (v, c) = limb.overflowing_add(1);
            *limb = v;
            if !c {
                return;
            }
        }
        // mantissa overflowed to zero: value is exactly 2^exp
        self.mant[N - 1] = 1 << 63;
        self.exp += 1;
    }

    #[inline]
    fn cmp_abs(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        match self.exp.cmp(&other.exp) {
            Ordering::Equal => {}
            o => return o,
        }
        for k in (0..N).rev() {
            match self.mant[k].cmp(&other.mant[k]) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        Ordering::Equal
    }

    /// `|a| >= |b|`, both nonzero; returns `sign * (|a| ± |b|)`.
    #[inline]
    fn add_mag(a: &Self, b: &Self, subtract: bool, neg: bool) -> Self {
        let d = (a.exp - b.exp) as u64;
        if d > 64 * N as u64 + 1 {
            return Self { neg, ..*a };
        }
        // b shifted right by d bits in an N+1 limb layout; limb 0 is the guard
        let q = (d / 64) as usize;
        let r = (d % 64) as u32;
        let wide = |i: usize| -> u64 {
            if i >= 1 && i <= N {
                b.mant[i - 1]
            } else {
                0
            }
        };
        let mut bs = [0u64; MAX_LIMBS + 1];
        for (i, slot) in bs.iter_mut().enumerate().take(N + 1) {
            *slot = if r == 0 {
                wide(i + q)
            } else {
                (wide(i + q) >> r) | (wide(i + q + 1) << (64 - r))
            };
        }
        let gb = bs[0];
        let bs = &bs[1..];
        let mut out = [0u64; N];
        let mut exp = a.exp;
        let mut guard;
        if !subtract {
            let (g, c0) = 0u64.overflowing_add(gb);
            guard = g;
            let mut carry = c0 as u64;
            for k in 0..N {
                let (s1, c1) = a.mant[k].overflowing_add(bs[k]);
                let (s2, c2) = s1.overflowing_add(carry);
                out[k] = s2;
                carry = (c1 as u64) + (c2 as u64);
            }
            if carry != 0 {
                guard = (guard >> 1) | (out[0] << 63);
                for k in 0..N - 1 {
                    out[k] = (out[k] >> 1) | (out[k + 1] << 63);
                }
                out[N - 1] = (out[N - 1] >> 1) | (1 << 63);
                exp += 1;
            }
        } else {
            let (g, b0) = 0u64.overflowing_sub(gb);
            guard = g;
            let mut borrow = b0 as u64;
            for k in 0..N {
                let (s1, c1) = a.mant[k].overflowing_sub(bs[k]);
                let (s2, c2) = s1.overflowing_sub(borrow);
                out[k] = s2;
                borrow = (c1 as u64) + (c2 as u64);
            }
            // normalize left
            let mut top = N;
            while top > 0 && out[top - 1] == 0 {
                top -= 1;
            }
            if top == 0 && guard == 0 {
                return Self::ZERO;
            }
            let lz: u64 = if top == 0 {
                64 * N as u64 + guard.leading_zeros() as u64
            } else {
                64 * (N - top) as u64 + out[top - 1].leading_zeros() as u64
            };
            if lz > 0 {
                let mut wide = [0u64; MAX_LIMBS + 1];
                wide[0] = guard;
                wide[1..=N].copy_from_slice(&out);
                let ls = (lz / 64) as usize;
                let rs = (lz % 64) as u32;
                let mut shifted = [0u64; MAX_LIMBS + 1];
                for i in (0..=N).rev() {
                    if i < ls {
                        break;
                    }
                    let hi = wide[i - ls];
                    let v = if rs == 0 {
                        hi
                    } else {
                        let lo = if i >= ls + 1 { wide[i - ls - 1] } else { 0 };
                        (hi << rs) | (lo >> (64 - rs))
                    };
                    shifted[i] = v;
                }
                guard = shifted[0];
                out.copy_from_slice(&shifted[1..=N]);
                exp -= lz as i64;
            }
        }
        let mut res = Self {
            mant: out,
            exp,
            neg,
        };
        if guard >> 63 == 1 {
            res.round_up();
        }
        res
    }

    #[inline]
    fn add_impl(self, rhs: Self, negate_rhs: bool) -> Self {
        let rneg = rhs.neg ^ negate_rhs;
        if rhs.is_zero() {
            return self;
        }
        if self.is_zero() {
            return Self { neg: rneg, ..rhs };
        }
        let subtract = self.neg != rneg;
        match self.cmp_abs(&rhs) {
            Ordering::Less => Self::add_mag(&rhs, &self, subtract, rneg),
            Ordering::Equal if subtract => Self::ZERO,
            _ => Self::add_mag(&self, &rhs, subtract, self.neg),
        }
    }

    #[inline]
    fn mul_impl(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        // product columns below N-2 only feed the discarded limbs; skip them
        let mut prod = [0u64; 2 * MAX_LIMBS];
        let lo_col = N.saturating_sub(2);
        for i in 0..N {
            let mut carry: u128 = 0;
            let ai = self.mant[i] as u128;
            let jstart = lo_col.saturating_sub(i);
            for j in jstart..N {
                let t = ai * rhs.mant[j] as u128 + prod[i + j] as u128 + carry;
                prod[i + j] = t as u64;
                carry = t >> 64;
            }
            prod[i + N] = carry as u64;
        }
        let mut exp = self.exp + rhs.exp;
        let mut mant = [0u64; N];
        let guard;
        if prod[2 * N - 1] >> 63 == 0 {
            // shift left by one
            for k in 0..N {
                let idx = N + k;
                mant[k] = (prod[idx] << 1) | (prod[idx - 1] >> 63);
            }
            guard = (prod[N - 1] << 1) | if N >= 2 { prod[N - 2] >> 63 } else { 0 };
            exp -= 1;
        } else {
            mant.copy_from_slice(&prod[N..2 * N]);
            guard = prod[N - 1];
        }
        let mut r = Self {
            mant,
            exp,
            neg: self.neg ^ rhs.neg,
        };
        if guard >> 63 == 1 {
            r.round_up();
        }
        r
    }

    /// Division by a small positive integer, correctly truncated then rounded.
    pub fn div_u64(self, d: u64) -> Self {
        assert!(d != 0, "division by zero");
        if self.is_zero() {
            return self;
        }
        // long division over N limbs plus two extra quotient limbs
        let mut q = [0u64; MAX_LIMBS + 2];
        let mut rem: u128 = 0;
        let total = N + 2;
        for i in (0..total).rev() {
            let limb = if i >= 2 { self.mant[i - 2] } else { 0 };
            let cur = (rem << 64) | limb as u128;
            q[i] = (cur / d as u128) as u64;
            rem = cur % d as u128;
        }
        // normalize: find leading limb
        let mut top = total;
        while q[top - 1] == 0 {
            top -= 1;
        }
        let lz = q[top - 1].leading_zeros();
        let shift_bits = 64 * (total - top) as i64 + lz as i64;
        let mut mant = [0u64; N];
        let mut guard = 0u64;
        // bit position of the leading one counted from the bottom of q
        let get = |bitpos: i64| -> u64 {
            // 64-bit window whose lowest bit is at bitpos
            if bitpos <= -64 {
                return 0;
            }
            let li = bitpos.div_euclid(64);
            let off = bitpos.rem_euclid(64) as u32;
            let lo = if li >= 0 && (li as usize) < total { q[li as usize] } else { 0 };
            let hi = if li + 1 >= 0 && ((li + 1) as usize) < total {
                q[(li + 1) as usize]
            } else {
                0
            };
            if off == 0 {
                lo
            } else {
                (lo >> off) | (hi << (64 - off))
            }
        };
        let top_bit = 64 * total as i64 - shift_bits; // number of significant bits
        for k in 0..N {
            mant[N - 1 - k] = get(top_bit - 64 * (k as i64 + 1));
        }
        guard |= get(top_bit - 64 * (N as i64 + 1));
        // q = mant * 2^128 / d, so self / d = q * 2^(exp - 64 * total)
        let mut r = Self {
            mant,
            exp: self.exp - (64 * total as i64) + top_bit,
            neg: self.neg,
        };
        if guard >> 63 == 1 {
            r.round_up();
        }
        r
    }

    pub fn recip(self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        // work on the mantissa in [1/2, 1)
        let m = Self {
            exp: 0,
            neg: false,
            ..self
        };
        let mut x = Self::from_f64(1.0 / m.to_f64());
        let one = Self::one();
        let mut bits = 50u32;
        loop {
            let e = one - m * x;
            x = x + x * e;
            bits *= 2;
            if bits > Self::BITS + 8 {
                break;
            }
        }
        // one extra correction step for the last ulps
        let e = one - m * x;
        x = x + x * e;
        x.exp -= self.exp;
        x.neg = self.neg;
        x
    }

    pub fn sqrt(self) -> Self {
        if self.is_zero() {
            return self;
        }
        assert!(!self.neg, "square root of negative number");
        // scale to an even exponent
        let half_e = self.exp.div_euclid(2);
        let m = Self {
            exp: self.exp - 2 * half_e,
            ..self
        };
        let three = Self::from_u64(3);
        let mut y = Self::from_f64(1.0 / m.to_f64().sqrt());
        let mut bits = 50u32;
        loop {
            y = (y * (three - m * y * y)).mul_pow2(-1);
            bits *= 2;
            if bits > Self::BITS + 8 {
                break;
            }
        }
        let mut s = m * y;
        // Newton correction on s itself
        s = s + (y * (m - s * s)).mul_pow2(-1);
        s.exp += half_e;
        s
    }

    pub fn pi() -> Self {
        static PI: OnceLock<MpFloat<CONST_LIMBS>> = OnceLock::new();
        PI.get_or_init(|| {
            // Machin: pi = 16 atan(1/5) - 4 atan(1/239)
            let a = atan_inv::<CONST_LIMBS>(5).mul_pow2(4);
            let b = atan_inv::<CONST_LIMBS>(239).mul_pow2(2);
            a - b
        })
        .convert()
    }

    pub fn ln2() -> Self {
        static LN2: OnceLock<MpFloat<CONST_LIMBS>> = OnceLock::new();
        LN2.get_or_init(|| atanh_inv::<CONST_LIMBS>(3).mul_pow2(1))
            .convert()
    }

    /// Number of halvings applied before a Taylor series.
    fn reduction_steps() -> i64 {
        ((Self::BITS as f64).sqrt() / 2.0).ceil() as i64
    }

    /// `exp(x) - 1` for `|x| <= 1`, relative accuracy preserved near zero.
    fn expm1_small(x: Self) -> Self {
        if x.is_zero() {
            return x;
        }
        let s = Self::reduction_steps();
        let r = x.mul_pow2(-s);
        // Taylor: r + r^2/2! + ...
        let mut term = r;
        let mut sum = r;
        let mut k = 1u64;
        let eps_exp = sum.exp - Self::BITS as i64 - 4;
        loop {
            k += 1;
            term = (term * r).div_u64(k);
            if term.is_zero() || term.exp < eps_exp {
                break;
            }
            sum += term;
        }
        let two = Self::from_u64(2);
        for _ in 0..s {
            sum = sum * (sum + two);
        }
        sum
    }

    pub fn exp(self) -> Self {
        if self.is_zero() {
            return Self::one();
        }
        let xf = self.to_f64();
        assert!(xf.abs() < 4.0e18, "exp argument out of range");
        let ln2 = Self::ln2();
        let k = (xf / std::f64::consts::LN_2).round() as i64;
        let r = self - ln2 * Self::from_i64(k);
        let e = Self::one() + Self::expm1_small(r);
        e.mul_pow2(k)
    }

    pub fn ln(self) -> Self {
        assert!(!self.neg && !self.is_zero(), "logarithm of non-positive number");
        // x = m * 2^e with m in [1/sqrt2, sqrt2)
        let mut e = self.exp;
        let mut m = Self {
            exp: 0,
            ..self
        };
        if m.to_f64() < std::f64::consts::FRAC_1_SQRT_2 {
            m.exp += 1;
            e -= 1;
        }
        // ln m = 2 atanh(z), z = (m-1)/(m+1)
        let one = Self::one();
        let z = (m - one) / (m + one);
        let lnm = if z.is_zero() {
            Self::ZERO
        } else {
            let z2 = z * z;
            let mut pow = z;
            let mut sum = z;
            let mut k = 1u64;
            let eps_exp = z.exp - Self::BITS as i64 - 4;
            loop {
                k += 2;
                pow = pow * z2;
                let term = pow.div_u64(k);
                if term.is_zero() || term.exp < eps_exp {
                    break;
                }
                sum += term;
            }
            sum.mul_pow2(1)
        };
        lnm + Self::ln2() * Self::from_i64(e)
    }

    /// `(sin x, cos x)`.
    pub fn sin_cos(self) -> (Self, Self) {
        if self.is_zero() {
            return (Self::ZERO, Self::one());
        }
        let xf = self.to_f64();
        assert!(xf.abs() < 1.0e15, "trigonometric argument out of range");
        let half_pi = Self::pi().mul_pow2(-1);
        let k = (xf / std::f64::consts::FRAC_PI_2).round() as i64;
        let r = self - half_pi * Self::from_i64(k);
        // sin and versine (1 - cos) of r / 2^s by Taylor, then doubling
        let s = Self::reduction_steps();
        let a = r.mul_pow2(-s);
        let a2 = a * a;
        let mut sin = a;
        let mut vers = a2.mul_pow2(-1);
        {
            let mut term = a;
            let mut k2 = 1u64;
            let eps_exp = a.exp - Self::BITS as i64 - 4;
            loop {
                term = -(term * a2).div_u64((k2 + 1) * (k2 + 2));
                k2 += 2;
                if term.is_zero() || term.exp < eps_exp {
                    break;
                }
                sin += term;
            }
            let mut term = vers;
            let mut k2 = 2u64;
            let eps_exp = vers.exp - Self::BITS as i64 - 4;
            loop {
                term = -(term * a2).div_u64((k2 + 1) * (k2 + 2));
                k2 += 2;
                if term.is_zero() || term.exp < eps_exp {
                    break;
                }
                vers += term;
            }
        }
        let one = Self::one();
        for _ in 0..s {
            let new_sin = (sin * (one - vers)).mul_pow2(1);
            vers = (sin * sin).mul_pow2(1);
            sin = new_sin;
        }
        let cos = one - vers;
        match k.rem_euclid(4) {
            0 => (sin, cos),
            1 => (cos, -sin),
            2 => (-sin, -cos),
            _ => (-cos, sin),
        }
    }

    /// Largest integer not greater than `self`, as `i64` (saturating).
    pub fn floor_i64(self) -> i64 {
        if self.is_zero() || self.exp <= 0 {
            return if self.neg && !self.is_zero() { -1 } else { 0 };
        }
        if self.exp > 62 {
            return if self.neg { i64::MIN } else { i64::MAX };
        }
        let ip = self.mant[N - 1] >> (64 - self.exp);
        let frac_nonzero = (self.mant[N - 1] << self.exp) != 0
            || self.mant[..N - 1].iter().any(|&l| l != 0);
        let ip = ip as i64;
        if self.neg {
            if frac_nonzero {
                -ip - 1
            } else {
                -ip
            }
        } else {
            ip
        }
    }

    /// Decimal scientific notation with `digits` significant digits.
    pub fn to_sci_string(&self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.is_zero() {
            return format!("0.{}e0", "0".repeat(digits - 1));
        }
        let a = self.abs();
        // estimate decimal exponent from the binary one
        let mut k = ((a.exp - 1) as f64 * std::f64::consts::LOG10_2).floor() as i64;
        let ten = Self::from_u64(10);
        let mut y = a * pow_int(ten, -k);
        if y >= ten {
            y = y.div_u64(10);
            k += 1;
        }
        let one = Self::one();
        if y < one {
            y = y * ten;
            k -= 1;
        }
        let mut ds: Vec<u8> = Vec::with_capacity(digits + 2);
        for _ in 0..digits + 1 {
            let d = y.floor_i64().clamp(0, 9);
            ds.push(d as u8);
            y = (y - Self::from_i64(d)) * ten;
        }
        // round half up on the extra digit
        let last = ds.pop().unwrap();
        if last >= 5 {
            let mut i = ds.len();
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    ds.pop();
                    k += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
        let mut s = String::with_capacity(digits + 8);
        if self.neg {
            s.push('-');
        }
        s.push((b'0' + ds[0]) as char);
        if digits > 1 {
            s.push('.');
            for d in &ds[1..] {
                s.push((b'0' + d) as char);
            }
        }
        s.push('e');
        s.push_str(&k.to_string());
        s
    }

    /// Parses decimal notation (`-1.25e-3`, `42`, `.5`).
    pub fn parse_decimal(s: &str) -> Option<Self> {
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (mantissa, exp10) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], body[i + 1..].parse::<i64>().ok()?),
            None => (body, 0),
        };
        let (ip, fp) = match mantissa.find('.') {
            Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
            None => (mantissa, ""),
        };
        if ip.is_empty() && fp.is_empty() {
            return None;
        }
        let ten = Self::from_u64(10);
        let mut v = Self::ZERO;
        for c in ip.chars().chain(fp.chars()) {
            let d = c.to_digit(10)?;
            v = v * ten + Self::from_u64(d as u64);
        }
        let e = exp10 - fp.len() as i64;
        v = v * pow_int(ten, e);
        Some(if neg { -v } else { v })
    }
}

fn scale_f64(v: f64, e: i32) -> f64 {
    // v * 2^e without intermediate overflow for moderate e
    let mut r = v;
    let mut e = e;
    while e > 1000 {
        r *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        r *= 2f64.powi(-1000);
        e += 1000;
    }
    r * 2f64.powi(e)
}

fn pow_int<const N: usize>(base: MpFloat<N>, e: i64) -> MpFloat<N> {
    let mut result = MpFloat::<N>::one();
    let mut b = base;
    let mut n = e.unsigned_abs();
    while n > 0 {
        if n & 1 == 1 {
            result = result * b;
        }
        b = b * b;
        n >>= 1;
    }
    if e < 0 {
        result.recip()
    } else {
        result
    }
}

/// `atan(1/k)` by its alternating series.
fn atan_inv<const N: usize>(k: u64) -> MpFloat<N> {
    let x = MpFloat::<N>::one().div_u64(k);
    let mut pow = x;
    let mut sum = x;
    let k2 = k * k;
    let mut n = 1u64;
    let eps_exp = -(MpFloat::<N>::BITS as i64) - 8;
    loop {
        pow = pow.div_u64(k2);
        n += 2;
        let term = pow.div_u64(n);
        if term.is_zero() || term.exp < eps_exp {
            break;
        }
        if (n / 2) % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
    }
    sum
}

/// `atanh(1/k)`.
fn atanh_inv<const N: usize>(k: u64) -> MpFloat<N> {
    let x = MpFloat::<N>::one().div_u64(k);
    let mut pow = x;
    let mut sum = x;
    let k2 = k * k;
    let mut n = 1u64;
    let eps_exp = -(MpFloat::<N>::BITS as i64) - 8;
    loop {
        pow = pow.div_u64(k2);
        n += 2;
        let term = pow.div_u64(n);
        if term.is_zero() || term.exp < eps_exp {
            break;
        }
        sum += term;
    }
    sum
}

impl<const N: usize> Default for MpFloat<N> {
    fn default() -> Self {
        Self::ZERO
    }
}

impl<const N: usize> PartialEq for MpFloat<N> {
    fn eq(&self, other: &Self) -> bool {
        if self.is_zero() && other.is_zero() {
            return true;
        }
        self.neg == other.neg && self.exp == other.exp && self.mant == other.mant
    }
}

impl<const N: usize> PartialOrd for MpFloat<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let sa = if self.is_zero() { 0 } else if self.neg { -1 } else { 1 };
        let sb = if other.is_zero() { 0 } else if other.neg { -1 } else { 1 };
        if sa != sb {
            return Some(sa.cmp(&sb));
        }
        let mag = self.cmp_abs(other);
        Some(if sa < 0 { mag.reverse() } else { mag })
    }
}

impl<const N: usize> Neg for MpFloat<N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        if self.is_zero() {
            self
        } else {
            Self {
                neg: !self.neg,
                ..self
            }
        }
    }
}

impl<const N: usize> Add for MpFloat<N> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        self.add_impl(rhs, false)
    }
}

impl<const N: usize> Sub for MpFloat<N> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        self.add_impl(rhs, true)
    }
}

impl<const N: usize> Mul for MpFloat<N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        self.mul_impl(rhs)
    }
}

impl<const N: usize> Div for MpFloat<N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<const N: usize> Rem for MpFloat<N> {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        let q = (self / rhs).to_f64().trunc();
        self - rhs * Self::from_f64(q)
    }
}

impl<const N: usize> RemAssign for MpFloat<N> {
    fn rem_assign(&mut self, rhs: Self) {
        *self = *self % rhs;
    }
}

impl<const N: usize> AddAssign for MpFloat<N> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<const N: usize> SubAssign for MpFloat<N> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<const N: usize> MulAssign for MpFloat<N> {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<const N: usize> DivAssign for MpFloat<N> {
    fn div_assign(&mut self, rhs: Self) {
        *self = *self / rhs;
    }
}

impl<const N: usize> fmt::Debug for MpFloat<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci_string(20))
    }
}

impl<const N: usize> fmt::Display for MpFloat<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        write!(f, "{}", self.to_sci_string(digits))
    }
}
