//! Working-precision settings and the digits → scalar-type dispatch.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Precision settings governing every numerical kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    digits: u32,
    safety_margin: u32,
}

impl PrecisionContext {
    pub fn new(digits: u32, safety_margin: u32) -> Result<Self> {
        if digits < 16 {
            return Err(Error::InvalidPrecision(format!(
                "need at least 16 digits, got {digits}"
            )));
        }
        if safety_margin == 0 || safety_margin >= digits {
            return Err(Error::InvalidPrecision(format!(
                "safety margin {safety_margin} must lie in 1..{digits}"
            )));
        }
        if limbs_for_digits(digits).is_none() {
            return Err(Error::InvalidPrecision(format!(
                "{digits} digits exceeds the widest supported format ({} digits)",
                max_digits()
            )));
        }
        Ok(Self {
            digits,
            safety_margin,
        })
    }

    /// Context with the default safety margin (a quarter of the digits, at least 4).
    pub fn with_digits(digits: u32) -> Result<Self> {
        Self::new(digits, default_margin(digits))
    }

    /// Default digits for a chain of `sites` sites.
    pub fn default_for_sites(sites: usize) -> Self {
        let digits = if sites <= 32 { 64 } else { 128 };
        Self::with_digits(digits).expect("default precision is valid")
    }

    /// Context describing plain `f64` arithmetic (16 digits, 4 in reserve).
    pub fn double() -> Self {
        Self {
            digits: 16,
            safety_margin: 4,
        }
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn safety_margin(&self) -> u32 {
        self.safety_margin
    }

    /// `10^-(digits - safety_margin)`.
    pub fn tolerance<T: Real>(&self) -> T {
        let ten = T::from_i64(10);
        let mut r = T::one();
        for _ in 0..(self.digits - self.safety_margin) {
            r /= ten;
        }
        r
    }

    pub fn tolerance_f64(&self) -> f64 {
        10f64.powi(-((self.digits - self.safety_margin) as i32))
    }

    /// Limb count of the multi-limb format backing this context.
    pub fn limbs(&self) -> usize {
        limbs_for_digits(self.digits).expect("validated at construction")
    }
}

fn default_margin(digits: u32) -> u32 {
    (digits / 4).max(4)
}

/// Limb counts with a compiled instantiation, ascending.
pub const SUPPORTED_LIMBS: [usize; 11] = [2, 3, 4, 5, 6, 7, 8, 10, 12, 14, 16];

/// Bits kept beyond the requested decimal digits.
const GUARD_BITS: f64 = 16.0;

/// Smallest supported limb count whose mantissa holds `digits` decimal digits
/// plus guard bits.
pub fn limbs_for_digits(digits: u32) -> Option<usize> {
    let bits = digits as f64 * std::f64::consts::LOG2_10 + GUARD_BITS;
    let needed = (bits / 64.0).ceil() as usize;
    SUPPORTED_LIMBS.iter().copied().find(|&n| n >= needed)
}

pub fn max_digits() -> u32 {
    let bits = 64.0 * *SUPPORTED_LIMBS.last().unwrap() as f64 - GUARD_BITS;
    (bits / std::f64::consts::LOG2_10).floor() as u32
}

/// Runs `$body` with `$T` bound to the multi-limb type matching `$ctx`.
///
/// ```
/// use nhskin_core::{with_precision, PrecisionContext, Real};
/// let ctx = PrecisionContext::with_digits(40).unwrap();
/// let bits = with_precision!(ctx, T => T::MANTISSA_BITS);
/// assert!(bits >= 133);
/// ```
#[macro_export]
macro_rules! with_precision {
    ($ctx:expr, $T:ident => $body:expr) => {{
        match $ctx.limbs() {
            2 => { type $T = $crate::MpFloat<2>; $body }
            3 => { type $T = $crate::MpFloat<3>; $body }
            4 => { type $T = $crate::MpFloat<4>; $body }
            5 => { type $T = $crate::MpFloat<5>; $body }
            6 => { type $T = $crate::MpFloat<6>; $body }
            7 => { type $T = $crate::MpFloat<7>; $body }
            8 => { type $T = $crate::MpFloat<8>; $body }
            10 => { type $T = $crate::MpFloat<10>; $body }
            12 => { type $T = $crate::MpFloat<12>; $body }
            14 => { type $T = $crate::MpFloat<14>; $body }
            16 => { type $T = $crate::MpFloat<16>; $body }
            n => unreachable!("unsupported limb count {n}"),
        }
    }};
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::MpFloat;

    #[test]
    fn tolerance_is_exact_power_of_ten() {
        let ctx = PrecisionContext::new(64, 8).unwrap();
        let tol: MpFloat<4> = ctx.tolerance();
        assert_eq!(tol.to_sci_string(30), format!("1.{}e-56", "0".repeat(29)));
        assert_eq!(ctx.tolerance_f64(), 1e-56);
    }

    #[test]
    fn rejects_invalid_settings() {
        assert!(PrecisionContext::new(15, 2).is_err());
        assert!(PrecisionContext::new(32, 32).is_err());
        assert!(PrecisionContext::new(32, 0).is_err());
        assert!(PrecisionContext::with_digits(100_000).is_err());
    }

    #[test]
    fn limb_selection() {
        assert_eq!(limbs_for_digits(16), Some(2));
        assert_eq!(limbs_for_digits(64), Some(4));
        assert_eq!(limbs_for_digits(128), Some(7));
        assert_eq!(limbs_for_digits(250), Some(14));
        assert!(max_digits() >= 300);
        let ctx = PrecisionContext::with_digits(250).unwrap();
        let bits = with_precision!(ctx, T => <T as Real>::MANTISSA_BITS);
        assert!(bits as f64 >= 250.0 * std::f64::consts::LOG2_10);
    }

    #[test]
    fn defaults_follow_chain_length() {
        assert_eq!(PrecisionContext::default_for_sites(8).digits(), 64);
        assert_eq!(PrecisionContext::default_for_sites(64).digits(), 128);
    }
}
