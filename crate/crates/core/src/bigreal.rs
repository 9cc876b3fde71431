//! Arbitrary-precision reals with an attached absolute error bound.

use std::cmp::Ordering;
use std::fmt;

use rug::float::Round;
use rug::ops::{AddAssignRound, DivAssignRound, MulAssignRound, PowAssignRound};
use rug::Float;

/// Extra decimal digits carried by every internal computation.
pub const GUARD_DIGITS: u32 = 20;

/// Precision of error bounds. Bounds are always rounded upward.
pub const ERR_PREC: u32 = 64;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Working precision in bits for a target of `digits` decimal digits,
/// including the guard digits.
pub fn bits_for_digits(digits: u32) -> u32 {
    ((digits + GUARD_DIGITS) as f64 * LOG2_10).ceil() as u32 + 8
}

/// A real number together with an upper bound on its absolute error.
#[derive(Clone, Debug, PartialEq)]
pub struct BigReal {
    value: Float,
    abs_err: Float,
}

impl BigReal {
    /// Panics if `abs_err` is negative or NaN.
    pub fn new(value: Float, abs_err: &Float) -> Self {
        assert!(
            abs_err.cmp0() != Some(Ordering::Less) && !abs_err.is_nan(),
            "error bound must be a non-negative number"
        );
        BigReal {
            value,
            abs_err: up(abs_err),
        }
    }

    pub fn exact(value: Float) -> Self {
        BigReal {
            value,
            abs_err: Float::new(ERR_PREC),
        }
    }

    pub fn value(&self) -> &Float {
        &self.value
    }

    pub fn abs_err(&self) -> &Float {
        &self.abs_err
    }

    pub fn into_parts(self) -> (Float, Float) {
        (self.value, self.abs_err)
    }

    pub fn prec(&self) -> u32 {
        self.value.prec()
    }

    /// `floor(log10(|value| / abs_err))`, or 0 when the error swamps the value.
    ///
    /// An exact value reports the number of decimal digits its binary
    /// precision can hold.
    pub fn usable_digits(&self) -> u64 {
        usable_digits(&self.value, &self.abs_err)
    }

    /// True when the two error intervals intersect, i.e. both values may
    /// be correct approximations of the same number.
    pub fn overlaps(&self, other: &BigReal) -> bool {
        let diff = Float::with_val(
            self.value.prec().max(other.value.prec()) + 64,
            &self.value - &other.value,
        );
        let mut slack = self.abs_err.clone();
        slack.add_assign_round(&other.abs_err, Round::Up);
        diff.abs() <= slack
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown = (self.usable_digits() as usize + 2).clamp(3, 60);
        write!(
            f,
            "{} ± {}",
            crate::decimal::format_sig(&self.value, shown),
            crate::decimal::format_err(&self.abs_err)
        )
    }
}

pub(crate) fn usable_digits(value: &Float, abs_err: &Float) -> u64 {
    if value.is_zero() || !value.is_finite() {
        return 0;
    }
    if abs_err.is_zero() {
        return (value.prec() as f64 / LOG2_10).floor() as u64;
    }
    if !abs_err.is_finite() {
        return 0;
    }
    let mut ratio = Float::with_val_round(ERR_PREC, value.abs_ref(), Round::Down).0;
    ratio.div_assign_round(abs_err, Round::Down);
    if ratio <= 1 {
        return 0;
    }
    let digits = Float::with_val_round(ERR_PREC, ratio.log10_ref(), Round::Down).0;
    digits.to_f64().floor().max(0.0) as u64
}

/// `|x|` rounded up to [`ERR_PREC`] bits.
pub fn up(x: &Float) -> Float {
    Float::with_val_round(ERR_PREC, x.abs_ref(), Round::Up).0
}

/// Upper bound of `|a| + |b|`.
pub fn add_up(a: &Float, b: &Float) -> Float {
    let mut r = up(a);
    r.add_assign_round(&up(b), Round::Up);
    r
}

/// Upper bound of `|a| · |b|`.
pub fn mul_up(a: &Float, b: &Float) -> Float {
    let mut r = up(a);
    r.mul_assign_round(&up(b), Round::Up);
    r
}

/// Upper bound of `a · 2^e`.
pub fn scale_pow2(a: &Float, e: i32) -> Float {
    let mut r = up(a);
    r <<= e;
    r
}

/// `2^-prec · |x| · ulps`, the rounding budget for `ulps` correctly rounded
/// operations on magnitudes up to `|x|`.
pub fn rounding_bound(x: &Float, prec: u32, ulps: u64) -> Float {
    let mut r = up(x);
    r.mul_assign_round(ulps, Round::Up);
    r >>= prec as i32;
    r
}

/// Upper bound on `10^-digits`.
pub fn ten_pow_neg(digits: u32) -> Float {
    let mut r = Float::with_val_round(ERR_PREC, 10, Round::Up).0;
    r.pow_assign_round(-(digits as i32), Round::Up);
    r
}

/// Lower bound on `10^-digits`, used as a tolerance target.
pub fn ten_pow_neg_down(digits: u32) -> Float {
    let mut r = Float::with_val_round(ERR_PREC, 10, Round::Down).0;
    r.pow_assign_round(-(digits as i32), Round::Down);
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_helpers_ignore_signs() {
        let a = Float::with_val(64, 1e-10);
        let b = Float::with_val(200, -3e-10);
        assert!(add_up(&a, &b) > 3.99e-10);
        assert!(add_up(&b, &a) > 3.99e-10);
        assert!(mul_up(&a, &b) > 2.99e-20);
    }

    #[test]
    fn usable_digits_follows_definition() {
        let v = BigReal::new(Float::with_val(200, 1.5), &Float::with_val(64, 1e-10));
        assert_eq!(v.usable_digits(), 10);
        let v = BigReal::new(Float::with_val(200, 1.5), &Float::with_val(64, 2.0));
        assert_eq!(v.usable_digits(), 0);
        let v = BigReal::new(Float::with_val(200, 0), &Float::with_val(64, 1e-100));
        assert_eq!(v.usable_digits(), 0);
        let v = BigReal::new(Float::with_val(200, -3.0), &Float::with_val(64, 4e-51));
        assert_eq!(v.usable_digits(), 50);
    }

    #[test]
    fn exact_values_report_precision_digits() {
        let v = BigReal::exact(Float::with_val(100, 0.25));
        assert_eq!(v.usable_digits(), 30);
    }

    #[test]
    #[should_panic]
    fn negative_error_is_rejected() {
        BigReal::new(Float::with_val(53, 1), &Float::with_val(53, -1));
    }

    #[test]
    fn overlap_uses_both_bounds() {
        let a = BigReal::new(Float::with_val(100, 1.0), &Float::with_val(64, 0.1));
        let b = BigReal::new(Float::with_val(100, 1.25), &Float::with_val(64, 0.2));
        let c = BigReal::new(Float::with_val(100, 1.5), &Float::with_val(64, 0.1));
        assert!(a.overlaps(&b));
        assert!(!a.overlaps(&c));
    }

    #[test]
    fn bounds_round_upward() {
        let third = Float::with_val(200, 1) / 3u32;
        assert!(up(&third) > third);
        assert!(ten_pow_neg(30) > ten_pow_neg_down(30));
        assert!(bits_for_digits(100) as f64 > 120.0 * LOG2_10);
    }
}
