//! Decimal text conversions used by the artifact file formats.
//!
//! Values are printed from their exact rational expansion, so formatting
//! is deterministic and independent of MPFR's own output routines.

use std::cmp::Ordering;

use rug::float::Round;
use rug::{Float, Integer, Rational};

use crate::bigreal::ERR_PREC;

/// Significant digits kept for error bounds.
const ERR_SIG: usize = 3;

fn pow10(e: u32) -> Integer {
    Integer::from(Integer::u_pow_u(10, e))
}

/// Exponent `e` with `10^e ≤ |r| < 10^(e+1)`. `r` must be non-zero.
fn decimal_exponent(r: &Rational) -> i64 {
    let abs = Rational::from(r.abs_ref());
    let approx = Float::with_val(64, &abs).log10().to_f64().floor() as i64;
    let mut e = approx;
    loop {
        let lo = ten_pow_rational(e);
        let hi = ten_pow_rational(e + 1);
        if abs < lo {
            e -= 1;
        } else if abs >= hi {
            e += 1;
        } else {
            return e;
        }
    }
}

fn ten_pow_rational(e: i64) -> Rational {
    if e >= 0 {
        Rational::from(pow10(e as u32))
    } else {
        Rational::from((Integer::from(1), pow10((-e) as u32)))
    }
}

/// Splits `|r|` into `sig` significant digits and the decimal exponent of
/// the leading digit. `mode` picks the rounding of the last digit.
fn significant_digits(r: &Rational, sig: usize, mode: Round) -> (Integer, i64) {
    let mut e = decimal_exponent(r);
    let abs = Rational::from(r.abs_ref());
    loop {
        let scaled = abs.clone() * ten_pow_rational(sig as i64 - 1 - e);
        let n = match mode {
            Round::Up => scaled.ceil(),
            Round::Down | Round::Zero => scaled.floor(),
            _ => scaled.round(),
        }
        .into_numer_denom()
        .0;
        if n >= pow10(sig as u32) {
            e += 1;
            continue;
        }
        return (n, e);
    }
}

/// Fixed-point decimal with `sig` significant digits, rounded to nearest.
///
/// `0.5772156649` rather than `5.772156649e-1`, so that digit positions
/// after the decimal point are easy to address.
pub fn format_sig(value: &Float, sig: usize) -> String {
    assert!(sig >= 1);
    if value.is_zero() {
        return "0".into();
    }
    let r = value.to_rational().expect("finite value");
    let (n, e) = significant_digits(&r, sig, Round::Nearest);
    let digits = n.to_string();
    let mut out = String::new();
    if r.cmp0() == Ordering::Less {
        out.push('-');
    }
    if e < 0 {
        out.push_str("0.");
        for _ in 0..(-e - 1) {
            out.push('0');
        }
        out.push_str(&digits);
    } else {
        let int_len = e as usize + 1;
        if digits.len() <= int_len {
            out.push_str(&digits);
            for _ in digits.len()..int_len {
                out.push('0');
            }
        } else {
            out.push_str(&digits[..int_len]);
            out.push('.');
            out.push_str(&digits[int_len..]);
        }
    }
    out
}

/// Exact decimal expansion of a finite binary float. Dyadic rationals
/// always have a terminating expansion.
pub fn format_exact(value: &Float) -> String {
    if value.is_zero() {
        return "0".into();
    }
    let (m, exp) = value.to_integer_exp().expect("finite value");
    if exp >= 0 {
        return (m << exp as u32).to_string();
    }
    let places = (-exp) as u32;
    let scaled = m * Integer::from(Integer::u_pow_u(5, places));
    let negative = scaled.cmp0() == Ordering::Less;
    let mut digits = scaled.abs().to_string();
    if digits.len() <= places as usize {
        let pad = places as usize + 1 - digits.len();
        digits.insert_str(0, &"0".repeat(pad));
    }
    let split = digits.len() - places as usize;
    let (int_part, frac_part) = digits.split_at(split);
    let frac_part = frac_part.trim_end_matches('0');
    let mut out = String::with_capacity(digits.len() + 2);
    if negative {
        out.push('-');
    }
    out.push_str(int_part);
    if !frac_part.is_empty() {
        out.push('.');
        out.push_str(frac_part);
    }
    out
}

/// Exact decimal when the expansion terminates, `p/q` otherwise.
pub fn format_rational(r: &Rational) -> String {
    let mut den = r.denom().clone();
    let twos = den.find_one(0).unwrap_or(0);
    den >>= twos;
    let mut fives = 0u32;
    while den.is_divisible_u(5) {
        den /= 5u32;
        fives += 1;
    }
    if den != 1 {
        return r.to_string();
    }
    let places = twos.max(fives);
    let scaled = (r.numer() * pow10(places)) / r.denom();
    let negative = scaled.cmp0() == Ordering::Less;
    let mut digits = scaled.abs().to_string();
    if places == 0 {
        return if negative { format!("-{digits}") } else { digits };
    }
    if digits.len() <= places as usize {
        digits.insert_str(0, &"0".repeat(places as usize + 1 - digits.len()));
    }
    let split = digits.len() - places as usize;
    let frac = digits[split..].trim_end_matches('0');
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&digits[..split]);
    if !frac.is_empty() {
        out.push('.');
        out.push_str(frac);
    }
    out
}

/// Parses `123`, `-0.0012`, `1.5e-7`, `1.5E+7` or `p/q` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((p, q)) = text.split_once('/') {
        let p: Integer = p.trim().parse().ok()?;
        let q: Integer = q.trim().parse().ok()?;
        if q.cmp0() != Ordering::Greater {
            return None;
        }
        return Some(Rational::from((p, q)));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i64>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut digits = String::with_capacity(int_part.len() + frac_part.len());
    digits.push_str(int_part);
    digits.push_str(frac_part);
    let mut n: Integer = digits.parse().ok()?;
    if negative {
        n = -n;
    }
    let shift = exponent - frac_part.len() as i64;
    Some(Rational::from(n) * ten_pow_rational(shift))
}

/// Parses a decimal into a float of precision `prec`, correctly rounded.
pub fn parse_float(text: &str, prec: u32) -> Option<Float> {
    parse_rational(text).map(|r| Float::with_val(prec, &r))
}

/// Error bound as `d.dde±x`, rounded to nearest.
///
/// Bounds produced by [`canonical_err`] print back to exactly the text
/// they were parsed from.
pub fn format_err(err: &Float) -> String {
    format_sci(err, Round::Nearest)
}

fn format_sci(err: &Float, mode: Round) -> String {
    if err.is_zero() {
        return "0".into();
    }
    let r = err.to_rational().expect("finite bound");
    let (n, e) = significant_digits(&r, ERR_SIG, mode);
    let digits = n.to_string();
    format!("{}.{}e{}", &digits[..1], &digits[1..], e)
}

/// Parses an error bound, rounding upward.
pub fn parse_err(text: &str) -> Option<Float> {
    let r = parse_rational(text)?;
    if r.cmp0() == Ordering::Less {
        return None;
    }
    Some(Float::with_val_round(ERR_PREC, &r, Round::Up).0)
}

/// Rounds a bound up to three significant decimal digits, so that it can
/// be written to text and read back bit-identically.
pub fn canonical_err(err: &Float) -> Float {
    let r = err.to_rational().expect("finite bound");
    if r.cmp0() != Ordering::Greater {
        return Float::new(ERR_PREC);
    }
    let (mut n, mut e) = significant_digits(&r, ERR_SIG, Round::Up);
    loop {
        let shift = e - (ERR_SIG as i64 - 1);
        let decimal = Rational::from(n.clone()) * ten_pow_rational(shift);
        let stored = Float::with_val_round(ERR_PREC, &decimal, Round::Up).0;
        if stored >= *err {
            return stored;
        }
        n += 1;
        if n >= pow10(ERR_SIG as u32) {
            n = pow10(ERR_SIG as u32 - 1);
            e += 1;
        }
    }
}

/// Changes the digit at `position` places after the decimal point by
/// `±1` (down for a 9, up otherwise) and returns the new text together
/// with the signed change applied.
pub fn flip_digit(text: &str, position: usize) -> Option<(String, i8)> {
    let dot = text.find('.')?;
    let idx = dot + position;
    let bytes = text.as_bytes();
    if position == 0 || idx >= bytes.len() || !bytes[idx].is_ascii_digit() {
        return None;
    }
    let d = bytes[idx] - b'0';
    let (nd, delta) = if d == 9 { (8, -1) } else { (d + 1, 1) };
    let mut out = text.to_owned();
    out.replace_range(idx..idx + 1, &((b'0' + nd) as char).to_string());
    Some((out, delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rug::ops::Pow;

    #[test]
    fn rationals_print_exactly() {
        for (r, text) in [
            (Rational::from((1025, 1024)), "1.0009765625"),
            (Rational::from((3, 2)), "1.5"),
            (Rational::from(7), "7"),
            (Rational::from((-1, 20)), "-0.05"),
            (Rational::from((4, 3)), "4/3"),
        ] {
            assert_eq!(format_rational(&r), text);
            assert_eq!(parse_rational(text).unwrap(), r);
        }
    }

    #[test]
    fn fixed_notation() {
        let x = Float::with_val(200, 0.578125);
        assert_eq!(format_sig(&x, 3), "0.578");
        assert_eq!(format_sig(&x, 8), "0.57812500");
        let x = Float::with_val(200, -1234.5);
        assert_eq!(format_sig(&x, 6), "-1234.50");
        assert_eq!(format_sig(&x, 2), "-1200");
        let x = Float::with_val(200, 9.9996);
        assert_eq!(format_sig(&x, 4), "10.00");
        let x = Float::with_val(200, 0.000123);
        assert_eq!(format_sig(&x, 2), "0.00012");
    }

    #[test]
    fn exact_dyadic_expansion() {
        assert_eq!(format_exact(&Float::with_val(64, 0.0009765625)), "0.0009765625");
        assert_eq!(format_exact(&Float::with_val(64, -3.5)), "-3.5");
        assert_eq!(format_exact(&Float::with_val(64, 1024)), "1024");
        let third = Float::with_val(100, 1) / 3u32;
        let back = parse_rational(&format_exact(&third)).unwrap();
        assert_eq!(back, third.to_rational().unwrap());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/64").unwrap(), Rational::from((1, 64)));
        assert_eq!(parse_rational("1.0009765625").unwrap(), Rational::from((1025, 1024)));
        assert_eq!(parse_rational("-2.5e-3").unwrap(), Rational::from((-1, 400)));
        assert_eq!(parse_rational("7E2").unwrap(), Rational::from(700));
        assert_eq!(parse_rational(".5").unwrap(), Rational::from((1, 2)));
        assert!(parse_rational("").is_none());
        assert!(parse_rational("1.2.3").is_none());
        assert!(parse_rational("abc").is_none());
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("-").is_none());
    }

    #[test]
    fn error_bounds_round_trip() {
        let x = Float::with_val(64, 1.2345e-205);
        let c = canonical_err(&x);
        assert!(c >= x);
        assert_eq!(format_err(&c), "1.24e-205");
        assert_eq!(parse_err(&format_err(&c)).unwrap(), c);
        assert_eq!(format_err(&canonical_err(&Float::with_val(64, 9.999e3))), "1.00e4");
    }

    #[test]
    fn digit_flip() {
        let (s, d) = flip_digit("0.5772", 2).unwrap();
        assert_eq!((s.as_str(), d), ("0.5872", 1));
        let (s, d) = flip_digit("0.5792", 3).unwrap();
        assert_eq!((s.as_str(), d), ("0.5782", -1));
        assert!(flip_digit("0.57", 5).is_none());
    }

    proptest! {
        #[test]
        fn sig_format_reparses_within_half_unit(m in -1_000_000_000i64..1_000_000_000, e in -40i32..40, sig in 1usize..30) {
            prop_assume!(m != 0);
            let x = Float::with_val(128, m) * Float::with_val(128, 2).pow(e);
            let text = format_sig(&x, sig);
            let back = parse_rational(&text).unwrap();
            let exact = x.to_rational().unwrap();
            let diff = Rational::from(&back - &exact).abs();
            let e10 = decimal_exponent(&exact);
            let half_unit = ten_pow_rational(e10 + 1 - sig as i64) / 2u32;
            prop_assert!(diff <= half_unit * 11u32 / 10u32);
        }

        #[test]
        fn canonical_errors_are_upper_bounds(bits in 1u64..u64::MAX, e in -3000i32..3000) {
            let x = Float::with_val(64, bits) * Float::with_val(64, 2).pow(e);
            let c = canonical_err(&x);
            prop_assert!(c >= x);
            prop_assert_eq!(parse_err(&format_err(&c)).unwrap(), c);
        }
    }
}
