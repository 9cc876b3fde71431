//! Slow, deliberately naive reference computations for tests.
//!
//! Nothing here shares code with the tabulation pipeline beyond the
//! multiprecision primitives, so agreement between the two is evidence.

use std::cmp::Ordering;

use rug::float::{Constant, Round};
use rug::ops::{Pow, PowAssign};
use rug::{Float, Integer, Rational};

use crate::bernoulli::bernoulli_exact;
use crate::bigreal::{self, bits_for_digits, BigReal, ERR_PREC};
use crate::error::{Error, Result};
use crate::zeta::{zeta_em, zeta_eta};

/// `Σ_{k=1}^{m} (ln k)ⁿ/k − (ln m)^(n+1)/(n+1)` with `0⁰ = 1`.
///
/// The error bound covers the floating-point evaluation of this finite
/// expression only. How far it is from `γₙ` is the caller's concern, see
/// [`gamma_limit_estimate`].
pub fn gamma_limit_oracle(n: u32, m: u64, digits: u32) -> BigReal {
    limit_sums(n, m, digits).0
}

/// Like [`gamma_limit_oracle`], with the truncation error estimated
/// empirically as `2·|O(m/2) − O(m)|` and added to the bound. The
/// estimate is heuristic (the convergence is `O((ln m)ⁿ/m)`).
pub fn gamma_limit_estimate(n: u32, m: u64, digits: u32) -> BigReal {
    let (full, half) = limit_sums(n, m.max(2), digits);
    let diff = Float::with_val(full.prec(), full.value() - half.value());
    let est = bigreal::scale_pow2(&diff, 1);
    let err = bigreal::add_up(full.abs_err(), &est);
    BigReal::new(full.value().clone(), &err)
}

/// Returns the oracle at `m` and at `m/2`, from one sweep.
fn limit_sums(n: u32, m: u64, digits: u32) -> (BigReal, BigReal) {
    assert!(m >= 1, "m must be positive");
    let prec = bits_for_digits(digits) + 64 - m.leading_zeros();
    let half_m = (m / 2).max(1);
    let mut sum = Float::with_val(prec, 1u32); // k = 1: (ln 1)^n / 1 = 0^n
    if n > 0 {
        sum = Float::new(prec);
    }
    let mut half_sum = None;
    if half_m == 1 {
        half_sum = Some(sum.clone());
    }
    for k in 2..=m {
        let mut t = Float::with_val(prec, k).ln();
        t.pow_assign(n);
        t /= k;
        sum += &t;
        if k == half_m {
            half_sum = Some(sum.clone());
        }
    }
    let finish = |partial: &Float, upto: u64| {
        let mut tail = Float::with_val(prec, upto).ln();
        tail.pow_assign(n + 1);
        tail /= n + 1;
        let value = Float::with_val(prec, partial - &tail);
        // ln, pow, division and addition per term: well under 8 ulps of
        // the largest partial sum each.
        let mag = Float::with_val(ERR_PREC, partial.abs_ref()) + tail.abs();
        let err = bigreal::rounding_bound(&mag, prec - 1, 8 * (n as u64 + 2) * upto + 8);
        BigReal::new(value, &err)
    };
    let half = finish(half_sum.as_ref().expect("m/2 visited"), half_m);
    (finish(&sum, m), half)
}

/// `ζ(2k) = (2π)^(2k) |B₂ₖ| / (2·(2k)!)`.
pub fn zeta_even_closed_form(k: u32, digits: u32) -> BigReal {
    assert!(k >= 1);
    let prec = bits_for_digits(digits) + 2 * k;
    let two_pi = Float::with_val(prec, Constant::Pi) * 2u32;
    let b = bernoulli_exact(2 * k as usize).abs();
    let fact = Integer::from(Integer::factorial(2 * k));
    let scale = Rational::from((b.numer().clone(), (b.denom() * fact) * 2u32));
    let value = two_pi.pow(2 * k) * scale;
    let err = bigreal::rounding_bound(&value, prec - 1, 4 * k as u64 + 8);
    BigReal::new(value, &err)
}

#[derive(Clone, Debug)]
pub struct CrossCheckEntry {
    pub s: Rational,
    pub em: BigReal,
    pub eta: BigReal,
    /// `ζ(s)` from the Bernoulli closed form when `s` is a positive even integer.
    pub closed_form: Option<BigReal>,
    /// Decimal digits on which all available evaluations agree.
    pub agreeing_digits: u64,
    /// Whether every pair of evaluations is consistent within its bounds.
    pub consistent: bool,
}

#[derive(Clone, Debug)]
pub struct CrossCheckReport {
    pub target_digits: u32,
    pub entries: Vec<CrossCheckEntry>,
}

impl CrossCheckReport {
    /// Largest shortfall of agreement below the target, in digits.
    pub fn max_shortfall(&self) -> u64 {
        self.entries
            .iter()
            .map(|e| (self.target_digits as u64).saturating_sub(e.agreeing_digits))
            .max()
            .unwrap_or(0)
    }

    pub fn all_consistent(&self) -> bool {
        self.entries.iter().all(|e| e.consistent)
    }
}

/// Digits of agreement between two values: `floor(log10(|a| / |a − b|))`,
/// capped at what both values declare.
pub fn agreeing_digits(a: &BigReal, b: &BigReal) -> u64 {
    let cap = a.usable_digits().min(b.usable_digits());
    let prec = a.prec().max(b.prec()) + 64;
    let diff = Float::with_val(prec, a.value() - b.value()).abs();
    if diff.is_zero() {
        return cap;
    }
    bigreal::usable_digits(a.value(), &diff).min(cap)
}

/// Evaluates `ζ` at every `s` with both independent methods (and the
/// closed form where one exists) and reports their agreement.
pub fn zeta_cross_check(s_list: &[Rational], digits: u32) -> Result<CrossCheckReport> {
    let mut entries = Vec::with_capacity(s_list.len());
    for s in s_list {
        let em = zeta_em(s, digits)?;
        let eta = zeta_eta(s, digits)?;
        let closed_form = even_index(s).map(|k| zeta_even_closed_form(k, digits + 10));
        let mut agreeing = agreeing_digits(&em, &eta);
        let mut consistent = em.overlaps(&eta);
        if let Some(cf) = &closed_form {
            agreeing = agreeing.min(agreeing_digits(&em, cf)).min(agreeing_digits(&eta, cf));
            consistent &= em.overlaps(cf) && eta.overlaps(cf);
        }
        entries.push(CrossCheckEntry {
            s: s.clone(),
            em,
            eta,
            closed_form,
            agreeing_digits: agreeing,
            consistent,
        });
    }
    Ok(CrossCheckReport {
        target_digits: digits,
        entries,
    })
}

fn even_index(s: &Rational) -> Option<u32> {
    if *s.denom() != 1 || s.cmp0() != Ordering::Greater {
        return None;
    }
    let n = s.numer().to_u32()?;
    (n % 2 == 0).then_some(n / 2)
}

/// `ζ(s) − 1/(s−1)` assembled from [`zeta_em`], for checking the
/// regularized evaluator away from `s = 1`.
pub fn f_via_zeta(s: &Rational, digits: u32) -> Result<BigReal> {
    if *s <= 1 {
        return Err(Error::Domain(format!("needs s > 1, got {s}")));
    }
    let z = zeta_em(s, digits + 10)?;
    let pole = Rational::from(s - 1u32).recip();
    let prec = z.prec();
    let (pole_f, _) = Float::with_val_round(prec, &pole, Round::Nearest);
    let value = Float::with_val(prec, z.value() - &pole_f);
    let err = bigreal::add_up(z.abs_err(), &bigreal::rounding_bound(&pole_f, prec - 1, 2));
    let err = bigreal::add_up(&err, &bigreal::rounding_bound(&value, prec - 1, 1));
    Ok(BigReal::new(value, &err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_term_is_one() {
        let v = gamma_limit_oracle(0, 1, 20);
        assert_eq!(*v.value(), 1);
        let v = gamma_limit_oracle(2, 1, 20);
        assert!(v.value().is_zero());
    }

    #[test]
    fn euler_gamma_error_halves_with_m() {
        let gamma = crate::zeta::euler_gamma(40);
        let err = |m| {
            let v = gamma_limit_oracle(0, m, 30);
            Float::with_val(200, v.value() - gamma.value()).abs().to_f64()
        };
        let ratio = err(10_000) / err(20_000);
        assert!((ratio - 2.0).abs() < 0.01, "ratio {ratio}");
    }

    #[test]
    fn estimate_covers_the_truncation() {
        let gamma = crate::zeta::euler_gamma(40);
        let v = gamma_limit_estimate(0, 5000, 30);
        assert!(v.overlaps(&gamma));
        assert!(v.usable_digits() >= 3);
    }

    #[test]
    fn closed_form_matches_both_methods() {
        let report = zeta_cross_check(&[Rational::from(2), Rational::from(6)], 60).unwrap();
        assert!(report.all_consistent());
        assert!(report.max_shortfall() <= 1);
        assert!(report.entries.iter().all(|e| e.closed_form.is_some()));
    }

    #[test]
    fn odd_and_fractional_have_no_closed_form() {
        assert_eq!(even_index(&Rational::from(3)), None);
        assert_eq!(even_index(&Rational::from((5, 2))), None);
        assert_eq!(even_index(&Rational::from(4)), Some(2));
    }

    #[test]
    fn regularized_identity() {
        let s = Rational::from((1025, 1024));
        let a = f_via_zeta(&s, 80).unwrap();
        let b = crate::zeta::f_reg(&s, 80).unwrap();
        assert!(a.overlaps(&b));
        assert!(
            agreeing_digits(&a, &b) >= 78,
            "{} {} {}",
            agreeing_digits(&a, &b),
            a.usable_digits(),
            b.usable_digits()
        );
    }
}
