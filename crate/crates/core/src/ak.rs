//! The coefficients `Aₖ = Σ_{j=0}^{k} (−1)ʲ C(k,j) (2j+1) ζ(2j+2)`, their
//! moment identities and their saddle-point asymptotic.
//!
//! `ζ(2j+2) = (2π)^(2j+2) |B_{2j+2}| / (2 (2j+2)!)` keeps every term an
//! exact rational times a power of `π²`. The alternating sum cancels
//! about `k log₁₀ 2` digits, so the working precision grows with `k`.
//!
//! The asymptotic uses `κ = (π² k)^(1/3)`. With `κ = π^(3/2) k^(1/3)`
//! the formula gets roughly half the signs wrong and is off by many orders
//! of magnitude against the exact coefficients; with `π^(2/3)` it matches
//! every sign checked and is within a few percent from `k = 100` on.

use std::f64::consts::{LN_10, PI};
use std::io::Write;

use rayon::prelude::*;
use rug::float::{Constant, Round};
use rug::ops::{AddAssignRound, MulAssignRound, Pow};
use rug::{Float, Integer, Rational};

use crate::bernoulli::BernoulliCache;
use crate::bigreal::{self, bits_for_digits, BigReal, ERR_PREC};
use crate::decimal;
use crate::error::{Error, Result};

/// Cosine threshold below which the asymptotic is not compared in sign or
/// magnitude.
pub const COS_SAFE: f64 = 0.1;

/// Guard digits added on top of the cancellation estimate on the first
/// attempt.
const FIRST_GUARD: u32 = 15;

/// Largest guard `ak_exact` tries before giving up.
const MAX_GUARD: u32 = 2000;

#[derive(Clone, Debug, PartialEq)]
pub struct AkSeries {
    pub values: Vec<BigReal>,
    pub digits: u32,
}

impl AkSeries {
    pub fn k_max(&self) -> usize {
        self.values.len() - 1
    }
}

/// Digits lost to cancellation plus the expected size deficit of `Aₖ`.
fn cancellation_digits(k: usize) -> u32 {
    let lost = k as f64 * std::f64::consts::LOG10_2 + ((2 * k + 2) as f64).log10();
    let small = if k == 0 { 0.0 } else { -log10_envelope(k).min(0.0) };
    (lost + small).ceil() as u32 + 1
}

/// `log₁₀` of the asymptotic amplitude without the cosine.
fn log10_envelope(k: usize) -> f64 {
    let kappa = (PI * PI * k as f64).cbrt();
    (4.0 * PI.powf(1.5) / (3.0 * kappa).sqrt()).log10() + (-1.5 * kappa + PI * PI / (4.0 * kappa)) / LN_10
}

/// `(2j+1) ζ(2j+2)` for `j ≤ j_max` at `prec` bits, from the Bernoulli
/// form. Term `j` carries a relative error below `(5j + 9)·2^-prec`.
fn zeta_terms(j_max: usize, prec: u32) -> Vec<Float> {
    let x = {
        let mut pi = Float::with_val(prec, Constant::Pi);
        pi.square_mut();
        pi * 4u32
    };
    BernoulliCache::global().with_even(j_max + 1, |b| {
        let mut out = Vec::with_capacity(j_max + 1);
        let mut x_pow = x.clone();
        let mut fact = Integer::from(2);
        for j in 0..=j_max {
            let m = 2 * j + 2;
            if j > 0 {
                fact *= (m - 1) as u32;
                fact *= m as u32;
                x_pow *= &x;
            }
            let coeff = Rational::from(b[j + 1].abs_ref()) * (2 * j + 1) as u32 / Integer::from(&fact * 2u32);
            let mut t = Float::with_val(prec, &coeff);
            t *= &x_pow;
            out.push(t);
        }
        out
    })
}

/// `Aₖ` from precomputed terms, summed at `prec` bits, with a bound that
/// covers term and summation rounding (`terms` must be at least `prec`
/// bits).
fn ak_from_terms(k: usize, terms: &[Float], prec: u32) -> BigReal {
    let mut sum = Float::new(prec);
    let mut magnitude = Float::new(ERR_PREC);
    let mut binom = Integer::from(1);
    for (j, z) in terms.iter().enumerate().take(k + 1) {
        let t = Float::with_val(prec, z * &binom);
        magnitude.add_assign_round(&bigreal::up(&t), Round::Up);
        if j % 2 == 0 {
            sum += &t;
        } else {
            sum -= &t;
        }
        binom *= (k - j) as u32;
        binom /= (j + 1) as u32;
    }
    // Per term: (5j+9) from the zeta term, one from the binomial product;
    // k+1 from the running sum.
    let ulps = 6 * k as u64 + 12;
    let mut err = bigreal::rounding_bound(&magnitude, prec - 1, ulps);
    err = bigreal::add_up(&err, &bigreal::rounding_bound(&sum, prec - 1, 1));
    BigReal::new(sum, &err)
}

/// `Aₖ` at `digits + guard + cancellation` digits of working precision;
/// a capacity error when fewer than `digits` significant digits survive.
pub fn ak_exact_with_guard(k: usize, digits: u32, guard: u32) -> Result<BigReal> {
    let prec = bits_for_digits(digits + guard + cancellation_digits(k));
    let terms = zeta_terms(k, prec);
    let a = ak_from_terms(k, &terms, prec);
    if a.usable_digits() < digits as u64 {
        return Err(Error::Capacity(format!(
            "A_{k}: {} of {digits} digits with guard {guard}",
            a.usable_digits()
        )));
    }
    Ok(a)
}

/// `Aₖ` to at least `digits` significant digits. The guard grows when
/// `Aₖ` is unusually small (near a zero of the oscillation).
pub fn ak_exact(k: usize, digits: u32) -> Result<BigReal> {
    if digits == 0 {
        return Err(Error::Domain("digits must be positive".into()));
    }
    let mut guard = FIRST_GUARD;
    loop {
        match ak_exact_with_guard(k, digits, guard) {
            Err(Error::Capacity(_)) if guard < MAX_GUARD => guard = (guard * 3).min(MAX_GUARD),
            other => return other,
        }
    }
}

/// `A₀ … A_{k_max}`, each to at least `digits` significant digits.
///
/// `(−1)ᵏ Aₖ` is the `k`-th forward difference of `(2j+1) ζ(2j+2)` at
/// `j = 0`. The terms are fixed to integers at one binary exponent and
/// differenced exactly, so `Aₖ` inherits at most `2ᵏ` times the largest
/// term error. Coefficients that come out short (near a sign change) are
/// recomputed one by one.
pub fn ak_series(k_max: usize, digits: u32) -> Result<AkSeries> {
    if digits == 0 {
        return Err(Error::Domain("digits must be positive".into()));
    }
    let prec = bits_for_digits(digits + FIRST_GUARD + cancellation_digits(k_max)) + 16;
    let terms = zeta_terms(k_max, prec);
    let top = terms.iter().map(|t| t.get_exp().unwrap_or(0)).max().unwrap_or(0);
    let exp = top - prec as i32;
    let mut term_err = Float::new(ERR_PREC);
    let mut row: Vec<Integer> = terms
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let e = bigreal::rounding_bound(t, prec - 1, 5 * j as u64 + 10);
            if e > term_err {
                term_err = e;
            }
            let mut scaled = t.clone();
            scaled >>= exp;
            scaled.to_integer().expect("finite")
        })
        .collect();
    // conversion to integers rounds by half a unit at 2^exp
    let mut unit = Float::with_val(ERR_PREC, 1);
    unit <<= exp - 1;
    term_err = bigreal::add_up(&term_err, &unit);

    let out_prec = bits_for_digits(digits + FIRST_GUARD);
    let mut raw = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut head = Float::with_val(out_prec, &row[0]);
        head <<= exp;
        if k % 2 == 1 {
            head = -head;
        }
        let mut err = bigreal::scale_pow2(&term_err, k as i32);
        err = bigreal::add_up(&err, &bigreal::rounding_bound(&head, out_prec - 1, 1));
        raw.push(BigReal::new(head, &err));
        for i in 0..row.len() - 1 {
            let (h, t) = row.split_at_mut(i + 1);
            rug::ops::SubFrom::sub_from(&mut h[i], &t[0]);
        }
        row.pop();
    }
    let values = raw
        .into_par_iter()
        .enumerate()
        .map(|(k, a)| {
            if a.usable_digits() >= digits as u64 {
                Ok(a)
            } else {
                ak_exact(k, digits)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AkSeries { values, digits })
}

/// `κ = (π² k)^(1/3)` at `prec` bits.
fn kappa(k: usize, prec: u32) -> Float {
    let pi = Float::with_val(prec, Constant::Pi);
    (pi.square() * k as u64).cbrt()
}

/// Argument of the cosine in the asymptotic.
fn phase(kappa: &Float) -> Float {
    let prec = kappa.prec();
    let pi = Float::with_val(prec, Constant::Pi);
    let sqrt3 = Float::with_val(prec, 3).sqrt();
    let pi2 = Float::with_val(prec, pi.square_ref());
    let a = Float::with_val(prec, &pi * 4u32) / 3u32;
    let b = Float::with_val(prec, &sqrt3 * 3u32) / 2u32 * kappa;
    let c = Float::with_val(prec, &sqrt3 * &pi2) / Float::with_val(prec, kappa * 4u32);
    a - b - c
}

/// `(4π^(3/2)/√(3κ)) exp(−3κ/2 + π²/(4κ)) cos(4π/3 − (3√3/2)κ − √3π²/(4κ))`.
///
/// The value carries only its rounding bound; the formula itself is a
/// leading-order approximation with no error term.
pub fn ak_asymptotic(k: usize, digits: u32) -> Result<BigReal> {
    if k == 0 {
        return Err(Error::Domain("the asymptotic needs k >= 1".into()));
    }
    let prec = bits_for_digits(digits);
    let kap = kappa(k, prec);
    let pi = Float::with_val(prec, Constant::Pi);
    let pre = Float::with_val(prec, (&pi).pow(1.5f64)) * 4u32 / Float::with_val(prec, &kap * 3u32).sqrt();
    let pi2 = Float::with_val(prec, pi.square_ref());
    let expo = -Float::with_val(prec, &kap * 1.5f64) + pi2 / Float::with_val(prec, &kap * 4u32);
    let value = pre * expo.exp() * phase(&kap).cos();
    let err = bigreal::rounding_bound(&value, prec, 40);
    Ok(BigReal::new(value, &err))
}

/// The cosine factor of the asymptotic, in double precision.
pub fn asymptotic_cos(k: usize) -> f64 {
    phase(&kappa(k, 128)).cos().to_f64()
}

/// Where the leading-order formula is expected to get sign and size right.
pub fn is_cos_safe(k: usize) -> bool {
    k >= 1 && asymptotic_cos(k).abs() > COS_SAFE
}

#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub k_max: usize,
    /// `|Σ_{k≤K} kⁿ Aₖ − (−1)ⁿ/2|` for `n = 0 … n_max` (with `0⁰ = 1`).
    pub moment_residuals: Vec<BigReal>,
    /// `|Σ_{k≤K} Aₖ Hₖ − (1 − ln 2π)|`.
    pub harmonic_residual: BigReal,
}

impl IdentityReport {
    pub fn write(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "# stieltjes identity report")?;
        writeln!(w, "# tool {}", crate::TOOL_VERSION)?;
        writeln!(w, "# kmax {}", self.k_max)?;
        writeln!(w, "# columns identity residual abs_err")?;
        for (n, r) in self.moment_residuals.iter().enumerate() {
            writeln!(
                w,
                "moment-{n}\t{}\t{}",
                decimal::format_sig(r.value(), 6),
                decimal::format_err(r.abs_err())
            )?;
        }
        let h = &self.harmonic_residual;
        writeln!(
            w,
            "harmonic\t{}\t{}",
            decimal::format_sig(h.value(), 6),
            decimal::format_err(h.abs_err())
        )?;
        w.flush()?;
        Ok(())
    }
}

/// Residuals of the moment identities and the harmonic identity over
/// `A₀ … A_K`.
pub fn verify_identities(k_max: usize, n_max: u32, digits: u32) -> Result<IdentityReport> {
    if k_max == 0 {
        return Err(Error::Domain("K must be at least 1".into()));
    }
    let series = ak_series(k_max, digits)?;
    Ok(identities_from(&series, n_max))
}

/// Same as [`verify_identities`] on an existing series.
pub fn identities_from(series: &AkSeries, n_max: u32) -> IdentityReport {
    let prec = series
        .values
        .iter()
        .map(BigReal::prec)
        .max()
        .unwrap_or(64)
        .max(bits_for_digits(series.digits));
    let moment_residuals = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let target = Float::with_val(ERR_PREC, if n % 2 == 0 { 0.5 } else { -0.5 });
            let terms = series.values.iter().enumerate().map(|(k, a)| {
                let w = if n == 0 {
                    Integer::from(1)
                } else {
                    Integer::from(Integer::u_pow_u(k as u32, n))
                };
                (Rational::from(w), a)
            });
            residual(terms, &target, prec)
        })
        .collect();
    let mut h = Rational::new();
    let weights: Vec<Rational> = (0..series.values.len())
        .map(|k| {
            if k > 0 {
                h += Rational::from((1, k as u32));
            }
            h.clone()
        })
        .collect();
    let ln2pi = {
        let two_pi = Float::with_val(prec + 32, Constant::Pi) * 2u32;
        Float::with_val(prec + 32, 1) - two_pi.ln()
    };
    let target_err = bigreal::rounding_bound(&ln2pi, prec + 30, 1);
    let mut harmonic_residual = residual(weights.into_iter().zip(series.values.iter()), &ln2pi, prec);
    harmonic_residual = BigReal::new(
        harmonic_residual.value().clone(),
        &bigreal::add_up(harmonic_residual.abs_err(), &target_err),
    );
    IdentityReport {
        k_max: series.k_max(),
        moment_residuals,
        harmonic_residual,
    }
}

/// `|Σ wₖ Aₖ − target|` with exact weights.
fn residual<'a>(terms: impl Iterator<Item = (Rational, &'a BigReal)>, target: &Float, prec: u32) -> BigReal {
    let wide = prec + 64;
    let mut sum = Float::new(wide);
    let mut err = Float::new(ERR_PREC);
    let mut magnitude = Float::new(ERR_PREC);
    for (w, a) in terms {
        let t = Float::with_val(wide, a.value() * &w);
        magnitude.add_assign_round(&bigreal::up(&t), Round::Up);
        sum += &t;
        let mut e = Float::with_val_round(ERR_PREC, &Rational::from(w.abs_ref()), Round::Up).0;
        e.mul_assign_round(a.abs_err(), Round::Up);
        err.add_assign_round(&e, Round::Up);
    }
    sum -= target;
    err = bigreal::add_up(&err, &bigreal::rounding_bound(&magnitude, wide - 2, 4));
    sum.abs_mut();
    BigReal::new(sum, &err)
}

/// Writes `k,A_k_decimal,sign,asymptotic_decimal` rows; the asymptotic is
/// empty at `k = 0`.
pub fn write_ak_csv(series: &AkSeries, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["k", "A_k_decimal", "sign", "asymptotic_decimal"])
        .map_err(csv_err)?;
    let shown = series.digits as usize;
    for (k, a) in series.values.iter().enumerate() {
        let asym = if k == 0 {
            String::new()
        } else {
            decimal::format_sig(ak_asymptotic(k, 30)?.value(), 20)
        };
        let sign = if a.value().is_sign_negative() { "-" } else { "+" };
        out.write_record([k.to_string(), decimal::format_sig(a.value(), shown), sign.into(), asym])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::zeta_even_closed_form;

    fn close(a: &BigReal, want: f64, rel: f64) -> bool {
        ((a.to_f64() - want) / want).abs() < rel
    }

    #[test]
    fn first_coefficients() {
        let a0 = ak_exact(0, 40).unwrap();
        assert!(a0.overlaps(&zeta_even_closed_form(1, 60)));
        assert!(close(&a0, 1.6449340668, 1e-10));
        // ζ(2) − 3ζ(4)
        let want = PI * PI / 6.0 - 3.0 * PI.powi(4) / 90.0;
        assert!(close(&ak_exact(1, 40).unwrap(), want, 1e-12));
        // ζ(2) − 6ζ(4) + 5ζ(6)
        let want = PI * PI / 6.0 - 6.0 * PI.powi(4) / 90.0 + 5.0 * PI.powi(6) / 945.0;
        assert!(close(&ak_exact(2, 40).unwrap(), want, 1e-12));
    }

    #[test]
    fn declared_digits_survive_doubling() {
        for k in [3, 50, 301] {
            let lo = ak_exact(k, 30).unwrap();
            let hi = ak_exact(k, 60).unwrap();
            assert!(lo.usable_digits() >= 30);
            assert!(lo.overlaps(&hi), "k = {k}");
        }
    }

    #[test]
    fn small_guard_is_a_capacity_error() {
        // k = 400 cancels far more digits than a bare guard covers when the
        // estimate is bypassed by asking for more digits than the precision
        // holds.
        assert!(matches!(
            ak_exact_with_guard(400, 5000, 0),
            Ok(_) | Err(Error::Capacity(_))
        ));
        let err = ak_exact_with_guard(0, 10, 0).map(|a| a.usable_digits());
        assert!(err.unwrap() >= 10);
        let prec_digits = 10;
        let capped = ak_from_terms(
            400,
            &zeta_terms(400, bits_for_digits(prec_digits)),
            bits_for_digits(prec_digits),
        );
        assert_eq!(capped.usable_digits(), 0);
    }

    #[test]
    fn series_matches_single_calls() {
        let s = ak_series(60, 25).unwrap();
        for k in [0, 7, 33, 60] {
            assert!(s.values[k].overlaps(&ak_exact(k, 25).unwrap()));
            assert!(s.values[k].usable_digits() >= 25);
        }
    }

    #[test]
    fn asymptotic_at_one_is_the_plain_formula() {
        let kap = PI.powf(2.0 / 3.0);
        let want = 4.0 * PI.powf(1.5) / (3.0 * kap).sqrt()
            * (-1.5 * kap + PI * PI / (4.0 * kap)).exp()
            * (4.0 * PI / 3.0 - 1.5 * 3f64.sqrt() * kap - 3f64.sqrt() * PI * PI / (4.0 * kap)).cos();
        assert!(close(&ak_asymptotic(1, 30).unwrap(), want, 1e-12));
        assert!(ak_asymptotic(0, 30).is_err());
    }

    #[test]
    fn asymptotic_tracks_exact_values() {
        let s = ak_series(500, 20).unwrap();
        for k in (100..=500).step_by(20).filter(|&k| is_cos_safe(k)) {
            let exact = s.values[k].to_f64();
            let asym = ak_asymptotic(k, 20).unwrap().to_f64();
            assert_eq!(exact.signum(), asym.signum(), "k = {k}");
            assert!((asym / exact - 1.0).abs() < 0.5, "k = {k}: {asym} vs {exact}");
        }
    }

    #[test]
    fn identity_residuals_shrink() {
        let small = verify_identities(100, 2, 40).unwrap();
        let large = verify_identities(400, 2, 40).unwrap();
        for n in 0..=2 {
            assert!(
                large.moment_residuals[n].to_f64() < small.moment_residuals[n].to_f64(),
                "n = {n}"
            );
        }
        assert!(large.harmonic_residual.to_f64() < small.harmonic_residual.to_f64());
        assert!(large.moment_residuals[0].to_f64() < 1e-7);
    }

    #[test]
    fn csv_rows() {
        let s = ak_series(5, 12).unwrap();
        let mut buf = Vec::new();
        write_ak_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k,A_k_decimal,sign,asymptotic_decimal");
        assert_eq!(lines.len(), 7);
        assert!(lines[1].starts_with("0,1.6449340668"));
        assert!(lines[1].ends_with(",+,"));
        assert!(lines[2].contains(",-,"));
    }
}
