//! `γₙ = (n!/εⁿ) Σ_{k=n}^{k₀} |S_k^(n)| αₖ / k!`.
//!
//! Newton's forward-difference series gives
//! `εⁿ f⁽ⁿ⁾(1) = n! Σₖ S_k^(n) Δᵏf(1) / k!`; with `f⁽ⁿ⁾(1) = (−1)ⁿ γₙ`,
//! `Δᵏf(1) = (−1)ᵏ αₖ` and `sign S_k^(n) = (−1)^(k−n)` every weight is
//! positive. For `n = 1` the leading term is `α₁/ε ≈ −f′(1) = γ₁ < 0`.

use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;
use rug::float::Round;
use rug::ops::{AddAssignRound, DivAssignRound, MulAssignRound, Pow};
use rug::{Float, Integer, Rational};

use super::records::{self, Records};
use super::{AlphaSeries, StirlingTriangle};
use crate::bigreal::{self, bits_for_digits, BigReal, ERR_PREC};
use crate::decimal;
use crate::error::{Error, Result};

/// Explicit terms in the truncation-tail estimate before switching to a
/// geometric bound.
const TAIL_TERMS: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct GammaResult {
    pub n: usize,
    pub value: BigReal,
    /// Usable digits of `value` under its full error bound.
    pub guaranteed_digits: u64,
    pub eps_used: Rational,
    pub k0_used: usize,
}

/// `β_{nk} = n! |S_k^(n)| / (k! εⁿ)`, exactly.
pub fn beta(triangle: &StirlingTriangle, n: usize, k: usize, eps: &Rational) -> Rational {
    if n > k {
        return Rational::new();
    }
    let num = Integer::from(Integer::factorial(n as u32)) * Integer::from(triangle.get(k, n).abs_ref());
    let den = Integer::from(Integer::factorial(k as u32));
    Rational::from((num, den)) / Rational::from(eps.pow(n as i32))
}

/// `Σ_k β_{nk} αₖ` over the given exact inputs, in exact arithmetic.
pub fn gamma_exact(triangle: &StirlingTriangle, alphas: &[Rational], eps: &Rational, n: usize) -> Rational {
    alphas
        .iter()
        .enumerate()
        .skip(n)
        .map(|(k, a)| beta(triangle, n, k, eps) * a)
        .sum()
}

/// Everything shared between the `γₙ` of one series.
struct Prepared<'a> {
    series: &'a AlphaSeries,
    triangle: std::borrow::Cow<'a, StirlingTriangle>,
    /// `αₖ = ints[k] · 2^exp`
    ints: Vec<Integer>,
    exp: i32,
    /// `k₀!/k!`
    weights: Vec<Integer>,
    k0_fact: Integer,
    eps_num: Integer,
    eps_den: Integer,
    /// Bound on `|αₖ|` (true values) for `k = k₀+1`, and the decay ratio
    /// assumed after it.
    tail_start: Float,
    decay: Option<f64>,
    prec: u32,
}

impl<'a> Prepared<'a> {
    fn new(series: &'a AlphaSeries, triangle: &'a StirlingTriangle) -> Result<Self> {
        let k0 = series.k0();
        if triangle.k_max() < k0 {
            return Err(Error::Domain(format!(
                "Stirling triangle has {} rows, k0 = {k0} needs {}",
                triangle.k_max() + 1,
                k0 + 1
            )));
        }
        let triangle = if triangle.k_max() < k0 + TAIL_TERMS {
            let mut t = triangle.clone();
            t.extend_to(k0 + TAIL_TERMS);
            std::borrow::Cow::Owned(t)
        } else {
            std::borrow::Cow::Borrowed(triangle)
        };
        let parts: Vec<(Integer, i32)> = series
            .alphas()
            .iter()
            .map(|a| a.value().to_integer_exp().unwrap_or((Integer::new(), 0)))
            .collect();
        let exp = parts
            .iter()
            .filter(|(m, _)| *m != 0)
            .map(|(_, e)| *e)
            .min()
            .unwrap_or(0);
        let ints = parts
            .into_iter()
            .map(|(m, e)| if m == 0 { m } else { m << (e - exp) as u32 })
            .collect();
        let mut weights = vec![Integer::from(1); k0 + 1];
        for k in (0..k0).rev() {
            weights[k] = Integer::from(&weights[k + 1] * (k + 1) as u64);
        }
        let k0_fact = weights[0].clone();
        let (tail_start, decay) = tail_model(series);
        Ok(Prepared {
            series,
            triangle,
            ints,
            exp,
            weights,
            k0_fact,
            eps_num: series.eps().numer().clone(),
            eps_den: series.eps().denom().clone(),
            tail_start,
            decay,
            prec: bits_for_digits(series.source_digits()).max(128) + 64,
        })
    }

    /// `n! / (k₀! εⁿ)` as an exact rational.
    fn scale(&self, n: usize) -> Rational {
        let num = Integer::from(Integer::factorial(n as u32)) * Integer::from((&self.eps_den).pow(n as u32));
        let den = &self.k0_fact * Integer::from((&self.eps_num).pow(n as u32));
        Rational::from((num, den))
    }

    /// The truncated sum, exactly.
    fn exact_value(&self, n: usize) -> Rational {
        let k0 = self.series.k0();
        let mut z = Integer::new();
        for k in n..=k0 {
            let s = Integer::from(self.triangle.get(k, n).abs_ref());
            z += s * &self.ints[k] * &self.weights[k];
        }
        let mut r = self.scale(n) * z;
        if self.exp >= 0 {
            r <<= self.exp as u32;
        } else {
            r >>= (-self.exp) as u32;
        }
        r
    }

    /// `Σ_k β_{nk} 2ᵏ u`, rounded up.
    fn propagated_bound(&self, n: usize) -> Float {
        let k0 = self.series.k0();
        let mut w = Integer::new();
        for k in n..=k0 {
            let s = Integer::from(self.triangle.get(k, n).abs_ref());
            w += (s * &self.weights[k]) << k as u32;
        }
        let mut bound = Float::with_val_round(ERR_PREC, &self.scale(n), Round::Up).0;
        bound.mul_assign_round(&Float::with_val_round(ERR_PREC, &w, Round::Up).0, Round::Up);
        bound.mul_assign_round(self.series.node_err(), Round::Up);
        bound
    }

    /// Estimate of `Σ_{k>k₀} β_{nk} |αₖ|`, or `None` when the tail does not
    /// visibly converge.
    fn tail_estimate(&self, n: usize) -> Option<Float> {
        let k0 = self.series.k0();
        let rho = self.decay?;
        let rho_up = Float::with_val_round(ERR_PREC, rho, Round::Up).0;
        let n_fact = Float::with_val_round(ERR_PREC, &Integer::from(Integer::factorial(n as u32)), Round::Up).0;
        let eps_pow = Float::with_val_round(ERR_PREC, &Rational::from(self.series.eps().pow(n as i32)), Round::Down).0;

        let mut sum = Float::new(ERR_PREC);
        let mut amp = self.tail_start.clone();
        let mut last = Float::new(ERR_PREC);
        let mut prev = Float::new(ERR_PREC);
        for k in k0 + 1..=k0 + TAIL_TERMS {
            let s = Float::with_val_round(ERR_PREC, &self.triangle.get(k, n).abs(), Round::Up).0;
            let fact = Float::with_val_round(ERR_PREC, &Integer::from(Integer::factorial(k as u32)), Round::Down).0;
            let mut term = s;
            term.div_assign_round(&fact, Round::Up);
            term.mul_assign_round(&amp, Round::Up);
            sum.add_assign_round(&term, Round::Up);
            prev = last;
            last = term;
            amp.mul_assign_round(&rho_up, Round::Up);
        }
        // Geometric bound on the rest, using the last observed term ratio
        // with some slack.
        if !prev.is_zero() {
            let ratio = Float::with_val_round(ERR_PREC, &last / &prev, Round::Up).0 * 1.25f64;
            if ratio >= 1 {
                return None;
            }
            let mut rest = last.clone();
            rest.mul_assign_round(&ratio, Round::Up);
            let denom = Float::with_val_round(ERR_PREC, 1 - ratio, Round::Down).0;
            rest.div_assign_round(&denom, Round::Up);
            sum.add_assign_round(&rest, Round::Up);
        }
        sum.mul_assign_round(&n_fact, Round::Up);
        sum.div_assign_round(&eps_pow, Round::Up);
        Some(sum)
    }

    fn gamma(&self, n: usize) -> Result<GammaResult> {
        let k0 = self.series.k0();
        if n > k0 {
            return Err(Error::Capacity(format!(
                "gamma_{n} needs k0 >= {n} but the series stops at k0 = {k0}; {}",
                precision_hint(self.series, n)
            )));
        }
        let exact = self.exact_value(n);
        let value = Float::with_val(self.prec, &exact);
        let mut err = self.propagated_bound(n);
        let tail = self
            .tail_estimate(n)
            .ok_or_else(|| Error::Capacity(format!("gamma_{n}: the discarded terms do not visibly converge")))?;
        err = bigreal::add_up(&err, &tail);
        err = bigreal::add_up(&err, &bigreal::rounding_bound(&value, self.prec - 1, 1));
        let value = BigReal::new(value, &err);
        let guaranteed_digits = value.usable_digits();
        if guaranteed_digits == 0 {
            return Err(Error::Capacity(format!(
                "gamma_{n} has no guaranteed digit at k0 = {k0}; {}",
                precision_hint(self.series, n + 8)
            )));
        }
        Ok(GammaResult {
            n,
            value,
            guaranteed_digits,
            eps_used: self.series.eps().clone(),
            k0_used: k0,
        })
    }
}

/// A bound for `|α_{k₀+1}|` and a decay ratio for the terms after it.
///
/// The ratio is read off the last reliable `αₖ` (at least three usable
/// digits): the envelope of `log|αₖ|` over the later half of that window
/// against the earlier half, doubled for safety.
fn tail_model(series: &AlphaSeries) -> (Float, Option<f64>) {
    let reliable: Vec<(usize, f64)> = series
        .alphas()
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, a)| a.usable_digits() >= 3)
        .map(|(k, a)| (k, log10_abs(a.value())))
        .collect();
    let window = &reliable[reliable.len().saturating_sub(16)..];
    let decay = if window.len() >= 4 {
        let (early, late) = window.split_at(window.len() / 2);
        let env = |part: &[(usize, f64)]| part.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
        let span =
            (late[late.len() - 1].0 + late[0].0) as f64 / 2.0 - (early[early.len() - 1].0 + early[0].0) as f64 / 2.0;
        let slope = (env(late) - env(early)) / span;
        let rho = 2.0 * 10f64.powf(slope);
        (rho.is_finite() && rho < 0.9).then_some(rho)
    } else {
        None
    };
    let start = match series.boundary() {
        Some(b) => bigreal::add_up(&Float::with_val(b.prec(), b.value().abs_ref()), b.abs_err()),
        None => {
            let last = series.alphas().last().expect("non-empty");
            let mut a = bigreal::add_up(&Float::with_val(last.prec(), last.value().abs_ref()), last.abs_err());
            a.mul_assign_round(decay.unwrap_or(1.0), Round::Up);
            a
        }
    };
    (start, decay)
}

fn log10_abs(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    Float::with_val(64, x.abs_ref()).log10().to_f64()
}

/// Rough number of extra source digits needed to reach `k₀ ≥ n`: the
/// usable digits of `αₖ` fall by a fixed slope per step in `k`.
fn precision_hint(series: &AlphaSeries, n: usize) -> String {
    let digits = series.usable_digits();
    let k0 = series.k0();
    if k0 == 0 {
        return "recompute the table with more digits".into();
    }
    let slope = (digits[0] as f64 - digits[k0] as f64) / k0 as f64;
    let extra = ((n - k0.min(n)) as f64 * slope).ceil().max(1.0) as u64;
    format!(
        "recompute the table with about {} more digits ({} instead of {})",
        extra,
        series.source_digits() as u64 + extra,
        series.source_digits()
    )
}

/// `γₙ` with its guaranteed digits. Fails for `n > k₀` and when no digit
/// survives the error bound.
pub fn gamma_n(series: &AlphaSeries, triangle: &StirlingTriangle, n: usize) -> Result<GammaResult> {
    Prepared::new(series, triangle)?.gamma(n)
}

/// `γ₀ … γ_{k₀}`, one entry per `n`; refused entries carry their error.
pub fn gamma_all(series: &AlphaSeries, triangle: &StirlingTriangle) -> Result<Vec<Result<GammaResult>>> {
    let prepared = Prepared::new(series, triangle)?;
    Ok((0..=series.k0()).into_par_iter().map(|n| prepared.gamma(n)).collect())
}

/// The truncated sum `Σ_{k=n}^{k₀} β_{nk} αₖ` before any rounding.
pub fn gamma_n_exact(series: &AlphaSeries, triangle: &StirlingTriangle, n: usize) -> Result<Rational> {
    let prepared = Prepared::new(series, triangle)?;
    if n > series.k0() {
        return Err(Error::Capacity(format!("n = {n} exceeds k0 = {}", series.k0())));
    }
    Ok(prepared.exact_value(n))
}

const TITLE: &str = "stieltjes gamma results";

/// Writes results with `guaranteed_digits + 3` significant digits; the
/// written bound includes that rounding.
pub fn write_gammas(results: &[GammaResult], source_digits: u32, mut w: impl Write) -> Result<()> {
    writeln!(w, "# {TITLE}")?;
    writeln!(w, "# tool {}", crate::TOOL_VERSION)?;
    if let Some(first) = results.first() {
        writeln!(w, "# eps {}", first.eps_used)?;
        writeln!(w, "# k0 {}", first.k0_used)?;
    }
    writeln!(w, "# source-digits {source_digits}")?;
    writeln!(w, "# columns n gamma abs_err guaranteed_digits")?;
    for r in results {
        let (text, err) = rounded_text(&r.value, r.guaranteed_digits as usize + 3);
        let prec = r.value.prec();
        let printed = decimal::parse_float(&text, prec).expect("decimal");
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            r.n,
            text,
            decimal::format_err(&err),
            bigreal::usable_digits(&printed, &err)
        )?;
    }
    w.flush()?;
    Ok(())
}

fn rounded_text(value: &BigReal, sig: usize) -> (String, Float) {
    let text = decimal::format_sig(value.value(), sig);
    let printed = decimal::parse_rational(&text).expect("decimal");
    let exact = value.value().to_rational().expect("finite");
    let shift = Rational::from(&printed - &exact).abs();
    let shift = Float::with_val_round(ERR_PREC, &shift, Round::Up).0;
    let err = decimal::canonical_err(&bigreal::add_up(value.abs_err(), &shift));
    (text, err)
}

pub fn save_gammas(results: &[GammaResult], source_digits: u32, path: impl AsRef<Path>) -> Result<()> {
    crate::tabulation::write_atomic(path.as_ref(), |w| write_gammas(results, source_digits, w))
}

pub fn load_gammas(path: impl AsRef<Path>) -> Result<Vec<GammaResult>> {
    read_gammas(std::io::BufReader::new(fs::File::open(path)?))
}

pub fn read_gammas(r: impl BufRead) -> Result<Vec<GammaResult>> {
    let recs = Records::read(r, TITLE, 4)?;
    if recs.rows.is_empty() {
        return Ok(Vec::new());
    }
    let eps = recs.rational("eps")?;
    let k0: usize = recs.parse("k0")?;
    let digits: u32 = recs.parse("source-digits")?;
    let prec = bits_for_digits(digits).max(128) + 64;
    recs.rows
        .iter()
        .map(|(line, f)| {
            let n = records::field(*line, &f[0], "n")?;
            let value = decimal::parse_float(&f[1], prec).ok_or_else(|| Error::parse(*line, "bad gamma value"))?;
            let err = decimal::parse_err(&f[2]).ok_or_else(|| Error::parse(*line, "bad error bound"))?;
            let value = BigReal::new(value, &err);
            Ok(GammaResult {
                n,
                guaranteed_digits: value.usable_digits(),
                value,
                eps_used: eps.clone(),
                k0_used: k0,
            })
        })
        .collect()
}
