//! Real-argument Riemann zeta evaluation.
//!
//! Two independent methods are provided:
//!
//! * [`zeta_em`]: Euler–Maclaurin summation with exact Bernoulli numbers
//!   and a verified remainder bound.
//! * [`zeta_eta`]: the alternating series `η(s) = Σ (−1)^(n+1) n^−s`
//!   accelerated with Chebyshev weights, divided by `1 − 2^(1−s)`.
//!
//! [`f_reg`] evaluates `ζ(s) − 1/(s−1)` directly (the pole is cancelled
//! inside the Euler–Maclaurin formula, not by subtraction), with the
//! Euler–Mascheroni constant at `s = 1`.

use std::cmp::Ordering;
use std::f64::consts::{LN_10, LN_2, PI};

use rug::float::Round;
use rug::ops::{AddAssignRound, AssignRound, DivAssignRound, MulAssignRound, Pow, PowAssign};
use rug::{Float, Integer, Rational};

use crate::bernoulli::BernoulliCache;
use crate::bigreal::{self, bits_for_digits, BigReal, ERR_PREC};
use crate::error::{Error, Result};

/// Attempts at successively larger parameters before giving up.
const MAX_ATTEMPTS: u32 = 6;

/// Direct-sum length and correction order of an Euler–Maclaurin evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmPlan {
    pub n: u64,
    pub m: u64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Pole {
    Keep,
    Remove,
}

/// `ζ(s)` for real `s > 0`, `s ≠ 1`, with
/// `abs_err ≤ 10^−target_digits · max(1, |ζ(s)|)`.
pub fn zeta_em(s: &Rational, target_digits: u32) -> Result<BigReal> {
    check_zeta_domain(s, target_digits)?;
    euler_maclaurin(s, target_digits, Pole::Keep)
}

/// `f(s) = ζ(s) − 1/(s−1)` for `s > 1`, and `γ` at `s = 1`.
pub fn f_reg(s: &Rational, target_digits: u32) -> Result<BigReal> {
    if target_digits == 0 {
        return Err(Error::Domain("target_digits must be at least 1".into()));
    }
    if *s < 1 {
        return Err(Error::Domain(format!("f_reg needs s >= 1, got {s}")));
    }
    if *s == 1 {
        return Ok(euler_gamma(target_digits));
    }
    euler_maclaurin(s, target_digits, Pole::Remove)
}

/// The Euler–Mascheroni constant from the Euler–Maclaurin expansion of the
/// harmonic numbers, `γ = H_{N−1} − ln N + 1/(2N) + Σ B₂ⱼ/(2j N²ʲ) + R`.
pub fn euler_gamma(target_digits: u32) -> BigReal {
    euler_maclaurin(&Rational::from(1), target_digits.max(1), Pole::Remove)
        .expect("the harmonic expansion converges at every precision")
}

fn check_zeta_domain(s: &Rational, target_digits: u32) -> Result<()> {
    if target_digits == 0 {
        return Err(Error::Domain("target_digits must be at least 1".into()));
    }
    if s.cmp0() != Ordering::Greater {
        return Err(Error::Domain(format!("zeta needs s > 0, got {s}")));
    }
    if *s == 1 {
        return Err(Error::Domain("zeta has a pole at s = 1".into()));
    }
    Ok(())
}

/// `ln(|B₂ₖ| / (2k)!)` upper estimate, `ln 2 + ln ζ(2k) − 2k ln 2π`.
fn ln_bernoulli_ratio(k: u64) -> f64 {
    LN_2 + (PI * PI / 6.0).ln() - 2.0 * k as f64 * (2.0 * PI).ln()
}

/// Natural log of the Euler–Maclaurin remainder estimate after `m`
/// correction terms with `n` directly summed terms.
fn ln_remainder(s: f64, n: u64, m: u64) -> f64 {
    let poch: f64 = (0..=2 * m).map(|i| (s + i as f64).abs().ln()).sum();
    ln_bernoulli_ratio(m + 1) + poch - (s + 2.0 * m as f64 + 1.0) * (n as f64).ln()
}

/// Picks `(N, M)` minimising the work estimate `N + M/2` subject to the
/// remainder estimate meeting `ln_tol`. Only a starting point: the
/// rigorous bound is checked after evaluation.
pub fn plan_em(s: f64, ln_tol: f64) -> EmPlan {
    let mut best: Option<(f64, EmPlan)> = None;
    let mut n = 2u64;
    while n < 1 << 24 {
        let mut prev = f64::INFINITY;
        let mut m = 1u64;
        loop {
            let r = ln_remainder(s, n, m);
            if r <= ln_tol {
                let cost = n as f64 + m as f64 / 2.0;
                if best.is_none_or(|(c, _)| cost < c) {
                    best = Some((cost, EmPlan { n, m }));
                }
                break;
            }
            if r >= prev {
                break;
            }
            prev = r;
            m += 1;
        }
        if let Some((cost, _)) = best {
            if n as f64 > cost {
                break;
            }
        }
        n = (n + 1).max((n as f64 * 1.08) as u64);
    }
    best.expect("some plan converges").1
}

fn euler_maclaurin(s: &Rational, target_digits: u32, pole: Pole) -> Result<BigReal> {
    let s_approx = s.to_f64();
    // Budget half the tolerance for the truncation, half for rounding.
    let ln_tol = -(target_digits as f64) * LN_10 - LN_2;
    let mut plan = plan_em(s_approx, ln_tol);
    let mut prec = bits_for_digits(target_digits);
    for _ in 0..MAX_ATTEMPTS {
        let result = em_evaluate(s, prec, plan, pole);
        let mut tol = bigreal::ten_pow_neg_down(target_digits);
        if result.value().clone().abs() > 1 {
            tol *= result.value().clone().abs();
        }
        if *result.abs_err() <= tol {
            return Ok(result);
        }
        plan.n = plan.n * 5 / 4 + 1;
        plan.m += plan.m / 4 + 1;
        prec += 32;
    }
    Err(Error::Capacity(format!(
        "Euler-Maclaurin did not reach {target_digits} digits at s = {s}"
    )))
}

/// One Euler–Maclaurin evaluation at fixed parameters with its full error
/// bound: verified remainder, accumulated rounding and the rounding of `s`.
fn em_evaluate(s: &Rational, prec: u32, plan: EmPlan, pole: Pole) -> BigReal {
    let EmPlan { n: big_n, m } = plan;
    let (s_f, ord) = Float::with_val_round(prec, s, Round::Nearest);
    let s_exact = ord == Ordering::Equal;
    let s_is_one = pole == Pole::Remove && s_f == 1;
    let neg_s = Float::with_val(prec, -&s_f);
    let sm1 = Float::with_val(prec, &s_f - 1u32);

    let mut sum = Float::with_val(prec, 1u32);
    let mut mag = Float::with_val(ERR_PREC, 1u32);
    for k in 2..big_n {
        let mut t = Float::with_val(prec, k);
        if s_is_one {
            t.recip_mut();
        } else {
            t.pow_assign(&neg_s);
        }
        mag += &t;
        sum += &t;
    }

    // N^-s
    let mut n_pow = Float::with_val(prec, big_n);
    n_pow.pow_assign(&neg_s);
    let ln_n = Float::with_val(prec, big_n).ln();
    let integral = match (pole, s_is_one) {
        (Pole::Keep, _) => Float::with_val(prec, &n_pow * big_n) / &sm1,
        (Pole::Remove, true) => -ln_n.clone(),
        (Pole::Remove, false) => {
            let x = -Float::with_val(prec, &sm1 * &ln_n);
            x.exp_m1() / &sm1
        }
    };
    mag += integral.clone().abs();
    sum += &integral;

    let half = Float::with_val(prec, &n_pow / 2u32);
    mag += &half;
    sum += &half;

    // c_j = (s)_{2j−1} / (2j)! · N^{−s−2j+1}
    let n_sq = Float::with_val(prec, big_n) * big_n;
    let mut c = Float::with_val(prec, &n_pow * &s_f) / 2u32 / big_n;
    let corrections = BernoulliCache::global().with_even(m as usize, |b| {
        let mut acc = Float::new(prec);
        let mut acc_mag = Float::new(ERR_PREC);
        for j in 1..=m {
            let term = Float::with_val(prec, &b[j as usize]) * &c;
            acc_mag += term.clone().abs();
            acc += &term;
            let two_j = 2 * j;
            c *= Float::with_val(prec, &s_f + (two_j - 1)) * Float::with_val(prec, &s_f + two_j);
            c /= (two_j + 1) * (two_j + 2);
            c /= &n_sq;
        }
        (acc, acc_mag)
    });
    mag += &corrections.1;
    sum += &corrections.0;

    let remainder = em_remainder_bound(&s_f, big_n, m);
    let ulps = big_n + 6 * m + 30;
    let mut err = bigreal::add_up(&remainder, &bigreal::rounding_bound(&mag, prec - 1, ulps));
    if !s_exact {
        // |δs| ≤ 2^−prec |s|, times a bound on |d/ds| of the evaluated sum.
        let mut slope = bigreal::mul_up(&mag, &Float::with_val(ERR_PREC, big_n + 1).ln());
        slope += 1u32;
        if pole == Pole::Keep {
            let inv = Float::with_val_round(ERR_PREC, sm1.clone().abs(), Round::Down).0;
            let mut pole_slope = Float::with_val_round(ERR_PREC, inv.square_ref(), Round::Down).0;
            pole_slope.recip_round(Round::Up);
            slope += pole_slope;
        }
        let ds = bigreal::rounding_bound(&s_f, prec, 1);
        err = bigreal::add_up(&err, &bigreal::mul_up(&slope, &ds));
    }
    BigReal::new(sum, &err)
}

/// `|B₂ₘ₊₂| / (2M+2)! · (s)₂ₘ₊₁ · N^(−s−2M−1)`, rounded up. For real
/// `s > 0` the remainder is bounded by the first omitted term.
fn em_remainder_bound(s: &Float, big_n: u64, m: u64) -> Float {
    let b = BernoulliCache::global().with_even(m as usize + 1, |b| b[m as usize + 1].clone());
    let fact = Integer::from(Integer::factorial(2 * m as u32 + 2));
    let mut bound = Float::with_val_round(ERR_PREC, b.abs(), Round::Up).0;
    bound.div_assign_round(&Float::with_val_round(ERR_PREC, &fact, Round::Down).0, Round::Up);
    let s_up = Float::with_val_round(ERR_PREC, s, Round::Up).0;
    for i in 0..=2 * m {
        let mut f = s_up.clone();
        f.add_assign_round(i, Round::Up);
        bound.mul_assign_round(&f, Round::Up);
    }
    let s_down = Float::with_val_round(ERR_PREC, s, Round::Down).0;
    let mut expo = Float::with_val_round(ERR_PREC, &s_down + (2 * m + 1), Round::Down).0;
    expo = -expo;
    let base = Float::with_val(ERR_PREC, big_n);
    let mut p = Float::new(ERR_PREC);
    p.assign_round(base.pow(&expo), Round::Up);
    bound.mul_assign_round(&p, Round::Up);
    bound
}

/// Weights of the accelerated alternating series: `d_k = Σ_{i≤k} eᵢ` with
/// `e₀ = 1`, `eᵢ₊₁ = eᵢ · 4(n+i)(n−i) / ((2i+1)(2i+2))`; `d_n = T_n(3)`.
fn chebyshev_partial_sums(n: u64) -> Vec<Integer> {
    let mut d = Vec::with_capacity(n as usize + 1);
    let mut e = Integer::from(1);
    let mut acc = Integer::from(1);
    d.push(acc.clone());
    for i in 0..n {
        e *= 4 * (n + i) * (n - i);
        e.div_exact_mut(&Integer::from((2 * i + 1) * (2 * i + 2)));
        acc += &e;
        d.push(acc.clone());
    }
    d
}

/// `ζ(s)` for real `s > 0`, `s ≠ 1` through the alternating zeta function,
/// `ζ(s) = η(s) / (1 − 2^(1−s))`.
///
/// `η` is summed with Chebyshev-weighted partial sums; for real `s` the
/// truncation error of `η` is at most `1/d_n`.
pub fn zeta_eta(s: &Rational, target_digits: u32) -> Result<BigReal> {
    check_zeta_domain(s, target_digits)?;
    let s_approx = s.to_f64();
    let factor_approx = -((1.0 - s_approx) * LN_2).exp_m1();
    let amplification = (1.0 / factor_approx.abs()).max(1.0);
    let base = (3.0 + 8f64.sqrt()).ln();
    let mut n = (((target_digits as f64) * LN_10 + amplification.ln() + 2.0 * LN_2) / base).ceil() as u64 + 2;
    let mut prec =
        bits_for_digits(target_digits) + 2 * (64 - n.leading_zeros()) + amplification.log2().ceil() as u32 + 16;
    for _ in 0..MAX_ATTEMPTS {
        let result = eta_evaluate(s, prec, n);
        let mut tol = bigreal::ten_pow_neg_down(target_digits);
        if result.value().clone().abs() > 1 {
            tol *= result.value().clone().abs();
        }
        if *result.abs_err() <= tol {
            return Ok(result);
        }
        n += n / 4 + 1;
        prec += 32;
    }
    Err(Error::Capacity(format!(
        "eta series did not reach {target_digits} digits at s = {s}"
    )))
}

fn eta_evaluate(s: &Rational, prec: u32, n: u64) -> BigReal {
    let (s_f, ord) = Float::with_val_round(prec, s, Round::Nearest);
    let neg_s = Float::with_val(prec, -&s_f);
    let d = chebyshev_partial_sums(n);
    let d_n = &d[n as usize];

    let mut sum = Float::new(prec);
    let mut mag = Float::new(ERR_PREC);
    for k in 0..n {
        let weight = Integer::from(d_n - &d[k as usize]);
        let mut t = Float::with_val(prec, k + 1);
        t.pow_assign(&neg_s);
        t *= Float::with_val(prec, &weight);
        mag += t.clone().abs();
        if k % 2 == 0 {
            sum += &t;
        } else {
            sum -= &t;
        }
    }
    // 1 − 2^(1−s) = −expm1((1−s) ln 2)
    let ln2 = Float::with_val(prec, rug::float::Constant::Log2);
    let factor = -Float::with_val(prec, Float::with_val(prec, 1u32 - &s_f) * &ln2).exp_m1();
    let d_n_f = Float::with_val(prec, d_n);
    let denom = Float::with_val(prec, &d_n_f * &factor);
    let value = Float::with_val(prec, &sum / &denom);

    let denom_down = Float::with_val_round(ERR_PREC, denom.abs_ref(), Round::Down).0;
    // truncation: |η error| ≤ 1/d_n, doubled for the rounding of `factor`
    let mut trunc = Float::with_val_round(ERR_PREC, 2u32, Round::Up).0;
    trunc.div_assign_round(&denom_down, Round::Up);
    let mut rounding = bigreal::rounding_bound(&mag, prec - 1, 4 * n + 10);
    rounding.div_assign_round(&denom_down, Round::Up);
    let tail = bigreal::rounding_bound(&value, prec - 1, 16);
    let mut err = bigreal::add_up(&bigreal::add_up(&trunc, &rounding), &tail);
    if ord != Ordering::Equal {
        let mut slope = bigreal::mul_up(&bigreal::up(&value), &Float::with_val(ERR_PREC, n + 1).ln());
        let inv = Float::with_val_round(ERR_PREC, factor.abs_ref(), Round::Down).0;
        let mut pole = Float::with_val_round(ERR_PREC, inv.square_ref(), Round::Down).0;
        pole.recip_round(Round::Up);
        slope += pole;
        slope += 1u32;
        err = bigreal::add_up(&err, &bigreal::mul_up(&slope, &bigreal::rounding_bound(&s_f, prec, 1)));
    }
    BigReal::new(value, &err)
}
