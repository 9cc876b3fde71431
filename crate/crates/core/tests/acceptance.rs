//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so every line is printed; the process fails if any criterion
//! does.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::{Float, Rational};

use stieltjes_core::ak::{ak_asymptotic, ak_series, asymptotic_cos, identities_from, COS_SAFE};
use stieltjes_core::oracles::{
    agreeing_digits, gamma_limit_estimate, gamma_limit_oracle, zeta_cross_check, zeta_even_closed_form,
};
use stieltjes_core::stieltjes::{compute_alphas, gamma_n, stirling_signed, AlphaSeries, GammaResult};
use stieltjes_core::tabulation::{scan_corruption, tabulate, NodeTable, DEFAULT_FACTOR};
use stieltjes_core::zeta::{euler_gamma, zeta_em};
use stieltjes_core::BigReal;

// Pinned parameters and tolerances.
const C1_TERMS: u64 = 12366;
const C1_MIN_DIGITS: u64 = 10;
const C1_MAX_DIGITS_EXCLUSIVE: u64 = 12;
const C1_TIME: Duration = Duration::from_secs(10);

const C2_EPS_LOG2: u32 = 6;
const C2_DIGITS: u32 = 200;
const C2_NODES: usize = 400;
const C2_ORACLE_TERMS: u64 = 1_000_000;
const C2_TIME: Duration = Duration::from_secs(600);
/// `(−1)ⁿ γₙ / n!` as listed for n = 1 … 8, with the number of decimal
/// places to compare and whether the listing is rounded (else truncated).
const JENSEN: [(&str, usize, bool); 8] = [
    ("+0.072815845", 9, true),
    ("-0.004845182", 9, true),
    ("-0.000342306", 9, true),
    ("+0.0000968", 7, false),
    ("-0.000006611", 9, true),
    ("-0.000000332", 9, true),
    ("+0.000000105", 9, true),
    ("-0.000000009", 9, true),
];

const C3_N: usize = 10;
const C3_DIGITS: u32 = 300;
const C3_EPS_LOG2: [u32; 2] = [5, 8];
const C3_NODES: usize = 220;

const C4_EPS_LOG2: u32 = 6;
const C4_DIGITS: u32 = 100;
const C4_NODES: usize = 200;
const C4_SAMPLES: usize = 10;
const C4_SEED: u64 = 0x5eed_0004;

const C5_K_SMALL: usize = 500;
const C5_K_LARGE: usize = 2000;
const C5_DIGITS: u32 = 30;
/// Residual ceiling for Σ Aₖ at K = 2000 and for the harmonic identity,
/// fixed from partial sums computed before this suite was written.
const C5_THRESHOLD: f64 = 1e-3;

const C6_K: (usize, usize) = (100, 2000);
const C6_DIGITS: u32 = 20;

const C7_EPS_LOG2: u32 = 6;
const C7_DIGITS: u32 = 200;
const C7_NODES: usize = 500;
const C7_NODE: usize = 50;
const C7_POSITION: usize = 150;
const C7_MAX_ORDER: usize = 250;
const C7_CLEAN_TABLES: usize = 20;
const C7_SEED: u64 = 0x5eed_0007;

const C8_DIGITS: u32 = 1000;
const C8_MIN_AGREEMENT: u64 = 995;

const C9_EPS_LOG2: u32 = 6;
const C9_NODES: usize = 150;
const C9_DIGITS: [u32; 4] = [40, 60, 90, 130];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn eps(log2: u32) -> Rational {
    Rational::from((1, 1u64 << log2))
}

fn series(log2: u32, nodes: usize, digits: u32) -> (NodeTable, AlphaSeries) {
    let table = tabulate(&eps(log2), nodes, digits, 1).expect("tabulate");
    let alphas = compute_alphas(&table).expect("alphas");
    (table, alphas)
}

fn gamma(series: &AlphaSeries, n: usize) -> GammaResult {
    gamma_n(series, &stirling_signed(series.k0()), n).expect("gamma")
}

/// `|a − b| ≤ err_a + err_b`: neither value contradicts the other's
/// declared digits.
fn compatible(a: &BigReal, b: &BigReal) -> bool {
    a.overlaps(b)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let oracle = gamma_limit_oracle(0, C1_TERMS, 30);
    let elapsed = start.elapsed();
    let gamma = euler_gamma(40);
    let diff = Float::with_val(200, oracle.value() - gamma.value()).abs();
    let correct = (-diff.clone().log10().to_f64()).floor().max(0.0) as u64;
    outcome(
        (C1_MIN_DIGITS..C1_MAX_DIGITS_EXCLUSIVE).contains(&correct) && elapsed < C1_TIME,
        format!(
            "H_m − ln m at m = {C1_TERMS}: {correct} correct digits (|error| = {:.3e}), wanted {C1_MIN_DIGITS} and not {C1_MAX_DIGITS_EXCLUSIVE}; {elapsed:.2?}",
            diff.to_f64()
        ),
    )
}

/// `x` rounded (or truncated) to `places` decimals, as text with a sign.
fn to_places(x: &Float, places: usize, round: bool) -> String {
    let scale = Float::with_val(x.prec(), 10u32).pow(places as u32);
    let scaled = Float::with_val(x.prec(), x * &scale);
    let int = if round { scaled.round() } else { scaled.trunc() };
    let int = int.to_integer().unwrap();
    let sign = if x.is_sign_negative() { '-' } else { '+' };
    let digits = format!("{:0>width$}", int.abs().to_string(), width = places + 1);
    let (whole, frac) = digits.split_at(digits.len() - places);
    format!("{sign}{whole}.{frac}")
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let (_, alphas) = series(C2_EPS_LOG2, C2_NODES, C2_DIGITS);
    let mut mismatches = Vec::new();
    let mut g1 = None;
    for (i, (text, places, round)) in JENSEN.iter().enumerate() {
        let n = i + 1;
        let g = gamma(&alphas, n);
        let mut q = g.value.value().clone() / rug::Integer::from(rug::Integer::factorial(n as u32));
        if n % 2 == 1 {
            q = -q;
        }
        let ours = to_places(&q, *places, *round);
        if ours != *text {
            mismatches.push(format!("n = {n}: {ours} vs {text}"));
        }
        if n == 1 {
            g1 = Some(g.value);
        }
    }
    let g1 = g1.unwrap();
    let oracle = gamma_limit_estimate(1, C2_ORACLE_TERMS, 30);
    let sign_ok = g1.value().is_sign_negative() && compatible(&g1, &oracle);
    let elapsed = start.elapsed();
    outcome(
        mismatches.is_empty() && sign_ok && elapsed < C2_TIME,
        format!(
            "γ₁..γ₈ vs listed (−1)ⁿγₙ/n!: {} mismatches {:?}; γ₁ = {:.10} negative and within the m = 10⁶ oracle ({:.6} ± {:.1e}): {sign_ok}; {elapsed:.1?}",
            mismatches.len(),
            mismatches,
            g1.to_f64(),
            oracle.to_f64(),
            oracle.abs_err().to_f64()
        ),
    )
}

fn criterion_3() -> Outcome {
    let runs: Vec<GammaResult> = C3_EPS_LOG2
        .iter()
        .map(|&l| gamma(&series(l, C3_NODES, C3_DIGITS).1, C3_N))
        .collect();
    let (a, b) = (&runs[0], &runs[1]);
    let common = a.guaranteed_digits.min(b.guaranteed_digits);
    let agree = agreeing_digits(&a.value, &b.value);
    outcome(
        compatible(&a.value, &b.value) && agree >= common && common > 0,
        format!(
            "γ₁₀ at ε = 2^-5 ({} digits, k0 = {}) and 2^-8 ({} digits, k0 = {}): agree on {agree} of {common} common guaranteed digits",
            a.guaranteed_digits, a.k0_used, b.guaranteed_digits, b.k0_used
        ),
    )
}

fn criterion_4() -> Outcome {
    let (_, lo) = series(C4_EPS_LOG2, C4_NODES, C4_DIGITS);
    let (_, hi) = series(C4_EPS_LOG2, C4_NODES, 2 * C4_DIGITS);
    let mut rng = ChaCha8Rng::seed_from_u64(C4_SEED);
    let mut ns: Vec<usize> = (0..=lo.k0()).collect();
    ns.shuffle(&mut rng);
    let tri = stirling_signed(hi.k0());
    let mut checked = Vec::new();
    let mut bad = Vec::new();
    for &n in ns.iter() {
        if checked.len() == C4_SAMPLES {
            break;
        }
        let Ok(a) = gamma_n(&lo, &tri, n) else { continue };
        let b = gamma_n(&hi, &tri, n).expect("more digits cannot lose n");
        if !compatible(&a.value, &b.value) || b.guaranteed_digits < a.guaranteed_digits {
            bad.push(n);
        }
        checked.push(n);
    }
    checked.sort();
    outcome(
        bad.is_empty() && checked.len() == C4_SAMPLES,
        format!(
            "n = {checked:?} at {C4_DIGITS} vs {} digits (k0 = {}): {} changed a guaranteed digit {bad:?}",
            2 * C4_DIGITS,
            lo.k0(),
            bad.len()
        ),
    )
}

fn criterion_5() -> Outcome {
    let large = ak_series(C5_K_LARGE, C5_DIGITS).expect("A_k");
    let small = stieltjes_core::ak::AkSeries {
        values: large.values[..=C5_K_SMALL].to_vec(),
        digits: large.digits,
    };
    let r_small = identities_from(&small, 0);
    let r_large = identities_from(&large, 0);
    let (s0, l0) = (
        r_small.moment_residuals[0].to_f64(),
        r_large.moment_residuals[0].to_f64(),
    );
    let (sh, lh) = (r_small.harmonic_residual.to_f64(), r_large.harmonic_residual.to_f64());
    let pass = l0 < C5_THRESHOLD && l0 < s0 && lh < C5_THRESHOLD && lh < sh;
    outcome(
        pass,
        format!(
            "|Σ Aₖ − 1/2|: {s0:.3e} at K = {C5_K_SMALL}, {l0:.3e} at K = {C5_K_LARGE}; |Σ AₖHₖ − (1 − ln 2π)|: {sh:.3e}, {lh:.3e}; threshold {C5_THRESHOLD:e}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let exact = ak_series(C6_K.1, C6_DIGITS).expect("A_k");
    let mut safe = 0;
    let mut sign_errors = Vec::new();
    let mut points = Vec::new();
    for k in C6_K.0..=C6_K.1 {
        if asymptotic_cos(k).abs() <= COS_SAFE {
            continue;
        }
        safe += 1;
        let a = exact.values[k].to_f64();
        let b = ak_asymptotic(k, C6_DIGITS).unwrap().to_f64();
        if a.signum() != b.signum() {
            sign_errors.push(k);
        }
        points.push(((k as f64).ln(), (b / a - 1.0).abs().ln()));
    }
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(x, y), p| (x + p.0 / n, y + p.1 / n));
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let half = points.len() / 2;
    let mean = |p: &[(f64, f64)]| p.iter().map(|q| q.1.exp()).sum::<f64>() / p.len() as f64;
    let (early, late) = (mean(&points[..half]), mean(&points[half..]));
    outcome(
        sign_errors.is_empty() && slope < 0.0 && late < early,
        format!(
            "{safe} cos-safe k in [{}, {}]: {} sign disagreements; relative error slope {slope:.2} in log-log, mean {early:.2e} (lower half) → {late:.2e} (upper half)",
            C6_K.0,
            C6_K.1,
            sign_errors.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let table = tabulate(&eps(C7_EPS_LOG2), C7_NODES, C7_DIGITS, 1).expect("tabulate");
    let (bad, delta) = table.with_flipped_digit(C7_NODE, C7_POSITION).expect("flip");
    let scan = scan_corruption(&bad, C7_MAX_ORDER, DEFAULT_FACTOR).unwrap();
    let found = scan.first_order_containing(C7_NODE);
    let full_clean = scan_corruption(&table, C7_MAX_ORDER, DEFAULT_FACTOR)
        .unwrap()
        .is_clean();

    let mut rng = ChaCha8Rng::seed_from_u64(C7_SEED);
    let mut dirty = Vec::new();
    for i in 0..C7_CLEAN_TABLES {
        use rand::Rng;
        let log2 = rng.gen_range(3..=9);
        let digits = rng.gen_range(30..=120);
        let nodes = rng.gen_range(60..=160);
        let t = tabulate(&eps(log2), nodes, digits, 1).expect("tabulate");
        let s = scan_corruption(&t, nodes / 2, DEFAULT_FACTOR).unwrap();
        if !s.is_clean() {
            dirty.push((i, log2, digits, nodes));
        }
    }
    outcome(
        found.is_some() && full_clean && dirty.is_empty(),
        format!(
            "flip of {delta:+} at digit {C7_POSITION} of node {C7_NODE}: first flagged at order {found:?}, narrowed ranges {:?}; unflipped table clean: {full_clean}; {} of {C7_CLEAN_TABLES} random clean tables flagged {dirty:?}",
            scan.ranges(),
            dirty.len()
        ),
    )
}

fn criterion_8() -> Outcome {
    let s_list = [Rational::from((1, 2)), Rational::from((3, 2)), Rational::from(3)];
    let report = zeta_cross_check(&s_list, C8_DIGITS).expect("cross check");
    let worst = report.entries.iter().map(|e| e.agreeing_digits).min().unwrap();
    let mut closed = Vec::new();
    for k in [1u32, 2] {
        let em = zeta_em(&Rational::from(2 * k), C8_DIGITS).unwrap();
        let cf = zeta_even_closed_form(k, C8_DIGITS + 10);
        closed.push((2 * k, em.overlaps(&cf), agreeing_digits(&em, &cf)));
    }
    let closed_ok = closed.iter().all(|(_, ok, d)| *ok && *d >= C8_DIGITS as u64);
    outcome(
        worst >= C8_MIN_AGREEMENT && report.all_consistent() && closed_ok,
        format!(
            "EM vs eta at s = 1/2, 3/2, 3 and {C8_DIGITS} digits: worst agreement {worst} digits (need {C8_MIN_AGREEMENT}); ζ(2), ζ(4) vs closed form (s, consistent, digits): {closed:?}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let k0: Vec<usize> = C9_DIGITS
        .iter()
        .map(|&d| series(C9_EPS_LOG2, C9_NODES, d).1.k0())
        .collect();
    let monotone = k0.windows(2).all(|w| w[0] <= w[1]);
    outcome(
        monotone,
        format!(
            "large-scale results not reproduced at desk scale (declared); k0 at ε = 2^-{C9_EPS_LOG2} for digits {C9_DIGITS:?}: {k0:?}, non-decreasing: {monotone}"
        ),
    )
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (id, run) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let status = if result.pass { "PASS" } else { "FAIL" };
        if !result.pass {
            failed += 1;
        }
        println!("{status} criterion {id}: {} [{:.1?}]", result.detail, start.elapsed());
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
