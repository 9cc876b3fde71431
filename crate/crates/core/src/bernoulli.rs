//! Exact Bernoulli numbers.
//!
//! The cache holds exact rationals only; floating-point callers convert an
//! entry once, at their own working precision. No cached value is ever
//! rounded, so repeated conversions cannot compound rounding errors.

use std::sync::{LazyLock, RwLock};

use rug::{Integer, Rational};

/// Even-index Bernoulli numbers `B₀, B₂, B₄, …`, grown on demand.
///
/// Extension happens under the write lock; every read afterwards is a
/// shared borrow of frozen entries.
pub struct BernoulliCache {
    even: RwLock<Vec<Rational>>,
}

static GLOBAL: LazyLock<BernoulliCache> = LazyLock::new(BernoulliCache::new);

impl BernoulliCache {
    pub fn new() -> Self {
        BernoulliCache {
            even: RwLock::new(vec![Rational::from(1)]),
        }
    }

    /// Process-wide cache shared by the zeta evaluators.
    pub fn global() -> &'static BernoulliCache {
        &GLOBAL
    }

    /// Number of even-index entries currently cached (`B₀ … B₂₍ₗₑₙ₋₁₎`).
    pub fn len(&self) -> usize {
        self.even.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Exact `Bₙ` with the convention `B₁ = −1/2`.
    pub fn get(&self, n: usize) -> Rational {
        match n {
            1 => Rational::from((-1, 2)),
            n if n % 2 == 1 => Rational::new(),
            n => self.with_even(n / 2, |b| b[n / 2].clone()),
        }
    }

    /// Runs `f` on `[B₀, B₂, …, B₂ₖ]` for at least `k` = `max_half_index`.
    pub fn with_even<T>(&self, max_half_index: usize, f: impl FnOnce(&[Rational]) -> T) -> T {
        {
            let even = self.even.read().unwrap();
            if even.len() > max_half_index {
                return f(&even);
            }
        }
        let mut even = self.even.write().unwrap();
        if even.len() <= max_half_index {
            // Grow geometrically: each rebuild is quadratic in the size.
            let target = max_half_index.max(2 * even.len());
            *even = even_bernoulli(target);
        }
        f(&even)
    }
}

impl Default for BernoulliCache {
    fn default() -> Self {
        Self::new()
    }
}

/// Exact `Bₙ` from the global cache (`B₁ = −1/2`).
pub fn bernoulli_exact(n: usize) -> Rational {
    BernoulliCache::global().get(n)
}

/// `[B₀, B₂, …, B₂ₖ]` from the tangent numbers,
/// `B₂ₖ = (−1)^(k−1) · 2k · Tₖ / (4ᵏ (4ᵏ − 1))`.
///
/// The tangent numbers are built with integer additions and small
/// multiplications only, `O(k²)` operations in total.
fn even_bernoulli(k: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(Rational::from(1));
    if k == 0 {
        return out;
    }
    let tangent = tangent_numbers(k);
    for (idx, t) in tangent.into_iter().enumerate() {
        let i = idx + 1;
        let four_i = Integer::from(1) << (2 * i as u32);
        let den = Integer::from(&four_i - 1u32) * &four_i;
        let mut num = t * Integer::from(2 * i as u64);
        if i % 2 == 0 {
            num = -num;
        }
        out.push(Rational::from((num, den)));
    }
    out
}

/// Tangent numbers `T₁ … Tₖ` (1, 2, 16, 272, 7936, …).
fn tangent_numbers(k: usize) -> Vec<Integer> {
    let mut t = vec![Integer::new(); k];
    t[0] = Integer::from(1);
    for i in 1..k {
        t[i] = Integer::from(&t[i - 1] * i as u64);
    }
    for i in 1..k {
        for j in i..k {
            let prev = Integer::from(&t[j - 1] * (j - i) as u64);
            t[j] *= (j - i + 2) as u64;
            t[j] += prev;
        }
    }
    t
}
