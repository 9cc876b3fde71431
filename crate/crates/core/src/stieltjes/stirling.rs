//! Signed Stirling numbers of the first kind.

use rug::Integer;

/// `S_k^(n)` for `0 ≤ n ≤ k ≤ k_max`, with `x(x−1)…(x−k+1) = Σ S_k^(n) xⁿ`
/// and so `(x)_k = x(x+1)…(x+k−1) = Σ |S_k^(n)| xⁿ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StirlingTriangle {
    rows: Vec<Vec<Integer>>,
}

impl StirlingTriangle {
    pub fn new(k_max: usize) -> Self {
        let mut t = StirlingTriangle {
            rows: vec![vec![Integer::from(1)]],
        };
        t.extend_to(k_max);
        t
    }

    pub fn k_max(&self) -> usize {
        self.rows.len() - 1
    }

    /// Adds rows with `S_{k+1}^(n) = S_k^(n−1) − k·S_k^(n)`.
    pub fn extend_to(&mut self, k_max: usize) {
        while self.rows.len() <= k_max {
            let k = self.rows.len() - 1;
            let prev = &self.rows[k];
            let mut next = Vec::with_capacity(k + 2);
            next.push(Integer::new());
            for n in 1..=k + 1 {
                let mut v = prev[n - 1].clone();
                if n <= k {
                    v -= Integer::from(&prev[n] * k as u64);
                }
                next.push(v);
            }
            self.rows.push(next);
        }
    }

    /// Row `k`: `[S_k^(0), …, S_k^(k)]`.
    pub fn row(&self, k: usize) -> &[Integer] {
        &self.rows[k]
    }

    /// `S_k^(n)`, zero for `n > k`. Panics if `k > k_max`.
    pub fn get(&self, k: usize, n: usize) -> Integer {
        self.rows[k].get(n).cloned().unwrap_or_default()
    }
}

/// Exact triangle up to row `k_max`.
pub fn stirling_signed(k_max: usize) -> StirlingTriangle {
    StirlingTriangle::new(k_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_values() {
        let t = stirling_signed(6);
        assert_eq!(t.get(3, 2), -3);
        assert_eq!(t.get(5, 1), 24);
        assert_eq!(t.get(0, 0), 1);
        assert_eq!(t.get(4, 0), 0);
        assert_eq!(t.get(4, 4), 1);
        assert_eq!(t.get(4, 3), -6);
        assert_eq!(t.get(2, 5), 0);
        let row4: Integer = t.row(4).iter().map(|x| Integer::from(x.abs_ref())).sum();
        assert_eq!(row4, 24);
    }

    #[test]
    fn rising_factorial_expansion() {
        // (x)_k evaluated at x = 3 directly and through the row
        let t = stirling_signed(12);
        for k in 0..=12usize {
            let direct: Integer = (0..k).map(|i| Integer::from(3 + i as u64)).product();
            let via: Integer = t
                .row(k)
                .iter()
                .enumerate()
                .map(|(n, s)| Integer::from(s.abs_ref()) * Integer::from(Integer::u_pow_u(3, n as u32)))
                .sum();
            assert_eq!(direct, via, "k = {k}");
        }
    }

    #[test]
    fn extension_matches_fresh_build() {
        let mut t = stirling_signed(10);
        t.extend_to(40);
        assert_eq!(t, stirling_signed(40));
        assert_eq!(t.k_max(), 40);
    }

    proptest! {
        #[test]
        fn row_sums_and_recurrence(k in 1usize..120) {
            let t = stirling_signed(k);
            let abs_sum: Integer = t.row(k).iter().map(|x| Integer::from(x.abs_ref())).sum();
            prop_assert_eq!(abs_sum, Integer::from(Integer::factorial(k as u32)));
            // signed row sums vanish for k ≥ 2: x(x−1)… at x = 1
            let signed: Integer = t.row(k).iter().sum();
            prop_assert_eq!(signed, Integer::from(if k == 1 { 1 } else { 0 }));
            for n in 1..=k {
                let expected = t.get(k - 1, n - 1) - Integer::from((k - 1) as u64) * t.get(k - 1, n);
                prop_assert_eq!(t.get(k, n), expected);
            }
            for n in 0..=k {
                let s = t.get(k, n);
                if s != 0 {
                    prop_assert_eq!(s.cmp0() == std::cmp::Ordering::Greater, (k - n) % 2 == 0);
                }
            }
        }
    }
}
