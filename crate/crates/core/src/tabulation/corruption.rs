//! Finite-difference screening for corrupted node values.
//!
//! High-order differences of a smooth function stay smooth: neighbouring
//! entries have similar size and, away from isolated zeros, equal sign.
//! A wrong digit `δ` in node `c` adds `(−1)^k C(m,k) δ` to the `m`-th
//! differences at `c − m + k`, a burst of alternating signs. Exact integer
//! arithmetic keeps the differences free of rounding, so the only noise
//! is the stored-value rounding itself.

use std::ops::RangeInclusive;

use rug::ops::SubFrom;
use rug::Integer;

use super::NodeTable;
use crate::error::{Error, Result};

/// Default ratio between a flagged difference and its local baseline.
pub const DEFAULT_FACTOR: f64 = 1e3;

/// Flags at one or more difference orders.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CorruptionScan {
    /// `(order, node ranges)` for every order that flagged something.
    pub flagged: Vec<(usize, Vec<RangeInclusive<usize>>)>,
}

impl CorruptionScan {
    pub fn is_clean(&self) -> bool {
        self.flagged.is_empty()
    }

    /// Union of all flagged node ranges.
    pub fn union(&self) -> Vec<RangeInclusive<usize>> {
        merge(self.all_ranges().cloned().collect())
    }

    /// Suspect ranges, narrowed across orders: each connected component
    /// of [`union`](Self::union) is replaced by the intersection of the
    /// per-order ranges inside it, when that is non-empty. One bad node
    /// lies in every range it causes, so the intersection keeps it.
    pub fn ranges(&self) -> Vec<RangeInclusive<usize>> {
        self.union()
            .into_iter()
            .map(|component| {
                let (lo, hi) = self
                    .all_ranges()
                    .filter(|r| component.contains(r.start()))
                    .fold((*component.start(), *component.end()), |(lo, hi), r| {
                        (lo.max(*r.start()), hi.min(*r.end()))
                    });
                if lo <= hi {
                    lo..=hi
                } else {
                    component
                }
            })
            .collect()
    }

    fn all_ranges(&self) -> impl Iterator<Item = &RangeInclusive<usize>> {
        self.flagged.iter().flat_map(|(_, r)| r.iter())
    }

    /// Lowest order whose flags contain node `j`.
    pub fn first_order_containing(&self, j: usize) -> Option<usize> {
        self.flagged
            .iter()
            .find(|(_, ranges)| ranges.iter().any(|r| r.contains(&j)))
            .map(|(order, _)| *order)
    }
}

/// Node ranges flagged at difference `order` with the default factor.
pub fn detect_corruption(table: &NodeTable, order: usize) -> Result<Vec<RangeInclusive<usize>>> {
    detect_corruption_with(table, order, DEFAULT_FACTOR)
}

pub fn detect_corruption_with(table: &NodeTable, order: usize, factor: f64) -> Result<Vec<RangeInclusive<usize>>> {
    check(table, order, factor)?;
    let mut d = scaled_values(table);
    for _ in 0..order {
        difference(&mut d);
    }
    Ok(flag(&d, order, factor, table.count()))
}

/// Runs the detector at every order in `1..=max_order`, reusing each
/// difference row for the next.
pub fn scan_corruption(table: &NodeTable, max_order: usize, factor: f64) -> Result<CorruptionScan> {
    check(table, max_order.max(1), factor)?;
    let mut d = scaled_values(table);
    let mut scan = CorruptionScan::default();
    for order in 1..=max_order {
        difference(&mut d);
        let ranges = flag(&d, order, factor, table.count());
        if !ranges.is_empty() {
            scan.flagged.push((order, ranges));
        }
    }
    Ok(scan)
}

fn check(table: &NodeTable, order: usize, factor: f64) -> Result<()> {
    if !table.is_complete() {
        return Err(Error::Domain("corruption scan needs a complete table".into()));
    }
    if order == 0 || order >= table.count() {
        return Err(Error::Domain(format!(
            "difference order must be in 1..{}, got {order}",
            table.count()
        )));
    }
    // Also rejects NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(factor > 1.0) {
        return Err(Error::Domain(format!("threshold factor must exceed 1, got {factor}")));
    }
    Ok(())
}

/// Node values as integers over a common power of two.
fn scaled_values(table: &NodeTable) -> Vec<Integer> {
    let parts: Vec<(Integer, i32)> = table
        .nodes()
        .iter()
        .map(|n| n.f.value().to_integer_exp().unwrap_or((Integer::new(), i32::MAX)))
        .collect();
    let min_exp = parts.iter().map(|(_, e)| *e).min().unwrap_or(0);
    parts
        .into_iter()
        .map(|(m, e)| if e == i32::MAX { m } else { m << (e - min_exp) as u32 })
        .collect()
}

fn difference(d: &mut Vec<Integer>) {
    for i in 0..d.len() - 1 {
        let (head, tail) = d.split_at_mut(i + 1);
        head[i].sub_from(&tail[0]);
    }
    d.pop();
}

fn log10_abs(x: &Integer) -> f64 {
    let bits = x.significant_bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    let shift = bits.saturating_sub(64);
    let top = (Integer::from(x.abs_ref()) >> shift).to_f64();
    top.log10() + shift as f64 * std::f64::consts::LOG10_2
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values[values.len() / 2]
}

/// Flags alternating bursts in one difference row and maps them to node
/// ranges.
fn flag(d: &[Integer], order: usize, factor: f64, count: usize) -> Vec<RangeInclusive<usize>> {
    let len = d.len();
    let lg: Vec<f64> = d.iter().map(log10_abs).collect();
    let sign: Vec<i32> = d.iter().map(|x| x.cmp0() as i32).collect();

    // The baseline window is wide enough that a burst of `order + 1`
    // entries cannot pull the median up; medians are taken at block
    // centres to keep the scan cheap.
    let half = (2 * (order + 1)).max(8);
    let step = (half / 4).max(1);
    let centres: Vec<f64> = (0..len)
        .step_by(step)
        .map(|c| {
            let lo = c.saturating_sub(half);
            let hi = (c + half).min(len - 1);
            median(&mut lg[lo..=hi].to_vec())
        })
        .collect();
    let baseline = |i: usize| centres[((i + step / 2) / step).min(centres.len() - 1)];

    let thr = factor.log10();
    let elevated: Vec<bool> = (0..len).map(|i| lg[i] > baseline(i) + thr).collect();
    // link i joins entries i and i+1 when both are elevated with opposite
    // signs. A bad node gives `order + 1` alternating entries; a smooth
    // row crossing zero gives a single sign change, so at least two
    // consecutive links are required (one at order 1).
    let link: Vec<bool> = (0..len.saturating_sub(1))
        .map(|i| elevated[i] && elevated[i + 1] && sign[i] != 0 && sign[i] == -sign[i + 1])
        .collect();
    let need = order.min(2);
    let mut in_chain = vec![false; len];
    let mut i = 0;
    while i < link.len() {
        if !link[i] {
            i += 1;
            continue;
        }
        let a = i;
        while i < link.len() && link[i] {
            i += 1;
        }
        // Bursts from nodes next to the ends are cut short; such a chain
        // must stand clear of the entry just inside it instead.
        let clears = |k: usize| (a..=i).all(|c| lg[c] > lg[k] + thr);
        let cut_short = (a == 0 && i + 1 < len && clears(i + 1)) || (i + 1 == len && a > 0 && clears(a - 1));
        if i - a >= need || cut_short {
            in_chain[a..=i].iter_mut().for_each(|x| *x = true);
        }
    }
    let flagged: Vec<bool> = (0..len)
        .map(|i| {
            if in_chain[i] {
                return true;
            }
            // A wrong end node shows up in a single difference. It has to
            // clear the next two entries as well, so that one entry near a
            // zero of the row cannot fake the jump.
            let inner: &[usize] = if i == 0 { &[1, 2] } else { &[len - 2, len - 3] };
            (i == 0 || i + 1 == len) && len > 3 && elevated[i] && inner.iter().all(|&k| lg[i] > lg[k] + thr)
        })
        .collect();

    let mut ranges = Vec::new();
    let mut i = 0;
    while i < len {
        if !flagged[i] {
            i += 1;
            continue;
        }
        let a = i;
        while i + 1 < len && flagged[i + 1] {
            i += 1;
        }
        let b = i;
        // Difference i involves nodes i..=i+order; a single bad node c
        // touches differences c−order..=c.
        let (lo, hi) = if b <= a + order { (b, a + order) } else { (a, b + order) };
        ranges.push(lo..=hi.min(count - 1));
        i += 1;
    }
    merge(ranges)
}

fn merge(mut ranges: Vec<RangeInclusive<usize>>) -> Vec<RangeInclusive<usize>> {
    ranges.sort_by_key(|r| *r.start());
    let mut out: Vec<RangeInclusive<usize>> = Vec::new();
    for r in ranges {
        match out.last_mut() {
            Some(last) if *r.start() <= last.end() + 1 => {
                if r.end() > last.end() {
                    *last = *last.start()..=*r.end();
                }
            }
            _ => out.push(r),
        }
    }
    out
}
