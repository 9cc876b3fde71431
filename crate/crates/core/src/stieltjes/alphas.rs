//! `αₖ = Σ_{j=0}^{k} (−1)ʲ C(k,j) f(1+jε)`, the alternating binomial sums
//! of the node values.

use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use rug::{Float, Integer, Rational};

use super::records::{self, Records};
use crate::bigreal::{usable_digits, BigReal};
use crate::decimal;
use crate::error::{Error, Result};
use crate::tabulation::{scan_corruption, NodeTable, DEFAULT_FACTOR};

/// `α₀ … α_{k₀}` with their bounds `2ᵏ·u`, `u` the largest node error.
///
/// `k₀` is one less than the first `k` at which the bound swamps the
/// value. `α_{k₀+1}` is kept separately: it has no usable digit but
/// still bounds the size of the discarded terms.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaSeries {
    eps: Rational,
    source_digits: u32,
    node_count: usize,
    node_err: Float,
    alphas: Vec<BigReal>,
    boundary: Option<BigReal>,
}

impl AlphaSeries {
    /// Builds a series from exact values; bounds follow from `node_err`.
    /// `values` runs over `k = 0, 1, …` up to at most `node_count − 1`
    /// and is cut at `k₀` here.
    pub fn from_values(
        eps: Rational,
        source_digits: u32,
        node_count: usize,
        node_err: Float,
        values: Vec<Float>,
    ) -> Result<Self> {
        if values.is_empty() || values.len() > node_count {
            return Err(Error::Domain(format!(
                "need between 1 and {node_count} alpha values, got {}",
                values.len()
            )));
        }
        let node_err = crate::bigreal::up(&node_err);
        let mut alphas = Vec::new();
        let mut boundary = None;
        for (k, v) in values.into_iter().enumerate() {
            let err = alpha_err(&node_err, k);
            if usable_digits(&v, &err) == 0 {
                boundary = Some(BigReal::new(v, &err));
                break;
            }
            alphas.push(BigReal::new(v, &err));
        }
        if alphas.is_empty() {
            return Err(Error::Capacity(
                "alpha_0 has no usable digit; the table is too imprecise".into(),
            ));
        }
        Ok(AlphaSeries {
            eps,
            source_digits,
            node_count,
            node_err,
            alphas,
            boundary,
        })
    }

    pub fn eps(&self) -> &Rational {
        &self.eps
    }

    /// Digits of the table the series was computed from.
    pub fn source_digits(&self) -> u32 {
        self.source_digits
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Largest node error `u`.
    pub fn node_err(&self) -> &Float {
        &self.node_err
    }

    pub fn k0(&self) -> usize {
        self.alphas.len() - 1
    }

    /// `α₀ … α_{k₀}`.
    pub fn alphas(&self) -> &[BigReal] {
        &self.alphas
    }

    /// `α_{k₀+1}`, if the table was long enough to have one.
    pub fn boundary(&self) -> Option<&BigReal> {
        self.boundary.as_ref()
    }

    /// Usable digits of `α₀ … α_{k₀}`.
    pub fn usable_digits(&self) -> Vec<u64> {
        self.alphas.iter().map(BigReal::usable_digits).collect()
    }
}

fn alpha_err(u: &Float, k: usize) -> Float {
    let mut e = u.clone();
    e <<= k as u32;
    e
}

/// Refuses tables in which the finite-difference scan flags anything,
/// then computes the series.
pub fn compute_alphas(table: &NodeTable) -> Result<AlphaSeries> {
    if table.is_complete() && table.count() >= 3 {
        let scan = scan_corruption(table, table.count() / 2, DEFAULT_FACTOR)?;
        if !scan.is_clean() {
            return Err(Error::Corruption { ranges: scan.ranges() });
        }
    }
    compute_alphas_unchecked(table)
}

/// The series without the corruption scan.
///
/// `(−1)ᵏ αₖ` is the `k`-th forward difference at `j = 0`; it is formed
/// exactly from the stored node values put over a common power of two,
/// so the node errors are the only error source.
pub fn compute_alphas_unchecked(table: &NodeTable) -> Result<AlphaSeries> {
    if !table.is_complete() {
        return Err(Error::Domain(format!(
            "table is missing {} nodes",
            table.missing().len()
        )));
    }
    let parts: Vec<(Integer, i32)> = table
        .nodes()
        .iter()
        .map(|n| n.f.value().to_integer_exp().unwrap_or((Integer::new(), 0)))
        .collect();
    let e_min = parts
        .iter()
        .filter(|(m, _)| *m != 0)
        .map(|(_, e)| *e)
        .min()
        .unwrap_or(0);
    let mut row: Vec<Integer> = parts
        .into_iter()
        .map(|(m, e)| if m == 0 { m } else { m << (e - e_min) as u32 })
        .collect();

    let u = table.max_abs_err();
    let mut values = Vec::new();
    for k in 0..table.count() {
        let mut a = row[0].clone();
        if k % 2 == 1 {
            a = -a;
        }
        let value = exact_float(a, e_min);
        let stop = usable_digits(&value, &alpha_err(&u, k)) == 0;
        values.push(value);
        if stop {
            break;
        }
        for i in 0..row.len() - 1 {
            let (head, tail) = row.split_at_mut(i + 1);
            rug::ops::SubFrom::sub_from(&mut head[i], &tail[0]);
        }
        row.pop();
    }
    AlphaSeries::from_values(table.eps().clone(), table.digits(), table.count(), u, values)
}

/// `m·2^e` as a float holding every bit of `m`.
fn exact_float(m: Integer, e: i32) -> Float {
    let prec = m.significant_bits().max(64);
    let mut f = Float::with_val(prec, m);
    f <<= e;
    f
}

const TITLE: &str = "stieltjes alpha series";

/// Writes the series with exact decimal values.
pub fn write_alphas(series: &AlphaSeries, mut w: impl Write) -> Result<()> {
    writeln!(w, "# {TITLE}")?;
    writeln!(w, "# tool {}", crate::TOOL_VERSION)?;
    writeln!(w, "# eps {}", series.eps)?;
    writeln!(w, "# source-digits {}", series.source_digits)?;
    writeln!(w, "# count {}", series.node_count)?;
    writeln!(w, "# node-err {}", decimal::format_err(&series.node_err))?;
    writeln!(w, "# k0 {}", series.k0())?;
    writeln!(w, "# columns k alpha abs_err usable_digits")?;
    let all = series.alphas.iter().chain(series.boundary.iter());
    for (k, a) in all.enumerate() {
        writeln!(
            w,
            "{k}\t{}\t{}\t{}",
            decimal::format_exact(a.value()),
            decimal::format_err(a.abs_err()),
            a.usable_digits()
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_alphas(series: &AlphaSeries, path: impl AsRef<Path>) -> Result<()> {
    crate::tabulation::write_atomic(path.as_ref(), |w| write_alphas(series, w))
}

pub fn load_alphas(path: impl AsRef<Path>) -> Result<AlphaSeries> {
    read_alphas(std::io::BufReader::new(fs::File::open(path)?))
}

pub fn read_alphas(r: impl BufRead) -> Result<AlphaSeries> {
    let recs = Records::read(r, TITLE, 4)?;
    let eps = recs.rational("eps")?;
    let source_digits = recs.parse("source-digits")?;
    let node_count = recs.parse("count")?;
    let node_err = decimal::parse_err(recs.header("node-err")?)
        .ok_or_else(|| Error::parse(recs.header_line("node-err"), "bad node-err"))?;
    let k0: usize = recs.parse("k0")?;
    let mut values = Vec::with_capacity(recs.rows.len());
    for (i, (line, fields)) in recs.rows.iter().enumerate() {
        let k: usize = records::field(*line, &fields[0], "k")?;
        if k != i {
            return Err(Error::parse(*line, format!("expected k = {i}, found {k}")));
        }
        let r = decimal::parse_rational(&fields[1]).ok_or_else(|| Error::parse(*line, "bad alpha value"))?;
        values.push(exact_rational_float(&r).ok_or_else(|| Error::parse(*line, "alpha is not a binary fraction"))?);
    }
    let series = AlphaSeries::from_values(eps, source_digits, node_count, node_err, values)?;
    if series.k0() != k0 {
        return Err(Error::PrecisionMismatch(format!(
            "header says k0 = {k0}, the stored values and bounds give {}",
            series.k0()
        )));
    }
    Ok(series)
}

/// A dyadic rational as an exact float.
fn exact_rational_float(r: &Rational) -> Option<Float> {
    let den = r.denom();
    let shift = den.find_one(0)?;
    if Integer::from(den >> shift) != 1 {
        return None;
    }
    Some(exact_float(r.numer().clone(), -(shift as i32)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabulation::tabulate;

    fn table() -> NodeTable {
        tabulate(&Rational::from((1, 16)), 40, 40, 1).unwrap()
    }

    #[test]
    fn first_terms_follow_the_definition() {
        let t = table();
        let s = compute_alphas(&t).unwrap();
        assert_eq!(s.alphas()[0].value(), t.nodes()[0].f.value());
        let want = Float::with_val(400, t.nodes()[0].f.value() - t.nodes()[1].f.value());
        assert_eq!(*s.alphas()[1].value(), want);
        let f = |j: usize| t.nodes()[j].f.value().to_rational().unwrap();
        let want = f(0) - f(1) * 3u32 + f(2) * 3u32 - f(3);
        assert_eq!(s.alphas()[3].value().to_rational().unwrap(), want);
    }

    #[test]
    fn cutoff_and_bounds() {
        let t = table();
        let s = compute_alphas(&t).unwrap();
        let digits = s.usable_digits();
        assert!(digits.iter().all(|&d| d >= 1));
        assert!(s.k0() + 1 < t.count(), "k0 = {}", s.k0());
        let b = s.boundary().expect("table longer than k0");
        assert_eq!(b.usable_digits(), 0);
        let u = t.max_abs_err();
        for (k, a) in s.alphas().iter().enumerate() {
            assert_eq!(*a.abs_err(), alpha_err(&u, k));
        }
        // precision falls off steadily
        assert!(digits[0] > digits[s.k0() / 2] && digits[s.k0() / 2] > digits[s.k0()]);
    }

    #[test]
    fn file_round_trip_is_exact() {
        let s = compute_alphas(&table()).unwrap();
        let mut buf = Vec::new();
        write_alphas(&s, &mut buf).unwrap();
        let back = read_alphas(buf.as_slice()).unwrap();
        assert_eq!(back, s);
        let mut again = Vec::new();
        write_alphas(&back, &mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn corrupted_table_is_refused() {
        let t = tabulate(&Rational::from((1, 64)), 120, 60, 1).unwrap();
        let (bad, _) = t.with_flipped_digit(40, 30).unwrap();
        match compute_alphas(&bad) {
            Err(Error::Corruption { ranges }) => assert!(ranges.iter().any(|r| r.contains(&40))),
            other => panic!("{other:?}"),
        }
        assert!(compute_alphas_unchecked(&bad).is_ok());
    }

    #[test]
    fn k0_grows_with_digits_and_shrinks_with_eps() {
        let eps = Rational::from((1, 16));
        let lo = compute_alphas(&tabulate(&eps, 60, 30, 1).unwrap()).unwrap().k0();
        let hi = compute_alphas(&tabulate(&eps, 60, 60, 1).unwrap()).unwrap().k0();
        assert!(hi > lo, "{lo} {hi}");
        let fine = compute_alphas(&tabulate(&Rational::from((1, 256)), 60, 60, 1).unwrap())
            .unwrap()
            .k0();
        assert!(fine <= hi, "{fine} {hi}");
    }
}
