//! Plain-text table files.
//!
//! ```text
//! # stieltjes node table
//! # tool stieltjes-core 0.1.0
//! # eps 1/64
//! # digits 200
//! # count 400
//! # columns j s f abs_err
//! 0	1	0.5772156649…	1.07e-220
//! 1	1.015625	0.5760…	3.18e-219
//! ```
//!
//! `s` is written exactly, `f` with `digits + 5` significant digits and
//! the error bound with three, rounded so that reading the file back
//! reproduces every node bit for bit.

#![allow(clippy::tabs_in_doc_comments)] // the sample above is real TSV

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use rug::{Float, Integer, Rational};

use super::{canonical_value, grid_point, Node, NodeTable, MIN_DIGITS};
use crate::bigreal::{bits_for_digits, BigReal};
use crate::decimal;
use crate::error::{Error, Result};

const TITLE: &str = "stieltjes node table";

struct Header {
    eps: Option<Rational>,
    digits: Option<u32>,
    count: Option<usize>,
    shard_start: Option<usize>,
}

struct Parsed {
    eps: Rational,
    digits: u32,
    count: usize,
    shard_start: Option<usize>,
    nodes: Vec<Node>,
    /// Source line of each node.
    node_lines: Vec<usize>,
    /// The last line had no terminating newline and was dropped.
    cut_short: bool,
}

fn write_header(w: &mut (impl Write + ?Sized), table: &NodeTable) -> std::io::Result<()> {
    writeln!(w, "# {TITLE}")?;
    writeln!(w, "# tool {}", crate::TOOL_VERSION)?;
    writeln!(w, "# eps {}", table.eps())?;
    writeln!(w, "# digits {}", table.digits())?;
    writeln!(w, "# count {}", table.count())
}

fn write_records<'a>(
    w: &mut (impl Write + ?Sized),
    nodes: impl IntoIterator<Item = &'a Node>,
    sig: usize,
) -> std::io::Result<()> {
    for n in nodes {
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            n.j,
            decimal::format_rational(&n.s),
            decimal::format_sig(n.f.value(), sig),
            decimal::format_err(n.f.abs_err())
        )?;
    }
    Ok(())
}

/// Writes `table` (complete or not) in the text format.
pub fn write_table(table: &NodeTable, mut w: impl Write) -> Result<()> {
    write_header(&mut w, table)?;
    writeln!(w, "# columns j s f abs_err")?;
    write_records(&mut w, table.nodes(), table.stored_digits())?;
    w.flush()?;
    Ok(())
}

/// Writes through a temporary file and renames, so a crash never leaves a
/// half-written file under `path`.
pub(crate) fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let mut tmp = path.as_os_str().to_os_string();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut file = std::io::BufWriter::new(fs::File::create(&tmp)?);
        fill(&mut file)?;
        file.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn save_table(table: &NodeTable, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), |w| write_table(table, w))
}

/// Reads a complete table, in this crate's format or as brace-delimited
/// `{s, f},` lines.
pub fn load_table(path: impl AsRef<Path>) -> Result<NodeTable> {
    read_table(std::io::BufReader::new(fs::File::open(path)?))
}

pub fn read_table(mut r: impl BufRead) -> Result<NodeTable> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    if text.trim_start().starts_with('{') {
        return ingest_text(&text, None, None);
    }
    let parsed = parse(&text)?;
    if parsed.shard_start.is_some() {
        return Err(Error::parse(1, "this is a checkpoint shard, not a table"));
    }
    let expected = parsed.count;
    let complete_prefix = parsed.nodes.iter().enumerate().take_while(|(i, n)| n.j == *i).count();
    if complete_prefix < parsed.nodes.len() {
        let line = parsed.node_lines[complete_prefix];
        return Err(Error::parse(line, format!("node {complete_prefix} is missing")));
    }
    if parsed.nodes.len() < expected || parsed.cut_short {
        return Err(Error::Truncated {
            last_complete: parsed.nodes.last().map(|n| n.j),
            expected,
        });
    }
    NodeTable::from_nodes(parsed.eps, parsed.digits, parsed.count, parsed.nodes)
}

fn header_value<T: std::str::FromStr>(line_no: usize, key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::parse(line_no, format!("bad {key} value {value:?}")))
}

fn parse(text: &str) -> Result<Parsed> {
    let mut header = Header {
        eps: None,
        digits: None,
        count: None,
        shard_start: None,
    };
    let mut nodes: Vec<Node> = Vec::new();
    let mut node_lines = Vec::new();
    let mut grid: Option<(Rational, u32, usize, u32)> = None;
    let mut cut_short = false;
    let lines: Vec<&str> = text.split_inclusive('\n').collect();
    for (idx, raw) in lines.iter().enumerate() {
        let line_no = idx + 1;
        let complete_line = raw.ends_with('\n');
        let line = raw.trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if grid.is_some() {
                return Err(Error::parse(line_no, "header line after the first record"));
            }
            let rest = rest.trim();
            let (key, value) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
            match key {
                "eps" => {
                    let eps = decimal::parse_rational(value)
                        .ok_or_else(|| Error::parse(line_no, format!("bad eps {value:?}")))?;
                    header.eps = Some(eps);
                }
                "digits" => header.digits = Some(header_value(line_no, key, value)?),
                "count" => header.count = Some(header_value(line_no, key, value)?),
                "shard-start" => header.shard_start = Some(header_value(line_no, key, value)?),
                _ => {}
            }
            continue;
        }
        if grid.is_none() {
            let missing = |what: &str| Error::parse(line_no, format!("missing '# {what}' header"));
            let eps = header.eps.clone().ok_or_else(|| missing("eps"))?;
            let digits = header.digits.ok_or_else(|| missing("digits"))?;
            let count = header.count.ok_or_else(|| missing("count"))?;
            grid = Some((eps, digits, count, bits_for_digits(digits)));
        }
        let (eps, _, count, prec) = grid.as_ref().expect("set above");
        match parse_record(line_no, line, eps, *count, *prec) {
            Ok(node) => {
                if nodes.last().is_some_and(|last| node.j <= last.j) {
                    return Err(Error::parse(line_no, format!("node {} out of order", node.j)));
                }
                if !complete_line {
                    // Might be cut mid-number; do not trust it.
                    cut_short = true;
                    continue;
                }
                nodes.push(node);
                node_lines.push(line_no);
            }
            Err(_) if !complete_line => cut_short = true,
            Err(e) => return Err(e),
        }
    }
    let (eps, digits, count) = match grid {
        Some((eps, digits, count, _)) => (eps, digits, count),
        None => {
            let line_no = lines.len().max(1);
            let missing = |what: &str| Error::parse(line_no, format!("missing '# {what}' header"));
            (
                header.eps.ok_or_else(|| missing("eps"))?,
                header.digits.ok_or_else(|| missing("digits"))?,
                header.count.ok_or_else(|| missing("count"))?,
            )
        }
    };
    Ok(Parsed {
        eps,
        digits,
        count,
        shard_start: header.shard_start,
        nodes,
        node_lines,
        cut_short,
    })
}

fn parse_record(line_no: usize, line: &str, eps: &Rational, count: usize, prec: u32) -> Result<Node> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 4 {
        return Err(Error::parse(
            line_no,
            format!("expected 4 tab-separated fields, found {}", fields.len()),
        ));
    }
    let j: usize = fields[0]
        .trim()
        .parse()
        .map_err(|_| Error::parse(line_no, format!("bad node index {:?}", fields[0])))?;
    if j >= count {
        return Err(Error::parse(line_no, format!("node {j} beyond count {count}")));
    }
    let s = decimal::parse_rational(fields[1])
        .ok_or_else(|| Error::parse(line_no, format!("bad s value {:?}", fields[1])))?;
    if s != grid_point(eps, j) {
        return Err(Error::parse(line_no, format!("s = {} is not 1 + {j}·eps", fields[1])));
    }
    let value = decimal::parse_float(fields[2], prec).ok_or_else(|| Error::parse(line_no, "bad f value"))?;
    let err = decimal::parse_err(fields[3])
        .ok_or_else(|| Error::parse(line_no, format!("bad error bound {:?}", fields[3])))?;
    Ok(Node {
        j,
        s,
        f: BigReal::new(value, &err),
    })
}

fn shard_name(start: usize) -> String {
    format!("shard-{start:010}.tsv")
}

pub(crate) fn write_shard(dir: &Path, table: &NodeTable, start: usize, nodes: &[Node]) -> Result<()> {
    write_atomic(&dir.join(shard_name(start)), |w| {
        write_header(w, table)?;
        writeln!(w, "# shard-start {start}")?;
        write_records(w, nodes, table.stored_digits())?;
        Ok(())
    })
}

/// Reads every finished shard in `dir`, rejecting shards computed for a
/// different grid or precision.
pub(crate) fn read_shards(dir: &Path, eps: &Rational, digits: u32, count: usize) -> Result<Vec<Vec<Node>>> {
    let mut names: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("shard-") && n.ends_with(".tsv"))
        .collect();
    names.sort();
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let text = fs::read_to_string(dir.join(&name))?;
        let parsed = parse(&text)?;
        if parsed.eps != *eps || parsed.count != count || parsed.digits != digits {
            return Err(Error::PrecisionMismatch(format!(
                "checkpoint {name} is for eps {}, {} digits, {} nodes; requested eps {eps}, {digits} digits, {count} nodes",
                parsed.eps, parsed.digits, parsed.count
            )));
        }
        if parsed.cut_short {
            // Never produced by write_shard; recompute rather than trust it.
            continue;
        }
        for node in &parsed.nodes {
            super::check_node_precision(node, digits)?;
        }
        out.push(parsed.nodes);
    }
    Ok(out)
}

/// Value and one unit in its last printed digit.
fn parse_printed(text: &str) -> Option<(Rational, Rational, usize)> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let value = decimal::parse_rational(&compact)?;
    let (mantissa, exponent) = match compact.find(['e', 'E']) {
        Some(i) => (&compact[..i], compact[i + 1..].parse::<i64>().ok()?),
        None => (compact.as_str(), 0),
    };
    let frac_len = mantissa.split_once('.').map_or(0, |(_, f)| f.len()) as i64;
    let sig = mantissa
        .chars()
        .filter(|c| c.is_ascii_digit())
        .skip_while(|&c| c == '0')
        .count();
    let e = exponent - frac_len;
    let ulp = if e >= 0 {
        Rational::from(Integer::from(Integer::u_pow_u(10, e as u32)))
    } else {
        Rational::from(Integer::u_pow_u(10, (-e) as u32)).recip()
    };
    Some((value, ulp, sig))
}

/// Reads brace-delimited `{s, f},` lines as written by a PARI/GP loop.
///
/// `eps` defaults to the smallest positive `s − 1` present and `digits`
/// to one less than the fewest significant digits printed. Each value is
/// trusted to one unit in its last printed digit.
pub fn ingest_pari(mut r: impl BufRead, eps: Option<Rational>, digits: Option<u32>) -> Result<NodeTable> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    ingest_text(&text, eps, digits)
}

fn ingest_text(text: &str, eps: Option<Rational>, digits: Option<u32>) -> Result<NodeTable> {
    struct Entry {
        line: usize,
        s: Rational,
        value: Rational,
        ulp: Rational,
        sig: usize,
    }
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let body = line
            .trim_end_matches(',')
            .trim()
            .strip_prefix('{')
            .and_then(|l| l.strip_suffix('}'))
            .ok_or_else(|| Error::parse(line_no, "expected {s, f}"))?;
        let (s_text, f_text) = body
            .split_once(',')
            .ok_or_else(|| Error::parse(line_no, "expected two comma-separated values"))?;
        let s_compact: String = s_text.chars().filter(|c| !c.is_whitespace()).collect();
        let s = decimal::parse_rational(&s_compact)
            .ok_or_else(|| Error::parse(line_no, format!("bad s value {s_text:?}")))?;
        let (value, ulp, sig) =
            parse_printed(f_text).ok_or_else(|| Error::parse(line_no, format!("bad f value {f_text:?}")))?;
        entries.push(Entry {
            line: line_no,
            s,
            value,
            ulp,
            sig,
        });
    }
    if entries.is_empty() {
        return Err(Error::parse(1, "no records"));
    }
    let eps = match eps {
        Some(e) => e,
        None => entries
            .iter()
            .map(|e| Rational::from(&e.s - 1u32))
            .filter(|d| d.cmp0() == std::cmp::Ordering::Greater)
            .min()
            .ok_or_else(|| Error::Domain("cannot infer eps from a single node; pass it explicitly".into()))?,
    };
    let min_sig = entries.iter().map(|e| e.sig).min().unwrap_or(0);
    let digits = digits.unwrap_or_else(|| (min_sig.saturating_sub(1) as u32).max(MIN_DIGITS));
    let prec = bits_for_digits(digits);

    let mut by_j = BTreeMap::new();
    for e in entries {
        let offset = Rational::from(&e.s - 1u32) / &eps;
        if *offset.denom() != 1 || offset.cmp0() == std::cmp::Ordering::Less {
            return Err(Error::parse(
                e.line,
                format!("s = {} is not on the grid 1 + j·{eps}", e.s),
            ));
        }
        let j = offset
            .numer()
            .to_usize()
            .ok_or_else(|| Error::parse(e.line, "node index too large"))?;
        let value = Float::with_val(prec, &e.value);
        let rounding = Float::with_val(prec + 8, &value - &e.value);
        let ulp = Float::with_val_round(crate::bigreal::ERR_PREC, &e.ulp, rug::float::Round::Up).0;
        let err = crate::bigreal::add_up(&ulp, &rounding);
        let f = canonical_value(&value, &err, digits);
        if by_j.insert(j, (e.line, Node { j, s: e.s, f })).is_some() {
            return Err(Error::parse(e.line, format!("duplicate node {j}")));
        }
    }
    let count = by_j.keys().next_back().map_or(0, |&j| j + 1);
    if let Some(gap) = (0..count).find(|j| !by_j.contains_key(j)) {
        let line = by_j.range(gap..).next().map_or(0, |(_, (line, _))| *line);
        return Err(Error::parse(line, format!("node {gap} is missing")));
    }
    NodeTable::from_nodes(eps, digits, count, by_j.into_values().map(|(_, n)| n).collect())
}
