//! The node table `f(1 + jε)`, `j = 0 … count−1`: computing it in
//! parallel with checkpoints, persisting it, and screening it for
//! corrupted digits.

mod corruption;
mod format;

use std::cmp::Ordering;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering as AtomicOrdering};

use rayon::prelude::*;
use rug::{Float, Rational};

use crate::bigreal::{self, bits_for_digits, BigReal};
use crate::decimal;
use crate::error::{Error, Result};
use crate::zeta::f_reg;

pub use corruption::{detect_corruption, detect_corruption_with, scan_corruption, CorruptionScan, DEFAULT_FACTOR};
pub(crate) use format::write_atomic;
pub use format::{ingest_pari, load_table, read_table, save_table, write_table};

/// Nodes per checkpoint shard unless configured otherwise.
pub const DEFAULT_SHARD_SIZE: usize = 256;

/// Smallest supported table precision.
pub const MIN_DIGITS: u32 = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub j: usize,
    /// `1 + jε`, exact.
    pub s: Rational,
    pub f: BigReal,
}

/// Values `f(1 + jε)` on an equidistant grid. Nodes are sorted by `j`; a
/// complete table holds every `j < count`.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeTable {
    eps: Rational,
    digits: u32,
    count: usize,
    nodes: Vec<Node>,
}

/// `1 + jε`.
pub fn grid_point(eps: &Rational, j: usize) -> Rational {
    Rational::from(eps * j) + 1u32
}

impl NodeTable {
    /// Checks the grid and precision invariants. `nodes` may be a subset
    /// of `0..count` (a partial table) but must be strictly increasing.
    pub fn from_nodes(eps: Rational, digits: u32, count: usize, nodes: Vec<Node>) -> Result<Self> {
        if eps.cmp0() != Ordering::Greater {
            return Err(Error::Domain(format!("grid step must be positive, got {eps}")));
        }
        if count == 0 {
            return Err(Error::Domain("a table needs at least one node".into()));
        }
        let mut prev = None;
        for node in &nodes {
            if node.j >= count {
                return Err(Error::Domain(format!("node {} outside 0..{count}", node.j)));
            }
            if prev.is_some_and(|p| node.j <= p) {
                return Err(Error::Domain(format!("node {} out of order", node.j)));
            }
            prev = Some(node.j);
            if node.s != grid_point(&eps, node.j) {
                return Err(Error::Domain(format!(
                    "node {} is off the grid: s = {}",
                    node.j, node.s
                )));
            }
            check_node_precision(node, digits)?;
        }
        Ok(NodeTable {
            eps,
            digits,
            count,
            nodes,
        })
    }

    pub fn eps(&self) -> &Rational {
        &self.eps
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Working precision in bits for this table's digits.
    pub fn prec(&self) -> u32 {
        bits_for_digits(self.digits)
    }

    /// Number of grid points the table covers when complete.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn is_complete(&self) -> bool {
        self.nodes.len() == self.count
    }

    pub fn node(&self, j: usize) -> Option<&Node> {
        self.nodes
            .binary_search_by_key(&j, |n| n.j)
            .ok()
            .map(|i| &self.nodes[i])
    }

    /// Indices not yet present.
    pub fn missing(&self) -> Vec<usize> {
        let mut it = self.nodes.iter().map(|n| n.j).peekable();
        (0..self.count)
            .filter(|j| {
                if it.peek() == Some(j) {
                    it.next();
                    false
                } else {
                    true
                }
            })
            .collect()
    }

    /// Largest error bound over all nodes.
    pub fn max_abs_err(&self) -> Float {
        self.nodes
            .iter()
            .map(|n| n.f.abs_err())
            .fold(
                Float::new(bigreal::ERR_PREC),
                |acc, e| if *e > acc { e.clone() } else { acc },
            )
    }

    /// A copy with the digit `position` places after the decimal point of
    /// node `j` changed by ±1 (its error bound is left untouched, so the
    /// change is silent corruption). Returns the signed change.
    pub fn with_flipped_digit(&self, j: usize, position: usize) -> Result<(NodeTable, i8)> {
        let idx = self
            .nodes
            .binary_search_by_key(&j, |n| n.j)
            .map_err(|_| Error::Domain(format!("no node {j}")))?;
        let text = decimal::format_sig(self.nodes[idx].f.value(), self.stored_digits());
        let (flipped, delta) = decimal::flip_digit(&text, position)
            .ok_or_else(|| Error::Domain(format!("node {j} has no digit at position {position}")))?;
        let value = decimal::parse_float(&flipped, self.prec()).expect("flipped text is a decimal");
        let mut out = self.clone();
        out.nodes[idx].f = BigReal::new(value, self.nodes[idx].f.abs_err());
        Ok((out, delta))
    }

    /// Significant digits written per stored value.
    pub fn stored_digits(&self) -> usize {
        stored_digits(self.digits)
    }

    fn push_nodes(&mut self, mut nodes: Vec<Node>) {
        self.nodes.append(&mut nodes);
        self.nodes.sort_by_key(|n| n.j);
    }
}

fn stored_digits(digits: u32) -> usize {
    digits as usize + 5
}

fn check_node_precision(node: &Node, digits: u32) -> Result<()> {
    let usable = node.f.usable_digits();
    if usable + 2 < digits as u64 {
        return Err(Error::PrecisionMismatch(format!(
            "node {} carries {usable} usable digits, table declares {digits}",
            node.j
        )));
    }
    Ok(())
}

/// Rounds `value` to the decimal text that will be stored and folds the
/// difference into the error bound, so that saving and loading reproduces
/// the node bit for bit.
pub(crate) fn canonical_value(value: &Float, abs_err: &Float, digits: u32) -> BigReal {
    let prec = bits_for_digits(digits);
    let text = decimal::format_sig(value, stored_digits(digits));
    let stored = decimal::parse_float(&text, prec).expect("formatted decimal parses");
    let diff = Float::with_val(value.prec().max(prec) + 8, value - &stored);
    let err = bigreal::add_up(abs_err, &diff);
    BigReal::new(stored, &decimal::canonical_err(&err))
}

/// Digits evaluated beyond those stored. The evaluation error jumps
/// wherever the summation parameters change with `s`; keeping it well
/// below the decimal rounding of the stored text stops those jumps from
/// looking like corrupted digits in high-order differences.
const EVAL_GUARD_DIGITS: u32 = 10;

/// One grid node `f(1 + jε)` in stored form.
pub fn compute_node(eps: &Rational, j: usize, digits: u32) -> Result<Node> {
    let s = grid_point(eps, j);
    let f = f_reg(&s, digits + EVAL_GUARD_DIGITS)?;
    let f = canonical_value(f.value(), f.abs_err(), digits);
    Ok(Node { j, s, f })
}

/// Progress callback: `(completed, total)`.
pub type Progress<'a> = &'a (dyn Fn(usize, usize) + Sync);

/// Tabulation settings beyond the grid itself.
pub struct TabulateOptions<'a> {
    pub workers: usize,
    /// Directory for shard files. Without one nothing is persisted until
    /// the whole table is done.
    pub checkpoint_dir: Option<PathBuf>,
    pub shard_size: usize,
    /// Checked between nodes; when set the run stops with
    /// [`Error::Interrupted`], keeping finished shards on disk.
    pub cancel: Option<&'a AtomicBool>,
    pub progress: Option<Progress<'a>>,
}

impl Default for TabulateOptions<'_> {
    fn default() -> Self {
        TabulateOptions {
            workers: 1,
            checkpoint_dir: None,
            shard_size: DEFAULT_SHARD_SIZE,
            cancel: None,
            progress: None,
        }
    }
}

fn check_grid(eps: &Rational, count: usize, digits: u32) -> Result<()> {
    if eps.cmp0() != Ordering::Greater {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    if count == 0 {
        return Err(Error::Domain("count must be at least 1".into()));
    }
    if digits < MIN_DIGITS {
        return Err(Error::Domain(format!(
            "digits must be at least {MIN_DIGITS}, got {digits}"
        )));
    }
    Ok(())
}

/// `f(1 + jε)` for `j < count`. The result does not depend on `workers`.
pub fn tabulate(eps: &Rational, count: usize, digits: u32, workers: usize) -> Result<NodeTable> {
    tabulate_with(
        eps,
        count,
        digits,
        &TabulateOptions {
            workers,
            ..Default::default()
        },
    )
}

/// [`tabulate`] with checkpointing, cancellation and progress reporting.
///
/// Shards already present in the checkpoint directory are validated
/// against the requested grid and reused.
pub fn tabulate_with(eps: &Rational, count: usize, digits: u32, opts: &TabulateOptions) -> Result<NodeTable> {
    check_grid(eps, count, digits)?;
    if opts.workers == 0 {
        return Err(Error::Domain("workers must be at least 1".into()));
    }
    if opts.shard_size == 0 {
        return Err(Error::Domain("shard size must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;

    let mut table = NodeTable::from_nodes(eps.clone(), digits, count, Vec::new())?;
    if let Some(dir) = &opts.checkpoint_dir {
        fs::create_dir_all(dir)?;
        for nodes in format::read_shards(dir, eps, digits, count)? {
            table.push_nodes(nodes);
        }
    }

    let done = AtomicUsize::new(table.nodes.len());
    let report = |n: usize| {
        if let Some(progress) = opts.progress {
            progress(n, count);
        }
    };
    report(done.load(AtomicOrdering::Relaxed));

    let have: Vec<bool> = {
        let mut v = vec![false; count];
        for n in &table.nodes {
            v[n.j] = true;
        }
        v
    };
    for start in (0..count).step_by(opts.shard_size) {
        let end = (start + opts.shard_size).min(count);
        if have[start..end].iter().all(|&h| h) {
            continue;
        }
        let todo: Vec<usize> = (start..end).filter(|&j| !have[j]).collect();
        let computed: Result<Vec<Node>> = pool.install(|| {
            todo.par_iter()
                .map(|&j| {
                    if opts.cancel.is_some_and(|c| c.load(AtomicOrdering::SeqCst)) {
                        return Err(Error::Interrupted {
                            completed: done.load(AtomicOrdering::SeqCst),
                            total: count,
                        });
                    }
                    let node = compute_node(eps, j, digits)?;
                    report(done.fetch_add(1, AtomicOrdering::SeqCst) + 1);
                    Ok(node)
                })
                .collect()
        });
        let computed = match computed {
            Ok(nodes) => nodes,
            Err(Error::Interrupted { total, .. }) => {
                return Err(Error::Interrupted {
                    completed: table.nodes.len(),
                    total,
                })
            }
            Err(e) => return Err(e),
        };
        table.push_nodes(computed);
        if let Some(dir) = &opts.checkpoint_dir {
            let shard: Vec<Node> = table
                .nodes
                .iter()
                .filter(|n| (start..end).contains(&n.j))
                .cloned()
                .collect();
            format::write_shard(dir, &table, start, &shard)?;
        }
    }
    debug_assert!(table.is_complete());
    Ok(table)
}

/// Default checkpoint directory for an output path: `<out>.ckpt`.
pub fn checkpoint_dir_for(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".ckpt");
    out.with_file_name(name)
}
