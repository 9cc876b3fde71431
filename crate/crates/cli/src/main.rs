//! `stieltjes`: tabulate → alphas → gamma, plus verification and the Aₖ
//! series. Data goes to files, progress and errors to stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rug::Rational;

use stieltjes_core::ak::{ak_series, verify_identities, write_ak_csv};
use stieltjes_core::decimal::parse_rational;
use stieltjes_core::stieltjes::{
    compute_alphas, compute_alphas_unchecked, gamma_all, gamma_n, load_alphas, save_alphas, save_gammas,
    stirling_signed,
};
use stieltjes_core::tabulation::{
    checkpoint_dir_for, ingest_pari, load_table, save_table, scan_corruption, tabulate_with, TabulateOptions,
    DEFAULT_FACTOR, DEFAULT_SHARD_SIZE, MIN_DIGITS,
};
use stieltjes_core::Error;

#[derive(Parser)]
#[command(name = "stieltjes", version, about = "Arbitrary-precision Stieltjes constants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate f(s) = ζ(s) − 1/(s−1) on s = 1 + jε, j < nodes.
    Tabulate(TabulateArgs),
    /// Alternating binomial sums of a node table.
    Alphas(AlphasArgs),
    /// Stieltjes constants from an alpha file.
    Gamma(GammaArgs),
    /// Corruption scan of a table, or the Aₖ identity residuals.
    Verify(VerifyArgs),
    /// Aₖ with its sign and asymptotic value, as CSV.
    Ak(AkArgs),
    /// Convert `{s, f},` lines into a node table.
    IngestPari(IngestArgs),
}

#[derive(Args)]
struct TabulateArgs {
    /// ε = 2^-N
    #[arg(long, conflicts_with = "eps", required_unless_present = "eps")]
    eps_log2: Option<u32>,
    /// ε as an exact rational such as 1/100
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    digits: u32,
    #[arg(long)]
    nodes: usize,
    #[arg(long, env = "STIELTJES_WORKERS", default_value_t = default_workers())]
    workers: usize,
    #[arg(long)]
    out: PathBuf,
    /// Continue from the checkpoint shards of an earlier run.
    #[arg(long)]
    resume: bool,
    #[arg(long, default_value_t = DEFAULT_SHARD_SIZE)]
    shard_size: usize,
}

#[derive(Args)]
struct AlphasArgs {
    #[arg(long)]
    table: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Skip the corruption scan.
    #[arg(long)]
    unchecked: bool,
}

#[derive(Args)]
struct GammaArgs {
    #[arg(long)]
    alphas: PathBuf,
    #[arg(long, conflicts_with = "all", required_unless_present = "all")]
    n: Option<usize>,
    /// γ₀ … γ_{k0}
    #[arg(long)]
    all: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Table to scan for corrupted digits.
    #[arg(long, required_unless_present = "identities")]
    table: Option<PathBuf>,
    /// Highest difference order (default: half the node count).
    #[arg(long)]
    max_order: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_FACTOR)]
    factor: f64,
    /// Report the Aₖ identity residuals instead.
    #[arg(long, conflicts_with = "table")]
    identities: bool,
    #[arg(long, default_value_t = 2000)]
    kmax: usize,
    #[arg(long, default_value_t = 4)]
    nmax: u32,
    #[arg(long, default_value_t = 30)]
    digits: u32,
    /// Report file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AkArgs {
    #[arg(long)]
    kmax: usize,
    #[arg(long, default_value_t = 30)]
    digits: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Grid spacing; inferred from the first nodes when absent.
    #[arg(long)]
    eps: Option<String>,
    /// Declared digits; inferred from the shortest value when absent.
    #[arg(long)]
    digits: Option<u32>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_) => 2,
        Error::Corruption { .. } => 3,
        Error::Capacity(_) => 4,
        _ => 5,
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

fn parse_eps(text: &str) -> Result<Rational, Error> {
    match parse_rational(text) {
        Some(eps) if eps.cmp0().is_gt() => Ok(eps),
        _ => Err(usage(format!("eps must be a positive rational, got {text:?}"))),
    }
}

fn cmd_tabulate(a: TabulateArgs) -> Result<(), Error> {
    let eps = match (a.eps_log2, &a.eps) {
        (Some(0), _) => return Err(usage("--eps-log2 must be at least 1")),
        (Some(l), _) if l > 1000 => return Err(usage("--eps-log2 must be at most 1000")),
        (Some(l), _) => Rational::from((1, rug::Integer::from(1) << l)),
        (None, Some(text)) => parse_eps(text)?,
        (None, None) => unreachable!("clap requires one of them"),
    };
    if a.digits < MIN_DIGITS {
        return Err(usage(format!("--digits must be at least {MIN_DIGITS}")));
    }
    if a.nodes < 2 {
        return Err(usage("--nodes must be at least 2"));
    }
    if a.workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    let ckpt = checkpoint_dir_for(&a.out);
    if !a.resume && ckpt.exists() {
        fs::remove_dir_all(&ckpt)?;
    }
    let start = Instant::now();
    let last = Mutex::new((Instant::now(), None::<usize>));
    let progress = |done: usize, total: usize| {
        let mut last = last.lock().unwrap();
        let first = last.1.is_none();
        if first || done == total || last.0.elapsed().as_secs_f64() >= 1.0 {
            let from = *last.1.get_or_insert(done);
            let rate = (done - from) as f64 / start.elapsed().as_secs_f64().max(1e-9);
            eprintln!("tabulate: {done}/{total} nodes, {rate:.1} nodes/s");
            last.0 = Instant::now();
        }
    };
    let opts = TabulateOptions {
        workers: a.workers,
        checkpoint_dir: Some(ckpt.clone()),
        shard_size: a.shard_size,
        cancel: None,
        progress: Some(&progress),
    };
    let table = tabulate_with(&eps, a.nodes, a.digits, &opts)?;
    save_table(&table, &a.out)?;
    fs::remove_dir_all(&ckpt)?;
    Ok(())
}

fn cmd_alphas(a: AlphasArgs) -> Result<(), Error> {
    let table = load_table(&a.table)?;
    let series = if a.unchecked {
        compute_alphas_unchecked(&table)?
    } else {
        compute_alphas(&table)?
    };
    eprintln!("alphas: k0 = {}", series.k0());
    save_alphas(&series, &a.out)
}

fn cmd_gamma(a: GammaArgs) -> Result<(), Error> {
    let series = load_alphas(&a.alphas)?;
    let triangle = stirling_signed(series.k0());
    let results = if let Some(n) = a.n {
        vec![gamma_n(&series, &triangle, n)?]
    } else {
        let mut ok = Vec::new();
        for r in gamma_all(&series, &triangle)? {
            match r {
                Ok(g) => ok.push(g),
                Err(e) => eprintln!("gamma: skipped: {e}"),
            }
        }
        ok
    };
    save_gammas(&results, series.source_digits(), &a.out)
}

fn write_report(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Error> {
    if a.identities {
        if a.kmax == 0 {
            return Err(usage("--kmax must be at least 1"));
        }
        let report = verify_identities(a.kmax, a.nmax, a.digits)?;
        let mut buf = Vec::new();
        report.write(&mut buf)?;
        return write_report(a.out.as_deref(), &String::from_utf8_lossy(&buf));
    }
    let path = a.table.expect("clap requires --table");
    let table = load_table(&path)?;
    let max_order = a.max_order.unwrap_or(table.count() / 2).max(1);
    let scan = scan_corruption(&table, max_order, a.factor)?;
    let mut text = String::new();
    text.push_str("# stieltjes corruption scan\n");
    text.push_str(&format!("# max-order {max_order}\n# factor {}\n", a.factor));
    text.push_str("# columns order first_node last_node\n");
    for (order, ranges) in &scan.flagged {
        for r in ranges {
            text.push_str(&format!("{order}\t{}\t{}\n", r.start(), r.end()));
        }
    }
    write_report(a.out.as_deref(), &text)?;
    if scan.is_clean() {
        Ok(())
    } else {
        Err(Error::Corruption { ranges: scan.ranges() })
    }
}

fn cmd_ak(a: AkArgs) -> Result<(), Error> {
    let series = ak_series(a.kmax, a.digits)?;
    let mut buf = Vec::new();
    write_ak_csv(&series, &mut buf)?;
    let mut tmp = a.out.as_os_str().to_os_string();
    tmp.push(".tmp");
    fs::write(&tmp, buf)?;
    fs::rename(&tmp, &a.out)?;
    Ok(())
}

fn cmd_ingest(a: IngestArgs) -> Result<(), Error> {
    let eps = a.eps.as_deref().map(parse_eps).transpose()?;
    let file = std::io::BufReader::new(fs::File::open(&a.input)?);
    let table = ingest_pari(file, eps, a.digits)?;
    eprintln!("ingest-pari: {} nodes at {} digits", table.count(), table.digits());
    save_table(&table, &a.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Tabulate(a) => cmd_tabulate(a),
        Command::Alphas(a) => cmd_alphas(a),
        Command::Gamma(a) => cmd_gamma(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Ak(a) => cmd_ak(a),
        Command::IngestPari(a) => cmd_ingest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            ExitCode::from(exit_code(&e))
        }
    }
}
