//! `maskge` command-line front end.
//!
//! Exit codes: 0 ok, 1 usage or I/O error, 2 singular system, 3 cost table
//! out of tolerance, 4 leakage check failed, 5 self-test (or solver
//! cross-check) failed.

use std::error::Error;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use maskge::FieldSpec;

mod bench;
mod leak;
mod selftest;
mod solve;
mod table;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_SINGULAR: u8 = 2;
pub const EXIT_TABLE: u8 = 3;
pub const EXIT_LEAK: u8 = 4;
pub const EXIT_SELFTEST: u8 = 5;

pub const DEFAULT_SEED: u64 = 0x6d67_6531;

pub type Outcome = Result<u8, Box<dyn Error>>;

#[derive(Parser, Debug)]
#[command(name = "maskge", version, about = "Masked Gaussian elimination over GF(2^w)")]
struct Cli {
    /// Seed for all randomness (masks, random systems).
    #[arg(long, global = true, env = "MGE_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve A x = b with the masked solver.
    Solve(SolveArgs),
    /// Emit the cost table as CSV.
    CostTable(TableArgs),
    /// Run probing checks on a gadget or on the solver.
    Leakcheck(LeakArgs),
    /// Time masked vs unmasked solving for a parameter preset.
    Bench(BenchArgs),
    /// Run the built-in invariant suites.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// JSON system {"q", "m", "A", "b"}; `-` reads stdin.
    pub input: Option<PathBuf>,
    /// Solve this many random systems instead of reading a file.
    #[arg(long, conflicts_with = "input")]
    pub random: Option<usize>,
    /// Size of the random systems.
    #[arg(long, default_value_t = 8)]
    pub m: usize,
    /// Field of the random systems.
    #[arg(long, default_value = "gf16", value_parser = parse_field)]
    pub field: FieldSpec,
    #[arg(long, default_value_t = 2)]
    pub shares: usize,
    /// Run the unmasked reference instead.
    #[arg(long, conflicts_with = "compare")]
    pub unmasked: bool,
    /// Run both solvers and report whether they agree.
    #[arg(long)]
    pub compare: bool,
    /// Rows tried per pivot column (default: all remaining rows).
    #[arg(long)]
    pub pivot_tries: Option<usize>,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    /// `all` or a comma-separated list of schemes.
    #[arg(long, default_value = "all", value_delimiter = ',')]
    pub schemes: Vec<String>,
    #[arg(long, default_value = "2,3,4", value_delimiter = ',')]
    pub orders: Vec<u64>,
    /// Write the CSV here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Compare scaled columns with the printed reference table.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum LeakMode {
    Exhaustive,
    SecondOrder,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PipelineKind {
    Solve,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Masked,
    Unmasked,
    SingleShare,
}

#[derive(Args, Debug)]
pub struct LeakArgs {
    /// Gadget name (e.g. refresh, seccondadd, refresh-broken) or `all`.
    #[arg(long, required_unless_present = "pipeline", conflicts_with = "pipeline")]
    pub gadget: Option<String>,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub mode: LeakMode,
    /// Fixed-vs-random t-test on the solver.
    #[arg(long, value_enum)]
    pub pipeline: Option<PipelineKind>,
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    /// Traces per class (pipeline) or per secret (second order).
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 2)]
    pub shares: usize,
    #[arg(long, default_value = "gf16", value_parser = parse_field)]
    pub field: FieldSpec,
    #[arg(long, value_enum, default_value = "masked")]
    pub target: Target,
    #[arg(long, default_value_t = maskge::probe::T_THRESHOLD)]
    pub threshold: f64,
    /// Point pairs tested in second-order mode.
    #[arg(long, default_value_t = 64)]
    pub pairs: usize,
    /// Family-wise significance level in second-order mode.
    #[arg(long, default_value_t = 1e-3)]
    pub alpha: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Parameter preset, e.g. uov-ip or mayo-iii.
    #[arg(long)]
    pub param: String,
    #[arg(long, default_value = "2", value_delimiter = ',')]
    pub shares: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub iters: usize,
    /// Omit wall-clock fields so the output is reproducible.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// Run only these suites.
    #[arg(long, value_delimiter = ',')]
    pub suite: Vec<String>,
    /// Use the slow, complete variants (all field widths, all gadgets).
    #[arg(long)]
    pub exhaustive: bool,
    /// List the suites and exit.
    #[arg(long)]
    pub list: bool,
}

/// Accepts `gf16`, `gf256`, a field order such as `32`, or `w=5[,poly=0x25]`.
fn parse_field(s: &str) -> Result<FieldSpec, String> {
    let s = s.trim().to_ascii_lowercase();
    let s = s.strip_prefix("gf").unwrap_or(&s);
    if let Some(rest) = s.strip_prefix("w=") {
        let (w, poly) = match rest.split_once(",poly=") {
            Some((w, p)) => (w, Some(p)),
            None => (rest, None),
        };
        let w: u32 = w.parse().map_err(|e| format!("bad width: {e}"))?;
        return match poly {
            Some(p) => {
                let p = u16::from_str_radix(p.trim_start_matches("0x"), 16)
                    .map_err(|e| format!("bad polynomial: {e}"))?;
                FieldSpec::new(w, p)
            }
            None => FieldSpec::with_width(w),
        }
        .map_err(|e| e.to_string());
    }
    let q: u32 = s.parse().map_err(|_| format!("unknown field `{s}`"))?;
    FieldSpec::for_order(q).map_err(|e| e.to_string())
}

/// Stdout, or a file when a path is given.
pub fn sink(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let seed = cli.seed;
    let outcome = match cli.command {
        Command::Solve(a) => solve::run(&a, seed),
        Command::CostTable(a) => table::run(&a),
        Command::Leakcheck(a) => leak::run(&a, seed),
        Command::Bench(a) => bench::run(&a, seed),
        Command::Selftest(a) => selftest::run(&a, seed),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
