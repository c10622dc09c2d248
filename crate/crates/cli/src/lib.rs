//! Command-line front end: extraction, projection, test generation,
//! similarity checking and the benchmark harness.
//!
//! Exit codes: 0 on success, 1 when extraction or projection fails or the
//! inputs are not similar, 2 on usage, input or I/O errors and when a
//! similarity check is inconclusive.

pub mod bench;
pub mod protocols;
pub mod suites;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use chorex_core::equivalence::DEFAULT_MAX_PAIRS;
use chorex_core::projection::project_program;
use chorex_core::semantics::split_components;
use chorex_core::testgen::{fuzz, generate, unroll_transform, FuzzParams, GenParams, UnrollParams};
use chorex_core::{
    amend, bisimilar, extract_detailed, parse_choreography, parse_network, ExtractOptions, Network, Program,
    SimVerdict, Strategy,
};
use clap::{Parser, Subcommand};

use crate::bench::{BenchConfig, BenchRow, DEFAULT_TIMEOUT_MS};

#[derive(Debug, Parser)]
#[command(name = "chorex", version, about = "Choreography extraction from process networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract a choreography from a network file.
    Extract {
        file: PathBuf,
        /// R, L, S, I, C, U, UI, US, UC or UR.
        #[arg(long, default_value = "I")]
        strategy: Strategy,
        /// Comma-separated processes allowed to livelock.
        #[arg(long, default_value = "")]
        services: String,
        /// Extract the whole network at once instead of per connected component.
        #[arg(long)]
        no_split: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the symbolic execution graphs in DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Write a one-row statistics CSV.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long)]
        timeout_ms: Option<u64>,
    },
    /// Project a choreography file to a network.
    Project {
        file: PathBuf,
        /// Project as written, without inserting selections.
        #[arg(long)]
        no_amend: bool,
    },
    /// Generate random choreographies into numbered files.
    Generate {
        #[arg(long)]
        processes: usize,
        #[arg(long)]
        actions: usize,
        #[arg(long, default_value_t = 0)]
        ifs: usize,
        #[arg(long, default_value_t = 0)]
        defs: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Seed of the first file; file i uses seed + i - 1.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Delete and swap actions of one process of a network.
    Fuzz {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        deletions: usize,
        #[arg(long, default_value_t = 0)]
        swaps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Unfold calls and shift loop entry points in one process of a network.
    Unroll {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        unfoldings: usize,
        #[arg(long, default_value_t = 0)]
        shifts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check two choreographies for mutual simulation.
    Simcheck {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_PAIRS)]
        max_pairs: usize,
    },
    /// Print the connected components of a network, one per line.
    Split { file: PathBuf },
    /// Extract a suite under several strategies and write CSV statistics.
    Bench {
        /// A preset (size, processes, ifs-finite, ifs-procedures, procedures,
        /// table2-small, fuzz, unroll, duplicate) or a directory of .net files.
        #[arg(long)]
        suite: String,
        /// Comma-separated strategy codes, or `all`.
        #[arg(long, default_value = "all")]
        strategies: String,
        /// Output file; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = DEFAULT_TIMEOUT_MS)]
        timeout_ms: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        no_split: bool,
    },
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            2
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_network(path: &Path) -> Result<Network> {
    parse_network(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn read_program(path: &Path) -> Result<Program> {
    parse_choreography(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn parse_strategies(s: &str) -> Result<Vec<Strategy>> {
    if s == "all" {
        return Ok(Strategy::ALL.to_vec());
    }
    s.split(',').map(|c| c.trim().parse::<Strategy>().map_err(Into::into)).collect()
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Extract { file, strategy, services, no_split, seed, dot, stats, timeout_ms } => {
            let n = read_network(&file)?;
            let opts = ExtractOptions::new(strategy)
                .seed(seed)
                .services(suites::process_list(&services))
                .split(!no_split)
                .timeout(timeout_ms.map(Duration::from_millis))
                .keep_graphs(dot.is_some());
            let ex = extract_detailed(&n, &opts);
            if let Some(path) = dot {
                let text: String = ex.graphs.iter().map(|g| g.to_dot()).collect();
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = stats {
                let name = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let f = fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
                bench::write_csv(f, &[BenchRow::new(&name, strategy, &ex.stats)], &[])?;
            }
            match ex.outcome {
                Ok(p) => {
                    writeln!(out, "{p}")?;
                    Ok(0)
                }
                Err(e) => {
                    writeln!(err, "extraction failed ({}): {e}", e.kind())?;
                    Ok(1)
                }
            }
        }
        Command::Project { file, no_amend } => {
            let mut p = read_program(&file)?;
            if !no_amend {
                p.components = p.components.iter().map(amend).collect();
            }
            match project_program(&p) {
                Ok(n) => {
                    writeln!(out, "{n}")?;
                    Ok(0)
                }
                Err(e) => {
                    writeln!(err, "projection failed: {e}")?;
                    Ok(1)
                }
            }
        }
        Command::Generate { processes, actions, ifs, defs, count, seed, out_dir } => {
            fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            let width = count.to_string().len();
            for i in 1..=count {
                let p = GenParams::new(processes, actions, ifs, defs).seed(seed + i as u64 - 1);
                let c = generate(&p)?;
                let path = out_dir.join(format!("chor-{i:0width$}.chor"));
                fs::write(&path, format!("{c}\n")).with_context(|| format!("writing {}", path.display()))?;
                writeln!(out, "{}", path.display())?;
            }
            Ok(0)
        }
        Command::Fuzz { file, deletions, swaps, seed } => {
            let n = fuzz(&read_network(&file)?, &FuzzParams::new(deletions, swaps).seed(seed))?;
            writeln!(out, "{n}")?;
            Ok(0)
        }
        Command::Unroll { file, unfoldings, shifts, seed } => {
            let n = unroll_transform(&read_network(&file)?, &UnrollParams::new(unfoldings, shifts).seed(seed))?;
            writeln!(out, "{n}")?;
            Ok(0)
        }
        Command::Simcheck { left, right, max_pairs } => {
            let v = bisimilar(&read_program(&left)?, &read_program(&right)?, max_pairs);
            writeln!(out, "{v}")?;
            Ok(match v {
                SimVerdict::Similar => 0,
                SimVerdict::NotSimilar { .. } => 1,
                SimVerdict::Unknown { .. } => 2,
            })
        }
        Command::Split { file } => {
            for c in split_components(&read_network(&file)?) {
                writeln!(out, "{c}")?;
            }
            Ok(0)
        }
        Command::Bench { suite, strategies, out: path, jobs, timeout_ms, seed, no_split } => {
            let strategies = parse_strategies(&strategies)?;
            if strategies.is_empty() {
                bail!("no strategies given");
            }
            let instances = suites::load(&suite)?;
            let cfg =
                BenchConfig { strategies, seed, jobs, timeout: Duration::from_millis(timeout_ms), split: !no_split };
            let rows = bench::run(&instances, &cfg);
            match path {
                Some(p) => {
                    let f = fs::File::create(&p).with_context(|| format!("writing {}", p.display()))?;
                    bench::write_csv(f, &rows, &cfg.strategies)?;
                }
                None => bench::write_csv(&mut *out, &rows, &cfg.strategies)?,
            }
            Ok(0)
        }
    }
}
