//! `domtest` command-line interface.
//!
//! Exit codes: 0 on success (whatever the test decision), 2 on usage
//! errors, 3 on data errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bootstrap::{run_test_seeded, BootstrapConfig, Tau};
use crate::error::{Error, Result};
use crate::io::{emit_report, odc_csv, parse_csv_path, ReportFormat};
use crate::limitdist::{limit_quantiles, simulate_bridge_functional, BridgePathConfig};
use crate::odc::{empirical_odc, Pairing};
use crate::simulate::{
    rejection_rate, CopulaSpec, FamilyKind, OdcFamily, ScenarioSpec, SimulationRow,
};
use crate::statistics::StatisticKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "domtest", version, about = "Rank-based bootstrap tests of stochastic dominance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test whether sample 1 stochastically dominates sample 2
    Test(TestArgs),
    /// Monte Carlo rejection rates for a simulated design
    Simulate(SimulateArgs),
    /// Print the empirical ordinal dominance curve
    Odc(OdcArgs),
    /// Quantiles of the least-favorable-case limit law
    NullQuantiles(NullQuantilesArgs),
}

fn parse_tau(s: &str) -> std::result::Result<Tau, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StatArg {
    Wmw,
    Ks,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    PowerNull,
    PartialNull,
    PowerAlt,
    NormalAlt,
}

impl From<FamilyArg> for FamilyKind {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::PowerNull => FamilyKind::PowerNull,
            FamilyArg::PartialNull => FamilyKind::PartialContactNull,
            FamilyArg::PowerAlt => FamilyKind::PowerAlt,
            FamilyArg::NormalAlt => FamilyKind::NormalShiftAlt,
        }
    }
}

#[derive(Debug, Args)]
struct TestArgs {
    /// CSV file: `group,value` rows, or `x1,x2` rows with --paired
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    paired: bool,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Contact-set tuning parameter; `inf` gives the standard bootstrap
    #[arg(long, default_value = "0.75", value_parser = parse_tau)]
    tau: Tau,
    /// Number of bootstrap draws
    #[arg(long, default_value_t = 999)]
    boot: usize,
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = StatArg::Wmw)]
    stat: StatArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// One or more comma-separated family parameters
    #[arg(long, value_delimiter = ',', required = true)]
    gamma: Vec<f64>,
    /// Common sample size
    #[arg(long, required_unless_present_all = ["n1", "n2"])]
    n: Option<usize>,
    #[arg(long, requires = "n2")]
    n1: Option<usize>,
    #[arg(long, requires = "n1")]
    n2: Option<usize>,
    #[arg(long)]
    paired: bool,
    /// Gaussian copula correlation for matched pairs
    #[arg(long, requires = "paired", allow_negative_numbers = true)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 5000)]
    reps: usize,
    #[arg(long, default_value_t = 500)]
    boot: usize,
    /// One or more comma-separated tuning parameters
    #[arg(long, value_delimiter = ',', default_value = "0.75", value_parser = parse_tau)]
    tau: Vec<Tau>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write CSV rows here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (results do not depend on this)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct OdcArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    paired: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NullQuantilesArgs {
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    #[arg(long, default_value_t = 1000)]
    grid: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.9,0.95,0.99")]
    levels: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{rendered}");
                EXIT_OK
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Usage(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            }
        }
    }
}

fn write_output(text: &str, path: Option<&PathBuf>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Test(a) => {
            let data = parse_csv_path(&a.input, a.paired)?;
            let config = BootstrapConfig {
                alpha: a.alpha,
                tau: a.tau,
                num_reps: a.boot,
                eta: a.eta,
                seed: a.seed,
                statistic_kind: match a.stat {
                    StatArg::Wmw => StatisticKind::Wmw,
                    StatArg::Ks => StatisticKind::Ks,
                },
            };
            let report = run_test_seeded(&data, &config)?;
            let format = match a.format {
                FormatArg::Json => ReportFormat::Json,
                FormatArg::Table => ReportFormat::HumanTable,
            };
            write_output(&emit_report(&report, format)?, None, out)
        }
        Command::Odc(a) => {
            let data = parse_csv_path(&a.input, a.paired)?;
            write_output(&odc_csv(&empirical_odc(&data)), a.out.as_ref(), out)
        }
        Command::NullQuantiles(a) => {
            let samples = simulate_bridge_functional(&BridgePathConfig {
                num_paths: a.paths,
                grid_size: a.grid,
                seed: a.seed,
            })?;
            let q = limit_quantiles(&samples, &a.levels)?;
            let mut text = String::from("level,quantile\n");
            for (l, v) in a.levels.iter().zip(q) {
                text.push_str(&format!("{l},{v:.6}\n"));
            }
            write_output(&text, None, out)
        }
        Command::Simulate(a) => {
            let text = match a.threads {
                Some(t) => rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::Usage(e.to_string()))?
                    .install(|| simulate_rows(&a))?,
                None => simulate_rows(&a)?,
            };
            write_output(&text, a.out.as_ref(), out)
        }
    }
}

fn simulate_rows(a: &SimulateArgs) -> Result<String> {
    let (n1, n2) = match (a.n, a.n1, a.n2) {
        (_, Some(n1), Some(n2)) => (n1, n2),
        (Some(n), _, _) => (n, n),
        _ => return Err(Error::Usage("give --n or both --n1 and --n2".into())),
    };
    let (pairing, copula) = if a.paired {
        let copula = a.rho.map_or(CopulaSpec::Product, |rho| CopulaSpec::Gaussian { rho });
        (Pairing::Matched, copula)
    } else {
        (Pairing::Independent, CopulaSpec::Product)
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    for &gamma in &a.gamma {
        for &tau in &a.tau {
            let spec = ScenarioSpec {
                family: OdcFamily::new(a.family.into(), gamma)?,
                n1,
                n2,
                copula,
                pairing,
                mc_reps: a.reps,
                bootstrap: BootstrapConfig {
                    alpha: a.alpha,
                    tau,
                    num_reps: a.boot,
                    eta: a.eta,
                    seed: a.seed,
                    statistic_kind: StatisticKind::Wmw,
                },
            };
            let est = rejection_rate(&spec)?;
            w.serialize(SimulationRow::new(&spec, &est))
                .map_err(|e| Error::Usage(e.to_string()))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
