use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cvtele_core::cloning::{clone_convergence_report, REPORT_CUTOFFS};
use cvtele_core::network::{default_rbar_grid, log_grid, network_scan, write_network_csv};
use cvtele_core::nongaussian::{pattern_scan, r_grid, write_pattern_csv, OperationPattern};
use cvtele_core::teleport::{region_scan, write_region_csv, RatioGrid};
use cvtele_core::verify::{run_verify, VerifyConfig};

#[derive(Parser)]
#[command(name = "cvtele", version, about = "CV teleportation and cloning scans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pair fidelities over the (c2, c3) plane of three-mode standard forms
    RegionScan(RegionArgs),
    /// Teleportation fidelity after photon subtraction/addition patterns
    NongaussScan(NongaussArgs),
    /// Collective vs pairwise capabilities of the N-receiver network
    NetworkScan(NetworkArgs),
    /// Optimal N-clone fidelity against the Fock cutoff
    CloneOpt(CloneArgs),
    /// Seeded invariant suites over every module
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Output {
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Output {
    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn writer(&self) -> anyhow::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => {
                Box::new(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
            }
            None => Box::new(io::stdout().lock()),
        })
    }
}

#[derive(Args)]
struct RegionArgs {
    #[arg(long, default_value_t = 1.5)]
    a1: f64,
    /// Points per ratio axis on [0, 2.5]
    #[arg(long, default_value_t = 201)]
    grid: usize,
    /// Optimize each pair over local squeezing
    #[arg(long)]
    optimize: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct NongaussArgs {
    /// Comma-separated pattern names (default: none plus the eight non-Gaussian patterns)
    #[arg(long, value_delimiter = ',')]
    patterns: Vec<OperationPattern>,
    #[arg(long, default_value_t = 0.0)]
    rmin: f64,
    #[arg(long, default_value_t = 1.5)]
    rmax: f64,
    #[arg(long, default_value_t = 0.05)]
    rstep: f64,
    /// Minimum Fock cutoff per mode; raised where leakage requires it
    #[arg(long, default_value_t = 24)]
    cutoff: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct NetworkArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,5,10")]
    n_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    alpha: Vec<f64>,
    /// Log-spaced rbar points on [1e-3, 2]
    #[arg(long)]
    rbar_points: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CloneArgs {
    /// Number of clones
    #[arg(default_value_t = 2)]
    n: usize,
    #[arg(long, value_delimiter = ',')]
    cutoff: Vec<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = VerifyConfig::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = VerifyConfig::default().trials)]
    trials: usize,
    /// Feed an unphysical covariance matrix to the physicality suite
    #[arg(long)]
    inject_unphysical: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Serialize)]
struct Rows<'a, T> {
    schema: &'static str,
    rows: &'a [T],
}

fn write_json<T: Serialize>(mut w: impl Write, value: &T) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_rows<T: Serialize>(
    output: &Output,
    rows: &[T],
    csv: impl FnOnce(&mut dyn Write, &[T]) -> cvtele_core::Result<()>,
) -> anyhow::Result<()> {
    let mut w = output.writer()?;
    match output.format_or(Format::Csv) {
        Format::Csv => {
            csv(&mut w, rows)?;
            w.flush()?;
        }
        Format::Json => write_json(w, &Rows { schema: "1", rows })?,
    }
    Ok(())
}

fn region(args: &RegionArgs) -> anyhow::Result<()> {
    let grid = RatioGrid { points: args.grid, ..RatioGrid::default() };
    eprintln!("region scan: a1 = {}, {}x{} cells", args.a1, grid.points, grid.points);
    let cells = region_scan(args.a1, &grid, args.optimize)?;
    write_rows(&args.output, &cells, |w, c| write_region_csv(w, c))
}

fn nongauss(args: &NongaussArgs) -> anyhow::Result<()> {
    let patterns = if args.patterns.is_empty() { OperationPattern::all() } else { args.patterns.clone() };
    let rs = r_grid(args.rmin, args.rmax, args.rstep)?;
    eprintln!("non-Gaussian scan: {} patterns x {} r values", patterns.len(), rs.len());
    let rows = pattern_scan(&patterns, &rs, args.cutoff)?;
    write_rows(&args.output, &rows, |w, r| write_pattern_csv(w, r))
}

fn network(args: &NetworkArgs) -> anyhow::Result<()> {
    let rbars = match args.rbar_points {
        Some(n) => log_grid(1e-3, 2.0, n)?,
        None => default_rbar_grid(),
    };
    let rows = network_scan(&args.n_list, &rbars, &args.alpha)?;
    write_rows(&args.output, &rows, |w, r| write_network_csv(w, r))
}

fn clone_opt(args: &CloneArgs) -> anyhow::Result<()> {
    let cutoffs = if args.cutoff.is_empty() { REPORT_CUTOFFS.to_vec() } else { args.cutoff.clone() };
    eprintln!("clone optimum: N = {}, cutoffs {:?}", args.n, cutoffs);
    let report = clone_convergence_report(args.n, &cutoffs)?;
    let mut w = args.output.writer()?;
    match args.output.format_or(Format::Json) {
        Format::Json => write_json(w, &report)?,
        Format::Csv => {
            let rows = report
                .cutoffs
                .iter()
                .zip(&report.fidelities)
                .map(|(c, f)| vec![report.n.to_string(), c.to_string(), cvtele_core::io::sig9(*f)]);
            cvtele_core::io::write_csv(&mut w, &["N", "cutoff", "F"], rows)?;
        }
    }
    Ok(())
}

/// Returns whether every suite passed.
fn verify(args: &VerifyArgs) -> anyhow::Result<bool> {
    if args.trials == 0 {
        bail!("--trials must be positive");
    }
    let config = VerifyConfig { seed: args.seed, trials: args.trials, inject_unphysical: args.inject_unphysical };
    let report = run_verify(&config);
    for s in &report.suites {
        let status = if s.passed() { "PASS" } else { "FAIL" };
        eprintln!("{status} {:<32} {:>6} checks {:>4} failures", s.name, s.checks, s.failures.len());
        for f in s.failures.iter().take(3) {
            eprintln!("    {f}");
        }
    }
    if args.output.out.is_some() || args.output.format.is_some() {
        let mut w = args.output.writer()?;
        match args.output.format_or(Format::Json) {
            Format::Json => write_json(w, &report)?,
            Format::Csv => {
                let rows = report.suites.iter().map(|s| {
                    vec![s.name.clone(), s.checks.to_string(), s.failures.len().to_string(), s.passed().to_string()]
                });
                cvtele_core::io::write_csv(&mut w, &["suite", "checks", "failures", "passed"], rows)?;
            }
        }
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::RegionScan(a) => region(a).map(|_| true),
        Command::NongaussScan(a) => nongauss(a).map(|_| true),
        Command::NetworkScan(a) => network(a).map(|_| true),
        Command::CloneOpt(a) => clone_opt(a).map(|_| true),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
