use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ebpps::baseline::{pps_violation, solve_tau};
use ebpps::bench::{run_bench, Workload};
use ebpps::stream::{read_all, TsvReader};
use ebpps::verify::{closed_form_rho, monte_carlo_inclusion, REPORT_VERSION};
use ebpps::Sampler;

#[derive(Debug, Parser)]
#[command(name = "ebpps", version, about = "Exact and bounded PPS sampling over weighted streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stream a TSV file through one sampler and print the sampled ids.
    Sample(SampleArgs),
    /// Check inclusion frequencies against the closed form by Monte Carlo.
    Verify(VerifyArgs),
    /// Compare inclusion probabilities with threshold PPS.
    Compare(CompareArgs),
    /// Measure throughput and discards on a synthetic workload.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct SampleArgs {
    /// `id<TAB>weight` lines; `-` reads stdin.
    input: PathBuf,
    /// Sample-size bound. Taken from the snapshot when resuming.
    #[arg(short = 'n', long = "bound")]
    bound: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON summary here instead of stderr.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Save the sampler state after the input is consumed.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Continue from a saved sampler state.
    #[arg(long)]
    resume: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    input: PathBuf,
    #[arg(short = 'n', long = "bound")]
    bound: usize,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ignore `--seed` and draw a fresh one; the report records it.
    #[arg(long)]
    soak: bool,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    input: PathBuf,
    #[arg(short = 'n', long = "bound")]
    bound: usize,
    /// Write the JSON comparison here instead of stderr.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 1_000_000)]
    count: u64,
    /// `uniform`, `zipf:S` or `spike:K:RATIO`.
    #[arg(long, default_value = "uniform")]
    distribution: String,
    #[arg(short = 'n', long = "bound")]
    bound: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Time every item to report the slowest one.
    #[arg(long)]
    item_timing: bool,
    #[arg(long)]
    report: Option<PathBuf>,
}

enum Failure {
    Input(String),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Input(_) => 2,
        }
    }
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn open_input(path: &Path) -> Result<Box<dyn BufRead>, Failure> {
    if path == Path::new("-") {
        Ok(Box::new(BufReader::new(io::stdin().lock())))
    } else {
        let file = File::open(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        Ok(Box::new(BufReader::new(file)))
    }
}

/// Writes pretty JSON to `path`, or to stderr when no path is given.
fn emit_report<T: Serialize>(report: &T, path: Option<&Path>, fallback_stdout: bool) -> CliResult {
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    match path {
        Some(p) => std::fs::write(p, json).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        None if fallback_stdout => io::stdout().lock().write_all(json.as_bytes())?,
        None => io::stderr().lock().write_all(json.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct SampleSummary {
    version: u32,
    t: u64,
    #[serde(rename = "W")]
    total_weight: f64,
    w_max: Option<f64>,
    rho: f64,
    #[serde(rename = "C")]
    latent_size: f64,
    sample_size: usize,
    #[serde(rename = "D_t")]
    discards: u64,
}

fn cmd_sample(args: SampleArgs) -> CliResult {
    let mut sampler: Sampler<String> = match &args.resume {
        Some(path) => {
            let json = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            let sampler = Sampler::restore_json(&json)?;
            if args.bound.is_some_and(|n| n != sampler.bound()) {
                return Err(Failure::Input(format!(
                    "--bound {} conflicts with the snapshot's bound {}",
                    args.bound.unwrap_or_default(),
                    sampler.bound()
                )));
            }
            sampler
        }
        None => {
            let n = args
                .bound
                .ok_or_else(|| Failure::Input("--bound is required unless resuming".into()))?;
            Sampler::with_bound(n, args.seed)?
        }
    };

    for record in TsvReader::new(open_input(&args.input)?) {
        sampler.process(record?)?;
    }
    // Saved before extraction so a resumed run extracts exactly as an
    // uninterrupted one would.
    if let Some(path) = &args.snapshot {
        std::fs::write(path, sampler.snapshot_json()).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }

    let sample = sampler.extract();
    let mut out = BufWriter::new(io::stdout().lock());
    for item in sample.iter() {
        writeln!(out, "{}", item.id)?;
    }
    out.flush()?;

    let summary = SampleSummary {
        version: REPORT_VERSION,
        t: sampler.items_seen(),
        total_weight: sampler.total_weight(),
        w_max: (sampler.items_seen() > 0).then(|| sampler.max_weight()),
        rho: sampler.rho(),
        latent_size: sampler.latent().latent_size(),
        sample_size: sample.len(),
        discards: sampler.counter().total_discards(),
    };
    emit_report(&summary, args.report.as_deref(), false)
}

fn cmd_verify(args: VerifyArgs) -> CliResult {
    let stream = read_all(open_input(&args.input)?)?;
    let seed = if args.soak { rand::random() } else { args.seed };
    let report = monte_carlo_inclusion(&stream, args.bound, args.trials, seed)?;

    #[derive(Serialize)]
    struct Envelope<'a> {
        seed: u64,
        #[serde(flatten)]
        report: &'a ebpps::verify::VerificationReport,
    }
    emit_report(&Envelope { seed, report: &report }, args.report.as_deref(), true)?;
    if report.pass {
        Ok(())
    } else {
        let failed: Vec<&str> = report.failures().map(|c| c.check.as_str()).collect();
        Err(Failure::Verification(format!("failed checks: {}", failed.join(", "))))
    }
}

#[derive(Serialize)]
struct CompareRow {
    weight: f64,
    items: usize,
    ebpps: f64,
    threshold: f64,
}

#[derive(Serialize)]
struct Comparison {
    version: u32,
    bound: usize,
    items: usize,
    rho: f64,
    tau: f64,
    rows: Vec<CompareRow>,
    ebpps_expected_size: f64,
    threshold_expected_size: f64,
    ebpps_violation: f64,
    threshold_violation: f64,
}

fn cmd_compare(args: CompareArgs) -> CliResult {
    let stream = read_all(open_input(&args.input)?)?;
    let weights: Vec<f64> = stream.iter().map(|x| x.weight).collect();
    if weights.is_empty() {
        return Err(Failure::Input("no items to compare".into()));
    }
    let solution = solve_tau(&weights, args.bound)?;
    let rho = closed_form_rho(&weights, args.bound);

    let mut groups: BTreeMap<u64, (f64, usize, f64)> = BTreeMap::new();
    for (w, p) in weights.iter().zip(&solution.inclusion) {
        // Positive floats order the same as their bit patterns.
        groups.entry(w.to_bits()).or_insert((*w, 0, *p)).1 += 1;
    }
    let rows: Vec<CompareRow> = groups
        .into_values()
        .map(|(weight, items, threshold)| CompareRow {
            weight,
            items,
            ebpps: rho * weight,
            threshold,
        })
        .collect();
    let ebpps_probs: Vec<f64> = weights.iter().map(|w| rho * w).collect();
    let ebpps_violation = pps_violation(&ebpps::baseline::ThresholdSolution {
        tau: rho,
        weights: weights.clone(),
        inclusion: ebpps_probs,
    });
    let max = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let comparison = Comparison {
        version: REPORT_VERSION,
        bound: args.bound,
        items: weights.len(),
        rho,
        tau: solution.tau,
        ebpps_expected_size: (weights.iter().sum::<f64>() / max).min(args.bound as f64),
        threshold_expected_size: solution.expected_size(),
        ebpps_violation,
        threshold_violation: pps_violation(&solution),
        rows,
    };

    let mut out = BufWriter::new(io::stdout().lock());
    writeln!(out, "{:<14} {:>8} {:>12} {:>12}", "weight", "items", "eb-pps", "threshold")?;
    for row in &comparison.rows {
        writeln!(
            out,
            "{:<14} {:>8} {:>12.6} {:>12.6}",
            row.weight, row.items, row.ebpps, row.threshold
        )?;
    }
    writeln!(
        out,
        "{:<23} {:>12.6} {:>12.6}",
        "expected size", comparison.ebpps_expected_size, comparison.threshold_expected_size
    )?;
    writeln!(
        out,
        "{:<23} {:>12.6} {:>12.6}",
        "pps violation", comparison.ebpps_violation, comparison.threshold_violation
    )?;
    out.flush()?;
    emit_report(&comparison, args.report.as_deref(), false)
}

fn cmd_bench(args: BenchArgs) -> CliResult {
    let workload: Workload = args.distribution.parse()?;
    let report = run_bench(workload, args.count, args.bound, args.seed, args.item_timing)?;
    emit_report(&report, args.report.as_deref(), true)?;
    if report.discards_bounded {
        Ok(())
    } else {
        Err(Failure::Verification("discards exceeded items seen".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(args) => cmd_sample(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (Failure::Input(msg) | Failure::Verification(msg)) = &failure;
            eprintln!("ebpps: {msg}");
            ExitCode::from(failure.code())
        }
    }
}
