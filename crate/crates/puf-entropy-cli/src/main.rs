//! `pufent` -- sampling runs, merging, entropy reports and exact censuses
//! for delay-PUF distributions.
//!
//! Exit codes: 0 success, 1 runtime error (I/O, bad file contents),
//! 2 usage error, 3 unmet estimator precondition (H2 without Poissonized
//! batches).

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use puf_entropy::estimators::{
    h0_lower, h1_plugin, h2_unbiased, hinf_wilson, EntropyEstimate,
};
use puf_entropy::oracle::{enumerate_pufs, KNOWN_PUF_COUNTS, MAX_CENSUS_N};
use puf_entropy::sampler::{merge, run, ClassMap, SamplerConfig, WeightDistribution};
use puf_entropy::{store, Error};

const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "pufent",
    version,
    about = "Estimate delay-PUF distributions and Renyi entropies via Chow-parameter classes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo sampling job and write a class-map file.
    Sample {
        /// PUF size (number of weights), 1..=24.
        #[arg(long)]
        n: usize,
        /// Number of samples (Poisson parameter with --poisson).
        #[arg(long)]
        rounds: u64,
        /// RNG seed; identical flags reproduce identical files.
        #[arg(long)]
        seed: u64,
        /// Worker count; defaults to the available parallelism.
        #[arg(long)]
        shards: Option<u32>,
        /// Weight distribution.
        #[arg(long, value_enum, default_value_t = DistArg::Gaussian)]
        dist: DistArg,
        /// Draw the round count from Poisson(rounds) for unbiased H2 batches.
        #[arg(long)]
        poisson: bool,
        /// Output class-map file.
        #[arg(short = 'o', value_name = "PATH")]
        output: PathBuf,
    },
    /// Compute entropy estimates from class-map files.
    Estimate {
        /// Which entropy order to report.
        #[arg(long, value_enum)]
        entropy: EntropyArg,
        /// Confidence level for the intervals, strictly between 0 and 1.
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        /// Input class-map files; H2 treats each file as one batch.
        #[arg(short = 'i', value_name = "PATH[,PATH...]", value_delimiter = ',', required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
    },
    /// Merge compatible class-map files (same n and distribution).
    Merge {
        #[arg(short = 'i', value_name = "PATH[,PATH...]", value_delimiter = ',', required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(short = 'o', value_name = "PATH")]
        output: PathBuf,
    },
    /// Write the exact census of all PUF classes (n <= 5) and print the
    /// total count with its max-entropy.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(short = 'o', value_name = "PATH")]
        output: PathBuf,
    },
    /// Emit a per-size CSV of entropy estimates suitable for plotting.
    ReportFig1 {
        /// One entry per size: a class-map path, or a comma-separated batch
        /// set of Poissonized maps (enables the H2 columns).
        #[arg(long, value_name = "PATH[,PATH...]", num_args = 1..)]
        inputs: Vec<String>,
        #[arg(long, value_enum, default_value_t = Fig1Format::Csv)]
        format: Fig1Format,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    Gaussian,
    Uniform,
    Laplace,
}

impl From<DistArg> for WeightDistribution {
    fn from(d: DistArg) -> Self {
        match d {
            DistArg::Gaussian => WeightDistribution::Gaussian,
            DistArg::Uniform => WeightDistribution::Uniform,
            DistArg::Laplace => WeightDistribution::Laplace,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EntropyArg {
    H0,
    H1,
    H2,
    Hinf,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fig1Format {
    Csv,
}

/// Failure carrying the documented exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn precondition(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonPoissonizedInput | Error::UndefinedEstimate(_) => {
                Failure::precondition(e.to_string())
            }
            other => Failure::runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("pufent: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sample {
            n,
            rounds,
            seed,
            shards,
            dist,
            poisson,
            output,
        } => cmd_sample(n, rounds, seed, shards, dist, poisson, output),
        Command::Estimate {
            entropy,
            confidence,
            inputs,
            format,
        } => cmd_estimate(entropy, confidence, &inputs, format),
        Command::Merge { inputs, output } => {
            store::merge_files(&inputs, &output)?;
            Ok(())
        }
        Command::Enumerate { n, output } => cmd_enumerate(n, output),
        Command::ReportFig1 {
            inputs,
            format,
            confidence,
        } => cmd_report_fig1(&inputs, format, confidence),
    }
}

fn cmd_sample(
    n: usize,
    rounds: u64,
    seed: u64,
    shards: Option<u32>,
    dist: DistArg,
    poisson: bool,
    output: PathBuf,
) -> Result<(), Failure> {
    let shards = shards.unwrap_or_else(|| {
        std::thread::available_parallelism().map_or(1, |p| p.get() as u32)
    });
    let config = SamplerConfig {
        n,
        rounds,
        seed,
        shards,
        distribution: dist.into(),
        poissonized: poisson,
    };
    config
        .validate()
        .map_err(|e| Failure::usage(e.to_string()))?;
    let map = run(&config)?;
    store::save(&map, &output)?;
    eprintln!(
        "wrote {} classes, {} rounds ({} zero-dot resamples) to {}",
        map.counts().len(),
        map.rounds(),
        map.rejected_zero_count(),
        output.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct Report {
    format_version: u32,
    n: usize,
    distribution: String,
    generated_unix_secs: u64,
    input_maps: usize,
    total_samples: u64,
    estimates: Vec<ReportEstimate>,
}

#[derive(Serialize)]
struct ReportEstimate {
    order: String,
    value_bits: f64,
    ci_low_bits: f64,
    ci_high_bits: f64,
    confidence: f64,
    sample_size: u64,
    method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    bias_bound_bits: Option<f64>,
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

impl From<&EntropyEstimate> for ReportEstimate {
    fn from(e: &EntropyEstimate) -> Self {
        Self {
            order: e.order.to_string(),
            value_bits: round6(e.value_bits),
            ci_low_bits: round6(e.ci_low_bits),
            ci_high_bits: round6(e.ci_high_bits),
            confidence: e.confidence,
            sample_size: e.sample_size,
            method: e.method.clone(),
            bias_bound_bits: e.bias_bound_bits.map(round6),
        }
    }
}

fn check_confidence(confidence: f64) -> Result<(), Failure> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Failure::usage(format!(
            "confidence must lie strictly between 0 and 1, got {confidence}"
        )));
    }
    Ok(())
}

/// Computes the requested estimates: merged map for H0/H1/Hinf, the input
/// list as batches for H2.
fn compute_estimates(
    entropy: EntropyArg,
    confidence: f64,
    maps: &[ClassMap],
) -> Result<Vec<EntropyEstimate>, Failure> {
    let wants = |order: EntropyArg| entropy == order || entropy == EntropyArg::All;
    let mut estimates = Vec::new();
    let merged;
    let pooled = if maps.len() == 1 {
        &maps[0]
    } else {
        merged = merge(maps)?;
        &merged
    };
    if wants(EntropyArg::H0) {
        estimates.push(h0_lower(pooled)?);
    }
    if wants(EntropyArg::H1) {
        estimates.push(h1_plugin(pooled, confidence)?);
    }
    if wants(EntropyArg::H2) {
        if maps.len() < 2 || maps.iter().any(|m| m.poisson_param().is_none()) {
            return Err(Failure::precondition(
                "h2 needs at least 2 Poissonized input maps (sample with --poisson)",
            ));
        }
        estimates.push(h2_unbiased(maps, confidence)?);
    }
    if wants(EntropyArg::Hinf) {
        estimates.push(hinf_wilson(pooled, confidence)?);
    }
    Ok(estimates)
}

fn cmd_estimate(
    entropy: EntropyArg,
    confidence: f64,
    inputs: &[PathBuf],
    format: FormatArg,
) -> Result<(), Failure> {
    check_confidence(confidence)?;
    let maps: Vec<ClassMap> = inputs
        .iter()
        .map(store::load)
        .collect::<Result<_, _>>()?;
    let estimates = compute_estimates(entropy, confidence, &maps)?;
    let report = Report {
        format_version: REPORT_FORMAT_VERSION,
        n: maps[0].n(),
        distribution: maps[0].distribution().to_string(),
        generated_unix_secs: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        input_maps: maps.len(),
        total_samples: maps.iter().map(|m| m.rounds()).sum(),
        estimates: estimates.iter().map(ReportEstimate::from).collect(),
    };
    match format {
        FormatArg::Json => {
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| Failure::runtime(e.to_string()))?;
            println!("{json}");
        }
        FormatArg::Csv => {
            println!("order,value_bits,ci_low_bits,ci_high_bits,confidence,sample_size,bias_bound_bits,method");
            for e in &report.estimates {
                let bias = e
                    .bias_bound_bits
                    .map_or(String::new(), |b| format!("{b:.6}"));
                println!(
                    "{},{:.6},{:.6},{:.6},{:.6},{},{},{}",
                    e.order,
                    e.value_bits,
                    e.ci_low_bits,
                    e.ci_high_bits,
                    e.confidence,
                    e.sample_size,
                    bias,
                    e.method
                );
            }
        }
    }
    Ok(())
}

fn cmd_enumerate(n: usize, output: PathBuf) -> Result<(), Failure> {
    if n == 0 || n > MAX_CENSUS_N {
        return Err(Failure::usage(format!(
            "census size n must lie in 1..={MAX_CENSUS_N}, got {n}"
        )));
    }
    let entries = enumerate_pufs(n)?;
    store::save_census(n, &entries, &output)?;
    let total: u128 = entries.iter().map(|e| e.orbit_size).sum();
    let h0 = (total as f64).log2();
    println!("{total}  {h0:.4}");
    Ok(())
}

fn cmd_report_fig1(
    input_groups: &[String],
    _format: Fig1Format,
    confidence: f64,
) -> Result<(), Failure> {
    check_confidence(confidence)?;
    if input_groups.is_empty() {
        return Err(Failure::runtime("no input maps given"));
    }
    struct Row {
        n: usize,
        h0: f64,
        h1: EntropyEstimate,
        h2: Option<EntropyEstimate>,
        hinf: EntropyEstimate,
    }
    let mut rows = Vec::new();
    for group in input_groups {
        let paths: Vec<PathBuf> = group.split(',').map(PathBuf::from).collect();
        let maps: Vec<ClassMap> = paths
            .iter()
            .map(store::load)
            .collect::<Result<_, _>>()?;
        let merged;
        let pooled = if maps.len() == 1 {
            &maps[0]
        } else {
            merged = merge(&maps)?;
            &merged
        };
        let n = pooled.n();
        if rows.iter().any(|r: &Row| r.n == n) {
            return Err(Failure::runtime(format!(
                "two input groups cover the same size n={n}"
            )));
        }
        let known = KNOWN_PUF_COUNTS
            .get(n - 1)
            .ok_or_else(|| Failure::runtime(format!("no published census total for n={n}")))?;
        let h2 = if maps.len() >= 2 && maps.iter().all(|m| m.poisson_param().is_some()) {
            Some(h2_unbiased(&maps, confidence)?)
        } else {
            None
        };
        rows.push(Row {
            n,
            h0: (*known as f64).log2(),
            h1: h1_plugin(pooled, confidence)?,
            h2,
            hinf: hinf_wilson(pooled, confidence)?,
        });
    }
    rows.sort_by_key(|r| r.n);
    println!("n,H0,H1_lo,H1_hi,H2_lo,H2_hi,Hinf_lo,Hinf_hi");
    for r in rows {
        let (h2_lo, h2_hi) = match &r.h2 {
            Some(e) => (
                format!("{:.6}", round6(e.ci_low_bits)),
                format!("{:.6}", round6(e.ci_high_bits)),
            ),
            None => (String::new(), String::new()),
        };
        println!(
            "{},{:.6},{:.6},{:.6},{},{},{:.6},{:.6}",
            r.n,
            round6(r.h0),
            round6(r.h1.ci_low_bits),
            round6(r.h1.ci_high_bits),
            h2_lo,
            h2_hi,
            round6(r.hinf.ci_low_bits),
            round6(r.hinf.ci_high_bits),
        );
    }
    Ok(())
}
