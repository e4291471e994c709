//! Command-line front end: ingestion, cleaning, estimation,
//! prediction, simulation, analysis, and canned reproduction recipes.
//!
//! Conventions shared by every subcommand: output files are written
//! atomically (temp file in the target directory, then rename), each
//! output file embeds the exact argv for provenance, exactly one JSON
//! summary line goes to standard output, and identical argv + input
//! files produce byte-identical outputs. Randomized commands refuse to
//! run without an explicit seed. Summary quantities use fixed decimal
//! precision: seconds to 3 decimals, dimensionless ratios to 6.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use blockarrival::cleaning::{clean_with_strategy, CleaningStrategy, LR_CUTOFF_EPOCH};
use blockarrival::chain::{parse_chain, scan_negative_interarrivals, write_csv};
use blockarrival::hashrate::{fit_exponential, kernel_estimate, sliding_window, Kernel};
use blockarrival::simulate::{simulate, SimConfig};
use blockarrival::stats::{
    interarrival_summary, lilliefors_exponential, position_in_segment_profile, EmpiricalSurvivor,
};
use blockarrival::units::PerSecond;
use blockarrival::SteadyState;

mod recipes;
mod util;

use util::{
    argv_line, gaps_from, read_arrival_times, read_series, round3, round6, write_atomic, CliResult,
};

/// One parsed invocation: the subcommand plus its inputs, outputs, and
/// parameters. Defaults for data paths come from the BLOCKARRIVAL_DATA
/// environment variable (a directory holding chain.csv).
#[derive(Parser)]
#[command(
    name = "blockarrival",
    version,
    about = "Block-arrival modeling: clean timestamps, estimate hash rate, predict steady state, simulate, analyze"
)]
struct PipelineConfig {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cut a chain at a cutoff date and resample unreliable timestamps
    Clean(CleanArgs),
    /// Estimate the hash rate from a chain (sliding window or kernel)
    Estimate(EstimateArgs),
    /// Fit exponential growth regimes to a hash-rate series
    Fit(FitArgs),
    /// Steady-state block time and segment duration for a growth rate
    Predict(PredictArgs),
    /// Simulate block arrivals from a config file
    Simulate(SimulateArgs),
    /// Statistical analyses of an arrival-time file
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Run a canned experiment recipe
    Reproduce(recipes::ReproduceArgs),
}

#[derive(Args)]
struct CleanArgs {
    /// Chain CSV (height,time,difficulty)
    #[arg(long = "in")]
    input: PathBuf,
    /// Cleaned chain CSV to write
    #[arg(long = "out")]
    output: PathBuf,
    /// Seed for the resampling draws
    #[arg(long)]
    seed: u64,
    /// Drop records before this Unix time
    #[arg(long, default_value_t = LR_CUTOFF_EPOCH)]
    cutoff: i64,
    /// ignore | reorder | resample-adjacent-negative |
    /// resample-sort-displacement | resample-lis-intersection
    #[arg(long, default_value = "resample-lis-intersection")]
    strategy: String,
}

#[derive(Args)]
struct EstimateArgs {
    /// Chain CSV (height,time,difficulty)
    #[arg(long = "in")]
    input: PathBuf,
    /// Hash-rate series CSV to write (time_s,hash_per_s)
    #[arg(long = "out")]
    output: PathBuf,
    /// Sliding-window width in blocks
    #[arg(long, conflicts_with_all = ["kernel", "bandwidth"])]
    k: Option<usize>,
    /// rectangular | gaussian | epanechnikov
    #[arg(long, requires = "bandwidth")]
    kernel: Option<String>,
    /// Kernel bandwidth in seconds
    #[arg(long = "h", requires = "kernel")]
    bandwidth: Option<f64>,
    /// Grid points for the kernel estimate
    #[arg(long, default_value_t = 512)]
    grid: usize,
}

#[derive(Args)]
struct FitArgs {
    /// Hash-rate series CSV (time_s,hash_per_s)
    #[arg(long = "in")]
    input: PathBuf,
    /// Fit list JSON to write
    #[arg(long = "out")]
    output: PathBuf,
    /// JSON array of interval boundaries in Unix seconds
    #[arg(long)]
    intervals: String,
}

#[derive(Args)]
struct PredictArgs {
    /// Exponential hash-rate growth in 1/second
    #[arg(long)]
    a: f64,
    /// Optional JSON file for the prediction
    #[arg(long = "out")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// SimConfig JSON (hash_model, difficulty_mode, delay,
    /// initial_difficulty, start_time, n_blocks, seed)
    #[arg(long)]
    config: PathBuf,
    /// Arrivals CSV to write
    #[arg(long = "out")]
    output: PathBuf,
    /// Optional JSON file for the summary
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Exponentiality test with Monte-Carlo null distribution
    Lilliefors {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long = "n-mc", default_value_t = 9999)]
        n_mc: u64,
        /// Accept negative gaps instead of erroring
        #[arg(long)]
        raw: bool,
        #[arg(long = "out")]
        output: Option<PathBuf>,
    },
    /// Mean inter-arrival by position within the 2016-block segment
    Profile {
        #[arg(long = "in")]
        input: PathBuf,
        /// Height of the first record in the file
        #[arg(long = "first-height", default_value_t = 0)]
        first_height: u64,
        #[arg(long = "out")]
        output: PathBuf,
    },
    /// Empirical survivor function of the inter-arrival times
    Survivor {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match PipelineConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap exits 0 for --help/--version, 2 for usage errors
            e.exit();
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: PipelineConfig) -> CliResult<String> {
    let line = match cli.command {
        Command::Clean(a) => cmd_clean(a)?,
        Command::Estimate(a) => cmd_estimate(a)?,
        Command::Fit(a) => cmd_fit(a)?,
        Command::Predict(a) => cmd_predict(a)?,
        Command::Simulate(a) => cmd_simulate(a)?,
        Command::Analyze(a) => cmd_analyze(a)?,
        Command::Reproduce(a) => recipes::run(a)?,
    };
    Ok(line)
}

fn parse_strategy(label: &str) -> CliResult<CleaningStrategy> {
    Ok(match label {
        "ignore" => CleaningStrategy::Ignore,
        "reorder" => CleaningStrategy::Reorder,
        "resample-adjacent-negative" => CleaningStrategy::ResampleAdjacentNegative,
        "resample-sort-displacement" => CleaningStrategy::ResampleSortDisplacement,
        "resample-lis-intersection" => CleaningStrategy::ResampleLisIntersection,
        other => return Err(format!("unknown cleaning strategy '{other}'").into()),
    })
}

fn cmd_clean(a: CleanArgs) -> CliResult<String> {
    let text = std::fs::read_to_string(&a.input)?;
    let chain = parse_chain(&text)?;
    let negatives = scan_negative_interarrivals(&chain).len();
    let strategy = parse_strategy(&a.strategy)?;
    let (cleaned, report) = clean_with_strategy(&chain, strategy, a.cutoff, a.seed)?;
    let mut csv = format!("# argv: {}\n", argv_line());
    csv.push_str(&write_csv(&cleaned));
    write_atomic(&a.output, &csv)?;
    let summary = json!({
        "command": "clean",
        "argv": std::env::args().collect::<Vec<_>>(),
        "input_records": chain.len(),
        "negative_interarrivals": negatives,
        "kept_records": cleaned.len(),
        "flagged": report.unreliable.len(),
        "resampled": report.resampled.len(),
        "strategy": report.strategy.label(),
        "seed": report.seed,
        "cutoff": a.cutoff,
        "output": a.output,
    });
    Ok(summary.to_string())
}

fn cmd_estimate(a: EstimateArgs) -> CliResult<String> {
    let text = std::fs::read_to_string(&a.input)?;
    let chain = parse_chain(&text)?;
    let (label, series): (String, Vec<(f64, f64)>) = match (a.k, &a.kernel) {
        (Some(k), None) => {
            let s = sliding_window(&chain, k)?;
            (
                format!("window-{k}"),
                s.times().iter().copied().zip(s.values().iter().copied()).collect(),
            )
        }
        (None, Some(name)) => {
            let kernel = match name.as_str() {
                "rectangular" => Kernel::Rectangular,
                "gaussian" => Kernel::Gaussian,
                "epanechnikov" => Kernel::Epanechnikov,
                other => return Err(format!("unknown kernel '{other}'").into()),
            };
            let h = a.bandwidth.expect("clap enforces --h with --kernel");
            let est = kernel_estimate(&chain, kernel, h)?;
            if a.grid < 2 {
                return Err("--grid must be at least 2".into());
            }
            let (lo, hi) = est.data_range();
            let step = (hi - lo) / (a.grid - 1) as f64;
            let pts = (0..a.grid)
                .map(|i| {
                    let t = if i == a.grid - 1 { hi } else { lo + i as f64 * step };
                    (t, est.value_at(t))
                })
                .collect();
            (format!("{}-h{}", kernel.label(), h), pts)
        }
        _ => return Err("pass exactly one of --k or --kernel with --h".into()),
    };
    let mut csv = format!("# argv: {}\n", argv_line());
    csv.push_str("time_s,hash_per_s\n");
    for (t, v) in &series {
        csv.push_str(&format!("{t},{v}\n"));
    }
    write_atomic(&a.output, &csv)?;
    let summary = json!({
        "command": "estimate",
        "argv": std::env::args().collect::<Vec<_>>(),
        "estimator": label,
        "points": series.len(),
        "output": a.output,
    });
    Ok(summary.to_string())
}

fn cmd_fit(a: FitArgs) -> CliResult<String> {
    let series = read_series(&a.input)?;
    let bounds: Vec<f64> = serde_json::from_str(&a.intervals)?;
    if bounds.len() < 2 {
        return Err("--intervals needs at least two boundaries".into());
    }
    if bounds.windows(2).any(|w| w[1] <= w[0]) {
        return Err("--intervals must be strictly increasing".into());
    }
    let mut fits = Vec::new();
    for w in bounds.windows(2) {
        let fit = fit_exponential(&series, w[0], w[1])?;
        fits.push(json!({
            "start": fit.start,
            "end": fit.end,
            "a_per_s": fit.a,
            "b": round6(fit.b),
        }));
    }
    let doc = json!({
        "argv": std::env::args().collect::<Vec<_>>(),
        "fits": fits,
    });
    write_atomic(&a.output, &format!("{:#}\n", doc))?;
    let summary = json!({
        "command": "fit",
        "argv": std::env::args().collect::<Vec<_>>(),
        "intervals": bounds.len() - 1,
        "output": a.output,
    });
    Ok(summary.to_string())
}

fn cmd_predict(a: PredictArgs) -> CliResult<String> {
    let steady = SteadyState::for_rate(PerSecond(a.a))?;
    let doc = json!({
        "command": "predict",
        "argv": std::env::args().collect::<Vec<_>>(),
        "a_per_s": a.a,
        "a_per_fortnight": round6(steady.a.0),
        "delta_star_fortnights": round6(steady.delta_star.0),
        "block_time_s": round3(steady.block_time_s),
        "segment_time_s": round3(steady.segment_time_s),
    });
    if let Some(path) = &a.output {
        write_atomic(path, &format!("{:#}\n", doc))?;
    }
    Ok(doc.to_string())
}

fn cmd_simulate(a: SimulateArgs) -> CliResult<String> {
    let cfg_text = std::fs::read_to_string(&a.config)?;
    let config: SimConfig = serde_json::from_str(&cfg_text)?;
    let result = simulate(&config)?;
    let mut csv = format!("# argv: {}\n", argv_line());
    csv.push_str("arrival_time_s\n");
    for t in &result.arrival_times {
        csv.push_str(&format!("{t}\n"));
    }
    write_atomic(&a.output, &csv)?;
    let mut times = vec![config.start_time];
    times.extend_from_slice(&result.arrival_times);
    let s = interarrival_summary(&times, false)?;
    let n = s.n as f64;
    let summary = json!({
        "command": "simulate",
        "argv": std::env::args().collect::<Vec<_>>(),
        "mean_s": round3(s.mean),
        "sd_s": round3(s.sd),
        "n": s.n,
        "ci95": round3(1.96 * s.sd / n.sqrt()),
        "complete": result.complete,
        "difficulty_changes": result.difficulty_history.len(),
        "seed": config.seed,
        "output": a.output,
    });
    if let Some(path) = &a.summary {
        write_atomic(path, &format!("{:#}\n", summary))?;
    }
    Ok(summary.to_string())
}

fn cmd_analyze(a: AnalyzeCommand) -> CliResult<String> {
    match a {
        AnalyzeCommand::Lilliefors {
            input,
            seed,
            n_mc,
            raw,
            output,
        } => {
            let times = read_arrival_times(&input)?;
            let gaps = gaps_from(&times, raw)?;
            let report = lilliefors_exponential(&gaps, n_mc, seed)?;
            let doc = json!({
                "command": "analyze-lilliefors",
                "argv": std::env::args().collect::<Vec<_>>(),
                "n": gaps.len(),
                "statistic": round6(report.statistic),
                "p_value": round6(report.p_value),
                "at_floor": report.at_floor,
                "n_mc": report.n_mc,
                "seed": report.seed,
                "method": report.method,
                "decisions": report
                    .decision_at
                    .iter()
                    .map(|&(alpha, reject)| json!({"alpha": alpha, "reject": reject}))
                    .collect::<Vec<_>>(),
            });
            if let Some(path) = &output {
                write_atomic(path, &format!("{:#}\n", doc))?;
            }
            Ok(doc.to_string())
        }
        AnalyzeCommand::Profile {
            input,
            first_height,
            output,
        } => {
            let times = read_arrival_times(&input)?;
            let profile = position_in_segment_profile(&times, first_height);
            let mut csv = format!("# argv: {}\n", argv_line());
            csv.push_str("position,mean_s,count\n");
            for (i, (&m, &c)) in profile
                .position_means
                .iter()
                .zip(&profile.counts)
                .enumerate()
            {
                // slot 0 holds position 1, the first block after a change
                if c == 0 {
                    csv.push_str(&format!("{},,0\n", i + 1));
                } else {
                    csv.push_str(&format!("{},{:.3},{c}\n", i + 1, m));
                }
            }
            write_atomic(&output, &csv)?;
            let overall = profile.overall_mean();
            let summary = json!({
                "command": "analyze-profile",
                "argv": std::env::args().collect::<Vec<_>>(),
                "positions": profile.position_means.len(),
                "overall_mean_s": round3(overall),
                "output": output,
            });
            Ok(summary.to_string())
        }
        AnalyzeCommand::Survivor { input, output } => {
            let times = read_arrival_times(&input)?;
            let gaps = gaps_from(&times, false)?;
            let survivor = EmpiricalSurvivor::new(&gaps)?;
            let mut csv = format!("# argv: {}\n", argv_line());
            csv.push_str("gap_s,survival\n");
            for (x, s) in survivor.points() {
                csv.push_str(&format!("{:.3},{:.6}\n", x, s));
            }
            write_atomic(&output, &csv)?;
            let summary = json!({
                "command": "analyze-survivor",
                "argv": std::env::args().collect::<Vec<_>>(),
                "n": gaps.len(),
                "output": output,
            });
            Ok(summary.to_string())
        }
    }
}
