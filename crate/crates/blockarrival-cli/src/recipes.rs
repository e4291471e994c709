//! Canned experiment recipes: fixed compositions of library calls that
//! regenerate the reference tables and figures from a seed.
//!
//! Every recipe writes plot-ready CSV into --out-dir. Rows seed their
//! replications from `--seed + 7919 * row_index`, so single rows can be
//! rerun in isolation. `table1` needs chain data (pass --data or set
//! BLOCKARRIVAL_DATA to a directory holding chain.csv); `table2` adds
//! observed columns when data is available.

use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::json;

use blockarrival::chain::parse_chain;
use blockarrival::delay::DelayModel;
use blockarrival::difficulty::steady_block_time;
use blockarrival::hashrate::{fit_exponential, sliding_window, HashRateModel};
use blockarrival::history::GROWTH_INTERVALS;
use blockarrival::simulate::{
    replicate, simulate, steady_start_difficulty, DifficultyMode, SimConfig,
};
use blockarrival::stats::position_in_segment_profile;
use blockarrival::units::{PerSecond, BLOCKS_PER_SEGMENT};

use crate::util::{argv_line, round3, round6, write_atomic, CliResult};

#[derive(Args)]
pub struct ReproduceArgs {
    /// table1 | table2 | fig12 | fig2016 | fig_delay
    pub recipe: String,
    /// Directory for the recipe's CSV outputs
    #[arg(long = "out-dir")]
    pub out_dir: PathBuf,
    /// Base seed; every recipe that draws randomness requires it
    #[arg(long)]
    pub seed: u64,
    /// Chain CSV (cleaned); defaults to $BLOCKARRIVAL_DATA/chain.csv
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Replications per row
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    /// Blocks per simulation
    #[arg(long, default_value_t = 40_320)]
    pub blocks: u64,
    /// Sweep points for fig12
    #[arg(long, default_value_t = 6)]
    pub points: usize,
}

pub fn run(a: ReproduceArgs) -> CliResult<String> {
    let out = match a.recipe.as_str() {
        "table1" => table1(&a)?,
        "table2" => table2(&a)?,
        "fig12" => fig12(&a)?,
        "fig2016" => fig2016(&a)?,
        "fig_delay" => fig_delay(&a)?,
        other => return Err(format!("unknown recipe '{other}'").into()),
    };
    let summary = json!({
        "command": "reproduce",
        "recipe": a.recipe,
        "argv": std::env::args().collect::<Vec<_>>(),
        "seed": a.seed,
        "outputs": out,
    });
    Ok(summary.to_string())
}

fn data_path(a: &ReproduceArgs) -> CliResult<PathBuf> {
    if let Some(p) = &a.data {
        return Ok(p.clone());
    }
    if let Some(dir) = std::env::var_os("BLOCKARRIVAL_DATA") {
        return Ok(Path::new(&dir).join("chain.csv"));
    }
    Err("recipe needs chain data: pass --data or set BLOCKARRIVAL_DATA".into())
}

fn row_seed(base: u64, row: usize) -> u64 {
    base.wrapping_add(7919 * row as u64)
}

/// Per-regime exponential fits of a sliding-window hash-rate estimate.
/// The 144-block window (one design day) is the one the reference fits
/// were made with; wider windows smear the regime breakpoints.
fn table1(a: &ReproduceArgs) -> CliResult<Vec<String>> {
    let text = std::fs::read_to_string(data_path(a)?)?;
    let chain = parse_chain(&text)?;
    let series = sliding_window(&chain, 144)?;
    let (lo, hi) = (series.start(), series.end());
    let mut csv = format!("# argv: {}\n", argv_line());
    csv.push_str("interval,start_epoch,end_epoch,a_per_s,b\n");
    let mut fitted = 0;
    for g in &GROWTH_INTERVALS {
        let s = (g.start_epoch as f64).max(lo);
        let e = (g.end_epoch as f64).min(hi);
        if !(e > s) {
            continue;
        }
        let fit = fit_exponential(&series, s, e)?;
        fitted += 1;
        csv.push_str(&format!(
            "{},{},{},{:.6e},{:.4}\n",
            g.index, g.start_epoch, g.end_epoch, fit.a, fit.b
        ));
    }
    if fitted == 0 {
        return Err("chain data overlaps no growth regime".into());
    }
    let path = a.out_dir.join("table1.csv");
    write_atomic(&path, &csv)?;
    Ok(vec![path.display().to_string()])
}

/// Replicated inter-arrival means and sds per growth regime, beside
/// observed columns when chain data is on hand.
fn table2(a: &ReproduceArgs) -> CliResult<Vec<String>> {
    let observed = match data_path(a) {
        Ok(p) => {
            let chain = parse_chain(&std::fs::read_to_string(p)?)?;
            let times: Vec<i64> = chain.times().collect();
            Some(times)
        }
        Err(_) => None,
    };
    let mut csv = format!("# argv: {}\n", argv_line());
    csv.push_str("interval,obs_mean_s,sim_mean_s,obs_sd_s,sim_sd_s,ci95,reps,blocks\n");
    let mut outputs = Vec::new();
    for (row, g) in GROWTH_INTERVALS.iter().enumerate() {
        if g.index == 1 {
            continue; // shrinking regime: no steady state to start from
        }
        let t0 = g.start_epoch as f64;
        let cfg = SimConfig {
            hash_model: g.model(),
            difficulty_mode: DifficultyMode::Random,
            delay: DelayModel::None,
            initial_difficulty: steady_start_difficulty(PerSecond(g.a), g.b, t0)?,
            start_time: t0,
            n_blocks: a.blocks,
            seed: 0, // replicate overrides per rep
        };
        let summary = replicate(&cfg, a.reps, row_seed(a.seed, row))?;
        let (obs_mean, obs_sd) = match &observed {
            Some(times) => observed_moments(times, g.start_epoch, g.end_epoch)
                .map(|(m, s)| (format!("{m:.3}"), format!("{s:.3}")))
                .unwrap_or_default(),
            None => Default::default(),
        };
        csv.push_str(&format!(
            "{},{},{:.3},{},{:.3},{:.3},{},{}\n",
            g.index, obs_mean, summary.mean, obs_sd, summary.sd, summary.ci95_half_width,
            a.reps, a.blocks
        ));
    }
    let path = a.out_dir.join("table2.csv");
    write_atomic(&path, &csv)?;
    outputs.push(path.display().to_string());
    Ok(outputs)
}

/// Mean and sd of observed inter-arrivals with both endpoints inside
/// [start, end); None when fewer than two gaps fall there.
fn observed_moments(times: &[i64], start: i64, end: i64) -> Option<(f64, f64)> {
    let gaps: Vec<f64> = times
        .windows(2)
        .filter(|w| w[0] >= start && w[1] < end)
        .map(|w| (w[1] - w[0]) as f64)
        .collect();
    if gaps.len() < 2 {
        return None;
    }
    let n = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / n;
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}

/// Long-run mean inter-arrival against the steady-state prediction
/// across a sweep of growth rates.
fn fig12(a: &ReproduceArgs) -> CliResult<Vec<String>> {
    if a.points < 2 {
        return Err("--points must be at least 2".into());
    }
    let (lo, hi) = (1e-8f64, 1e-6f64);
    let mut csv = format!("# argv: {}\n", argv_line());
    csv.push_str("a_per_s,mean_s,steady_s,rel_err\n");
    for i in 0..a.points {
        let f = i as f64 / (a.points - 1) as f64;
        let rate = lo * (hi / lo).powf(f);
        let cfg = SimConfig {
            hash_model: HashRateModel::Exponential { a: rate, b: 20.0 },
            difficulty_mode: DifficultyMode::Random,
            delay: DelayModel::None,
            initial_difficulty: steady_start_difficulty(PerSecond(rate), 20.0, 0.0)?,
            start_time: 0.0,
            n_blocks: a.blocks,
            seed: row_seed(a.seed, i),
        };
        let r = simulate(&cfg)?;
        let mut prev = 0.0;
        let mut sum = 0.0;
        for &t in &r.arrival_times {
            sum += t - prev;
            prev = t;
        }
        let mean = sum / r.arrival_times.len() as f64;
        let steady = steady_block_time(PerSecond(rate))?;
        csv.push_str(&format!(
            "{:.6e},{:.3},{:.3},{:.6}\n",
            rate,
            mean,
            steady,
            mean / steady - 1.0
        ));
    }
    let path = a.out_dir.join("fig12.csv");
    write_atomic(&path, &csv)?;
    Ok(vec![path.display().to_string()])
}

/// Mean inter-arrival by position within the 2016-block segment for a
/// fast-growth regime, where the within-segment trend is steepest.
fn fig2016(a: &ReproduceArgs) -> CliResult<Vec<String>> {
    let g = &GROWTH_INTERVALS[2];
    let t0 = g.start_epoch as f64;
    let segments = (a.blocks / BLOCKS_PER_SEGMENT).max(4);
    let cfg = SimConfig {
        hash_model: g.model(),
        difficulty_mode: DifficultyMode::Random,
        delay: DelayModel::None,
        initial_difficulty: steady_start_difficulty(PerSecond(g.a), g.b, t0)?,
        start_time: t0,
        n_blocks: segments * BLOCKS_PER_SEGMENT,
        seed: a.seed,
    };
    let r = simulate(&cfg)?;
    let mut times = vec![cfg.start_time];
    times.extend_from_slice(&r.arrival_times);
    // the synthetic chain starts a fresh segment, so the first arrival
    // has height 1
    let profile = position_in_segment_profile(&times, 0);
    let mut csv = format!("# argv: {}\n", argv_line());
    csv.push_str("position,mean_s,count\n");
    for (i, (&m, &c)) in profile.position_means.iter().zip(&profile.counts).enumerate() {
        // slot 0 holds position 1, the first block after a change
        if c == 0 {
            csv.push_str(&format!("{},,0\n", i + 1));
        } else {
            csv.push_str(&format!("{},{m:.3},{c}\n", i + 1));
        }
    }
    let path = a.out_dir.join("fig2016.csv");
    write_atomic(&path, &csv)?;
    Ok(vec![path.display().to_string()])
}

/// Inter-arrival mean and sd as the propagation-delay median sweeps
/// 0..30 s on the final growth regime.
fn fig_delay(a: &ReproduceArgs) -> CliResult<Vec<String>> {
    let g = &GROWTH_INTERVALS[5];
    let t0 = g.start_epoch as f64;
    let d1 = steady_start_difficulty(PerSecond(g.a), g.b, t0)?;
    let medians = [0.0, 1.0, 2.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0];
    let blocks = a.blocks.min(2 * BLOCKS_PER_SEGMENT);
    let mut csv = format!("# argv: {}\n", argv_line());
    csv.push_str("median_delay_s,mean_s,sd_s,ci95,reps,blocks\n");
    for (row, &median) in medians.iter().enumerate() {
        let delay = if median == 0.0 {
            DelayModel::None
        } else {
            DelayModel::exp_ramp_with_median(median)?
        };
        let cfg = SimConfig {
            hash_model: g.model(),
            difficulty_mode: DifficultyMode::Random,
            delay,
            initial_difficulty: d1,
            start_time: t0,
            n_blocks: blocks,
            seed: 0,
        };
        let s = replicate(&cfg, a.reps, row_seed(a.seed, row))?;
        csv.push_str(&format!(
            "{},{:.3},{:.3},{:.3},{},{}\n",
            round6(median),
            round3(s.mean),
            round3(s.sd),
            round3(s.ci95_half_width),
            a.reps,
            blocks
        ));
    }
    let path = a.out_dir.join("fig_delay.csv");
    write_atomic(&path, &csv)?;
    Ok(vec![path.display().to_string()])
}
