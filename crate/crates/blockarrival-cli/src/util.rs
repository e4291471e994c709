//! Shared plumbing: atomic writes, argv provenance, input readers, and
//! the fixed-decimal rounding used for summary quantities.

use std::io::Write;
use std::path::Path;

use blockarrival::chain::parse_chain;
use blockarrival::hashrate::HashRateSeries;

pub type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

/// The invocation as a single shell-like line, for file headers.
pub fn argv_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

/// Writes via a temp file in the destination directory plus rename, so
/// readers never observe a half-written file.
pub fn write_atomic(path: &Path, content: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(content.as_bytes())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Seconds quantities round to 3 decimals in summaries.
pub fn round3(x: f64) -> f64 {
    (x * 1e3).round() / 1e3
}

/// Dimensionless quantities round to 6 decimals.
pub fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Arrival times from either a chain CSV (height,time,difficulty; the
/// time column is taken) or a one-column file of seconds. `#` comments
/// and a single non-numeric header line are skipped.
pub fn read_arrival_times(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    if text
        .lines()
        .any(|l| l.trim() == "height,time,difficulty")
    {
        let chain = parse_chain(&text)?;
        return Ok(chain.times().map(|t| t as f64).collect());
    }
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let first = line.split(',').next().unwrap_or("").trim();
        match first.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if out.is_empty() => continue, // header
            Err(_) => return Err(format!("non-numeric arrival line '{line}'").into()),
        }
    }
    if out.len() < 2 {
        return Err(format!("{} holds fewer than two arrival times", path.display()).into());
    }
    Ok(out)
}

/// Hash-rate series from a time_s,hash_per_s CSV.
pub fn read_series(path: &Path) -> CliResult<HashRateSeries> {
    let text = std::fs::read_to_string(path)?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',');
        let (Some(t), Some(v)) = (cols.next(), cols.next()) else {
            return Err(format!("series line '{line}' needs two columns").into());
        };
        match (t.trim().parse::<f64>(), v.trim().parse::<f64>()) {
            (Ok(t), Ok(v)) => {
                times.push(t);
                values.push(v);
            }
            _ if times.is_empty() => continue, // header
            _ => return Err(format!("non-numeric series line '{line}'").into()),
        }
    }
    Ok(HashRateSeries::new(times, values)?)
}

/// Successive differences; negatives are an error unless `raw`.
pub fn gaps_from(times: &[f64], raw: bool) -> CliResult<Vec<f64>> {
    let gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    if !raw {
        if let Some(bad) = gaps.iter().position(|&g| g < 0.0) {
            return Err(format!(
                "negative inter-arrival at index {bad}; clean the data or pass --raw"
            )
            .into());
        }
    }
    Ok(gaps)
}
