//! Block header records and the chain container.
//!
//! A chain is the minimal slice of header data this crate works from:
//! height, an epoch-second timestamp, and the difficulty in force.
//! Heights are contiguous and difficulty is constant over each run of
//! 2016 blocks, but timestamps carry no ordering guarantee at all.
//! Out-of-order timestamps are real and expected; the cleaning module
//! exists because of them.

use crate::error::{Error, Result};
use crate::units::BLOCKS_PER_SEGMENT;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockRecord {
    pub height: u64,
    /// Header timestamp, seconds since the Unix epoch.
    pub time: i64,
    pub difficulty: f64,
}

/// Where a chain's timestamps came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// As recorded in headers, order violations included.
    Raw,
    /// Post-cutoff records with unreliable timestamps resampled.
    CleanedLr,
    /// Produced by the simulator.
    Synthetic,
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Provenance::Raw => "raw",
            Provenance::CleanedLr => "cleaned-lr",
            Provenance::Synthetic => "synthetic",
        }
    }

    fn from_label(s: &str) -> Option<Self> {
        match s {
            "raw" => Some(Provenance::Raw),
            "cleaned-lr" => Some(Provenance::CleanedLr),
            "synthetic" => Some(Provenance::Synthetic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Chain {
    records: Vec<BlockRecord>,
    provenance: Provenance,
}

impl Chain {
    /// Validates: non-empty, contiguous heights, positive finite
    /// difficulty, and difficulty constant within each segment
    /// (segment index = height / 2016).
    pub fn new(records: Vec<BlockRecord>, provenance: Provenance) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Structure("chain has no records".into()));
        }
        for w in records.windows(2) {
            if w[1].height != w[0].height + 1 {
                return Err(Error::Structure(format!(
                    "heights not contiguous: {} then {}",
                    w[0].height, w[1].height
                )));
            }
            if w[1].height / BLOCKS_PER_SEGMENT == w[0].height / BLOCKS_PER_SEGMENT
                && w[1].difficulty != w[0].difficulty
            {
                return Err(Error::Structure(format!(
                    "difficulty changes inside segment {} at height {}",
                    w[1].height / BLOCKS_PER_SEGMENT,
                    w[1].height
                )));
            }
        }
        for r in &records {
            if !(r.difficulty.is_finite() && r.difficulty > 0.0) {
                return Err(Error::Structure(format!(
                    "difficulty {} at height {} not positive and finite",
                    r.difficulty, r.height
                )));
            }
        }
        Ok(Chain {
            records,
            provenance,
        })
    }

    pub fn records(&self) -> &[BlockRecord] {
        &self.records
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        false // Chain::new rejects empty record lists
    }

    pub fn first_height(&self) -> u64 {
        self.records[0].height
    }

    pub fn times(&self) -> impl Iterator<Item = i64> + '_ {
        self.records.iter().map(|r| r.time)
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }
}

/// Heights whose inter-arrival from the previous record is negative.
///
/// [0, 10, 5, 20] at heights 0..=3 reports [2]: the record timestamped 5
/// arrives before its predecessor.
pub fn scan_negative_interarrivals(chain: &Chain) -> Vec<u64> {
    chain
        .records()
        .windows(2)
        .filter(|w| w[1].time < w[0].time)
        .map(|w| w[1].height)
        .collect()
}

/// Parses `height,time,difficulty` CSV. Lines starting with `#` are
/// skipped; a `# provenance: <label>` comment restores the tag that
/// `write_csv` embeds, otherwise the chain is treated as raw.
pub fn parse_chain(text: &str) -> Result<Chain> {
    let mut records = Vec::new();
    let mut provenance = Provenance::Raw;
    let mut saw_header = false;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(label) = comment.trim().strip_prefix("provenance:") {
                if let Some(p) = Provenance::from_label(label.trim()) {
                    provenance = p;
                }
            }
            continue;
        }
        if !saw_header {
            if line != "height,time,difficulty" {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected header 'height,time,difficulty', got '{line}'"),
                });
            }
            saw_header = true;
            continue;
        }
        let mut fields = line.split(',');
        let record = (|| -> Option<BlockRecord> {
            let height = fields.next()?.trim().parse::<u64>().ok()?;
            let time = fields.next()?.trim().parse::<i64>().ok()?;
            let difficulty = fields.next()?.trim().parse::<f64>().ok()?;
            if fields.next().is_some() {
                return None;
            }
            Some(BlockRecord {
                height,
                time,
                difficulty,
            })
        })();
        match record {
            Some(r) => records.push(r),
            None => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("malformed record '{line}'"),
                })
            }
        }
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 1,
            msg: "missing header 'height,time,difficulty'".into(),
        });
    }
    Chain::new(records, provenance)
}

/// Serializes a chain back to the CSV format `parse_chain` reads,
/// provenance tag included. Difficulty uses shortest round-trip
/// formatting so rewrite cycles are byte-stable.
pub fn write_csv(chain: &Chain) -> String {
    let mut out = String::new();
    out.push_str(&format!("# provenance: {}\n", chain.provenance().label()));
    out.push_str("height,time,difficulty\n");
    for r in chain.records() {
        out.push_str(&format!("{},{},{}\n", r.height, r.time, r.difficulty));
    }
    out
}
