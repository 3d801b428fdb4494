//! Point-level data ingestion and per-player count aggregation.
//!
//! The normalized input schema is one CSV row per service point:
//!
//! ```text
//! match_id,server_id,serve_number,serve_in,rally_length,server_won
//! ```
//!
//! `serve_number` records the serve the point was decided on. A point whose
//! first serve was a fault continues on the second serve and therefore
//! appears with `serve_number=Second`; `(Second, serve_in=false)` is a double
//! fault. `(First, serve_in=false)` is rejected since a point cannot end on a
//! first-serve fault. `rally_length` counts shots landed in court (a clean
//! ace is length 1), and the server wins exactly the odd-length rallies.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which serve the point was decided on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ServeNumber {
    First,
    Second,
}

impl FromStr for ServeNumber {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s.trim() {
            s if s.eq_ignore_ascii_case("first") => Ok(ServeNumber::First),
            s if s.eq_ignore_ascii_case("second") => Ok(ServeNumber::Second),
            _ => Err(()),
        }
    }
}

impl fmt::Display for ServeNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ServeNumber::First => write!(f, "First"),
            ServeNumber::Second => write!(f, "Second"),
        }
    }
}

/// One service point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointRecord {
    pub match_id: String,
    pub server_id: String,
    pub serve_number: ServeNumber,
    pub serve_in: bool,
    /// Number of shots landed in court; 0 for faults.
    pub rally_length: u32,
    pub server_won: bool,
}

impl PointRecord {
    /// Rally-accounting consistency: faults have no rally and are lost,
    /// in-serves have an odd length exactly when the server won, and a point
    /// cannot end on a first-serve fault.
    pub fn is_consistent(&self) -> bool {
        if !self.serve_in {
            return self.rally_length == 0
                && !self.server_won
                && self.serve_number == ServeNumber::Second;
        }
        self.rally_length >= 1 && self.server_won == (self.rally_length % 2 == 1)
    }
}

/// Binomial-tree tallies of one player's service points.
///
/// `n` points split into first serves in (`n_x1`), second serves in (`n_x2`)
/// and double faults; in-serve points split further into one-shot wins
/// (`n_f1`/`n_f2`, rally length 1), multi-shot wins (`n_k1`/`n_k2`, odd
/// length >= 3) and losses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServeCounts {
    pub player_id: String,
    pub n_matches: u64,
    pub n: u64,
    pub n_x1: u64,
    pub n_x2: u64,
    pub n_f1: u64,
    pub n_f2: u64,
    pub n_k1: u64,
    pub n_k2: u64,
}

impl ServeCounts {
    /// Checks the tree inequalities that every aggregation must satisfy.
    pub fn validate(&self) -> Result<(), String> {
        if self.n_x1 > self.n {
            return Err(format!("n_x1 = {} exceeds N = {}", self.n_x1, self.n));
        }
        if self.n_f1 + self.n_k1 > self.n_x1 {
            return Err(format!(
                "n_f1 + n_k1 = {} exceeds n_x1 = {}",
                self.n_f1 + self.n_k1,
                self.n_x1
            ));
        }
        if self.n_x2 > self.n - self.n_x1 {
            return Err(format!(
                "n_x2 = {} exceeds N - n_x1 = {}",
                self.n_x2,
                self.n - self.n_x1
            ));
        }
        if self.n_f2 + self.n_k2 > self.n_x2 {
            return Err(format!(
                "n_f2 + n_k2 = {} exceeds n_x2 = {}",
                self.n_f2 + self.n_k2,
                self.n_x2
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("empty input: no header row")]
    EmptyFile,
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}: cannot parse column `{column}`")]
    TypeError { row: usize, column: &'static str },
    #[error("row {0}: fields are inconsistent with rally accounting")]
    InconsistentOutcome(usize),
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
}

const COLUMNS: [&str; 6] = [
    "match_id",
    "server_id",
    "serve_number",
    "serve_in",
    "rally_length",
    "server_won",
];

/// Parses the normalized points CSV. Row indices in errors are 1-based data
/// rows (the header is row 0).
pub fn parse_points_csv<R: Read>(reader: R) -> Result<Vec<PointRecord>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(IngestError::EmptyFile);
    }
    let mut idx = [0usize; 6];
    for (slot, name) in idx.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))?;
    }

    let mut points = Vec::new();
    for (row_0, record) in rdr.records().enumerate() {
        let row = row_0 + 1;
        let record = record?;
        let field = |col: usize| record.get(idx[col]).unwrap_or("");

        let serve_number: ServeNumber = field(2).parse().map_err(|_| IngestError::TypeError {
            row,
            column: "serve_number",
        })?;
        let serve_in = parse_bool(field(3)).ok_or(IngestError::TypeError {
            row,
            column: "serve_in",
        })?;
        let rally_length: u32 = field(4).parse().map_err(|_| IngestError::TypeError {
            row,
            column: "rally_length",
        })?;
        let server_won = parse_bool(field(5)).ok_or(IngestError::TypeError {
            row,
            column: "server_won",
        })?;

        let point = PointRecord {
            match_id: field(0).to_string(),
            server_id: field(1).to_string(),
            serve_number,
            serve_in,
            rally_length,
            server_won,
        };
        if !point.is_consistent() {
            return Err(IngestError::InconsistentOutcome(row));
        }
        points.push(point);
    }
    Ok(points)
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

#[derive(Default)]
struct Tally {
    matches: HashSet<String>,
    n: u64,
    n_x1: u64,
    n_x2: u64,
    n_f1: u64,
    n_f2: u64,
    n_k1: u64,
    n_k2: u64,
}

/// Aggregates points into per-player counts, dropping players with fewer
/// than `min_matches` distinct charted matches. Pure in the input order:
/// any permutation of `points` yields the same mapping.
pub fn aggregate_counts(points: &[PointRecord], min_matches: u64) -> BTreeMap<String, ServeCounts> {
    let mut tallies: BTreeMap<String, Tally> = BTreeMap::new();
    for p in points {
        let t = match tallies.entry(p.server_id.clone()) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => e.insert(Tally::default()),
        };
        t.matches.insert(p.match_id.clone());
        t.n += 1;
        match (p.serve_number, p.serve_in) {
            (ServeNumber::First, true) => {
                t.n_x1 += 1;
                if p.server_won {
                    if p.rally_length == 1 {
                        t.n_f1 += 1;
                    } else {
                        t.n_k1 += 1;
                    }
                }
            }
            (ServeNumber::Second, true) => {
                t.n_x2 += 1;
                if p.server_won {
                    if p.rally_length == 1 {
                        t.n_f2 += 1;
                    } else {
                        t.n_k2 += 1;
                    }
                }
            }
            // Double fault: counts toward N only. (First, false) never
            // passes parsing; if constructed by hand it still only adds to N.
            (_, false) => {}
        }
    }

    tallies
        .into_iter()
        .filter(|(_, t)| t.matches.len() as u64 >= min_matches)
        .map(|(player_id, t)| {
            let counts = ServeCounts {
                player_id: player_id.clone(),
                n_matches: t.matches.len() as u64,
                n: t.n,
                n_x1: t.n_x1,
                n_x2: t.n_x2,
                n_f1: t.n_f1,
                n_f2: t.n_f2,
                n_k1: t.n_k1,
                n_k2: t.n_k2,
            };
            debug_assert!(counts.validate().is_ok());
            (player_id, counts)
        })
        .collect()
}

/// Default charted-match cutoff for including a player.
pub const DEFAULT_MIN_MATCHES: u64 = 20;

const COUNTS_COLUMNS: [&str; 9] = [
    "player_id",
    "n_matches",
    "N",
    "n_x1",
    "n_x2",
    "n_f1",
    "n_f2",
    "n_k1",
    "n_k2",
];

/// Writes the counts CSV (`player_id,n_matches,N,n_x1,n_x2,n_f1,n_f2,n_k1,n_k2`).
pub fn write_counts_csv<W: std::io::Write>(
    writer: W,
    counts: &BTreeMap<String, ServeCounts>,
) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(COUNTS_COLUMNS)?;
    for c in counts.values() {
        w.write_record([
            c.player_id.as_str(),
            &c.n_matches.to_string(),
            &c.n.to_string(),
            &c.n_x1.to_string(),
            &c.n_x2.to_string(),
            &c.n_f1.to_string(),
            &c.n_f2.to_string(),
            &c.n_k1.to_string(),
            &c.n_k2.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads the counts CSV back, validating the tree inequalities per row.
pub fn read_counts_csv<R: Read>(reader: R) -> Result<Vec<ServeCounts>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(IngestError::EmptyFile);
    }
    let mut idx = [0usize; 9];
    for (slot, name) in idx.iter_mut().zip(COUNTS_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))?;
    }
    let mut out = Vec::new();
    for (row_0, record) in rdr.records().enumerate() {
        let row = row_0 + 1;
        let record = record?;
        let num = |col: usize, name: &'static str| -> Result<u64, IngestError> {
            record
                .get(idx[col])
                .and_then(|s| s.parse().ok())
                .ok_or(IngestError::TypeError { row, column: name })
        };
        let counts = ServeCounts {
            player_id: record.get(idx[0]).unwrap_or("").to_string(),
            n_matches: num(1, "n_matches")?,
            n: num(2, "N")?,
            n_x1: num(3, "n_x1")?,
            n_x2: num(4, "n_x2")?,
            n_f1: num(5, "n_f1")?,
            n_f2: num(6, "n_f2")?,
            n_k1: num(7, "n_k1")?,
            n_k2: num(8, "n_k2")?,
        };
        if counts.validate().is_err() {
            return Err(IngestError::InconsistentOutcome(row));
        }
        out.push(counts);
    }
    Ok(out)
}
