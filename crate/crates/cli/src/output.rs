//! Table rows and CSV/JSON emission.
//!
//! CSV and JSON carry the same numbers: floats are written in shortest
//! round-trip form in both, except the stats table, whose interface pins 15
//! significant digits (values are rounded through that representation
//! before being stored, so both formats agree exactly).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A table that knows its CSV header and row rendering; JSON comes from
/// `Serialize`.
pub trait Row: Serialize {
    fn headers() -> Vec<String>;
    fn record(&self) -> Vec<String>;
}

pub fn emit<T: Row>(out_dir: &Path, name: &str, format: Format, rows: &[T]) -> Result<()> {
    match format {
        Format::Csv => {
            let path = out_dir.join(format!("{name}.csv"));
            let file =
                File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
            let mut w = csv::Writer::from_writer(BufWriter::new(file));
            w.write_record(T::headers())?;
            for row in rows {
                w.write_record(row.record())?;
            }
            w.flush()?;
        }
        Format::Json => {
            let path = out_dir.join(format!("{name}.json"));
            let file =
                File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
            let mut w = BufWriter::new(file);
            serde_json::to_writer_pretty(&mut w, rows)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

pub fn fnum(v: f64) -> String {
    if v.is_nan() {
        "n.a.".to_string()
    } else if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}

/// Rounds through the 15-significant-digit representation used by the
/// stats CSV so that both emission formats hold the same value.
pub fn sig15(v: f64) -> f64 {
    format!("{v:.14e}").parse().unwrap_or(v)
}

#[derive(Serialize)]
pub struct StatsRow {
    pub player_id: String,
    pub x1: f64,
    pub x2: f64,
    pub f1: f64,
    pub f2: f64,
    pub k1: f64,
    pub k2: f64,
}

impl Row for StatsRow {
    fn headers() -> Vec<String> {
        ["player_id", "x1", "x2", "f1", "f2", "k1", "k2"]
            .map(String::from)
            .to_vec()
    }
    fn record(&self) -> Vec<String> {
        vec![
            self.player_id.clone(),
            format!("{:.14e}", self.x1),
            format!("{:.14e}", self.x2),
            format!("{:.14e}", self.f1),
            format!("{:.14e}", self.f2),
            format!("{:.14e}", self.k1),
            format!("{:.14e}", self.k2),
        ]
    }
}

#[derive(Serialize)]
pub struct FitRow {
    pub player_id: String,
    pub delta: f64,
    pub beta: f64,
    pub lambda: f64,
    pub tau_f: f64,
    pub a_f: f64,
    pub tau_k: f64,
    pub a_k: f64,
    pub a: f64,
    pub tau: f64,
    pub soc_ok: bool,
    pub cond3_i: bool,
    pub cond3_ii: bool,
    pub cond3_iii: bool,
    pub residual: f64,
    pub iterations: u32,
}

impl Row for FitRow {
    fn headers() -> Vec<String> {
        [
            "player_id",
            "delta",
            "beta",
            "lambda",
            "tau_f",
            "a_f",
            "tau_k",
            "a_k",
            "a",
            "tau",
            "soc_ok",
            "cond3_i",
            "cond3_ii",
            "cond3_iii",
            "residual",
            "iterations",
        ]
        .map(String::from)
        .to_vec()
    }
    fn record(&self) -> Vec<String> {
        vec![
            self.player_id.clone(),
            fnum(self.delta),
            fnum(self.beta),
            fnum(self.lambda),
            fnum(self.tau_f),
            fnum(self.a_f),
            fnum(self.tau_k),
            fnum(self.a_k),
            fnum(self.a),
            fnum(self.tau),
            self.soc_ok.to_string(),
            self.cond3_i.to_string(),
            self.cond3_ii.to_string(),
            self.cond3_iii.to_string(),
            fnum(self.residual),
            self.iterations.to_string(),
        ]
    }
}

#[derive(Serialize)]
pub struct BoundsRow {
    pub player_id: String,
    pub lower: String,
    pub upper: String,
    pub lemma1_b: bool,
    pub lemma1_c: bool,
    pub b12: String,
    pub x12: String,
    pub x14: String,
    pub x24: String,
    #[serde(rename = "A1")]
    pub a1: String,
    #[serde(rename = "A2")]
    pub a2: String,
    pub ratio: String,
    pub classification: String,
}

impl Row for BoundsRow {
    fn headers() -> Vec<String> {
        [
            "player_id",
            "lower",
            "upper",
            "lemma1_b",
            "lemma1_c",
            "b12",
            "x12",
            "x14",
            "x24",
            "A1",
            "A2",
            "ratio",
            "classification",
        ]
        .map(String::from)
        .to_vec()
    }
    fn record(&self) -> Vec<String> {
        vec![
            self.player_id.clone(),
            self.lower.clone(),
            self.upper.clone(),
            self.lemma1_b.to_string(),
            self.lemma1_c.to_string(),
            self.b12.clone(),
            self.x12.clone(),
            self.x14.clone(),
            self.x24.clone(),
            self.a1.clone(),
            self.a2.clone(),
            self.ratio.clone(),
            self.classification.clone(),
        ]
    }
}

#[derive(Serialize)]
pub struct CounterfactualRow {
    pub player_id: String,
    pub delta: f64,
    pub dx1: f64,
    pub dx2: f64,
    pub dpt: f64,
    pub dgm: f64,
    pub dset: f64,
    pub dmat: f64,
    pub dprize: f64,
}

impl Row for CounterfactualRow {
    fn headers() -> Vec<String> {
        [
            "player_id",
            "delta",
            "dx1",
            "dx2",
            "dpt",
            "dgm",
            "dset",
            "dmat",
            "dprize",
        ]
        .map(String::from)
        .to_vec()
    }
    fn record(&self) -> Vec<String> {
        vec![
            self.player_id.clone(),
            fnum(self.delta),
            fnum(self.dx1),
            fnum(self.dx2),
            fnum(self.dpt),
            fnum(self.dgm),
            fnum(self.dset),
            fnum(self.dmat),
            fnum(self.dprize),
        ]
    }
}

#[derive(Serialize)]
pub struct SoftmaxRow {
    pub player_id: String,
    pub delta: f64,
    pub beta: f64,
    pub lambda: f64,
    pub tau_f: f64,
    pub a_f: f64,
    pub tau_k: f64,
    pub a_k: f64,
    pub roots_found: usize,
}

impl Row for SoftmaxRow {
    fn headers() -> Vec<String> {
        [
            "player_id",
            "delta",
            "beta",
            "lambda",
            "tau_f",
            "a_f",
            "tau_k",
            "a_k",
            "roots_found",
        ]
        .map(String::from)
        .to_vec()
    }
    fn record(&self) -> Vec<String> {
        vec![
            self.player_id.clone(),
            fnum(self.delta),
            fnum(self.beta),
            fnum(self.lambda),
            fnum(self.tau_f),
            fnum(self.a_f),
            fnum(self.tau_k),
            fnum(self.a_k),
            self.roots_found.to_string(),
        ]
    }
}

/// One player row of a t-grid matrix; cell values are already rendered
/// ("n.a." for unsolved cells).
#[derive(Serialize)]
pub struct TGridRow {
    pub player_id: String,
    pub cells: Vec<(String, String)>,
}

pub struct TGridTable {
    pub t_values: Vec<f64>,
    pub rows: Vec<TGridRow>,
}

pub fn emit_t_grid(out_dir: &Path, name: &str, format: Format, table: &TGridTable) -> Result<()> {
    match format {
        Format::Csv => {
            let path = out_dir.join(format!("{name}.csv"));
            let file =
                File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
            let mut w = csv::Writer::from_writer(BufWriter::new(file));
            let mut header = vec!["player_id".to_string()];
            header.extend(table.t_values.iter().map(|t| format!("t{t:.2}")));
            w.write_record(header)?;
            for row in &table.rows {
                let mut record = vec![row.player_id.clone()];
                record.extend(row.cells.iter().map(|(_, v)| v.clone()));
                w.write_record(record)?;
            }
            w.flush()?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct JsonRow<'a> {
                player_id: &'a str,
                cells: std::collections::BTreeMap<String, &'a str>,
            }
            let rows: Vec<JsonRow> = table
                .rows
                .iter()
                .map(|r| JsonRow {
                    player_id: &r.player_id,
                    cells: r
                        .cells
                        .iter()
                        .map(|(t, v)| (t.clone(), v.as_str()))
                        .collect(),
                })
                .collect();
            let path = out_dir.join(format!("{name}.json"));
            let file =
                File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
            let mut w = BufWriter::new(file);
            serde_json::to_writer_pretty(&mut w, &rows)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
pub struct DoubleFaultRow {
    pub player_id: String,
    pub lambda: f64,
    pub a: f64,
    pub tau: f64,
    pub gamma: f64,
}

impl Row for DoubleFaultRow {
    fn headers() -> Vec<String> {
        ["player_id", "lambda", "a", "tau", "gamma"]
            .map(String::from)
            .to_vec()
    }
    fn record(&self) -> Vec<String> {
        vec![
            self.player_id.clone(),
            fnum(self.lambda),
            fnum(self.a),
            fnum(self.tau),
            fnum(self.gamma),
        ]
    }
}

#[derive(Serialize)]
pub struct DiagnosticRow {
    pub player_id: String,
    pub j: u8,
    pub fitted: f64,
    pub lo: f64,
    pub hi: f64,
    pub significant: bool,
}

impl Row for DiagnosticRow {
    fn headers() -> Vec<String> {
        ["player_id", "j", "fitted", "lo", "hi", "significant"]
            .map(String::from)
            .to_vec()
    }
    fn record(&self) -> Vec<String> {
        vec![
            self.player_id.clone(),
            self.j.to_string(),
            fnum(self.fitted),
            fnum(self.lo),
            fnum(self.hi),
            self.significant.to_string(),
        ]
    }
}

#[derive(Serialize)]
pub struct CiRow {
    pub player_id: String,
    pub param: String,
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub significant: bool,
    pub failed_reps: usize,
}

impl Row for CiRow {
    fn headers() -> Vec<String> {
        [
            "player_id",
            "param",
            "point",
            "lo",
            "hi",
            "significant",
            "failed_reps",
        ]
        .map(String::from)
        .to_vec()
    }
    fn record(&self) -> Vec<String> {
        vec![
            self.player_id.clone(),
            self.param.clone(),
            fnum(self.point),
            fnum(self.lo),
            fnum(self.hi),
            self.significant.to_string(),
            self.failed_reps.to_string(),
        ]
    }
}

#[derive(Serialize)]
pub struct CurveRow {
    pub player_id: String,
    pub x: f64,
    pub f: f64,
    pub k: f64,
}

impl Row for CurveRow {
    fn headers() -> Vec<String> {
        ["player_id", "x", "f", "k"].map(String::from).to_vec()
    }
    fn record(&self) -> Vec<String> {
        vec![
            self.player_id.clone(),
            fnum(self.x),
            fnum(self.f),
            fnum(self.k),
        ]
    }
}

#[derive(Serialize)]
pub struct MapRow {
    pub player_id: String,
    pub lambda: f64,
    pub map: f64,
}

impl Row for MapRow {
    fn headers() -> Vec<String> {
        ["player_id", "lambda", "map"].map(String::from).to_vec()
    }
    fn record(&self) -> Vec<String> {
        vec![self.player_id.clone(), fnum(self.lambda), fnum(self.map)]
    }
}
