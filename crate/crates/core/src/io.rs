//! CSV ingest, run artifacts, and key=value config files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::experiment::{CurveRecord, MethodRow, RunOutput, RunRecord};
use crate::trajectory::{Point2, Track2D};
use crate::tuning::TuningResult;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "ANW_OUTPUT_DIR";
pub const METRICS_HEADER: [&str; 7] = [
    "Method",
    "h",
    "lambda",
    "RMSE",
    "WaypointError",
    "Smoothness",
    "CSS",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schema {
    /// Columns `x,y[,is_waypoint]`.
    Xy,
    /// Columns `lon,lat[,is_waypoint]`.
    LonLat,
}

impl FromStr for Schema {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xy" => Ok(Schema::Xy),
            "lonlat" | "lon-lat" | "lon_lat" => Ok(Schema::LonLat),
            other => Err(Error::InvalidConfig(format!("unknown schema `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ingested {
    Dataset(Dataset),
    Track(Track2D),
}

struct Row {
    a: f64,
    b: f64,
    flagged: bool,
}

fn parse_flag(raw: &str, line: u64) -> Result<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "" | "0" | "false" | "no" => Ok(false),
        "1" | "true" | "yes" => Ok(true),
        other => Err(Error::Parse {
            line,
            message: format!("bad waypoint flag `{other}`"),
        }),
    }
}

fn parse_value(raw: &str, line: u64) -> Result<f64> {
    let v: f64 = raw.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("`{}` is not a number", raw.trim()),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFiniteValue { line });
    }
    Ok(v)
}

fn read_rows<R: Read>(reader: R, names: [&str; 2]) -> Result<Vec<Row>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader);
    let header_err = |message: String| Error::Parse { line: 1, message };
    let headers = rdr
        .headers()
        .map_err(|e| header_err(e.to_string()))?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect::<Vec<_>>();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let ia = find(names[0]).ok_or_else(|| header_err(format!("missing column `{}`", names[0])))?;
    let ib = find(names[1]).ok_or_else(|| header_err(format!("missing column `{}`", names[1])))?;
    let iw = find("is_waypoint");

    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push(Row {
            a: parse_value(&record[ia], line)?,
            b: parse_value(&record[ib], line)?,
            flagged: match iw {
                Some(i) => parse_flag(&record[i], line)?,
                None => false,
            },
        });
    }
    if rows.is_empty() {
        return Err(Error::NoRows);
    }
    Ok(rows)
}

/// Reads `x,y[,is_waypoint]` rows into a dataset; flagged rows are constrained.
pub fn read_xy<R: Read>(reader: R) -> Result<Dataset> {
    let rows = read_rows(reader, ["x", "y"])?;
    let constraints = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.flagged)
        .map(|(i, _)| i)
        .collect();
    Dataset::new(
        rows.iter().map(|r| r.a).collect(),
        rows.iter().map(|r| r.b).collect(),
        constraints,
    )
    .map_err(|e| Error::InvalidDataset(e.to_string()))
}

/// Reads `lon,lat[,is_waypoint]` rows into a track. Unflagged rows are the
/// observed points in file order; flagged rows are waypoints.
pub fn read_lonlat<R: Read>(reader: R) -> Result<Track2D> {
    let rows = read_rows(reader, ["lon", "lat"])?;
    let (wps, pts): (Vec<&Row>, Vec<&Row>) = rows.iter().partition(|r| r.flagged);
    if pts.is_empty() {
        return Err(Error::NoRows);
    }
    let point = |r: &&Row| Point2::new(r.a, r.b);
    Ok(Track2D::new(
        pts.iter().map(point).collect(),
        wps.iter().map(point).collect(),
    ))
}

pub fn ingest_csv(path: &Path, schema: Schema) -> Result<Ingested> {
    let file = fs::File::open(path)?;
    Ok(match schema {
        Schema::Xy => Ingested::Dataset(read_xy(file)?),
        Schema::LonLat => Ingested::Track(read_lonlat(file)?),
    })
}

/// Output directory: the explicit path, else `$ANW_OUTPUT_DIR`, else
/// `anw-output` in the working directory.
pub fn output_dir(explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from("anw-output"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl std::fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Both => "both",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "both" | "all" => Ok(OutputFormat::Both),
            other => Err(Error::InvalidConfig(format!("unknown format `{other}`"))),
        }
    }
}

fn method_column(row: &MethodRow) -> String {
    match row.target.as_str() {
        "y" | "xy" => row.method.clone(),
        t => format!("{} [{t}]", row.method),
    }
}

fn float_field(v: f64) -> String {
    // `Display` on f64 prints the shortest string that parses back exactly.
    format!("{v}")
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidConfig(format!("{other:?}")),
    }
}

pub fn write_metrics_csv(path: &Path, rows: &[MethodRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(METRICS_HEADER).map_err(csv_err)?;
    for r in rows {
        let m = &r.metrics;
        w.write_record([
            method_column(r),
            float_field(r.h),
            r.lambda.map(float_field).unwrap_or_default(),
            float_field(m.rmse),
            float_field(m.waypoint_error),
            float_field(m.smoothness),
            float_field(m.css),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// A parsed row of `metrics.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsCsvRow {
    pub method: String,
    pub h: f64,
    pub lambda: Option<f64>,
    pub rmse: f64,
    pub waypoint_error: f64,
    pub smoothness: f64,
    pub css: f64,
}

impl MetricsCsvRow {
    pub fn from_row(row: &MethodRow) -> Self {
        Self {
            method: method_column(row),
            h: row.h,
            lambda: row.lambda,
            rmse: row.metrics.rmse,
            waypoint_error: row.metrics.waypoint_error,
            smoothness: row.metrics.smoothness,
            css: row.metrics.css,
        }
    }
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsCsvRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.iter().ne(METRICS_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: "unexpected metrics header".into(),
        });
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<f64> {
            record[i].parse().map_err(|_| Error::Parse {
                line,
                message: format!("`{}` is not a number", &record[i]),
            })
        };
        out.push(MetricsCsvRow {
            method: record[0].to_string(),
            h: num(1)?,
            lambda: if record[2].is_empty() {
                None
            } else {
                Some(num(2)?)
            },
            rmse: num(3)?,
            waypoint_error: num(4)?,
            smoothness: num(5)?,
            css: num(6)?,
        });
    }
    Ok(out)
}

pub fn write_curve_csv(path: &Path, curve: &CurveRecord) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec![curve.grid_name.clone()];
    header.extend(curve.columns.iter().map(|c| c.name.clone()));
    w.write_record(&header).map_err(csv_err)?;
    for (i, g) in curve.grid.iter().enumerate() {
        let mut rec = vec![float_field(*g)];
        rec.extend(curve.columns.iter().map(|c| float_field(c.values[i])));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_tuning_surface(path: &Path, surfaces: &[(String, TuningResult)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
        "search",
        "h",
        "lambda",
        "cv_error",
        "waypoint_penalty",
        "total",
        "feasible",
    ])
    .map_err(csv_err)?;
    for (label, result) in surfaces {
        for c in &result.surface {
            w.write_record([
                label.clone(),
                float_field(c.h),
                float_field(c.lambda),
                float_field(c.cv_error),
                float_field(c.waypoint_penalty),
                float_field(c.total),
                c.feasible.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_run_json(path: &Path, record: &RunRecord) -> Result<()> {
    let text = serde_json::to_string_pretty(record)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_run_json(path: &Path) -> Result<RunRecord> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Writes the artifacts of a run into `dir` and returns the files written.
///
/// CSV output is `metrics.csv`, one `curve_<slug>.csv` per fitted curve, and
/// `tuning_surface.csv` when a search ran. JSON output is `run.json`.
pub fn emit(out: &RunOutput, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
        let p = dir.join("metrics.csv");
        write_metrics_csv(&p, &out.record.rows)?;
        written.push(p);
        for curve in &out.record.curves {
            let p = dir.join(format!("curve_{}.csv", curve.slug));
            write_curve_csv(&p, curve)?;
            written.push(p);
        }
        if !out.surfaces.is_empty() {
            let p = dir.join("tuning_surface.csv");
            write_tuning_surface(&p, &out.surfaces)?;
            written.push(p);
        }
    }
    if matches!(format, OutputFormat::Json | OutputFormat::Both) {
        let p = dir.join("run.json");
        write_run_json(&p, &out.record)?;
        written.push(p);
    }
    Ok(written)
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped; later
/// keys override earlier ones.
pub fn parse_kv_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value", n + 1)))?;
        let key = k.trim().to_ascii_lowercase().replace('-', "_");
        if key.is_empty() {
            return Err(Error::InvalidConfig(format!("line {}: empty key", n + 1)));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

pub fn read_kv_config(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_kv_config(&fs::read_to_string(path)?)
}
