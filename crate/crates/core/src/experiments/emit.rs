//! Table serialization and run manifests.
//!
//! CSV and JSON carry the same fields under the same names. Floats are
//! written with 17 significant digits in both formats, so parsing either one
//! recovers the exact values in the table.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExperimentSpec, NSummary, ResultRow, ResultTable};
use crate::error::{Error, Result};
use crate::model::TheoryBounds;
use crate::numfmt::g17;
use crate::theory::SeriesClass;

pub const CSV_HEADER: &str = "experiment,n,d,lambda,family,param1,param2,replication,seed,y_n,\
epsilon_n,min_degree,max_degree,min_ratio,max_ratio,p_y,gap,contained,has_edge";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

/// A row field rendered as text. `None` means the field is empty.
enum Cell<'a> {
    Text(&'a str),
    Int(u64),
    Float(f64),
    Flag(bool),
}

fn cells(row: &ResultRow) -> [(&'static str, Option<Cell<'_>>); 19] {
    let f = |x: Option<f64>| x.map(Cell::Float);
    let i = |x: Option<u64>| x.map(Cell::Int);
    [
        ("experiment", Some(Cell::Text(row.experiment.as_str()))),
        ("n", Some(Cell::Int(row.n as u64))),
        ("d", Some(Cell::Int(row.d as u64))),
        ("lambda", Some(Cell::Float(row.lambda))),
        ("family", row.family.as_deref().map(Cell::Text)),
        ("param1", f(row.param1)),
        ("param2", f(row.param2)),
        ("replication", Some(Cell::Int(row.replication as u64))),
        ("seed", Some(Cell::Int(row.seed))),
        ("y_n", f(row.y_n)),
        ("epsilon_n", i(row.epsilon_n)),
        ("min_degree", i(row.min_degree)),
        ("max_degree", i(row.max_degree)),
        ("min_ratio", f(row.min_ratio)),
        ("max_ratio", f(row.max_ratio)),
        ("p_y", f(row.p_y)),
        ("gap", f(row.gap)),
        ("contained", row.contained.map(Cell::Flag)),
        ("has_edge", row.has_edge.map(Cell::Flag)),
    ]
}

/// Header line plus one line per row; empty fields are left blank.
pub fn render_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        for (k, (_, cell)) in cells(row).into_iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            match cell {
                None => {}
                // family labels are fixed identifiers, never needing quotes
                Some(Cell::Text(s)) => out.push_str(s),
                Some(Cell::Int(v)) => {
                    let _ = write!(out, "{v}");
                }
                Some(Cell::Float(v)) => out.push_str(&g17(v)),
                Some(Cell::Flag(b)) => out.push_str(if b { "true" } else { "false" }),
            }
        }
        out.push('\n');
    }
    out
}

/// JSON array of row objects, one object per line; empty fields are `null`.
pub fn render_json(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(256 * (rows.len() + 1));
    out.push('[');
    for (r, row) in rows.iter().enumerate() {
        out.push_str(if r == 0 { "\n  {" } else { ",\n  {" });
        for (k, (name, cell)) in cells(row).into_iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "\"{name}\":");
            match cell {
                None => out.push_str("null"),
                Some(Cell::Text(s)) => {
                    out.push_str(&serde_json::to_string(s).expect("string serializes"))
                }
                Some(Cell::Int(v)) => {
                    let _ = write!(out, "{v}");
                }
                Some(Cell::Float(v)) => out.push_str(&g17(v)),
                Some(Cell::Flag(b)) => out.push_str(if b { "true" } else { "false" }),
            }
        }
        out.push('}');
    }
    out.push_str("\n]\n");
    out
}

/// Parses the output of [`render_json`].
pub fn parse_json_rows(text: &str) -> Result<Vec<ResultRow>> {
    Ok(serde_json::from_str(text)?)
}

fn render(rows: &[ResultRow], format: Format) -> String {
    match format {
        Format::Csv => render_csv(rows),
        Format::Json => render_json(rows),
    }
}

/// Writes the rows of `table` to `destination`.
pub fn emit(table: &ResultTable, format: Format, destination: &Path) -> Result<()> {
    if table.rows.is_empty() {
        return Err(Error::invalid("table", "nothing to emit"));
    }
    fs::write(destination, render(&table.rows, format)).map_err(|e| Error::io(destination, e))
}

/// Record written next to every table: what was run, with which build, and
/// the per-n aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub spec: ExperimentSpec,
    pub table: String,
    pub format: Format,
    pub rows: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory_bounds: Option<TheoryBounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesClass>,
    pub summaries: Vec<NSummary>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn new(table: &ResultTable, table_path: &Path, format: Format) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            spec: table.spec.clone(),
            table: table_path.display().to_string(),
            format,
            rows: table.rows.len(),
            theory_bounds: table.bounds,
            series: table.series,
            summaries: table.summaries.clone(),
            notes: notes(table),
        }
    }
}

fn notes(table: &ResultTable) -> Vec<String> {
    use super::ExperimentKind::*;
    match table.spec.kind {
        DegreeLaw => vec![
            "min_limsup_statement is lambda^d as stated for the min-degree limsup; \
             min_limsup_proof_envelope is (2 lambda)^d, the constant the proof establishes"
                .into(),
        ],
        Threshold => {
            let mut v = vec![
                "first-moment oracle: expected_edges = C(n,2) * p(y_n) bounds P[edge] from above \
                 (Markov); edge_frequency should stay below it when it is small and approach 1 \
                 when it is large"
                    .into(),
            ];
            for s in &table.summaries {
                if let (Some(e), Some(f)) = (s.expected_edges, s.edge_frequency) {
                    v.push(format!(
                        "n={}: expected_edges={} edge_frequency={}",
                        s.n,
                        g17(e),
                        g17(f)
                    ));
                }
            }
            v
        }
        Containment => vec![
            "union-bound oracle: P[some coordinate exceeds R_n] <= n * d * exp(-lambda R_n) \
             (escape_union_bound), vacuous when (1 + epsilon) / d < 1"
                .into(),
            "P[some point has every coordinate above R_n] <= n * exp(-lambda d R_n) = n^(-epsilon) \
             (corner_escape_bound); corner_free_frequency is the matching empirical frequency"
                .into(),
        ],
        EdgeSlln | UniformSlln => vec![],
    }
}

/// `<table path>.manifest.json`
pub fn manifest_path(table_path: &Path) -> PathBuf {
    let mut s = table_path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes the manifest for `table` next to `table_path` and returns its path.
pub fn write_manifest(table: &ResultTable, table_path: &Path, format: Format) -> Result<PathBuf> {
    let path = manifest_path(table_path);
    let mut json = serde_json::to_string_pretty(&Manifest::new(table, table_path, format))?;
    json.push('\n');
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Reads an experiment spec from a JSON file holding either a bare spec or a
/// manifest.
pub fn read_spec_or_manifest(path: &Path) -> Result<ExperimentSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let spec = match value.get("spec") {
        Some(inner) => ExperimentSpec::deserialize(inner)?,
        None => ExperimentSpec::deserialize(&value)?,
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run, ExperimentKind, RunOptions};
    use crate::model::EdgeDistanceFamily;

    fn small_table() -> ResultTable {
        let spec = ExperimentSpec {
            kind: ExperimentKind::DegreeLaw,
            n_list: vec![60, 90],
            d: 2,
            lambda: 1.5,
            family: Some(EdgeDistanceFamily::log_regime(3.0, 1.5, 2).unwrap()),
            y_grid: None,
            replications: 2,
            base_seed: 4,
            epsilon: None,
        };
        run(&spec, RunOptions::default(), &mut |_| {}).unwrap()
    }

    #[test]
    fn one_row_csv_has_two_lines() {
        let t = small_table();
        let csv = render_csv(&t.rows[..1]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1].split(',').count(), 19);
        // contained / has_edge are blank for degree-law rows
        assert!(lines[1].ends_with(",,"));
    }

    #[test]
    fn json_round_trips() {
        let t = small_table();
        let back = parse_json_rows(&render_json(&t.rows)).unwrap();
        assert_eq!(back, t.rows);
    }

    #[test]
    fn csv_and_json_carry_identical_numbers() {
        let t = small_table();
        let csv = render_csv(&t.rows);
        let json: Vec<serde_json::Map<String, serde_json::Value>> =
            serde_json::from_str(&render_json(&t.rows)).unwrap();
        let header: Vec<&str> = CSV_HEADER.split(',').collect();
        for (line, obj) in csv.lines().skip(1).zip(&json) {
            for (name, field) in header.iter().zip(line.split(',')) {
                let value = &obj[*name];
                if field.is_empty() {
                    assert!(value.is_null(), "{name}");
                } else if let Some(x) = value.as_f64() {
                    assert_eq!(
                        field.parse::<f64>().unwrap().to_bits(),
                        x.to_bits(),
                        "{name}"
                    );
                } else if let Some(b) = value.as_bool() {
                    assert_eq!(field, b.to_string());
                } else {
                    assert_eq!(field, value.as_str().unwrap());
                }
            }
        }
    }

    #[test]
    fn emit_reports_path_on_failure() {
        let t = small_table();
        let bad = Path::new("/nonexistent-dir/out.csv");
        let err = emit(&t, Format::Csv, bad).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/out.csv"));
    }

    #[test]
    fn empty_table_is_rejected() {
        let mut t = small_table();
        t.rows.clear();
        let dir = tempfile::tempdir().unwrap();
        assert!(emit(&t, Format::Csv, &dir.path().join("x.csv")).is_err());
    }

    #[test]
    fn manifest_reproduces_table() {
        let t = small_table();
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("t.csv");
        emit(&t, Format::Csv, &out).unwrap();
        let mpath = write_manifest(&t, &out, Format::Csv).unwrap();
        assert_eq!(mpath, dir.path().join("t.csv.manifest.json"));
        let spec = read_spec_or_manifest(&mpath).unwrap();
        assert_eq!(spec, t.spec);
        let again = run(&spec, RunOptions { threads: 2 }, &mut |_| {}).unwrap();
        assert_eq!(render_csv(&again.rows), fs::read_to_string(&out).unwrap());

        let m: Manifest = serde_json::from_str(&fs::read_to_string(&mpath).unwrap()).unwrap();
        assert_eq!(m.theory_bounds, t.bounds);
        assert_eq!(m.summaries.len(), 2);
        assert!(m.summaries[0].min_limsup_proof_envelope.is_some());
    }
}
