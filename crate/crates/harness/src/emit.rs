//! Result emission: CSV/JSON rows, a run manifest and per-figure plot data.

use crate::config_file::ConfigFile;
use crate::experiments::{ExperimentKind, ResultRow, RowStatus};
use crate::HarnessError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const CSV_HEADER: &str =
    "scenario,baseline,sweep_value,s_min_bits,crb,xi_norm,p_cs_w,p_comp_w,epochs,seconds,status";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Reproducibility record written next to the results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub config: ConfigFile,
    pub package: String,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: String, seed: u64, config: ConfigFile) -> Self {
        Self {
            command,
            seed,
            config,
            package: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |e| HarnessError::Io {
        path: path.display().to_string(),
        source: e,
    }
}

/// Serializes rows to the canonical CSV text (deterministic byte-for-byte
/// for identical rows; the `seconds` column is wall-clock and varies).
pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.scenario,
            r.baseline,
            r.sweep_value,
            r.s_min_bits,
            r.crb,
            r.xi_norm,
            r.p_cs_w,
            r.p_comp_w,
            r.epochs,
            r.seconds,
            r.status.name()
        ));
    }
    out
}

/// Parses the canonical CSV back into rows.
pub fn parse_rows_csv(text: &str) -> Result<Vec<ResultRow>, HarnessError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| HarnessError::Other("empty CSV".into()))?;
    if header != CSV_HEADER {
        return Err(HarnessError::Other(format!("unexpected header: {header}")));
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            return Err(HarnessError::Other(format!(
                "line {}: expected 11 fields, got {}",
                n + 2,
                f.len()
            )));
        }
        let parse = |s: &str| -> Result<f64, HarnessError> {
            s.parse()
                .map_err(|e| HarnessError::Other(format!("line {}: {e}", n + 2)))
        };
        let status = match f[10] {
            "ok" => RowStatus::Ok,
            "infeasible" => RowStatus::Infeasible,
            "error" => RowStatus::Error,
            other => return Err(HarnessError::Other(format!("bad status {other}"))),
        };
        rows.push(ResultRow {
            scenario: f[0].to_string(),
            baseline: f[1].to_string(),
            sweep_value: parse(f[2])?,
            s_min_bits: parse(f[3])?,
            crb: parse(f[4])?,
            xi_norm: parse(f[5])?,
            p_cs_w: parse(f[6])?,
            p_comp_w: parse(f[7])?,
            epochs: f[8]
                .parse()
                .map_err(|e| HarnessError::Other(format!("line {}: {e}", n + 2)))?,
            seconds: parse(f[9])?,
            status,
        });
    }
    Ok(rows)
}

/// Mean of the successful runs per (sweep value, series) cell.
fn aggregate(rows: &[ResultRow], series_of: impl Fn(&ResultRow) -> String) -> PlotTable {
    let mut cells: BTreeMap<(u64, String), (f64, usize)> = BTreeMap::new();
    let mut xs: Vec<f64> = Vec::new();
    let mut series: Vec<String> = Vec::new();
    for r in rows {
        if r.status != RowStatus::Ok {
            continue;
        }
        let key = (r.sweep_value.to_bits(), series_of(r));
        if !xs.iter().any(|&x| x == r.sweep_value) {
            xs.push(r.sweep_value);
        }
        if !series.contains(&key.1) {
            series.push(key.1.clone());
        }
        let cell = cells.entry(key).or_insert((0.0, 0));
        cell.0 += r.s_min_bits;
        cell.1 += 1;
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    series.sort();
    PlotTable { xs, series, cells }
}

pub struct PlotTable {
    pub xs: Vec<f64>,
    pub series: Vec<String>,
    cells: BTreeMap<(u64, String), (f64, usize)>,
}

impl PlotTable {
    pub fn mean(&self, x: f64, series: &str) -> Option<f64> {
        self.cells
            .get(&(x.to_bits(), series.to_string()))
            .map(|(sum, n)| sum / *n as f64)
    }

    fn to_csv(&self) -> String {
        let mut out = String::from("x");
        for s in &self.series {
            out.push(',');
            out.push_str(s);
        }
        out.push('\n');
        for &x in &self.xs {
            out.push_str(&format!("{x}"));
            for s in &self.series {
                out.push(',');
                match self.mean(x, s) {
                    Some(v) => out.push_str(&format!("{v}")),
                    None => out.push_str("nan"),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Mean worst-case rate per sweep value and baseline (region figure).
pub fn region_plot_table(rows: &[ResultRow]) -> PlotTable {
    aggregate(rows, |r| r.baseline.clone())
}

/// Mean worst-case rate per bound value and preset (estimation figure).
pub fn crb_plot_table(rows: &[ResultRow]) -> PlotTable {
    aggregate(rows, |r| {
        r.scenario.split(':').next().unwrap_or("run").to_string()
    })
}

/// Writes rows (CSV or JSON), the manifest, and — for sweeps — the
/// per-figure plot data. Returns the written paths.
pub fn emit_results(
    rows: &[ResultRow],
    kind: ExperimentKind,
    format: OutputFormat,
    dir: &Path,
    manifest: &RunManifest,
) -> Result<Vec<PathBuf>, HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::Other("no rows to emit".into()));
    }
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();

    let rows_path = match format {
        OutputFormat::Csv => {
            let p = dir.join("results.csv");
            let mut f = std::fs::File::create(&p).map_err(io_err(&p))?;
            f.write_all(rows_to_csv(rows).as_bytes()).map_err(io_err(&p))?;
            p
        }
        OutputFormat::Json => {
            let p = dir.join("results.json");
            let text = serde_json::to_string_pretty(rows)
                .map_err(|e| HarnessError::Other(e.to_string()))?;
            std::fs::write(&p, text).map_err(io_err(&p))?;
            p
        }
    };
    written.push(rows_path);

    let manifest_path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| HarnessError::Other(e.to_string()))?;
    std::fs::write(&manifest_path, text).map_err(io_err(&manifest_path))?;
    written.push(manifest_path);

    match kind {
        ExperimentKind::RegionSweep => {
            let p = dir.join("figure_region.csv");
            std::fs::write(&p, region_plot_table(rows).to_csv()).map_err(io_err(&p))?;
            written.push(p);
        }
        ExperimentKind::CrbSweep => {
            let p = dir.join("figure_crb.csv");
            std::fs::write(&p, crb_plot_table(rows).to_csv()).map_err(io_err(&p))?;
            written.push(p);
        }
        _ => {}
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(scenario: &str, baseline: &str, v: f64, s: f64) -> ResultRow {
        ResultRow {
            scenario: scenario.into(),
            baseline: baseline.into(),
            sweep_value: v,
            s_min_bits: s,
            crb: 0.125,
            xi_norm: 200.0,
            p_cs_w: 0.31,
            p_comp_w: 0.004,
            epochs: 3,
            seconds: 1.25,
            status: RowStatus::Ok,
        }
    }

    #[test]
    fn single_row_gives_two_line_csv() {
        let text = rows_to_csv(&[row("seed1", "proposed", 0.0025, 0.07)]);
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    }

    #[test]
    fn csv_round_trip_is_identity() {
        let rows = vec![
            row("trial0", "proposed", 4e-4, 0.071234567891),
            row("trial0", "fpa", 4e-4, 0.02),
            ResultRow {
                status: RowStatus::Infeasible,
                s_min_bits: 0.0,
                ..row("trial1", "proposed", 9e-4, 0.0)
            },
        ];
        let text = rows_to_csv(&rows);
        let back = parse_rows_csv(&text).unwrap();
        assert_eq!(rows, back);
        // and the re-serialization is byte-identical
        assert_eq!(text, rows_to_csv(&back));
    }

    #[test]
    fn plot_table_averages_ok_rows_only() {
        let mut rows = vec![
            row("trial0", "proposed", 4e-4, 0.06),
            row("trial1", "proposed", 4e-4, 0.10),
            row("trial0", "fpa", 4e-4, 0.02),
        ];
        rows.push(ResultRow {
            status: RowStatus::Error,
            ..row("trial2", "proposed", 4e-4, 99.0)
        });
        let table = region_plot_table(&rows);
        assert_eq!(table.mean(4e-4, "proposed"), Some(0.08));
        assert_eq!(table.mean(4e-4, "fpa"), Some(0.02));
    }

    #[test]
    fn emit_writes_expected_files() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![row("trial0", "proposed", 4e-4, 0.06)];
        let manifest = RunManifest::new("sweep".into(), 7, ConfigFile::default());
        let written = emit_results(
            &rows,
            ExperimentKind::RegionSweep,
            OutputFormat::Csv,
            dir.path(),
            &manifest,
        )
        .unwrap();
        assert_eq!(written.len(), 3);
        for p in &written {
            assert!(p.exists());
        }
        let text = std::fs::read_to_string(&written[0]).unwrap();
        assert!(text.starts_with(CSV_HEADER));
    }
}
