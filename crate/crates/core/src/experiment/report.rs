//! Sweep CSV → SVG. The reader accepts only the exact sweep schema.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use super::svg::{Heatmap, LinePlot, Series};
use super::sweep::SWEEP_COLUMNS;
use super::write_file;
use crate::error::{Error, Result};

/// Columns that can be plotted.
pub const PLOT_COLUMNS: [&str; 10] = ["s1", "s2", "s2_attempt", "q2", "q3", "p3", "aoi1", "aoi2", "aoi1_sim", "aoi2_sim"];

/// Above this many series values a line plot becomes unreadable.
const AUTO_HEATMAP_SERIES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlotKind {
    /// Heatmap for dense two-parameter meshes, lines otherwise.
    #[default]
    Auto,
    Line,
    Heatmap,
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(PlotKind::Auto),
            "line" => Ok(PlotKind::Line),
            "heatmap" => Ok(PlotKind::Heatmap),
            _ => Err(Error::Config(format!("plot kind must be auto, line or heatmap, found `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub series_value: Option<f64>,
    pub x_value: f64,
    /// Plottable columns; empty cells are absent.
    pub values: BTreeMap<&'static str, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub series_param: Option<String>,
    pub x_param: String,
    pub rows: Vec<TableRow>,
}

fn parse_cell(s: &str, col: &str, line: usize) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::Schema(format!("row {line}: column `{col}` holds `{s}`, expected a number")))
}

/// Parses sweep CSV text. Missing or unexpected columns are schema errors
/// naming the column; an empty body is an error.
pub fn parse_sweep_csv(text: &str) -> Result<SweepTable> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    for col in SWEEP_COLUMNS {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::Schema(format!("missing column `{col}`")));
        }
    }
    if let Some(extra) = headers.iter().find(|h| !SWEEP_COLUMNS.contains(&h.as_str())) {
        return Err(Error::Schema(format!("unexpected column `{extra}`")));
    }
    let idx = |c: &str| headers.iter().position(|h| h == c).unwrap();

    let mut series_param: Option<String> = None;
    let mut x_param: Option<String> = None;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let get = |c: &str| rec.get(idx(c)).unwrap_or("");
        let sp = get("series_param");
        let xp = get("x_param");
        if xp.is_empty() {
            return Err(Error::Schema(format!("row {line}: empty x_param")));
        }
        let sp = (!sp.is_empty()).then(|| sp.to_string());
        match (&x_param, &series_param) {
            (None, _) => {
                x_param = Some(xp.to_string());
                series_param = sp;
            }
            (Some(x), s) if x == xp && *s == sp => {}
            _ => return Err(Error::Schema(format!("row {line}: parameters change within the file"))),
        }
        let x_value = parse_cell(get("x_value"), "x_value", line)?
            .ok_or_else(|| Error::Schema(format!("row {line}: empty x_value")))?;
        let series_value = parse_cell(get("series_value"), "series_value", line)?;
        if series_param.is_some() != series_value.is_some() {
            return Err(Error::Schema(format!("row {line}: series_value does not match series_param")));
        }
        let mut values = BTreeMap::new();
        for col in PLOT_COLUMNS {
            if let Some(v) = parse_cell(get(col), col, line)? {
                values.insert(col, v);
            }
        }
        rows.push(TableRow {
            series_value,
            x_value,
            values,
        });
    }
    let x_param = x_param.ok_or_else(|| Error::Schema("CSV has a header but no data rows".into()))?;
    Ok(SweepTable {
        series_param,
        x_param,
        rows,
    })
}

pub fn read_sweep_csv(path: &Path) -> Result<SweepTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sweep_csv(&text).map_err(|e| match e {
        Error::Schema(m) => Error::Schema(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn describe(column: &str) -> &str {
    match column {
        "s1" => "success probability, incumbent",
        "s2" => "success probability, secondary",
        "s2_attempt" => "success per attempt, secondary",
        "q2" => "secondary transmit probability",
        "q3" => "jammer duty cycle",
        "p3" => "jamming power",
        "aoi1" | "aoi1_sim" => "mean AoI, incumbent (slots)",
        _ => "mean AoI, secondary (slots)",
    }
}

/// Renders `column` of a sweep table as SVG.
pub fn render_report(table: &SweepTable, column: &str, kind: PlotKind) -> Result<String> {
    let column: &'static str = PLOT_COLUMNS
        .into_iter()
        .find(|c| *c == column)
        .ok_or_else(|| Error::Config(format!("cannot plot column `{column}` (choose from {})", PLOT_COLUMNS.join(", "))))?;
    let series_values = distinct(table.rows.iter().filter_map(|r| r.series_value));
    let kind = match kind {
        PlotKind::Auto if series_values.len() > AUTO_HEATMAP_SERIES => PlotKind::Heatmap,
        PlotKind::Auto => PlotKind::Line,
        k => k,
    };
    let title = format!("{} vs {}", describe(column), table.x_param);
    match kind {
        PlotKind::Heatmap => {
            let sp = table
                .series_param
                .clone()
                .ok_or_else(|| Error::Config("a heatmap needs a series parameter".into()))?;
            let xs = distinct(table.rows.iter().map(|r| r.x_value));
            let mut z = vec![vec![None; xs.len()]; series_values.len()];
            for r in &table.rows {
                let j = series_values.iter().position(|v| Some(*v) == r.series_value).unwrap();
                let i = xs.iter().position(|v| *v == r.x_value).unwrap();
                z[j][i] = r.values.get(column).copied();
            }
            Ok(Heatmap {
                title: format!("{} over ({}, {sp})", describe(column), table.x_param),
                x_label: table.x_param.clone(),
                y_label: sp,
                xs,
                ys: series_values,
                z,
                z_label: column.to_string(),
            }
            .render())
        }
        _ => {
            let sim_column = match column {
                "aoi1" => Some("aoi1_sim"),
                "aoi2" => Some("aoi2_sim"),
                _ => None,
            };
            let groups: Vec<Option<f64>> = if series_values.is_empty() {
                vec![None]
            } else {
                series_values.iter().copied().map(Some).collect()
            };
            let series = groups
                .into_iter()
                .map(|g| {
                    let rows: Vec<_> = table.rows.iter().filter(|r| r.series_value == g).collect();
                    let pick = |c: &str| -> Vec<(f64, f64)> {
                        rows.iter()
                            .filter_map(|r| r.values.get(c).map(|v| (r.x_value, *v)))
                            .collect()
                    };
                    Series {
                        label: match (g, &table.series_param) {
                            (Some(v), Some(p)) => format!("{p} = {}", super::svg::label(v)),
                            _ => column.to_string(),
                        },
                        points: pick(column),
                        markers: sim_column.map(pick).unwrap_or_default(),
                    }
                })
                .collect();
            Ok(LinePlot {
                title,
                x_label: table.x_param.clone(),
                y_label: describe(column).to_string(),
                series,
            }
            .render())
        }
    }
}

/// Reads a sweep CSV and writes the SVG. Nothing is written on error.
pub fn write_report(csv_path: &Path, out: &Path, column: &str, kind: PlotKind) -> Result<()> {
    let table = read_sweep_csv(csv_path)?;
    let svg = render_report(&table, column, kind)?;
    write_file(out, svg.as_bytes())
}
