//! Result tables, their CSV form and simple SVG line charts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("duplicate column {0:?}")]
    DuplicateColumn(String),
    #[error("row {row} has {got} cells, expected {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("no column named {0:?}")]
    MissingColumn(String),
    #[error("column {column:?} row {row} is not numeric")]
    NotNumeric { column: String, row: usize },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Real(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format!("{x:e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// Where a table came from; written as trailing `#` lines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub seed: u64,
    pub build: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

pub fn build_id() -> String {
    option_env!("BROWNNE_BUILD_ID")
        .map(str::to_string)
        .unwrap_or_else(|| format!("brownne-{}", env!("CARGO_PKG_VERSION")))
}

impl Provenance {
    pub fn now(seed: u64) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Provenance {
            seed,
            build: build_id(),
            timestamp,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Result<Self, ReportError> {
        let columns: Vec<String> = columns.into_iter().map(Into::into).collect();
        for (i, c) in columns.iter().enumerate() {
            if columns[..i].contains(c) {
                return Err(ReportError::DuplicateColumn(c.clone()));
            }
        }
        Ok(Table {
            columns,
            rows: Vec::new(),
        })
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<(), ReportError> {
        if row.len() != self.columns.len() {
            return Err(ReportError::Ragged {
                row: self.rows.len(),
                got: row.len(),
                expected: self.columns.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    fn index(&self, name: &str) -> Result<usize, ReportError> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| ReportError::MissingColumn(name.to_string()))
    }

    /// All values of a numeric column.
    pub fn numeric(&self, name: &str) -> Result<Vec<f64>, ReportError> {
        let j = self.index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(row, r)| {
                r[j].as_f64().ok_or_else(|| ReportError::NotNumeric {
                    column: name.to_string(),
                    row,
                })
            })
            .collect()
    }

    /// CSV text: header, rows, then the provenance comment lines.
    pub fn to_csv(&self, provenance: &Provenance) -> String {
        let mut out = String::new();
        write_record(&mut out, self.columns.iter().map(String::as_str));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::render).collect();
            write_record(&mut out, cells.iter().map(String::as_str));
        }
        let _ = writeln!(out, "# seed={}", provenance.seed);
        let _ = writeln!(out, "# build={}", provenance.build);
        let _ = writeln!(out, "# timestamp={}", provenance.timestamp);
        out
    }
}

fn quote(field: &str) -> std::borrow::Cow<'_, str> {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\"")).into()
    } else {
        field.into()
    }
}

fn write_record<'a>(out: &mut String, fields: impl Iterator<Item = &'a str>) {
    let quoted: Vec<_> = fields.map(quote).collect();
    out.push_str(&quoted.join(","));
    out.push('\n');
}

fn write_file(path: &Path, contents: &str) -> Result<(), ReportError> {
    std::fs::write(path, contents).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn emit_csv(table: &Table, provenance: &Provenance, path: &Path) -> Result<(), ReportError> {
    write_file(path, &table.to_csv(provenance))
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line chart of `y_cols` against `x_col`. Returns warnings, e.g. about
/// nonpositive values clamped on a log axis.
pub fn render_svg(table: &Table, x_col: &str, y_cols: &[&str], log_y: bool) -> Result<(String, Vec<String>), ReportError> {
    let xs = table.numeric(x_col)?;
    let mut warnings = Vec::new();
    let mut series = Vec::new();
    for &name in y_cols {
        let mut ys = table.numeric(name)?;
        if log_y {
            let floor = ys.iter().copied().filter(|y| *y > 0.0).fold(f64::INFINITY, f64::min);
            let floor = if floor.is_finite() { floor } else { 1.0 };
            let mut clamped = 0;
            for y in &mut ys {
                if !(*y > 0.0) {
                    *y = floor;
                    clamped += 1;
                }
            }
            if clamped > 0 {
                warnings.push(format!(
                    "{name}: {clamped} nonpositive value(s) clamped to {floor:e} on log axis"
                ));
            }
            for y in &mut ys {
                *y = y.log10();
            }
        }
        series.push((name, ys));
    }

    let (w, h, pad) = (640.0, 400.0, 60.0);
    let span = |v: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = span(&mut xs.iter().copied());
    let (y0, y1) = span(&mut series.iter().flat_map(|(_, ys)| ys.iter().copied()));
    let px = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{a} {b} L{a} {c} L{d} {c}" stroke="black" fill="none"/>"#,
        a = pad,
        b = pad,
        c = h - pad,
        d = w - pad
    );
    let y_label = if log_y { "log10" } else { "" };
    let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#, w / 2.0, h - 15.0, escape(x_col));
    let _ = writeln!(svg, r#"<text x="10" y="{}" font-size="12">{y_label}</text>"#, pad - 10.0);
    for (label, x, y) in [
        (format!("{x0:.3}"), pad, h - pad + 15.0),
        (format!("{x1:.3}"), w - pad, h - pad + 15.0),
    ] {
        let _ = writeln!(svg, r#"<text x="{x}" y="{y}" font-size="10" text-anchor="middle">{label}</text>"#);
    }
    for (label, y) in [(format!("{y0:.3}"), h - pad), (format!("{y1:.3}"), pad)] {
        let _ = writeln!(svg, r#"<text x="{}" y="{y}" font-size="10" text-anchor="end">{label}</text>"#, pad - 5.0);
    }
    for (k, (name, ys)) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = xs.iter().zip(ys).map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        if points.len() == 1 {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#, px(xs[0]), py(ys[0]));
        } else {
            let _ = writeln!(svg, r#"<polyline points="{}" stroke="{colour}" fill="none"/>"#, points.join(" "));
        }
        let ly = pad + 15.0 * k as f64;
        let _ = writeln!(svg, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}"/>"#, w - pad - 120.0, w - pad - 100.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="11">{}</text>"#, w - pad - 95.0, ly + 4.0, escape(name));
    }
    svg.push_str("</svg>\n");
    Ok((svg, warnings))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn emit_svg(table: &Table, x_col: &str, y_cols: &[&str], path: &Path, log_y: bool) -> Result<Vec<String>, ReportError> {
    let (svg, warnings) = render_svg(table, x_col, y_cols, log_y)?;
    write_file(path, &svg)?;
    Ok(warnings)
}
