//! File formats for indicator tables, correlation matrices, scatter series
//! and the world-comparison report.
//!
//! Two precisions are supported. `Full` writes the shortest decimal that
//! round-trips the double. `Display` rounds to table-style precision:
//! impact to 2 decimals, eta to 3 decimals, X/E/S in scientific notation
//! with 3 significant figures (`6.02E+12`), correlations to 2 decimals.

use std::io::{Read, Write};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::indicators::{CountryIndicators, GroupLabel, WorldShare};
use crate::scalar::Scalar;
use crate::stats::{CorrelationMatrix, ScatterSeries};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("indicator file: {0}")]
    BadIndicators(String),
    #[error("unknown {what} {value:?}")]
    UnknownOption { what: &'static str, value: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = OutputError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(OutputError::UnknownOption { what: "format", value: s.into() }),
        }
    }
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    Full,
    Display,
}

impl FromStr for Precision {
    type Err = OutputError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Precision::Full),
            "display" => Ok(Precision::Display),
            _ => Err(OutputError::UnknownOption { what: "precision", value: s.into() }),
        }
    }
}

/// `d.ddE+XX` with `sig` significant figures.
pub fn fmt_sci<T: Scalar>(v: T, sig: usize) -> String {
    let v = v.to_f64().unwrap_or(f64::NAN);
    if !v.is_finite() {
        return v.to_string();
    }
    let s = format!("{:.*E}", sig.saturating_sub(1), v);
    match s.split_once('E') {
        Some((mantissa, exp)) => {
            let (sign, digits) = match exp.strip_prefix('-') {
                Some(d) => ('-', d),
                None => ('+', exp),
            };
            format!("{mantissa}E{sign}{digits:0>2}")
        }
        None => s,
    }
}

/// Fixed decimals, never printing a negative zero.
pub fn fmt_fixed<T: Scalar>(v: T, decimals: usize) -> String {
    let s = format!("{:.*}", decimals, v.to_f64().unwrap_or(f64::NAN));
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

pub fn fmt_full<T: Scalar>(v: T) -> String {
    format!("{v}")
}

fn round_dp(v: f64, decimals: i32) -> f64 {
    let p = 10f64.powi(decimals);
    (v * p).round() / p
}

fn round_sig(v: f64, sig: i32) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let mag = v.abs().log10().floor() as i32;
    round_dp(v, sig - 1 - mag)
}

/// Indicator columns, formatted for one precision.
struct IndicatorCells {
    impact: String,
    exergy: String,
    energy: String,
    entropy: String,
    eta: String,
}

impl IndicatorCells {
    fn new<T: Scalar>(r: &CountryIndicators<T>, precision: Precision) -> Self {
        match precision {
            Precision::Full => IndicatorCells {
                impact: fmt_full(r.impact),
                exergy: fmt_full(r.exergy),
                energy: fmt_full(r.energy),
                entropy: fmt_full(r.entropy),
                eta: fmt_full(r.eta),
            },
            Precision::Display => IndicatorCells {
                impact: fmt_fixed(r.impact, 2),
                exergy: fmt_sci(r.exergy, 3),
                energy: fmt_sci(r.energy, 3),
                entropy: fmt_sci(r.entropy, 3),
                eta: fmt_fixed(r.eta, 3),
            },
        }
    }
}

pub const INDICATOR_COLUMNS: [&str; 8] = ["country", "N", "C", "i", "X", "E", "S", "eta"];

/// Rounded copy used for JSON in display precision.
#[derive(Serialize)]
struct DisplayIndicators {
    country: GroupLabel,
    #[serde(rename = "N")]
    n: u64,
    #[serde(rename = "C")]
    c: u64,
    i: f64,
    #[serde(rename = "X")]
    x: f64,
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "S")]
    s: f64,
    eta: f64,
}

impl DisplayIndicators {
    fn new<T: Scalar>(r: &CountryIndicators<T>) -> Self {
        let f = |v: T| v.to_f64().unwrap_or(f64::NAN);
        DisplayIndicators {
            country: r.country,
            n: r.n,
            c: r.c,
            i: round_dp(f(r.impact), 2),
            x: round_sig(f(r.exergy), 3),
            e: round_sig(f(r.energy), 3),
            s: round_sig(f(r.entropy), 3),
            eta: round_dp(f(r.eta), 3),
        }
    }
}

pub fn write_indicators<T: Scalar, W: Write>(
    rows: &[CountryIndicators<T>],
    mut out: W,
    format: OutputFormat,
    precision: Precision,
) -> Result<(), OutputError> {
    match format {
        OutputFormat::Json => {
            match precision {
                Precision::Full => serde_json::to_writer_pretty(&mut out, rows)?,
                Precision::Display => {
                    let shown: Vec<_> = rows.iter().map(DisplayIndicators::new).collect();
                    serde_json::to_writer_pretty(&mut out, &shown)?
                }
            }
            out.write_all(b"\n")?;
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(INDICATOR_COLUMNS)?;
            for r in rows {
                let cells = IndicatorCells::new(r, precision);
                w.write_record([
                    r.country.to_string(),
                    r.n.to_string(),
                    r.c.to_string(),
                    cells.impact,
                    cells.exergy,
                    cells.energy,
                    cells.entropy,
                    cells.eta,
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Read an indicator table written by [`write_indicators`].
pub fn read_indicators<T: Scalar, R: Read>(input: R, format: OutputFormat) -> Result<Vec<CountryIndicators<T>>, OutputError> {
    if format == OutputFormat::Json {
        return Ok(serde_json::from_reader(input)?);
    }
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let idx: Vec<usize> = INDICATOR_COLUMNS
        .iter()
        .map(|col| {
            headers
                .iter()
                .position(|h| h == *col)
                .ok_or_else(|| OutputError::BadIndicators(format!("missing column {col}")))
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let cell = |k: usize| rec.get(idx[k]).unwrap_or("");
        let bad = |k: usize| OutputError::BadIndicators(format!("line {line}: bad {} value {:?}", INDICATOR_COLUMNS[k], cell(k)));
        let int = |k: usize| cell(k).parse::<u64>().map_err(|_| bad(k));
        let real = |k: usize| cell(k).parse::<f64>().ok().and_then(T::from_f64).ok_or_else(|| bad(k));
        rows.push(CountryIndicators {
            country: GroupLabel::parse(cell(0)).map_err(|e| OutputError::BadIndicators(format!("line {line}: {e}")))?,
            n: int(1)?,
            c: int(2)?,
            impact: real(3)?,
            exergy: real(4)?,
            energy: real(5)?,
            entropy: real(6)?,
            eta: real(7)?,
        });
    }
    Ok(rows)
}

pub fn write_correlation<T: Scalar, W: Write>(
    m: &CorrelationMatrix<T>,
    mut out: W,
    format: OutputFormat,
    precision: Precision,
) -> Result<(), OutputError> {
    match format {
        OutputFormat::Json => {
            let values: Vec<Vec<f64>> = m
                .values
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|v| {
                            let v = v.to_f64().unwrap_or(f64::NAN);
                            match precision {
                                Precision::Full => v,
                                Precision::Display => round_dp(v, 2) + 0.0,
                            }
                        })
                        .collect()
                })
                .collect();
            let doc = serde_json::json!({
                "labels": m.labels,
                "values": values,
                "rows_used": m.rows_used,
                "rows_dropped": m.rows_dropped,
                "log_space": m.log_space,
            });
            serde_json::to_writer_pretty(&mut out, &doc)?;
            out.write_all(b"\n")?;
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let mut header = vec!["variable".to_string()];
            header.extend(m.labels.iter().map(|l| l.label().to_string()));
            w.write_record(&header)?;
            for (label, row) in m.labels.iter().zip(&m.values) {
                let mut rec = vec![label.label().to_string()];
                rec.extend(row.iter().map(|&v| match precision {
                    Precision::Full => fmt_full(v),
                    Precision::Display => fmt_fixed(v, 2),
                }));
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Scatter CSV: a comment header, a `[points]` section, then one
/// `[reference slope=..]` section per line.
pub fn write_scatter<T: Scalar, W: Write>(
    s: &ScatterSeries<T>,
    mut out: W,
    format: OutputFormat,
    precision: Precision,
) -> Result<(), OutputError> {
    if format == OutputFormat::Json {
        serde_json::to_writer_pretty(&mut out, s)?;
        out.write_all(b"\n")?;
        return Ok(());
    }
    let num = |v: T| match precision {
        Precision::Full => fmt_full(v),
        Precision::Display => fmt_fixed(v, 4),
    };
    writeln!(out, "# x={} y={} log10={} points={}", s.x_label, s.y_label, s.log_space, s.points.len())?;
    writeln!(out, "[points]")?;
    writeln!(out, "country,x,y")?;
    for p in &s.points {
        writeln!(out, "{},{},{}", p.country, num(p.x), num(p.y))?;
    }
    for l in &s.reference_lines {
        writeln!(out, "[reference slope={}]", fmt_full(l.slope))?;
        writeln!(out, "x,y")?;
        writeln!(out, "{},{}", num(l.start.0), num(l.start.1))?;
        writeln!(out, "{},{}", num(l.end.0), num(l.end.1))?;
    }
    Ok(())
}

/// One country column of the world-comparison report.
#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ReportColumn<T> {
    pub indicators: CountryIndicators<T>,
    pub share_of_world: WorldShare<T>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct Report<T> {
    pub world: CountryIndicators<T>,
    pub countries: Vec<ReportColumn<T>>,
}

const REPORT_ROWS: [&str; 6] = ["N", "C", "i", "X", "E", "eta"];

impl<T: Scalar> Report<T> {
    /// Grid of cells: header row then one row per indicator. Countries get
    /// a value column and a percentage-of-world column.
    pub fn cells(&self, precision: Precision) -> Vec<Vec<String>> {
        let mut header = vec!["indicator".to_string(), self.world.country.to_string()];
        for c in &self.countries {
            header.push(c.indicators.country.to_string());
            header.push(format!("{} % of {}", c.indicators.country, GroupLabel::WORLD));
        }
        let value = |r: &CountryIndicators<T>, row: &str| -> String {
            let cells = IndicatorCells::new(r, precision);
            match row {
                "N" => r.n.to_string(),
                "C" => r.c.to_string(),
                "i" => cells.impact,
                "X" => cells.exergy,
                "E" => cells.energy,
                _ => cells.eta,
            }
        };
        let pct = |v: T| match precision {
            Precision::Full => fmt_full(v),
            Precision::Display => fmt_fixed(v, 1),
        };
        let mut grid = vec![header];
        for row in REPORT_ROWS {
            let mut line = vec![row.to_string(), value(&self.world, row)];
            for c in &self.countries {
                line.push(value(&c.indicators, row));
                let share = &c.share_of_world;
                line.push(match row {
                    "N" => pct(share.n),
                    "C" => pct(share.c),
                    "X" => pct(share.exergy),
                    "E" => pct(share.energy),
                    _ => "-".to_string(),
                });
            }
            grid.push(line);
        }
        grid
    }

    /// Aligned plain-text table for terminals.
    pub fn render_text(&self, precision: Precision) -> String {
        let grid = self.cells(precision);
        let cols = grid[0].len();
        let widths: Vec<usize> =
            (0..cols).map(|j| grid.iter().map(|r| r[j].chars().count()).max().unwrap_or(0)).collect();
        let mut s = String::new();
        for row in &grid {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(j, c)| if j == 0 { format!("{c:<w$}", w = widths[j]) } else { format!("{c:>w$}", w = widths[j]) })
                .collect();
            s.push_str(line.join("  ").trim_end());
            s.push('\n');
        }
        s
    }

    pub fn write<W: Write>(&self, mut out: W, format: OutputFormat, precision: Precision) -> Result<(), OutputError> {
        match format {
            OutputFormat::Json => {
                serde_json::to_writer_pretty(&mut out, self)?;
                out.write_all(b"\n")?;
            }
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(out);
                for row in self.cells(precision) {
                    w.write_record(&row)?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }
}
