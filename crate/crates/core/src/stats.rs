//! Pearson correlation, correlation matrices and log-log scatter datasets.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::cohorts::CountryRow;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("vector `{0}` is constant")]
    ConstantVector(String),
    #[error("{variable} value {value} for {country} is not positive, cannot take log")]
    NonPositiveForLog { variable: String, country: String, value: String },
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
}

/// A column of a [`CountryRow`] usable in correlation and scatter work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variable {
    N,
    C,
    X,
    E,
    Gdp,
    I,
    S,
    Eta,
}

impl Variable {
    /// Default column order of the correlation table.
    pub const TABLE: [Variable; 7] =
        [Variable::N, Variable::C, Variable::X, Variable::E, Variable::Gdp, Variable::I, Variable::Eta];

    pub fn label(self) -> &'static str {
        match self {
            Variable::N => "N",
            Variable::C => "C",
            Variable::X => "X",
            Variable::E => "E",
            Variable::Gdp => "GDP",
            Variable::I => "i",
            Variable::S => "S",
            Variable::Eta => "eta",
        }
    }

    /// Filesystem-friendly lowercase name.
    pub fn slug(self) -> &'static str {
        match self {
            Variable::N => "n",
            Variable::C => "c",
            Variable::X => "x",
            Variable::E => "e",
            Variable::Gdp => "gdp",
            Variable::I => "i",
            Variable::S => "s",
            Variable::Eta => "eta",
        }
    }

    pub fn value<T: Scalar>(self, row: &CountryRow<T>) -> Option<T> {
        let ind = &row.indicators;
        let count = |v: u64| T::from_count(v as u128);
        match self {
            Variable::N => Some(count(ind.n)),
            Variable::C => Some(count(ind.c)),
            Variable::X => Some(ind.exergy),
            Variable::E => Some(ind.energy),
            Variable::Gdp => row.gdp_busd,
            Variable::I => Some(ind.impact),
            Variable::S => Some(ind.entropy),
            Variable::Eta => Some(ind.eta),
        }
    }

    /// Parse a comma-separated list such as `N,C,X,E,GDP,i,eta`.
    pub fn parse_list(s: &str) -> Result<Vec<Variable>, StatsError> {
        s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Variable {
    type Err = StatsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        // `i` and `I` are the same column; the rest are case-insensitive too
        Ok(match t.to_ascii_lowercase().as_str() {
            "n" => Variable::N,
            "c" => Variable::C,
            "x" => Variable::X,
            "e" => Variable::E,
            "gdp" | "gdp_busd" => Variable::Gdp,
            "i" => Variable::I,
            "s" => Variable::S,
            "eta" => Variable::Eta,
            _ if t == "η" => Variable::Eta,
            _ => return Err(StatsError::UnknownVariable(s.to_string())),
        })
    }
}

impl Serialize for Variable {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

fn mean<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &b| a + b) / T::from_count(v.len() as u128)
}

/// Product-moment correlation coefficient, clamped to `[-1, 1]`.
pub fn pearson<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T, StatsError> {
    pearson_named(xs, ys, "x", "y")
}

fn pearson_named<T: Scalar>(xs: &[T], ys: &[T], xname: &str, yname: &str) -> Result<T, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 3 {
        return Err(StatsError::TooFewPoints(xs.len()));
    }
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() {
        return Err(StatsError::ConstantVector(xname.to_string()));
    }
    if syy == T::zero() {
        return Err(StatsError::ConstantVector(yname.to_string()));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-T::one()).min(T::one()))
}

/// Square matrix of Pearson coefficients over labelled variables.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct CorrelationMatrix<T> {
    pub labels: Vec<Variable>,
    /// Row-major, `labels.len()` squared entries.
    pub values: Vec<Vec<T>>,
    pub rows_used: usize,
    pub rows_dropped: usize,
    pub log_space: bool,
}

impl<T: Scalar> CorrelationMatrix<T> {
    pub fn get(&self, a: Variable, b: Variable) -> Option<T> {
        let i = self.labels.iter().position(|&l| l == a)?;
        let j = self.labels.iter().position(|&l| l == b)?;
        Some(self.values[i][j])
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }
}

/// Complete-case columns: rows with every requested variable present (and,
/// in log space, positive). Returns the columns, row labels and the number of
/// rows dropped for missing values.
fn columns<T: Scalar>(
    rows: &[CountryRow<T>],
    vars: &[Variable],
    log_space: bool,
) -> Result<(Vec<Vec<T>>, Vec<String>, usize), StatsError> {
    let mut cols = vec![Vec::with_capacity(rows.len()); vars.len()];
    let mut labels = Vec::with_capacity(rows.len());
    let mut dropped = 0;
    for row in rows {
        let vals: Option<Vec<T>> = vars.iter().map(|v| v.value(row)).collect();
        let Some(vals) = vals else {
            dropped += 1;
            continue;
        };
        for (col, (&var, val)) in cols.iter_mut().zip(vars.iter().zip(vals)) {
            col.push(if log_space {
                if !(val > T::zero()) {
                    return Err(StatsError::NonPositiveForLog {
                        variable: var.label().to_string(),
                        country: row.indicators.country.to_string(),
                        value: val.to_string(),
                    });
                }
                val.log10()
            } else {
                val
            });
        }
        labels.push(row.indicators.country.to_string());
    }
    Ok((cols, labels, dropped))
}

/// Pairwise Pearson over one consistent set of complete rows (listwise
/// deletion). The diagonal is exactly 1 and the lower triangle mirrors the
/// upper one.
pub fn correlation_matrix<T: Scalar>(
    rows: &[CountryRow<T>],
    vars: &[Variable],
    log_space: bool,
) -> Result<CorrelationMatrix<T>, StatsError> {
    let (cols, labels, dropped) = columns(rows, vars, log_space)?;
    if labels.len() < 3 {
        return Err(StatsError::TooFewPoints(labels.len()));
    }
    let k = vars.len();
    let mut values = vec![vec![T::one(); k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let r = pearson_named(&cols[i], &cols[j], vars[i].label(), vars[j].label())?;
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    // a constant column only surfaces through a pair; check singletons too
    if k == 1 {
        pearson_named(&cols[0], &cols[0], vars[0].label(), vars[0].label())?;
    }
    Ok(CorrelationMatrix { labels: vars.to_vec(), values, rows_used: labels.len(), rows_dropped: dropped, log_space })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ScatterPoint<T> {
    pub country: String,
    pub x: T,
    pub y: T,
}

/// Reference line of fixed slope through the centroid, given by its two
/// endpoints at the extremes of the x-range.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ReferenceLine<T> {
    pub slope: T,
    pub start: (T, T),
    pub end: (T, T),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ScatterSeries<T> {
    pub x_label: String,
    pub y_label: String,
    /// Coordinates are base-10 logarithms when `log_space` is set.
    pub points: Vec<ScatterPoint<T>>,
    pub reference_lines: Vec<ReferenceLine<T>>,
    pub log_space: bool,
    pub rows_dropped: usize,
}

impl<T: Scalar> ScatterSeries<T> {
    pub fn reference_slopes(&self) -> Vec<T> {
        self.reference_lines.iter().map(|l| l.slope).collect()
    }
}

pub fn scatter_dataset<T: Scalar>(
    rows: &[CountryRow<T>],
    x_var: Variable,
    y_var: Variable,
    log_space: bool,
    slopes: &[T],
) -> Result<ScatterSeries<T>, StatsError> {
    let (cols, labels, dropped) = columns(rows, &[x_var, y_var], log_space)?;
    let points: Vec<ScatterPoint<T>> = labels
        .into_iter()
        .zip(cols[0].iter().zip(&cols[1]))
        .map(|(country, (&x, &y))| ScatterPoint { country, x, y })
        .collect();

    let mut reference_lines = Vec::new();
    if !points.is_empty() {
        let (cx, cy) = (mean(&cols[0]), mean(&cols[1]));
        let lo = cols[0].iter().copied().fold(T::infinity(), T::min);
        let hi = cols[0].iter().copied().fold(T::neg_infinity(), T::max);
        for &s in slopes {
            let at = |x: T| (x, cy + s * (x - cx));
            reference_lines.push(ReferenceLine { slope: s, start: at(lo), end: at(hi) });
        }
    }
    let prefix = if log_space { "log10 " } else { "" };
    Ok(ScatterSeries {
        x_label: format!("{prefix}{x_var}"),
        y_label: format!("{prefix}{y_var}"),
        points,
        reference_lines,
        log_space,
        rows_dropped: dropped,
    })
}

/// Ordinary least-squares slope of `ys` on `xs`.
pub fn ols_slope<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 3 {
        return Err(StatsError::TooFewPoints(xs.len()));
    }
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        sxy = sxy + (x - mx) * (y - my);
        sxx = sxx + (x - mx) * (x - mx);
    }
    if sxx == T::zero() {
        return Err(StatsError::ConstantVector("x".into()));
    }
    Ok(sxy / sxx)
}

/// OLS slope of `log10(y)` on `log10(x)` over complete rows.
pub fn loglog_slope<T: Scalar>(rows: &[CountryRow<T>], x_var: Variable, y_var: Variable) -> Result<T, StatsError> {
    let (cols, _, _) = columns(rows, &[x_var, y_var], true)?;
    ols_slope(&cols[0], &cols[1])
}

/// Log-log OLS slope on raw positive pairs.
pub fn loglog_slope_xy<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T, StatsError> {
    let logs = |v: &[T], name: &str| -> Result<Vec<T>, StatsError> {
        v.iter()
            .enumerate()
            .map(|(k, &x)| {
                if x > T::zero() {
                    Ok(x.log10())
                } else {
                    Err(StatsError::NonPositiveForLog {
                        variable: name.to_string(),
                        country: format!("point {k}"),
                        value: x.to_string(),
                    })
                }
            })
            .collect()
    };
    ols_slope(&logs(xs, "x")?, &logs(ys, "y")?)
}
