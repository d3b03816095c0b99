//! Country cohorts and the GDP join.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Read;

use serde::Serialize;
use thiserror::Error;

use crate::country::CountryCode;
use crate::indicators::CountryIndicators;
use crate::scalar::Scalar;

/// The three shipped cohorts: Top 12, Islamic, Iberia & Latin America.
pub const DEFAULT_COHORTS_JSON: &str = include_str!("../data/cohorts.json");
/// Nominal GDP snapshot shipped with the crate (see the file header).
pub const DEFAULT_GDP_CSV: &str = include_str!("../data/gdp_imf_2016.csv");

#[derive(Debug, Error)]
pub enum CohortError {
    #[error("bad cohort config: {0}")]
    BadConfig(String),
    #[error("cohort {0:?} has no members")]
    EmptyCohort(String),
    #[error("bad GDP table: {0}")]
    BadGdp(String),
    #[error("country {0} appears more than once in the GDP table")]
    DuplicateGdpEntry(CountryCode),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cohort {
    pub name: String,
    /// Ordered, duplicate-free.
    pub members: Vec<CountryCode>,
}

impl Cohort {
    pub fn new(name: impl Into<String>, members: Vec<CountryCode>) -> Result<Self, CohortError> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(CohortError::BadConfig("cohort name is empty".into()));
        }
        if members.is_empty() {
            return Err(CohortError::EmptyCohort(name));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = members.iter().find(|c| !seen.insert(**c)) {
            return Err(CohortError::BadConfig(format!("{dup} listed twice in cohort {name:?}")));
        }
        Ok(Cohort { name, members })
    }

    pub fn contains(&self, code: CountryCode) -> bool {
        self.members.contains(&code)
    }
}

/// Parse a JSON object `{ "cohort name": ["US", "GB", ...], ... }`.
/// Cohorts come back in file order.
pub fn load_cohorts<R: Read>(config: R) -> Result<Vec<Cohort>, CohortError> {
    let value: serde_json::Value =
        serde_json::from_reader(config).map_err(|e| CohortError::BadConfig(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| CohortError::BadConfig("top level must be an object".into()))?;
    obj.iter()
        .map(|(name, list)| {
            let list = list
                .as_array()
                .ok_or_else(|| CohortError::BadConfig(format!("cohort {name:?} must map to a list")))?;
            let members = list
                .iter()
                .map(|v| {
                    let s = v
                        .as_str()
                        .ok_or_else(|| CohortError::BadConfig(format!("non-string member in {name:?}")))?;
                    CountryCode::parse_assigned(s).map_err(|e| CohortError::BadConfig(format!("{name:?}: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Cohort::new(name.clone(), members)
        })
        .collect()
}

pub fn default_cohorts() -> Vec<Cohort> {
    load_cohorts(DEFAULT_COHORTS_JSON.as_bytes()).expect("shipped cohort config is valid")
}

/// Distinct members across all cohorts, in first-appearance order.
pub fn cohort_union(cohorts: &[Cohort]) -> Vec<CountryCode> {
    let mut seen = HashSet::new();
    cohorts.iter().flat_map(|c| c.members.iter().copied()).filter(|c| seen.insert(*c)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GdpEntry {
    pub country: CountryCode,
    pub gdp_busd: f64,
}

/// Read a `country,gdp_busd` CSV table (`#` comments allowed).
pub fn load_gdp<R: Read>(input: R) -> Result<Vec<GdpEntry>, CohortError> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| CohortError::BadGdp(format!("missing column {name}")))
    };
    let (ci, gi) = (col("country")?, col("gdp_busd")?);
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let country = CountryCode::parse(row.get(ci).unwrap_or(""))
            .map_err(|e| CohortError::BadGdp(format!("line {line}: {e}")))?;
        let raw = row.get(gi).unwrap_or("");
        let gdp_busd: f64 = raw
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite() && *v > 0.0)
            .ok_or_else(|| CohortError::BadGdp(format!("line {line}: GDP {raw:?} is not a positive number")))?;
        out.push(GdpEntry { country, gdp_busd });
    }
    Ok(out)
}

pub fn default_gdp() -> Vec<GdpEntry> {
    load_gdp(DEFAULT_GDP_CSV.as_bytes()).expect("shipped GDP table is valid")
}

/// Indicator row joined with GDP and cohort memberships.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct CountryRow<T> {
    #[serde(flatten)]
    pub indicators: CountryIndicators<T>,
    pub gdp_busd: Option<T>,
    pub cohorts: BTreeSet<String>,
}

impl<T: Scalar> CountryRow<T> {
    pub fn country(&self) -> Option<CountryCode> {
        self.indicators.country.country()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct JoinReport {
    /// Rows that found no GDP entry.
    pub missing_gdp: Vec<String>,
}

/// Left join of indicator rows onto the GDP table. Row order is kept.
pub fn join_gdp<T: Scalar>(
    rows: Vec<CountryIndicators<T>>,
    gdp: &[GdpEntry],
) -> Result<(Vec<CountryRow<T>>, JoinReport), CohortError> {
    let mut table = HashMap::with_capacity(gdp.len());
    for g in gdp {
        if table.insert(g.country, g.gdp_busd).is_some() {
            return Err(CohortError::DuplicateGdpEntry(g.country));
        }
    }
    let mut report = JoinReport::default();
    let joined = rows
        .into_iter()
        .map(|ind| {
            let gdp_busd = ind.country.country().and_then(|c| table.get(&c)).map(|v| T::lit(*v));
            if gdp_busd.is_none() {
                report.missing_gdp.push(ind.country.to_string());
            }
            CountryRow { indicators: ind, gdp_busd, cohorts: BTreeSet::new() }
        })
        .collect();
    Ok((joined, report))
}

/// Record each row's cohort memberships.
pub fn tag_cohorts<T: Scalar>(rows: &mut [CountryRow<T>], cohorts: &[Cohort]) {
    for row in rows.iter_mut() {
        if let Some(code) = row.country() {
            row.cohorts.extend(cohorts.iter().filter(|c| c.contains(code)).map(|c| c.name.clone()));
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection<T> {
    pub rows: Vec<CountryRow<T>>,
    /// Cohort members with no row in the input.
    pub missing: Vec<CountryCode>,
}

/// Rows belonging to `cohort`, in cohort member order.
pub fn select_cohort<T: Scalar>(rows: &[CountryRow<T>], cohort: &Cohort) -> Selection<T> {
    select_members(rows, &cohort.members)
}

/// Rows for the union of several cohorts, in first-appearance order.
pub fn select_union<T: Scalar>(rows: &[CountryRow<T>], cohorts: &[Cohort]) -> Selection<T> {
    select_members(rows, &cohort_union(cohorts))
}

fn select_members<T: Scalar>(rows: &[CountryRow<T>], members: &[CountryCode]) -> Selection<T> {
    let by_code: HashMap<CountryCode, &CountryRow<T>> =
        rows.iter().filter_map(|r| r.country().map(|c| (c, r))).collect();
    let mut sel = Selection { rows: Vec::new(), missing: Vec::new() };
    for code in members {
        match by_code.get(code) {
            Some(r) => sel.rows.push((*r).clone()),
            None => sel.missing.push(*code),
        }
    }
    sel
}
