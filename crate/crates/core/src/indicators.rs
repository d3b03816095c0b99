//! The indicator ladder for a group of institutions.
//!
//! For citation counts `c_1..c_N` of one group:
//!
//! | symbol | meaning                  | definition         |
//! |--------|--------------------------|--------------------|
//! | N      | institution count        | zeroth order       |
//! | C      | total citations          | `Σ c_j`            |
//! | i      | impact                   | `C / N`            |
//! | X      | exergy                   | `i·C = C² / N`     |
//! | E      | energy                   | `Σ c_j²`           |
//! | S      | entropy                  | `E − X`            |
//! | η      | concentration ratio      | `X / E ∈ (0, 1]`   |
//!
//! `N`, `C`, `C²` and `Σ c²` are accumulated exactly in integers; the
//! scalar type only enters at the divisions. `S` is evaluated from the
//! exact integer spread `N·E − C²` so that an even distribution yields
//! `S = 0` and `η = 1` exactly.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::country::CountryCode;
use crate::ingest::InstitutionRecord;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndicatorError {
    #[error("group has no institutions")]
    EmptyGroup,
    #[error("institution count is zero")]
    ZeroInstitutions,
    #[error("energy must be positive")]
    NonPositiveEnergy,
    #[error("exergy must be positive")]
    NonPositiveExergy,
    #[error("exergy exceeds energy beyond rounding tolerance")]
    ExergyExceedsEnergy,
    #[error("energy is smaller than exergy, entropy would be negative")]
    NegativeEntropy,
    #[error("world value must be positive")]
    ZeroWorldValue,
    #[error("integer overflow accumulating citation moments")]
    Overflow,
}

/// Row label: a country or the pooled world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupLabel {
    Country(CountryCode),
    World,
}

impl GroupLabel {
    pub const WORLD: &'static str = "WORLD";

    pub fn parse(s: &str) -> Result<Self, crate::country::CountryCodeError> {
        if s.trim().eq_ignore_ascii_case(Self::WORLD) {
            Ok(GroupLabel::World)
        } else {
            CountryCode::parse(s).map(GroupLabel::Country)
        }
    }

    pub fn country(&self) -> Option<CountryCode> {
        match self {
            GroupLabel::Country(c) => Some(*c),
            GroupLabel::World => None,
        }
    }
}

impl fmt::Display for GroupLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupLabel::Country(c) => c.fmt(f),
            GroupLabel::World => f.write_str(Self::WORLD),
        }
    }
}

impl Serialize for GroupLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroupLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        GroupLabel::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Exact group totals: count, sum and sorted citation list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aggregate {
    pub n: u64,
    pub c: u64,
    /// Citations, largest first.
    pub citations: Vec<u64>,
}

impl Aggregate {
    pub fn from_citations(mut citations: Vec<u64>) -> Result<Self, IndicatorError> {
        if citations.is_empty() {
            return Err(IndicatorError::EmptyGroup);
        }
        citations.sort_unstable_by(|a, b| b.cmp(a));
        let c = citations
            .iter()
            .try_fold(0u64, |acc, &x| acc.checked_add(x))
            .ok_or(IndicatorError::Overflow)?;
        Ok(Aggregate { n: citations.len() as u64, c, citations })
    }

    /// `Σ c²`, exact.
    pub fn sum_of_squares(&self) -> Result<u128, IndicatorError> {
        sum_of_squares(&self.citations)
    }
}

/// Group a list of records (all from one grouping key) into exact totals.
pub fn aggregate(records: &[InstitutionRecord]) -> Result<Aggregate, IndicatorError> {
    Aggregate::from_citations(records.iter().map(|r| r.citations).collect())
}

fn sum_of_squares(citations: &[u64]) -> Result<u128, IndicatorError> {
    citations.iter().try_fold(0u128, |acc, &c| {
        let c = c as u128;
        acc.checked_add(c * c).ok_or(IndicatorError::Overflow)
    })
}

/// Average citations per institution, `C / N`.
pub fn impact<T: Scalar>(c: u64, n: u64) -> Result<T, IndicatorError> {
    if n == 0 {
        return Err(IndicatorError::ZeroInstitutions);
    }
    Ok(T::from_count(c as u128) / T::from_count(n as u128))
}

/// `C² / N`, with `C²` formed exactly.
pub fn exergy<T: Scalar>(c: u64, n: u64) -> Result<T, IndicatorError> {
    if n == 0 {
        return Err(IndicatorError::ZeroInstitutions);
    }
    let c = c as u128;
    Ok(T::from_count(c * c) / T::from_count(n as u128))
}

/// `Σ c²` over the citation list.
///
/// The squares are summed exactly in 128-bit integers, so the result is the
/// correctly rounded value regardless of input order.
pub fn energy<T: Scalar>(citations: &[u64]) -> Result<T, IndicatorError> {
    if citations.is_empty() {
        return Err(IndicatorError::EmptyGroup);
    }
    Ok(T::from_count(sum_of_squares(citations)?))
}

/// `X / E`, clamped to at most 1.
pub fn eta<T: Scalar>(exergy: T, energy: T) -> Result<T, IndicatorError> {
    if !(energy > T::zero()) {
        return Err(IndicatorError::NonPositiveEnergy);
    }
    if !(exergy > T::zero()) {
        return Err(IndicatorError::NonPositiveExergy);
    }
    if exergy > energy * (T::one() + T::rel_tolerance()) {
        return Err(IndicatorError::ExergyExceedsEnergy);
    }
    Ok((exergy / energy).min(T::one()))
}

/// `E − X`. Differences within rounding tolerance of zero are returned as
/// zero; a genuinely negative difference is an error.
pub fn entropy<T: Scalar>(energy: T, exergy: T) -> Result<T, IndicatorError> {
    let s = energy - exergy;
    if s >= T::zero() {
        return Ok(s);
    }
    if -s <= energy.abs().max(exergy.abs()) * T::rel_tolerance() {
        Ok(T::zero())
    } else {
        Err(IndicatorError::NegativeEntropy)
    }
}

/// `100 · value / world`.
pub fn share_of_world<T: Scalar>(value: T, world: T) -> Result<T, IndicatorError> {
    if !(world > T::zero()) {
        return Err(IndicatorError::ZeroWorldValue);
    }
    Ok(T::lit(100.0) * value / world)
}

/// Full indicator ladder for one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CountryIndicators<T> {
    pub country: GroupLabel,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "C")]
    pub c: u64,
    #[serde(rename = "i")]
    pub impact: T,
    #[serde(rename = "X")]
    pub exergy: T,
    #[serde(rename = "E")]
    pub energy: T,
    #[serde(rename = "S")]
    pub entropy: T,
    pub eta: T,
}

impl<T: Scalar> CountryIndicators<T> {
    pub fn from_aggregate(label: GroupLabel, agg: &Aggregate) -> Result<Self, IndicatorError> {
        let n = agg.n;
        let c = agg.c;
        let sum_sq = agg.sum_of_squares()?;
        if sum_sq == 0 {
            return Err(IndicatorError::NonPositiveEnergy);
        }
        let c_sq = (c as u128) * (c as u128);
        // N·E − C² = N²·σ² ≥ 0 (Cauchy–Schwarz), exact
        let n_e = (n as u128).checked_mul(sum_sq).ok_or(IndicatorError::Overflow)?;
        let spread = n_e.checked_sub(c_sq).ok_or(IndicatorError::NegativeEntropy)?;

        let impact = impact::<T>(c, n)?;
        let exergy = exergy::<T>(c, n)?;
        let energy = T::from_count(sum_sq);
        let entropy = T::from_count(spread) / T::from_count(n as u128);
        let eta = if spread == 0 {
            T::one()
        } else {
            // X/E = C² / (N·E) without the intermediate roundings
            eta(T::from_count(c_sq), T::from_count(n_e))?
        };
        Ok(CountryIndicators { country: label, n, c, impact, exergy, energy, entropy, eta })
    }

    pub fn from_records(label: GroupLabel, records: &[InstitutionRecord]) -> Result<Self, IndicatorError> {
        Self::from_aggregate(label, &aggregate(records)?)
    }

    /// Same row with a different label.
    pub fn relabeled(mut self, label: GroupLabel) -> Self {
        self.country = label;
        self
    }
}

/// One row per country present in `records`, sorted by descending `C`
/// (ties broken by country code).
pub fn country_indicators<T: Scalar>(records: &[InstitutionRecord]) -> Result<Vec<CountryIndicators<T>>, IndicatorError> {
    let mut groups: BTreeMap<CountryCode, Vec<u64>> = BTreeMap::new();
    for r in records {
        groups.entry(r.country).or_default().push(r.citations);
    }
    let mut rows = groups
        .into_iter()
        .map(|(code, cits)| {
            let agg = Aggregate::from_citations(cits)?;
            CountryIndicators::from_aggregate(GroupLabel::Country(code), &agg)
        })
        .collect::<Result<Vec<_>, _>>()?;
    rows.sort_by(|a, b| b.c.cmp(&a.c).then(a.country.cmp(&b.country)));
    Ok(rows)
}

/// Indicators over every record pooled, labelled WORLD.
pub fn world_indicators<T: Scalar>(records: &[InstitutionRecord]) -> Result<CountryIndicators<T>, IndicatorError> {
    CountryIndicators::from_records(GroupLabel::World, records)
}

/// Percentage-of-world columns for one row (`None` where not meaningful).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct WorldShare<T> {
    #[serde(rename = "N")]
    pub n: T,
    #[serde(rename = "C")]
    pub c: T,
    #[serde(rename = "X")]
    pub exergy: T,
    #[serde(rename = "E")]
    pub energy: T,
}

impl<T: Scalar> WorldShare<T> {
    pub fn of(row: &CountryIndicators<T>, world: &CountryIndicators<T>) -> Result<Self, IndicatorError> {
        let count = |v: u64| T::from_count(v as u128);
        Ok(WorldShare {
            n: share_of_world(count(row.n), count(world.n))?,
            c: share_of_world(count(row.c), count(world.c))?,
            exergy: share_of_world(row.exergy, world.exergy)?,
            energy: share_of_world(row.energy, world.energy)?,
        })
    }
}
