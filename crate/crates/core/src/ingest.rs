//! Ranking-file ingestion: parsing, the citation threshold, country
//! exclusions and data-quality reporting.
//!
//! A ranking file is UTF-8 TSV or CSV with a header row naming (in any
//! case and any order) the columns `rank`, `institution`, `country` and
//! `citations`. Extra columns are ignored, lines starting with `#` are
//! comments.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::country::CountryCode;

pub const DEFAULT_THRESHOLD: u64 = 1000;
pub const DEFAULT_EXCLUDED: [&str; 2] = ["CN", "RU"];

const REQUIRED_COLUMNS: [&str; 4] = ["rank", "institution", "country", "citations"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("header is missing required column `{0}`")]
    MissingColumn(&'static str),
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("input contains no data rows")]
    EmptyInput,
    #[error("duplicate record for {name:?} ({country})")]
    DuplicateRecord { name: String, country: CountryCode },
    #[error("citation total overflow while merging {name:?} ({country})")]
    CitationOverflow { name: String, country: CountryCode },
    #[error("unknown ranking format {0:?} (expected tsv, csv or json)")]
    UnknownFormat(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One ranked institution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstitutionRecord {
    pub rank: u64,
    pub name: String,
    pub country: CountryCode,
    pub citations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankingFormat {
    Tsv,
    Csv,
    Json,
}

impl RankingFormat {
    fn delimiter(self) -> u8 {
        match self {
            RankingFormat::Tsv => b'\t',
            _ => b',',
        }
    }

    /// Guess from a file extension; anything unrecognised is treated as TSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("csv") => RankingFormat::Csv,
            Some("json") => RankingFormat::Json,
            _ => RankingFormat::Tsv,
        }
    }
}

impl FromStr for RankingFormat {
    type Err = IngestError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tsv" => Ok(RankingFormat::Tsv),
            "csv" => Ok(RankingFormat::Csv),
            "json" => Ok(RankingFormat::Json),
            _ => Err(IngestError::UnknownFormat(s.to_string())),
        }
    }
}

/// What to do with repeated (name, country) pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DedupPolicy {
    /// Report only; keep every row.
    #[default]
    KeepAll,
    KeepFirst,
    /// Merge into the first occurrence, summing citations.
    Sum,
    Fail,
}

impl FromStr for DedupPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "keep-all" | "none" => Ok(DedupPolicy::KeepAll),
            "keep-first" => Ok(DedupPolicy::KeepFirst),
            "sum" => Ok(DedupPolicy::Sum),
            "fail" => Ok(DedupPolicy::Fail),
            other => Err(format!("unknown dedup policy {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IngestConfig {
    pub threshold: u64,
    pub excluded_countries: BTreeSet<CountryCode>,
    /// Malformed rows abort parsing instead of being skipped with a warning.
    pub strict: bool,
    pub dedup: DedupPolicy,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            threshold: DEFAULT_THRESHOLD,
            excluded_countries: DEFAULT_EXCLUDED
                .iter()
                .map(|c| CountryCode::parse(c).expect("static code"))
                .collect(),
            strict: false,
            dedup: DedupPolicy::KeepAll,
        }
    }
}

impl IngestConfig {
    /// Exclusion followed by the threshold (the two commute).
    pub fn apply(&self, records: Vec<InstitutionRecord>) -> Vec<InstitutionRecord> {
        filter_threshold(exclude_countries(records, &self.excluded_countries), self.threshold)
    }
}

/// A row skipped in lenient mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowIssue {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedRanking {
    pub records: Vec<InstitutionRecord>,
    pub skipped: Vec<RowIssue>,
}

/// Strip thousands separators (comma, thin space, narrow no-break space,
/// no-break space) and parse as an unsigned integer.
pub fn parse_count(raw: &str) -> Option<u64> {
    let cleaned: String = raw
        .trim()
        .chars()
        .filter(|c| !matches!(c, ',' | '\u{2009}' | '\u{202F}' | '\u{00A0}'))
        .collect();
    if cleaned.is_empty() || !cleaned.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    cleaned.parse().ok()
}

struct Columns {
    rank: usize,
    name: usize,
    country: usize,
    citations: usize,
}

impl Columns {
    fn locate(header: &csv::StringRecord) -> Result<Self, IngestError> {
        let find = |col: &'static str| {
            header
                .iter()
                .position(|h| h.trim().trim_start_matches('\u{feff}').eq_ignore_ascii_case(col))
                .ok_or(IngestError::MissingColumn(col))
        };
        Ok(Columns {
            rank: find(REQUIRED_COLUMNS[0])?,
            name: find(REQUIRED_COLUMNS[1])?,
            country: find(REQUIRED_COLUMNS[2])?,
            citations: find(REQUIRED_COLUMNS[3])?,
        })
    }

    fn record(&self, row: &csv::StringRecord) -> Result<InstitutionRecord, String> {
        let field = |i: usize, what: &str| row.get(i).ok_or_else(|| format!("missing {what} field"));
        let rank_raw = field(self.rank, "rank")?;
        let rank = parse_count(rank_raw)
            .filter(|r| *r > 0)
            .ok_or_else(|| format!("rank {rank_raw:?} is not a positive integer"))?;
        let name = field(self.name, "institution")?.trim();
        if name.is_empty() {
            return Err("empty institution name".into());
        }
        let country_raw = field(self.country, "country")?;
        let country = CountryCode::parse(country_raw).map_err(|e| e.to_string())?;
        let cit_raw = field(self.citations, "citations")?;
        let citations =
            parse_count(cit_raw).ok_or_else(|| format!("citations {cit_raw:?} is not a nonnegative integer"))?;
        Ok(InstitutionRecord { rank, name: name.to_string(), country, citations })
    }
}

/// Parse a ranking file. In strict mode the first malformed row is an
/// error; otherwise malformed rows are collected in
/// [`ParsedRanking::skipped`].
pub fn parse_ranking<R: Read>(input: R, format: RankingFormat, strict: bool) -> Result<ParsedRanking, IngestError> {
    if format == RankingFormat::Json {
        let records: Vec<InstitutionRecord> = serde_json::from_reader(input)?;
        if records.is_empty() {
            return Err(IngestError::EmptyInput);
        }
        return Ok(ParsedRanking { records, skipped: Vec::new() });
    }

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter())
        .comment(Some(b'#'))
        .flexible(true)
        .quoting(format == RankingFormat::Csv)
        .has_headers(true)
        .from_reader(input);
    let cols = Columns::locate(reader.headers()?)?;

    let mut out = ParsedRanking::default();
    let mut rows = 0usize;
    let mut row = csv::StringRecord::new();
    while reader.read_record(&mut row)? {
        if row.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        rows += 1;
        let line = row.position().map_or(0, |p| p.line());
        match cols.record(&row) {
            Ok(rec) => out.records.push(rec),
            Err(reason) if strict => return Err(IngestError::MalformedRow { line, reason }),
            Err(reason) => out.skipped.push(RowIssue { line, reason }),
        }
    }
    if rows == 0 {
        return Err(IngestError::EmptyInput);
    }
    Ok(out)
}

/// Write records in the canonical layout read back by [`parse_ranking`].
pub fn write_ranking<W: Write>(
    records: &[InstitutionRecord],
    out: W,
    format: RankingFormat,
) -> Result<(), IngestError> {
    if format == RankingFormat::Json {
        let mut out = out;
        serde_json::to_writer_pretty(&mut out, records)?;
        out.write_all(b"\n")?;
        return Ok(());
    }
    let mut w = csv::WriterBuilder::new()
        .delimiter(format.delimiter())
        .quote_style(if format == RankingFormat::Csv {
            csv::QuoteStyle::Necessary
        } else {
            csv::QuoteStyle::Never
        })
        .from_writer(out);
    w.write_record(REQUIRED_COLUMNS)?;
    for r in records {
        w.write_record([
            r.rank.to_string().as_str(),
            r.name.as_str(),
            r.country.as_str(),
            r.citations.to_string().as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Records with citations strictly above `threshold`, in input order.
pub fn filter_threshold(records: Vec<InstitutionRecord>, threshold: u64) -> Vec<InstitutionRecord> {
    records.into_iter().filter(|r| r.citations > threshold).collect()
}

pub fn exclude_countries(records: Vec<InstitutionRecord>, codes: &BTreeSet<CountryCode>) -> Vec<InstitutionRecord> {
    if codes.is_empty() {
        return records;
    }
    records.into_iter().filter(|r| !codes.contains(&r.country)).collect()
}

/// A (name, country) pair that occurs more than once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DuplicateGroup {
    pub name: String,
    pub country: CountryCode,
    /// Source ranks of every occurrence, in input order.
    pub ranks: Vec<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub duplicates: Vec<DuplicateGroup>,
    /// Ranks of records with zero citations.
    pub zero_citation: Vec<u64>,
    pub per_country: BTreeMap<CountryCode, usize>,
}

impl ValidationReport {
    /// No duplicates and no zero-citation records.
    pub fn is_clean(&self) -> bool {
        self.duplicates.is_empty() && self.zero_citation.is_empty()
    }
}

pub fn validate(records: &[InstitutionRecord]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen: HashMap<(&str, CountryCode), usize> = HashMap::new();
    for r in records {
        *report.per_country.entry(r.country).or_default() += 1;
        if r.citations == 0 {
            report.zero_citation.push(r.rank);
        }
        match seen.get(&(r.name.as_str(), r.country)) {
            Some(&g) => report.duplicates[g].ranks.push(r.rank),
            None => {
                seen.insert((r.name.as_str(), r.country), report.duplicates.len());
                report.duplicates.push(DuplicateGroup { name: r.name.clone(), country: r.country, ranks: vec![r.rank] });
            }
        }
    }
    report.duplicates.retain(|g| g.ranks.len() > 1);
    report
}

/// Apply a [`DedupPolicy`]. Merged records keep the first occurrence's
/// position and rank.
pub fn deduplicate(records: Vec<InstitutionRecord>, policy: DedupPolicy) -> Result<Vec<InstitutionRecord>, IngestError> {
    if policy == DedupPolicy::KeepAll {
        return Ok(records);
    }
    let mut out: Vec<InstitutionRecord> = Vec::with_capacity(records.len());
    let mut index: HashMap<(String, CountryCode), usize> = HashMap::new();
    for r in records {
        let key = (r.name.clone(), r.country);
        match index.get(&key) {
            None => {
                index.insert(key, out.len());
                out.push(r);
            }
            Some(&i) => match policy {
                DedupPolicy::KeepFirst | DedupPolicy::KeepAll => {}
                DedupPolicy::Sum => {
                    let kept = &mut out[i];
                    kept.citations = kept.citations.checked_add(r.citations).ok_or_else(|| {
                        IngestError::CitationOverflow { name: r.name.clone(), country: r.country }
                    })?;
                }
                DedupPolicy::Fail => return Err(IngestError::DuplicateRecord { name: r.name, country: r.country }),
            },
        }
    }
    Ok(out)
}
