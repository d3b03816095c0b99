//! National citation indicators from institutional ranking data.
//!
//! The pipeline is ingest → indicators → cohorts (GDP join) → stats. All
//! numeric code is generic over [`Scalar`]; the aliases below fix it to
//! `f64`, which is what the command-line tool uses.

pub mod cohorts;
pub mod country;
pub mod indicators;
pub mod ingest;
pub mod output;
pub mod scalar;
pub mod stats;
pub mod synthetic;

pub use country::CountryCode;
pub use ingest::{InstitutionRecord, IngestConfig};
pub use scalar::Scalar;
pub use stats::Variable;

pub type CountryIndicators = indicators::CountryIndicators<f64>;
pub type CountryRow = cohorts::CountryRow<f64>;
pub type CorrelationMatrix = stats::CorrelationMatrix<f64>;
pub type ScatterSeries = stats::ScatterSeries<f64>;
pub type WorldShare = indicators::WorldShare<f64>;

pub type CountryIndicatorsF32 = indicators::CountryIndicators<f32>;
pub type CorrelationMatrixF32 = stats::CorrelationMatrix<f32>;
