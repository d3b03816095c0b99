//! Seeded synthetic ranking data.
//!
//! Each country gets a number of institutions proportional to its economic
//! size and Pareto-distributed citation counts. The tail index falls as the
//! country grows, so larger systems concentrate citations in fewer
//! institutions. Output is ordered like a real ranking file: descending
//! citations, ranks 1..n.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Pareto;

use crate::cohorts::{default_gdp, GdpEntry};
use crate::country::CountryCode;
use crate::ingest::InstitutionRecord;

#[derive(Debug, Clone)]
pub struct SampleConfig {
    pub seed: u64,
    /// Country and a size weight (nominal GDP in billions works well).
    pub countries: Vec<(CountryCode, f64)>,
    /// Institutions generated per unit of size.
    pub institutions_per_unit: f64,
    /// Pareto scale for a size-1 country, in citations.
    pub base_scale: f64,
}

impl SampleConfig {
    /// Every country of the shipped GDP table, plus two cohort members the
    /// table lacks (so GDP joins have something to report).
    pub fn with_seed(seed: u64) -> Self {
        let mut countries: Vec<(CountryCode, f64)> =
            default_gdp().into_iter().map(|GdpEntry { country, gdp_busd }| (country, gdp_busd)).collect();
        for (code, size) in [("SY", 20.0), ("CU", 87.0)] {
            countries.push((CountryCode::parse(code).expect("static code"), size));
        }
        SampleConfig { seed, countries, institutions_per_unit: 0.05, base_scale: 700.0 }
    }

    fn tail_index(institutions: usize) -> f64 {
        (2.6 - 0.35 * (institutions as f64).log10()).clamp(1.3, 2.6)
    }
}

pub fn generate(cfg: &SampleConfig) -> Vec<InstitutionRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::new();
    for &(country, size) in &cfg.countries {
        let n = ((size * cfg.institutions_per_unit).round() as usize).max(1);
        let scale = cfg.base_scale * (1.0 + 0.15 * size.max(1.0).log10());
        let dist = Pareto::new(scale, SampleConfig::tail_index(n)).expect("positive parameters");
        let label = country.display_name().unwrap_or(country.as_str());
        for k in 0..n {
            let citations = rng.sample(dist).min(5.0e7).floor() as u64;
            out.push(InstitutionRecord { rank: 0, name: format!("{label} University {:03}", k + 1), country, citations });
        }
    }
    out.sort_by(|a, b| b.citations.cmp(&a.citations).then_with(|| a.name.cmp(&b.name)));
    for (k, r) in out.iter_mut().enumerate() {
        r.rank = k as u64 + 1;
    }
    out
}
