use std::collections::BTreeSet;

use proptest::prelude::*;

use sciwealth_core::ingest::{
    exclude_countries, filter_threshold, parse_ranking, write_ranking, InstitutionRecord, RankingFormat,
};
use sciwealth_core::CountryCode;

const CODES: [&str; 6] = ["US", "GB", "CN", "RU", "FR", "BR"];

fn record() -> impl Strategy<Value = InstitutionRecord> {
    (1u64..100_000, "[A-Za-z][A-Za-z ,.'\"&()-]{0,30}[A-Za-z]", 0usize..CODES.len(), 0u64..10_000_000).prop_map(
        |(rank, name, c, citations)| InstitutionRecord {
            rank,
            name,
            country: CountryCode::parse(CODES[c]).unwrap(),
            citations,
        },
    )
}

fn records() -> impl Strategy<Value = Vec<InstitutionRecord>> {
    prop::collection::vec(record(), 0..60)
}

fn code_set() -> impl Strategy<Value = BTreeSet<CountryCode>> {
    prop::collection::btree_set(0usize..CODES.len(), 0..4)
        .prop_map(|s| s.into_iter().map(|i| CountryCode::parse(CODES[i]).unwrap()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn threshold_idempotent(recs in records(), t in 0u64..5_000_000) {
        let once = filter_threshold(recs, t);
        prop_assert_eq!(filter_threshold(once.clone(), t), once);
    }

    #[test]
    fn thresholds_compose(recs in records(), a in 0u64..5_000_000, b in 0u64..5_000_000) {
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert_eq!(filter_threshold(filter_threshold(recs.clone(), lo), hi), filter_threshold(recs, hi));
    }

    #[test]
    fn exclusion_commutes_with_threshold(recs in records(), t in 0u64..5_000_000, codes in code_set()) {
        let a = filter_threshold(exclude_countries(recs.clone(), &codes), t);
        let b = exclude_countries(filter_threshold(recs, t), &codes);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn threshold_keeps_exactly_the_larger(recs in records(), t in 0u64..5_000_000) {
        let kept = filter_threshold(recs.clone(), t);
        prop_assert!(kept.iter().all(|r| r.citations > t));
        prop_assert_eq!(kept.len(), recs.iter().filter(|r| r.citations > t).count());
    }

    #[test]
    fn write_then_parse_round_trips(recs in prop::collection::vec(record(), 1..60), fmt in 0usize..3) {
        let format = [RankingFormat::Csv, RankingFormat::Tsv, RankingFormat::Json][fmt];
        let mut buf = Vec::new();
        write_ranking(&recs, &mut buf, format).unwrap();
        let back = parse_ranking(buf.as_slice(), format, true).unwrap();
        prop_assert!(back.skipped.is_empty());
        prop_assert_eq!(back.records, recs);
    }
}

#[test]
fn lenient_parse_reports_line_numbers() {
    let input = "# ranking export\nrank,institution,country,citations\n1,A,US,10\n2,B,USA,10\n3,C,GB,\n";
    let parsed = parse_ranking(input.as_bytes(), RankingFormat::Csv, false).unwrap();
    assert_eq!(parsed.records.len(), 1);
    let lines: Vec<u64> = parsed.skipped.iter().map(|s| s.line).collect();
    assert_eq!(lines, vec![4, 5]);
}
