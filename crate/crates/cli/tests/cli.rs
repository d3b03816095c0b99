use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_sciwealth");

fn sample() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/sample_ranking.tsv")
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).args(args).current_dir(dir).output().expect("spawn sciwealth")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn ingest_defaults_on_shipped_sample() {
    let dir = tempfile::tempdir().unwrap();
    let sample = sample();
    ok(dir.path(), &["ingest", "--input", sample.to_str().unwrap(), "--output", "inst.csv"]);
    let text = fs::read_to_string(dir.path().join("inst.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("rank,institution,country,citations"));
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert!(f[3].parse::<u64>().unwrap() > 1000, "{line}");
        assert!(f[2] != "CN" && f[2] != "RU", "{line}");
    }
}

#[test]
fn empty_exclusion_list_keeps_everyone() {
    let dir = tempfile::tempdir().unwrap();
    let sample = sample();
    ok(dir.path(), &["ingest", "--input", sample.to_str().unwrap(), "--output", "inst.csv", "--exclude", ""]);
    let text = fs::read_to_string(dir.path().join("inst.csv")).unwrap();
    assert!(text.lines().any(|l| l.contains(",CN,")));
    assert!(text.lines().any(|l| l.contains(",RU,")));
}

#[test]
fn missing_input_is_exit_1_and_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["ingest", "--input", "no/such/ranking.tsv", "--output", "x.csv"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no/such/ranking.tsv"));
}

#[test]
fn bad_flag_is_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["report", "--no-such-flag"])), 1);
    assert_eq!(code(&run(dir.path(), &["--help"])), 0);
}

#[test]
fn strict_mode_fails_on_bad_rows_and_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.tsv"), "rank\tinstitution\tcountry\tcitations\n1\tA\tUS\tmany\n2\tB\tUS\t2000\n").unwrap();
    let out = run(dir.path(), &["ingest", "--input", "bad.tsv", "--output", "o.csv", "--strict"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    // lenient: warn and continue
    ok(dir.path(), &["ingest", "--input", "bad.tsv", "--output", "o.csv"]);

    fs::write(dir.path().join("dup.tsv"), "rank\tinstitution\tcountry\tcitations\n1\tA\tUS\t5000\n2\tA\tUS\t3000\n").unwrap();
    assert_eq!(code(&run(dir.path(), &["ingest", "--input", "dup.tsv", "--output", "o.csv", "--strict"])), 2);
    ok(dir.path(), &["ingest", "--input", "dup.tsv", "--output", "o.csv", "--strict", "--dedup", "sum"]);
    assert!(fs::read_to_string(dir.path().join("o.csv")).unwrap().contains("1,A,US,8000"));
    assert_eq!(code(&run(dir.path(), &["ingest", "--input", "dup.tsv", "--output", "o.csv", "--dedup", "fail"])), 2);
}

#[test]
fn validation_report_written() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("r.csv"), "rank,institution,country,citations\n1,A,US,5000\n2,A,US,3000\n3,Z,GB,0\n").unwrap();
    ok(dir.path(), &["ingest", "--input", "r.csv", "--output", "o.json", "--format", "json", "--report", "v.json"]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("v.json")).unwrap()).unwrap();
    assert_eq!(v["duplicates"].as_array().unwrap().len(), 1);
    assert_eq!(v["zero_citation"], serde_json::json!([3]));
    let o: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("o.json")).unwrap()).unwrap();
    assert_eq!(o.as_array().unwrap().len(), 2);
}

#[test]
fn report_world_only_and_unknown_country() {
    let dir = tempfile::tempdir().unwrap();
    let sample = sample();
    let s = sample.to_str().unwrap();
    let text = ok(dir.path(), &["report", "--input", s]);
    let header = text.lines().next().unwrap();
    assert_eq!(header.split_whitespace().collect::<Vec<_>>(), ["indicator", "WORLD"]);
    assert_eq!(text.lines().count(), 7);

    let out = run(dir.path(), &["report", "--input", s, "--countries", "XX"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("XX"));
    // excluded countries are absent from the filtered data
    assert_eq!(code(&run(dir.path(), &["report", "--input", s, "--countries", "CN"])), 2);
}

#[test]
fn report_table_layout() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("r.tsv"),
        "rank\tinstitution\tcountry\tcitations\n1\tA\tUS\t3000\n2\tB\tUS\t1001\n3\tC\tGB\t2000\n4\tD\tGB\t900\n",
    )
    .unwrap();
    ok(dir.path(), &["report", "--input", "r.tsv", "--countries", "US", "--output", "t.csv"]);
    let t = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let lines: Vec<&str> = t.lines().collect();
    assert_eq!(lines[0], "indicator,WORLD,US,US % of WORLD");
    assert_eq!(lines[1], "N,3,2,66.7");
    assert_eq!(lines[2], "C,6001,4001,66.7");
    assert_eq!(lines[3], "i,2000.33,2000.50,-");
    // WORLD: 6001²/3 over 3000² + 1001² + 2000²; US: 4001²/2 over 3000² + 1001²
    assert_eq!(lines[6], "eta,0.857,0.800,-");
}

fn pipeline(dir: &Path) {
    let sample = sample();
    ok(dir, &["ingest", "--input", sample.to_str().unwrap(), "--output", "inst.csv"]);
    ok(dir, &["indicators", "--input", "inst.csv", "--output", "ind.csv"]);
}

#[test]
fn correlate_table_shape() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path());
    let out = run(dir.path(), &["correlate", "--indicators", "ind.csv", "--output", "corr.csv"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("dropped"));
    let text = fs::read_to_string(dir.path().join("corr.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["variable", "N", "C", "X", "E", "GDP", "i", "eta"]);
    assert_eq!(rows.len(), 8);
    for (k, r) in rows.iter().enumerate().skip(1) {
        assert_eq!(r[k], "1.00");
    }

    ok(dir.path(), &["correlate", "--indicators", "ind.csv", "--output", "corr.json", "--format", "json", "--precision", "full", "--log"]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("corr.json")).unwrap()).unwrap();
    assert_eq!(v["log_space"], serde_json::json!(true));
    assert_eq!(v["values"].as_array().unwrap().len(), 7);
}

fn write_synthetic_indicators(dir: &Path, rows: &[(&str, u64, f64)]) {
    let mut ind = String::from("country,N,C,i,X,E,S,eta\n");
    let mut gdp = String::from("country,gdp_busd\n");
    for (k, (code, c, g)) in rows.iter().enumerate() {
        let n = k as u64 + 1;
        let i = *c as f64 / n as f64;
        let x = i * *c as f64;
        let eta = 1.0 / (k as f64 + 1.5);
        ind.push_str(&format!("{code},{n},{c},{i},{x},{},{},{eta}\n", x / eta, x / eta - x));
        gdp.push_str(&format!("{code},{g}\n"));
    }
    fs::write(dir.join("ind.csv"), ind).unwrap();
    fs::write(dir.join("gdp.csv"), gdp).unwrap();
    fs::write(dir.join("cohorts.json"), format!(
        "{{\"all\": [{}]}}",
        rows.iter().map(|r| format!("\"{}\"", r.0)).collect::<Vec<_>>().join(",")
    ))
    .unwrap();
}

#[test]
fn correlate_exact_linear_relation() {
    let dir = tempfile::tempdir().unwrap();
    // C = 2·GDP exactly
    write_synthetic_indicators(dir.path(), &[("US", 2000, 1000.0), ("GB", 600, 300.0), ("FR", 900, 450.0), ("DE", 1400, 700.0)]);
    ok(dir.path(), &[
        "correlate", "--indicators", "ind.csv", "--gdp", "gdp.csv", "--cohorts", "cohorts.json",
        "--variables", "C,GDP", "--output", "c.csv",
    ]);
    let text = fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "C,1.00,1.00");
}

#[test]
fn correlate_too_few_rows_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    write_synthetic_indicators(dir.path(), &[("US", 2000, 1000.0), ("GB", 600, 300.0)]);
    let out = run(dir.path(), &[
        "correlate", "--indicators", "ind.csv", "--gdp", "gdp.csv", "--cohorts", "cohorts.json", "--output", "c.csv",
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least 3"));
}

#[test]
fn bad_cohort_config_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    write_synthetic_indicators(dir.path(), &[("US", 2000, 1000.0), ("GB", 600, 300.0), ("FR", 900, 450.0)]);
    fs::write(dir.path().join("bad.json"), r#"{"x": ["US", "ZZ"]}"#).unwrap();
    let out = run(dir.path(), &["correlate", "--indicators", "ind.csv", "--cohorts", "bad.json", "--output", "c.csv"]);
    assert_eq!(code(&out), 2);
}

fn data_lines(text: &str) -> usize {
    text.lines().filter(|l| !l.starts_with('#') && !l.starts_with('[') && !l.starts_with("country") && !l.starts_with("x,")).count()
}

#[test]
fn scatter_presets() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path());
    ok(dir.path(), &["scatter", "--indicators", "ind.csv", "--preset", "figure1", "--out-dir", "f1"]);
    let mut f1: Vec<_> = fs::read_dir(dir.path().join("f1")).unwrap().map(|e| e.unwrap().path()).collect();
    f1.sort();
    assert_eq!(f1.len(), 4);
    for p in &f1 {
        let text = fs::read_to_string(p).unwrap();
        assert_eq!(text.matches("[reference slope=").count(), 3, "{}", p.display());
        assert!(text.contains("[reference slope=1.5]"));
    }

    ok(dir.path(), &["scatter", "--indicators", "ind.csv", "--preset", "figure2", "--out-dir", "f2"]);
    let names: Vec<String> =
        fs::read_dir(dir.path().join("f2")).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert_eq!(names.len(), 6);
    for cohort in ["top-12", "islamic", "iberia-latin-america"] {
        for x in ["x", "e"] {
            assert!(names.contains(&format!("figure2_{cohort}_eta_vs_{x}.csv")), "{names:?}");
        }
    }
}

#[test]
fn scatter_single_linear_pair() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path());
    ok(dir.path(), &["scatter", "--indicators", "ind.csv", "--x", "gdp", "--y", "eta", "--no-log", "--out-dir", "s", "--slopes", ""]);
    let files: Vec<_> = fs::read_dir(dir.path().join("s")).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 1);
    let text = fs::read_to_string(&files[0]).unwrap();
    assert!(text.starts_with("# x=GDP y=eta log10=false"));
    assert!(!text.contains("[reference"));
    assert!(data_lines(&text) > 10);

    assert_eq!(code(&run(dir.path(), &["scatter", "--indicators", "ind.csv", "--out-dir", "s"])), 1);
    assert_eq!(code(&run(dir.path(), &["scatter", "--indicators", "ind.csv", "--x", "bogus", "--y", "c", "--out-dir", "s"])), 1);
}

#[test]
fn indicator_file_formats() {
    let dir = tempfile::tempdir().unwrap();
    let sample = sample();
    let s = sample.to_str().unwrap();
    ok(dir.path(), &["indicators", "--input", s, "--output", "full.csv", "--world"]);
    ok(dir.path(), &["indicators", "--input", s, "--output", "shown.csv", "--precision", "display"]);
    ok(dir.path(), &["indicators", "--input", s, "--output", "ind.json", "--format", "json"]);
    let full = fs::read_to_string(dir.path().join("full.csv")).unwrap();
    assert!(full.lines().last().unwrap().starts_with("WORLD,"));
    let shown = fs::read_to_string(dir.path().join("shown.csv")).unwrap();
    let first: Vec<&str> = shown.lines().nth(1).unwrap().split(',').collect();
    assert!(first[4].contains("E+"), "{first:?}");
    assert_eq!(first[7].split('.').nth(1).unwrap().len(), 3);
    // the JSON table feeds the join just like the CSV one
    ok(dir.path(), &["correlate", "--indicators", "ind.json", "--output", "c.csv"]);
}
