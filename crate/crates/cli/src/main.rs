//! `sciwealth`: ranking file → indicators → GDP/cohort join → correlation
//! tables and scatter datasets.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 data or validation error.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use sciwealth_core::cohorts::{self, Cohort, GdpEntry};
use sciwealth_core::indicators::{self, GroupLabel, WorldShare};
use sciwealth_core::ingest::{self, DedupPolicy, IngestConfig, RankingFormat};
use sciwealth_core::output::{self, OutputFormat, Precision, Report, ReportColumn};
use sciwealth_core::stats::{self, Variable};
use sciwealth_core::synthetic::{self, SampleConfig};
use sciwealth_core::{CountryCode, CountryIndicators, CountryRow, InstitutionRecord};

#[derive(Parser)]
#[command(name = "sciwealth", version, about = "National citation indicators from institutional ranking data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, validate, threshold and filter a ranking file into a canonical institutions file
    Ingest(IngestCmd),
    /// Per-country indicator table (N, C, i, X, E, S, eta)
    Indicators(IndicatorsCmd),
    /// World-vs-country comparison table
    Report(ReportCmd),
    /// Pearson correlation matrix over the cohort countries
    Correlate(CorrelateCmd),
    /// Plot-ready scatter datasets with reference slope lines
    Scatter(ScatterCmd),
}

#[derive(Args)]
struct RankingArgs {
    /// Ranking file (TSV, CSV or JSON; chosen by extension unless --input-format is given)
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_parser = parse_ranking_format)]
    input_format: Option<RankingFormat>,
    /// Keep institutions with strictly more citations than this
    #[arg(long, default_value_t = ingest::DEFAULT_THRESHOLD)]
    threshold: u64,
    /// Comma-separated country codes to drop; pass "" for none
    #[arg(long, default_value = "CN,RU")]
    exclude: String,
    /// Fail on malformed rows and unresolved duplicates instead of warning
    #[arg(long)]
    strict: bool,
    /// Duplicate (name, country) handling: keep-all, keep-first, sum or fail
    #[arg(long, default_value = "keep-all")]
    dedup: DedupPolicy,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, default_value = "csv", value_parser = parse_output_format)]
    format: OutputFormat,
}

#[derive(Args)]
struct IngestCmd {
    #[command(flatten)]
    ranking: RankingArgs,
    /// Generate a synthetic ranking with this seed instead of reading --input
    #[arg(long, conflicts_with = "input")]
    seed_sample: Option<u64>,
    /// Canonical institutions file
    #[arg(long)]
    output: PathBuf,
    /// Also write the unfiltered input records here (useful with --seed-sample)
    #[arg(long)]
    raw_output: Option<PathBuf>,
    /// Validation report (JSON)
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
    #[arg(long, default_value = "full", value_parser = parse_precision)]
    precision: Precision,
}

#[derive(Args)]
struct IndicatorsCmd {
    #[command(flatten)]
    ranking: RankingArgs,
    #[arg(long)]
    output: PathBuf,
    /// Append a WORLD row
    #[arg(long)]
    world: bool,
    /// Compute WORLD after country exclusions (default: before)
    #[arg(long)]
    world_after_exclusion: bool,
    #[command(flatten)]
    out: OutputArgs,
    #[arg(long, default_value = "full", value_parser = parse_precision)]
    precision: Precision,
}

#[derive(Args)]
struct ReportCmd {
    #[command(flatten)]
    ranking: RankingArgs,
    /// Comma-separated country codes to compare against WORLD
    #[arg(long, default_value = "")]
    countries: String,
    #[arg(long)]
    world_after_exclusion: bool,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
    #[arg(long, default_value = "display", value_parser = parse_precision)]
    precision: Precision,
}

#[derive(Args)]
struct JoinArgs {
    /// Indicator table from `sciwealth indicators` (CSV or JSON by extension)
    #[arg(long)]
    indicators: PathBuf,
    /// GDP table (country,gdp_busd); defaults to the bundled snapshot
    #[arg(long)]
    gdp: Option<PathBuf>,
    /// Cohort config (JSON object name -> codes); defaults to the bundled cohorts
    #[arg(long)]
    cohorts: Option<PathBuf>,
}

#[derive(Args)]
struct CorrelateCmd {
    #[command(flatten)]
    join: JoinArgs,
    #[arg(long, default_value = "N,C,X,E,GDP,i,eta")]
    variables: String,
    /// Correlate log10 values instead of raw values
    #[arg(long)]
    log: bool,
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    out: OutputArgs,
    #[arg(long, default_value = "display", value_parser = parse_precision)]
    precision: Precision,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Preset {
    Figure1,
    Figure2,
}

#[derive(Args)]
struct ScatterCmd {
    #[command(flatten)]
    join: JoinArgs,
    #[arg(long, value_enum, conflicts_with_all = ["x", "y"])]
    preset: Option<Preset>,
    #[arg(long, requires = "y")]
    x: Option<Variable>,
    #[arg(long, requires = "x")]
    y: Option<Variable>,
    /// Linear axes instead of log10
    #[arg(long)]
    no_log: bool,
    /// Comma-separated reference slopes ("" for none)
    #[arg(long)]
    slopes: Option<String>,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    out: OutputArgs,
    #[arg(long, default_value = "full", value_parser = parse_precision)]
    precision: Precision,
}

fn parse_ranking_format(s: &str) -> Result<RankingFormat, String> {
    s.parse().map_err(|e: ingest::IngestError| e.to_string())
}

fn parse_output_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: output::OutputError| e.to_string())
}

fn parse_precision(s: &str) -> Result<Precision, String> {
    s.parse().map_err(|e: output::OutputError| e.to_string())
}

/// Error tagged with the exit code it maps to.
enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
        }
    }
}

type CmdResult = Result<(), Failure>;

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Usage(e.into())
}

fn data<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Data(e.into())
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).with_context(|| format!("cannot open {}", path.display())).map_err(usage)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display())).map_err(usage)?;
    }
    File::create(path).map(BufWriter::new).with_context(|| format!("cannot create {}", path.display())).map_err(usage)
}

/// Map an output-layer error: I/O is exit 1, anything else exit 2.
fn write_err(path: &Path) -> impl Fn(output::OutputError) -> Failure + '_ {
    move |e| match e {
        output::OutputError::Io(io) => usage(anyhow!(io).context(format!("writing {}", path.display()))),
        other => data(anyhow!(other).context(format!("writing {}", path.display()))),
    }
}

fn flush(mut w: BufWriter<File>, path: &Path) -> CmdResult {
    w.flush().with_context(|| format!("writing {}", path.display())).map_err(usage)
}

fn parse_codes(list: &str) -> Result<Vec<CountryCode>, Failure> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| CountryCode::parse(s).map_err(|e| usage(anyhow!(e))))
        .collect()
}

fn format_of(path: &Path) -> OutputFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("json") => OutputFormat::Json,
        _ => OutputFormat::Csv,
    }
}

impl RankingArgs {
    fn config(&self) -> Result<IngestConfig, Failure> {
        Ok(IngestConfig {
            threshold: self.threshold,
            excluded_countries: parse_codes(&self.exclude)?.into_iter().collect(),
            strict: self.strict,
            dedup: self.dedup,
        })
    }

    /// Parsed records after dedup, before threshold and exclusions.
    fn load(&self, cfg: &IngestConfig) -> Result<Vec<InstitutionRecord>, Failure> {
        let path = self.input.as_deref().ok_or_else(|| usage(anyhow!("--input is required")))?;
        let format = self.input_format.unwrap_or_else(|| RankingFormat::from_path(path));
        let parsed = ingest::parse_ranking(open(path)?, format, cfg.strict)
            .with_context(|| format!("parsing {}", path.display()))
            .map_err(data)?;
        for issue in &parsed.skipped {
            eprintln!("warning: {}:{}: skipped row: {}", path.display(), issue.line, issue.reason);
        }
        ingest::deduplicate(parsed.records, cfg.dedup).with_context(|| path.display().to_string()).map_err(data)
    }
}

fn excluded_list(cfg: &IngestConfig) -> String {
    if cfg.excluded_countries.is_empty() {
        "none".into()
    } else {
        cfg.excluded_countries.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    }
}

fn cmd_ingest(cmd: IngestCmd) -> CmdResult {
    let cfg = cmd.ranking.config()?;
    let records = match cmd.seed_sample {
        Some(seed) => synthetic::generate(&SampleConfig::with_seed(seed)),
        None => cmd.ranking.load(&cfg)?,
    };
    let report = ingest::validate(&records);
    for d in &report.duplicates {
        eprintln!("warning: duplicate {:?} ({}) at ranks {:?}", d.name, d.country, d.ranks);
    }
    if !report.zero_citation.is_empty() {
        eprintln!("warning: {} records with zero citations", report.zero_citation.len());
    }
    if let Some(path) = &cmd.report {
        let mut w = create(path)?;
        serde_json::to_writer_pretty(&mut w, &report).map_err(usage)?;
        w.write_all(b"\n").map_err(usage)?;
        flush(w, path)?;
    }
    if cfg.strict && !report.duplicates.is_empty() {
        return Err(data(anyhow!("{} duplicate (name, country) groups in strict mode", report.duplicates.len())));
    }
    if let Some(path) = &cmd.raw_output {
        write_records(&records, path, cmd.out.format)?;
    }
    let total = records.len();
    let kept = cfg.apply(records);
    write_records(&kept, &cmd.output, cmd.out.format)?;
    let countries: BTreeSet<_> = kept.iter().map(|r| r.country).collect();
    println!(
        "ingest: {total} records read, {} kept (citations > {}, excluded: {}), {} countries -> {}",
        kept.len(),
        cfg.threshold,
        excluded_list(&cfg),
        countries.len(),
        cmd.output.display()
    );
    let _ = cmd.precision; // record files hold integers only
    Ok(())
}

fn write_records(records: &[InstitutionRecord], path: &Path, format: OutputFormat) -> CmdResult {
    let fmt = match format {
        OutputFormat::Json => RankingFormat::Json,
        OutputFormat::Csv if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("tsv")) => RankingFormat::Tsv,
        OutputFormat::Csv => RankingFormat::Csv,
    };
    let mut w = create(path)?;
    ingest::write_ranking(records, &mut w, fmt).map_err(|e| match e {
        ingest::IngestError::Io(io) => usage(io),
        other => data(other),
    })?;
    flush(w, path)
}

/// World row and per-country rows from one ranking input.
fn indicator_rows(
    ranking: &RankingArgs,
    world_after_exclusion: bool,
) -> Result<(CountryIndicators, Vec<CountryIndicators>), Failure> {
    let cfg = ranking.config()?;
    let records = ranking.load(&cfg)?;
    let above = ingest::filter_threshold(records, cfg.threshold);
    let kept = ingest::exclude_countries(above.clone(), &cfg.excluded_countries);
    if kept.is_empty() {
        return Err(data(anyhow!("no institutions left after threshold and exclusions")));
    }
    let world_base = if world_after_exclusion { &kept } else { &above };
    let world = indicators::world_indicators(world_base).map_err(data)?;
    let rows = indicators::country_indicators(&kept).map_err(data)?;
    Ok((world, rows))
}

fn cmd_indicators(cmd: IndicatorsCmd) -> CmdResult {
    let (world, mut rows) = indicator_rows(&cmd.ranking, cmd.world_after_exclusion)?;
    let countries = rows.len();
    if cmd.world {
        rows.push(world);
    }
    let mut w = create(&cmd.output)?;
    output::write_indicators(&rows, &mut w, cmd.out.format, cmd.precision).map_err(write_err(&cmd.output))?;
    flush(w, &cmd.output)?;
    println!("indicators: {countries} countries -> {}", cmd.output.display());
    Ok(())
}

fn cmd_report(cmd: ReportCmd) -> CmdResult {
    let (world, rows) = indicator_rows(&cmd.ranking, cmd.world_after_exclusion)?;
    let mut columns = Vec::new();
    for code in parse_codes(&cmd.countries)? {
        let row = rows
            .iter()
            .find(|r| r.country == GroupLabel::Country(code))
            .ok_or_else(|| data(anyhow!("unknown country {code}: not present in the filtered data")))?;
        let share = WorldShare::of(row, &world).map_err(data)?;
        columns.push(ReportColumn { indicators: row.clone(), share_of_world: share });
    }
    let report = Report { world, countries: columns };
    print!("{}", report.render_text(cmd.precision));
    if let Some(path) = &cmd.output {
        let mut w = create(path)?;
        report.write(&mut w, cmd.out.format, cmd.precision).map_err(write_err(path))?;
        flush(w, path)?;
    }
    Ok(())
}

/// Indicator rows joined with GDP and tagged with cohorts.
fn joined_rows(args: &JoinArgs) -> Result<(Vec<CountryRow>, Vec<Cohort>), Failure> {
    let rows: Vec<CountryIndicators> = output::read_indicators(open(&args.indicators)?, format_of(&args.indicators))
        .with_context(|| format!("reading {}", args.indicators.display()))
        .map_err(data)?;
    let gdp: Vec<GdpEntry> = match &args.gdp {
        Some(p) => cohorts::load_gdp(open(p)?).with_context(|| format!("reading {}", p.display())).map_err(data)?,
        None => cohorts::default_gdp(),
    };
    let cohort_list = match &args.cohorts {
        Some(p) => cohorts::load_cohorts(open(p)?).with_context(|| format!("reading {}", p.display())).map_err(data)?,
        None => cohorts::default_cohorts(),
    };
    let rows: Vec<_> = rows.into_iter().filter(|r| r.country != GroupLabel::World).collect();
    let (mut joined, report) = cohorts::join_gdp(rows, &gdp).map_err(data)?;
    cohorts::tag_cohorts(&mut joined, &cohort_list);
    let union: BTreeSet<_> = cohorts::cohort_union(&cohort_list).into_iter().collect();
    let missing: Vec<_> = report
        .missing_gdp
        .iter()
        .filter(|c| CountryCode::parse(c).map(|c| union.contains(&c)).unwrap_or(false))
        .cloned()
        .collect();
    if !missing.is_empty() {
        eprintln!("warning: no GDP for cohort countries {}; they are left out", missing.join(","));
    }
    Ok((joined, cohort_list))
}

fn cmd_correlate(cmd: CorrelateCmd) -> CmdResult {
    let vars = Variable::parse_list(&cmd.variables).map_err(usage)?;
    if vars.is_empty() {
        return Err(usage(anyhow!("--variables is empty")));
    }
    let (rows, cohort_list) = joined_rows(&cmd.join)?;
    let sel = cohorts::select_union(&rows, &cohort_list);
    if !sel.missing.is_empty() {
        let list: Vec<_> = sel.missing.iter().map(|c| c.to_string()).collect();
        eprintln!("warning: cohort countries without indicator rows: {}", list.join(","));
    }
    let matrix = stats::correlation_matrix(&sel.rows, &vars, cmd.log).map_err(data)?;
    eprintln!(
        "correlate: {} cohort rows, {} used, {} dropped for missing values",
        sel.rows.len(),
        matrix.rows_used,
        matrix.rows_dropped
    );
    let mut w = create(&cmd.output)?;
    output::write_correlation(&matrix, &mut w, cmd.out.format, cmd.precision).map_err(write_err(&cmd.output))?;
    flush(w, &cmd.output)?;
    println!("correlate: {0}x{0} matrix over {1} countries -> {2}", matrix.dim(), matrix.rows_used, cmd.output.display());
    Ok(())
}

fn slug(s: &str) -> String {
    let mut out = String::new();
    for ch in s.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

fn parse_slopes(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().with_context(|| format!("bad slope {p:?}")).map_err(usage))
        .collect()
}

fn cmd_scatter(cmd: ScatterCmd) -> CmdResult {
    let (rows, cohort_list) = joined_rows(&cmd.join)?;
    let log = !cmd.no_log;
    let union = cohorts::select_union(&rows, &cohort_list).rows;
    let figure1_slopes = vec![1.0, 1.5, 2.0];

    // (file stem, rows, x, y, slopes)
    let mut jobs: Vec<(String, Vec<CountryRow>, Variable, Variable, Vec<f64>)> = Vec::new();
    let explicit = cmd.slopes.as_deref().map(parse_slopes).transpose()?;
    match (cmd.preset, cmd.x, cmd.y) {
        (Some(Preset::Figure1), _, _) => {
            let slopes = explicit.unwrap_or(figure1_slopes);
            for y in [Variable::N, Variable::C, Variable::X, Variable::E] {
                jobs.push((format!("figure1_{}_vs_gdp", y.slug()), union.clone(), Variable::Gdp, y, slopes.clone()));
            }
        }
        (Some(Preset::Figure2), _, _) => {
            let slopes = explicit.unwrap_or_default();
            for cohort in &cohort_list {
                let sel = cohorts::select_cohort(&rows, cohort).rows;
                for x in [Variable::X, Variable::E] {
                    let stem = format!("figure2_{}_eta_vs_{}", slug(&cohort.name), x.slug());
                    jobs.push((stem, sel.clone(), x, Variable::Eta, slopes.clone()));
                }
            }
        }
        (None, Some(x), Some(y)) => {
            let slopes = explicit.unwrap_or(figure1_slopes);
            jobs.push((format!("{}_vs_{}", y.slug(), x.slug()), union.clone(), x, y, slopes));
        }
        _ => return Err(usage(anyhow!("give --preset or both --x and --y"))),
    }

    std::fs::create_dir_all(&cmd.out_dir)
        .with_context(|| format!("cannot create {}", cmd.out_dir.display()))
        .map_err(usage)?;
    for (stem, rows, x, y, slopes) in jobs {
        let series = stats::scatter_dataset(&rows, x, y, log, &slopes)
            .with_context(|| format!("{stem}"))
            .map_err(data)?;
        if series.rows_dropped > 0 {
            eprintln!("warning: {stem}: {} rows dropped for missing values", series.rows_dropped);
        }
        let path = cmd.out_dir.join(format!("{stem}.{}", cmd.out.format.extension()));
        let mut w = create(&path)?;
        output::write_scatter(&series, &mut w, cmd.out.format, cmd.precision).map_err(write_err(&path))?;
        flush(w, &path)?;
        let fit = if log && series.points.len() >= 3 {
            stats::loglog_slope(&rows, x, y).map(|s| format!(", log-log OLS slope {s:.3}")).unwrap_or_default()
        } else {
            String::new()
        };
        println!(
            "scatter: {} points, {} reference lines{fit} -> {}",
            series.points.len(),
            series.reference_lines.len(),
            path.display()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Ingest(c) => cmd_ingest(c),
        Command::Indicators(c) => cmd_indicators(c),
        Command::Report(c) => cmd_report(c),
        Command::Correlate(c) => cmd_correlate(c),
        Command::Scatter(c) => cmd_scatter(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = f.code();
            let (Failure::Usage(e) | Failure::Data(e)) = f;
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
