//! End-to-end run: ingest shards, scatter them to per-device spill buckets,
//! gather each bucket into device-days, evaluate, geocode, aggregate, write.
//!
//! Both parallel stages hand work over through spill files on disk. Inputs
//! are processed in sorted path order and buckets are gathered in index
//! order, so outputs do not depend on the worker or bucket count.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::{
    apply_index, compute_baseline, default_baseline_end, default_baseline_start, reduce_region_day,
};
use crate::collate::{bucket_file_name, build_device_days, read_bucket, BucketWriter};
use crate::error::{Error, Result};
use crate::geocode::{load_gazetteer, AdminLevel, Gazetteer, RegionKey};
use crate::ingest::{IngestStats, ShardReader, DEFAULT_ACCURACY_MAX_M};
use crate::metrics::{
    evaluate, EligibilityRules, MobilityMetrics, Verdict, DEFAULT_MIN_REPORTS, DEFAULT_MIN_SPAN_HOURS,
    DEFAULT_TRIM_FRACTION,
};
use crate::output::{read_csv, read_ndjson, round_to, sort_records, write_csv, write_ndjson, OutputRecord};

pub const DEFAULT_N_BUCKETS: usize = 64;
pub const MAX_N_BUCKETS: usize = 65_536;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Ndjson,
    Csv,
    #[default]
    Both,
}

impl Format {
    fn ndjson(self) -> bool {
        matches!(self, Format::Ndjson | Format::Both)
    }

    fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ndjson" => Ok(Format::Ndjson),
            "csv" => Ok(Format::Csv),
            "both" => Ok(Format::Both),
            _ => Err(format!("unknown format {s:?} (expected ndjson, csv or both)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Input datasets, each `name=glob` or a bare glob.
    pub inputs: Vec<String>,
    pub gazetteer: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub format: Format,
    pub accuracy_max_m: f64,
    pub min_reports: usize,
    pub min_span_hours: f64,
    pub trim_fraction: f64,
    pub baseline_start: NaiveDate,
    pub baseline_end: NaiveDate,
    /// Inclusive local-date filter on device-days.
    pub date_from: Option<NaiveDate>,
    pub date_to: Option<NaiveDate>,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub n_buckets: usize,
    /// Spill directory; defaults to `<output_dir>/.scratch`.
    pub scratch_dir: Option<PathBuf>,
    /// Adds mean and quartile columns to the outputs.
    pub verbose: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            inputs: Vec::new(),
            gazetteer: None,
            output_dir: None,
            format: Format::Both,
            accuracy_max_m: DEFAULT_ACCURACY_MAX_M,
            min_reports: DEFAULT_MIN_REPORTS,
            min_span_hours: DEFAULT_MIN_SPAN_HOURS,
            trim_fraction: DEFAULT_TRIM_FRACTION,
            baseline_start: default_baseline_start(),
            baseline_end: default_baseline_end(),
            date_from: None,
            date_to: None,
            workers: 0,
            n_buckets: DEFAULT_N_BUCKETS,
            scratch_dir: None,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSpec {
    pub name: String,
    pub pattern: String,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

/// Splits `name=glob`; anything without a valid name prefix is a bare glob.
pub fn parse_dataset(input: &str) -> (Option<&str>, &str) {
    match input.split_once('=') {
        Some((name, pattern)) if valid_name(name) => (Some(name), pattern),
        _ => (None, input),
    }
}

impl PipelineConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    pub fn rules(&self) -> EligibilityRules {
        EligibilityRules {
            min_reports: self.min_reports,
            min_span_hours: self.min_span_hours,
        }
    }

    /// Dataset names default to `input` for a single bare glob and
    /// `input1`, `input2`, ... otherwise.
    pub fn datasets(&self) -> Result<Vec<DatasetSpec>> {
        let many = self.inputs.len() > 1;
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (i, input) in self.inputs.iter().enumerate() {
            let (name, pattern) = parse_dataset(input);
            let name = match name {
                Some(n) => n.to_string(),
                None if many => format!("input{}", i + 1),
                None => "input".to_string(),
            };
            if pattern.is_empty() {
                return Err(Error::config(format!("input {input:?} has an empty pattern")));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::config(format!("duplicate dataset name {name:?}")));
            }
            out.push(DatasetSpec {
                name,
                pattern: pattern.to_string(),
            });
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::config(m));
        if self.inputs.is_empty() {
            return bad("no inputs given".into());
        }
        self.datasets()?;
        if self.gazetteer.is_none() {
            return bad("gazetteer path not set".into());
        }
        if self.output_dir.is_none() {
            return bad("output_dir not set".into());
        }
        if !(self.accuracy_max_m.is_finite() && self.accuracy_max_m >= 0.0) {
            return bad(format!("accuracy_max_m must be a non-negative number, got {}", self.accuracy_max_m));
        }
        if self.min_reports == 0 {
            return bad("min_reports must be at least 1".into());
        }
        if !(0.0..=24.0).contains(&self.min_span_hours) {
            return bad(format!("min_span_hours must lie in [0, 24], got {}", self.min_span_hours));
        }
        if !(0.0..1.0).contains(&self.trim_fraction) {
            return bad(format!("trim_fraction must lie in [0, 1), got {}", self.trim_fraction));
        }
        if self.baseline_start > self.baseline_end {
            return bad(format!(
                "baseline_start {} is after baseline_end {}",
                self.baseline_start, self.baseline_end
            ));
        }
        if let (Some(a), Some(b)) = (self.date_from, self.date_to) {
            if a > b {
                return bad(format!("date_from {a} is after date_to {b}"));
            }
        }
        if self.n_buckets == 0 || self.n_buckets > MAX_N_BUCKETS {
            return bad(format!("n_buckets must lie in 1..={MAX_N_BUCKETS}, got {}", self.n_buckets));
        }
        Ok(())
    }

    fn in_range(&self, date: NaiveDate) -> bool {
        self.date_from.is_none_or(|d| date >= d) && self.date_to.is_none_or(|d| date <= d)
    }
}

/// Sorted, de-duplicated files matching `pattern`. No match is a config error.
pub fn expand_glob(pattern: &str) -> Result<Vec<PathBuf>> {
    let paths = glob::glob(pattern).map_err(|e| Error::config(format!("bad glob {pattern:?}: {e}")))?;
    let mut files = BTreeSet::new();
    for entry in paths {
        match entry {
            Ok(p) if p.is_file() => {
                files.insert(p);
            }
            Ok(_) => {}
            Err(e) => {
                let path = e.path().to_owned();
                return Err(Error::io(path, e.into()));
            }
        }
    }
    if files.is_empty() {
        return Err(Error::config(format!("input pattern {pattern:?} matches no files")));
    }
    Ok(files.into_iter().collect())
}

/// Counters for one dataset, written as one line of `run_report.ndjson`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub dataset: String,
    pub shards: u64,
    #[serde(flatten)]
    pub ingest: IngestStats,
    pub spilled_reports: u64,
    pub device_days: u64,
    pub device_day_reports: u64,
    pub outside_date_range: u64,
    pub eligible: u64,
    pub rejected_too_few_reports: u64,
    pub rejected_short_span: u64,
    /// Eligible device-days whose canonical point matched no admin1 or
    /// admin2 region, including those matching only a country.
    pub unmatched_geocode: u64,
    pub unmatched_country_only: u64,
    pub region_days_admin1: u64,
    pub region_days_admin2: u64,
    pub samples_admin1: u64,
    pub samples_admin2: u64,
    pub regions_emitted: u64,
    pub baseline_regions: u64,
    pub reconciled: bool,
}

impl RunReport {
    /// Accepted reports all land in device-days; every in-range device-day
    /// has exactly one verdict; every eligible one is counted once at the
    /// admin1 level or as unmatched.
    pub fn reconciles(&self) -> bool {
        self.ingest.reports_accepted == self.spilled_reports
            && self.ingest.reports_accepted == self.device_day_reports
            && self.device_days
                == self.outside_date_range + self.eligible + self.rejected_too_few_reports + self.rejected_short_span
            && self.eligible == self.samples_admin1 + self.unmatched_geocode
            && self.ingest.lines_read
                == self.ingest.lines_malformed + self.ingest.reports_accepted + self.ingest.reports_rejected_accuracy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetResult {
    pub name: String,
    pub output_dir: PathBuf,
    pub report: RunReport,
    pub records: Vec<OutputRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub datasets: Vec<DatasetResult>,
    pub comparisons: Vec<PathBuf>,
}

/// Writes through a temporary sibling file, then renames over `path`.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp-{}", std::process::id()));
    let result = File::create(&tmp).and_then(|f| {
        let mut w = BufWriter::new(f);
        fill(&mut w)?;
        w.flush()?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()
    });
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

struct Matched {
    region: RegionKey,
    admin1: Option<RegionKey>,
    date: NaiveDate,
    metrics: MobilityMetrics,
}

#[derive(Default)]
struct BucketOutcome {
    device_days: u64,
    device_day_reports: u64,
    outside_date_range: u64,
    eligible: u64,
    too_few: u64,
    short_span: u64,
    unmatched: u64,
    country_only: u64,
    matched: Vec<Matched>,
}

fn admin1_key(gaz: &Gazetteer, key: &RegionKey) -> RegionKey {
    RegionKey {
        country_code: key.country_code.clone(),
        admin1: key.admin1.clone(),
        admin2: String::new(),
        region_id: gaz.admin1_region_id(&key.country_code, &key.admin1),
    }
}

fn gather_bucket(cfg: &PipelineConfig, gaz: &Gazetteer, paths: &[PathBuf]) -> Result<BucketOutcome> {
    let rules = cfg.rules();
    let mut out = BucketOutcome::default();
    for dd in build_device_days(read_bucket(paths)?) {
        out.device_days += 1;
        out.device_day_reports += dd.reports.len() as u64;
        if !cfg.in_range(dd.local_date) {
            out.outside_date_range += 1;
            continue;
        }
        let metrics = match evaluate(&dd, &rules, cfg.trim_fraction) {
            Ok(m) => m,
            Err(Verdict::TooFewReports) => {
                out.too_few += 1;
                continue;
            }
            Err(_) => {
                out.short_span += 1;
                continue;
            }
        };
        out.eligible += 1;
        match gaz.reverse_geocode(metrics.canonical_point) {
            Some(key) if key.level() != AdminLevel::Country => {
                let admin1 = (key.level() == AdminLevel::Admin2).then(|| admin1_key(gaz, key));
                out.matched.push(Matched {
                    region: key.clone(),
                    admin1,
                    date: dd.local_date,
                    metrics,
                });
            }
            Some(_) => {
                out.unmatched += 1;
                out.country_only += 1;
            }
            None => out.unmatched += 1,
        }
    }
    Ok(out)
}

fn process_dataset(
    cfg: &PipelineConfig,
    gaz: &Gazetteer,
    name: &str,
    shards: &[PathBuf],
    scratch: &Path,
) -> Result<(Vec<OutputRecord>, RunReport)> {
    let nb = cfg.n_buckets;
    let scatter_dir = |i: usize| scratch.join(format!("shard-{i:05}"));

    info!("{name}: scattering {} shards into {nb} buckets", shards.len());
    let scattered: Vec<(IngestStats, Vec<u64>)> = shards
        .par_iter()
        .enumerate()
        .map(|(i, path)| {
            let mut reader = ShardReader::open(path, cfg.accuracy_max_m)?;
            let mut writer = BucketWriter::create(scatter_dir(i), nb)?;
            for r in reader.by_ref() {
                writer.push(&r?)?;
            }
            Ok((reader.stats(), writer.finish()?))
        })
        .collect::<Result<_>>()?;

    let mut report = RunReport {
        dataset: name.to_string(),
        shards: shards.len() as u64,
        ingest: scattered.iter().map(|(s, _)| *s).sum(),
        spilled_reports: scattered.iter().flat_map(|(_, c)| c).sum(),
        ..RunReport::default()
    };

    info!("{name}: gathering buckets");
    let outcomes: Vec<BucketOutcome> = (0..nb)
        .into_par_iter()
        .map(|b| {
            let paths: Vec<PathBuf> = scattered
                .iter()
                .enumerate()
                .filter(|(_, (_, counts))| counts[b] > 0)
                .map(|(i, _)| scatter_dir(i).join(bucket_file_name(b)))
                .collect();
            gather_bucket(cfg, gaz, &paths)
        })
        .collect::<Result<_>>()?;

    for o in &outcomes {
        report.device_days += o.device_days;
        report.device_day_reports += o.device_day_reports;
        report.outside_date_range += o.outside_date_range;
        report.eligible += o.eligible;
        report.rejected_too_few_reports += o.too_few;
        report.rejected_short_span += o.short_span;
        report.unmatched_geocode += o.unmatched;
        report.unmatched_country_only += o.country_only;
    }

    let keyed = outcomes.iter().flat_map(|o| &o.matched).flat_map(|m| {
        let own = (m.region.clone(), m.date, &m.metrics);
        let parent = m.admin1.clone().map(|k| (k, m.date, &m.metrics));
        std::iter::once(own).chain(parent)
    });
    let mut stats = reduce_region_day(keyed);
    let baseline = compute_baseline(&stats, cfg.baseline_start, cfg.baseline_end, true)?;
    for s in &mut stats {
        apply_index(s, &baseline);
        match s.level() {
            AdminLevel::Admin2 => {
                report.region_days_admin2 += 1;
                report.samples_admin2 += s.samples;
            }
            _ => {
                report.region_days_admin1 += 1;
                report.samples_admin1 += s.samples;
            }
        }
    }
    report.regions_emitted = stats.iter().map(|s| &s.region).collect::<BTreeSet<_>>().len() as u64;
    report.baseline_regions = baseline.norms.len() as u64;
    report.reconciled = report.reconciles();
    if !report.reconciled {
        return Err(Error::data(format!("{name}: run report counters do not reconcile: {report:?}")));
    }

    let mut records: Vec<OutputRecord> = stats.iter().map(|s| OutputRecord::from_stats(s, cfg.verbose)).collect();
    sort_records(&mut records);
    Ok((records, report))
}

fn write_outputs(cfg: &PipelineConfig, dir: &Path, records: &[OutputRecord], report: &RunReport) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    if cfg.format.ndjson() {
        write_atomic(&dir.join("m50.ndjson"), |w| write_ndjson(records, w))?;
    }
    if cfg.format.csv() {
        write_atomic(&dir.join("m50.csv"), |w| write_csv(records, w))?;
    }
    let line = serde_json::to_string(report).expect("report serialises");
    write_atomic(&dir.join("run_report.ndjson"), |w| writeln!(w, "{line}"))
}

fn scratch_root(cfg: &PipelineConfig, out: &Path) -> PathBuf {
    let base = cfg.scratch_dir.clone().unwrap_or_else(|| out.join(".scratch"));
    base.join(format!("run-{}", std::process::id()))
}

/// Runs every configured dataset. With one dataset outputs go straight into
/// `output_dir`; with several, into `output_dir/<name>/` plus one
/// comparison file per pair.
pub fn run(cfg: &PipelineConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let out = cfg.output_dir.clone().expect("validated");
    let gaz = load_gazetteer(cfg.gazetteer.as_ref().expect("validated"))?;
    let specs = cfg.datasets()?;
    let inputs: Vec<Vec<PathBuf>> = specs.iter().map(|d| expand_glob(&d.pattern)).collect::<Result<_>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;

    let scratch = scratch_root(cfg, &out);
    if scratch.exists() {
        fs::remove_dir_all(&scratch).map_err(|e| Error::io(&scratch, e))?;
    }
    let result = pool.install(|| -> Result<RunSummary> {
        let mut datasets = Vec::new();
        for (spec, shards) in specs.iter().zip(&inputs) {
            let (records, report) = process_dataset(cfg, &gaz, &spec.name, shards, &scratch.join(&spec.name))?;
            let dir = if specs.len() == 1 { out.clone() } else { out.join(&spec.name) };
            write_outputs(cfg, &dir, &records, &report)?;
            datasets.push(DatasetResult {
                name: spec.name.clone(),
                output_dir: dir,
                report,
                records,
            });
        }
        let mut comparisons = Vec::new();
        for i in 0..datasets.len() {
            for j in i + 1..datasets.len() {
                let (a, b) = (&datasets[i], &datasets[j]);
                let rows = compare(&a.records, &b.records)?;
                let path = out.join(format!("comparison_{}_vs_{}.ndjson", a.name, b.name));
                write_atomic(&path, |w| write_comparison(&rows, w))?;
                comparisons.push(path);
            }
        }
        Ok(RunSummary { datasets, comparisons })
    });

    match &result {
        Ok(_) => {
            if scratch.exists() {
                fs::remove_dir_all(&scratch).map_err(|e| Error::io(&scratch, e))?;
            }
            if let Some(parent) = scratch.parent() {
                let _ = fs::remove_dir(parent);
            }
        }
        Err(e) => warn!("run failed ({e}); spill files kept in {}", scratch.display()),
    }
    result
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JoinStatus {
    Both,
    OnlyA,
    OnlyB,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub country_code: String,
    pub admin_level: AdminLevel,
    pub admin1: String,
    pub admin2: String,
    pub region_id: String,
    pub date: NaiveDate,
    pub status: JoinStatus,
    pub m50_index_a: Option<f64>,
    pub m50_index_b: Option<f64>,
    /// `b - a`, when both sides carry an index.
    pub delta: Option<f64>,
}

type JoinKey = (String, String, String, NaiveDate, String, AdminLevel);

fn join_key(r: &OutputRecord) -> JoinKey {
    (
        r.country_code.clone(),
        r.admin1.clone(),
        r.admin2.clone(),
        r.date,
        r.region_id.clone(),
        r.admin_level,
    )
}

fn columns_of(r: &OutputRecord) -> bool {
    r.detail.is_some()
}

/// Full outer join on region and date.
pub fn compare(a: &[OutputRecord], b: &[OutputRecord]) -> Result<Vec<ComparisonRow>> {
    if let (Some(x), Some(y)) = (a.first(), b.first()) {
        if columns_of(x) != columns_of(y) {
            return Err(Error::data("datasets have different output schemas (verbose vs plain)"));
        }
    }
    let mut joined: BTreeMap<JoinKey, (Option<&OutputRecord>, Option<&OutputRecord>)> = BTreeMap::new();
    for r in a {
        joined.entry(join_key(r)).or_default().0 = Some(r);
    }
    for r in b {
        joined.entry(join_key(r)).or_default().1 = Some(r);
    }
    Ok(joined
        .into_iter()
        .map(|((country_code, admin1, admin2, date, region_id, admin_level), (ra, rb))| {
            let status = match (ra, rb) {
                (Some(_), Some(_)) => JoinStatus::Both,
                (Some(_), None) => JoinStatus::OnlyA,
                _ => JoinStatus::OnlyB,
            };
            let ia = ra.and_then(|r| r.m50_index);
            let ib = rb.and_then(|r| r.m50_index);
            ComparisonRow {
                country_code,
                admin_level,
                admin1,
                admin2,
                region_id,
                date,
                status,
                m50_index_a: ia,
                m50_index_b: ib,
                delta: ia.zip(ib).map(|(x, y)| round_to(y - x, 1)),
            }
        })
        .collect())
}

pub fn write_comparison(rows: &[ComparisonRow], mut sink: impl Write) -> std::io::Result<()> {
    for r in rows {
        serde_json::to_writer(&mut sink, r)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()
}

/// Column names of an output file: the CSV header or the keys of the first
/// NDJSON object. `None` for an empty file.
pub fn output_columns(path: &Path) -> Result<Option<Vec<String>>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut first = String::new();
    BufReader::new(f).read_line(&mut first).map_err(|e| Error::io(path, e))?;
    let first = first.trim_end();
    if first.is_empty() {
        return Ok(None);
    }
    if is_csv(path) {
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(first.as_bytes());
        let row = r
            .records()
            .next()
            .transpose()
            .map_err(|e| Error::data(format!("{}: {e}", path.display())))?
            .unwrap_or_default();
        return Ok(Some(row.iter().map(str::to_string).collect()));
    }
    let obj: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(first).map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    Ok(Some(obj.keys().cloned().collect()))
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn read_output_file(path: &Path) -> Result<Vec<OutputRecord>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let records = if is_csv(path) {
        read_csv(f)
    } else {
        read_ndjson(BufReader::new(f))
    };
    records.map_err(|e| match e {
        Error::Data(m) => Error::data(format!("{}: {m}", path.display())),
        e => e,
    })
}

/// Compares two output files. Their column sets must match.
pub fn compare_files(a: &Path, b: &Path) -> Result<Vec<ComparisonRow>> {
    let (ca, cb) = (output_columns(a)?, output_columns(b)?);
    if let (Some(x), Some(y)) = (&ca, &cb) {
        let (sx, sy): (BTreeSet<_>, BTreeSet<_>) = (x.iter().collect(), y.iter().collect());
        if sx != sy {
            return Err(Error::data(format!(
                "schema mismatch between {} and {}: [{}] vs [{}]",
                a.display(),
                b.display(),
                x.join(","),
                y.join(",")
            )));
        }
    }
    compare(&read_output_file(a)?, &read_output_file(b)?)
}
