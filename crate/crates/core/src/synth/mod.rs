//! Seeded synthetic position feeds with a ground-truth sidecar.
//!
//! Devices live in the counties of a small built-in gazetteer. Each
//! device-day is a scripted trajectory anchored at home: the trimmed maximum
//! distance is placed exactly at the day's trip radius, with the points that
//! trimming removes (simulated bad fixes) beyond it. The radius is the
//! device's base radius times the date's scale factor, so a scale of 0.3
//! drops every `m_max` to 30% of normal.
//!
//! The RNG is ChaCha8 seeded from `ScenarioSpec::seed`; the same spec always
//! produces the same bytes.

pub mod oracle;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use flate2::write::GzEncoder;
use flate2::Compression;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::GeoPoint;
use crate::geocode::{write_gazetteer, GazetteerRecord, Ring};
use crate::ingest::PositionReport;
use crate::metrics::{EligibilityRules, Verdict};

pub use oracle::{compare_metrics, oracle_device_days, oracle_metrics, rel_close};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleChange {
    pub from: NaiveDate,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub devices: usize,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    /// Piecewise-constant mobility scale; 1.0 before the first change.
    pub scale_changes: Vec<ScaleChange>,
    /// Median trip radius (trimmed `m_max`) at scale 1.
    pub base_radius_km: f64,
    /// Log-normal sigma of the per-device radius.
    pub device_spread: f64,
    /// Log-normal sigma of the per-day radius jitter.
    pub day_spread: f64,
    /// Inclusive range of generated reports per device-day.
    pub reports_per_day: [usize; 2],
    /// Inclusive range of the first-to-last report span, hours.
    pub span_hours: [f64; 2],
    /// Probability that a report (other than the day's first) has accuracy
    /// worse than `accuracy_max_m`.
    pub bad_accuracy_fraction: f64,
    /// Expected number of garbage lines per report line.
    pub malformed_fraction: f64,
    pub shards: usize,
    pub gzip: bool,
    pub header: bool,
    /// Compute the oracle sidecar. Off for pure throughput corpora.
    pub with_truth: bool,
    pub accuracy_max_m: f64,
    pub min_reports: usize,
    pub min_span_hours: f64,
    pub trim_fraction: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            seed: 1,
            devices: 200,
            start_date: NaiveDate::from_ymd_opt(2020, 2, 17).expect("valid"),
            end_date: NaiveDate::from_ymd_opt(2020, 3, 13).expect("valid"),
            scale_changes: vec![ScaleChange {
                from: NaiveDate::from_ymd_opt(2020, 3, 9).expect("valid"),
                factor: 0.3,
            }],
            base_radius_km: 5.2,
            device_spread: 0.25,
            day_spread: 0.05,
            reports_per_day: [8, 40],
            span_hours: [6.0, 15.0],
            bad_accuracy_fraction: 0.05,
            malformed_fraction: 0.001,
            shards: 4,
            gzip: true,
            header: true,
            with_truth: true,
            accuracy_max_m: crate::ingest::DEFAULT_ACCURACY_MAX_M,
            min_reports: crate::metrics::DEFAULT_MIN_REPORTS,
            min_span_hours: crate::metrics::DEFAULT_MIN_SPAN_HOURS,
            trim_fraction: crate::metrics::DEFAULT_TRIM_FRACTION,
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::config(format!("scenario: {m}")));
        if self.devices == 0 {
            return bad("devices must be positive");
        }
        if self.start_date > self.end_date {
            return bad("start_date after end_date");
        }
        if self.scale_changes.iter().any(|c| !(c.factor > 0.0 && c.factor.is_finite())) {
            return bad("scale factors must be positive");
        }
        if self.base_radius_km.is_nan() || self.base_radius_km <= 0.0 {
            return bad("base_radius_km must be positive");
        }
        let [lo, hi] = self.reports_per_day;
        if lo == 0 || lo > hi {
            return bad("reports_per_day must be a non-empty positive range");
        }
        let [slo, shi] = self.span_hours;
        if !(slo >= 0.0 && slo <= shi && shi <= 16.0) {
            return bad("span_hours must satisfy 0 <= lo <= hi <= 16");
        }
        for f in [self.bad_accuracy_fraction, self.malformed_fraction, self.trim_fraction] {
            if !(0.0..1.0).contains(&f) {
                return bad("fractions must lie in [0, 1)");
            }
        }
        if self.shards == 0 {
            return bad("shards must be positive");
        }
        if self.accuracy_max_m.is_nan() || self.accuracy_max_m <= 2.0 {
            return bad("accuracy_max_m must exceed 2");
        }
        if self.device_spread < 0.0 || self.day_spread < 0.0 {
            return bad("spreads must be non-negative");
        }
        Ok(())
    }

    pub fn scale_on(&self, date: NaiveDate) -> f64 {
        let mut changes = self.scale_changes.clone();
        changes.sort_by_key(|c| c.from);
        changes
            .iter()
            .rev()
            .find(|c| c.from <= date)
            .map_or(1.0, |c| c.factor)
    }

    fn rules(&self) -> EligibilityRules {
        EligibilityRules {
            min_reports: self.min_reports,
            min_span_hours: self.min_span_hours,
        }
    }
}

/// One region of the built-in gazetteer, an axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyRegion {
    pub country_code: &'static str,
    pub admin1: &'static str,
    pub admin2: &'static str,
    pub region_id: &'static str,
    pub admin1_id: &'static str,
    pub place: &'static str,
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl ToyRegion {
    fn ring(&self) -> Ring {
        vec![
            [self.min_lon, self.min_lat],
            [self.max_lon, self.min_lat],
            [self.max_lon, self.max_lat],
            [self.min_lon, self.max_lat],
            [self.min_lon, self.min_lat],
        ]
    }

    pub fn is_home(&self) -> bool {
        !self.admin1.is_empty() && (!self.admin2.is_empty() || self.region_id == "10")
    }
}

#[allow(clippy::too_many_arguments)]
const fn toy(
    admin1: &'static str,
    admin2: &'static str,
    region_id: &'static str,
    admin1_id: &'static str,
    place: &'static str,
    min_lon: f64,
    min_lat: f64,
    size: f64,
) -> ToyRegion {
    ToyRegion {
        country_code: "US",
        admin1,
        admin2,
        region_id,
        admin1_id,
        place,
        min_lon,
        min_lat,
        max_lon: min_lon + size,
        max_lat: min_lat + size,
    }
}

/// Country, three first-order divisions and eight counties. "Prairie" has
/// no counties, so devices there only reach the admin1 level.
pub const TOY_REGIONS: [ToyRegion; 12] = [
    ToyRegion {
        country_code: "US",
        admin1: "",
        admin2: "",
        region_id: "US",
        admin1_id: "",
        place: "",
        min_lon: -107.0,
        min_lat: 39.0,
        max_lon: -102.0,
        max_lat: 42.0,
    },
    toy("Alpha", "", "08", "08", "", -106.0, 40.0, 1.0),
    toy("Lakes, North", "", "09", "09", "", -105.0, 40.0, 1.0),
    toy("Prairie", "", "10", "10", "Plainview", -104.0, 40.0, 1.0),
    toy("Alpha", "Ash", "08001", "08", "Ashford", -106.0, 40.0, 0.5),
    toy("Alpha", "Birch", "08003", "08", "Birchwood", -105.5, 40.0, 0.5),
    toy("Alpha", "Cedar", "08005", "08", "Cedar Falls", -106.0, 40.5, 0.5),
    toy("Alpha", "Dogwood", "08007", "08", "Dogtown", -105.5, 40.5, 0.5),
    toy("Lakes, North", "Elm", "09001", "09", "Elmira", -105.0, 40.0, 0.5),
    toy("Lakes, North", "Fir", "09003", "09", "Fircrest", -104.5, 40.0, 0.5),
    toy("Lakes, North", "Gum", "09005", "09", "Gum Springs", -105.0, 40.5, 0.5),
    toy("Lakes, North", "Hazel", "09007", "09", "Hazelton", -104.5, 40.5, 0.5),
];

pub fn toy_gazetteer() -> Vec<GazetteerRecord> {
    let mut out = Vec::new();
    for r in &TOY_REGIONS {
        out.push(GazetteerRecord::Region {
            country_code: r.country_code.into(),
            admin1: r.admin1.into(),
            admin2: r.admin2.into(),
            region_id: r.region_id.into(),
            utc_offset_hours: Some(-7.0),
            polygons: vec![r.ring()],
        });
    }
    for r in &TOY_REGIONS {
        if !r.place.is_empty() {
            out.push(GazetteerRecord::Place {
                name: r.place.into(),
                lat: (r.min_lat + r.max_lat) / 2.0,
                lon: (r.min_lon + r.max_lon) / 2.0,
                region_id: r.region_id.into(),
            });
        }
    }
    out
}

pub fn home_regions() -> Vec<&'static ToyRegion> {
    TOY_REGIONS.iter().filter(|r| r.is_home()).collect()
}

/// Expected outcome for one device-day, from the oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub device_id: String,
    pub local_date: NaiveDate,
    pub tz_offset_hours: i32,
    pub report_count: usize,
    pub span_hours: f64,
    pub verdict: Verdict,
    pub region_id: String,
    pub admin1_region_id: String,
    pub m_max: Option<f64>,
    pub m_bb: Option<f64>,
    pub m_ch: Option<f64>,
    pub a_bb: Option<f64>,
    pub a_ch: Option<f64>,
    pub canonical_lat: f64,
    pub canonical_lon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateSummary {
    pub shards: Vec<PathBuf>,
    pub gazetteer: PathBuf,
    pub truth: Option<PathBuf>,
    pub report_lines: u64,
    pub malformed_lines: u64,
    pub accepted_reports: u64,
    pub device_days: u64,
    pub eligible_device_days: u64,
}

/// Great-circle destination from `start` along `bearing` (radians).
fn destination(start: GeoPoint, bearing: f64, km: f64) -> GeoPoint {
    let delta = km / crate::geo::EARTH_RADIUS_KM;
    let phi1 = start.lat().to_radians();
    let lambda1 = start.lon().to_radians();
    let phi2 = (phi1.sin() * delta.cos() + phi1.cos() * delta.sin() * bearing.cos()).asin();
    let lambda2 = lambda1
        + (bearing.sin() * delta.sin() * phi1.cos()).atan2(delta.cos() - phi1.sin() * phi2.sin());
    let lon = (lambda2.to_degrees() + 540.0).rem_euclid(360.0) - 180.0;
    GeoPoint::new(phi2.to_degrees().clamp(-90.0, 90.0), lon).expect("normalised")
}

/// Rounds to 1e-7 degrees, about a centimetre.
fn quantize(p: GeoPoint) -> GeoPoint {
    let q = |v: f64| (v * 1e7).round() / 1e7;
    GeoPoint::new(q(p.lat()), q(p.lon()).clamp(-180.0, 180.0)).expect("still in range")
}

const GARBAGE: [&str; 6] = [
    "",
    "truncated,line",
    "dev,notanumber,40.0,-105.0,10",
    "dev,1583020800,95.0,-105.0,10",
    "dev,1583020800,40.0,-105.0,-3",
    "dev,1583020800,40.0,-105.0,10,extra",
];

struct DeviceDayPlan<'a> {
    device_id: &'a str,
    home: GeoPoint,
    radius_km: f64,
    local_midnight: i64,
}

fn day_reports(rng: &mut ChaCha8Rng, spec: &ScenarioSpec, plan: &DeviceDayPlan) -> Vec<PositionReport> {
    let n = rng.random_range(spec.reports_per_day[0]..=spec.reports_per_day[1]);
    let start = rng.random_range(6 * 3600..8 * 3600);
    let span = ((rng.random_range(spec.span_hours[0]..=spec.span_hours[1]) * 3600.0) as i64)
        .min(86_399 - start);
    let mut times = vec![start];
    if n > 1 {
        // strictly after the first report so the day's canonical point is home
        let lo = (start + 1).min(start + span);
        let mut mid: Vec<i64> = (0..n - 2).map(|_| rng.random_range(lo..=start + span)).collect();
        mid.sort_unstable();
        times.extend(mid);
        times.push(start + span);
    }

    let good_hi = spec.accuracy_max_m.min(35.0);
    let accuracy: Vec<f64> = (0..n)
        .map(|i| {
            let a = if i > 0 && rng.random_bool(spec.bad_accuracy_fraction) {
                rng.random_range(spec.accuracy_max_m + 0.5..spec.accuracy_max_m + 250.0)
            } else {
                rng.random_range(2.0..good_hi)
            };
            (a * 10.0).round() / 10.0
        })
        .collect();

    let mut accepted: Vec<usize> = (1..n).filter(|&i| accuracy[i] <= spec.accuracy_max_m).collect();
    accepted.shuffle(rng);
    let n_acc = accepted.len() + 1;
    let k = (spec.trim_fraction * n_acc as f64).floor() as usize;
    let r = plan.radius_km;
    let mut dist = vec![0.0; n];
    for (rank, &i) in accepted.iter().enumerate() {
        dist[i] = match rank {
            _ if rank < k => r * rng.random_range(2.0..4.0),
            _ if rank == k => r,
            _ => r * rng.random_range(0.0..0.95),
        };
    }
    for i in 1..n {
        if accuracy[i] > spec.accuracy_max_m {
            dist[i] = r * rng.random_range(0.0..3.0);
        }
    }

    (0..n)
        .map(|i| {
            let point = if i == 0 {
                plan.home
            } else {
                let bearing = rng.random_range(0.0..std::f64::consts::TAU);
                quantize(destination(plan.home, bearing, dist[i]))
            };
            PositionReport {
                device_id: plan.device_id.to_string(),
                epoch_s: plan.local_midnight + times[i],
                point,
                accuracy_m: accuracy[i],
            }
        })
        .collect()
}

fn lognormal(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    (sigma * z).exp()
}

fn write_lines(path: &Path, header: bool, gzip: bool, lines: &[String]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out: Box<dyn Write> = if gzip {
        Box::new(BufWriter::new(GzEncoder::new(file, Compression::fast())))
    } else {
        Box::new(BufWriter::new(file))
    };
    let io = |e| Error::io(path, e);
    if header {
        out.write_all(b"device_id,epoch_s,lat,lon,accuracy_m\n").map_err(io)?;
    }
    for l in lines {
        out.write_all(l.as_bytes()).map_err(io)?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Writes `shards/`, `gazetteer.ndjson`, `scenario.json` and, when enabled,
/// `truth.ndjson` under `dir`.
pub fn generate(spec: &ScenarioSpec, dir: impl AsRef<Path>) -> Result<GenerateSummary> {
    spec.validate()?;
    let dir = dir.as_ref();
    let shard_dir = dir.join("shards");
    fs::create_dir_all(&shard_dir).map_err(|e| Error::io(&shard_dir, e))?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let homes = home_regions();
    let rules = spec.rules();
    let mut shard_lines: Vec<Vec<String>> = vec![Vec::new(); spec.shards];
    let mut truth: Vec<TruthRecord> = Vec::new();
    let mut summary = GenerateSummary {
        shards: Vec::new(),
        gazetteer: dir.join("gazetteer.ndjson"),
        truth: spec.with_truth.then(|| dir.join("truth.ndjson")),
        report_lines: 0,
        malformed_lines: 0,
        accepted_reports: 0,
        device_days: 0,
        eligible_device_days: 0,
    };
    let dates: Vec<NaiveDate> = spec.start_date.iter_days().take_while(|d| *d <= spec.end_date).collect();

    for dev in 0..spec.devices {
        let device_id = format!("d{:06x}", dev as u64 * 2_654_435_761 % (1 << 24));
        let region = homes[dev % homes.len()];
        let margin = 0.1;
        let home = quantize(
            GeoPoint::new(
                rng.random_range(region.min_lat + margin..region.max_lat - margin),
                rng.random_range(region.min_lon + margin..region.max_lon - margin),
            )
            .expect("toy regions are in range"),
        );
        let offset = (home.lon() / 15.0).round() as i64;
        let device_radius = spec.base_radius_km * lognormal(&mut rng, spec.device_spread);
        let mut accepted = Vec::new();

        for &date in &dates {
            let days = (date - NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid")).num_days();
            let plan = DeviceDayPlan {
                device_id: &device_id,
                home,
                radius_km: device_radius * spec.scale_on(date) * lognormal(&mut rng, spec.day_spread),
                local_midnight: days * 86_400 - offset * 3600,
            };
            for r in day_reports(&mut rng, spec, &plan) {
                let shard = rng.random_range(0..spec.shards);
                shard_lines[shard].push(r.to_line());
                summary.report_lines += 1;
                if rng.random_bool(spec.malformed_fraction) {
                    let g = GARBAGE[rng.random_range(0..GARBAGE.len())];
                    shard_lines[rng.random_range(0..spec.shards)].push(g.to_string());
                    summary.malformed_lines += 1;
                }
                if r.accuracy_m <= spec.accuracy_max_m {
                    accepted.push(r);
                }
            }
        }
        summary.accepted_reports += accepted.len() as u64;

        for (local_date, tz, reports) in oracle_device_days(&accepted) {
            summary.device_days += 1;
            let first = reports.first().expect("non-empty day").point;
            let verdict = oracle_metrics(&reports, &rules, spec.trim_fraction);
            if verdict.is_ok() {
                summary.eligible_device_days += 1;
            }
            if !spec.with_truth {
                continue;
            }
            let span_s = reports.last().map_or(0, |l| l.epoch_s) - reports[0].epoch_s;
            let m = verdict.as_ref().ok();
            truth.push(TruthRecord {
                device_id: device_id.clone(),
                local_date,
                tz_offset_hours: tz,
                report_count: reports.len(),
                span_hours: span_s as f64 / 3600.0,
                verdict: verdict.err().unwrap_or(Verdict::Eligible),
                region_id: region.region_id.to_string(),
                admin1_region_id: region.admin1_id.to_string(),
                m_max: m.map(|m| m.m_max),
                m_bb: m.map(|m| m.m_bb),
                m_ch: m.map(|m| m.m_ch),
                a_bb: m.map(|m| m.a_bb.value()),
                a_ch: m.map(|m| m.a_ch.value()),
                canonical_lat: first.lat(),
                canonical_lon: first.lon(),
            });
        }
    }

    for (i, lines) in shard_lines.iter_mut().enumerate() {
        lines.shuffle(&mut rng);
        let name = if spec.gzip {
            format!("shard-{i:03}.csv.gz")
        } else {
            format!("shard-{i:03}.csv")
        };
        let path = shard_dir.join(name);
        write_lines(&path, spec.header, spec.gzip, lines)?;
        summary.shards.push(path);
    }

    let gz = File::create(&summary.gazetteer).map_err(|e| Error::io(&summary.gazetteer, e))?;
    write_gazetteer(&toy_gazetteer(), BufWriter::new(gz)).map_err(|e| Error::io(&summary.gazetteer, e))?;

    if let Some(path) = &summary.truth {
        let lines: Vec<String> = truth
            .iter()
            .map(|t| serde_json::to_string(t).expect("truth serialises"))
            .collect();
        write_lines(path, false, false, &lines)?;
    }

    let spec_path = dir.join("scenario.json");
    let text = serde_json::to_string_pretty(spec).expect("spec serialises");
    fs::write(&spec_path, text + "\n").map_err(|e| Error::io(&spec_path, e))?;
    Ok(summary)
}

pub fn read_truth(path: impl AsRef<Path>) -> Result<Vec<TruthRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| Error::data(format!("{}: {e}", path.display()))))
        .collect()
}

/// Expected `(samples, m50)` per `(region_id, date)` at both admin levels,
/// computed straight from the sidecar.
pub fn expected_m50(truth: &[TruthRecord]) -> BTreeMap<(String, NaiveDate), (u64, f64)> {
    let mut groups: BTreeMap<(String, NaiveDate), Vec<f64>> = BTreeMap::new();
    for t in truth {
        let Some(m) = t.m_max else { continue };
        groups.entry((t.region_id.clone(), t.local_date)).or_default().push(m);
        if t.admin1_region_id != t.region_id {
            groups.entry((t.admin1_region_id.clone(), t.local_date)).or_default().push(m);
        }
    }
    groups
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            let n = v.len();
            let median = if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 };
            (k, (n as u64, median))
        })
        .collect()
}

/// One randomly shaped device-day for oracle comparisons.
///
/// `kind` selects the shape: 0 generic cloud, 1 duplicates, 2 exactly
/// collinear on a dyadic grid, 3 antimeridian straddling, 4 tiny jitter,
/// 5 dyadic grid with interior and boundary points.
pub fn random_device_day(rng: &mut ChaCha8Rng, kind: u8, device_id: &str) -> Vec<PositionReport> {
    let n = rng.random_range(6..48);
    let day0 = 1_583_020_800 + 86_400 * rng.random_range(0..30i64);
    let span = rng.random_range(5 * 3600..15 * 3600);
    let lat0 = rng.random_range(-70.0..70.0f64);
    let lon0 = rng.random_range(-170.0..170.0f64);
    let dyadic = |v: f64| (v * 4096.0).round() / 4096.0;
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(n);
    match kind {
        1 => {
            let distinct: Vec<(f64, f64)> = (0..rng.random_range(1..4))
                .map(|_| (lat0 + rng.random_range(-0.05..0.05), lon0 + rng.random_range(-0.05..0.05)))
                .collect();
            for _ in 0..n {
                pts.push(distinct[rng.random_range(0..distinct.len())]);
            }
        }
        2 => {
            let (a, b) = (dyadic(lat0), dyadic(lon0));
            let (dy, dx) = (rng.random_range(-8..=8) as f64 / 4096.0, rng.random_range(-8..=8) as f64 / 4096.0);
            for _ in 0..n {
                let t = rng.random_range(-40..=40) as f64;
                pts.push((a + t * dy, b + t * dx));
            }
        }
        3 => {
            let lat = rng.random_range(-60.0..60.0f64);
            for _ in 0..n {
                let lon: f64 = if rng.random_bool(0.5) {
                    rng.random_range(179.8..180.0)
                } else {
                    rng.random_range(-180.0..-179.8)
                };
                pts.push((lat + rng.random_range(-0.1..0.1), lon));
            }
        }
        4 => {
            for _ in 0..n {
                pts.push((lat0 + rng.random_range(-1e-5..1e-5), lon0 + rng.random_range(-1e-5..1e-5)));
            }
        }
        5 => {
            let (a, b) = (dyadic(lat0), dyadic(lon0));
            for _ in 0..n {
                let (i, j) = (rng.random_range(0..=6) as f64, rng.random_range(0..=6) as f64);
                pts.push((a + i / 1024.0, b + j / 1024.0));
            }
        }
        _ => {
            let r = rng.random_range(0.001..0.3);
            for _ in 0..n {
                pts.push((lat0 + rng.random_range(-r..r), lon0 + rng.random_range(-r..r)));
            }
        }
    }
    pts.into_iter()
        .map(|(lat, lon)| {
            let t = if rng.random_bool(0.1) { 0 } else { rng.random_range(0..=span) };
            PositionReport {
                device_id: device_id.to_string(),
                epoch_s: day0 + 8 * 3600 + t,
                point: GeoPoint::new(lat.clamp(-90.0, 90.0), lon).expect("in range"),
                accuracy_m: rng.random_range(1.0..50.0),
            }
        })
        .collect()
}
