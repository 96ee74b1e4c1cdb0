//! Per-device collation: hash-partitioned spill files followed by grouping
//! into device-days under a single solar offset per device.

use std::fs::{self, File};
use std::hash::Hasher;
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use fnv::FnvHasher;

use crate::error::{Error, Result};
use crate::geo::solar_tz_offset_hours;
use crate::ingest::{open_text, parse_report_line, PositionReport};

const SECONDS_PER_DAY: i64 = 86_400;
/// `NaiveDate::num_days_from_ce` of 1970-01-01.
const UNIX_EPOCH_DAYS_FROM_CE: i32 = 719_163;

/// All accepted reports of one device within one local day, in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceDay {
    pub device_id: String,
    pub local_date: NaiveDate,
    pub tz_offset_hours: i32,
    pub reports: Vec<PositionReport>,
}

/// Calendar date of `epoch_s` shifted by a whole-hour offset.
pub fn local_date(epoch_s: i64, tz_offset_hours: i32) -> NaiveDate {
    let days = (epoch_s + 3600 * i64::from(tz_offset_hours)).div_euclid(SECONDS_PER_DAY);
    NaiveDate::from_num_days_from_ce_opt(UNIX_EPOCH_DAYS_FROM_CE + days as i32)
        .expect("epoch within chrono range")
}

/// Dates a single report by its own solar offset.
pub fn assign_local_day(r: &PositionReport) -> (&str, NaiveDate, i32) {
    let offset = solar_tz_offset_hours(r.point.lon());
    (&r.device_id, local_date(r.epoch_s, offset), offset)
}

/// Stable bucket index for a device.
pub fn bucket_of(device_id: &str, n_buckets: usize) -> usize {
    let mut h = FnvHasher::default();
    h.write(device_id.as_bytes());
    (h.finish() % n_buckets as u64) as usize
}

/// A report as stored in a spill file, with the offset of its own longitude.
#[derive(Debug, Clone, PartialEq)]
pub struct SpillRecord {
    pub report: PositionReport,
    pub tz_offset_hours: i32,
}

impl SpillRecord {
    pub fn new(report: PositionReport) -> Self {
        let tz_offset_hours = solar_tz_offset_hours(report.point.lon());
        SpillRecord {
            report,
            tz_offset_hours,
        }
    }
}

pub fn parse_spill_line(line: &str) -> Option<SpillRecord> {
    let (head, tz) = line.rsplit_once(',')?;
    Some(SpillRecord {
        report: parse_report_line(head).ok()?,
        tz_offset_hours: tz.parse().ok()?,
    })
}

pub fn bucket_file_name(bucket: usize) -> String {
    format!("bucket-{bucket:05}.csv")
}

/// Scatters reports into `n_buckets` spill files under one directory.
///
/// Files are opened lazily, so buckets that receive nothing have no file.
/// If writing fails the directory is removed before the error is returned.
pub struct BucketWriter {
    dir: PathBuf,
    files: Vec<Option<BufWriter<File>>>,
    counts: Vec<u64>,
    line: String,
}

impl BucketWriter {
    pub fn create(dir: impl AsRef<Path>, n_buckets: usize) -> Result<Self> {
        if n_buckets == 0 {
            return Err(Error::config("n_buckets must be at least 1"));
        }
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(BucketWriter {
            dir,
            files: (0..n_buckets).map(|_| None).collect(),
            counts: vec![0; n_buckets],
            line: String::with_capacity(128),
        })
    }

    pub fn push(&mut self, report: &PositionReport) -> Result<()> {
        let b = bucket_of(&report.device_id, self.files.len());
        if let Err(e) = self.write(b, report) {
            self.abort();
            return Err(e);
        }
        self.counts[b] += 1;
        Ok(())
    }

    fn write(&mut self, b: usize, report: &PositionReport) -> Result<()> {
        use std::fmt::Write as _;
        let path = self.dir.join(bucket_file_name(b));
        if self.files[b].is_none() {
            let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
            self.files[b] = Some(BufWriter::with_capacity(1 << 15, f));
        }
        self.line.clear();
        let _ = writeln!(
            self.line,
            "{},{}",
            report.to_line(),
            solar_tz_offset_hours(report.point.lon())
        );
        let out = self.files[b].as_mut().expect("opened above");
        out.write_all(self.line.as_bytes()).map_err(|e| Error::io(&path, e))
    }

    fn abort(&mut self) {
        self.files.clear();
        let _ = fs::remove_dir_all(&self.dir);
    }

    /// Flushes every bucket and returns the per-bucket record counts.
    pub fn finish(mut self) -> Result<Vec<u64>> {
        for b in 0..self.files.len() {
            if let Some(mut f) = self.files[b].take() {
                if let Err(e) = f.flush() {
                    let path = self.dir.join(bucket_file_name(b));
                    self.abort();
                    return Err(Error::io(path, e));
                }
            }
        }
        Ok(self.counts)
    }
}

/// Partitions a report stream into spill files keyed by device hash.
pub fn bucket_sort<I>(reports: I, n_buckets: usize, dir: impl AsRef<Path>) -> Result<Vec<u64>>
where
    I: IntoIterator<Item = PositionReport>,
{
    let mut w = BucketWriter::create(dir, n_buckets)?;
    for r in reports {
        w.push(&r)?;
    }
    w.finish()
}

/// Reads every record of one bucket from the given spill files.
pub fn read_bucket(paths: &[PathBuf]) -> Result<Vec<SpillRecord>> {
    let mut out = Vec::new();
    for path in paths {
        let reader = open_text(path)?;
        for line in reader.lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let rec = parse_spill_line(&line).ok_or_else(|| {
                Error::data(format!("corrupt spill record in {}: {line:?}", path.display()))
            })?;
            out.push(rec);
        }
    }
    Ok(out)
}

/// Groups one bucket into device-days.
///
/// Each device gets the solar offset of its chronologically first report;
/// every report of the device is dated with that offset. Output is sorted by
/// `(device_id, local_date)`.
pub fn build_device_days(mut records: Vec<SpillRecord>) -> Vec<DeviceDay> {
    records.sort_by(|a, b| {
        a.report
            .device_id
            .cmp(&b.report.device_id)
            .then_with(|| a.report.sort_key_cmp(&b.report))
    });
    let mut days: Vec<DeviceDay> = Vec::new();
    let mut offset = 0;
    for rec in records {
        let r = rec.report;
        let same_device = days.last().is_some_and(|d| d.device_id == r.device_id);
        if !same_device {
            offset = rec.tz_offset_hours;
        }
        let date = local_date(r.epoch_s, offset);
        match days.last_mut() {
            Some(d) if same_device && d.local_date == date => d.reports.push(r),
            _ => days.push(DeviceDay {
                device_id: r.device_id.clone(),
                local_date: date,
                tz_offset_hours: offset,
                reports: vec![r],
            }),
        }
    }
    days
}
