//! Shard reading: canonical `device_id,epoch_s,lat,lon,accuracy_m` lines,
//! plain or gzip, with per-line validation and the accuracy filter.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::ops::AddAssign;
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;
use log::debug;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::geo::GeoPoint;

/// Default accuracy cut-off in metres.
pub const DEFAULT_ACCURACY_MAX_M: f64 = 50.0;

/// One parsed location fix.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionReport {
    pub device_id: String,
    pub epoch_s: i64,
    pub point: GeoPoint,
    pub accuracy_m: f64,
}

impl PositionReport {
    /// Canonical ordering inside a device: time, then (lat, lon, accuracy).
    pub fn sort_key_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.epoch_s
            .cmp(&other.epoch_s)
            .then_with(|| self.point.total_cmp(&other.point))
            .then_with(|| self.accuracy_m.total_cmp(&other.accuracy_m))
    }

    /// The five canonical fields, comma separated, without a line terminator.
    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.device_id,
            self.epoch_s,
            self.point.lat(),
            self.point.lon(),
            self.accuracy_m
        )
    }
}

/// Why a line was rejected by [`parse_report_line`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Malformed {
    #[error("expected 5 fields, found {0}")]
    FieldCount(usize),
    #[error("empty device id")]
    EmptyDevice,
    #[error("bad epoch {0:?}")]
    Epoch(String),
    #[error("bad latitude {0:?}")]
    Latitude(String),
    #[error("bad longitude {0:?}")]
    Longitude(String),
    #[error("bad accuracy {0:?}")]
    Accuracy(String),
    #[error("line is not valid UTF-8")]
    Encoding,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub lines_read: u64,
    pub lines_malformed: u64,
    pub reports_accepted: u64,
    pub reports_rejected_accuracy: u64,
}

impl AddAssign for IngestStats {
    fn add_assign(&mut self, rhs: Self) {
        self.lines_read += rhs.lines_read;
        self.lines_malformed += rhs.lines_malformed;
        self.reports_accepted += rhs.reports_accepted;
        self.reports_rejected_accuracy += rhs.reports_rejected_accuracy;
    }
}

impl std::iter::Sum for IngestStats {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(IngestStats::default(), |mut acc, s| {
            acc += s;
            acc
        })
    }
}

fn parse_finite(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Parses one record. The line must not carry its terminator.
pub fn parse_report_line(line: &str) -> Result<PositionReport, Malformed> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 5 {
        return Err(Malformed::FieldCount(fields.len()));
    }
    let device_id = fields[0].trim();
    if device_id.is_empty() {
        return Err(Malformed::EmptyDevice);
    }
    let epoch_s = fields[1]
        .trim()
        .parse::<i64>()
        .ok()
        .filter(|e| *e >= 0)
        .ok_or_else(|| Malformed::Epoch(fields[1].to_string()))?;
    let lat = parse_finite(fields[2])
        .filter(|v| (-90.0..=90.0).contains(v))
        .ok_or_else(|| Malformed::Latitude(fields[2].to_string()))?;
    let lon = parse_finite(fields[3])
        .filter(|v| (-180.0..=180.0).contains(v))
        .ok_or_else(|| Malformed::Longitude(fields[3].to_string()))?;
    let accuracy_m = parse_finite(fields[4])
        .filter(|v| *v >= 0.0)
        .ok_or_else(|| Malformed::Accuracy(fields[4].to_string()))?;
    let point = GeoPoint::new(lat, lon).map_err(|_| Malformed::Latitude(fields[2].to_string()))?;
    Ok(PositionReport {
        device_id: device_id.to_string(),
        epoch_s,
        point,
        accuracy_m,
    })
}

/// Keep iff `accuracy_m <= threshold_m`.
pub fn accuracy_filter(r: &PositionReport, threshold_m: f64) -> bool {
    r.accuracy_m <= threshold_m
}

/// Opens a file, transparently decompressing when the name ends in `.gz`.
pub fn open_text(path: &Path) -> Result<Box<dyn BufRead + Send>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let gz = path.extension().is_some_and(|e| e == "gz");
    let inner: Box<dyn Read + Send> = if gz {
        Box::new(MultiGzDecoder::new(file))
    } else {
        Box::new(file)
    };
    Ok(Box::new(BufReader::with_capacity(1 << 16, inner)))
}

fn looks_like_header(line: &str) -> bool {
    let mut fields = line.split(',');
    fields.next();
    matches!(fields.next(), Some(f) if f.trim().parse::<i64>().is_err())
}

/// Streams the accepted reports of one shard in file order.
///
/// Counters are available from [`ShardReader::stats`] at any point and are
/// final once the iterator is exhausted. IO and decompression failures are
/// yielded as errors and end the stream.
pub struct ShardReader {
    path: PathBuf,
    input: Box<dyn BufRead + Send>,
    threshold_m: f64,
    buf: Vec<u8>,
    first: bool,
    done: bool,
    stats: IngestStats,
}

impl ShardReader {
    pub fn open(path: impl AsRef<Path>, threshold_m: f64) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let input = open_text(&path)?;
        Ok(ShardReader {
            path,
            input,
            threshold_m,
            buf: Vec::with_capacity(128),
            first: true,
            done: false,
            stats: IngestStats::default(),
        })
    }

    pub fn stats(&self) -> IngestStats {
        self.stats
    }
}

impl Iterator for ShardReader {
    type Item = Result<PositionReport>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            self.buf.clear();
            match self.input.read_until(b'\n', &mut self.buf) {
                Ok(0) => {
                    self.done = true;
                    return None;
                }
                Ok(_) => {}
                Err(e) => {
                    self.done = true;
                    return Some(Err(Error::io(&self.path, e)));
                }
            }
            let mut bytes = &self.buf[..];
            if let Some(b) = bytes.strip_suffix(b"\n") {
                bytes = b;
            }
            if let Some(b) = bytes.strip_suffix(b"\r") {
                bytes = b;
            }
            let first = std::mem::replace(&mut self.first, false);
            let parsed = match std::str::from_utf8(bytes) {
                Ok(line) => {
                    if first && looks_like_header(line) {
                        continue;
                    }
                    parse_report_line(line)
                }
                Err(_) => Err(Malformed::Encoding),
            };
            self.stats.lines_read += 1;
            match parsed {
                Ok(r) if accuracy_filter(&r, self.threshold_m) => {
                    self.stats.reports_accepted += 1;
                    return Some(Ok(r));
                }
                Ok(_) => self.stats.reports_rejected_accuracy += 1,
                Err(reason) => {
                    debug!(
                        "{}:{}: malformed line: {reason}",
                        self.path.display(),
                        self.stats.lines_read
                    );
                    self.stats.lines_malformed += 1;
                }
            }
        }
        None
    }
}

/// Reads a whole shard into memory.
pub fn read_shard(path: impl AsRef<Path>, threshold_m: f64) -> Result<(Vec<PositionReport>, IngestStats)> {
    let mut reader = ShardReader::open(path, threshold_m)?;
    let reports = reader.by_ref().collect::<Result<Vec<_>>>()?;
    Ok((reports, reader.stats()))
}
