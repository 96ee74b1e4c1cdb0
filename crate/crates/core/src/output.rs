//! NDJSON and CSV serialisation of region-day statistics.
//!
//! Numbers are written with fixed precision (`m50` and the per-metric
//! summaries to 3 decimals, `m50_index` and `pct_change` to 1) so output is
//! byte-stable. Records hold the already-rounded values, which makes
//! `parse(serialize(x)) == x` hold exactly.

use std::fmt::Write as _;
use std::io::{BufRead, Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::aggregate::RegionDayStats;
use crate::error::{Error, Result};
use crate::geocode::AdminLevel;

pub const CSV_HEADER: [&str; 9] = [
    "country_code",
    "admin_level",
    "admin1",
    "admin2",
    "region_id",
    "date",
    "samples",
    "m50",
    "m50_index",
];

pub const DETAIL_COLUMNS: [&str; 12] = [
    "pct_change",
    "m_max_mean",
    "m_max_q1",
    "m_max_q3",
    "m_bb_mean",
    "m_bb_median",
    "m_bb_q1",
    "m_bb_q3",
    "m_ch_mean",
    "m_ch_median",
    "m_ch_q1",
    "m_ch_q3",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detail {
    pub pct_change: Option<f64>,
    pub m_max_mean: f64,
    pub m_max_q1: f64,
    pub m_max_q3: f64,
    pub m_bb_mean: f64,
    pub m_bb_median: f64,
    pub m_bb_q1: f64,
    pub m_bb_q3: f64,
    pub m_ch_mean: f64,
    pub m_ch_median: f64,
    pub m_ch_q1: f64,
    pub m_ch_q3: f64,
}

impl Detail {
    fn values(&self) -> [Option<f64>; 12] {
        [
            self.pct_change,
            Some(self.m_max_mean),
            Some(self.m_max_q1),
            Some(self.m_max_q3),
            Some(self.m_bb_mean),
            Some(self.m_bb_median),
            Some(self.m_bb_q1),
            Some(self.m_bb_q3),
            Some(self.m_ch_mean),
            Some(self.m_ch_median),
            Some(self.m_ch_q1),
            Some(self.m_ch_q3),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub country_code: String,
    pub admin_level: AdminLevel,
    pub admin1: String,
    pub admin2: String,
    pub region_id: String,
    pub date: NaiveDate,
    pub samples: u64,
    pub m50: f64,
    pub m50_index: Option<f64>,
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Detail>,
}

/// Rounds to `decimals` places, folding `-0.0` into `0.0`.
pub fn round_to(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    let r = (x * scale).round() / scale;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn km(x: f64) -> f64 {
    round_to(x, 3)
}

fn index(x: f64) -> f64 {
    round_to(x, 1)
}

impl OutputRecord {
    pub fn from_stats(s: &RegionDayStats, verbose: bool) -> OutputRecord {
        let m50_index = s.m50_index.map(index);
        let detail = verbose.then(|| Detail {
            pct_change: m50_index.map(|i| index(i - 100.0)),
            m_max_mean: km(s.m_max.mean),
            m_max_q1: km(s.m_max.q1),
            m_max_q3: km(s.m_max.q3),
            m_bb_mean: km(s.m_bb.mean),
            m_bb_median: km(s.m_bb.median),
            m_bb_q1: km(s.m_bb.q1),
            m_bb_q3: km(s.m_bb.q3),
            m_ch_mean: km(s.m_ch.mean),
            m_ch_median: km(s.m_ch.median),
            m_ch_q1: km(s.m_ch.q1),
            m_ch_q3: km(s.m_ch.q3),
        });
        OutputRecord {
            country_code: s.region.country_code.clone(),
            admin_level: s.level(),
            admin1: s.region.admin1.clone(),
            admin2: s.region.admin2.clone(),
            region_id: s.region.region_id.clone(),
            date: s.date,
            samples: s.samples,
            m50: km(s.m50),
            m50_index,
            detail,
        }
    }

    pub fn sort_key(&self) -> (&str, &str, &str, NaiveDate, &str) {
        (&self.country_code, &self.admin1, &self.admin2, self.date, &self.region_id)
    }

    /// Column values in output order, already formatted.
    pub fn cells(&self) -> Vec<String> {
        let mut cells = vec![
            self.country_code.clone(),
            self.admin_level.as_str().to_string(),
            self.admin1.clone(),
            self.admin2.clone(),
            self.region_id.clone(),
            self.date.to_string(),
            self.samples.to_string(),
            format!("{:.3}", self.m50),
            self.m50_index.map(|v| format!("{v:.1}")).unwrap_or_default(),
        ];
        if let Some(d) = &self.detail {
            for (i, v) in d.values().into_iter().enumerate() {
                let decimals = if i == 0 { 1 } else { 3 };
                cells.push(v.map(|v| format!("{v:.decimals$}")).unwrap_or_default());
            }
        }
        cells
    }
}

pub fn sort_records(records: &mut [OutputRecord]) {
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

fn json_str(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("strings always serialise"));
}

/// One JSON object per record with keys in fixed order; absent index is `null`.
pub fn ndjson_line(r: &OutputRecord) -> String {
    let mut line = String::with_capacity(192);
    let strings = [
        ("country_code", r.country_code.as_str()),
        ("admin_level", r.admin_level.as_str()),
        ("admin1", r.admin1.as_str()),
        ("admin2", r.admin2.as_str()),
        ("region_id", r.region_id.as_str()),
    ];
    line.push('{');
    for (k, v) in strings {
        let _ = write!(line, "\"{k}\":");
        json_str(&mut line, v);
        line.push(',');
    }
    let _ = write!(line, "\"date\":\"{}\",\"samples\":{},\"m50\":{:.3},\"m50_index\":", r.date, r.samples, r.m50);
    match r.m50_index {
        Some(v) => {
            let _ = write!(line, "{v:.1}");
        }
        None => line.push_str("null"),
    }
    if let Some(d) = &r.detail {
        for (i, (k, v)) in DETAIL_COLUMNS.iter().zip(d.values()).enumerate() {
            let _ = write!(line, ",\"{k}\":");
            match v {
                Some(v) if i == 0 => {
                    let _ = write!(line, "{v:.1}");
                }
                Some(v) => {
                    let _ = write!(line, "{v:.3}");
                }
                None => line.push_str("null"),
            }
        }
    }
    line.push_str("}\n");
    line
}

pub fn write_ndjson(records: &[OutputRecord], mut sink: impl Write) -> std::io::Result<()> {
    for r in records {
        sink.write_all(ndjson_line(r).as_bytes())?;
    }
    sink.flush()
}

/// Header row then one row per record, RFC 4180 quoting, LF line endings.
pub fn write_csv(records: &[OutputRecord], sink: impl Write) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    let verbose = records.first().is_some_and(|r| r.detail.is_some());
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if verbose {
        header.extend(DETAIL_COLUMNS);
    }
    w.write_record(&header)?;
    for r in records {
        w.write_record(r.cells())?;
    }
    w.flush()
}

pub fn read_ndjson(reader: impl BufRead) -> Result<Vec<OutputRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::data(format!("line {}: {e}", i + 1)))?;
        if line.is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::data(format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

#[derive(Deserialize)]
struct CsvRow {
    country_code: String,
    admin_level: AdminLevel,
    admin1: String,
    admin2: String,
    region_id: String,
    date: NaiveDate,
    samples: u64,
    m50: f64,
    m50_index: Option<f64>,
    pct_change: Option<f64>,
    m_max_mean: Option<f64>,
    m_max_q1: Option<f64>,
    m_max_q3: Option<f64>,
    m_bb_mean: Option<f64>,
    m_bb_median: Option<f64>,
    m_bb_q1: Option<f64>,
    m_bb_q3: Option<f64>,
    m_ch_mean: Option<f64>,
    m_ch_median: Option<f64>,
    m_ch_q1: Option<f64>,
    m_ch_q3: Option<f64>,
}

pub fn read_csv(reader: impl Read) -> Result<Vec<OutputRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let verbose = rdr
        .headers()
        .map_err(|e| Error::data(e.to_string()))?
        .iter()
        .any(|h| h == DETAIL_COLUMNS[1]);
    let mut out = Vec::new();
    for row in rdr.deserialize::<CsvRow>() {
        let r = row.map_err(|e| Error::data(e.to_string()))?;
        let missing = || Error::data(format!("row for {} {} lacks detail columns", r.region_id, r.date));
        let detail = if verbose {
            Some(Detail {
                pct_change: r.pct_change,
                m_max_mean: r.m_max_mean.ok_or_else(missing)?,
                m_max_q1: r.m_max_q1.ok_or_else(missing)?,
                m_max_q3: r.m_max_q3.ok_or_else(missing)?,
                m_bb_mean: r.m_bb_mean.ok_or_else(missing)?,
                m_bb_median: r.m_bb_median.ok_or_else(missing)?,
                m_bb_q1: r.m_bb_q1.ok_or_else(missing)?,
                m_bb_q3: r.m_bb_q3.ok_or_else(missing)?,
                m_ch_mean: r.m_ch_mean.ok_or_else(missing)?,
                m_ch_median: r.m_ch_median.ok_or_else(missing)?,
                m_ch_q1: r.m_ch_q1.ok_or_else(missing)?,
                m_ch_q3: r.m_ch_q3.ok_or_else(missing)?,
            })
        } else {
            None
        };
        out.push(OutputRecord {
            country_code: r.country_code,
            admin_level: r.admin_level,
            admin1: r.admin1,
            admin2: r.admin2,
            region_id: r.region_id,
            date: r.date,
            samples: r.samples,
            m50: r.m50,
            m50_index: r.m50_index,
            detail,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::Summary;
    use crate::geocode::RegionKey;
    use proptest::prelude::*;

    fn record(admin1: &str, admin2: &str, index: Option<f64>) -> OutputRecord {
        OutputRecord {
            country_code: "US".into(),
            admin_level: if admin2.is_empty() { AdminLevel::Admin1 } else { AdminLevel::Admin2 },
            admin1: admin1.into(),
            admin2: admin2.into(),
            region_id: "08001".into(),
            date: NaiveDate::from_ymd_opt(2020, 3, 16).unwrap(),
            samples: 42,
            m50: 5.2,
            m50_index: index,
            detail: None,
        }
    }

    fn to_string(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn ndjson_single_line() {
        let recs = [record("Alpha", "Ash", Some(31.0))];
        let text = to_string(|b| write_ndjson(&recs, b));
        assert_eq!(
            text,
            "{\"country_code\":\"US\",\"admin_level\":\"admin2\",\"admin1\":\"Alpha\",\"admin2\":\"Ash\",\
             \"region_id\":\"08001\",\"date\":\"2020-03-16\",\"samples\":42,\"m50\":5.200,\"m50_index\":31.0}\n"
        );
        let v: serde_json::Value = serde_json::from_str(text.trim_end()).unwrap();
        assert_eq!(v["m50"], 5.2);
    }

    #[test]
    fn ndjson_empty_and_null() {
        assert_eq!(to_string(|b| write_ndjson(&[], b)), "");
        let text = to_string(|b| write_ndjson(&[record("A", "", None)], b));
        assert!(text.contains("\"m50_index\":null"));
        assert!(text.contains("\"admin_level\":\"admin1\""));
    }

    #[test]
    fn csv_header_and_quoting() {
        let recs = [record("Lakes, North", "Elm", None)];
        let text = to_string(|b| write_csv(&recs, b));
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "country_code,admin_level,admin1,admin2,region_id,date,samples,m50,m50_index");
        assert_eq!(lines.next().unwrap(), "US,admin2,\"Lakes, North\",Elm,08001,2020-03-16,42,5.200,");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn formats_agree() {
        let mut recs = vec![record("Lakes, North", "Elm", Some(99.9)), record("Alpha", "", None)];
        sort_records(&mut recs);
        let nd = to_string(|b| write_ndjson(&recs, b));
        let cs = to_string(|b| write_csv(&recs, b));
        let a = read_ndjson(nd.as_bytes()).unwrap();
        let b = read_csv(cs.as_bytes()).unwrap();
        assert_eq!(a, recs);
        assert_eq!(b, recs);
    }

    #[test]
    fn verbose_round_trip() {
        let s = Summary { mean: 1.23456, median: 2.0, q1: 0.5, q3: 3.25159 };
        let stats = RegionDayStats {
            region: RegionKey { country_code: "US".into(), admin1: "A".into(), admin2: "B".into(), region_id: "1".into() },
            date: NaiveDate::from_ymd_opt(2020, 3, 2).unwrap(),
            samples: 3,
            m_max: s,
            m_bb: s,
            m_ch: s,
            m50: 2.0,
            m50_index: Some(99.96),
            pct_change: Some(-0.04),
        };
        let r = OutputRecord::from_stats(&stats, true);
        assert_eq!(r.m50_index, Some(100.0));
        assert_eq!(r.detail.unwrap().pct_change, Some(0.0));
        let nd = to_string(|b| write_ndjson(std::slice::from_ref(&r), b));
        assert!(nd.contains("\"pct_change\":0.0,\"m_max_mean\":1.235"));
        assert_eq!(read_ndjson(nd.as_bytes()).unwrap(), vec![r.clone()]);
        let cs = to_string(|b| write_csv(std::slice::from_ref(&r), b));
        assert_eq!(read_csv(cs.as_bytes()).unwrap(), vec![r]);
    }

    #[test]
    fn unicode_and_quotes_survive() {
        let recs = [record("Nuevo \"León\"", "Añil", Some(12.5))];
        let nd = to_string(|b| write_ndjson(&recs, b));
        assert_eq!(read_ndjson(nd.as_bytes()).unwrap(), recs);
        let cs = to_string(|b| write_csv(&recs, b));
        assert_eq!(read_csv(cs.as_bytes()).unwrap(), recs);
    }

    proptest! {
        #[test]
        fn round_trip(m50 in 0.0..1e4f64, idx in prop::option::of(0.0..1e4f64), name in "[ -~]{1,12}", samples in 1u64..1_000_000) {
            let mut r = record(&name, "X", idx.map(|v| round_to(v, 1)));
            r.m50 = round_to(m50, 3);
            r.samples = samples;
            let recs = [r];
            let nd = to_string(|b| write_ndjson(&recs, b));
            prop_assert_eq!(read_ndjson(nd.as_bytes()).unwrap(), recs.to_vec());
            let cs = to_string(|b| write_csv(&recs, b));
            prop_assert_eq!(read_csv(cs.as_bytes()).unwrap(), recs.to_vec());
        }
    }
}
