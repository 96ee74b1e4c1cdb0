//! Keyed reduction of device-day metrics into per-(region, date) statistics,
//! the weekday baseline and the normalised `m50_index`.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geocode::{AdminLevel, RegionKey};
use crate::metrics::MobilityMetrics;

pub fn default_baseline_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 2, 17).expect("valid date")
}

pub fn default_baseline_end() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 3, 7).expect("valid date")
}

/// Type-7 quantile of ascending data: linear interpolation at `p * (n - 1)`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

impl Summary {
    /// Sorts `values` in place. Summation runs over the sorted values so the
    /// mean does not depend on arrival order.
    pub fn of(values: &mut [f64]) -> Summary {
        values.sort_by(f64::total_cmp);
        Summary {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            median: quantile_sorted(values, 0.5),
            q1: quantile_sorted(values, 0.25),
            q3: quantile_sorted(values, 0.75),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionDayStats {
    pub region: RegionKey,
    pub date: NaiveDate,
    pub samples: u64,
    pub m_max: Summary,
    pub m_bb: Summary,
    pub m_ch: Summary,
    pub m50: f64,
    pub m50_index: Option<f64>,
    pub pct_change: Option<f64>,
}

impl RegionDayStats {
    pub fn level(&self) -> AdminLevel {
        self.region.level()
    }
}

#[derive(Default)]
struct Samples {
    m_max: Vec<f64>,
    m_bb: Vec<f64>,
    m_ch: Vec<f64>,
}

/// Exact mean, median and quartiles of every metric per `(region, date)`.
///
/// Output is sorted by region key then date.
pub fn reduce_region_day<'a, I>(records: I) -> Vec<RegionDayStats>
where
    I: IntoIterator<Item = (RegionKey, NaiveDate, &'a MobilityMetrics)>,
{
    let mut groups: BTreeMap<(RegionKey, NaiveDate), Samples> = BTreeMap::new();
    for (region, date, m) in records {
        let s = groups.entry((region, date)).or_default();
        s.m_max.push(m.m_max);
        s.m_bb.push(m.m_bb);
        s.m_ch.push(m.m_ch);
    }
    groups
        .into_iter()
        .map(|((region, date), mut s)| {
            let m_max = Summary::of(&mut s.m_max);
            RegionDayStats {
                region,
                date,
                samples: s.m_max.len() as u64,
                m_max,
                m_bb: Summary::of(&mut s.m_bb),
                m_ch: Summary::of(&mut s.m_ch),
                m50: m_max.median,
                m50_index: None,
                pct_change: None,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineTable {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub weekdays_only: bool,
    pub norms: BTreeMap<RegionKey, f64>,
}

impl BaselineTable {
    pub fn norm(&self, region: &RegionKey) -> Option<f64> {
        self.norms.get(region).copied()
    }
}

pub fn is_weekday(date: NaiveDate) -> bool {
    !matches!(date.weekday(), Weekday::Sat | Weekday::Sun)
}

/// Per region, the median `m50` over weekday dates in `[start, end]`.
///
/// Regions with no weekday data or a zero median are left out. A window
/// containing no statistics at all is a configuration error.
pub fn compute_baseline(
    stats: &[RegionDayStats],
    start: NaiveDate,
    end: NaiveDate,
    weekdays_only: bool,
) -> Result<BaselineTable> {
    if start > end {
        return Err(Error::config(format!("baseline start {start} is after end {end}")));
    }
    let in_window: Vec<&RegionDayStats> = stats
        .iter()
        .filter(|s| s.date >= start && s.date <= end)
        .collect();
    if in_window.is_empty() {
        return Err(Error::config(format!(
            "baseline window {start}..{end} contains no data"
        )));
    }
    let mut per_region: BTreeMap<&RegionKey, Vec<f64>> = BTreeMap::new();
    for s in in_window {
        if !weekdays_only || is_weekday(s.date) {
            per_region.entry(&s.region).or_default().push(s.m50);
        }
    }
    let norms = per_region
        .into_iter()
        .filter_map(|(region, mut v)| {
            v.sort_by(f64::total_cmp);
            let norm = quantile_sorted(&v, 0.5);
            (norm > 0.0).then(|| (region.clone(), norm))
        })
        .collect();
    Ok(BaselineTable {
        start,
        end,
        weekdays_only,
        norms,
    })
}

/// `m50_index = 100 * m50 / m50_norm` and `pct_change = m50_index - 100`.
pub fn apply_index(stats: &mut RegionDayStats, baseline: &BaselineTable) {
    match baseline.norm(&stats.region) {
        Some(norm) => {
            let index = 100.0 * stats.m50 / norm;
            stats.m50_index = Some(index);
            stats.pct_change = Some(index - 100.0);
        }
        None => {
            stats.m50_index = None;
            stats.pct_change = None;
        }
    }
}
