//! Device-day eligibility and the three mobility measures.

use serde::{Deserialize, Serialize};

use crate::collate::DeviceDay;
use crate::geo::{
    area_to_linear_km, convex_hull_planar, haversine_km, planar_box_area, polygon_area,
    unwrap_longitudes, DegreeArea, GeoPoint,
};

pub const DEFAULT_MIN_REPORTS: usize = 10;
pub const DEFAULT_MIN_SPAN_HOURS: f64 = 8.0;
pub const DEFAULT_TRIM_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EligibilityRules {
    pub min_reports: usize,
    pub min_span_hours: f64,
}

impl Default for EligibilityRules {
    fn default() -> Self {
        EligibilityRules {
            min_reports: DEFAULT_MIN_REPORTS,
            min_span_hours: DEFAULT_MIN_SPAN_HOURS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Eligible,
    TooFewReports,
    ShortSpan,
}

/// Seconds between the first and last report.
pub fn span_seconds(dd: &DeviceDay) -> i64 {
    match (dd.reports.first(), dd.reports.last()) {
        (Some(a), Some(b)) => b.epoch_s - a.epoch_s,
        _ => 0,
    }
}

/// Report count is checked before span; both thresholds are inclusive.
pub fn eligibility(dd: &DeviceDay, rules: &EligibilityRules) -> Verdict {
    if dd.reports.len() < rules.min_reports {
        Verdict::TooFewReports
    } else if (span_seconds(dd) as f64) < rules.min_span_hours * 3600.0 {
        Verdict::ShortSpan
    } else {
        Verdict::Eligible
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilityMetrics {
    pub m_max: f64,
    pub m_bb: f64,
    pub m_ch: f64,
    pub a_bb: DegreeArea,
    pub a_ch: DegreeArea,
    pub report_count: usize,
    pub span_hours: f64,
    pub canonical_point: GeoPoint,
}

/// Number of largest distances discarded for `n` reports.
pub fn trim_count(n: usize, trim_fraction: f64) -> usize {
    ((trim_fraction * n as f64).floor() as usize).min(n.saturating_sub(1))
}

/// Largest distance from the first report after dropping the top
/// `floor(trim_fraction * n)` distances.
pub fn max_distance_mobility(dd: &DeviceDay, trim_fraction: f64) -> f64 {
    let Some(first) = dd.reports.first() else {
        return 0.0;
    };
    let mut d: Vec<f64> = dd
        .reports
        .iter()
        .map(|r| haversine_km(first.point, r.point))
        .collect();
    let k = trim_count(d.len(), trim_fraction);
    // k-th largest, i.e. the max of what remains
    let (_, kth, _) = d.select_nth_unstable_by(k, |a, b| b.total_cmp(a));
    *kth
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaMobility {
    pub m_bb: f64,
    pub m_ch: f64,
    pub a_bb: DegreeArea,
    pub a_ch: DegreeArea,
}

/// Mean latitude of the day's reports.
pub fn mean_latitude(dd: &DeviceDay) -> f64 {
    if dd.reports.is_empty() {
        return 0.0;
    }
    dd.reports.iter().map(|r| r.point.lat()).sum::<f64>() / dd.reports.len() as f64
}

pub fn box_and_hull_mobility(dd: &DeviceDay) -> AreaMobility {
    let points: Vec<GeoPoint> = dd.reports.iter().map(|r| r.point).collect();
    let planar = unwrap_longitudes(&points);
    let a_bb = planar_box_area(&planar);
    // the hull lies inside the box; rounding may push the shoelace sum past it
    let a_ch = polygon_area(&convex_hull_planar(planar)).min(a_bb);
    let lat = mean_latitude(dd);
    AreaMobility {
        m_bb: area_to_linear_km(a_bb, lat),
        m_ch: area_to_linear_km(a_ch, lat),
        a_bb,
        a_ch,
    }
}

/// Location of the first report of the local day.
pub fn canonical_position(dd: &DeviceDay) -> Option<GeoPoint> {
    dd.reports.first().map(|r| r.point)
}

/// Full measure set for a device-day that has already passed eligibility.
pub fn compute_metrics(dd: &DeviceDay, trim_fraction: f64) -> Option<MobilityMetrics> {
    let canonical_point = canonical_position(dd)?;
    let areas = box_and_hull_mobility(dd);
    Some(MobilityMetrics {
        m_max: max_distance_mobility(dd, trim_fraction),
        m_bb: areas.m_bb,
        m_ch: areas.m_ch,
        a_bb: areas.a_bb,
        a_ch: areas.a_ch,
        report_count: dd.reports.len(),
        span_hours: span_seconds(dd) as f64 / 3600.0,
        canonical_point,
    })
}

/// Eligibility and, for eligible days, metrics.
pub fn evaluate(
    dd: &DeviceDay,
    rules: &EligibilityRules,
    trim_fraction: f64,
) -> Result<MobilityMetrics, Verdict> {
    match eligibility(dd, rules) {
        Verdict::Eligible => compute_metrics(dd, trim_fraction).ok_or(Verdict::TooFewReports),
        v => Err(v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collate::{build_device_days, SpillRecord};
    use crate::ingest::PositionReport;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn day(points: &[(i64, f64, f64)]) -> DeviceDay {
        let mut reports: Vec<PositionReport> = points
            .iter()
            .map(|&(t, lat, lon)| PositionReport {
                device_id: "d".into(),
                epoch_s: t,
                point: GeoPoint::new(lat, lon).unwrap(),
                accuracy_m: 1.0,
            })
            .collect();
        reports.sort_by(|a, b| a.sort_key_cmp(b));
        DeviceDay {
            device_id: "d".into(),
            local_date: NaiveDate::from_ymd_opt(2020, 3, 2).unwrap(),
            tz_offset_hours: 0,
            reports,
        }
    }

    fn spaced(n: usize, span_s: i64) -> DeviceDay {
        let pts: Vec<_> = (0..n)
            .map(|i| (i as i64 * span_s / (n as i64 - 1).max(1), 0.0, 0.0))
            .collect();
        day(&pts)
    }

    #[test]
    fn eligibility_thresholds() {
        let rules = EligibilityRules::default();
        assert_eq!(eligibility(&spaced(9, 36_000), &rules), Verdict::TooFewReports);
        assert_eq!(eligibility(&spaced(10, 28_764), &rules), Verdict::ShortSpan);
        assert_eq!(eligibility(&spaced(10, 28_800), &rules), Verdict::Eligible);
        assert_eq!(eligibility(&spaced(3, 100), &rules), Verdict::TooFewReports);
    }

    #[test]
    fn no_movement() {
        let dd = spaced(10, 30_000);
        assert_eq!(max_distance_mobility(&dd, 0.1), 0.0);
        let a = box_and_hull_mobility(&dd);
        assert_eq!((a.m_bb, a.m_ch, a.a_bb.value(), a.a_ch.value()), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn outlier_trimmed() {
        let mut pts: Vec<_> = (0..9).map(|i| (i * 3600, 0.001 * i as f64, 0.0)).collect();
        pts.push((9 * 3600, 0.9, 0.0)); // ~100 km away
        let dd = day(&pts);
        let m = max_distance_mobility(&dd, 0.1);
        // oracle: sorted distances, drop floor(0.1 * 10) = 1 from the top
        let first = dd.reports[0].point;
        let mut d: Vec<f64> = dd.reports.iter().map(|r| haversine_km(first, r.point)).collect();
        d.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(m, d[1]);
        assert!(m <= 1.0);
        assert!(max_distance_mobility(&dd, 0.0) > 99.0);
    }

    #[test]
    fn trim_count_floor() {
        assert_eq!(trim_count(19, 0.1), 1);
        assert_eq!(trim_count(20, 0.1), 2);
        assert_eq!(trim_count(9, 0.1), 0);
        assert_eq!(trim_count(1, 0.99), 0);
        for n in 1..100_000usize {
            assert_eq!(trim_count(n, 0.1), n / 10, "n = {n}");
        }
    }

    #[test]
    fn square_at_equator() {
        let dd = day(&[(0, 0.0, 0.0), (1, 0.0, 0.01), (2, 0.01, 0.01), (3, 0.01, 0.0)]);
        let a = box_and_hull_mobility(&dd);
        // mean latitude 0.005 deg; cos is 1 - 4e-9
        assert!((a.m_bb - 1.11).abs() < 1e-8, "{}", a.m_bb);
        assert!((a.m_ch - 1.11).abs() < 1e-8, "{}", a.m_ch);
    }

    #[test]
    fn canonical_is_first_with_tie_rule() {
        let dd = day(&[(5, 2.0, 2.0), (5, 1.0, 3.0), (9, 0.0, 0.0)]);
        assert_eq!(canonical_position(&dd).unwrap(), GeoPoint::new(1.0, 3.0).unwrap());
    }

    fn arb_day() -> impl Strategy<Value = Vec<(i64, f64, f64)>> {
        prop::collection::vec((18_000i64..86_000, 39.5..40.5f64, -75.5..-74.5f64), 1..50)
    }

    proptest! {
        #[test]
        fn hull_measure_never_exceeds_box(pts in arb_day()) {
            let a = box_and_hull_mobility(&day(&pts));
            prop_assert!(a.m_ch <= a.m_bb);
            prop_assert!(a.a_ch <= a.a_bb);
        }

        #[test]
        fn trimming_only_lowers(pts in arb_day(), trim in 0.0..0.5f64) {
            let dd = day(&pts);
            prop_assert!(max_distance_mobility(&dd, trim) <= max_distance_mobility(&dd, 0.0));
        }

        #[test]
        fn input_order_irrelevant(mut pts in arb_day(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let a = day(&pts);
            pts.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let recs: Vec<SpillRecord> = day(&pts).reports.into_iter().rev().map(SpillRecord::new).collect();
            let b = build_device_days(recs);
            prop_assert_eq!(b.len(), 1);
            prop_assert_eq!(compute_metrics(&b[0], 0.1).unwrap(), compute_metrics(&a, 0.1).unwrap());
        }

        #[test]
        fn longitude_translation_keeps_areas(pts in arb_day(), shift in -90.0..90.0f64) {
            let moved: Vec<_> = pts.iter().map(|&(t, lat, lon)| (t, lat, lon + shift)).collect();
            let a = box_and_hull_mobility(&day(&pts));
            let b = box_and_hull_mobility(&day(&moved));
            // shifting re-rounds each longitude by up to one ulp of ~200
            let tol = |x: f64| 1e-9 * x + 1e-13;
            prop_assert!((a.a_bb.value() - b.a_bb.value()).abs() <= tol(a.a_bb.value()));
            prop_assert!((a.a_ch.value() - b.a_ch.value()).abs() <= tol(a.a_ch.value()));
        }
    }
}
