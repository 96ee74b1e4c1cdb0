//! Slow reference implementation of collation, eligibility and the mobility
//! measures. Nothing here calls into `geo`, `collate` or `metrics`.

use std::cmp::Ordering;

use chrono::NaiveDate;

use crate::geo::{DegreeArea, GeoPoint};
use crate::ingest::PositionReport;
use crate::metrics::{EligibilityRules, MobilityMetrics, Verdict};

const R_KM: f64 = 6371.0088;

fn rad(deg: f64) -> f64 {
    deg * std::f64::consts::PI / 180.0
}

/// atan2 form of the haversine formula.
pub fn great_circle_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let (p1, p2) = (rad(a.lat()), rad(b.lat()));
    let s_lat = (rad(b.lat() - a.lat()) / 2.0).sin();
    let s_lon = (rad(b.lon() - a.lon()) / 2.0).sin();
    let h = (s_lat * s_lat + p1.cos() * p2.cos() * s_lon * s_lon).clamp(0.0, 1.0);
    2.0 * R_KM * h.sqrt().atan2((1.0 - h).sqrt())
}

fn by_time(a: &PositionReport, b: &PositionReport) -> Ordering {
    if a.epoch_s != b.epoch_s {
        return a.epoch_s.cmp(&b.epoch_s);
    }
    for (x, y) in [
        (a.point.lat(), b.point.lat()),
        (a.point.lon(), b.point.lon()),
        (a.accuracy_m, b.accuracy_m),
    ] {
        match x.partial_cmp(&y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

/// Splits one device's reports into local days using the offset of its
/// earliest report.
pub fn oracle_device_days(reports: &[PositionReport]) -> Vec<(NaiveDate, i32, Vec<PositionReport>)> {
    let mut sorted = reports.to_vec();
    sorted.sort_by(by_time);
    let Some(first) = sorted.first() else {
        return Vec::new();
    };
    let offset = (first.point.lon() / 15.0).round() as i32;
    let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid");
    let mut out: Vec<(NaiveDate, i32, Vec<PositionReport>)> = Vec::new();
    for r in sorted {
        let shifted = r.epoch_s + i64::from(offset) * 3600;
        let day = shifted.div_euclid(86_400);
        let date = epoch + chrono::TimeDelta::days(day);
        match out.last_mut() {
            Some((d, _, v)) if *d == date => v.push(r),
            _ => out.push((date, offset, vec![r])),
        }
    }
    out
}

fn planar(points: &[GeoPoint]) -> Vec<(f64, f64)> {
    let lo = points.iter().map(|p| p.lon()).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.lon()).fold(f64::NEG_INFINITY, f64::max);
    points
        .iter()
        .map(|p| {
            let x = if hi - lo > 180.0 && p.lon() < 0.0 { p.lon() + 360.0 } else { p.lon() };
            (x, p.lat())
        })
        .collect()
}

/// Extreme points of the set: endpoints of every directed pair that has all
/// other points strictly to its left or on the closed segment.
pub fn brute_force_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut uniq: Vec<(f64, f64)> = Vec::new();
    for &p in pts {
        if !uniq.contains(&p) {
            uniq.push(p);
        }
    }
    if uniq.len() <= 2 {
        return uniq;
    }
    let mut keep = vec![false; uniq.len()];
    for i in 0..uniq.len() {
        for j in 0..uniq.len() {
            if i == j {
                continue;
            }
            let (a, b) = (uniq[i], uniq[j]);
            let edge = uniq.iter().all(|&c| {
                let z = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
                if z != 0.0 {
                    return z > 0.0;
                }
                let between_x = (c.0 - a.0) * (c.0 - b.0) <= 0.0;
                let between_y = (c.1 - a.1) * (c.1 - b.1) <= 0.0;
                between_x && between_y
            });
            if edge {
                keep[i] = true;
                keep[j] = true;
            }
        }
    }
    uniq.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect()
}

/// Area of the convex polygon spanned by `vertices` (any order).
fn convex_area(vertices: &[(f64, f64)]) -> f64 {
    if vertices.len() < 3 {
        return 0.0;
    }
    let n = vertices.len() as f64;
    let cx = vertices.iter().map(|v| v.0).sum::<f64>() / n;
    let cy = vertices.iter().map(|v| v.1).sum::<f64>() / n;
    let mut local: Vec<(f64, f64)> = vertices.iter().map(|v| (v.0 - cx, v.1 - cy)).collect();
    local.sort_by(|a, b| a.1.atan2(a.0).partial_cmp(&b.1.atan2(b.0)).unwrap_or(Ordering::Equal));
    let mut twice = 0.0;
    for i in (0..local.len()).rev() {
        let (x0, y0) = local[i];
        let (x1, y1) = local[(i + 1) % local.len()];
        twice += x0 * y1 - x1 * y0;
    }
    twice.abs() * 0.5
}

/// Eligibility and metrics for one device-day, computed naively.
pub fn oracle_metrics(
    reports: &[PositionReport],
    rules: &EligibilityRules,
    trim_fraction: f64,
) -> Result<MobilityMetrics, Verdict> {
    let mut rs = reports.to_vec();
    rs.sort_by(by_time);
    let n = rs.len();
    if n < rules.min_reports || n == 0 {
        return Err(Verdict::TooFewReports);
    }
    let span_s = rs[n - 1].epoch_s - rs[0].epoch_s;
    if (span_s as f64) < rules.min_span_hours * 3600.0 {
        return Err(Verdict::ShortSpan);
    }

    let anchor = rs[0].point;
    let mut dist: Vec<f64> = rs.iter().map(|r| great_circle_km(anchor, r.point)).collect();
    dist.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    let drop = ((n as f64) * trim_fraction).floor() as usize;
    let m_max = dist.iter().skip(drop.min(n - 1)).fold(0.0f64, |m, &d| m.max(d));

    let points: Vec<GeoPoint> = rs.iter().map(|r| r.point).collect();
    let xy = planar(&points);
    let width = xy.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max)
        - xy.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let height = xy.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
        - xy.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let a_bb = height * width;
    let a_ch = convex_area(&brute_force_hull(&xy));

    let mut lat_sum = 0.0;
    for p in points.iter().rev() {
        lat_sum += p.lat();
    }
    let cos_lat = rad(lat_sum / n as f64).cos();
    let linear = |a: f64| 111.0 * a.sqrt() * cos_lat;

    Ok(MobilityMetrics {
        m_max,
        m_bb: linear(a_bb),
        m_ch: linear(a_ch),
        a_bb: DegreeArea::new(a_bb),
        a_ch: DegreeArea::new(a_ch),
        report_count: n,
        span_hours: span_s as f64 / 3600.0,
        canonical_point: anchor,
    })
}

/// `|a - b| <= tol * max(|a|, |b|)`; two zeros agree.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Field-by-field comparison at relative tolerance `tol`, describing the
/// first disagreement.
pub fn compare_metrics(pipeline: &MobilityMetrics, oracle: &MobilityMetrics, tol: f64) -> Result<(), String> {
    let pairs = [
        ("m_max", pipeline.m_max, oracle.m_max),
        ("m_bb", pipeline.m_bb, oracle.m_bb),
        ("m_ch", pipeline.m_ch, oracle.m_ch),
        ("a_bb", pipeline.a_bb.value(), oracle.a_bb.value()),
        ("a_ch", pipeline.a_ch.value(), oracle.a_ch.value()),
        ("span_hours", pipeline.span_hours, oracle.span_hours),
    ];
    for (name, p, o) in pairs {
        if !rel_close(p, o, tol) {
            return Err(format!("{name}: pipeline {p:e} vs oracle {o:e}"));
        }
    }
    if pipeline.report_count != oracle.report_count {
        return Err(format!("report_count {} vs {}", pipeline.report_count, oracle.report_count));
    }
    if pipeline.canonical_point != oracle.canonical_point {
        return Err("canonical point differs".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rep(t: i64, lat: f64, lon: f64) -> PositionReport {
        PositionReport {
            device_id: "o".into(),
            epoch_s: t,
            point: GeoPoint::new(lat, lon).unwrap(),
            accuracy_m: 3.0,
        }
    }

    #[test]
    fn identical_points_give_zeros() {
        let rs: Vec<_> = (0..12).map(|i| rep(i * 3000, 45.0, 7.0)).collect();
        let m = oracle_metrics(&rs, &EligibilityRules::default(), 0.1).unwrap();
        assert_eq!((m.m_max, m.m_bb, m.m_ch), (0.0, 0.0, 0.0));
    }

    #[test]
    fn square_trajectory() {
        let corners = [(0.0, 0.0), (0.0, 0.01), (0.01, 0.01), (0.01, 0.0)];
        let rs: Vec<_> = (0..12).map(|i| {
            let (lat, lon) = corners[i % 4];
            rep(i as i64 * 3000, lat, lon)
        }).collect();
        let m = oracle_metrics(&rs, &EligibilityRules::default(), 0.1).unwrap();
        assert!((m.m_bb - 1.11).abs() < 1e-8);
        assert!((m.m_ch - 1.11).abs() < 1e-8);
    }

    #[test]
    fn verdicts() {
        let rs: Vec<_> = (0..9).map(|i| rep(i * 5000, 0.0, 0.0)).collect();
        assert_eq!(oracle_metrics(&rs, &EligibilityRules::default(), 0.1), Err(Verdict::TooFewReports));
        let rs: Vec<_> = (0..10).map(|i| rep(i * 3000, 0.0, 0.0)).collect();
        assert_eq!(oracle_metrics(&rs, &EligibilityRules::default(), 0.1), Err(Verdict::ShortSpan));
        let rs: Vec<_> = (0..10).map(|i| rep(i * 3200, 0.0, 0.0)).collect();
        assert!(oracle_metrics(&rs, &EligibilityRules::default(), 0.1).is_ok());
    }

    #[test]
    fn hull_of_grid_keeps_corners_only() {
        let pts: Vec<(f64, f64)> = (0..25).map(|i| ((i / 5) as f64, (i % 5) as f64)).collect();
        let mut h = brute_force_hull(&pts);
        h.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(h, vec![(0.0, 0.0), (0.0, 4.0), (4.0, 0.0), (4.0, 4.0)]);
        assert_eq!(convex_area(&h), 16.0);
    }

    #[test]
    fn device_days_use_first_offset() {
        let days = oracle_device_days(&[rep(1584316800 - 1800, 0.0, 7.6), rep(1584316800 - 1900, 0.0, 7.4)]);
        assert_eq!(days.len(), 1);
        assert_eq!(days[0].1, 0);
    }
}
