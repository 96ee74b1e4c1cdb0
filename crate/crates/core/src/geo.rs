//! Spherical distance, solar time offsets and planar (lon, lat) area measures.
//!
//! Areas are computed in square degrees on the raw coordinates and turned
//! into a linear measure with the fixed `111 * sqrt(A) * cos(lat)` rule.
//! Longitudes of a point set that straddles the antimeridian are unwrapped
//! before any planar computation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// IUGG mean Earth radius.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Kilometres per degree in the area-to-linear conversion.
pub const KM_PER_DEGREE: f64 = 111.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("latitude {0} outside [-90, 90]")]
    Latitude(f64),
    #[error("longitude {0} outside [-180, 180]")]
    Longitude(f64),
    #[error("no points")]
    NoPoints,
}

/// A position on the sphere in degrees.
///
/// Longitude is kept in `[-180, 180)`; an input of exactly `180` is folded
/// to `-180`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        if !(-90.0..=90.0).contains(&lat) {
            return Err(GeoError::Latitude(lat));
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(GeoError::Longitude(lon));
        }
        let lon = if lon == 180.0 { -180.0 } else { lon };
        Ok(GeoPoint { lat, lon })
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }

    /// Total order on (lat, lon), used for tie breaking.
    pub fn total_cmp(&self, other: &GeoPoint) -> std::cmp::Ordering {
        self.lat
            .total_cmp(&other.lat)
            .then(self.lon.total_cmp(&other.lon))
    }
}

/// Area in square degrees of (lon, lat) space.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DegreeArea(f64);

impl DegreeArea {
    pub const ZERO: DegreeArea = DegreeArea(0.0);

    /// Negative, NaN and signed-zero inputs all collapse to `0.0`.
    pub fn new(value: f64) -> Self {
        if value > 0.0 {
            DegreeArea(value)
        } else {
            DegreeArea(0.0)
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn min(self, other: DegreeArea) -> DegreeArea {
        if other.0 < self.0 {
            other
        } else {
            self
        }
    }
}

/// A point in the plane, `x` = longitude and `y` = latitude in degrees.
///
/// Unlike [`GeoPoint`], `x` may exceed 180 after antimeridian unwrapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

/// Great-circle distance between two points.
pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let phi1 = a.lat.to_radians();
    let phi2 = b.lat.to_radians();
    let dphi = (b.lat - a.lat).to_radians();
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    // h can creep past 1 by an ulp for antipodal points
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Approximate local solar time offset, `round(lon / 15)` rounded half away
/// from zero.
pub fn solar_tz_offset_hours(lon: f64) -> i32 {
    (lon / 15.0).round() as i32
}

/// Projects points into the plane, adding 360 to negative longitudes when
/// the raw longitude span exceeds 180 degrees.
pub fn unwrap_longitudes(points: &[GeoPoint]) -> Vec<PlanarPoint> {
    let (min_lon, max_lon) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.lon), hi.max(p.lon))
        });
    let wrap = max_lon - min_lon > 180.0;
    points
        .iter()
        .map(|p| PlanarPoint {
            x: if wrap && p.lon < 0.0 { p.lon + 360.0 } else { p.lon },
            y: p.lat,
        })
        .collect()
}

/// `(max lat - min lat) * (max lon - min lon)` after unwrapping.
pub fn bounding_box_area(points: &[GeoPoint]) -> Result<DegreeArea, GeoError> {
    if points.is_empty() {
        return Err(GeoError::NoPoints);
    }
    Ok(planar_box_area(&unwrap_longitudes(points)))
}

pub(crate) fn planar_box_area(points: &[PlanarPoint]) -> DegreeArea {
    let mut min_x = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for p in points {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    if points.is_empty() {
        return DegreeArea::ZERO;
    }
    DegreeArea::new((max_y - min_y) * (max_x - min_x))
}

/// Counterclockwise convex hull of the points in (lon, lat) space.
///
/// Longitudes are unwrapped first, so returned `x` values can exceed 180.
/// Duplicates and collinear boundary points are dropped; degenerate inputs
/// yield one or two vertices.
pub fn convex_hull(points: &[GeoPoint]) -> Vec<PlanarPoint> {
    convex_hull_planar(unwrap_longitudes(points))
}

/// Andrew's monotone chain on planar points.
pub fn convex_hull_planar(mut pts: Vec<PlanarPoint>) -> Vec<PlanarPoint> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }

    let mut hull: Vec<PlanarPoint> = Vec::with_capacity(pts.len() + 1);
    // lower chain
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    // upper chain
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    // last point repeats the first
    hull.pop();
    hull
}

/// z component of `(b - a) x (c - a)`; positive for a left turn.
#[inline]
pub(crate) fn cross(a: PlanarPoint, b: PlanarPoint, c: PlanarPoint) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Shoelace area of a simple polygon given by its ordered vertices.
///
/// Coordinates are shifted to the lower-left corner of the vertex set before
/// summing to limit cancellation. Fewer than three vertices give zero.
pub fn polygon_area(vertices: &[PlanarPoint]) -> DegreeArea {
    if vertices.len() < 3 {
        return DegreeArea::ZERO;
    }
    let ox = vertices.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let oy = vertices.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let twice: f64 = vertices
        .iter()
        .zip(vertices.iter().cycle().skip(1))
        .map(|(a, b)| (a.x - ox) * (b.y - oy) - (b.x - ox) * (a.y - oy))
        .sum();
    DegreeArea::new(twice.abs() / 2.0)
}

/// `111 * sqrt(area) * cos(lat)`, with `cos` outside the root.
pub fn area_to_linear_km(area: DegreeArea, lat: f64) -> f64 {
    // cos(90 deg) is 6e-17 in floating point; the pole maps to zero
    let c = if lat.abs() >= 90.0 { 0.0 } else { lat.to_radians().cos() };
    KM_PER_DEGREE * area.value().sqrt() * c
}
