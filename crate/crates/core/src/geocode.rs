//! Reverse geocoding against a local NDJSON gazetteer of administrative
//! polygons and populated places.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{haversine_km, GeoPoint};
use crate::ingest::open_text;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RegionKey {
    pub country_code: String,
    pub admin1: String,
    pub admin2: String,
    pub region_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdminLevel {
    Country,
    Admin1,
    Admin2,
}

impl AdminLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            AdminLevel::Country => "country",
            AdminLevel::Admin1 => "admin1",
            AdminLevel::Admin2 => "admin2",
        }
    }
}

impl RegionKey {
    pub fn level(&self) -> AdminLevel {
        if !self.admin2.is_empty() {
            AdminLevel::Admin2
        } else if !self.admin1.is_empty() {
            AdminLevel::Admin1
        } else {
            AdminLevel::Country
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let cc = self.country_code.as_bytes();
        if cc.len() != 2 || !cc.iter().all(u8::is_ascii_uppercase) {
            return Err(format!("bad country_code {:?}", self.country_code));
        }
        if !self.admin2.is_empty() && self.admin1.is_empty() {
            return Err("admin2 set without admin1".into());
        }
        if self.region_id.is_empty() {
            return Err("empty region_id".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl BBox {
    fn of<'a>(pts: impl IntoIterator<Item = &'a [f64; 2]>) -> BBox {
        let mut b = BBox {
            min_lon: f64::INFINITY,
            min_lat: f64::INFINITY,
            max_lon: f64::NEG_INFINITY,
            max_lat: f64::NEG_INFINITY,
        };
        for p in pts {
            b.min_lon = b.min_lon.min(p[0]);
            b.max_lon = b.max_lon.max(p[0]);
            b.min_lat = b.min_lat.min(p[1]);
            b.max_lat = b.max_lat.max(p[1]);
        }
        b
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        (self.min_lon..=self.max_lon).contains(&p.lon()) && (self.min_lat..=self.max_lat).contains(&p.lat())
    }

    pub fn area(&self) -> f64 {
        (self.max_lon - self.min_lon) * (self.max_lat - self.min_lat)
    }
}

/// Closed ring of `[lon, lat]` pairs, first point repeated at the end.
pub type Ring = Vec<[f64; 2]>;

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub key: RegionKey,
    /// Outer boundaries and holes alike; containment is even-odd over all rings.
    pub rings: Vec<Ring>,
    pub bbox: BBox,
    pub utc_offset_hours: Option<f64>,
}

impl Region {
    pub fn contains(&self, p: GeoPoint) -> bool {
        if !self.bbox.contains(p) {
            return false;
        }
        let mut inside = false;
        for ring in &self.rings {
            match ring_location(ring, p.lon(), p.lat()) {
                Location::Boundary => return true,
                Location::Inside => inside = !inside,
                Location::Outside => {}
            }
        }
        inside
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Place {
    pub name: String,
    pub point: GeoPoint,
    pub region_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Inside,
    Outside,
    Boundary,
}

/// Even-odd ray casting towards +x with exact on-edge detection.
pub fn ring_location(ring: &[[f64; 2]], x: f64, y: f64) -> Location {
    let mut inside = false;
    for w in ring.windows(2) {
        let ([ax, ay], [bx, by]) = (w[0], w[1]);
        let cross = (bx - ax) * (y - ay) - (by - ay) * (x - ax);
        if cross == 0.0 && x >= ax.min(bx) && x <= ax.max(bx) && y >= ay.min(by) && y <= ay.max(by) {
            return Location::Boundary;
        }
        if (ay > y) != (by > y) {
            let xi = ax + (y - ay) * (bx - ax) / (by - ay);
            if x < xi {
                inside = !inside;
            }
        }
    }
    if inside {
        Location::Inside
    } else {
        Location::Outside
    }
}

/// One line of the gazetteer file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum GazetteerRecord {
    Region {
        country_code: String,
        #[serde(default)]
        admin1: String,
        #[serde(default)]
        admin2: String,
        region_id: String,
        #[serde(default)]
        utc_offset_hours: Option<f64>,
        polygons: Vec<Ring>,
    },
    Place {
        name: String,
        lat: f64,
        lon: f64,
        region_id: String,
    },
}

#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    regions: Vec<Region>,
    places: Vec<Place>,
    admin1_ids: BTreeMap<(String, String), String>,
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        let z = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        z.partial_cmp(&0.0).map_or(0, |o| o as i8)
    };
    let within = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        c[0] >= a[0].min(b[0]) && c[0] <= a[0].max(b[0]) && c[1] >= a[1].min(b[1]) && c[1] <= a[1].max(b[1])
    };
    let (d1, d2, d3, d4) = (orient(q1, q2, p1), orient(q1, q2, p2), orient(p1, p2, q1), orient(p1, p2, q2));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && within(q1, q2, p1))
        || (d2 == 0 && within(q1, q2, p2))
        || (d3 == 0 && within(p1, p2, q1))
        || (d4 == 0 && within(p1, p2, q2))
}

fn validate_ring(ring: &[[f64; 2]]) -> std::result::Result<(), String> {
    if ring.len() < 4 {
        return Err(format!("ring has {} points, need at least 4", ring.len()));
    }
    if ring.first() != ring.last() {
        return Err("ring is not closed".into());
    }
    for &[lon, lat] in ring {
        if GeoPoint::new(lat, lon).is_err() {
            return Err(format!("vertex ({lon}, {lat}) out of range"));
        }
    }
    let n = ring.len() - 1;
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if !adjacent && segments_intersect(ring[i], ring[i + 1], ring[j], ring[j + 1]) {
                return Err(format!("ring self-intersects at edges {i} and {j}"));
            }
        }
    }
    Ok(())
}

impl Gazetteer {
    pub fn from_records(records: impl IntoIterator<Item = GazetteerRecord>) -> Result<Self> {
        let mut regions = Vec::new();
        let mut pending_places = Vec::new();
        let mut ids = HashSet::new();
        for rec in records {
            match rec {
                GazetteerRecord::Region {
                    country_code,
                    admin1,
                    admin2,
                    region_id,
                    utc_offset_hours,
                    polygons,
                } => {
                    let key = RegionKey {
                        country_code,
                        admin1,
                        admin2,
                        region_id,
                    };
                    let bad = |m: String| Error::data(format!("gazetteer region {:?}: {m}", key.region_id));
                    key.validate().map_err(bad)?;
                    if polygons.is_empty() {
                        return Err(bad("no polygons".into()));
                    }
                    for ring in &polygons {
                        validate_ring(ring).map_err(bad)?;
                    }
                    if !ids.insert(key.region_id.clone()) {
                        return Err(bad("duplicate region_id".into()));
                    }
                    let bbox = BBox::of(polygons.iter().flatten());
                    regions.push(Region {
                        key,
                        rings: polygons,
                        bbox,
                        utc_offset_hours,
                    });
                }
                GazetteerRecord::Place {
                    name,
                    lat,
                    lon,
                    region_id,
                } => {
                    let point = GeoPoint::new(lat, lon)
                        .map_err(|e| Error::data(format!("gazetteer place {name:?}: {e}")))?;
                    pending_places.push(Place {
                        name,
                        point,
                        region_id,
                    });
                }
            }
        }
        for p in &pending_places {
            if !ids.contains(&p.region_id) {
                return Err(Error::data(format!(
                    "gazetteer place {:?} references unknown region {:?}",
                    p.name, p.region_id
                )));
            }
        }
        let mut admin1_ids = BTreeMap::new();
        for r in &regions {
            if r.key.level() == AdminLevel::Admin1 {
                admin1_ids
                    .entry((r.key.country_code.clone(), r.key.admin1.clone()))
                    .or_insert_with(|| r.key.region_id.clone());
            }
        }
        Ok(Gazetteer {
            regions,
            places: pending_places,
            admin1_ids,
        })
    }

    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut records = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::data(format!("gazetteer line {}: {e}", i + 1)))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: GazetteerRecord = serde_json::from_str(&line)
                .map_err(|e| Error::data(format!("gazetteer line {}: {e}", i + 1)))?;
            records.push(rec);
        }
        Gazetteer::from_records(records)
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    /// Region id of the first-order division `(country, admin1)`.
    ///
    /// Falls back to `CC.admin1` when the file has no polygon at that level.
    pub fn admin1_region_id(&self, country_code: &str, admin1: &str) -> String {
        self.admin1_ids
            .get(&(country_code.to_string(), admin1.to_string()))
            .cloned()
            .unwrap_or_else(|| format!("{country_code}.{admin1}"))
    }

    pub fn reverse_geocode(&self, p: GeoPoint) -> Option<&RegionKey> {
        self.regions
            .iter()
            .filter(|r| r.contains(p))
            .min_by(|a, b| {
                b.key
                    .level()
                    .cmp(&a.key.level())
                    .then(a.bbox.area().total_cmp(&b.bbox.area()))
                    .then_with(|| a.key.region_id.cmp(&b.key.region_id))
            })
            .map(|r| &r.key)
    }

    pub fn nearest_place(&self, p: GeoPoint, max_km: f64) -> Option<&Place> {
        self.places
            .iter()
            .map(|pl| (haversine_km(p, pl.point), pl))
            .filter(|(d, _)| *d <= max_km)
            .min_by(|(da, a), (db, b)| da.total_cmp(db).then_with(|| a.name.cmp(&b.name)))
            .map(|(_, pl)| pl)
    }
}

pub fn load_gazetteer(path: impl AsRef<Path>) -> Result<Gazetteer> {
    let path = path.as_ref();
    let reader = open_text(path)?;
    Gazetteer::from_reader(reader).map_err(|e| match e {
        Error::Data(m) => Error::data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn write_gazetteer(records: &[GazetteerRecord], mut out: impl Write) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square(x0: f64, y0: f64, side: f64) -> Ring {
        vec![[x0, y0], [x0 + side, y0], [x0 + side, y0 + side], [x0, y0 + side], [x0, y0]]
    }

    fn region(cc: &str, a1: &str, a2: &str, id: &str, rings: Vec<Ring>) -> GazetteerRecord {
        GazetteerRecord::Region {
            country_code: cc.into(),
            admin1: a1.into(),
            admin2: a2.into(),
            region_id: id.into(),
            utc_offset_hours: None,
            polygons: rings,
        }
    }

    fn place(name: &str, lat: f64, lon: f64, id: &str) -> GazetteerRecord {
        GazetteerRecord::Place {
            name: name.into(),
            lat,
            lon,
            region_id: id.into(),
        }
    }

    fn gp(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    fn nested() -> Gazetteer {
        Gazetteer::from_records(vec![
            region("US", "", "", "US", vec![square(-110.0, 30.0, 20.0)]),
            region("US", "Alpha", "", "01", vec![square(-106.0, 40.0, 2.0)]),
            region("US", "Alpha", "North", "01001", vec![square(-106.0, 41.0, 1.0)]),
            place("Northtown", 41.5, -105.5, "01001"),
        ])
        .unwrap()
    }

    #[test]
    fn loads_square_region() {
        let text = r#"{"type":"region","country_code":"US","admin1":"A","admin2":"","region_id":"01","utc_offset_hours":-7,"polygons":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}"#;
        let g = Gazetteer::from_reader(text.as_bytes()).unwrap();
        assert_eq!(g.regions().len(), 1);
        assert_eq!(
            g.regions()[0].bbox,
            BBox { min_lon: 0.0, min_lat: 0.0, max_lon: 1.0, max_lat: 1.0 }
        );
        assert_eq!(g.regions()[0].utc_offset_hours, Some(-7.0));
    }

    #[test]
    fn open_ring_names_region() {
        let mut ring = square(0.0, 0.0, 1.0);
        ring.pop();
        ring.push([0.0, 0.5]);
        let err = Gazetteer::from_records(vec![region("US", "A", "", "r-42", vec![ring])]).unwrap_err();
        assert!(err.to_string().contains("r-42"), "{err}");
        let err = Gazetteer::from_records(vec![region("US", "A", "", "r-7", vec![vec![[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]]])])
            .unwrap_err();
        assert!(err.to_string().contains("r-7"));
    }

    #[test]
    fn self_intersecting_ring_rejected() {
        let bowtie = vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]];
        assert!(Gazetteer::from_records(vec![region("US", "A", "", "bow", vec![bowtie])]).is_err());
    }

    #[test]
    fn bad_keys_rejected() {
        let sq = || vec![square(0.0, 0.0, 1.0)];
        assert!(Gazetteer::from_records(vec![region("us", "A", "", "x", sq())]).is_err());
        assert!(Gazetteer::from_records(vec![region("USA", "A", "", "x", sq())]).is_err());
        assert!(Gazetteer::from_records(vec![region("US", "", "B", "x", sq())]).is_err());
        assert!(Gazetteer::from_records(vec![region("US", "A", "", "x", sq()), region("US", "B", "", "x", sq())]).is_err());
    }

    #[test]
    fn unknown_place_region_rejected() {
        let err = Gazetteer::from_records(vec![place("Nowhere", 0.0, 0.0, "missing")]).unwrap_err();
        assert!(err.to_string().contains("missing"));
    }

    #[test]
    fn lookup_hierarchy() {
        let g = nested();
        assert_eq!(g.reverse_geocode(gp(41.5, -105.5)).unwrap().region_id, "01001");
        let k = g.reverse_geocode(gp(40.5, -105.5)).unwrap();
        assert_eq!((k.admin1.as_str(), k.admin2.as_str()), ("Alpha", ""));
        assert_eq!(g.reverse_geocode(gp(35.0, -100.0)).unwrap().level(), AdminLevel::Country);
        assert!(g.reverse_geocode(gp(0.0, 0.0)).is_none());
        assert_eq!(g.admin1_region_id("US", "Alpha"), "01");
        assert_eq!(g.admin1_region_id("US", "Beta"), "US.Beta");
    }

    #[test]
    fn boundary_counts_inside() {
        let g = nested();
        assert_eq!(g.reverse_geocode(gp(41.0, -105.5)).unwrap().region_id, "01001");
        assert_eq!(g.reverse_geocode(gp(42.0, -106.0)).unwrap().region_id, "01001");
    }

    #[test]
    fn holes_are_excluded() {
        let g = Gazetteer::from_records(vec![region("US", "A", "", "ring", vec![square(0.0, 0.0, 4.0), square(1.0, 1.0, 2.0)])])
            .unwrap();
        assert!(g.reverse_geocode(gp(0.5, 0.5)).is_some());
        assert!(g.reverse_geocode(gp(2.0, 2.0)).is_none());
    }

    #[test]
    fn smallest_box_breaks_level_ties() {
        let g = Gazetteer::from_records(vec![
            region("US", "A", "Big", "big", vec![square(0.0, 0.0, 4.0)]),
            region("US", "A", "Small", "small", vec![square(1.0, 1.0, 1.0)]),
        ])
        .unwrap();
        assert_eq!(g.reverse_geocode(gp(1.5, 1.5)).unwrap().region_id, "small");
    }

    #[test]
    fn nearest_place_rules() {
        let g = nested();
        // 1 km north of the place is 1/111.195 deg
        assert_eq!(g.nearest_place(gp(41.5 + 1.0 / 111.195, -105.5), 5.0).unwrap().name, "Northtown");
        assert!(g.nearest_place(gp(41.5 + 10.0 / 111.195, -105.5), 5.0).is_none());
        let g = Gazetteer::from_records(vec![
            region("US", "A", "", "a", vec![square(-1.0, -1.0, 2.0)]),
            place("Zed", 0.0, 0.1, "a"),
            place("Ayr", 0.0, -0.1, "a"),
        ])
        .unwrap();
        assert_eq!(g.nearest_place(gp(0.0, 0.0), 50.0).unwrap().name, "Ayr");
    }

    fn winding_number(ring: &[[f64; 2]], x: f64, y: f64) -> i32 {
        let mut wn = 0;
        for w in ring.windows(2) {
            let (a, b) = (w[0], w[1]);
            let is_left = (b[0] - a[0]) * (y - a[1]) - (x - a[0]) * (b[1] - a[1]);
            if a[1] <= y {
                if b[1] > y && is_left > 0.0 {
                    wn += 1;
                }
            } else if b[1] <= y && is_left < 0.0 {
                wn -= 1;
            }
        }
        wn
    }

    /// Star-shaped polygon around the origin: simple by construction.
    fn random_star(rng: &mut ChaCha8Rng) -> Ring {
        let n = rng.random_range(3..24);
        let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let mut ring: Ring = angles
            .iter()
            .map(|a| {
                let r = rng.random_range(0.2..1.0);
                [r * a.cos(), r * a.sin()]
            })
            .collect();
        ring.push(ring[0]);
        ring
    }

    #[test]
    fn even_odd_agrees_with_winding_number() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut checked = 0;
        while checked < 10_000 {
            let ring = random_star(&mut rng);
            if validate_ring(&ring).is_err() {
                continue;
            }
            for _ in 0..100 {
                let (x, y) = (rng.random_range(-1.1..1.1), rng.random_range(-1.1..1.1));
                let eo = ring_location(&ring, x, y);
                let wn = winding_number(&ring, x, y);
                assert_ne!(eo, Location::Boundary);
                assert_eq!(eo == Location::Inside, wn != 0, "({x}, {y}) in {ring:?}");
                checked += 1;
            }
        }
    }
}
