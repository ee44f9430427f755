//! Coordinates and the two distance metrics: great-circle meters for station
//! spacing and projected Manhattan meters for truck travel.

use crate::error::{Error, Result};

/// Mean Earth radius used by the haversine formula.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Meters per degree used by the local equirectangular projection.
pub const METERS_PER_DEGREE: f64 = 111_320.0;

/// A WGS-84 position in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    /// Builds a point, rejecting non-finite or out-of-range coordinates.
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::InvalidCoordinate { lat, lon });
        }
        Ok(GeoPoint { lat, lon })
    }

    pub fn is_valid(&self) -> bool {
        (-90.0..=90.0).contains(&self.lat) && (-180.0..=180.0).contains(&self.lon)
    }
}

/// Haversine distance on a sphere of radius [`EARTH_RADIUS_M`].
pub fn great_circle_m(a: GeoPoint, b: GeoPoint) -> f64 {
    let phi1 = a.lat.to_radians();
    let phi2 = b.lat.to_radians();
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let s1 = libm::sin(dphi / 2.0);
    let s2 = libm::sin(dlambda / 2.0);
    let h = s1 * s1 + libm::cos(phi1) * libm::cos(phi2) * s2 * s2;
    2.0 * EARTH_RADIUS_M * libm::asin(libm::sqrt(h.min(1.0)))
}

/// East and north offsets (meters) of `b` relative to `a` on a local
/// equirectangular plane anchored at the pair's mean latitude.
pub fn local_offsets_m(a: GeoPoint, b: GeoPoint) -> (f64, f64) {
    let mean_lat = ((a.lat + b.lat) / 2.0).to_radians();
    let east = (b.lon - a.lon) * libm::cos(mean_lat) * METERS_PER_DEGREE;
    let north = (b.lat - a.lat) * METERS_PER_DEGREE;
    (east, north)
}

/// Manhattan (L1) distance on the local equirectangular plane.
pub fn manhattan_m(a: GeoPoint, b: GeoPoint) -> f64 {
    let (east, north) = local_offsets_m(a, b);
    east.abs() + north.abs()
}

/// Projects points onto a fixed plane anchored at `origin`. Used where many
/// points must share one coordinate frame (k-means zoning).
#[derive(Debug, Clone, Copy)]
pub struct LocalProjection {
    origin: GeoPoint,
    cos_lat: f64,
}

impl LocalProjection {
    pub fn new(origin: GeoPoint) -> Self {
        LocalProjection { origin, cos_lat: libm::cos(origin.lat.to_radians()) }
    }

    /// Anchors the projection at the centroid of `points` (or 0,0 if empty).
    pub fn centered_on(points: impl IntoIterator<Item = GeoPoint>) -> Self {
        let (mut lat, mut lon, mut n) = (0.0, 0.0, 0usize);
        for p in points {
            lat += p.lat;
            lon += p.lon;
            n += 1;
        }
        let origin = if n == 0 {
            GeoPoint { lat: 0.0, lon: 0.0 }
        } else {
            GeoPoint { lat: lat / n as f64, lon: lon / n as f64 }
        };
        Self::new(origin)
    }

    pub fn project(&self, p: GeoPoint) -> [f64; 2] {
        [
            (p.lon - self.origin.lon) * self.cos_lat * METERS_PER_DEGREE,
            (p.lat - self.origin.lat) * METERS_PER_DEGREE,
        ]
    }

    pub fn unproject(&self, xy: [f64; 2]) -> GeoPoint {
        GeoPoint {
            lat: self.origin.lat + xy[1] / METERS_PER_DEGREE,
            lon: self.origin.lon + xy[0] / (self.cos_lat * METERS_PER_DEGREE),
        }
    }
}

/// Distance metric selector for placement spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    GreatCircle,
    Manhattan,
}

impl Metric {
    pub fn distance_m(self, a: GeoPoint, b: GeoPoint) -> f64 {
        match self {
            Metric::GreatCircle => great_circle_m(a, b),
            Metric::Manhattan => manhattan_m(a, b),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::GreatCircle => "great_circle",
            Metric::Manhattan => "manhattan",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "great_circle" | "haversine" => Some(Metric::GreatCircle),
            "manhattan" => Some(Metric::Manhattan),
            _ => None,
        }
    }
}
