//! Spherical-Earth geodesy: ECEF positions, the GEO satellite, slant ranges,
//! the azimuthal equidistant tangent plane used for all in-beam geometry, and
//! geodesic polygon areas.

use serde::{Deserialize, Serialize};

pub const EARTH_RADIUS_KM: f64 = 6371.0;
pub const GEO_ALTITUDE_KM: f64 = 35_786.0;

/// Geodetic position in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat_deg: f64,
    pub lon_deg: f64,
}

impl GeoPoint {
    pub const fn new(lat_deg: f64, lon_deg: f64) -> Self {
        Self { lat_deg, lon_deg }
    }

    pub fn is_finite(&self) -> bool {
        self.lat_deg.is_finite() && self.lon_deg.is_finite()
    }

    /// Earth-centred Earth-fixed position in km on the spherical Earth.
    pub fn ecef_km(&self) -> [f64; 3] {
        let (lat, lon) = (self.lat_deg.to_radians(), self.lon_deg.to_radians());
        [
            EARTH_RADIUS_KM * lat.cos() * lon.cos(),
            EARTH_RADIUS_KM * lat.cos() * lon.sin(),
            EARTH_RADIUS_KM * lat.sin(),
        ]
    }

    fn unit(&self) -> [f64; 3] {
        let p = self.ecef_km();
        [p[0] / EARTH_RADIUS_KM, p[1] / EARTH_RADIUS_KM, p[2] / EARTH_RADIUS_KM]
    }
}

/// ECEF position of a GEO satellite at `lon_deg`, zero latitude.
pub fn geo_satellite_ecef_km(lon_deg: f64) -> [f64; 3] {
    let r = EARTH_RADIUS_KM + GEO_ALTITUDE_KM;
    let lon = lon_deg.to_radians();
    [r * lon.cos(), r * lon.sin(), 0.0]
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Satellite-to-ground distance in km.
pub fn slant_range_km(satellite_ecef_km: [f64; 3], point: &GeoPoint) -> f64 {
    norm(sub(point.ecef_km(), satellite_ecef_km))
}

/// Angle at `from` between the directions to `a` and `b`, in radians.
pub fn angle_between(from: [f64; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    let u = sub(a, from);
    let v = sub(b, from);
    // atan2 form stays accurate for the sub-degree angles seen from GEO.
    norm(cross(u, v)).atan2(dot(u, v))
}

/// Great-circle central angle in radians (haversine).
pub fn central_angle(a: &GeoPoint, b: &GeoPoint) -> f64 {
    let (p1, p2) = (a.lat_deg.to_radians(), b.lat_deg.to_radians());
    let dlat = p2 - p1;
    let dlon = (b.lon_deg - a.lon_deg).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * h.sqrt().min(1.0).asin()
}

/// Azimuthal equidistant projection about an origin: `x` points east, `y`
/// north, both in km. Distances and azimuths from the origin are exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentPlane {
    origin: GeoPoint,
    sin_lat0: f64,
    cos_lat0: f64,
}

impl TangentPlane {
    pub fn new(origin: GeoPoint) -> Self {
        let lat0 = origin.lat_deg.to_radians();
        Self {
            origin,
            sin_lat0: lat0.sin(),
            cos_lat0: lat0.cos(),
        }
    }

    pub fn origin(&self) -> GeoPoint {
        self.origin
    }

    pub fn project(&self, p: &GeoPoint) -> [f64; 2] {
        let c = central_angle(&self.origin, p);
        if c == 0.0 {
            return [0.0, 0.0];
        }
        let lat = p.lat_deg.to_radians();
        let dlon = (p.lon_deg - self.origin.lon_deg).to_radians();
        let east = lat.cos() * dlon.sin();
        let north = self.cos_lat0 * lat.sin() - self.sin_lat0 * lat.cos() * dlon.cos();
        let az = east.atan2(north);
        let rho = EARTH_RADIUS_KM * c;
        [rho * az.sin(), rho * az.cos()]
    }

    pub fn unproject(&self, xy: [f64; 2]) -> GeoPoint {
        let rho = xy[0].hypot(xy[1]);
        if rho == 0.0 {
            return self.origin;
        }
        let c = rho / EARTH_RADIUS_KM;
        let (sin_c, cos_c) = c.sin_cos();
        let lat = (cos_c * self.sin_lat0 + xy[1] * sin_c * self.cos_lat0 / rho)
            .clamp(-1.0, 1.0)
            .asin();
        let dlon = (xy[0] * sin_c).atan2(rho * self.cos_lat0 * cos_c - xy[1] * self.sin_lat0 * sin_c);
        GeoPoint::new(lat.to_degrees(), self.origin.lon_deg + dlon.to_degrees())
    }
}

/// Area in km² of a simple spherical polygon with great-circle edges
/// (vertices in either orientation, closed implicitly).
///
/// Sum of signed spherical triangle excesses over a fan from the first vertex.
pub fn spherical_polygon_area_km2(vertices: &[GeoPoint]) -> f64 {
    if vertices.len() < 3 {
        return 0.0;
    }
    let a = vertices[0].unit();
    let mut excess = 0.0;
    for pair in vertices[1..].windows(2) {
        let (b, c) = (pair[0].unit(), pair[1].unit());
        let triple = dot(a, cross(b, c));
        let denom = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
        excess += 2.0 * triple.atan2(denom);
    }
    excess.abs() * EARTH_RADIUS_KM * EARTH_RADIUS_KM
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn projection_round_trips() {
        let plane = TangentPlane::new(GeoPoint::new(47.0, 9.0));
        for xy in [[0.0, 0.0], [250.0, 0.0], [-120.0, 300.0], [10.0, -433.0]] {
            let back = plane.project(&plane.unproject(xy));
            assert_relative_eq!(back[0], xy[0], epsilon = 1e-8);
            assert_relative_eq!(back[1], xy[1], epsilon = 1e-8);
        }
    }

    #[test]
    fn projection_preserves_origin_distance() {
        let o = GeoPoint::new(-20.0, 40.0);
        let plane = TangentPlane::new(o);
        let p = GeoPoint::new(-18.5, 41.2);
        let xy = plane.project(&p);
        assert_relative_eq!(xy[0].hypot(xy[1]), central_angle(&o, &p) * EARTH_RADIUS_KM, max_relative = 1e-12);
    }

    #[test]
    fn due_east_and_north() {
        let plane = TangentPlane::new(GeoPoint::new(0.0, 0.0));
        let e = plane.project(&GeoPoint::new(0.0, 1.0));
        assert!(e[0] > 0.0 && e[1].abs() < 1e-9);
        let n = plane.project(&GeoPoint::new(1.0, 0.0));
        assert!(n[1] > 0.0 && n[0].abs() < 1e-9);
    }

    #[test]
    fn octant_area() {
        // One eighth of the sphere.
        let tri = [GeoPoint::new(0.0, 0.0), GeoPoint::new(0.0, 90.0), GeoPoint::new(90.0, 0.0)];
        let sphere = 4.0 * std::f64::consts::PI * EARTH_RADIUS_KM * EARTH_RADIUS_KM;
        assert_relative_eq!(spherical_polygon_area_km2(&tri), sphere / 8.0, max_relative = 1e-12);
    }

    #[test]
    fn small_square_area_is_planar() {
        let plane = TangentPlane::new(GeoPoint::new(45.0, 10.0));
        let sq: Vec<_> = [[-50.0, -50.0], [50.0, -50.0], [50.0, 50.0], [-50.0, 50.0]]
            .iter()
            .map(|&xy| plane.unproject(xy))
            .collect();
        assert_relative_eq!(spherical_polygon_area_km2(&sq), 10_000.0, max_relative = 1e-3);
    }

    #[test]
    fn slant_range_to_subsatellite_point() {
        let sat = geo_satellite_ecef_km(30.0);
        assert_relative_eq!(slant_range_km(sat, &GeoPoint::new(0.0, 30.0)), GEO_ALTITUDE_KM, max_relative = 1e-12);
        assert!(slant_range_km(sat, &GeoPoint::new(60.0, -10.0)) > GEO_ALTITUDE_KM);
    }
}
