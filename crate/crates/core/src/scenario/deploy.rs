use rand::Rng;
use serde::Serialize;

use crate::geodesy::{geo_satellite_ecef_km, slant_range_km, GeoPoint, GEO_ALTITUDE_KM};
use crate::scenario::Beam;
use crate::seeds::{self, tags};
use crate::{Error, Result};

/// A fixed user terminal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserTerminal {
    /// Index into the deployment (unique across beams).
    pub user_id: usize,
    pub beam_id: u32,
    /// Position of the beam in the layout (0-based), also its antenna index.
    pub beam_index: usize,
    pub position: GeoPoint,
    /// Position in the beam's tangent plane, km east/north of the centre.
    pub local_km: [f64; 2],
    /// Distance to the satellite, m.
    pub slant_range_m: f64,
}

/// `N_U = round(ρ·A_b)`, halves rounded up.
pub fn users_per_beam(density: f64, area_km2: f64) -> usize {
    (density * area_km2 + 0.5).floor() as usize
}

/// Deploy `round(ρ·A_b)` users uniformly over each beam polygon by rejection
/// sampling over the polygon's latitude/longitude bounding box (uniform in
/// area on the sphere). Each beam draws from its own stream derived from
/// `seed`, so the result is a pure function of the inputs.
pub fn deploy_users(beams: &[Beam], density: f64, satellite_longitude_deg: f64, seed: u64) -> Result<Vec<UserTerminal>> {
    if !(density.is_finite() && density > 0.0) {
        return Err(Error::Domain(format!("user density must be positive, got {density}")));
    }
    let satellite = geo_satellite_ecef_km(satellite_longitude_deg);
    let mut users = Vec::new();
    for (beam_index, beam) in beams.iter().enumerate() {
        let count = users_per_beam(density, beam.area_km2());
        if count == 0 {
            return Err(Error::validation(
                format!("beam {}", beam.id()),
                format!("density {density} users/km² over {:.1} km² leaves the beam empty", beam.area_km2()),
            ));
        }
        let (lat_lo, lat_hi, lon_lo, lon_hi) = bounding_box(beam);
        let (s_lo, s_hi) = (lat_lo.to_radians().sin(), lat_hi.to_radians().sin());
        let mut rng = seeds::rng(seeds::derive(seeds::derive(seed, tags::BEAM), beam.id() as u64));
        let mut placed = 0;
        while placed < count {
            let lat = rng.random_range(s_lo..=s_hi).asin().to_degrees();
            let lon = rng.random_range(lon_lo..=lon_hi);
            let position = GeoPoint::new(lat, lon);
            let local_km = beam.plane().project(&position);
            if !beam.local_polygon().contains(local_km) {
                continue;
            }
            let slant_range_m = slant_range_km(satellite, &position) * 1e3;
            debug_assert!(slant_range_m > GEO_ALTITUDE_KM * 1e3);
            users.push(UserTerminal {
                user_id: users.len(),
                beam_id: beam.id(),
                beam_index,
                position,
                local_km,
                slant_range_m,
            });
            placed += 1;
        }
    }
    Ok(users)
}

fn bounding_box(beam: &Beam) -> (f64, f64, f64, f64) {
    beam.boundary().iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), p| (a.min(p.lat_deg), b.max(p.lat_deg), c.min(p.lon_deg), d.max(p.lon_deg)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;
    use crate::scenario::BeamLayout;

    #[test]
    fn rounding() {
        assert_eq!(users_per_beam(1e-2, 10_000.0), 100);
        assert_eq!(users_per_beam(2.5e-4, 40_000.0), 10);
        assert_eq!(users_per_beam(1.0, 2.5), 3);
        assert_eq!(users_per_beam(1.0, 2.4999), 2);
    }

    #[test]
    fn deterministic_and_inside() {
        let layout = BeamLayout::from_json_str(data::BEAMS_HEX7).unwrap();
        let a = deploy_users(&layout.beams, 5e-4, 30.0, 11).unwrap();
        let b = deploy_users(&layout.beams, 5e-4, 30.0, 11).unwrap();
        assert_eq!(a, b);
        let c = deploy_users(&layout.beams, 5e-4, 30.0, 12).unwrap();
        assert_ne!(a, c);
        for u in &a {
            let beam = &layout.beams[u.beam_index];
            assert!(beam.contains(&u.position));
            assert!(u.slant_range_m > GEO_ALTITUDE_KM * 1e3);
        }
        for (i, beam) in layout.beams.iter().enumerate() {
            let n = a.iter().filter(|u| u.beam_index == i).count();
            assert_eq!(n, users_per_beam(5e-4, beam.area_km2()));
        }
    }

    #[test]
    fn empty_beam_is_an_error() {
        let layout = BeamLayout::from_json_str(data::BEAMS_HEX7).unwrap();
        assert!(deploy_users(&layout.beams, 1e-9, 30.0, 1).is_err());
        assert!(deploy_users(&layout.beams, -1.0, 30.0, 1).is_err());
    }
}
