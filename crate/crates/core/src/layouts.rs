//! Synthetic hexagonal beam layouts.
//!
//! Beams are flat-top hexagons of circumradius `beam_radius_km` tiled in the
//! tangent plane of the layout centre, so adjacent beams share their edge
//! vertices exactly. The antenna half-power angle is tied to the beam spacing
//! seen from the satellite: the median gain at the midpoint between adjacent
//! beam centres is set to `crossover_db`. Seen from GEO the ground hexagons
//! are foreshortened, so individual pairs scatter around that median.

use crate::channel::BesselPattern;
use crate::geodesy::{angle_between, geo_satellite_ecef_km, GeoPoint, TangentPlane};
use crate::scenario::{AntennaParameters, Beam, BeamLayout};
use crate::Result;

/// Aperture efficiency used to turn the half-power angle into a peak gain.
const SATELLITE_APERTURE_EFFICIENCY: f64 = 0.65;
const BESSEL_HALF_POWER_ARGUMENT: f64 = 2.07123;

#[derive(Debug, Clone)]
pub struct HexLayoutParams {
    pub name: String,
    pub center: GeoPoint,
    pub beam_radius_km: f64,
    pub num_beams: usize,
    /// Cells are picked nearest-first under `(x / stretch)² + y²`; values
    /// above 1 widen the coverage east-west.
    pub east_west_stretch: f64,
    pub satellite_longitude_deg: f64,
    /// Median relative gain at adjacent-beam edge midpoints, dB.
    pub crossover_db: f64,
}

impl HexLayoutParams {
    pub fn new(name: &str, center: GeoPoint, num_beams: usize) -> Self {
        Self {
            name: name.to_owned(),
            center,
            beam_radius_km: 250.0,
            num_beams,
            east_west_stretch: 1.0,
            satellite_longitude_deg: 30.0,
            crossover_db: -3.5,
        }
    }
}

/// Hex cell centres (axial coordinates) nearest the origin.
fn hex_cells(num: usize, radius: f64, stretch: f64) -> Vec<[f64; 2]> {
    let span = (num as f64).sqrt() as i64 * 2 + 2;
    let mut cells = Vec::new();
    for q in -span..=span {
        for r in -span..=span {
            let x = radius * 1.5 * q as f64;
            let y = radius * 3f64.sqrt() * (r as f64 + q as f64 / 2.0);
            let metric = (x / stretch).powi(2) + y * y;
            cells.push((metric, q, r, [x, y]));
        }
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    cells.into_iter().take(num).map(|c| c.3).collect()
}

pub fn hex_layout(params: &HexLayoutParams) -> Result<BeamLayout> {
    let plane = TangentPlane::new(params.center);
    let r = params.beam_radius_km;
    let centers = hex_cells(params.num_beams, r, params.east_west_stretch);
    let mut beams = Vec::with_capacity(centers.len());
    for (i, c) in centers.iter().enumerate() {
        let boundary = (0..6)
            .map(|k| {
                let a = std::f64::consts::FRAC_PI_3 * k as f64;
                plane.unproject([c[0] + r * a.cos(), c[1] + r * a.sin()])
            })
            .collect();
        beams.push(Beam::new(i as u32 + 1, plane.unproject(*c), boundary)?);
    }

    let sat = geo_satellite_ecef_km(params.satellite_longitude_deg);
    let spacing = 3f64.sqrt() * r;
    let mut midpoint_angles = Vec::new();
    for (i, a) in centers.iter().enumerate() {
        for (j, b) in centers.iter().enumerate().skip(i + 1) {
            if ((a[0] - b[0]).hypot(a[1] - b[1]) - spacing).abs() < 1e-6 * spacing {
                let mid = plane.unproject([(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]).ecef_km();
                midpoint_angles.push(angle_between(sat, beams[i].center().ecef_km(), mid));
                midpoint_angles.push(angle_between(sat, beams[j].center().ecef_km(), mid));
            }
        }
    }
    if midpoint_angles.is_empty() {
        // Single beam: its edge midpoint.
        let b = &beams[0];
        let (c, h) = (centers[0], r * 3f64.sqrt() / 2.0);
        let a = std::f64::consts::FRAC_PI_6;
        let mid = plane.unproject([c[0] + h * a.cos(), c[1] + h * a.sin()]).ecef_km();
        midpoint_angles.push(angle_between(sat, b.center().ecef_km(), mid));
    }
    midpoint_angles.sort_by(f64::total_cmp);
    let median = midpoint_angles[midpoint_angles.len() / 2];
    let u = crossover_argument(params.crossover_db);
    let theta_3db = (BESSEL_HALF_POWER_ARGUMENT * median.sin() / u).asin();
    let peak = SATELLITE_APERTURE_EFFICIENCY * (BESSEL_HALF_POWER_ARGUMENT / theta_3db.sin()).powi(2);
    // Rounded so the written file reproduces exactly.
    let antenna = AntennaParameters {
        max_gain_dbi: (10.0 * peak.log10() * 1e3).round() / 1e3,
        theta_3db_deg: (theta_3db.to_degrees() * 1e6).round() / 1e6,
    };
    Ok(BeamLayout {
        name: params.name.clone(),
        antenna,
        beams,
    })
}

/// Pattern argument `u` whose relative gain is `level_db` (main lobe).
fn crossover_argument(level_db: f64) -> f64 {
    let target = 10f64.powf(level_db / 10.0);
    let (mut lo, mut hi) = (1e-9, 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if BesselPattern::shape(mid).powi(2) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The bundled layouts: 7 and 19 hexagonal beams around central Europe, and a
/// 71-beam tiling stretched over Europe.
pub fn bundled_params() -> Vec<(&'static str, HexLayoutParams)> {
    let central = GeoPoint::new(47.0, 10.0);
    let europe = HexLayoutParams {
        east_west_stretch: 1.6,
        ..HexLayoutParams::new("europe71", GeoPoint::new(50.0, 12.0), 71)
    };
    vec![
        ("beams_hex7.json", HexLayoutParams::new("hex7", central, 7)),
        ("beams_hex19.json", HexLayoutParams::new("hex19", central, 19)),
        ("beams_europe71.json", europe),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{AntennaPattern, BesselPattern};

    #[test]
    fn ring_counts() {
        assert_eq!(hex_cells(7, 1.0, 1.0).len(), 7);
        let nineteen = hex_cells(19, 1.0, 1.0);
        let max = nineteen.iter().map(|c| c[0].hypot(c[1])).fold(0.0, f64::max);
        assert!((max - 2.0 * 3f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn crossover_argument_matches_half_power() {
        assert!((crossover_argument(10.0 * 0.5f64.log10()) - BESSEL_HALF_POWER_ARGUMENT).abs() < 1e-4);
    }

    #[test]
    fn hex_area_and_crossover() {
        let layout = hex_layout(&HexLayoutParams::new("t", GeoPoint::new(47.0, 10.0), 19)).unwrap();
        let hex_area = 1.5 * 3f64.sqrt() * 250.0 * 250.0;
        for b in &layout.beams {
            assert!((b.area_km2() - hex_area).abs() / hex_area < 0.01, "{}", b.area_km2());
        }
        let pattern = BesselPattern::from_parameters(&layout.antenna);
        let sat = geo_satellite_ecef_km(30.0);
        let mut levels = Vec::new();
        for a in &layout.beams {
            for b in &layout.beams {
                let m = a.plane().project(&b.center());
                if a.id() == b.id() || (m[0].hypot(m[1]) - 250.0 * 3f64.sqrt()).abs() > 5.0 {
                    continue;
                }
                let mid = a.plane().unproject([m[0] / 2.0, m[1] / 2.0]);
                let theta = angle_between(sat, a.center().ecef_km(), mid.ecef_km());
                levels.push(10.0 * (pattern.gain(theta) / pattern.max_gain()).log10());
            }
        }
        levels.sort_by(f64::total_cmp);
        let median = levels[levels.len() / 2];
        assert!((-4.0..=-3.0).contains(&median), "{median}");
        assert!(levels[0] > -8.0 && levels[levels.len() - 1] < -1.5, "{levels:?}");
    }
}
