//! Beam layout documents (JSON).
//!
//! ```json
//! {
//!   "name": "hex7",
//!   "antenna": { "max_gain_dbi": 49.8, "theta_3db_deg": 0.31 },
//!   "beams": [
//!     { "id": 1, "center": [48.0, 10.0],
//!       "boundary": [[49.9, 10.0], [49.0, 12.8], ...],
//!       "area_km2": 162380.0 }
//!   ]
//! }
//! ```
//!
//! Coordinates are `[lat, lon]` in degrees; boundaries close implicitly.
//! `area_km2` is optional and, when present, must agree with the geodesic
//! area of the boundary within 1%.

use serde::{Deserialize, Serialize};

use crate::geodesy::{spherical_polygon_area_km2, GeoPoint, TangentPlane};
use crate::geometry::PlanarPolygon;
use crate::{Error, Result};

/// Multi-beam antenna pattern parameters shared by every feed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaParameters {
    pub max_gain_dbi: f64,
    /// Half-power off-axis angle (gain is half the peak there).
    pub theta_3db_deg: f64,
}

/// One beam record as written in the layout file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamRecord {
    pub id: u32,
    pub center: [f64; 2],
    pub boundary: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_km2: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayout {
    #[serde(default)]
    name: String,
    antenna: AntennaParameters,
    beams: Vec<BeamRecord>,
}

/// A validated beam: simple boundary containing its centre, with its local
/// tangent-plane outline cached.
#[derive(Debug, Clone, PartialEq)]
pub struct Beam {
    id: u32,
    center: GeoPoint,
    boundary: Vec<GeoPoint>,
    area_km2: f64,
    plane: TangentPlane,
    local: PlanarPolygon,
}

impl Beam {
    pub fn new(id: u32, center: GeoPoint, boundary: Vec<GeoPoint>) -> Result<Self> {
        let ctx = || format!("beam {id}");
        if !center.is_finite() || boundary.iter().any(|p| !p.is_finite()) {
            return Err(Error::validation(ctx(), "non-finite coordinates"));
        }
        if boundary.len() < 3 {
            return Err(Error::validation(ctx(), "boundary needs at least 3 vertices"));
        }
        let plane = TangentPlane::new(center);
        let local = PlanarPolygon::new(boundary.iter().map(|p| plane.project(p)).collect())
            .map_err(|e| Error::validation(ctx(), e.to_string()))?;
        if !local.is_simple() {
            return Err(Error::validation(ctx(), "boundary is self-intersecting"));
        }
        if !local.contains([0.0, 0.0]) {
            return Err(Error::validation(ctx(), "boundary does not contain the beam centre"));
        }
        let area_km2 = spherical_polygon_area_km2(&boundary);
        Ok(Self {
            id,
            center,
            boundary,
            area_km2,
            plane,
            local,
        })
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn center(&self) -> GeoPoint {
        self.center
    }

    pub fn boundary(&self) -> &[GeoPoint] {
        &self.boundary
    }

    /// Geodesic area, km².
    pub fn area_km2(&self) -> f64 {
        self.area_km2
    }

    pub fn plane(&self) -> &TangentPlane {
        &self.plane
    }

    /// Boundary in the beam's tangent plane, km.
    pub fn local_polygon(&self) -> &PlanarPolygon {
        &self.local
    }

    pub fn contains(&self, p: &GeoPoint) -> bool {
        self.local.contains(self.plane.project(p))
    }

    pub fn to_record(&self) -> BeamRecord {
        BeamRecord {
            id: self.id,
            center: [self.center.lat_deg, self.center.lon_deg],
            boundary: self.boundary.iter().map(|p| [p.lat_deg, p.lon_deg]).collect(),
            area_km2: Some(self.area_km2),
        }
    }
}

/// A validated multi-beam layout. Beams are ordered by id and the ids are
/// exactly `1..=N_B`; beam `b` is served by antenna feed `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamLayout {
    pub name: String,
    pub antenna: AntennaParameters,
    pub beams: Vec<Beam>,
}

impl BeamLayout {
    pub fn from_json_str(source: &str) -> Result<Self> {
        let raw: RawLayout = serde_json::from_str(source).map_err(|e| {
            let message = e.to_string();
            let field = message.split('`').nth(1).unwrap_or("document").to_owned();
            Error::parse("beam layout", field, message)
        })?;
        Self::from_records(raw.name, raw.antenna, raw.beams)
    }

    pub fn from_records(name: String, antenna: AntennaParameters, mut records: Vec<BeamRecord>) -> Result<Self> {
        if !(antenna.max_gain_dbi.is_finite() && antenna.max_gain_dbi > 0.0) {
            return Err(Error::validation("antenna.max_gain_dbi", "must be positive"));
        }
        if !(antenna.theta_3db_deg.is_finite() && antenna.theta_3db_deg > 0.0 && antenna.theta_3db_deg < 90.0) {
            return Err(Error::validation("antenna.theta_3db_deg", "must lie in (0, 90) degrees"));
        }
        if records.is_empty() {
            return Err(Error::validation("beams", "layout has no beams"));
        }
        records.sort_by_key(|r| r.id);
        let mut beams = Vec::with_capacity(records.len());
        for (expected, record) in (1u32..).zip(records) {
            if record.id != expected {
                return Err(Error::validation(
                    format!("beam {}", record.id),
                    format!("beam ids must be 1..=N_B without gaps or duplicates (expected {expected})"),
                ));
            }
            let to_point = |c: [f64; 2]| GeoPoint::new(c[0], c[1]);
            let beam = Beam::new(record.id, to_point(record.center), record.boundary.into_iter().map(to_point).collect())?;
            if let Some(stated) = record.area_km2 {
                let rel = (stated - beam.area_km2).abs() / beam.area_km2;
                if !(rel <= 0.01) {
                    return Err(Error::validation(
                        format!("beam {} area_km2", beam.id),
                        format!("stated {stated} km² differs from geodesic {:.1} km² by more than 1%", beam.area_km2),
                    ));
                }
            }
            beams.push(beam);
        }
        Ok(Self { name, antenna, beams })
    }

    pub fn to_json_string(&self) -> String {
        let raw = RawLayout {
            name: self.name.clone(),
            antenna: self.antenna,
            beams: self.beams.iter().map(Beam::to_record).collect(),
        };
        serde_json::to_string_pretty(&raw).expect("layout serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;

    fn square(center: GeoPoint, half_km: f64) -> Vec<GeoPoint> {
        let plane = TangentPlane::new(center);
        [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]
            .iter()
            .map(|s| plane.unproject([s[0] * half_km, s[1] * half_km]))
            .collect()
    }

    #[test]
    fn bundled_layouts_validate() {
        for (src, n) in [(data::BEAMS_HEX7, 7), (data::BEAMS_HEX19, 19), (data::BEAMS_EUROPE71, 71)] {
            let layout = BeamLayout::from_json_str(src).unwrap();
            assert_eq!(layout.beams.len(), n);
        }
    }

    #[test]
    fn rejects_center_outside() {
        let c = GeoPoint::new(45.0, 10.0);
        let off = square(GeoPoint::new(45.0, 14.0), 50.0);
        assert!(matches!(Beam::new(1, c, off), Err(Error::Validation { .. })));
    }

    #[test]
    fn rejects_wrong_area() {
        let c = GeoPoint::new(45.0, 10.0);
        let rec = BeamRecord {
            id: 1,
            center: [45.0, 10.0],
            boundary: square(c, 50.0).iter().map(|p| [p.lat_deg, p.lon_deg]).collect(),
            area_km2: Some(11_000.0),
        };
        let antenna = AntennaParameters { max_gain_dbi: 45.0, theta_3db_deg: 0.3 };
        let err = BeamLayout::from_records("t".into(), antenna, vec![rec.clone()]).unwrap_err();
        assert!(err.to_string().contains("beam 1"), "{err}");
        let ok = BeamRecord { area_km2: Some(10_050.0), ..rec };
        assert!(BeamLayout::from_records("t".into(), antenna, vec![ok]).is_ok());
    }

    #[test]
    fn rejects_id_gaps() {
        let c = GeoPoint::new(45.0, 10.0);
        let boundary: Vec<[f64; 2]> = square(c, 50.0).iter().map(|p| [p.lat_deg, p.lon_deg]).collect();
        let rec = |id| BeamRecord { id, center: [45.0, 10.0], boundary: boundary.clone(), area_km2: None };
        let antenna = AntennaParameters { max_gain_dbi: 45.0, theta_3db_deg: 0.3 };
        assert!(BeamLayout::from_records("t".into(), antenna, vec![rec(1), rec(3)]).is_err());
    }

    #[test]
    fn parse_error_names_field() {
        let err = BeamLayout::from_json_str(r#"{"antenna": {"max_gain_dbi": 1, "theta_3db_deg": 1}}"#).unwrap_err();
        assert!(matches!(err, Error::Parse { ref field, .. } if field == "beams"), "{err}");
    }
}
