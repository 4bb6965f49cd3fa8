//! In-beam geometry: normalized polar coordinates and scheduling sectors.
//!
//! All geometry happens in the azimuthal equidistant plane of the beam centre
//! (see [`crate::geodesy::TangentPlane`]). Angles are measured counterclockwise
//! from local east in `[0, 2π)`; the angle of the centre itself is 0.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geodesy::GeoPoint;
use crate::scenario::Beam;
use crate::{Error, Result};

/// Relative slack used when deciding whether a point sits on the boundary.
const BOUNDARY_TOLERANCE: f64 = 1e-9;

/// Closed polygon in a beam's tangent plane, km, origin at the beam centre.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarPolygon {
    vertices: Vec<[f64; 2]>,
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

impl PlanarPolygon {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Geometry(format!("polygon needs at least 3 vertices, got {}", vertices.len())));
        }
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Geometry("polygon has non-finite vertices".into()));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    fn edges(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Signed shoelace area (positive for counterclockwise vertices).
    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|(p, q)| cross(p, q)).sum::<f64>()
    }

    /// True when no two non-adjacent edges touch.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        let edges: Vec<_> = self.edges().collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if segments_intersect(edges[i], edges[j]) {
                    return false;
                }
            }
        }
        // Degenerate (zero-area) outlines are not simple either.
        self.signed_area().abs() > 0.0
    }

    /// Even-odd ray-casting containment test.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Distance from the origin to the boundary along azimuth `angle`.
    ///
    /// When the ray crosses the boundary more than once (a polygon that is not
    /// star-shaped about its centre) the nearest crossing is returned.
    pub fn edge_radius(&self, angle: f64) -> Result<f64> {
        let dir = [angle.cos(), angle.sin()];
        let mut hits: Vec<f64> = Vec::with_capacity(2);
        for (p, q) in self.edges() {
            let e = sub(q, p);
            let denom = cross(dir, e);
            if denom.abs() < 1e-15 * (e[0].abs() + e[1].abs()) {
                continue;
            }
            let t = cross(p, e) / denom;
            let s = cross(p, dir) / denom;
            if t > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s) {
                hits.push(t);
            }
        }
        hits.sort_by(f64::total_cmp);
        let nearest = *hits
            .first()
            .ok_or_else(|| Error::Geometry(format!("ray at {angle} rad does not meet the beam boundary")))?;
        let distinct = hits.iter().filter(|&&t| t > nearest * (1.0 + BOUNDARY_TOLERANCE)).count();
        if distinct > 0 {
            log::debug!("ray at {angle} rad crosses the boundary {} times; using nearest", distinct + 1);
        }
        Ok(nearest)
    }

    /// Normalized polar coordinates without the in-polygon check.
    pub fn polar_unchecked(&self, p: [f64; 2]) -> Result<NormalizedPolar> {
        let dist = p[0].hypot(p[1]);
        if dist == 0.0 {
            return Ok(NormalizedPolar { angle: 0.0, radius: 0.0 });
        }
        let angle = normalize_angle(p[1].atan2(p[0]));
        let radius = dist / self.edge_radius(angle)?;
        Ok(NormalizedPolar { angle, radius })
    }

    /// Normalized polar coordinates of an in-polygon point. Points within a
    /// relative `1e-9` of the boundary are snapped to radius 1.
    pub fn to_normalized_polar(&self, p: [f64; 2]) -> Result<NormalizedPolar> {
        let mut polar = self.polar_unchecked(p)?;
        if polar.radius > 1.0 + BOUNDARY_TOLERANCE {
            return Err(Error::Domain(format!(
                "point ({:.3}, {:.3}) km lies outside the beam (normalized radius {:.6})",
                p[0], p[1], polar.radius
            )));
        }
        polar.radius = polar.radius.min(1.0);
        Ok(polar)
    }
}

fn orientation(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    cross(sub(b, a), sub(c, a))
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

fn segments_intersect((p1, p2): ([f64; 2], [f64; 2]), (q1, q2): ([f64; 2], [f64; 2])) -> bool {
    let d1 = orientation(q1, q2, p1);
    let d2 = orientation(q1, q2, p2);
    let d3 = orientation(p1, p2, q1);
    let d4 = orientation(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

fn normalize_angle(a: f64) -> f64 {
    let a = a.rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Position inside a beam: azimuth from local east and distance from the
/// centre divided by the edge distance along the same azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedPolar {
    pub angle: f64,
    pub radius: f64,
}

/// `R(φ)` of a beam, km.
pub fn edge_radius(beam: &Beam, angle: f64) -> Result<f64> {
    beam.local_polygon().edge_radius(angle)
}

/// Normalized polar coordinates of a geodetic point inside `beam`.
pub fn to_normalized_polar(beam: &Beam, point: &GeoPoint) -> Result<NormalizedPolar> {
    beam.local_polygon().to_normalized_polar(beam.plane().project(point))
}

/// A scheduling sector: the beam-centre disc or one ring/wedge cell.
/// Rings and wedges are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SectorId {
    BeamCenter,
    Cell { ring: usize, wedge: usize },
}

impl fmt::Display for SectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SectorId::BeamCenter => f.write_str("BC"),
            SectorId::Cell { ring, wedge } => write!(f, "R{ring}W{wedge}"),
        }
    }
}

/// Sector boundaries shared by every beam (normalized values adapt to each
/// beam's shape by construction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorLayout {
    center_radius: f64,
    ring_radii: Vec<f64>,
    wedge_angles: Vec<f64>,
}

impl SectorLayout {
    /// `radii` starts with the beam-centre radius and ends at 1; `angles`
    /// ascends to 2π.
    pub fn new(radii: &[f64], angles: &[f64]) -> Result<Self> {
        let strictly_ascending = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if radii.len() < 2 {
            return Err(Error::validation("sector_radii", "need the beam-centre radius and at least one ring"));
        }
        if !strictly_ascending(radii) || radii[0] <= 0.0 || radii[radii.len() - 1] != 1.0 {
            return Err(Error::validation("sector_radii", "must ascend strictly within (0, 1] and end at 1.0"));
        }
        if angles.is_empty() || !strictly_ascending(angles) || angles[0] <= 0.0 || angles[angles.len() - 1] != TAU {
            return Err(Error::validation("sector_angles", "must ascend strictly within (0, 2π] and end at 2π"));
        }
        Ok(Self {
            center_radius: radii[0],
            ring_radii: radii[1..].to_vec(),
            wedge_angles: angles.to_vec(),
        })
    }

    pub fn center_radius(&self) -> f64 {
        self.center_radius
    }

    pub fn num_rings(&self) -> usize {
        self.ring_radii.len()
    }

    pub fn num_wedges(&self) -> usize {
        self.wedge_angles.len()
    }

    /// `N_S = N_R·N_φ + 1`.
    pub fn num_sectors(&self) -> usize {
        self.num_rings() * self.num_wedges() + 1
    }

    /// Dense index: 0 for the beam centre, `(ring-1)·N_φ + wedge` otherwise.
    pub fn index_of(&self, sector: SectorId) -> usize {
        match sector {
            SectorId::BeamCenter => 0,
            SectorId::Cell { ring, wedge } => (ring - 1) * self.num_wedges() + wedge,
        }
    }

    pub fn sector_at(&self, index: usize) -> SectorId {
        if index == 0 {
            SectorId::BeamCenter
        } else {
            let i = index - 1;
            SectorId::Cell {
                ring: i / self.num_wedges() + 1,
                wedge: i % self.num_wedges() + 1,
            }
        }
    }

    /// Sectors in service order: beam centre, then cells by dense index.
    pub fn sectors(&self) -> impl Iterator<Item = SectorId> + '_ {
        (0..self.num_sectors()).map(|i| self.sector_at(i))
    }

    /// Sector of a point. The beam centre disc is closed (`r ≤ r_BC`); cells
    /// are `(r_{q-1}, r_q] × (φ_{q-1}, φ_q]` with `φ = 0` read as `2π`.
    /// Radii beyond 1 fall in the outer ring.
    pub fn assign(&self, p: NormalizedPolar) -> SectorId {
        if p.radius <= self.center_radius {
            return SectorId::BeamCenter;
        }
        let ring = self
            .ring_radii
            .iter()
            .position(|&r| p.radius <= r)
            .unwrap_or(self.ring_radii.len() - 1);
        let angle = if p.angle <= 0.0 { TAU } else { p.angle.min(TAU) };
        let wedge = self.wedge_angles.iter().position(|&a| angle <= a).unwrap_or(self.wedge_angles.len() - 1);
        SectorId::Cell {
            ring: ring + 1,
            wedge: wedge + 1,
        }
    }

    /// Ring/wedge distance used to pick a substitute when a sector is empty:
    /// ring difference first (the centre is ring 0), then circular wedge
    /// difference.
    pub fn adjacency(&self, a: SectorId, b: SectorId) -> (usize, usize) {
        let ring = |s: SectorId| match s {
            SectorId::BeamCenter => 0,
            SectorId::Cell { ring, .. } => ring,
        };
        let wedge_gap = match (a, b) {
            (SectorId::Cell { wedge: wa, .. }, SectorId::Cell { wedge: wb, .. }) => {
                let d = wa.abs_diff(wb);
                d.min(self.num_wedges() - d)
            }
            _ => 0,
        };
        (ring(a).abs_diff(ring(b)), wedge_gap)
    }
}

/// Assignment of one beam's clusters to sectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Sectorisation {
    pub beam_id: u32,
    layout: SectorLayout,
    cluster_sectors: Vec<SectorId>,
    members: Vec<Vec<usize>>,
}

impl Sectorisation {
    /// Assign each cluster (given by its barycentre polar coordinates, in
    /// cluster-index order) to its sector.
    pub fn new(beam_id: u32, layout: &SectorLayout, barycentres: &[NormalizedPolar]) -> Self {
        let mut members = vec![Vec::new(); layout.num_sectors()];
        let cluster_sectors: Vec<SectorId> = barycentres.iter().map(|&p| layout.assign(p)).collect();
        for (cluster, &sector) in cluster_sectors.iter().enumerate() {
            members[layout.index_of(sector)].push(cluster);
        }
        Self {
            beam_id,
            layout: layout.clone(),
            cluster_sectors,
            members,
        }
    }

    pub fn layout(&self) -> &SectorLayout {
        &self.layout
    }

    pub fn num_sectors(&self) -> usize {
        self.layout.num_sectors()
    }

    /// Cluster indices whose barycentre lies in `sector`.
    pub fn members(&self, sector: SectorId) -> &[usize] {
        &self.members[self.layout.index_of(sector)]
    }

    pub fn sector_of(&self, cluster: usize) -> SectorId {
        self.cluster_sectors[cluster]
    }

    pub fn num_clusters(&self) -> usize {
        self.cluster_sectors.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn regular(n: usize, r: f64, phase: f64) -> PlanarPolygon {
        PlanarPolygon::new(
            (0..n)
                .map(|k| {
                    let a = phase + TAU * k as f64 / n as f64;
                    [r * a.cos(), r * a.sin()]
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn near_circular_radius() {
        let circle = regular(720, 250.0, 0.0);
        for k in 0..16 {
            let r = circle.edge_radius(k as f64 * 0.39).unwrap();
            assert!((r - 250.0).abs() < 250.0 * (1.0 - (PI / 720.0).cos()) + 1e-9);
        }
    }

    #[test]
    fn hexagon_vertex_over_midpoint() {
        let hex = regular(6, 250.0, 0.0);
        let vertex = hex.edge_radius(0.0).unwrap();
        let mid = hex.edge_radius(PI / 6.0).unwrap();
        assert!((vertex / mid - 2.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn square_corner() {
        let a = 3.0;
        let sq = PlanarPolygon::new(vec![[-a, -a], [a, -a], [a, a], [-a, a]]).unwrap();
        assert!((sq.edge_radius(FRAC_PI_4).unwrap() - a * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn center_and_boundary() {
        let hex = regular(6, 250.0, 0.1);
        assert_eq!(hex.to_normalized_polar([0.0, 0.0]).unwrap(), NormalizedPolar { angle: 0.0, radius: 0.0 });
        let v = hex.vertices()[2];
        let mid = [(v[0] + hex.vertices()[3][0]) / 2.0, (v[1] + hex.vertices()[3][1]) / 2.0];
        for p in [v, mid] {
            assert!((hex.to_normalized_polar(p).unwrap().radius - 1.0).abs() < 1e-9);
        }
        assert!(matches!(hex.to_normalized_polar([400.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn half_radius_due_east() {
        let circle = regular(3600, 250.0, 0.0);
        let p = circle.to_normalized_polar([125.0, 0.0]).unwrap();
        assert_eq!(p.angle, 0.0);
        assert!((p.radius - 0.5).abs() < 1e-9);
    }

    #[test]
    fn non_star_polygon_takes_nearest_hit() {
        // A "C" shape: the ray along +x leaves the notch and re-enters.
        let c = PlanarPolygon::new(vec![
            [-1.0, -3.0],
            [4.0, -3.0],
            [4.0, -1.0],
            [1.0, -1.0],
            [1.0, 1.0],
            [4.0, 1.0],
            [4.0, 3.0],
            [-1.0, 3.0],
        ])
        .unwrap();
        assert!((c.edge_radius(0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bowtie_is_not_simple() {
        let bowtie = PlanarPolygon::new(vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(!bowtie.is_simple());
        assert!(regular(6, 1.0, 0.0).is_simple());
    }

    fn fig3_layout() -> SectorLayout {
        SectorLayout::new(&[0.2, 0.6, 0.8, 1.0], &[FRAC_PI_2, PI, TAU]).unwrap()
    }

    #[test]
    fn sector_examples() {
        let layout = fig3_layout();
        assert_eq!(layout.num_sectors(), 10);
        assert_eq!(layout.assign(NormalizedPolar { angle: 1.0, radius: 0.1 }), SectorId::BeamCenter);
        assert_eq!(layout.assign(NormalizedPolar { angle: 1.0, radius: 0.2 }), SectorId::BeamCenter);
        assert_eq!(
            layout.assign(NormalizedPolar { angle: 3.0 * FRAC_PI_4, radius: 0.7 }),
            SectorId::Cell { ring: 2, wedge: 2 }
        );
        // φ = 0 belongs to the last wedge.
        assert_eq!(
            layout.assign(NormalizedPolar { angle: 0.0, radius: 0.9 }),
            SectorId::Cell { ring: 3, wedge: 3 }
        );
        // Closed upper bounds.
        assert_eq!(
            layout.assign(NormalizedPolar { angle: FRAC_PI_2, radius: 0.6 }),
            SectorId::Cell { ring: 1, wedge: 1 }
        );
    }

    #[test]
    fn dense_index_round_trips() {
        let layout = SectorLayout::new(&[0.2, 0.6, 0.8, 1.0], &[FRAC_PI_2, PI, 3.0 * FRAC_PI_2, TAU]).unwrap();
        assert_eq!(layout.num_sectors(), 13);
        for (i, s) in layout.sectors().enumerate() {
            assert_eq!(layout.index_of(s), i);
        }
    }

    #[test]
    fn invalid_layouts() {
        assert!(SectorLayout::new(&[0.2, 0.6], &[TAU]).is_err());
        assert!(SectorLayout::new(&[0.2, 0.2, 1.0], &[TAU]).is_err());
        assert!(SectorLayout::new(&[0.2, 1.0], &[PI, 5.0]).is_err());
        assert!(SectorLayout::new(&[0.2, 1.0], &[TAU]).is_ok());
    }

    #[test]
    fn adjacency_is_ring_then_wedge() {
        let layout = SectorLayout::new(&[0.2, 0.6, 1.0], &[FRAC_PI_2, PI, 3.0 * FRAC_PI_2, TAU]).unwrap();
        let c = |ring, wedge| SectorId::Cell { ring, wedge };
        assert_eq!(layout.adjacency(c(1, 1), c(1, 4)), (0, 1));
        assert_eq!(layout.adjacency(c(1, 1), c(2, 3)), (1, 2));
        assert_eq!(layout.adjacency(SectorId::BeamCenter, c(2, 3)), (2, 0));
    }
}
