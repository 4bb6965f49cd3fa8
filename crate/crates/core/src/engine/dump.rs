//! Tabular dumps of one iteration's users, sectors and clusters.

use super::{Pipeline, IterationInputs};
use crate::Result;

fn to_csv(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

/// Every user with its normalized polar coordinates and sector.
pub fn sector_table(pipeline: &Pipeline<'_>, inputs: &IterationInputs) -> Result<String> {
    let beams = pipeline.scenario.beams();
    let mut rows = Vec::with_capacity(inputs.users.len());
    for u in &inputs.users {
        let beam = &beams[u.beam_index];
        let polar = beam.local_polygon().to_normalized_polar(u.local_km)?;
        rows.push(vec![
            beam.id().to_string(),
            u.user_id.to_string(),
            u.position.lat_deg.to_string(),
            u.position.lon_deg.to_string(),
            u.local_km[0].to_string(),
            u.local_km[1].to_string(),
            polar.angle.to_string(),
            polar.radius.to_string(),
            pipeline.sectors.assign(polar).to_string(),
        ]);
    }
    Ok(to_csv(&["beam", "user", "lat_deg", "lon_deg", "x_km", "y_km", "angle_rad", "radius", "sector"], rows))
}

/// Every cluster member with its cluster's barycentre sector.
pub fn cluster_table(pipeline: &Pipeline<'_>, inputs: &IterationInputs) -> String {
    let beams = pipeline.scenario.beams();
    let mut rows = Vec::new();
    for (b, partition) in inputs.partitions.iter().enumerate() {
        for (c, members) in partition.clusters.iter().enumerate() {
            let g = inputs.barycentres[b][c];
            for &u in members {
                let user = &inputs.users[u];
                rows.push(vec![
                    beams[b].id().to_string(),
                    c.to_string(),
                    members.len().to_string(),
                    u.to_string(),
                    user.position.lat_deg.to_string(),
                    user.position.lon_deg.to_string(),
                    g.angle.to_string(),
                    g.radius.to_string(),
                    inputs.sectorisations[b].sector_of(c).to_string(),
                ]);
            }
        }
    }
    to_csv(
        &["beam", "cluster", "size", "user", "lat_deg", "lon_deg", "barycentre_angle_rad", "barycentre_radius", "sector"],
        rows,
    )
}
