//! TDMA cluster schedulers.
//!
//! Both schedulers draw uniformly from a per-beam pool of available clusters.
//! A draw removes the cluster from the pool while more than one remains;
//! drawing the last one re-initializes the pool. Within one pool epoch a beam
//! therefore never repeats a cluster.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clustering::ClusterPartition;
use crate::geometry::{SectorId, Sectorisation};
use crate::seeds;
use crate::{Error, Result};

/// Uniform sampling without replacement that refills when exhausted.
#[derive(Debug, Clone)]
pub struct PoolSampler {
    full: Vec<usize>,
    pool: Vec<usize>,
}

impl PoolSampler {
    pub fn new(clusters: Vec<usize>) -> Result<Self> {
        if clusters.is_empty() {
            return Err(Error::Domain("cannot sample from an empty cluster pool".into()));
        }
        Ok(Self { pool: clusters.clone(), full: clusters })
    }

    pub fn available(&self) -> &[usize] {
        &self.pool
    }

    pub fn draw(&mut self, rng: &mut ChaCha8Rng) -> usize {
        let pos = rng.random_range(0..self.pool.len());
        let cluster = self.pool[pos];
        if self.pool.len() > 1 {
            self.pool.remove(pos);
        } else {
            self.pool.clone_from(&self.full);
        }
        cluster
    }
}

/// The cluster served in one beam during one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Selection {
    /// 0-based index into the beam's partition.
    pub cluster: usize,
    /// Taken from a neighbouring sector because the frame's sector was empty
    /// in this beam.
    pub borrowed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScheduleFrame {
    /// Served sector; `None` for the random scheduler.
    pub sector: Option<SectorId>,
    /// One selection per beam, in beam order.
    pub selections: Vec<Selection>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ScheduleSequence {
    pub frames: Vec<ScheduleFrame>,
}

impl ScheduleSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Clusters served by `beam`, frame by frame.
    pub fn beam_sequence(&self, beam: usize) -> Vec<usize> {
        self.frames.iter().map(|f| f.selections[beam].cluster).collect()
    }
}

fn beam_rng(seed: u64, beam_index: usize) -> ChaCha8Rng {
    seeds::rng(seeds::derive(seed, beam_index as u64))
}

/// Smallest admissible random-schedule length, `max_b N_K`.
pub fn min_random_frames(partitions: &[ClusterPartition]) -> usize {
    partitions.iter().map(ClusterPartition::num_clusters).max().unwrap_or(0)
}

/// Random scheduling over `num_frames` frames.
pub fn random_schedule(partitions: &[ClusterPartition], num_frames: usize, seed: u64) -> Result<ScheduleSequence> {
    if partitions.is_empty() {
        return Err(Error::Domain("no beams to schedule".into()));
    }
    let bound = min_random_frames(partitions);
    if num_frames < bound {
        return Err(Error::validation(
            "random_frames",
            format!("{num_frames} frames cannot serve {bound} clusters"),
        ));
    }
    let mut beams = partitions
        .iter()
        .enumerate()
        .map(|(b, p)| Ok((PoolSampler::new((0..p.num_clusters()).collect())?, beam_rng(seed, b))))
        .collect::<Result<Vec<_>>>()?;
    let frames = (0..num_frames)
        .map(|_| ScheduleFrame {
            sector: None,
            selections: beams
                .iter_mut()
                .map(|(pool, rng)| Selection { cluster: pool.draw(rng), borrowed: false })
                .collect(),
        })
        .collect();
    Ok(ScheduleSequence { frames })
}

/// Clusters a beam serves while sector `q` is on air: its own sector-`q`
/// clusters, or else the union of its nearest non-empty sectors (ring
/// distance first, then wedge distance).
fn sector_pool(s: &Sectorisation, q: SectorId) -> (Vec<usize>, bool) {
    let own = s.members(q);
    if !own.is_empty() {
        return (own.to_vec(), false);
    }
    let layout = s.layout();
    let nearest = layout
        .sectors()
        .filter(|&z| !s.members(z).is_empty())
        .map(|z| layout.adjacency(q, z))
        .min();
    let mut pool: Vec<usize> = layout
        .sectors()
        .filter(|&z| !s.members(z).is_empty() && Some(layout.adjacency(q, z)) == nearest)
        .flat_map(|z| s.members(z).iter().copied())
        .collect();
    pool.sort_unstable();
    (pool, true)
}

/// Frames spent on sector `q`: `max_b |sector-q clusters of beam b|`.
pub fn sector_frames(sectorisations: &[Sectorisation], q: SectorId) -> usize {
    sectorisations.iter().map(|s| s.members(q).len()).max().unwrap_or(0)
}

/// Geographical scheduling: serve the beam-centre sector, then the cells in
/// index order, spending `max_b |sector-q clusters|` frames on each sector
/// and skipping sectors that are empty in every beam.
pub fn gsa_schedule(partitions: &[ClusterPartition], sectorisations: &[Sectorisation], seed: u64) -> Result<ScheduleSequence> {
    if partitions.is_empty() || partitions.len() != sectorisations.len() {
        return Err(Error::Domain(format!(
            "{} partitions for {} sectorisations",
            partitions.len(),
            sectorisations.len()
        )));
    }
    for (p, s) in partitions.iter().zip(sectorisations) {
        if p.num_clusters() != s.num_clusters() || p.num_clusters() == 0 {
            return Err(Error::Domain(format!("beam {}: sectorisation does not match its clusters", p.beam_id)));
        }
    }
    let layout = sectorisations[0].layout();
    let mut frames = Vec::new();
    for q in layout.sectors() {
        let n_q = sector_frames(sectorisations, q);
        if n_q == 0 {
            continue;
        }
        let q_index = layout.index_of(q) as u64;
        let mut beams = sectorisations
            .iter()
            .enumerate()
            .map(|(b, s)| {
                let (pool, borrowed) = sector_pool(s, q);
                let rng = seeds::rng(seeds::derive(seeds::derive(seed, b as u64), q_index));
                Ok((PoolSampler::new(pool)?, borrowed, rng))
            })
            .collect::<Result<Vec<_>>>()?;
        for _ in 0..n_q {
            frames.push(ScheduleFrame {
                sector: Some(q),
                selections: beams
                    .iter_mut()
                    .map(|(pool, borrowed, rng)| Selection { cluster: pool.draw(rng), borrowed: *borrowed })
                    .collect(),
            });
        }
    }
    Ok(ScheduleSequence { frames })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{NormalizedPolar, SectorLayout};
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn partition(beam_id: u32, n: usize) -> ClusterPartition {
        ClusterPartition { beam_id, clusters: (0..n).map(|i| vec![i]).collect() }
    }

    fn sorted(mut v: Vec<usize>) -> Vec<usize> {
        v.sort_unstable();
        v
    }

    fn layout() -> SectorLayout {
        SectorLayout::new(&[0.2, 0.6, 0.8, 1.0], &[FRAC_PI_2, PI, 1.5 * PI, TAU]).unwrap()
    }

    fn at(radius: f64, angle: f64) -> NormalizedPolar {
        NormalizedPolar { angle, radius }
    }

    #[test]
    fn pool_epochs() {
        let mut rng = seeds::rng(3);
        let mut pool = PoolSampler::new(vec![4, 5, 6]).unwrap();
        for _ in 0..5 {
            let epoch: Vec<usize> = (0..3).map(|_| pool.draw(&mut rng)).collect();
            assert_eq!(sorted(epoch), vec![4, 5, 6]);
            assert_eq!(pool.available(), &[4, 5, 6]);
        }
        assert!(PoolSampler::new(vec![]).is_err());
    }

    #[test]
    fn single_cluster_everywhere() {
        let parts: Vec<_> = (1..=3).map(|b| partition(b, 1)).collect();
        let s = random_schedule(&parts, 4, 9).unwrap();
        assert!(s.frames.iter().all(|f| f.selections.iter().all(|x| x.cluster == 0)));
    }

    #[test]
    fn hand_trace_two_and_four() {
        let parts = vec![partition(1, 2), partition(2, 4)];
        for seed in 0..50 {
            let s = random_schedule(&parts, 4, seed).unwrap();
            let a = s.beam_sequence(0);
            assert_eq!(sorted(a[..2].to_vec()), vec![0, 1]);
            assert_eq!(sorted(a[2..].to_vec()), vec![0, 1]);
            assert_eq!(sorted(s.beam_sequence(1)), vec![0, 1, 2, 3]);
        }
        assert!(random_schedule(&parts, 3, 0).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        let parts = vec![partition(1, 5), partition(2, 7)];
        assert_eq!(random_schedule(&parts, 9, 4).unwrap(), random_schedule(&parts, 9, 4).unwrap());
        let draws: std::collections::HashSet<_> =
            (0..20).map(|seed| random_schedule(&parts, 9, seed).unwrap().beam_sequence(1)).collect();
        assert!(draws.len() > 1);
    }

    #[test]
    fn gsa_one_cluster_per_sector() {
        let l = layout();
        let bary: Vec<_> = l
            .sectors()
            .map(|z| match z {
                SectorId::BeamCenter => at(0.0, 0.0),
                SectorId::Cell { ring, wedge } => at([0.4, 0.7, 0.9][ring - 1], (wedge as f64 - 0.5) * FRAC_PI_2),
            })
            .collect();
        let parts = vec![partition(1, 13), partition(2, 13)];
        let secs = vec![Sectorisation::new(1, &l, &bary), Sectorisation::new(2, &l, &bary)];
        let s = gsa_schedule(&parts, &secs, 1).unwrap();
        assert_eq!(s.len(), 13);
        for (i, f) in s.frames.iter().enumerate() {
            assert_eq!(f.sector, Some(l.sector_at(i)));
            assert!(f.selections.iter().all(|x| x.cluster == i && !x.borrowed));
        }
    }

    #[test]
    fn gsa_hand_trace_three_versus_one() {
        // Beam 1 has clusters 0..2 in cell R1W1 and cluster 3 at the centre;
        // beam 2 has one cluster in each of those sectors.
        let l = layout();
        let q = SectorId::Cell { ring: 1, wedge: 1 };
        let a = [at(0.3, 0.1), at(0.5, 0.2), at(0.4, 1.0), at(0.05, 3.0)];
        let b = [at(0.1, 2.0), at(0.45, 0.7)];
        let parts = vec![partition(1, 4), partition(2, 2)];
        let secs = vec![Sectorisation::new(1, &l, &a), Sectorisation::new(2, &l, &b)];
        assert_eq!(sector_frames(&secs, q), 3);
        for seed in 0..30 {
            let s = gsa_schedule(&parts, &secs, seed).unwrap();
            assert_eq!(s.len(), 4);
            assert_eq!(s.frames[0].sector, Some(SectorId::BeamCenter));
            assert_eq!(s.frames[0].selections, vec![
                Selection { cluster: 3, borrowed: false },
                Selection { cluster: 0, borrowed: false },
            ]);
            let in_q = &s.frames[1..];
            assert!(in_q.iter().all(|f| f.sector == Some(q) && f.selections[1].cluster == 1));
            assert_eq!(sorted(in_q.iter().map(|f| f.selections[0].cluster).collect()), vec![0, 1, 2]);
        }
    }

    #[test]
    fn gsa_borrows_from_nearest_sector() {
        // Beam 2 has nothing in R1W1; its nearest populated sectors are
        // R1W2 (one wedge away) and R1W4 (one wedge away, circularly).
        let l = layout();
        let a = [at(0.3, 0.1)];
        let b = [at(0.3, 2.0), at(0.3, 5.0), at(0.95, 0.1)];
        let parts = vec![partition(1, 1), partition(2, 3)];
        let secs = vec![Sectorisation::new(1, &l, &a), Sectorisation::new(2, &l, &b)];
        let (pool, borrowed) = sector_pool(&secs[1], SectorId::Cell { ring: 1, wedge: 1 });
        assert!(borrowed);
        assert_eq!(pool, vec![0, 1]);
        let (pool, _) = sector_pool(&secs[0], SectorId::Cell { ring: 3, wedge: 2 });
        assert_eq!(pool, vec![0]);
        let s = gsa_schedule(&parts, &secs, 0).unwrap();
        assert_eq!(s.len(), 4);
        for f in &s.frames {
            let q = f.sector.unwrap();
            for (beam, x) in f.selections.iter().enumerate() {
                assert_eq!(x.borrowed, secs[beam].sector_of(x.cluster) != q);
            }
        }
    }

    #[test]
    fn gsa_single_sector_is_random_within_it() {
        let l = layout();
        let bary = [at(0.1, 0.0), at(0.0, 0.0), at(0.15, 1.0)];
        let parts = vec![partition(1, 3), partition(2, 3)];
        let secs = vec![Sectorisation::new(1, &l, &bary), Sectorisation::new(2, &l, &bary)];
        let s = gsa_schedule(&parts, &secs, 5).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(sorted(s.beam_sequence(0)), vec![0, 1, 2]);
        assert_eq!(sorted(s.beam_sequence(1)), vec![0, 1, 2]);
    }
}
