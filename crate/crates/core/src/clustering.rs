//! Fixed-size MaxDist clustering.
//!
//! Until every user is clustered: take the barycentre of the users not yet
//! clustered, pick the remaining user farthest from it as reference, and form
//! a cluster from the reference plus its `K − 1` nearest remaining users. The
//! last cluster holds whatever is left when `K` does not divide `N_U`.
//! Ties (farthest or nearest) go to the lowest user id.

use serde::Serialize;

use crate::channel::ChannelVector;
use crate::scenario::UserTerminal;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureVector {
    pub user_id: usize,
    pub features: Vec<f64>,
}

/// Tangent-plane position, km.
pub fn euclidean_features(user: &UserTerminal) -> FeatureVector {
    FeatureVector {
        user_id: user.user_id,
        features: user.local_km.to_vec(),
    }
}

/// Real parts followed by imaginary parts (length `2·N_B`); Euclidean
/// distance between embeddings equals the complex distance of the vectors.
pub fn channel_features(channel: &ChannelVector) -> FeatureVector {
    let c = &channel.coefficients;
    FeatureVector {
        user_id: channel.user_id,
        features: c.iter().map(|h| h.re).chain(c.iter().map(|h| h.im)).collect(),
    }
}

/// Partition of one beam's users. Clusters are numbered in creation order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterPartition {
    pub beam_id: u32,
    pub clusters: Vec<Vec<usize>>,
}

impl ClusterPartition {
    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn num_users(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// MaxDist partition into clusters of `cluster_size` (the last may be smaller).
pub fn max_dist_partition(beam_id: u32, features: &[FeatureVector], cluster_size: usize) -> Result<ClusterPartition> {
    if features.is_empty() {
        return Err(Error::Domain(format!("beam {beam_id}: no users to cluster")));
    }
    if cluster_size == 0 {
        return Err(Error::Domain("cluster size must be at least 1".into()));
    }
    let dim = features[0].features.len();
    if features.iter().any(|f| f.features.len() != dim || f.features.iter().any(|x| !x.is_finite())) {
        return Err(Error::Domain(format!("beam {beam_id}: feature vectors must be finite and equally sized")));
    }

    let mut order: Vec<usize> = (0..features.len()).collect();
    order.sort_by_key(|&i| features[i].user_id);
    let mut remaining = order;
    let mut clusters = Vec::with_capacity(features.len().div_ceil(cluster_size));
    let mut barycentre = vec![0.0; dim];

    while !remaining.is_empty() {
        barycentre.iter_mut().for_each(|g| *g = 0.0);
        for &i in &remaining {
            for (g, x) in barycentre.iter_mut().zip(&features[i].features) {
                *g += x;
            }
        }
        let n = remaining.len() as f64;
        barycentre.iter_mut().for_each(|g| *g /= n);

        // `remaining` is in ascending user id order, so strict comparison
        // keeps the lowest id among equals.
        let mut reference_pos = 0;
        let mut farthest = f64::NEG_INFINITY;
        for (pos, &i) in remaining.iter().enumerate() {
            let d = squared_distance(&features[i].features, &barycentre);
            if d > farthest {
                farthest = d;
                reference_pos = pos;
            }
        }
        let reference = remaining.remove(reference_pos);

        let take = (cluster_size - 1).min(remaining.len());
        let mut by_distance: Vec<(f64, usize, usize)> = remaining
            .iter()
            .enumerate()
            .map(|(pos, &i)| (squared_distance(&features[i].features, &features[reference].features), features[i].user_id, pos))
            .collect();
        if take < by_distance.len() {
            by_distance.select_nth_unstable_by(take, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        }
        let mut chosen: Vec<(f64, usize, usize)> = by_distance[..take].to_vec();
        chosen.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut cluster = Vec::with_capacity(take + 1);
        cluster.push(features[reference].user_id);
        cluster.extend(chosen.iter().map(|c| c.1));

        let mut drop: Vec<usize> = chosen.iter().map(|c| c.2).collect();
        drop.sort_unstable();
        for pos in drop.into_iter().rev() {
            remaining.remove(pos);
        }
        clusters.push(cluster);
    }
    Ok(ClusterPartition { beam_id, clusters })
}
