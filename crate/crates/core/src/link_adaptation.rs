//! ModCod selection and metric aggregation.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, StudentsT};

use crate::precoding::UserSinr;
use crate::scenario::ModCodTable;
use crate::{Error, Result};

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Rate of a multicast codeword: the efficiency selected by the weakest
/// member's SINR (linear).
pub fn cluster_rate(member_sinrs: &[f64], modcod: &ModCodTable) -> Result<f64> {
    let weakest = min_sinr(member_sinrs)?;
    Ok(modcod.efficiency_linear(weakest))
}

pub fn min_sinr(member_sinrs: &[f64]) -> Result<f64> {
    if member_sinrs.is_empty() {
        return Err(Error::Domain("cluster rate of an empty cluster".into()));
    }
    Ok(member_sinrs.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Per-iteration partial sums.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct IterationMetrics {
    /// Sum of cluster rates over frames and beams, bit/s/Hz.
    pub rate_sum: f64,
    /// Number of cluster rates summed.
    pub rate_count: usize,
    pub frames: usize,
    /// Frames with at least one user whose precoded SINR is below its
    /// non-precoded SINR.
    pub loss_frames: usize,
}

impl IterationMetrics {
    pub fn record_frame(&mut self, rates: &[f64], has_loss: bool) {
        self.rate_sum += rates.iter().sum::<f64>();
        self.rate_count += rates.len();
        self.frames += 1;
        self.loss_frames += usize::from(has_loss);
    }

    pub fn mean_spectral_efficiency(&self) -> f64 {
        self.rate_sum / self.rate_count as f64
    }

    pub fn loss_fraction(&self) -> f64 {
        self.loss_frames as f64 / self.frames as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Mean over frames, beams and iterations, bit/s/Hz.
    pub mean_spectral_efficiency: f64,
    pub loss_frame_fraction: f64,
    pub frames: usize,
    pub rate_samples: usize,
    pub iterations: usize,
}

/// Pool the iterations, weighting every cluster rate and every frame equally.
pub fn aggregate(iterations: &[IterationMetrics]) -> Result<MetricsReport> {
    let rate_samples: usize = iterations.iter().map(|m| m.rate_count).sum();
    let frames: usize = iterations.iter().map(|m| m.frames).sum();
    if rate_samples == 0 || frames == 0 {
        return Err(Error::Domain("no frames to aggregate".into()));
    }
    let rate_sum: f64 = iterations.iter().map(|m| m.rate_sum).sum();
    let loss_frames: usize = iterations.iter().map(|m| m.loss_frames).sum();
    Ok(MetricsReport {
        mean_spectral_efficiency: rate_sum / rate_samples as f64,
        loss_frame_fraction: loss_frames as f64 / frames as f64,
        frames,
        rate_samples,
        iterations: iterations.len(),
    })
}

/// Mean of paired differences `a_i − b_i` with a two-sided Student-t
/// confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedDifference {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub pairs: usize,
}

impl PairedDifference {
    pub fn excludes_zero(&self) -> bool {
        self.ci_low > 0.0 || self.ci_high < 0.0
    }
}

pub fn paired_difference(a: &[f64], b: &[f64], confidence: f64) -> Result<PairedDifference> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Domain(format!("paired samples of lengths {} and {}", a.len(), b.len())));
    }
    let n = a.len();
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return Ok(PairedDifference { mean, ci_low: f64::NEG_INFINITY, ci_high: f64::INFINITY, confidence, pairs: n });
    }
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .map_err(|e| Error::Domain(e.to_string()))?
        .inverse_cdf(0.5 + confidence / 2.0);
    let half = t * (var / n as f64).sqrt();
    Ok(PairedDifference { mean, ci_low: mean - half, ci_high: mean + half, confidence, pairs: n })
}

/// One-sided sign test of `H1: a_i < b_i` over paired samples; ties are
/// dropped. Returns the p-value.
pub fn sign_test_less(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Domain("sign test needs paired samples".into()));
    }
    let less = a.iter().zip(b).filter(|(x, y)| x < y).count() as u64;
    let untied = a.iter().zip(b).filter(|(x, y)| x != y).count() as u64;
    if less == 0 {
        return Ok(1.0);
    }
    let binomial = Binomial::new(0.5, untied).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(binomial.sf(less - 1))
}

/// Average SINR of each user over the frames in which its cluster was served.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UserSinrMap {
    entries: BTreeMap<usize, UserSinrSums>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct UserSinrSums {
    beam_index: usize,
    precoded: f64,
    non_precoded: f64,
    frames: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UserSinrAverage {
    pub user_id: usize,
    pub beam_index: usize,
    /// Mean of the linear SINRs, in dB.
    pub precoded_db: f64,
    pub non_precoded_db: f64,
    pub frames: usize,
}

impl UserSinrMap {
    pub fn add(&mut self, s: &UserSinr) {
        let e = self.entries.entry(s.user_id).or_insert(UserSinrSums { beam_index: s.beam_index, ..Default::default() });
        e.precoded += s.precoded;
        e.non_precoded += s.non_precoded;
        e.frames += 1;
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Averages in user id order.
    pub fn averages(&self) -> Vec<UserSinrAverage> {
        self.entries
            .iter()
            .map(|(&user_id, e)| UserSinrAverage {
                user_id,
                beam_index: e.beam_index,
                precoded_db: to_db(e.precoded / e.frames as f64),
                non_precoded_db: to_db(e.non_precoded / e.frames as f64),
                frames: e.frames,
            })
            .collect()
    }
}
