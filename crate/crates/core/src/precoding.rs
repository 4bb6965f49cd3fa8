//! Multicast MMSE precoding and SINR evaluation.
//!
//! `W = (H̃ᴴ H̃ + diag(α))⁻¹ H̃ᴴ`, solved through a Cholesky factorization of
//! the (Hermitian, positive definite for `α > 0`) regularized Gram matrix.
//! Column `b` of `W` carries the symbol stream of beam `b`; row `j` is
//! radiated by feed `j`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{FrameChannelMatrix, LinkBudget};
use crate::scenario::{NormalizationMode, Regularization};
use crate::{Error, Result};

/// Per-beam regularization factors.
pub fn regularization(link: &LinkBudget, num_beams: usize, mode: Regularization) -> Vec<f64> {
    let alpha = match mode {
        Regularization::NoiseOverPower => link.noise_power_w / link.tx_power_w,
        Regularization::InversePower => 1.0 / link.tx_power_w,
    };
    vec![alpha; num_beams]
}

fn all_finite(m: &DMatrix<Complex64>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Regularized channel inversion of one frame.
pub fn mmse_precoder(h: &FrameChannelMatrix, alpha: &[f64]) -> Result<DMatrix<Complex64>> {
    let n = h.num_beams();
    if alpha.len() != n {
        return Err(Error::Domain(format!("{} regularization factors for {n} beams", alpha.len())));
    }
    if alpha.iter().any(|&a| !(a.is_finite() && a > 0.0)) {
        return Err(Error::Domain("regularization factors must be positive".into()));
    }
    if !all_finite(&h.matrix) {
        return Err(Error::Domain("channel matrix has non-finite entries".into()));
    }
    let hh = h.matrix.adjoint();
    let mut gram = &hh * &h.matrix;
    for (b, &a) in alpha.iter().enumerate() {
        gram[(b, b)] += Complex64::new(a, 0.0);
    }
    let w = match gram.clone().cholesky() {
        Some(chol) => chol.solve(&hh),
        // Rounding can defeat Cholesky when α is negligible next to the Gram
        // entries; LU still solves the system.
        None => gram
            .lu()
            .solve(&hh)
            .ok_or_else(|| Error::Domain("regularized Gram matrix is numerically singular".into()))?,
    };
    if !all_finite(&w) {
        return Err(Error::Domain("precoder has non-finite entries".into()));
    }
    Ok(w)
}

/// A power-normalized precoder.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecodingMatrix {
    pub w: DMatrix<Complex64>,
    pub mode: NormalizationMode,
    pub tx_power_w: f64,
}

impl PrecodingMatrix {
    /// Power radiated by feed `j`: `P_TX · Σ_k |W_jk|²`.
    pub fn antenna_power(&self, feed: usize) -> f64 {
        self.tx_power_w * self.w.row(feed).iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn total_power(&self) -> f64 {
        self.tx_power_w * self.w.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }
}

/// Scale `W` to the transmit power constraint.
///
/// * `SumPower`: `β = sqrt(N_B / ‖W‖_F²)`, total radiated power `N_B · P_TX`.
/// * `PerAntenna`: every row whose feed would exceed `P_TX` is scaled down to
///   exactly `P_TX`; other rows are untouched.
/// * `None`: `W` as computed.
pub fn normalize_power(w: DMatrix<Complex64>, mode: NormalizationMode, tx_power_w: f64) -> Result<PrecodingMatrix> {
    if !all_finite(&w) {
        return Err(Error::Domain("precoder has non-finite entries".into()));
    }
    let frobenius = w.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if frobenius == 0.0 {
        return Err(Error::Domain("cannot normalize a zero precoder".into()));
    }
    let mut w = w;
    match mode {
        NormalizationMode::SumPower => {
            let beta = (w.nrows() as f64 / frobenius).sqrt();
            w *= Complex64::new(beta, 0.0);
        }
        NormalizationMode::PerAntenna => {
            for j in 0..w.nrows() {
                let row_power = w.row(j).iter().map(|z| z.norm_sqr()).sum::<f64>();
                if row_power > 1.0 {
                    let scale = Complex64::new(row_power.sqrt().recip(), 0.0);
                    w.row_mut(j).iter_mut().for_each(|z| *z *= scale);
                }
            }
        }
        NormalizationMode::None => {}
    }
    Ok(PrecodingMatrix { w, mode, tx_power_w })
}

/// Precoded and non-precoded SINR of one scheduled user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UserSinr {
    pub user_id: usize,
    pub beam_index: usize,
    /// Linear.
    pub precoded: f64,
    /// Linear.
    pub non_precoded: f64,
}

impl UserSinr {
    pub fn is_precoding_loss(&self) -> bool {
        self.precoded < self.non_precoded
    }
}

/// A user served in the current frame together with its true channel.
#[derive(Debug, Clone, Copy)]
pub struct ScheduledUser<'a> {
    pub user_id: usize,
    pub beam_index: usize,
    pub channel: &'a [Complex64],
}

/// Unit-noise SINRs. With `h` the user's own channel and `w_j` column `j` of
/// the normalized precoder,
///
/// ```text
/// precoded     = P·|h w_b|² / (Σ_{j≠b} P·|h w_j|² + 1)
/// non-precoded = P·|h_b|²   / (Σ_{j≠b} P·|h_j|²   + 1)
/// ```
pub fn evaluate_sinr(users: &[ScheduledUser<'_>], precoder: &PrecodingMatrix) -> Vec<UserSinr> {
    let w = &precoder.w;
    let p = precoder.tx_power_w;
    let n = w.ncols();
    users
        .iter()
        .map(|u| {
            let h = u.channel;
            let mut signal = 0.0;
            let mut interference = 0.0;
            for k in 0..n {
                let mut g = Complex64::new(0.0, 0.0);
                for (j, hj) in h.iter().enumerate() {
                    g += hj * w[(j, k)];
                }
                if k == u.beam_index {
                    signal = p * g.norm_sqr();
                } else {
                    interference += p * g.norm_sqr();
                }
            }
            let own = p * h[u.beam_index].norm_sqr();
            let leak: f64 = h
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != u.beam_index)
                .map(|(_, hj)| p * hj.norm_sqr())
                .sum();
            UserSinr {
                user_id: u.user_id,
                beam_index: u.beam_index,
                precoded: signal / (interference + 1.0),
                non_precoded: own / (leak + 1.0),
            }
        })
        .collect()
}
