//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use beamsched::clustering::ClusterPartition;
use beamsched::data;
use beamsched::geometry::{NormalizedPolar, Sectorisation};
use beamsched::scheduling::{sector_frames, ScheduleSequence};
use beamsched::scenario::{load_scenario, Scenario};
use beamsched::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type CMat = Vec<Vec<Complex64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    (0..n)
        .map(|_| (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
        .collect()
}

fn conj_transpose(a: &CMat) -> CMat {
    let (r, c) = (a.len(), a[0].len());
    (0..c).map(|j| (0..r).map(|i| a[i][j].conj()).collect()).collect()
}

pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    (0..n)
        .map(|i| {
            (0..p)
                .map(|j| (0..m).fold(Complex64::new(0.0, 0.0), |s, k| s + a[i][k] * b[k][j]))
                .collect()
        })
        .collect()
}

/// Gauss-Jordan inversion with partial pivoting.
pub fn gauss_jordan_inverse(a: &CMat) -> CMat {
    let n = a.len();
    let mut m: CMat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| Complex64::new(f64::from(u8::from(i == j)), 0.0)));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| m[x][col].norm().total_cmp(&m[y][col].norm())).unwrap();
        m.swap(col, pivot);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for row in 0..n {
            if row != col {
                let f = m[row][col];
                if f != Complex64::new(0.0, 0.0) {
                    for k in 0..2 * n {
                        let sub = f * m[col][k];
                        m[row][k] -= sub;
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// `(HᴴH + diag α)⁻¹ Hᴴ` through an explicit inverse.
pub fn mmse_oracle(h: &CMat, alpha: &[f64]) -> CMat {
    let hh = conj_transpose(h);
    let mut gram = matmul(&hh, h);
    for (i, a) in alpha.iter().enumerate() {
        gram[i][i] += a;
    }
    matmul(&gauss_jordan_inverse(&gram), &hh)
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn relative_error(got: &CMat, want: &CMat) -> f64 {
    let diff: CMat = got
        .iter()
        .zip(want)
        .map(|(g, w)| g.iter().zip(w).map(|(x, y)| x - y).collect())
        .collect();
    frobenius(&diff) / frobenius(want)
}

/// Term-by-term SINR of a user in beam `b` with channel `h` under precoder
/// `w` (columns per beam) and per-beam power `p`.
pub fn sinr_oracle(h: &[Complex64], b: usize, w: &CMat, p: f64) -> (f64, f64) {
    let n = w[0].len();
    let mut terms = Vec::with_capacity(n);
    for k in 0..n {
        let mut g = Complex64::new(0.0, 0.0);
        for j in 0..h.len() {
            g += h[j] * w[j][k];
        }
        terms.push(p * g.norm_sqr());
    }
    let mut interference = 1.0;
    for (k, t) in terms.iter().enumerate() {
        if k != b {
            interference += t;
        }
    }
    let precoded = terms[b] / interference;
    let mut np_interference = 1.0;
    for (j, hj) in h.iter().enumerate() {
        if j != b {
            np_interference += p * hj.norm_sqr();
        }
    }
    (precoded, p * h[b].norm_sqr() / np_interference)
}

pub fn partition(beam_id: u32, n: usize) -> ClusterPartition {
    ClusterPartition { beam_id, clusters: (0..n).map(|i| vec![i]).collect() }
}

pub fn at(radius: f64, angle: f64) -> NormalizedPolar {
    NormalizedPolar { angle, radius }
}

pub fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// Bundled defaults on the named bundled layout.
pub fn bundled_scenario(layout: &str) -> Scenario {
    load_scenario(data::DEFAULT_CONFIG, data::bundled(layout).unwrap(), data::MODCOD_DVBS2X).unwrap()
}

pub fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Each beam's sequence is a run of full pool epochs, the last possibly
/// partial: no cluster repeats before all have been served.
pub fn epochs_ok(seq: &[usize], n: usize) -> bool {
    seq.chunks(n).all(|c| {
        let mut s = c.to_vec();
        s.sort_unstable();
        s.dedup();
        s.len() == c.len() && s.iter().all(|&x| x < n)
    })
}

pub fn check_gsa(schedule: &ScheduleSequence, secs: &[Sectorisation]) -> std::result::Result<(), String> {
    let layout = secs[0].layout();
    let expected: usize = layout.sectors().map(|q| sector_frames(secs, q)).sum();
    ensure(schedule.len() == expected, || format!("GSA emitted {} frames, sector sum is {expected}", schedule.len()))?;
    for (i, f) in schedule.frames.iter().enumerate() {
        let q = f.sector.ok_or("GSA frame without a sector")?;
        for (b, s) in f.selections.iter().enumerate() {
            let home = secs[b].sector_of(s.cluster);
            if s.borrowed {
                ensure(secs[b].members(q).is_empty(), || format!("frame {i} beam {b} borrowed from a populated sector"))?;
                let best = layout.sectors().filter(|&z| !secs[b].members(z).is_empty()).map(|z| layout.adjacency(q, z)).min();
                ensure(Some(layout.adjacency(q, home)) == best, || format!("frame {i} beam {b} borrowed from a far sector"))?;
            } else {
                ensure(home == q, || format!("frame {i} sector {q}: beam {b} served a cluster from {home}"))?;
            }
        }
    }
    // Within a sector the beam with the most clusters serves each once.
    let mut start = 0;
    for q in layout.sectors() {
        let n_q = sector_frames(secs, q);
        for (b, s) in secs.iter().enumerate() {
            if s.members(q).len() == n_q && n_q > 0 {
                let got = sorted(schedule.frames[start..start + n_q].iter().map(|f| f.selections[b].cluster).collect());
                ensure(got == s.members(q), || format!("sector {q} beam {b}: served {got:?}"))?;
            }
        }
        start += n_q;
    }
    Ok(())
}
