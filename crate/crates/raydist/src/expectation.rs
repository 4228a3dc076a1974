//! Closed-form expected distance functions when the surface position carries
//! Gaussian noise, their derivatives, the DRDF zero-crossing solver, and
//! Monte-Carlo mean/median oracles.
//!
//! The noise model places one intersection at S ~ N(mu, sigma^2) and the next
//! intersection rigidly at S + gap. Every expectation here is the exact
//! integral of the corresponding two-intersection field under that model;
//! `expected_urdf_isolated` additionally covers the single-intersection
//! analysis, whose minimum is exactly sigma * sqrt(2/pi) at the hit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;
use crate::math::{normal_cdf, normal_pdf, splitmix64};
use crate::ray_fields::FieldKind;

#[derive(Debug, Error)]
pub enum ExpectError {
    #[error("kind not supported by the uncertainty model")]
    UnsupportedKind,
    #[error("use density form")]
    UseDensityForm,
    #[error("crossing lost")]
    CrossingLost,
    #[error("no reliable crossing: sigma must be below the gap")]
    NoReliableCrossing,
}

/// Gaussian surface-position uncertainty: the intersection sits at
/// S ~ N(mu, sigma^2) and the next intersection at S + gap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub mu: f64,
    pub sigma: f64,
    pub gap: f64,
}

impl NoiseModel {
    pub fn new(mu: f64, sigma: f64, gap: f64) -> NoiseModel {
        assert!(sigma > 0.0, "sigma must be positive");
        assert!(gap > 0.0, "gap must be positive");
        NoiseModel { mu, sigma, gap }
    }

    /// Centered model (mu = 0).
    pub fn centered(sigma: f64, gap: f64) -> NoiseModel {
        NoiseModel::new(0.0, sigma, gap)
    }
}

fn phi(x: f64, sigma: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        normal_cdf(x, sigma)
    }
}

fn pdf(x: f64, sigma: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        normal_pdf(x, sigma)
    }
}

/// Expected SRDF: -z + (2z - n) Phi(z - n/2) + 2 sigma^2 p(z - n/2),
/// exact for the two-intersection parity-signed field.
pub fn expected_srdf(z: f64, m: &NoiseModel) -> f64 {
    let (z, n, s) = (z - m.mu, m.gap, m.sigma);
    let t = z - n / 2.0;
    -z + (2.0 * z - n) * phi(t, s) + 2.0 * s * s * pdf(t, s)
}

/// Expected DRDF: n Phi(z - n/2) - z, exact for the two-intersection field.
pub fn expected_drdf(z: f64, m: &NoiseModel) -> f64 {
    let (z, n, s) = (z - m.mu, m.gap, m.sigma);
    m.gap * phi(z - n / 2.0, s) - z
}

/// Expected URDF of the exact two-intersection field min(|z-S|, |z-S-n|).
///
/// The classic single-intersection terms z Phi(z) - z(1 - Phi(z)) + 2 s^2 p(z)
/// pick up corrections at the midpoint and at the second hit so that the
/// expectation stays valid (and non-negative) over the whole ray.
pub fn expected_urdf(z: f64, m: &NoiseModel) -> f64 {
    let (z, n, s) = (z - m.mu, m.gap, m.sigma);
    let t = z - n / 2.0;
    let u = z - n;
    let s2 = s * s;
    z * phi(z, s) - z * (1.0 - phi(z, s)) + 2.0 * s2 * pdf(z, s)
        + (n - 2.0 * z) * phi(t, s) - 2.0 * s2 * pdf(t, s)
        + 2.0 * u * phi(u, s) + 2.0 * s2 * pdf(u, s)
}

/// Expected URDF of an isolated intersection, E|z - S|.
/// Minimum value sigma * sqrt(2/pi), reached exactly at z = mu.
pub fn expected_urdf_isolated(z: f64, mu: f64, sigma: f64) -> f64 {
    let q = z - mu;
    let s2 = sigma * sigma;
    q * (2.0 * phi(q, sigma) - 1.0) + 2.0 * s2 * pdf(q, sigma)
}

/// Expected ORF: density mass within r of z, counting both intersections:
/// [Phi(z+r) - Phi(z-r)] + [Phi(z-n+r) - Phi(z-n-r)]. In [0, 1] for r <= n/2.
pub fn expected_orf(z: f64, radius: f64, m: &NoiseModel) -> f64 {
    assert!(radius > 0.0, "ORF radius must be positive");
    let (z, n, s) = (z - m.mu, m.gap, m.sigma);
    (phi(z + radius, s) - phi(z - radius, s))
        + (phi(z - n + radius, s) - phi(z - n - radius, s))
}

/// Dispatch on kind; SceneUdf is not part of the ray uncertainty model.
pub fn expected_value(kind: FieldKind, z: f64, m: &NoiseModel) -> Result<f64, ExpectError> {
    match kind {
        FieldKind::Srdf => Ok(expected_srdf(z, m)),
        FieldKind::Urdf => Ok(expected_urdf(z, m)),
        FieldKind::Drdf => Ok(expected_drdf(z, m)),
        FieldKind::Orf { radius } => Ok(expected_orf(z, radius, m)),
        FieldKind::SceneUdf => Err(ExpectError::UnsupportedKind),
    }
}

/// Analytic derivative d/dz of the expected field.
/// ORF users should call [`orf_expected_derivative`] (the density form).
pub fn expected_derivative(kind: FieldKind, z: f64, m: &NoiseModel) -> Result<f64, ExpectError> {
    let (zc, n, s) = (z - m.mu, m.gap, m.sigma);
    let t = zc - n / 2.0;
    match kind {
        FieldKind::Srdf => Ok(2.0 * phi(t, s) - 1.0),
        FieldKind::Drdf => Ok(n * pdf(t, s) - 1.0),
        FieldKind::Urdf => {
            Ok(2.0 * phi(zc, s) - 1.0 - 2.0 * phi(t, s) + 2.0 * phi(zc - n, s))
        }
        FieldKind::Orf { .. } => Err(ExpectError::UseDensityForm),
        FieldKind::SceneUdf => Err(ExpectError::UnsupportedKind),
    }
}

/// Derivative of the expected ORF: p(z+r) - p(z-r) + p(z-n+r) - p(z-n-r).
pub fn orf_expected_derivative(z: f64, radius: f64, m: &NoiseModel) -> f64 {
    let (z, n, s) = (z - m.mu, m.gap, m.sigma);
    pdf(z + radius, s) - pdf(z - radius, s) + pdf(z - n + radius, s) - pdf(z - n - radius, s)
}

/// Derivative of the isolated expected URDF: 2 Phi(z - mu) - 1.
pub fn expected_urdf_isolated_derivative(z: f64, mu: f64, sigma: f64) -> f64 {
    2.0 * phi(z - mu, sigma) - 1.0
}

/// Location of the surface zero-crossing of the expected DRDF: the smallest
/// root of n Phi(z - n/2) - z, found by bisection on [-n/4, n/2). Returned in
/// absolute coordinates (mu + root).
pub fn drdf_zero_crossing(m: &NoiseModel) -> Result<f64, ExpectError> {
    let n = m.gap;
    if m.sigma >= n {
        return Err(ExpectError::NoReliableCrossing);
    }
    let f = |z: f64| n * phi(z - n / 2.0, m.sigma) - z;
    let mut lo = -n / 4.0;
    let mut hi = n / 2.0 - 1e-6 * n;
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo > 0.0 && fhi < 0.0) {
        return Err(ExpectError::CrossingLost);
    }
    // f decreases at slope ~ -1 through the root; bisect to |f| < 1e-10
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() < 1e-10 {
            return Ok(m.mu + mid);
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(m.mu + 0.5 * (lo + hi))
}

/// The exact two-intersection field d(z; s) with hits {s, s + n}. This is the
/// function the Monte-Carlo oracles average; it is defined directly from the
/// piecewise ownership rules, independent of the closed forms above.
pub fn two_hit_value(kind: FieldKind, z: f64, s: f64, n: f64) -> f64 {
    match kind {
        FieldKind::Urdf => (z - s).abs().min((z - s - n).abs()),
        FieldKind::Srdf => {
            let mag = (z - s).abs().min((z - s - n).abs());
            if z > s && z < s + n {
                -mag
            } else {
                mag
            }
        }
        FieldKind::Drdf => {
            // midpoint belongs to the later hit
            if z < s + n / 2.0 {
                s - z
            } else {
                s + n - z
            }
        }
        FieldKind::Orf { radius } => {
            if (z - s).abs() < radius || (z - s - n).abs() < radius {
                1.0
            } else {
                0.0
            }
        }
        FieldKind::SceneUdf => f64::NAN,
    }
}

/// Monte-Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
}

fn stream_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(
        seed ^ (index as u64 + 1).wrapping_mul(0xa076_1d64_78bd_642f),
    ))
}

/// Sample mean of d(z; S) over `num_samples` draws of S, per z value.
/// Each z gets an independent, seed-derived stream, so results do not depend
/// on thread scheduling.
pub fn mc_expected(
    kind: FieldKind,
    zs: &[f64],
    m: &NoiseModel,
    num_samples: usize,
    seed: u64,
) -> Result<Vec<McEstimate>, ExpectError> {
    if !kind.is_ray_field() {
        return Err(ExpectError::UnsupportedKind);
    }
    assert!(num_samples >= 10_000, "at least 1e4 samples required");
    Ok(zs
        .par_iter()
        .enumerate()
        .map(|(i, &z)| {
            let mut rng = stream_rng(seed, i);
            let mut mean = 0.0;
            let mut m2 = 0.0;
            for k in 0..num_samples {
                let g: f64 = rng.sample(StandardNormal);
                let s = m.mu + m.sigma * g;
                let v = two_hit_value(kind, z, s, m.gap);
                let delta = v - mean;
                mean += delta / (k + 1) as f64;
                m2 += delta * (v - mean);
            }
            let var = m2 / (num_samples - 1) as f64;
            McEstimate { mean, se: (var / num_samples as f64).sqrt() }
        })
        .collect())
}

/// Per-z sample median of d(z; S). Even sample counts average the two
/// central order statistics.
pub fn mc_median(
    kind: FieldKind,
    zs: &[f64],
    m: &NoiseModel,
    num_samples: usize,
    seed: u64,
) -> Result<Vec<f64>, ExpectError> {
    if !kind.is_ray_field() {
        return Err(ExpectError::UnsupportedKind);
    }
    assert!(num_samples >= 10_000, "at least 1e4 samples required");
    Ok(zs
        .par_iter()
        .enumerate()
        .map(|(i, &z)| {
            let mut rng = stream_rng(seed, i);
            let mut vals: Vec<f64> = (0..num_samples)
                .map(|_| {
                    let g: f64 = rng.sample(StandardNormal);
                    two_hit_value(kind, z, m.mu + m.sigma * g, m.gap)
                })
                .collect();
            let mid = num_samples / 2;
            let (left, pivot, _) = vals.select_nth_unstable_by(mid, f64::total_cmp);
            if num_samples % 2 == 1 {
                *pivot
            } else {
                let lower = left.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                0.5 * (lower + *pivot)
            }
        })
        .collect())
}

/// Exact expectation of a ray field over an arbitrary sorted hit set whose
/// positions share a single rigid Gaussian offset e ~ N(0, sigma^2). For two
/// hits this reduces to the closed forms above; it powers expected-field
/// volumes on real scenes where rays carry any number of hits.
pub fn expected_field_over_hits(
    kind: FieldKind,
    z: f64,
    hits: &[f64],
    sigma: f64,
) -> Result<f64, ExpectError> {
    if !kind.is_ray_field() {
        return Err(ExpectError::UnsupportedKind);
    }
    assert!(sigma > 0.0);
    assert!(!hits.is_empty(), "need at least one hit");
    debug_assert!(hits.windows(2).all(|w| w[0] <= w[1]), "hits must be sorted");
    let k = hits.len();

    if let FieldKind::Orf { radius } = kind {
        // union of the per-hit intervals in offset space
        let mut intervals: Vec<(f64, f64)> = hits
            .iter()
            .map(|&s| (z - s - radius, z - s + radius))
            .collect();
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut total = 0.0;
        let mut cur = intervals[0];
        for &(lo, hi) in &intervals[1..] {
            if lo <= cur.1 {
                cur.1 = cur.1.max(hi);
            } else {
                total += phi(cur.1, sigma) - phi(cur.0, sigma);
                cur = (lo, hi);
            }
        }
        total += phi(cur.1, sigma) - phi(cur.0, sigma);
        return Ok(total);
    }

    // Interior midpoints delimit hit ownership; in offset space the owner-j
    // region is (z - m_j, z - m_{j-1}]. On each linear piece the field is
    // alpha + beta * e, and E sums alpha * dPhi + beta * sigma^2 * dp.
    let mids: Vec<f64> = (0..k.saturating_sub(1))
        .map(|j| 0.5 * (hits[j] + hits[j + 1]))
        .collect();
    let region = |j: usize| -> (f64, f64) {
        let lo = if j + 1 < k { z - mids[j] } else { f64::NEG_INFINITY };
        let hi = if j > 0 { z - mids[j - 1] } else { f64::INFINITY };
        (lo, hi)
    };
    let seg = |lo: f64, hi: f64, alpha: f64, beta: f64| -> f64 {
        alpha * (phi(hi, sigma) - phi(lo, sigma))
            + beta * sigma * sigma * (pdf(lo, sigma) - pdf(hi, sigma))
    };

    let mut total = 0.0;
    for j in 0..k {
        let (lo, hi) = region(j);
        match kind {
            FieldKind::Drdf => {
                total += seg(lo, hi, hits[j] - z, 1.0);
            }
            FieldKind::Srdf => {
                // parity sign: + on the approach side of odd-numbered hits
                if j % 2 == 0 {
                    total += seg(lo, hi, hits[j] - z, 1.0);
                } else {
                    total += seg(lo, hi, z - hits[j], -1.0);
                }
            }
            FieldKind::Urdf => {
                // fold at the hit splits the owner region in two
                let fold = (z - hits[j]).clamp(lo, hi);
                total += seg(lo, fold, z - hits[j], -1.0);
                total += seg(fold, hi, hits[j] - z, 1.0);
            }
            _ => unreachable!(),
        }
    }
    Ok(total)
}

/// Expected unsigned distance to a plane under isotropic Gaussian position
/// noise. Only the variance along the normal matters, so this is the isolated
/// expected URDF evaluated at the point-plane distance.
pub fn expected_plane_udf(p: Vec3, normal: Vec3, offset: f64, sigma: f64) -> f64 {
    debug_assert!((normal.norm() - 1.0).abs() < 1e-9, "normal must be unit");
    let q = (normal.dot(p) + offset).abs();
    expected_urdf_isolated(q, 0.0, sigma)
}

/// A sampled expectation curve, ready for CSV export.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpectationCurve {
    pub label: String,
    pub zs: Vec<f64>,
    pub analytic: Vec<f64>,
    pub derivative: Option<Vec<f64>>,
    pub mc: Option<Vec<McEstimate>>,
}
