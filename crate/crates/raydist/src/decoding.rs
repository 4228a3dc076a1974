//! Surface decoding: turn sampled 1-D field values along each ray into
//! discrete hit depths. One function per strategy, plus a volume-level
//! driver that applies a decoder to every grid ray.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ray_fields::{FieldKind, FieldVolume};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("decoder incompatible with field kind")]
    IncompatibleKind,
    #[error("invalid samples: {0}")]
    InvalidSamples(String),
}

/// A ray's worth of samples: strictly increasing depths with one value each.
#[derive(Clone, Copy, Debug)]
pub struct RaySamples<'a> {
    depths: &'a [f64],
    values: &'a [f64],
}

impl<'a> RaySamples<'a> {
    pub fn new(depths: &'a [f64], values: &'a [f64]) -> Result<Self, DecodeError> {
        if depths.len() != values.len() {
            return Err(DecodeError::InvalidSamples("length mismatch".into()));
        }
        if depths.len() < 2 {
            return Err(DecodeError::InvalidSamples("need at least 2 samples".into()));
        }
        if depths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DecodeError::InvalidSamples("depths not increasing".into()));
        }
        Ok(RaySamples { depths, values })
    }

    pub fn depths(&self) -> &[f64] {
        self.depths
    }

    pub fn values(&self) -> &[f64] {
        self.values
    }
}

/// Per-ray decoded (or ground-truth) hit depths over an H x W ray grid.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSet {
    pub h: usize,
    pub w: usize,
    pub hits: Vec<Vec<f64>>,
}

impl SurfaceSet {
    pub fn new(h: usize, w: usize, hits: Vec<Vec<f64>>) -> SurfaceSet {
        assert_eq!(hits.len(), h * w);
        SurfaceSet { h, w, hits }
    }

    pub fn ray(&self, iy: usize, ix: usize) -> &[f64] {
        &self.hits[iy * self.w + ix]
    }
}

/// Decoding strategy plus its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum DecoderKind {
    /// Positive-to-negative zero crossings; hyperparameter free.
    DrdfZeroCross,
    /// Strict local minima within a depth window, parabolic refinement.
    UdfLocalMinima { window: f64 },
    /// Connected components below tau, one (minimum) sample per component.
    UrdfNms { tau: f64 },
    /// Every sample at or below tau.
    UrdfThreshold { tau: f64 },
    /// Negative-to-positive crossings of the numerical gradient.
    UrdfGradientZero,
    /// Level crossings paired onset/offset, midpoints emitted.
    OrfPairing { level: f64, pair_gap: f64 },
    /// All zero crossings, both directions.
    SalZeroCross,
    /// Keep LDI layers whose confidence reaches the level.
    LdiConfidence { level: f64 },
}

#[derive(Clone, Copy, PartialEq)]
enum CrossDir {
    PosToNeg,
    NegToPos,
    Both,
}

/// Zero crossings of a sampled function, linearly interpolated. A run of
/// exact zeros counts as one crossing (at its center) when the signs on its
/// two sides actually change; zero runs touching the array boundary use the
/// one visible side.
fn zero_crossings(depths: &[f64], values: &[f64], dir: CrossDir) -> Vec<f64> {
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if values[i] == 0.0 {
            let start = i;
            while i < n && values[i] == 0.0 {
                i += 1;
            }
            let before = (start > 0).then(|| values[start - 1] > 0.0);
            let after = (i < n).then(|| values[i] > 0.0);
            // Some(true) = positive-to-negative style touch; None = no crossing
            let pos_to_neg = match (before, after) {
                (Some(b), Some(a)) => (b != a).then_some(b),
                (Some(b), None) => Some(b),
                (None, Some(a)) => Some(!a),
                (None, None) => None, // constant zero: no crossings
            };
            let emit = match (pos_to_neg, dir) {
                (None, _) => false,
                (Some(_), CrossDir::Both) => true,
                (Some(p), CrossDir::PosToNeg) => p,
                (Some(p), CrossDir::NegToPos) => !p,
            };
            if emit {
                out.push(0.5 * (depths[start] + depths[i - 1]));
            }
        } else {
            if i + 1 < n && values[i + 1] != 0.0 {
                let (a, b) = (values[i], values[i + 1]);
                let take = if a > 0.0 && b < 0.0 {
                    dir != CrossDir::NegToPos
                } else if a < 0.0 && b > 0.0 {
                    dir != CrossDir::PosToNeg
                } else {
                    false
                };
                if take {
                    let t = a / (a - b);
                    out.push(depths[i] + t * (depths[i + 1] - depths[i]));
                }
            }
            i += 1;
        }
    }
    out
}

/// DRDF decoding: positive-to-negative zero crossings only. The
/// negative-to-positive jump at each inter-hit midpoint is the phantom and
/// is skipped by direction.
pub fn decode_drdf(s: &RaySamples) -> Vec<f64> {
    zero_crossings(s.depths, s.values, CrossDir::PosToNeg)
}

/// SAL-style decoding: all zero crossings, both directions.
pub fn decode_sal(s: &RaySamples) -> Vec<f64> {
    zero_crossings(s.depths, s.values, CrossDir::Both)
}

/// Strict local minima of an unsigned field within a +-window/2 depth
/// neighborhood. Interior single minima get parabolic refinement; plateau
/// minima emit their center; grid-endpoint extrema are excluded.
pub fn decode_udf_local_minima(s: &RaySamples, window: f64) -> Vec<f64> {
    assert!(window > 0.0, "window must be positive");
    let (d, v) = (s.depths, s.values);
    let n = v.len();
    let half = window / 2.0;
    let mut out = Vec::new();
    let mut a = 0;
    while a < n {
        let mut b = a;
        while b + 1 < n && v[b + 1] == v[a] {
            b += 1;
        }
        // [a, b] is a maximal equal-value plateau
        if a > 0 && b + 1 < n {
            let lo = d[a] - half;
            let hi = d[b] + half;
            let mut strict_min = true;
            for j in (0..n).filter(|&j| j < a || j > b) {
                if d[j] >= lo && d[j] <= hi && v[j] <= v[a] {
                    strict_min = false;
                    break;
                }
            }
            if strict_min {
                if a == b {
                    out.push(refine_min(d, v, a));
                } else {
                    out.push(0.5 * (d[a] + d[b]));
                }
            }
        }
        a = b + 1;
    }
    out
}

/// Parabola through the three samples around an interior minimum.
fn refine_min(d: &[f64], v: &[f64], i: usize) -> f64 {
    let denom = v[i - 1] - 2.0 * v[i] + v[i + 1];
    if denom <= 0.0 {
        return d[i];
    }
    let h = 0.5 * (d[i + 1] - d[i - 1]);
    let delta = 0.5 * h * (v[i - 1] - v[i + 1]) / denom;
    d[i] + delta.clamp(-h, h)
}

/// NMS over thresholded samples: group consecutive samples with value below
/// tau, emit the depth of each group's minimum (earliest on ties).
pub fn decode_urdf_nms(s: &RaySamples, tau: f64) -> Vec<f64> {
    assert!(tau > 0.0, "tau must be positive");
    let (d, v) = (s.depths, s.values);
    let mut out = Vec::new();
    let mut i = 0;
    while i < v.len() {
        if v[i] < tau {
            let mut best = i;
            let mut j = i;
            while j < v.len() && v[j] < tau {
                if v[j] < v[best] {
                    best = j;
                }
                j += 1;
            }
            out.push(d[best]);
            i = j;
        } else {
            i += 1;
        }
    }
    out
}

/// Absolute thresholding: every sample with value <= tau, no grouping.
pub fn decode_urdf_threshold(s: &RaySamples, tau: f64) -> Vec<f64> {
    s.depths
        .iter()
        .zip(s.values)
        .filter(|(_, &v)| v <= tau)
        .map(|(&d, _)| d)
        .collect()
}

/// Negative-to-positive crossings of the central-difference gradient.
pub fn decode_urdf_gradient(s: &RaySamples) -> Vec<f64> {
    let (d, v) = (s.depths, s.values);
    let n = v.len();
    if n < 3 {
        return Vec::new();
    }
    let grad: Vec<f64> = (1..n - 1)
        .map(|i| (v[i + 1] - v[i - 1]) / (d[i + 1] - d[i - 1]))
        .collect();
    zero_crossings(&d[1..n - 1], &grad, CrossDir::NegToPos)
}

/// ORF decoding: find level crossings, pair each onset with the next offset
/// when they are within pair_gap and emit the midpoint; unpaired crossings
/// are kept as-is.
pub fn decode_orf(s: &RaySamples, level: f64, pair_gap: f64) -> Vec<f64> {
    assert!(level > 0.0 && level < 1.0, "level must lie in (0, 1)");
    assert!(pair_gap > 0.0, "pair_gap must be positive");
    let shifted: Vec<f64> = s.values.iter().map(|&v| v - level).collect();
    let onsets = zero_crossings(s.depths, &shifted, CrossDir::NegToPos);
    let offsets = zero_crossings(s.depths, &shifted, CrossDir::PosToNeg);

    let mut events: Vec<(f64, bool)> = onsets
        .iter()
        .map(|&z| (z, true))
        .chain(offsets.iter().map(|&z| (z, false)))
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut out = Vec::new();
    let mut i = 0;
    while i < events.len() {
        let (z, is_onset) = events[i];
        if is_onset
            && i + 1 < events.len()
            && !events[i + 1].1
            && events[i + 1].0 - z <= pair_gap
        {
            out.push(0.5 * (z + events[i + 1].0));
            i += 2;
        } else {
            out.push(z);
            i += 1;
        }
    }
    out
}

/// LDI confidence filtering: keep layer depths whose confidence reaches the
/// level; output sorted.
pub fn decode_ldi(layer_depths: &[f64], confidences: &[f64], level: f64) -> Vec<f64> {
    assert_eq!(layer_depths.len(), confidences.len());
    let mut out: Vec<f64> = layer_depths
        .iter()
        .zip(confidences)
        .filter(|(_, &c)| c >= level)
        .map(|(&d, _)| d)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Apply a per-ray decoder.
pub fn decode_ray(s: &RaySamples, decoder: &DecoderKind) -> Result<Vec<f64>, DecodeError> {
    Ok(match *decoder {
        DecoderKind::DrdfZeroCross => decode_drdf(s),
        DecoderKind::UdfLocalMinima { window } => decode_udf_local_minima(s, window),
        DecoderKind::UrdfNms { tau } => decode_urdf_nms(s, tau),
        DecoderKind::UrdfThreshold { tau } => decode_urdf_threshold(s, tau),
        DecoderKind::UrdfGradientZero => decode_urdf_gradient(s),
        DecoderKind::OrfPairing { level, pair_gap } => decode_orf(s, level, pair_gap),
        DecoderKind::SalZeroCross => decode_sal(s),
        DecoderKind::LdiConfidence { .. } => return Err(DecodeError::IncompatibleKind),
    })
}

/// Field kinds a decoder understands.
pub fn compatible(decoder: &DecoderKind, kind: FieldKind) -> bool {
    match decoder {
        DecoderKind::DrdfZeroCross => matches!(kind, FieldKind::Drdf),
        DecoderKind::SalZeroCross => matches!(kind, FieldKind::Srdf | FieldKind::Drdf),
        DecoderKind::UdfLocalMinima { .. }
        | DecoderKind::UrdfNms { .. }
        | DecoderKind::UrdfThreshold { .. }
        | DecoderKind::UrdfGradientZero => {
            matches!(kind, FieldKind::SceneUdf | FieldKind::Urdf)
        }
        DecoderKind::OrfPairing { .. } => matches!(kind, FieldKind::Orf { .. }),
        DecoderKind::LdiConfidence { .. } => false,
    }
}

/// Decode every grid ray of a volume. Rays are processed independently and
/// deterministically.
pub fn decode_volume(vol: &FieldVolume, decoder: &DecoderKind) -> Result<SurfaceSet, DecodeError> {
    if !compatible(decoder, vol.kind) {
        return Err(DecodeError::IncompatibleKind);
    }
    let hits: Vec<Vec<f64>> = (0..vol.h * vol.w)
        .into_par_iter()
        .map(|idx| {
            let base = idx * vol.d;
            let values: Vec<f64> =
                vol.values[base..base + vol.d].iter().map(|&v| v as f64).collect();
            let s = RaySamples::new(&vol.depths, &values).expect("volume samples are valid");
            decode_ray(&s, decoder).expect("compatibility checked above")
        })
        .collect();
    Ok(SurfaceSet { h: vol.h, w: vol.w, hits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expectation::{expected_drdf, expected_orf, expected_urdf, NoiseModel};
    use crate::ray_fields::{drdf_at, srdf_at, urdf_at, IntersectionSet};

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    fn true_field(
        hits: &[f64],
        depths: &[f64],
        f: impl Fn(&IntersectionSet, f64) -> f64,
    ) -> Vec<f64> {
        let set = IntersectionSet::new(hits.to_vec()).unwrap();
        depths.iter().map(|&z| f(&set, z)).collect()
    }

    #[test]
    fn drdf_round_trip() {
        let depths = grid(0.03125, 4.0, 128);
        let vals = true_field(&[1.0, 2.5], &depths, |s, z| drdf_at(s, z).unwrap());
        let s = RaySamples::new(&depths, &vals).unwrap();
        let hits = decode_drdf(&s);
        assert_eq!(hits.len(), 2);
        let step = depths[1] - depths[0];
        assert!((hits[0] - 1.0).abs() < step / 2.0);
        assert!((hits[1] - 2.5).abs() < step / 2.0);
    }

    #[test]
    fn drdf_all_positive_empty() {
        let depths = grid(0.1, 4.0, 32);
        let vals: Vec<f64> = depths.iter().map(|&z| 5.0 - z).collect();
        let s = RaySamples::new(&depths, &vals).unwrap();
        assert!(decode_drdf(&s).is_empty());
    }

    #[test]
    fn drdf_decodes_expected_curve_within_centimeter() {
        let m = NoiseModel::new(1.0, 0.1, 1.0);
        let depths = grid(0.0625, 8.0, 128);
        let vals: Vec<f64> = depths.iter().map(|&z| expected_drdf(z, &m)).collect();
        let s = RaySamples::new(&depths, &vals).unwrap();
        let hits = decode_drdf(&s);
        assert!(!hits.is_empty());
        assert!((hits[0] - 1.0).abs() < 0.01, "{}", hits[0]);
    }

    #[test]
    fn drdf_exact_zero_sample_emitted_once() {
        let depths = grid(1.0, 3.0, 5); // step 0.5, sample at 2.0
        let vals = true_field(&[2.0], &depths, |s, z| drdf_at(s, z).unwrap());
        assert_eq!(vals[2], 0.0);
        let s = RaySamples::new(&depths, &vals).unwrap();
        let hits = decode_drdf(&s);
        assert_eq!(hits, vec![2.0]);
    }

    #[test]
    fn drdf_invariant_to_positive_rescaling() {
        let depths = grid(0.05, 4.0, 96);
        let vals = true_field(&[0.8, 2.1, 3.3], &depths, |s, z| drdf_at(s, z).unwrap());
        let scaled: Vec<f64> = vals.iter().map(|v| v * 37.5).collect();
        let a = decode_drdf(&RaySamples::new(&depths, &vals).unwrap());
        let b = decode_drdf(&RaySamples::new(&depths, &scaled).unwrap());
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn local_minima_v_shape_and_monotone() {
        let depths = grid(0.1, 4.0, 64);
        let vals: Vec<f64> = depths.iter().map(|&z| (z - 2.0).abs()).collect();
        let s = RaySamples::new(&depths, &vals).unwrap();
        let hits = decode_udf_local_minima(&s, 1.0);
        assert_eq!(hits.len(), 1);
        assert!((hits[0] - 2.0).abs() < 0.05);

        let vals: Vec<f64> = depths.iter().map(|&z| 5.0 - z).collect();
        let s = RaySamples::new(&depths, &vals).unwrap();
        assert!(decode_udf_local_minima(&s, 1.0).is_empty());
    }

    #[test]
    fn local_minima_true_urdf() {
        let depths = grid(0.0625, 4.0, 64);
        let vals = true_field(&[1.0, 3.0], &depths, |s, z| urdf_at(s, z).unwrap());
        let s = RaySamples::new(&depths, &vals).unwrap();
        let hits = decode_udf_local_minima(&s, 1.0);
        assert_eq!(hits.len(), 2);
        let step = depths[1] - depths[0];
        assert!((hits[0] - 1.0).abs() < step / 2.0);
        assert!((hits[1] - 3.0).abs() < step / 2.0);
    }

    #[test]
    fn nms_true_urdf_and_thresholds() {
        let depths = grid(0.0625, 4.0, 64);
        let vals = true_field(&[1.0, 3.0], &depths, |s, z| urdf_at(s, z).unwrap());
        let s = RaySamples::new(&depths, &vals).unwrap();
        let hits = decode_urdf_nms(&s, 0.25);
        assert_eq!(hits.len(), 2);
        let step = depths[1] - depths[0];
        assert!((hits[0] - 1.0).abs() < step / 2.0);
        assert!((hits[1] - 3.0).abs() < step / 2.0);

        // flat field exactly at tau: strict inequality keeps it empty
        let flat = vec![0.25; depths.len()];
        let s = RaySamples::new(&depths, &flat).unwrap();
        assert!(decode_urdf_nms(&s, 0.25).is_empty());
    }

    #[test]
    fn nms_fails_below_achievable_minimum() {
        // expected URDF at sigma = 0.2 never goes below ~0.159
        let m = NoiseModel::new(1.0, 0.2, 1.0);
        let depths = grid(0.0625, 8.0, 128);
        let vals: Vec<f64> = depths.iter().map(|&z| expected_urdf(z, &m)).collect();
        let s = RaySamples::new(&depths, &vals).unwrap();
        assert!(decode_urdf_nms(&s, 0.15).is_empty());
    }

    #[test]
    fn threshold_enumerates_near_samples() {
        let depths = grid(0.05, 4.0, 80); // step 0.05, hits grid at 2.0
        let vals = true_field(&[2.0], &depths, |s, z| urdf_at(s, z).unwrap());
        let s = RaySamples::new(&depths, &vals).unwrap();
        let hits = decode_urdf_threshold(&s, 0.1);
        assert!(hits.len() <= 5 && hits.len() >= 3, "{hits:?}");
        assert!(hits.iter().all(|&z| (z - 2.0).abs() <= 0.1 + 1e-9));

        let hits = decode_urdf_threshold(&s, 0.0);
        assert!(hits.iter().all(|&z| {
            let set = IntersectionSet::new(vec![2.0]).unwrap();
            urdf_at(&set, z).unwrap() == 0.0
        }));

        let high: Vec<f64> = depths.iter().map(|_| 1.0).collect();
        let s = RaySamples::new(&depths, &high).unwrap();
        assert!(decode_urdf_threshold(&s, 0.5).is_empty());
    }

    #[test]
    fn gradient_v_shape_and_monotone() {
        let depths = grid(0.1, 4.0, 64);
        let vals: Vec<f64> = depths.iter().map(|&z| (z - 2.0).abs()).collect();
        let s = RaySamples::new(&depths, &vals).unwrap();
        let hits = decode_urdf_gradient(&s);
        assert_eq!(hits.len(), 1);
        assert!((hits[0] - 2.0).abs() < 0.1);

        let vals: Vec<f64> = depths.iter().map(|&z| z).collect();
        let s = RaySamples::new(&depths, &vals).unwrap();
        assert!(decode_urdf_gradient(&s).is_empty());
    }

    #[test]
    fn gradient_blunted_on_expected_urdf() {
        let sigma = 0.2;
        let m = NoiseModel::new(1.0, sigma, 1.0);
        let depths = grid(0.0625, 8.0, 128);
        let vals: Vec<f64> = depths.iter().map(|&z| expected_urdf(z, &m)).collect();
        let s = RaySamples::new(&depths, &vals).unwrap();
        let hits = decode_urdf_gradient(&s);
        assert!(!hits.is_empty());
        assert!((hits[0] - 1.0).abs() < 0.05);

        // near-zero-gradient region (|g| < 0.5) is wider than 2 sigma
        let grad: Vec<f64> = (1..vals.len() - 1)
            .map(|i| (vals[i + 1] - vals[i - 1]) / (depths[i + 1] - depths[i - 1]))
            .collect();
        let flat: Vec<f64> = (0..grad.len())
            .filter(|&i| grad[i].abs() < 0.5 && (depths[i + 1] - 1.0).abs() < 0.6)
            .map(|i| depths[i + 1])
            .collect();
        let width = flat.last().unwrap() - flat.first().unwrap();
        assert!(width > 2.0 * sigma, "blunted width {width}");
    }

    #[test]
    fn orf_bump_pairing() {
        let depths = grid(0.1, 4.0, 80);
        let vals: Vec<f64> = depths
            .iter()
            .map(|&z| if (z - 2.0).abs() < 0.2 { 1.0 } else { 0.0 })
            .collect();
        let s = RaySamples::new(&depths, &vals).unwrap();
        let hits = decode_orf(&s, 0.5, 1.0);
        assert_eq!(hits.len(), 1);
        assert!((hits[0] - 2.0).abs() < 0.1, "{}", hits[0]);
    }

    #[test]
    fn orf_unpaired_onset_kept() {
        let depths = grid(0.1, 4.0, 40);
        // bump that runs off the end of the grid
        let vals: Vec<f64> = depths.iter().map(|&z| if z > 3.5 { 1.0 } else { 0.0 }).collect();
        let s = RaySamples::new(&depths, &vals).unwrap();
        let hits = decode_orf(&s, 0.5, 0.5);
        assert_eq!(hits.len(), 1);
        assert!((hits[0] - 3.5).abs() < 0.15);
    }

    #[test]
    fn orf_low_peak_never_crosses() {
        let sigma: f64 = 0.2;
        let m = NoiseModel::new(1.0, sigma, 1.0);
        let depths = grid(0.0625, 8.0, 128);
        let vals: Vec<f64> = depths
            .iter()
            .map(|&z| expected_orf(z, sigma / 2.0, &m))
            .collect();
        assert!(vals.iter().cloned().fold(0.0f64, f64::max) < 0.5);
        let s = RaySamples::new(&depths, &vals).unwrap();
        assert!(decode_orf(&s, 0.5, 1.0).is_empty());
    }

    #[test]
    fn sal_finds_all_crossings_and_drdf_filters_phantom() {
        let depths = grid(0.03125, 4.0, 128);
        let vals = true_field(&[1.0, 3.0], &depths, |s, z| drdf_at(s, z).unwrap());
        let s = RaySamples::new(&depths, &vals).unwrap();

        let sal = decode_sal(&s);
        assert_eq!(sal.len(), 3, "{sal:?}");
        let step = depths[1] - depths[0];
        assert!((sal[0] - 1.0).abs() < step);
        assert!((sal[1] - 2.0).abs() < step, "phantom at midpoint");
        assert!((sal[2] - 3.0).abs() < step);

        let drdf = decode_drdf(&s);
        assert_eq!(drdf.len(), 2);
        assert!((drdf[0] - 1.0).abs() < step / 2.0);
        assert!((drdf[1] - 3.0).abs() < step / 2.0);
    }

    #[test]
    fn sal_true_srdf() {
        let depths = grid(0.03125, 6.0, 128);
        let vals = true_field(&[2.0, 4.0], &depths, |s, z| srdf_at(s, z).unwrap());
        let s = RaySamples::new(&depths, &vals).unwrap();
        let hits = decode_sal(&s);
        assert_eq!(hits.len(), 2);
        assert!((hits[0] - 2.0).abs() < 0.05);
        assert!((hits[1] - 4.0).abs() < 0.05);

        let pos: Vec<f64> = depths.iter().map(|&z| z + 1.0).collect();
        let s = RaySamples::new(&depths, &pos).unwrap();
        assert!(decode_sal(&s).is_empty());
    }

    #[test]
    fn all_zero_ray_decodes_empty() {
        let depths = grid(0.1, 4.0, 16);
        let zeros = vec![0.0; 16];
        let s = RaySamples::new(&depths, &zeros).unwrap();
        assert!(decode_sal(&s).is_empty());
        assert!(decode_drdf(&s).is_empty());
    }

    #[test]
    fn ldi_examples() {
        let hits = decode_ldi(&[1.0, 2.0, 3.0, 4.0], &[0.9, 0.6, 0.4, 0.1], 0.5);
        assert_eq!(hits, vec![1.0, 2.0]);
        let hits = decode_ldi(&[3.0, 1.0, 2.0], &[1.0, 1.0, 1.0], 0.5);
        assert_eq!(hits, vec![1.0, 2.0, 3.0]);
        let hits = decode_ldi(&[1.0, 2.0], &[0.0, 0.0], 0.0);
        assert_eq!(hits, vec![1.0, 2.0]);
    }

    #[test]
    fn decoded_depths_sorted_and_in_range() {
        let depths = grid(0.05, 4.0, 96);
        let vals = true_field(&[0.7, 1.9, 2.4, 3.8], &depths, |s, z| drdf_at(s, z).unwrap());
        let s = RaySamples::new(&depths, &vals).unwrap();
        for decoder in [
            DecoderKind::DrdfZeroCross,
            DecoderKind::SalZeroCross,
        ] {
            let hits = decode_ray(&s, &decoder).unwrap();
            assert!(hits.windows(2).all(|w| w[0] < w[1]));
            assert!(hits.iter().all(|&z| z >= depths[0] && z <= *depths.last().unwrap()));
        }
    }

    #[test]
    fn volume_decoder_compatibility() {
        use crate::geometry::{Bvh, Camera, TriangleMesh, Vec3};
        use crate::ray_fields::{evaluate_field, Truncation};
        let mesh = TriangleMesh::new(
            vec![
                Vec3::new(-5.0, -5.0, 2.0),
                Vec3::new(5.0, -5.0, 2.0),
                Vec3::new(5.0, 5.0, 2.0),
                Vec3::new(-5.0, 5.0, 2.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let bvh = Bvh::build(&mesh);
        let cam = Camera::simple(32, 50.0, 0.1, 8.0);
        let vol = evaluate_field(&mesh, &bvh, &cam, 4, 4, 32, FieldKind::Drdf, Truncation::default());

        assert!(matches!(
            decode_volume(&vol, &DecoderKind::OrfPairing { level: 0.5, pair_gap: 1.0 }),
            Err(DecodeError::IncompatibleKind)
        ));

        let surf = decode_volume(&vol, &DecoderKind::DrdfZeroCross).unwrap();
        assert_eq!(surf.hits.len(), 16);
        for hits in &surf.hits {
            assert_eq!(hits.len(), 1);
            // metric depth exceeds the 2 m z-depth for off-axis rays
            assert!(hits[0] >= 2.0 - 1e-6 && hits[0] < 2.4, "{}", hits[0]);
        }
    }
}
