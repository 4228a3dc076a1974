//! Reconstruction evaluation: symmetric Chamfer-L1 with its threshold curve,
//! scene accuracy/completeness/F1, and the per-ray variant on all or
//! occluded-only points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

use crate::decoding::SurfaceSet;
use crate::geometry::{frustum_grid, Camera, Vec3};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("empty point set")]
    EmptyPointSet,
    #[error("surface sets cover different ray grids")]
    GridMismatch,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> PointCloud {
        PointCloud { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Uniform spatial hash over points. Nearest-neighbor queries scan expanding
/// cell shells and return exactly the brute-force minimum.
pub struct PointGrid {
    cells: HashMap<(i64, i64, i64), Vec<u32>>,
    points: Vec<Vec3>,
    cell: f64,
    origin: Vec3,
    key_min: (i64, i64, i64),
    key_max: (i64, i64, i64),
}

impl PointGrid {
    pub fn build(points: &[Vec3]) -> PointGrid {
        assert!(!points.is_empty(), "cannot index an empty point set");
        let mut min = points[0];
        let mut max = points[0];
        for &p in points {
            min = min.min_components(p);
            max = max.max_components(p);
        }
        let extent = max - min;
        let longest = extent.x.max(extent.y).max(extent.z);
        let cells_per_axis = (points.len() as f64).cbrt().ceil().max(1.0);
        // degenerate clouds (a single point, a line) still get a usable cell
        let cell = if longest > 0.0 { longest / cells_per_axis } else { 1.0 };

        let mut cells: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
        let mut key_min = (i64::MAX, i64::MAX, i64::MAX);
        let mut key_max = (i64::MIN, i64::MIN, i64::MIN);
        for (i, &p) in points.iter().enumerate() {
            let k = Self::key(p, min, cell);
            key_min = (key_min.0.min(k.0), key_min.1.min(k.1), key_min.2.min(k.2));
            key_max = (key_max.0.max(k.0), key_max.1.max(k.1), key_max.2.max(k.2));
            cells.entry(k).or_default().push(i as u32);
        }
        PointGrid { cells, points: points.to_vec(), cell, origin: min, key_min, key_max }
    }

    fn key(p: Vec3, origin: Vec3, cell: f64) -> (i64, i64, i64) {
        (
            ((p.x - origin.x) / cell).floor() as i64,
            ((p.y - origin.y) / cell).floor() as i64,
            ((p.z - origin.z) / cell).floor() as i64,
        )
    }

    /// Distance from q to its nearest indexed point. Exact: scans cell
    /// shells outward (clipped to the occupied key box) until no closer
    /// point can remain.
    pub fn nearest_dist(&self, q: Vec3) -> f64 {
        let c = Self::key(q, self.origin, self.cell);
        let axis_gap = |lo: i64, hi: i64, v: i64| (lo - v).max(0).max(v - hi);
        // first shell that can touch the occupied box, and the last shell
        // after which every occupied cell has been seen
        let first_ring = axis_gap(self.key_min.0, self.key_max.0, c.0)
            .max(axis_gap(self.key_min.1, self.key_max.1, c.1))
            .max(axis_gap(self.key_min.2, self.key_max.2, c.2));
        let last_ring = [
            (c.0 - self.key_min.0).abs(),
            (self.key_max.0 - c.0).abs(),
            (c.1 - self.key_min.1).abs(),
            (self.key_max.1 - c.1).abs(),
            (c.2 - self.key_min.2).abs(),
            (self.key_max.2 - c.2).abs(),
        ]
        .into_iter()
        .max()
        .unwrap();

        let mut best_d2 = f64::INFINITY;
        for ring in first_ring..=last_ring {
            // points in later shells are at least (ring - 1) * cell away
            if best_d2.is_finite() && ring >= 1 {
                let reach = (ring - 1) as f64 * self.cell;
                if best_d2 <= reach * reach {
                    break;
                }
            }
            let x0 = (c.0 - ring).max(self.key_min.0);
            let x1 = (c.0 + ring).min(self.key_max.0);
            let y0 = (c.1 - ring).max(self.key_min.1);
            let y1 = (c.1 + ring).min(self.key_max.1);
            let z0 = (c.2 - ring).max(self.key_min.2);
            let z1 = (c.2 + ring).min(self.key_max.2);
            for kx in x0..=x1 {
                for ky in y0..=y1 {
                    for kz in z0..=z1 {
                        let cheb = (kx - c.0).abs().max((ky - c.1).abs()).max((kz - c.2).abs());
                        if cheb != ring {
                            continue;
                        }
                        if let Some(bucket) = self.cells.get(&(kx, ky, kz)) {
                            for &i in bucket {
                                let d2 = (self.points[i as usize] - q).norm_sq();
                                if d2 < best_d2 {
                                    best_d2 = d2;
                                }
                            }
                        }
                    }
                }
            }
        }
        best_d2.sqrt()
    }
}

/// Symmetric Chamfer-L1: half the sum of the two directed mean
/// nearest-neighbor distances.
pub fn chamfer_l1(pred: &PointCloud, gt: &PointCloud) -> Result<f64, MetricsError> {
    if pred.is_empty() || gt.is_empty() {
        return Err(MetricsError::EmptyPointSet);
    }
    let gt_grid = PointGrid::build(&gt.points);
    let pred_grid = PointGrid::build(&pred.points);
    // collect then reduce sequentially: the result must not depend on how
    // rayon splits the work
    let to_gt: Vec<f64> = pred.points.par_iter().map(|&p| gt_grid.nearest_dist(p)).collect();
    let to_pred: Vec<f64> = gt.points.par_iter().map(|&p| pred_grid.nearest_dist(p)).collect();
    let a = to_gt.iter().sum::<f64>() / pred.len() as f64;
    let b = to_pred.iter().sum::<f64>() / gt.len() as f64;
    Ok(0.5 * (a + b))
}

/// Fraction of per-scene errors strictly below each threshold.
pub fn chamfer_curve(per_scene_errors: &[f64], thresholds: &[f64]) -> Vec<(f64, f64)> {
    thresholds
        .iter()
        .map(|&t| {
            let frac = per_scene_errors.iter().filter(|&&e| e < t).count() as f64
                / per_scene_errors.len().max(1) as f64;
            (t, frac)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PrfScores {
    pub acc: f64,
    pub cmp: f64,
    pub f1: f64,
}

fn f1_of(acc: f64, cmp: f64) -> f64 {
    if acc + cmp == 0.0 {
        0.0
    } else {
        2.0 * acc * cmp / (acc + cmp)
    }
}

/// Scene-level accuracy (% of pred within t of gt), completeness (symmetric),
/// and their harmonic mean. Two empty clouds count as perfect.
pub fn scene_prf(pred: &PointCloud, gt: &PointCloud, t: f64) -> PrfScores {
    assert!(t > 0.0, "threshold must be positive");
    if pred.is_empty() && gt.is_empty() {
        return PrfScores { acc: 100.0, cmp: 100.0, f1: 100.0 };
    }
    let acc = if pred.is_empty() || gt.is_empty() {
        0.0
    } else {
        let grid = PointGrid::build(&gt.points);
        let within = pred
            .points
            .par_iter()
            .filter(|&&p| grid.nearest_dist(p) <= t)
            .count();
        100.0 * within as f64 / pred.len() as f64
    };
    let cmp = if pred.is_empty() || gt.is_empty() {
        0.0
    } else {
        let grid = PointGrid::build(&pred.points);
        let within = gt
            .points
            .par_iter()
            .filter(|&&p| grid.nearest_dist(p) <= t)
            .count();
        100.0 * within as f64 / gt.len() as f64
    };
    PrfScores { acc, cmp, f1: f1_of(acc, cmp) }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RayMode {
    All,
    Occluded,
}

/// Per-ray 1-D threshold matching, averaged (unweighted) over all rays.
/// Occluded mode drops the first hit of every ray's list on both sides
/// before matching. A ray empty on both sides scores 100/100/100; one empty
/// side scores 0.
pub fn ray_prf(
    pred: &SurfaceSet,
    gt: &SurfaceSet,
    t: f64,
    mode: RayMode,
) -> Result<PrfScores, MetricsError> {
    assert!(t > 0.0, "threshold must be positive");
    if pred.h != gt.h || pred.w != gt.w {
        return Err(MetricsError::GridMismatch);
    }
    let n = pred.hits.len();
    if n == 0 {
        return Err(MetricsError::GridMismatch);
    }

    let per_ray: Vec<PrfScores> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut p = pred.hits[i].clone();
            let mut g = gt.hits[i].clone();
            p.sort_by(f64::total_cmp);
            g.sort_by(f64::total_cmp);
            let (p, g) = match mode {
                RayMode::All => (&p[..], &g[..]),
                RayMode::Occluded => (
                    if p.is_empty() { &p[..] } else { &p[1..] },
                    if g.is_empty() { &g[..] } else { &g[1..] },
                ),
            };
            if p.is_empty() && g.is_empty() {
                return PrfScores { acc: 100.0, cmp: 100.0, f1: 100.0 };
            }
            let acc = rate_within(p, g, t);
            let cmp = rate_within(g, p, t);
            PrfScores { acc, cmp, f1: f1_of(acc, cmp) }
        })
        .collect();

    let count = per_ray.len() as f64;
    Ok(PrfScores {
        acc: per_ray.iter().map(|s| s.acc).sum::<f64>() / count,
        cmp: per_ray.iter().map(|s| s.cmp).sum::<f64>() / count,
        f1: per_ray.iter().map(|s| s.f1).sum::<f64>() / count,
    })
}

/// % of `from` depths with some `to` depth within t. Empty `from` scores 0.
fn rate_within(from: &[f64], to: &[f64], t: f64) -> f64 {
    if from.is_empty() {
        return 0.0;
    }
    let matched = from
        .iter()
        .filter(|&&z| {
            let i = to.partition_point(|&x| x < z);
            let right = to.get(i).map_or(false, |&x| (x - z).abs() <= t);
            let left = i > 0 && (to[i - 1] - z).abs() <= t;
            left || right
        })
        .count();
    100.0 * matched as f64 / from.len() as f64
}

/// Lift per-ray hit depths to 3-D points along the camera's grid rays.
pub fn surface_points(surfaces: &SurfaceSet, camera: &Camera) -> PointCloud {
    let grid = frustum_grid(camera, surfaces.h, surfaces.w, 2);
    let mut points = Vec::new();
    for (idx, hits) in surfaces.hits.iter().enumerate() {
        let ray = &grid.rays[idx];
        for &z in hits {
            points.push(ray.at(z));
        }
    }
    PointCloud { points }
}

/// Deterministic uniform subsample without replacement (partial
/// Fisher-Yates). Returns the input unchanged when it is already small.
pub fn subsample(cloud: &PointCloud, n: usize, seed: u64) -> PointCloud {
    if cloud.len() <= n {
        return cloud.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<u32> = (0..cloud.len() as u32).collect();
    for i in 0..n {
        let j = rng.random_range(i..idx.len());
        idx.swap(i, j);
    }
    PointCloud {
        points: idx[..n].iter().map(|&i| cloud.points[i as usize]).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScores {
    pub t: f64,
    pub acc: f64,
    pub cmp: f64,
    pub f1: f64,
}

impl ThresholdScores {
    pub fn from_prf(t: f64, s: PrfScores) -> ThresholdScores {
        ThresholdScores { t, acc: s.acc, cmp: s.cmp, f1: s.f1 }
    }
}

/// Everything the evaluation emits for one prediction/ground-truth pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub chamfer_mean: f64,
    pub chamfer_curve: Vec<(f64, f64)>,
    pub scene: ThresholdScores,
    pub ray_all: ThresholdScores,
    pub ray_occluded: ThresholdScores,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nearest_brute(q: Vec3, pts: &[Vec3]) -> f64 {
        pts.iter()
            .map(|&p| (p - q).norm_sq())
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    fn chamfer_brute(a: &PointCloud, b: &PointCloud) -> f64 {
        let ab: f64 =
            a.points.iter().map(|&p| nearest_brute(p, &b.points)).sum::<f64>() / a.len() as f64;
        let ba: f64 =
            b.points.iter().map(|&p| nearest_brute(p, &a.points)).sum::<f64>() / b.len() as f64;
        0.5 * (ab + ba)
    }

    fn random_cloud(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> PointCloud {
        PointCloud::new(
            (0..n)
                .map(|_| {
                    Vec3::new(
                        rng.random_range(-scale..scale),
                        rng.random_range(-scale..scale),
                        rng.random_range(-scale..scale),
                    )
                })
                .collect(),
        )
    }

    #[test]
    fn chamfer_trivial_cases() {
        let a = PointCloud::new(vec![Vec3::ZERO, Vec3::new(1.0, 2.0, 3.0)]);
        assert_eq!(chamfer_l1(&a, &a).unwrap(), 0.0);

        let p = PointCloud::new(vec![Vec3::ZERO]);
        let g = PointCloud::new(vec![Vec3::new(1.0, 0.0, 0.0)]);
        assert_eq!(chamfer_l1(&p, &g).unwrap(), 1.0);

        assert!(matches!(
            chamfer_l1(&PointCloud::default(), &g),
            Err(MetricsError::EmptyPointSet)
        ));
    }

    #[test]
    fn chamfer_symmetry_and_brute_force_equality() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for round in 0..10 {
            let a = random_cloud(&mut rng, 100, 2.0);
            let b = random_cloud(&mut rng, 100, 2.0);
            let fast = chamfer_l1(&a, &b).unwrap();
            assert_eq!(fast, chamfer_brute(&a, &b), "round {round}");
            assert_eq!(fast, chamfer_l1(&b, &a).unwrap());
        }
    }

    #[test]
    fn grid_nearest_equals_brute_on_many_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for round in 0..50 {
            let pts = random_cloud(&mut rng, 60, 1.5);
            let grid = PointGrid::build(&pts.points);
            let q = Vec3::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            assert_eq!(
                grid.nearest_dist(q),
                nearest_brute(q, &pts.points),
                "round {round}"
            );
        }
    }

    #[test]
    fn curve_counts() {
        let curve = chamfer_curve(&[0.1, 0.3], &[0.2]);
        assert_eq!(curve, vec![(0.2, 0.5)]);
        let curve = chamfer_curve(&[0.1, 0.3], &[1.0]);
        assert_eq!(curve, vec![(1.0, 1.0)]);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let errors: Vec<f64> = (0..10).map(|_| rng.random_range(0.0..1.0)).collect();
        let ts: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
        let curve = chamfer_curve(&errors, &ts);
        for w in curve.windows(2) {
            assert!(w[1].1 >= w[0].1, "curve must be non-decreasing");
        }
        for &(t, frac) in &curve {
            let count = errors.iter().filter(|&&e| e < t).count();
            assert_eq!(frac, count as f64 / 10.0);
        }
    }

    #[test]
    fn scene_prf_examples() {
        let g = PointCloud::new(vec![Vec3::new(0.4, 0.0, 0.0)]);
        let p = PointCloud::new(vec![Vec3::ZERO]);
        let s = scene_prf(&p, &g, 0.5);
        assert_eq!((s.acc, s.cmp, s.f1), (100.0, 100.0, 100.0));

        let s = scene_prf(&p, &p, 0.2);
        assert_eq!((s.acc, s.cmp, s.f1), (100.0, 100.0, 100.0));

        // two predictions, one matching a single gt point
        let p = PointCloud::new(vec![Vec3::ZERO, Vec3::new(5.0, 0.0, 0.0)]);
        let g = PointCloud::new(vec![Vec3::new(0.01, 0.0, 0.0)]);
        let s = scene_prf(&p, &g, 0.1);
        assert_eq!(s.acc, 50.0);
        assert_eq!(s.cmp, 100.0);
        assert!((s.f1 - 200.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn scene_prf_empty_conventions() {
        let empty = PointCloud::default();
        let some = PointCloud::new(vec![Vec3::ZERO]);
        let s = scene_prf(&empty, &empty, 0.5);
        assert_eq!((s.acc, s.cmp, s.f1), (100.0, 100.0, 100.0));
        let s = scene_prf(&empty, &some, 0.5);
        assert_eq!((s.acc, s.cmp, s.f1), (0.0, 0.0, 0.0));
        let s = scene_prf(&some, &empty, 0.5);
        assert_eq!((s.acc, s.cmp, s.f1), (0.0, 0.0, 0.0));
    }

    fn single_ray_set(hits: Vec<f64>) -> SurfaceSet {
        SurfaceSet::new(1, 1, vec![hits])
    }

    #[test]
    fn ray_prf_worked_occluded_example() {
        let gt = single_ray_set(vec![1.0, 2.0, 3.0]);
        let pred = single_ray_set(vec![1.0, 2.04, 3.5]);
        let s = ray_prf(&pred, &gt, 0.1, RayMode::Occluded).unwrap();
        assert_eq!((s.acc, s.cmp, s.f1), (50.0, 50.0, 50.0));
    }

    #[test]
    fn ray_prf_identity_and_empty_conventions() {
        let gt = single_ray_set(vec![1.0, 2.0]);
        let s = ray_prf(&gt, &gt, 0.05, RayMode::All).unwrap();
        assert_eq!((s.acc, s.cmp, s.f1), (100.0, 100.0, 100.0));
        let s = ray_prf(&gt, &gt, 0.05, RayMode::Occluded).unwrap();
        assert_eq!((s.acc, s.cmp, s.f1), (100.0, 100.0, 100.0));

        let pred = single_ray_set(vec![]);
        let gt = single_ray_set(vec![1.0]);
        let s = ray_prf(&pred, &gt, 0.1, RayMode::All).unwrap();
        assert_eq!((s.acc, s.cmp, s.f1), (0.0, 0.0, 0.0));

        // empty-empty after occlusion filtering is perfect
        let pred = single_ray_set(vec![0.9]);
        let gt = single_ray_set(vec![1.0]);
        let s = ray_prf(&pred, &gt, 0.01, RayMode::Occluded).unwrap();
        assert_eq!((s.acc, s.cmp, s.f1), (100.0, 100.0, 100.0));
    }

    #[test]
    fn ray_prf_sorts_inputs() {
        let gt = single_ray_set(vec![3.0, 1.0, 2.0]);
        let pred = single_ray_set(vec![2.0, 3.0, 1.0]);
        let s = ray_prf(&pred, &gt, 0.01, RayMode::Occluded).unwrap();
        assert_eq!((s.acc, s.cmp, s.f1), (100.0, 100.0, 100.0));
    }

    #[test]
    fn ray_prf_grid_mismatch() {
        let a = SurfaceSet::new(1, 2, vec![vec![], vec![]]);
        let b = single_ray_set(vec![]);
        assert!(matches!(
            ray_prf(&a, &b, 0.1, RayMode::All),
            Err(MetricsError::GridMismatch)
        ));
    }

    #[test]
    fn occlusion_filter_shrinks_match_set() {
        // removing the first gt hit strictly reduces per-ray candidates
        let gt = single_ray_set(vec![1.0, 2.0, 3.0]);
        let pred = single_ray_set(vec![1.0]);
        let all = ray_prf(&pred, &gt, 0.01, RayMode::All).unwrap();
        assert_eq!(all.acc, 100.0);
        let occ = ray_prf(&pred, &gt, 0.01, RayMode::Occluded).unwrap();
        assert_eq!(occ.acc, 0.0); // pred became empty, gt did not
    }

    #[test]
    fn surface_points_lift_and_subsample() {
        let cam = Camera::simple(64, 50.0, 0.1, 8.0);
        let mut hits = vec![Vec::new(); 4];
        hits[0] = vec![2.0];
        let set = SurfaceSet::new(2, 2, hits);
        let cloud = surface_points(&set, &cam);
        assert_eq!(cloud.len(), 1);
        let (u, v, _) = cam.project(cloud.points[0]).unwrap();
        assert!((u - 16.0).abs() < 1e-9 && (v - 16.0).abs() < 1e-9);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let big = random_cloud(&mut rng, 1000, 1.0);
        let a = subsample(&big, 300, 9);
        let b = subsample(&big, 300, 9);
        assert_eq!(a, b);
        assert_eq!(a.len(), 300);
    }
}
