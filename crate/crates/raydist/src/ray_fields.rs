//! Ground-truth distance and occupancy functions along camera rays, dense
//! frustum evaluation, and training-style point sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    frustum_grid, nearest_point, ray_intersections, Bvh, Camera, GeometryError, Ray,
    TriangleMesh, Vec3,
};

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("no intersections on ray")]
    NoIntersections,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Sorted ray parameters at which a ray meets the mesh.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntersectionSet {
    hits: Vec<f64>,
}

impl IntersectionSet {
    /// Wrap a strictly increasing, finite, non-negative hit list.
    pub fn new(hits: Vec<f64>) -> Result<Self, FieldError> {
        for (i, &s) in hits.iter().enumerate() {
            if !s.is_finite() || s < 0.0 {
                return Err(GeometryError::NonFinite.into());
            }
            if i > 0 && s <= hits[i - 1] {
                return Err(GeometryError::NonFinite.into());
            }
        }
        Ok(IntersectionSet { hits })
    }

    /// Sort raw intersection parameters and merge duplicates closer than
    /// `merge_tol` (shared triangle edges report one hit per triangle).
    pub fn from_unsorted(mut ts: Vec<f64>, merge_tol: f64) -> Self {
        ts.sort_by(f64::total_cmp);
        let mut hits: Vec<f64> = Vec::with_capacity(ts.len());
        for t in ts {
            match hits.last() {
                Some(&last) if t - last <= merge_tol => {}
                _ => hits.push(t),
            }
        }
        IntersectionSet { hits }
    }

    pub fn hits(&self) -> &[f64] {
        &self.hits
    }

    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }
}

/// Which scalar field a volume holds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FieldKind {
    /// Unsigned distance to the nearest point anywhere on the mesh.
    SceneUdf,
    /// Unsigned distance to the nearest ray intersection.
    Urdf,
    /// Parity-signed ray distance (sign flips at each hit).
    Srdf,
    /// Directed ray distance: positive before the nearest hit, negative after.
    Drdf,
    /// Indicator that some hit lies within `radius` of the query.
    Orf { radius: f64 },
}

impl FieldKind {
    pub fn is_ray_field(self) -> bool {
        !matches!(self, FieldKind::SceneUdf)
    }
}

/// min_i |s_i - z|.
pub fn urdf_at(hits: &IntersectionSet, z: f64) -> Result<f64, FieldError> {
    let owner = nearest_hit(hits, z)?;
    Ok((owner - z).abs())
}

/// URDF with the parity sign convention: negative when an odd number of hits
/// lie at or before z. Only meaningful as the watertight-style reference.
pub fn srdf_at(hits: &IntersectionSet, z: f64) -> Result<f64, FieldError> {
    let magnitude = urdf_at(hits, z)?;
    let before = hits.hits.partition_point(|&s| s <= z);
    if before % 2 == 1 {
        Ok(-magnitude)
    } else {
        Ok(magnitude)
    }
}

/// Signed distance to the hit that owns z: `sign(s* - z) * |s* - z|`.
/// Each hit owns a half-open interval; the exact midpoint between two hits
/// belongs to the later one, so the value there is +gap/2.
pub fn drdf_at(hits: &IntersectionSet, z: f64) -> Result<f64, FieldError> {
    Ok(owning_hit(hits, z)? - z)
}

/// 1 if some hit is strictly within r of z, else 0. Empty hit sets give 0.
pub fn orf_at(hits: &IntersectionSet, z: f64, r: f64) -> f64 {
    assert!(r > 0.0, "ORF radius must be positive");
    let i = hits.hits.partition_point(|&s| s < z);
    let near_right = hits.hits.get(i).map_or(false, |&s| (s - z).abs() < r);
    let near_left = i > 0 && (hits.hits[i - 1] - z).abs() < r;
    if near_left || near_right {
        1.0
    } else {
        0.0
    }
}

/// Unsigned distance from a 3-D point to the mesh.
pub fn scene_udf_at(mesh: &TriangleMesh, bvh: &Bvh, p: Vec3) -> Result<f64, FieldError> {
    Ok(nearest_point(mesh, bvh, p)?.1)
}

fn nearest_hit(hits: &IntersectionSet, z: f64) -> Result<f64, FieldError> {
    if hits.is_empty() {
        return Err(FieldError::NoIntersections);
    }
    let h = &hits.hits;
    let i = h.partition_point(|&s| s <= z);
    if i == 0 {
        Ok(h[0])
    } else if i == h.len() {
        Ok(h[i - 1])
    } else if (z - h[i - 1]) <= (h[i] - z) {
        Ok(h[i - 1])
    } else {
        Ok(h[i])
    }
}

/// Like [`nearest_hit`] but with the DRDF ownership rule: the exact midpoint
/// goes to the later hit.
fn owning_hit(hits: &IntersectionSet, z: f64) -> Result<f64, FieldError> {
    if hits.is_empty() {
        return Err(FieldError::NoIntersections);
    }
    let h = &hits.hits;
    let i = h.partition_point(|&s| s <= z);
    if i == 0 {
        Ok(h[0])
    } else if i == h.len() {
        Ok(h[i - 1])
    } else {
        let mid = 0.5 * (h[i - 1] + h[i]);
        if z < mid {
            Ok(h[i - 1])
        } else {
            Ok(h[i])
        }
    }
}

/// Truncation applied to stored field values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TruncationMode {
    /// sign(d) * min(|d|, bound)
    Hard,
    /// Identity inside the bound, logarithmic growth outside:
    /// sign(d) * bound * (1 + ln(|d|/bound)). Continuous and monotone.
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub mode: TruncationMode,
    pub bound: f64,
}

impl Truncation {
    pub fn hard(bound: f64) -> Truncation {
        assert!(bound > 0.0, "truncation bound must be positive");
        Truncation { mode: TruncationMode::Hard, bound }
    }

    pub fn log(bound: f64) -> Truncation {
        assert!(bound > 0.0, "truncation bound must be positive");
        Truncation { mode: TruncationMode::Log, bound }
    }
}

impl Default for Truncation {
    /// 1 m hard truncation.
    fn default() -> Self {
        Truncation::hard(1.0)
    }
}

pub fn truncate(d: f64, tr: Truncation) -> f64 {
    let a = d.abs();
    if a <= tr.bound {
        return d;
    }
    let m = match tr.mode {
        TruncationMode::Hard => tr.bound,
        TruncationMode::Log => tr.bound * (1.0 + (a / tr.bound).ln()),
    };
    m.copysign(d)
}

/// Dense H x W x D evaluation of a field over the camera frustum.
///
/// Values are stored row-major with depth fastest, as f32; all analytic work
/// stays in f64 and is rounded once on store.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldVolume {
    pub kind: FieldKind,
    /// Camera with intrinsics rescaled to the grid resolution.
    pub camera: Camera,
    pub h: usize,
    pub w: usize,
    pub d: usize,
    pub depths: Vec<f64>,
    pub values: Vec<f32>,
    pub truncation: Truncation,
}

impl FieldVolume {
    pub fn value_at(&self, iy: usize, ix: usize, k: usize) -> f32 {
        self.values[(iy * self.w + ix) * self.d + k]
    }

    pub fn ray_values(&self, iy: usize, ix: usize) -> &[f32] {
        let base = (iy * self.w + ix) * self.d;
        &self.values[base..base + self.d]
    }
}

/// Evaluate `kind` on every grid sample. Rays that miss the mesh carry
/// +bound (URDF/DRDF) or 0 (SRDF/ORF); an empty mesh fills the volume with
/// those same constants (+bound for the scene UDF).
pub fn evaluate_field(
    mesh: &TriangleMesh,
    bvh: &Bvh,
    camera: &Camera,
    h: usize,
    w: usize,
    d: usize,
    kind: FieldKind,
    truncation: Truncation,
) -> FieldVolume {
    let grid = frustum_grid(camera, h, w, d);
    let depths = grid.depths.clone();
    let t_max = camera.far;

    let values: Vec<f32> = grid
        .rays
        .par_iter()
        .flat_map_iter(|ray| {
            let mut out = Vec::with_capacity(d);
            match kind {
                FieldKind::SceneUdf => {
                    if mesh.is_empty() {
                        out.resize(d, truncation.bound as f32);
                    } else {
                        for &z in &depths {
                            let v = nearest_point(mesh, bvh, ray.at(z)).expect("non-empty").1;
                            out.push(truncate(v, truncation) as f32);
                        }
                    }
                }
                _ => {
                    let hits = ray_intersections(mesh, bvh, ray, t_max);
                    if hits.is_empty() {
                        let fill = miss_value(kind, truncation.bound);
                        out.resize(d, fill as f32);
                    } else {
                        for &z in &depths {
                            let v = match kind {
                                FieldKind::Urdf => urdf_at(&hits, z).unwrap(),
                                FieldKind::Srdf => srdf_at(&hits, z).unwrap(),
                                FieldKind::Drdf => drdf_at(&hits, z).unwrap(),
                                FieldKind::Orf { radius } => orf_at(&hits, z, radius),
                                FieldKind::SceneUdf => unreachable!(),
                            };
                            out.push(truncate(v, truncation) as f32);
                        }
                    }
                }
            }
            out
        })
        .collect();

    FieldVolume {
        kind,
        camera: camera.resampled(w as u32, h as u32),
        h,
        w,
        d,
        depths,
        values,
        truncation,
    }
}

/// Fill value for rays with no intersections.
pub fn miss_value(kind: FieldKind, bound: f64) -> f64 {
    match kind {
        FieldKind::Srdf | FieldKind::Orf { .. } => 0.0,
        FieldKind::SceneUdf | FieldKind::Urdf | FieldKind::Drdf => bound,
    }
}

pub const GAUSSIAN_SAMPLES_PER_HIT: usize = 512;
pub const UNIFORM_SAMPLES_PER_RAY: usize = 512;
/// Standard deviation of the per-hit Gaussian depth samples, meters.
pub const TRAINING_SAMPLE_SIGMA: f64 = 0.1;

/// One supervised sample: a 3-D point and the field value there.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSamples {
    pub samples: Vec<(Vec3, f64)>,
}

/// Per hit l: 512 depths from N(l, 0.1^2) clamped to [0, t_max]; plus 512
/// uniform depths per ray. Targets are the untruncated field values.
pub fn sample_training_points(
    mesh: &TriangleMesh,
    bvh: &Bvh,
    ray: &Ray,
    hits: &IntersectionSet,
    kind: FieldKind,
    t_max: f64,
    seed: u64,
) -> Result<TrainingSamples, FieldError> {
    if hits.is_empty() {
        return Err(FieldError::NoIntersections);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut depths = Vec::with_capacity(hits.len() * GAUSSIAN_SAMPLES_PER_HIT + UNIFORM_SAMPLES_PER_RAY);
    for &l in hits.hits() {
        for _ in 0..GAUSSIAN_SAMPLES_PER_HIT {
            let g: f64 = rng.sample(StandardNormal);
            depths.push((l + TRAINING_SAMPLE_SIGMA * g).clamp(0.0, t_max));
        }
    }
    for _ in 0..UNIFORM_SAMPLES_PER_RAY {
        depths.push(rng.random_range(0.0..t_max));
    }

    let mut samples = Vec::with_capacity(depths.len());
    for z in depths {
        let target = match kind {
            FieldKind::SceneUdf => scene_udf_at(mesh, bvh, ray.at(z))?,
            FieldKind::Urdf => urdf_at(hits, z)?,
            FieldKind::Srdf => srdf_at(hits, z)?,
            FieldKind::Drdf => drdf_at(hits, z)?,
            FieldKind::Orf { radius } => orf_at(hits, z, radius),
        };
        samples.push((ray.at(z), target));
    }
    Ok(TrainingSamples { samples })
}

/// Histogram over the number of hits per ray; entry k counts rays with k hits.
pub fn hit_histogram(mesh: &TriangleMesh, bvh: &Bvh, rays: &[Ray], t_max: f64) -> Vec<usize> {
    let counts: Vec<usize> = rays
        .par_iter()
        .map(|ray| ray_intersections(mesh, bvh, ray, t_max).len())
        .collect();
    let max = counts.iter().copied().max().unwrap_or(0);
    let mut hist = vec![0usize; max + 1];
    for c in counts {
        hist[c] += 1;
    }
    hist
}

/// Which set of defining points the receptive-field statistic uses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpreadMode {
    /// Nearest point anywhere on the mesh (scene UDF).
    SceneUdf,
    /// Nearest ray intersection, lifted to 3-D (any ray distance function).
    RayDistance,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spread {
    /// Maximum pixel distance from a defining point's projection to the
    /// ray's own pixel.
    pub max_pixels: f64,
    /// Defining points that fell behind the camera and were left out.
    pub excluded: usize,
}

/// How far from its own pixel a ray must look to see the points that define
/// its field values. Zero by construction for ray distance functions.
pub fn receptive_spread(
    mesh: &TriangleMesh,
    bvh: &Bvh,
    camera: &Camera,
    ray: &Ray,
    sample_depths: &[f64],
    mode: SpreadMode,
) -> Result<Spread, FieldError> {
    let first = sample_depths.first().copied().unwrap_or(1.0).max(1e-6);
    let (u0, v0, _) = camera.project(ray.at(first))?;

    let hits = match mode {
        SpreadMode::RayDistance => Some(ray_intersections(mesh, bvh, ray, camera.far)),
        SpreadMode::SceneUdf => None,
    };

    let mut max_px: f64 = 0.0;
    let mut excluded = 0usize;
    for &z in sample_depths {
        let defining = match mode {
            SpreadMode::SceneUdf => nearest_point(mesh, bvh, ray.at(z))?.0,
            SpreadMode::RayDistance => {
                let set = hits.as_ref().unwrap();
                ray.at(nearest_hit(set, z)?)
            }
        };
        match camera.project(defining) {
            Ok((u, v, _)) => {
                let d = ((u - u0).powi(2) + (v - v0).powi(2)).sqrt();
                max_px = max_px.max(d);
            }
            Err(GeometryError::BehindCamera) => excluded += 1,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Spread { max_pixels: max_px, excluded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Bvh;
    use crate::scene_io::axis_box_mesh;

    fn set(hits: &[f64]) -> IntersectionSet {
        IntersectionSet::new(hits.to_vec()).unwrap()
    }

    #[test]
    fn urdf_examples() {
        assert_eq!(urdf_at(&set(&[2.0, 5.0]), 3.0).unwrap(), 1.0);
        assert_eq!(urdf_at(&set(&[2.0, 5.0]), 5.0).unwrap(), 0.0);
        assert!((urdf_at(&set(&[1.0, 2.0, 4.0]), 3.2).unwrap() - 0.8).abs() < 1e-12);
        assert!(matches!(
            urdf_at(&set(&[]), 1.0),
            Err(FieldError::NoIntersections)
        ));
    }

    #[test]
    fn srdf_parity_examples() {
        let h = set(&[2.0, 4.0]);
        assert_eq!(srdf_at(&h, 1.0).unwrap(), 1.0);
        assert_eq!(srdf_at(&h, 3.0).unwrap(), -1.0);
        assert_eq!(srdf_at(&h, 5.0).unwrap(), 1.0);
    }

    #[test]
    fn drdf_two_hit_closed_form() {
        let h = set(&[0.0, 1.0]);
        assert_eq!(drdf_at(&h, 0.25).unwrap(), -0.25);
        assert_eq!(drdf_at(&h, 0.75).unwrap(), 0.25);
        assert_eq!(drdf_at(&h, 0.0).unwrap(), 0.0);
        // exact midpoint belongs to the later hit
        assert_eq!(drdf_at(&h, 0.5).unwrap(), 0.5);
    }

    #[test]
    fn drdf_nearest_hit_scan() {
        assert!((drdf_at(&set(&[1.0, 2.0, 4.0]), 3.2).unwrap() - 0.8).abs() < 1e-12);
        // beyond the last hit the field stays negative
        assert_eq!(drdf_at(&set(&[1.0, 2.0]), 5.0).unwrap(), -3.0);
    }

    #[test]
    fn orf_strict_radius() {
        let h = set(&[2.0]);
        assert_eq!(orf_at(&h, 2.2, 0.25), 1.0);
        assert_eq!(orf_at(&h, 2.25, 0.25), 0.0);
        assert_eq!(orf_at(&set(&[1.0, 3.0]), 2.0, 0.5), 0.0);
        assert_eq!(orf_at(&set(&[]), 2.0, 0.5), 0.0);
    }

    #[test]
    fn truncate_modes() {
        let hard = Truncation::hard(1.0);
        assert_eq!(truncate(0.4, hard), 0.4);
        assert_eq!(truncate(-3.0, hard), -1.0);
        let log = Truncation::log(1.0);
        assert!((truncate(std::f64::consts::E, log) - 2.0).abs() < 1e-12);
        assert_eq!(truncate(-0.3, log), -0.3);
    }

    #[test]
    fn merge_tolerance_dedups_shared_edges() {
        let s = IntersectionSet::from_unsorted(vec![2.0, 2.0 + 1e-9, 3.0], 1e-6);
        assert_eq!(s.hits(), &[2.0, 3.0]);
    }

    fn plane_mesh(z: f64, half: f64) -> TriangleMesh {
        let v = vec![
            Vec3::new(-half, -half, z),
            Vec3::new(half, -half, z),
            Vec3::new(half, half, z),
            Vec3::new(-half, half, z),
        ];
        TriangleMesh::new(v, vec![[0, 1, 2], [0, 2, 3]]).unwrap()
    }

    #[test]
    fn drdf_volume_crosses_zero_at_plane() {
        let mesh = plane_mesh(2.0, 10.0);
        let bvh = Bvh::build(&mesh);
        let cam = Camera::simple(64, 60.0, 0.1, 8.0);
        let vol = evaluate_field(&mesh, &bvh, &cam, 8, 8, 64, FieldKind::Drdf, Truncation::default());
        let vals = vol.ray_values(4, 4);
        let step = cam.far / 64.0;
        let mut crossings = 0;
        for k in 0..63 {
            if vals[k] > 0.0 && vals[k + 1] <= 0.0 {
                let depth = vol.depths[k];
                assert!((depth - 2.0).abs() <= step, "crossing at {depth}");
                crossings += 1;
            }
        }
        assert_eq!(crossings, 1);
    }

    #[test]
    fn urdf_volume_nonnegative() {
        let mesh = axis_box_mesh(Vec3::new(0.0, 0.0, 3.0), Vec3::new(1.5, 1.5, 1.5));
        let bvh = Bvh::build(&mesh);
        let cam = Camera::simple(64, 60.0, 0.1, 8.0);
        let vol = evaluate_field(&mesh, &bvh, &cam, 8, 8, 32, FieldKind::Urdf, Truncation::default());
        assert!(vol.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn volume_matches_pointwise_recomputation() {
        let mesh = axis_box_mesh(Vec3::new(0.0, 0.0, 3.0), Vec3::new(1.5, 1.5, 1.5));
        let bvh = Bvh::build(&mesh);
        let cam = Camera::simple(64, 60.0, 0.1, 8.0);
        let (h, w, d) = (16, 16, 16);
        let tr = Truncation::default();
        let vol = evaluate_field(&mesh, &bvh, &cam, h, w, d, FieldKind::Drdf, tr);
        let grid = frustum_grid(&cam, h, w, d);
        for iy in 0..h {
            for ix in 0..w {
                let hits = ray_intersections(&mesh, &bvh, grid.ray(iy, ix), cam.far);
                for k in 0..d {
                    let want = if hits.is_empty() {
                        tr.bound
                    } else {
                        truncate(drdf_at(&hits, grid.depths[k]).unwrap(), tr)
                    };
                    assert_eq!(vol.value_at(iy, ix, k), want as f32);
                }
            }
        }
    }

    #[test]
    fn training_sample_counts_and_determinism() {
        let mesh = plane_mesh(2.0, 10.0);
        let bvh = Bvh::build(&mesh);
        let ray = Ray::towards(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0));
        let hits = ray_intersections(&mesh, &bvh, &ray, 8.0);
        assert_eq!(hits.len(), 1);
        let a = sample_training_points(&mesh, &bvh, &ray, &hits, FieldKind::Drdf, 8.0, 3).unwrap();
        assert_eq!(a.samples.len(), 1024);
        let b = sample_training_points(&mesh, &bvh, &ray, &hits, FieldKind::Drdf, 8.0, 3).unwrap();
        assert_eq!(a, b);

        // gaussian block mean close to the hit depth
        let mean: f64 = a.samples[..512]
            .iter()
            .map(|(p, _)| p.z)
            .sum::<f64>()
            / 512.0;
        let tol = 3.0 * TRAINING_SAMPLE_SIGMA / (512.0f64).sqrt();
        assert!((mean - 2.0).abs() < tol, "mean {mean}");
    }

    #[test]
    fn histogram_counts() {
        let plane = plane_mesh(2.0, 50.0);
        let bvh = Bvh::build(&plane);
        let cam = Camera::simple(64, 50.0, 0.1, 8.0);
        let grid = frustum_grid(&cam, 8, 8, 2);
        let hist = hit_histogram(&plane, &bvh, &grid.rays, cam.far);
        assert_eq!(hist, vec![0, 64]);

        // nested boxes: on-axis rays pierce four walls
        let mut mesh = axis_box_mesh(Vec3::new(0.0, 0.0, 4.0), Vec3::new(6.0, 6.0, 4.0));
        mesh.merge(&axis_box_mesh(Vec3::new(0.0, 0.0, 4.0), Vec3::new(1.0, 1.0, 1.0)));
        let bvh = Bvh::build(&mesh);
        let center = Ray::towards(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0));
        let hits = ray_intersections(&mesh, &bvh, &center, 8.0);
        assert_eq!(hits.len(), 4);

        let empty = TriangleMesh::new(vec![], vec![]).unwrap();
        let bvh_e = Bvh::build(&empty);
        let hist = hit_histogram(&empty, &bvh_e, &grid.rays, cam.far);
        assert_eq!(hist, vec![64]);
    }

    #[test]
    fn spread_zero_for_orthogonal_plane_and_ray_mode() {
        let mesh = plane_mesh(2.0, 50.0);
        let bvh = Bvh::build(&mesh);
        let cam = Camera::simple(64, 50.0, 0.1, 8.0);
        let ray = cam.ray_through(32.0, 32.0);
        let depths: Vec<f64> = (1..=20).map(|i| i as f64 * 0.35).collect();
        let s = receptive_spread(&mesh, &bvh, &cam, &ray, &depths, SpreadMode::SceneUdf).unwrap();
        assert!(s.max_pixels < 1e-6, "{}", s.max_pixels);
        let s = receptive_spread(&mesh, &bvh, &cam, &ray, &depths, SpreadMode::RayDistance).unwrap();
        assert!(s.max_pixels < 1e-6);
        assert_eq!(s.excluded, 0);
    }

    #[test]
    fn spread_matches_exhaustive_projection_scan() {
        // L-shaped scene: near half-plane on the left, far plane everywhere
        let mut mesh = {
            let v = vec![
                Vec3::new(-4.0, -4.0, 2.0),
                Vec3::new(0.0, -4.0, 2.0),
                Vec3::new(0.0, 4.0, 2.0),
                Vec3::new(-4.0, 4.0, 2.0),
            ];
            TriangleMesh::new(v, vec![[0, 1, 2], [0, 2, 3]]).unwrap()
        };
        mesh.merge(&plane_mesh(5.0, 50.0));
        let bvh = Bvh::build(&mesh);
        let cam = Camera::simple(64, 50.0, 0.1, 8.0);
        let ray = cam.ray_through(48.0, 32.0); // right of center
        let depths: Vec<f64> = (1..=30).map(|i| i as f64 * 0.15).collect();

        let s = receptive_spread(&mesh, &bvh, &cam, &ray, &depths, SpreadMode::SceneUdf).unwrap();

        // oracle: brute-force nearest point + direct projection
        let (u0, v0, _) = cam.project(ray.at(depths[0])).unwrap();
        let mut want: f64 = 0.0;
        for &z in &depths {
            let (np, _) = crate::geometry::nearest_point_brute(&mesh, ray.at(z)).unwrap();
            let (u, v, _) = cam.project(np).unwrap();
            want = want.max(((u - u0).powi(2) + (v - v0).powi(2)).sqrt());
        }
        assert!((s.max_pixels - want).abs() < 1e-9);
        assert!(s.max_pixels > 0.5, "spread should be well above zero");
    }
}
