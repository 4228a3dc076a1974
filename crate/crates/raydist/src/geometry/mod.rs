//! Triangle meshes, cameras, rays, and accelerated geometric queries.
//!
//! All coordinates are in meters. Rays carry unit directions, so a ray
//! parameter is a metric distance along the ray rather than a z-depth.

mod bvh;
mod tri;

pub use bvh::{
    nearest_point, nearest_point_brute, ray_intersections, ray_intersections_brute, Bvh,
    HIT_MERGE_REL_TOL,
};
pub use tri::{closest_point_on_triangle, ray_triangle_intersection};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("empty scene")]
    EmptyScene,
    #[error("behind camera")]
    BehindCamera,
    #[error("vertex index {index} out of range (mesh has {count} vertices)")]
    IndexOutOfRange { index: u32, count: usize },
    #[error("non-finite coordinate in mesh data")]
    NonFinite,
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("direction is not unit length")]
    NotUnitLength,
}

/// 3-D point or vector, f64 components in meters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        self / self.norm()
    }

    pub fn dist(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn min_components(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max_components(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn axis(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl std::ops::Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl std::ops::Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Row-major 3x3 matrix; used only for rotations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat3 {
    pub rows: [[f64; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Matrix whose columns are the given basis vectors.
    pub fn from_columns(x: Vec3, y: Vec3, z: Vec3) -> Mat3 {
        Mat3 {
            rows: [[x.x, y.x, z.x], [x.y, y.y, z.y], [x.z, y.z, z.z]],
        }
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        Vec3::new(
            self.rows[0][0] * v.x + self.rows[0][1] * v.y + self.rows[0][2] * v.z,
            self.rows[1][0] * v.x + self.rows[1][1] * v.y + self.rows[1][2] * v.z,
            self.rows[2][0] * v.x + self.rows[2][1] * v.y + self.rows[2][2] * v.z,
        )
    }

    pub fn transpose(&self) -> Mat3 {
        let r = &self.rows;
        Mat3 {
            rows: [
                [r[0][0], r[1][0], r[2][0]],
                [r[0][1], r[1][1], r[2][1]],
                [r[0][2], r[1][2], r[2][2]],
            ],
        }
    }
}

/// Rigid transform mapping camera coordinates to world coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        rotation: Mat3::IDENTITY,
        translation: Vec3::ZERO,
    };

    pub fn apply(&self, p: Vec3) -> Vec3 {
        self.rotation.mul_vec(p) + self.translation
    }

    /// Inverse transform (world to camera); valid because rotation is orthonormal.
    pub fn apply_inverse(&self, p: Vec3) -> Vec3 {
        self.rotation.transpose().mul_vec(p - self.translation)
    }
}

/// Half-line `origin + t * direction` for t >= 0, `direction` unit length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl Ray {
    /// Build a ray; the direction must already be unit length to 1e-9.
    pub fn new(origin: Vec3, direction: Vec3) -> Result<Ray, GeometryError> {
        if !origin.is_finite() || !direction.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if (direction.norm() - 1.0).abs() > 1e-9 {
            return Err(GeometryError::NotUnitLength);
        }
        Ok(Ray { origin, direction })
    }

    /// Build a ray from any non-zero direction, normalizing it.
    pub fn towards(origin: Vec3, direction: Vec3) -> Ray {
        Ray {
            origin,
            direction: direction.normalized(),
        }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

/// Pinhole camera: intrinsics in pixels, pose mapping camera to world,
/// and the metric depth range covered by field volumes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub pose: RigidTransform,
    pub near: f64,
    pub far: f64,
}

impl Camera {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: u32,
        height: u32,
        pose: RigidTransform,
        near: f64,
        far: f64,
    ) -> Result<Camera, GeometryError> {
        if fx <= 0.0 || fy <= 0.0 {
            return Err(GeometryError::InvalidCamera("fx and fy must be positive".into()));
        }
        if !(near < far) || near < 0.0 {
            return Err(GeometryError::InvalidCamera("need 0 <= near < far".into()));
        }
        if width == 0 || height == 0 {
            return Err(GeometryError::InvalidCamera("zero image size".into()));
        }
        Ok(Camera { fx, fy, cx, cy, width, height, pose, near, far })
    }

    /// Square-image camera at the origin looking down +z, with the given
    /// vertical field of view in degrees.
    pub fn simple(size: u32, vfov_deg: f64, near: f64, far: f64) -> Camera {
        let half = (vfov_deg.to_radians() / 2.0).tan();
        let f = size as f64 / (2.0 * half);
        Camera {
            fx: f,
            fy: f,
            cx: size as f64 / 2.0,
            cy: size as f64 / 2.0,
            width: size,
            height: size,
            pose: RigidTransform::IDENTITY,
            near,
            far,
        }
    }

    pub fn position(&self) -> Vec3 {
        self.pose.translation
    }

    /// World-space ray through pixel coordinates (u, v).
    pub fn ray_through(&self, u: f64, v: f64) -> Ray {
        let dir_cam = Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0);
        let dir_world = self.pose.rotation.mul_vec(dir_cam).normalized();
        Ray {
            origin: self.position(),
            direction: dir_world,
        }
    }

    /// Pinhole projection of a world point: pixel (u, v) and z-depth.
    pub fn project(&self, p: Vec3) -> Result<(f64, f64, f64), GeometryError> {
        let q = self.pose.apply_inverse(p);
        if q.z <= 0.0 {
            return Err(GeometryError::BehindCamera);
        }
        let u = self.fx * q.x / q.z + self.cx;
        let v = self.fy * q.y / q.z + self.cy;
        Ok((u, v, q.z))
    }

    /// Camera with intrinsics rescaled to a new image size, preserving rays.
    pub fn resampled(&self, new_w: u32, new_h: u32) -> Camera {
        let sx = new_w as f64 / self.width as f64;
        let sy = new_h as f64 / self.height as f64;
        Camera {
            fx: self.fx * sx,
            fy: self.fy * sy,
            cx: self.cx * sx,
            cy: self.cy * sy,
            width: new_w,
            height: new_h,
            ..*self
        }
    }
}

/// Triangle mesh. Not required to be watertight; degenerate (zero-area)
/// triangles are dropped at construction time.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self, GeometryError> {
        for v in &vertices {
            if !v.is_finite() {
                return Err(GeometryError::NonFinite);
            }
        }
        let count = vertices.len();
        let mut kept = Vec::with_capacity(triangles.len());
        for t in triangles {
            for &i in &t {
                if i as usize >= count {
                    return Err(GeometryError::IndexOutOfRange { index: i, count });
                }
            }
            let [a, b, c] = [
                vertices[t[0] as usize],
                vertices[t[1] as usize],
                vertices[t[2] as usize],
            ];
            // zero-area filter, scale-aware
            let area2 = (b - a).cross(c - a).norm_sq();
            let scale = (b - a).norm_sq().max((c - a).norm_sq()).max(1e-30);
            if area2 <= 1e-24 * scale * scale {
                continue;
            }
            kept.push(t);
        }
        Ok(TriangleMesh { vertices, triangles: kept })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle_vertices(&self, i: usize) -> [Vec3; 3] {
        let t = self.triangles[i];
        [
            self.vertices[t[0] as usize],
            self.vertices[t[1] as usize],
            self.vertices[t[2] as usize],
        ]
    }

    /// Append another mesh, rewriting its indices.
    pub fn merge(&mut self, other: &TriangleMesh) {
        let base = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| [t[0] + base, t[1] + base, t[2] + base]));
    }
}

/// H x W grid of camera rays with a shared depth ladder.
///
/// Rays are stored row-major (v, then u). Depths are linearly spaced on
/// [far/d, far], which makes the spacing exactly far/d.
#[derive(Clone, Debug)]
pub struct FrustumGrid {
    pub rays: Vec<Ray>,
    pub depths: Vec<f64>,
    pub h: usize,
    pub w: usize,
}

impl FrustumGrid {
    pub fn ray(&self, iy: usize, ix: usize) -> &Ray {
        &self.rays[iy * self.w + ix]
    }
}

/// Rays through the pixel centers of an H x W resampling of the image plane,
/// each carrying D linearly spaced metric depths.
pub fn frustum_grid(camera: &Camera, h: usize, w: usize, d: usize) -> FrustumGrid {
    assert!(h >= 2 && w >= 2 && d >= 2, "grid dims must be >= 2");
    let mut rays = Vec::with_capacity(h * w);
    for iy in 0..h {
        for ix in 0..w {
            let u = (ix as f64 + 0.5) * camera.width as f64 / w as f64;
            let v = (iy as f64 + 0.5) * camera.height as f64 / h as f64;
            rays.push(camera.ray_through(u, v));
        }
    }
    let depths = (0..d).map(|k| camera.far * (k + 1) as f64 / d as f64).collect();
    FrustumGrid { rays, depths, h, w }
}
