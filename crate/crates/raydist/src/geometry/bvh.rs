//! Axis-aligned BVH over mesh triangles, with ray-intersection and
//! nearest-point queries that match brute force exactly.

use super::tri::{closest_point_on_triangle, ray_triangle_intersection};
use super::{GeometryError, Ray, TriangleMesh, Vec3};
use crate::ray_fields::IntersectionSet;

/// Relative tolerance for merging duplicate hits (shared edges and vertices
/// produce one hit per adjacent triangle).
pub const HIT_MERGE_REL_TOL: f64 = 1e-6;

const LEAF_SIZE: usize = 4;

#[derive(Clone, Copy, Debug)]
struct Aabb {
    min: Vec3,
    max: Vec3,
}

impl Aabb {
    fn empty() -> Aabb {
        Aabb {
            min: Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn grow_point(&mut self, p: Vec3) {
        self.min = self.min.min_components(p);
        self.max = self.max.max_components(p);
    }

    fn grow(&mut self, o: &Aabb) {
        self.min = self.min.min_components(o.min);
        self.max = self.max.max_components(o.max);
    }

    fn centroid(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    /// Slab test over [0, t_max], inclusive at the slab boundaries. Axes
    /// where the ray direction is zero are tested by containment, so rays
    /// lying exactly on a box seam are never pruned.
    fn hit_by(&self, origin: Vec3, inv_dir: Vec3, t_max: f64) -> bool {
        let mut tmin = 0.0f64;
        let mut tmax = t_max;
        for axis in 0..3 {
            let lo = self.min.axis(axis);
            let hi = self.max.axis(axis);
            let o = origin.axis(axis);
            let inv = inv_dir.axis(axis);
            if inv.is_infinite() {
                if o < lo || o > hi {
                    return false;
                }
            } else {
                let t1 = (lo - o) * inv;
                let t2 = (hi - o) * inv;
                tmin = tmin.max(t1.min(t2));
                tmax = tmax.min(t1.max(t2));
            }
        }
        // small slack so seam-grazing hits are left to the triangle test
        tmin <= tmax + 1e-12 * (1.0 + t_max)
    }

    /// Squared distance from p to this box (0 inside).
    fn dist_sq(&self, p: Vec3) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        let dz = (self.min.z - p.z).max(0.0).max(p.z - self.max.z);
        dx * dx + dy * dy + dz * dz
    }
}

#[derive(Clone, Debug)]
struct Node {
    aabb: Aabb,
    /// Leaf: range into `order`. Internal: children at (left, left + 1 tree slot).
    left: u32,
    right: u32,
    start: u32,
    count: u32,
}

impl Node {
    fn is_leaf(&self) -> bool {
        self.count > 0
    }
}

/// Bounding volume hierarchy over the triangles of one mesh. Immutable after
/// construction; queries are pure and safe to run from many threads.
#[derive(Clone, Debug)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
}

impl Bvh {
    /// Median-split build over triangle centroids. Deterministic.
    pub fn build(mesh: &TriangleMesh) -> Bvh {
        let n = mesh.triangle_count();
        let mut boxes = Vec::with_capacity(n);
        for i in 0..n {
            let [a, b, c] = mesh.triangle_vertices(i);
            let mut bb = Aabb::empty();
            bb.grow_point(a);
            bb.grow_point(b);
            bb.grow_point(c);
            boxes.push(bb);
        }
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut nodes = Vec::new();
        if n > 0 {
            build_node(&boxes, &mut order, 0, n, &mut nodes);
        }
        Bvh { nodes, order }
    }

    fn for_each_candidate_ray(
        &self,
        origin: Vec3,
        direction: Vec3,
        t_max: f64,
        visit: &mut impl FnMut(u32),
    ) {
        if self.nodes.is_empty() {
            return;
        }
        let inv_dir = Vec3::new(1.0 / direction.x, 1.0 / direction.y, 1.0 / direction.z);
        let mut stack = vec![0usize];
        while let Some(idx) = stack.pop() {
            let node = &self.nodes[idx];
            if !node.aabb.hit_by(origin, inv_dir, t_max) {
                continue;
            }
            if node.is_leaf() {
                for k in node.start..node.start + node.count {
                    visit(self.order[k as usize]);
                }
            } else {
                stack.push(node.left as usize);
                stack.push(node.right as usize);
            }
        }
    }
}

fn build_node(boxes: &[Aabb], order: &mut [u32], start: usize, count: usize, nodes: &mut Vec<Node>) -> u32 {
    let mut aabb = Aabb::empty();
    for &t in &order[start..start + count] {
        aabb.grow(&boxes[t as usize]);
    }
    let idx = nodes.len() as u32;
    nodes.push(Node { aabb, left: 0, right: 0, start: start as u32, count: count as u32 });

    if count <= LEAF_SIZE {
        return idx;
    }

    // split on the longest centroid axis at the median
    let extent = aabb.max - aabb.min;
    let axis = if extent.x >= extent.y && extent.x >= extent.z {
        0
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };
    let slice = &mut order[start..start + count];
    let mid = count / 2;
    slice.select_nth_unstable_by(mid, |&a, &b| {
        boxes[a as usize]
            .centroid()
            .axis(axis)
            .total_cmp(&boxes[b as usize].centroid().axis(axis))
    });

    let left = build_node(boxes, order, start, mid, nodes);
    let right = build_node(boxes, order, start + mid, count - mid, nodes);
    nodes[idx as usize].left = left;
    nodes[idx as usize].right = right;
    nodes[idx as usize].count = 0;
    idx
}

/// All intersections of the ray with the mesh in (0, t_max], sorted and with
/// duplicates within `HIT_MERGE_REL_TOL * t_max` merged.
pub fn ray_intersections(
    mesh: &TriangleMesh,
    bvh: &Bvh,
    ray: &Ray,
    t_max: f64,
) -> IntersectionSet {
    assert!(t_max > 0.0, "t_max must be positive");
    let mut ts = Vec::new();
    bvh.for_each_candidate_ray(ray.origin, ray.direction, t_max, &mut |tri| {
        let [a, b, c] = mesh.triangle_vertices(tri as usize);
        if let Some(t) = ray_triangle_intersection(ray.origin, ray.direction, a, b, c) {
            if t <= t_max {
                ts.push(t);
            }
        }
    });
    IntersectionSet::from_unsorted(ts, HIT_MERGE_REL_TOL * t_max)
}

/// Brute-force counterpart of [`ray_intersections`]; this is the oracle the
/// BVH path is tested against.
pub fn ray_intersections_brute(mesh: &TriangleMesh, ray: &Ray, t_max: f64) -> IntersectionSet {
    let mut ts = Vec::new();
    for i in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.triangle_vertices(i);
        if let Some(t) = ray_triangle_intersection(ray.origin, ray.direction, a, b, c) {
            if t <= t_max {
                ts.push(t);
            }
        }
    }
    IntersectionSet::from_unsorted(ts, HIT_MERGE_REL_TOL * t_max)
}

/// Nearest point on the mesh to p and its distance.
pub fn nearest_point(
    mesh: &TriangleMesh,
    bvh: &Bvh,
    p: Vec3,
) -> Result<(Vec3, f64), GeometryError> {
    if mesh.is_empty() {
        return Err(GeometryError::EmptyScene);
    }
    let mut best_d2 = f64::INFINITY;
    let mut best_point = Vec3::ZERO;
    nearest_rec(mesh, bvh, 0, p, &mut best_d2, &mut best_point);
    Ok((best_point, best_d2.sqrt()))
}

fn nearest_rec(
    mesh: &TriangleMesh,
    bvh: &Bvh,
    node_idx: usize,
    p: Vec3,
    best_d2: &mut f64,
    best_point: &mut Vec3,
) {
    let node = &bvh.nodes[node_idx];
    if node.aabb.dist_sq(p) > *best_d2 {
        return;
    }
    if node.is_leaf() {
        for k in node.start..node.start + node.count {
            let tri = bvh.order[k as usize] as usize;
            let [a, b, c] = mesh.triangle_vertices(tri);
            let q = closest_point_on_triangle(p, a, b, c);
            let d2 = (q - p).norm_sq();
            if d2 < *best_d2 {
                *best_d2 = d2;
                *best_point = q;
            }
        }
    } else {
        // nearer child first for tighter pruning
        let l = node.left as usize;
        let r = node.right as usize;
        let dl = bvh.nodes[l].aabb.dist_sq(p);
        let dr = bvh.nodes[r].aabb.dist_sq(p);
        if dl <= dr {
            nearest_rec(mesh, bvh, l, p, best_d2, best_point);
            nearest_rec(mesh, bvh, r, p, best_d2, best_point);
        } else {
            nearest_rec(mesh, bvh, r, p, best_d2, best_point);
            nearest_rec(mesh, bvh, l, p, best_d2, best_point);
        }
    }
}

/// Brute-force nearest point, the oracle for [`nearest_point`].
pub fn nearest_point_brute(mesh: &TriangleMesh, p: Vec3) -> Result<(Vec3, f64), GeometryError> {
    if mesh.is_empty() {
        return Err(GeometryError::EmptyScene);
    }
    let mut best_d2 = f64::INFINITY;
    let mut best_point = Vec3::ZERO;
    for i in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.triangle_vertices(i);
        let q = closest_point_on_triangle(p, a, b, c);
        let d2 = (q - p).norm_sq();
        if d2 < best_d2 {
            best_d2 = d2;
            best_point = q;
        }
    }
    Ok((best_point, best_d2.sqrt()))
}
