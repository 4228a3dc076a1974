//! Per-triangle primitives: ray intersection and closest point.

use super::Vec3;

/// Barycentric slack so that rays through shared edges and vertices are
/// reported by at least one of the adjacent triangles.
const BARY_EPS: f64 = 1e-12;
const DET_EPS: f64 = 1e-14;

/// Möller–Trumbore ray/triangle intersection with inclusive edge handling.
/// Returns the ray parameter t > 0, or None.
pub fn ray_triangle_intersection(
    origin: Vec3,
    direction: Vec3,
    a: Vec3,
    b: Vec3,
    c: Vec3,
) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let pvec = direction.cross(e2);
    let det = e1.dot(pvec);
    if det.abs() < DET_EPS {
        return None; // parallel or degenerate
    }
    let inv_det = 1.0 / det;
    let tvec = origin - a;
    let u = tvec.dot(pvec) * inv_det;
    if u < -BARY_EPS || u > 1.0 + BARY_EPS {
        return None;
    }
    let qvec = tvec.cross(e1);
    let v = direction.dot(qvec) * inv_det;
    if v < -BARY_EPS || u + v > 1.0 + BARY_EPS {
        return None;
    }
    let t = e2.dot(qvec) * inv_det;
    if t > 0.0 {
        Some(t)
    } else {
        None
    }
}

/// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection).
pub fn closest_point_on_triangle(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }

    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }

    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }

    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> (Vec3, Vec3, Vec3) {
        (
            Vec3::new(0.0, 0.0, 2.0),
            Vec3::new(1.0, 0.0, 2.0),
            Vec3::new(0.0, 1.0, 2.0),
        )
    }

    #[test]
    fn hit_through_interior() {
        let (a, b, c) = tri();
        let t = ray_triangle_intersection(
            Vec3::new(0.25, 0.25, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            a,
            b,
            c,
        );
        assert_eq!(t, Some(2.0));
    }

    #[test]
    fn hit_exactly_on_edge_counts() {
        let (a, b, c) = tri();
        // through the midpoint of edge ab
        let t = ray_triangle_intersection(
            Vec3::new(0.5, 0.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            a,
            b,
            c,
        );
        assert_eq!(t, Some(2.0));
        // through vertex a
        let t = ray_triangle_intersection(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0), a, b, c);
        assert_eq!(t, Some(2.0));
    }

    #[test]
    fn miss_and_behind() {
        let (a, b, c) = tri();
        assert!(ray_triangle_intersection(
            Vec3::new(2.0, 2.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            a,
            b,
            c
        )
        .is_none());
        assert!(ray_triangle_intersection(
            Vec3::new(0.25, 0.25, 3.0),
            Vec3::new(0.0, 0.0, 1.0),
            a,
            b,
            c
        )
        .is_none());
    }

    #[test]
    fn closest_point_regions() {
        let (a, b, c) = tri();
        // above the interior
        let q = closest_point_on_triangle(Vec3::new(0.2, 0.2, 5.0), a, b, c);
        assert!((q - Vec3::new(0.2, 0.2, 2.0)).norm() < 1e-12);
        // nearest to a vertex
        let q = closest_point_on_triangle(Vec3::new(-1.0, -1.0, 2.0), a, b, c);
        assert!((q - a).norm() < 1e-12);
        // nearest to edge ab
        let q = closest_point_on_triangle(Vec3::new(0.5, -1.0, 2.0), a, b, c);
        assert!((q - Vec3::new(0.5, 0.0, 2.0)).norm() < 1e-12);
        // nearest to the diagonal edge bc
        let q = closest_point_on_triangle(Vec3::new(1.0, 1.0, 2.0), a, b, c);
        assert!((q - Vec3::new(0.5, 0.5, 2.0)).norm() < 1e-12);
    }
}
