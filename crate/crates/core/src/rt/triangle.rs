//! Watertight ray/triangle test (sheared ray space, shared edge functions), in f64.

use super::ray::{FaceSide, Ray, DEGENERATE_EPS};
use crate::geometry::Point3;

/// Per-ray shear constants; reuse across all triangles tested against one ray.
#[derive(Debug, Clone, Copy)]
pub struct ShearedRay {
    origin: Point3,
    kx: usize,
    ky: usize,
    kz: usize,
    sx: f64,
    sy: f64,
    sz: f64,
    t_min: f64,
    t_max: f64,
    dir: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleHit {
    pub t: f64,
    /// Weights of the three vertices.
    pub bary: [f64; 3],
    pub side: FaceSide,
}

impl TriangleHit {
    pub fn near_boundary(&self) -> bool {
        self.bary.iter().any(|&b| b < DEGENERATE_EPS)
    }
}

impl ShearedRay {
    pub fn new(ray: &Ray) -> Self {
        let d = ray.dir;
        let a = d.abs();
        let kz = if a.x > a.y && a.x > a.z {
            0
        } else if a.y > a.z {
            1
        } else {
            2
        };
        let mut kx = (kz + 1) % 3;
        let mut ky = (kx + 1) % 3;
        if d[kz] < 0.0 {
            std::mem::swap(&mut kx, &mut ky);
        }
        ShearedRay {
            origin: ray.origin,
            kx,
            ky,
            kz,
            sx: d[kx] / d[kz],
            sy: d[ky] / d[kz],
            sz: 1.0 / d[kz],
            t_min: ray.t_min,
            t_max: ray.t_max,
            dir: [d.x, d.y, d.z],
        }
    }

    #[inline]
    pub fn intersect(&self, tri: &[Point3; 3]) -> Option<TriangleHit> {
        let (kx, ky, kz) = (self.kx, self.ky, self.kz);
        let a = tri[0] - self.origin;
        let b = tri[1] - self.origin;
        let c = tri[2] - self.origin;
        let ax = a[kx] - self.sx * a[kz];
        let ay = a[ky] - self.sy * a[kz];
        let bx = b[kx] - self.sx * b[kz];
        let by = b[ky] - self.sy * b[kz];
        let cx = c[kx] - self.sx * c[kz];
        let cy = c[ky] - self.sy * c[kz];

        let u = cx * by - cy * bx;
        let v = ax * cy - ay * cx;
        let w = bx * ay - by * ax;
        if (u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0) {
            return None;
        }
        let det = u + v + w;
        if det == 0.0 {
            return None;
        }
        let az = self.sz * a[kz];
        let bz = self.sz * b[kz];
        let cz = self.sz * c[kz];
        let t = (u * az + v * bz + w * cz) / det;
        if !(t >= self.t_min && t <= self.t_max) {
            return None;
        }
        let n = (tri[1] - tri[0]).cross(&(tri[2] - tri[0]));
        let dn = self.dir[0] * n.x + self.dir[1] * n.y + self.dir[2] * n.z;
        let side = if dn < 0.0 { FaceSide::Front } else { FaceSide::Back };
        Some(TriangleHit {
            t,
            bary: [u / det, v / det, w / det],
            side,
        })
    }
}

/// Convenience wrapper for a single test.
pub fn intersect_triangle(ray: &Ray, tri: &[Point3; 3]) -> Option<TriangleHit> {
    ShearedRay::new(ray).intersect(tri)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    fn tri() -> [Point3; 3] {
        [Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)]
    }

    #[test]
    fn front_and_back() {
        let down = Ray::infinite(Point3::new(0.25, 0.25, 1.0), -Vec3::z());
        let h = intersect_triangle(&down, &tri()).unwrap();
        assert!((h.t - 1.0).abs() < 1e-12);
        assert_eq!(h.side, FaceSide::Front);
        assert!((h.bary.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let up = Ray::infinite(Point3::new(0.25, 0.25, -1.0), Vec3::z());
        assert_eq!(intersect_triangle(&up, &tri()).unwrap().side, FaceSide::Back);
    }

    #[test]
    fn respects_segment_bounds() {
        let r = Ray::new(Point3::new(0.25, 0.25, 1.0), -Vec3::z(), 0.0, 0.5);
        assert!(intersect_triangle(&r, &tri()).is_none());
        let r = Ray::new(Point3::new(0.25, 0.25, 1.0), -Vec3::z(), 1.5, 3.0);
        assert!(intersect_triangle(&r, &tri()).is_none());
    }

    #[test]
    fn shared_edge_never_leaks() {
        // Two triangles sharing the diagonal of a square; a ray exactly on the diagonal
        // must hit at least one of them.
        let p = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let t1 = [p[0], p[1], p[2]];
        let t2 = [p[0], p[2], p[3]];
        for k in 1..100 {
            let s = k as f64 / 100.0;
            let r = Ray::infinite(Point3::new(s, s, 1.0), Vec3::new(0.0, 0.0, -1.0));
            let h1 = intersect_triangle(&r, &t1);
            let h2 = intersect_triangle(&r, &t2);
            assert!(h1.is_some() || h2.is_some(), "leak at {s}");
            if let Some(h) = h1.or(h2) {
                assert!(h.near_boundary());
            }
        }
    }
}
