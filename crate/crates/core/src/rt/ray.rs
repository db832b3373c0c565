use crate::geometry::{any_orthogonal, Iso3, Point3, Vec3};

/// Hits this close to a triangle boundary (in barycentric terms) or to a segment end
/// are degenerate and trigger a jittered re-trace.
pub const DEGENERATE_EPS: f64 = 1e-7;

/// Angular jitter applied on re-trace, radians.
pub const JITTER_ANGLE: f64 = 1e-6;

/// Re-traces attempted before a degenerate result is accepted as-is.
pub const MAX_RETRACES: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaceSide {
    Front,
    Back,
}

/// A ray segment `origin + t * dir` for `t ∈ [t_min, t_max]`, `dir` unit length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Point3,
    pub dir: Vec3,
    pub t_min: f64,
    pub t_max: f64,
    pub(crate) inv_dir: Vec3,
}

impl Ray {
    /// `dir` is normalized here; it must be non-zero.
    pub fn new(origin: Point3, dir: Vec3, t_min: f64, t_max: f64) -> Ray {
        let dir = dir.normalize();
        debug_assert!(dir.iter().all(|c| c.is_finite()), "zero ray direction");
        debug_assert!(0.0 <= t_min && t_min <= t_max);
        Ray {
            origin,
            dir,
            t_min,
            t_max,
            inv_dir: dir.map(|c| 1.0 / c),
        }
    }

    /// Unbounded ray (t in `[0, inf)`).
    pub fn infinite(origin: Point3, dir: Vec3) -> Ray {
        Ray::new(origin, dir, 0.0, f64::INFINITY)
    }

    /// Ray along the segment `a -> b` with `t ∈ [0, |b - a|]`; `None` for a zero-length segment.
    pub fn segment(a: Point3, b: Point3) -> Option<Ray> {
        let d = b - a;
        let len = d.norm();
        (len > 0.0).then(|| Ray::new(a, d / len, 0.0, len))
    }

    pub fn at(&self, t: f64) -> Point3 {
        self.origin + self.dir * t
    }

    pub fn transformed(&self, iso: &Iso3) -> Ray {
        Ray::new(iso * self.origin, iso * self.dir, self.t_min, self.t_max)
    }

    /// Same origin and bounds, direction tilted by [`JITTER_ANGLE`] about an axis
    /// chosen deterministically from `attempt`.
    pub fn jittered(&self, attempt: u32) -> Ray {
        let u = any_orthogonal(&self.dir);
        let v = self.dir.cross(&u);
        let phi = splitmix(attempt as u64) as f64 / u64::MAX as f64 * std::f64::consts::TAU;
        let off = u * phi.cos() + v * phi.sin();
        let (s, c) = JITTER_ANGLE.sin_cos();
        Ray::new(self.origin, self.dir * c + off * s, self.t_min, self.t_max)
    }

    pub(crate) fn near_end(&self, t: f64) -> bool {
        t - self.t_min < DEGENERATE_EPS || (self.t_max.is_finite() && self.t_max - t < DEGENERATE_EPS)
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// A reported intersection. `face_side` is `None` for curve hits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub primitive_id: u32,
    pub instance_id: u32,
    pub face_side: Option<FaceSide>,
}
