//! Shared scalar/vector aliases and axis-aligned boxes.

use nalgebra as na;

pub type Point3 = na::Point3<f64>;
pub type Vec3 = na::Vector3<f64>;
pub type Mat3 = na::Matrix3<f64>;
pub type Iso3 = na::Isometry3<f64>;

/// Axis-aligned bounding box. An empty box has `min > max` on every axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn new(min: Point3, max: Point3) -> Self {
        Self { min, max }
    }

    pub fn empty() -> Self {
        Self {
            min: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a, I: IntoIterator<Item = &'a Point3>>(points: I) -> Self {
        let mut b = Self::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y || self.min.z > self.max.z
    }

    pub fn grow(&mut self, p: &Point3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn inflate(&self, margin: f64) -> Aabb {
        let m = Vec3::repeat(margin);
        Aabb {
            min: self.min - m,
            max: self.max + m,
        }
    }

    pub fn extent(&self) -> Vec3 {
        if self.is_empty() {
            Vec3::zeros()
        } else {
            self.max - self.min
        }
    }

    pub fn center(&self) -> Point3 {
        na::center(&self.min, &self.max)
    }

    pub fn surface_area(&self) -> f64 {
        let e = self.extent();
        2.0 * (e.x * e.y + e.y * e.z + e.z * e.x)
    }

    pub fn contains_point(&self, p: &Point3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn contains_aabb(&self, other: &Aabb) -> bool {
        other.is_empty() || (self.contains_point(&other.min) && self.contains_point(&other.max))
    }

    pub fn overlaps(&self, other: &Aabb) -> bool {
        (0..3).all(|i| self.min[i] <= other.max[i] && other.min[i] <= self.max[i])
    }

    pub fn corners(&self) -> [Point3; 8] {
        let (a, b) = (self.min, self.max);
        [
            Point3::new(a.x, a.y, a.z),
            Point3::new(b.x, a.y, a.z),
            Point3::new(a.x, b.y, a.z),
            Point3::new(b.x, b.y, a.z),
            Point3::new(a.x, a.y, b.z),
            Point3::new(b.x, a.y, b.z),
            Point3::new(a.x, b.y, b.z),
            Point3::new(b.x, b.y, b.z),
        ]
    }

    /// Box of the rigidly transformed corners; encloses the transformed box.
    pub fn transformed(&self, iso: &Iso3) -> Aabb {
        if self.is_empty() {
            return *self;
        }
        let corners = self.corners().map(|c| iso * c);
        Aabb::from_points(corners.iter())
    }

    /// Slab test against the parametric segment `origin + t * dir`, `t ∈ [t_min, t_max]`.
    /// Returns the entry parameter when the segment touches the box.
    #[inline]
    pub fn ray_entry(&self, origin: &Point3, inv_dir: &Vec3, t_min: f64, t_max: f64) -> Option<f64> {
        let mut t0 = t_min;
        let mut t1 = t_max;
        for i in 0..3 {
            let a = (self.min[i] - origin[i]) * inv_dir[i];
            let b = (self.max[i] - origin[i]) * inv_dir[i];
            // NaN arises only for 0 * inf (origin on a slab plane of a parallel ray); treat as inside.
            let (lo, hi) = if a > b { (b, a) } else { (a, b) };
            if !lo.is_nan() {
                t0 = t0.max(lo);
            }
            if !hi.is_nan() {
                t1 = t1.min(hi);
            }
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }

    /// Squared distance from `p` to the box (0 inside).
    pub fn distance_squared(&self, p: &Point3) -> f64 {
        let mut d = 0.0;
        for i in 0..3 {
            let v = if p[i] < self.min[i] {
                self.min[i] - p[i]
            } else if p[i] > self.max[i] {
                p[i] - self.max[i]
            } else {
                0.0
            };
            d += v * v;
        }
        d
    }
}

/// Closest point on segment `[a, b]` to `p`, as the clamped segment parameter.
#[inline]
pub fn segment_closest_param(a: &Point3, b: &Point3, p: &Point3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 <= f64::MIN_POSITIVE {
        return 0.0;
    }
    ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
}

#[inline]
pub fn point_segment_distance(a: &Point3, b: &Point3, p: &Point3) -> f64 {
    let t = segment_closest_param(a, b, p);
    (p - (a + (b - a) * t)).norm()
}

/// Any unit vector orthogonal to `v` (which must be non-zero).
pub fn any_orthogonal(v: &Vec3) -> Vec3 {
    let a = v.abs();
    let helper = if a.x <= a.y && a.x <= a.z {
        Vec3::x()
    } else if a.y <= a.z {
        Vec3::y()
    } else {
        Vec3::z()
    };
    v.cross(&helper).normalize()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slab_entry_and_miss() {
        let b = Aabb::new(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 1.0, 1.0));
        let o = Point3::new(-1.0, 0.5, 0.5);
        let inv = Vec3::new(1.0, f64::INFINITY, f64::INFINITY);
        assert_eq!(b.ray_entry(&o, &inv, 0.0, 10.0), Some(1.0));
        assert_eq!(b.ray_entry(&o, &inv, 0.0, 0.5), None);
        // Parallel ray lying exactly in a slab plane.
        let o2 = Point3::new(-1.0, 0.0, 0.5);
        assert!(b.ray_entry(&o2, &inv, 0.0, 10.0).is_some());
    }

    #[test]
    fn transformed_box_encloses_corners() {
        let b = Aabb::new(Point3::new(-1.0, -2.0, -0.5), Point3::new(1.0, 2.0, 0.5));
        let iso = Iso3::new(Vec3::new(0.3, 0.1, -2.0), Vec3::new(0.4, -0.2, 1.1));
        let t = b.transformed(&iso);
        for c in b.corners() {
            assert!(t.inflate(1e-12).contains_point(&(iso * c)));
        }
    }
}
