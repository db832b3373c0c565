//! Swept-sphere primitives: capsules (segment plus radius) and a BVH over many of them.

use std::ops::ControlFlow;

use super::bvh::Bvh;
use super::ray::Hit;
use super::ray::Ray;
use crate::error::Result;
use crate::geometry::{point_segment_distance, Aabb, Point3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capsule {
    pub a: Point3,
    pub b: Point3,
    pub radius: f64,
}

impl Capsule {
    pub fn new(a: Point3, b: Point3, radius: f64) -> Capsule {
        Capsule { a, b, radius }
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points([self.a, self.b].iter()).inflate(self.radius)
    }

    pub fn distance_to_axis(&self, p: &Point3) -> f64 {
        point_segment_distance(&self.a, &self.b, p)
    }

    pub fn contains(&self, p: &Point3) -> bool {
        self.distance_to_axis(p) <= self.radius
    }

    /// Parameter where the ray segment enters the capsule from outside. A segment that
    /// starts inside has no entering intersection and returns `None`.
    pub fn ray_entry(&self, ray: &Ray) -> Option<f64> {
        let o = ray.at(ray.t_min);
        let r2 = self.radius * self.radius;
        if (point_segment_distance(&self.a, &self.b, &o)).powi(2) < r2 {
            return None;
        }
        let d = ray.dir;
        let mut best = f64::INFINITY;
        let mut consider = |t: f64| {
            if t >= ray.t_min && t <= ray.t_max && t < best {
                best = t;
            }
        };
        for c in [self.a, self.b] {
            if let Some(t) = sphere_entry(&ray.origin, &d, &c, r2) {
                consider(t);
            }
        }
        let axis = self.b - self.a;
        let len = axis.norm();
        if len > 0.0 {
            let u = axis / len;
            let w = ray.origin - self.a;
            let dp = d - u * d.dot(&u);
            let wp = w - u * w.dot(&u);
            let qa = dp.norm_squared();
            if qa > 0.0 {
                let qb = wp.dot(&dp);
                let qc = wp.norm_squared() - r2;
                let disc = qb * qb - qa * qc;
                if disc >= 0.0 {
                    let t = (-qb - disc.sqrt()) / qa;
                    let s = (w + d * t).dot(&u);
                    if (0.0..=len).contains(&s) {
                        consider(t);
                    }
                }
            }
        }
        best.is_finite().then_some(best)
    }
}

/// First root of `|o + t d - c|^2 = r2` for unit `d`.
fn sphere_entry(o: &Point3, d: &Vec3, c: &Point3, r2: f64) -> Option<f64> {
    let w = o - c;
    let b = w.dot(d);
    let disc = b * b - (w.norm_squared() - r2);
    (disc >= 0.0).then(|| -b - disc.sqrt())
}

/// Capsules with an owning curve id each, under one BVH.
#[derive(Debug, Clone)]
pub struct CurveScene {
    capsules: Vec<Capsule>,
    owners: Vec<u32>,
    bvh: Option<Bvh>,
}

impl CurveScene {
    pub fn build(capsules: Vec<Capsule>, owners: Vec<u32>) -> Result<CurveScene> {
        assert_eq!(capsules.len(), owners.len());
        let boxes: Vec<Aabb> = capsules.iter().map(Capsule::aabb).collect();
        let bvh = if boxes.is_empty() { None } else { Some(Bvh::build(&boxes)?) };
        Ok(CurveScene { capsules, owners, bvh })
    }

    pub fn capsules(&self) -> &[Capsule] {
        &self.capsules
    }

    pub fn world_aabb(&self) -> Aabb {
        self.bvh.as_ref().map_or(Aabb::empty(), |b| b.root_aabb())
    }

    /// Some entering hit on any capsule; `instance_id` is the owning curve.
    pub fn intersect_any(&self, ray: &Ray) -> Option<Hit> {
        let bvh = self.bvh.as_ref()?;
        let mut found = None;
        let _ = bvh.traverse_ray(&ray.origin, &ray.inv_dir, ray.t_min, ray.t_max, |_, id| {
            match self.capsules[id as usize].ray_entry(ray) {
                Some(t) => {
                    found = Some(Hit {
                        t,
                        primitive_id: id,
                        instance_id: self.owners[id as usize],
                        face_side: None,
                    });
                    ControlFlow::Break(())
                }
                None => ControlFlow::Continue(()),
            }
        });
        found
    }

    pub fn contains_point(&self, p: &Point3) -> bool {
        let Some(bvh) = &self.bvh else {
            return false;
        };
        let q = Aabb::new(*p, *p);
        bvh.traverse_aabb(&q, |_, id| {
            if self.capsules[id as usize].contains(p) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .is_break()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cap() -> Capsule {
        Capsule::new(Point3::origin(), Point3::new(0.0, 0.0, 1.0), 0.1)
    }

    #[test]
    fn perpendicular_hit_and_miss() {
        let c = cap();
        let hit = Ray::new(Point3::new(-1.0, 0.05, 0.5), Vec3::x(), 0.0, 5.0);
        let t = c.ray_entry(&hit).unwrap();
        let expect = 1.0 - (0.01f64 - 0.0025).sqrt();
        assert!((t - expect).abs() < 1e-12);
        let miss = Ray::new(Point3::new(-1.0, 0.101, 0.5), Vec3::x(), 0.0, 5.0);
        assert!(c.ray_entry(&miss).is_none());
    }

    #[test]
    fn caps_and_inside_start() {
        let c = cap();
        let down = Ray::new(Point3::new(0.0, 0.0, 2.0), -Vec3::z(), 0.0, 5.0);
        assert!((c.ray_entry(&down).unwrap() - 0.9).abs() < 1e-12);
        let inside = Ray::new(Point3::new(0.0, 0.0, 0.5), Vec3::x(), 0.0, 5.0);
        assert!(c.ray_entry(&inside).is_none());
        let short = Ray::new(Point3::new(0.0, 0.0, 2.0), -Vec3::z(), 0.0, 0.8);
        assert!(c.ray_entry(&short).is_none());
    }

    #[test]
    fn scene_queries() {
        let s = CurveScene::build(
            vec![cap(), Capsule::new(Point3::new(1.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0), 0.2)],
            vec![0, 7],
        )
        .unwrap();
        assert!(s.contains_point(&Point3::new(1.1, 0.0, 0.0)));
        assert!(!s.contains_point(&Point3::new(0.5, 0.0, 0.0)));
        let h = s.intersect_any(&Ray::new(Point3::new(1.0, -1.0, 0.0), Vec3::y(), 0.0, 2.0)).unwrap();
        assert_eq!(h.instance_id, 7);
        assert!(h.face_side.is_none());
    }
}
