//! Bottom-level structure: one triangle mesh with its BVH, shared by every instance.

use std::ops::ControlFlow;
use std::sync::Arc;

use super::bvh::Bvh;
use super::ray::{FaceSide, Ray, MAX_RETRACES};
use super::triangle::{ShearedRay, TriangleHit};
use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point3, Vec3};
use crate::mesh::TriangleMesh;

#[derive(Debug)]
pub struct MeshBvh {
    mesh: Arc<TriangleMesh>,
    bvh: Bvh,
    /// Triangle corners in BVH leaf order.
    tris: Vec<[Point3; 3]>,
}

/// Outcome of an any-hit query on one mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalHit {
    Clean(u32, TriangleHit),
    /// Only hits within the degenerate tolerance were found.
    Degenerate(u32, TriangleHit),
    Miss,
}

impl MeshBvh {
    pub fn build(mesh: Arc<TriangleMesh>) -> Result<MeshBvh> {
        let boxes: Vec<Aabb> = (0..mesh.triangles().len())
            .map(|t| Aabb::from_points(mesh.triangle_points(t).iter()))
            .collect();
        let bvh = Bvh::build(&boxes)?;
        let tris = bvh.order().iter().map(|&t| mesh.triangle_points(t as usize)).collect();
        Ok(MeshBvh { mesh, bvh, tris })
    }

    pub fn mesh(&self) -> &Arc<TriangleMesh> {
        &self.mesh
    }

    pub fn bvh(&self) -> &Bvh {
        &self.bvh
    }

    pub fn aabb(&self) -> Aabb {
        self.bvh.root_aabb()
    }

    /// Any-hit in the mesh's own frame, without re-tracing.
    #[inline]
    pub fn any_hit(&self, ray: &Ray) -> LocalHit {
        // Most instance candidates miss the tight local box; skip the shear setup for them.
        if self.bvh.root_aabb().ray_entry(&ray.origin, &ray.inv_dir, ray.t_min, ray.t_max).is_none() {
            return LocalHit::Miss;
        }
        let sr = ShearedRay::new(ray);
        let mut degenerate = LocalHit::Miss;
        let _ = self.bvh.traverse_ray(&ray.origin, &ray.inv_dir, ray.t_min, ray.t_max, |pos, prim| {
            if let Some(h) = sr.intersect(&self.tris[pos]) {
                if h.near_boundary() || ray.near_end(h.t) {
                    degenerate = LocalHit::Degenerate(prim, h);
                } else {
                    degenerate = LocalHit::Clean(prim, h);
                    return ControlFlow::Break(());
                }
            }
            ControlFlow::Continue(())
        });
        degenerate
    }

    /// Any-hit with the jittered re-trace policy; a hit that stays degenerate after
    /// every re-trace is reported (surface contact counts as touching).
    pub fn any_hit_retraced(&self, ray: &Ray) -> Option<(u32, TriangleHit)> {
        let mut attempt = 0;
        let mut r = *ray;
        loop {
            match self.any_hit(&r) {
                LocalHit::Clean(p, h) => return Some((p, h)),
                LocalHit::Miss => return None,
                LocalHit::Degenerate(p, h) => {
                    if attempt == MAX_RETRACES {
                        return Some((p, h));
                    }
                    attempt += 1;
                    r = ray.jittered(attempt);
                }
            }
        }
    }

    /// Front/back face counts along the ray plus whether any hit was degenerate.
    pub fn count_faces_once(&self, ray: &Ray) -> (u32, u32, bool) {
        let sr = ShearedRay::new(ray);
        let (mut front, mut back, mut degenerate) = (0, 0, false);
        let _ = self.bvh.traverse_ray(&ray.origin, &ray.inv_dir, ray.t_min, ray.t_max, |pos, _| {
            if let Some(h) = sr.intersect(&self.tris[pos]) {
                degenerate |= h.near_boundary() || ray.near_end(h.t);
                match h.side {
                    FaceSide::Front => front += 1,
                    FaceSide::Back => back += 1,
                }
            }
            ControlFlow::Continue(())
        });
        (front, back, degenerate)
    }

    /// Appends every intersection `(t, side)` along the ray; returns whether any was degenerate.
    pub fn collect_hits(&self, ray: &Ray, out: &mut Vec<(f64, FaceSide)>) -> bool {
        let sr = ShearedRay::new(ray);
        let mut degenerate = false;
        let _ = self.bvh.traverse_ray(&ray.origin, &ray.inv_dir, ray.t_min, ray.t_max, |pos, _| {
            if let Some(h) = sr.intersect(&self.tris[pos]) {
                degenerate |= h.near_boundary() || ray.near_end(h.t);
                out.push((h.t, h.side));
            }
            ControlFlow::Continue(())
        });
        degenerate
    }

    /// Front/back face counts with the whole ray re-traced while any hit is degenerate.
    pub fn count_faces(&self, ray: &Ray) -> (u32, u32) {
        let mut r = *ray;
        for attempt in 1..=MAX_RETRACES + 1 {
            let (f, b, degenerate) = self.count_faces_once(&r);
            if !degenerate || attempt > MAX_RETRACES {
                return (f, b);
            }
            r = ray.jittered(attempt);
        }
        unreachable!()
    }

    /// Parity containment test along +x.
    pub fn contains_point(&self, p: &Point3) -> bool {
        let (front, back) = self.count_faces(&Ray::infinite(*p, Vec3::x()));
        back > front
    }

    /// A point strictly inside the mesh: from a triangle centroid, cast inward along the
    /// negated normal and take the midpoint to the first hit; the candidate must pass the
    /// parity test. Larger triangles are tried first.
    pub fn interior_point(&self) -> Result<Point3> {
        let mesh = &self.mesh;
        let mut order: Vec<usize> = (0..mesh.triangles().len()).collect();
        order.sort_by(|&a, &b| mesh.triangle_area(b).total_cmp(&mesh.triangle_area(a)).then(a.cmp(&b)));
        for &t in order.iter().take(64) {
            let n = mesh.triangle_normal(t);
            if n.norm() == 0.0 {
                continue;
            }
            let [a, b, c] = mesh.triangle_points(t);
            let centroid = Point3::from((a.coords + b.coords + c.coords) / 3.0);
            let ray = Ray::infinite(centroid, -n);
            let Some(t_hit) = self.nearest_hit_excluding(&ray, t) else {
                continue;
            };
            let p = ray.at(0.5 * t_hit);
            if self.contains_point(&p) {
                return Ok(p);
            }
        }
        Err(Error::InteriorPoint {
            triangles: mesh.triangles().len(),
        })
    }

    /// Nearest hit parameter ignoring triangle `skip` and hits at t ≈ 0.
    fn nearest_hit_excluding(&self, ray: &Ray, skip: usize) -> Option<f64> {
        let sr = ShearedRay::new(ray);
        let mut best: Option<f64> = None;
        let _ = self.bvh.traverse_ray(&ray.origin, &ray.inv_dir, ray.t_min, ray.t_max, |pos, prim| {
            if prim as usize != skip {
                if let Some(h) = sr.intersect(&self.tris[pos]) {
                    if h.t > 1e-9 && best.is_none_or(|b| h.t < b) {
                        best = Some(h.t);
                    }
                }
            }
            ControlFlow::Continue(())
        });
        best
    }
}
