//! Swept-sphere continuous collision detection against a [`CollisionScene`].

use rayon::prelude::*;

use super::curve::{build_curve_scene, CurveKind, SweptSphereCurve};
use super::fit::build_fit_operator;
use crate::dcd::{CollisionScene, CONTAINMENT_DIR};
use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point3};
use crate::kinematics::{forward_kinematics_batch, sphere_centers, Configuration, RobotModel};
use crate::rt::{CurveScene, Ray};

/// One curve per robot sphere (link-major order). Piecewise-linear curves use the `m`
/// waypoint centers directly and ignore `n`; spline kinds fit `n` control points.
pub fn generate_swept_curves(
    trajectory: &[Configuration],
    robot: &RobotModel,
    kind: CurveKind,
    n: usize,
) -> Result<Vec<SweptSphereCurve>> {
    let m = trajectory.len();
    let need = if kind == CurveKind::PiecewiseLinear { 2 } else { n.max(2) };
    if m < need {
        return Err(Error::InvalidArgument(format!(
            "trajectory has {m} waypoints, {kind:?} with n={n} needs at least {need}"
        )));
    }
    let poses = forward_kinematics_batch(robot, trajectory)?;
    let centers = sphere_centers(&poses, robot);
    let radii: Vec<f64> = robot.links().iter().flat_map(|l| l.spheres.iter().map(|s| s.radius)).collect();
    let op = match kind {
        CurveKind::PiecewiseLinear => None,
        k => Some(build_fit_operator(m, n, k.degree())?),
    };
    radii
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            let path: Vec<Point3> = centers.iter().map(|c| c[j].center).collect();
            let control = match &op {
                None => path,
                Some(op) => op.fit(&path)?,
            };
            SweptSphereCurve::new(kind, control, r)
        })
        .collect()
}

/// Detection outcome for one trajectory, with the first reason found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweptHit {
    Clear,
    /// A directed obstacle edge ray entered a swept volume.
    EdgeRay { obstacle: u32 },
    /// An obstacle's interior point lies inside a swept volume.
    ObstacleInside { obstacle: u32 },
    /// A sphere starts inside an obstacle.
    RobotInside { obstacle: u32 },
}

impl SweptHit {
    pub fn is_collision(&self) -> bool {
        *self != SweptHit::Clear
    }
}

/// Tests one set of curves against the scene.
pub fn detect_curves(scene: &CollisionScene, curves: &[SweptSphereCurve]) -> Result<SweptHit> {
    let curve_scene = build_curve_scene(curves)?;
    Ok(detect_curve_scene(scene, &curve_scene, curves))
}

fn detect_curve_scene(scene: &CollisionScene, cs: &CurveScene, curves: &[SweptSphereCurve]) -> SweptHit {
    let bounds = cs.world_aabb();
    for (i, o) in scene.obstacles().iter().enumerate() {
        if !o.aabb.overlaps(&bounds) {
            continue;
        }
        let verts = o.mesh.mesh().vertices();
        for &[a, b] in &o.directed_edges.edges {
            let (pa, pb) = (verts[a as usize], verts[b as usize]);
            if !Aabb::from_points([pa, pb].iter()).overlaps(&bounds) {
                continue;
            }
            if let Some(ray) = Ray::segment(pa, pb) {
                if cs.intersect_any(&ray).is_some() {
                    return SweptHit::EdgeRay { obstacle: i as u32 };
                }
            }
        }
        if cs.contains_point(&o.interior) {
            return SweptHit::ObstacleInside { obstacle: i as u32 };
        }
        for c in curves {
            let p = c.start();
            if o.aabb.contains_point(&p) {
                let (front, back) = o.mesh.count_faces(&Ray::infinite(p, CONTAINMENT_DIR));
                if back > front {
                    return SweptHit::RobotInside { obstacle: i as u32 };
                }
            }
        }
    }
    SweptHit::Clear
}

/// Per-trajectory collision flags. Curve generation and curve BVH builds happen per
/// trajectory, in parallel across trajectories.
pub fn detect_swept(
    trajectories: &[Vec<Configuration>],
    robot: &RobotModel,
    scene: &CollisionScene,
    kind: CurveKind,
    n: usize,
) -> Result<Vec<bool>> {
    Ok(detect_swept_detail(trajectories, robot, scene, kind, n)?
        .into_iter()
        .map(|h| h.is_collision())
        .collect())
}

pub fn detect_swept_detail(
    trajectories: &[Vec<Configuration>],
    robot: &RobotModel,
    scene: &CollisionScene,
    kind: CurveKind,
    n: usize,
) -> Result<Vec<SweptHit>> {
    trajectories
        .par_iter()
        .map(|t| {
            let curves = generate_swept_curves(t, robot, kind, n)?;
            detect_curves(scene, &curves)
        })
        .collect()
}
