//! Dense voxel occupancy grids for measuring how well an approximate robot volume
//! (spheres, swept spheres) covers the true mesh volume.
//!
//! Every voxelizer samples voxel centers: a voxel is occupied iff its center lies in
//! the volume.

mod export;
mod grid;

use std::sync::Arc;

use rayon::prelude::*;

pub use export::{read_grid, write_grid, write_summary, GridSummary};
pub use grid::VoxelGrid;

use crate::ccd::{CurveKind, SweptSphereCurve, FLATTEN_TOLERANCE};
use crate::error::{Error, Result};
use crate::geometry::{Aabb, Iso3, Point3, Vec3};
use crate::kinematics::{forward_kinematics_batch, Configuration, RobotModel, Sphere};
use crate::rt::ray::MAX_RETRACES;
use crate::rt::{Capsule, FaceSide, MeshBvh, Ray, ShearedRay};

/// Default margin added around auto-fitted bounds, meters.
pub const DEFAULT_MARGIN: f64 = 0.05;
/// Default voxel edge length, meters.
pub const DEFAULT_RESOLUTION: f64 = 0.002;

/// A row of voxels along x: `(j, k, i_first, i_last)`, inclusive.
type Run = (usize, usize, usize, usize);

/// Voxel index range `[lo, hi]` along one axis whose centers fall in `[a, b]`.
fn center_range(origin: f64, h: f64, n: usize, a: f64, b: f64) -> Option<(usize, usize)> {
    let lo = ((a - origin) / h - 0.5).ceil().max(0.0);
    let hi = ((b - origin) / h - 0.5).floor().min(n as f64 - 1.0);
    (lo <= hi).then_some((lo as usize, hi as usize))
}

/// Inside-intervals along one +x column from sorted `(t, side)` hits, by winding count.
fn column_runs(hits: &mut [(f64, FaceSide)], x0: f64, dir_x: f64, grid: &VoxelGrid, j: usize, k: usize, out: &mut Vec<Run>) {
    hits.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (o, h, n) = (grid.origin().x, grid.voxel_size(), grid.dims()[0]);
    let mut winding = 0i32;
    let mut enter = 0.0;
    for &(t, side) in hits.iter() {
        let before = winding;
        winding += match side {
            FaceSide::Front => 1,
            FaceSide::Back => -1,
        };
        let x = x0 + t * dir_x;
        if before <= 0 && winding > 0 {
            enter = x;
        } else if before > 0 && winding <= 0 {
            if let Some((a, b)) = center_range(o, h, n, enter, x) {
                out.push((j, k, a, b));
            }
        }
    }
}

/// Column-ray voxelization of one posed mesh.
fn mesh_runs(mesh: &MeshBvh, pose: &Iso3, grid: &VoxelGrid) -> Vec<Run> {
    let m = mesh.mesh();
    let world: Vec<Point3> = m.vertices().iter().map(|v| pose * v).collect();
    let wb = Aabb::from_points(world.iter());
    let gb = grid.bounds();
    let (h, d) = (grid.voxel_size(), grid.dims());
    let o = grid.origin();
    let Some((j0, j1)) = center_range(o.y, h, d[1], wb.min.y, wb.max.y) else {
        return Vec::new();
    };
    let Some((k0, k1)) = center_range(o.z, h, d[2], wb.min.z, wb.max.z) else {
        return Vec::new();
    };
    let x0 = wb.min.x.min(gb.min.x) - 1.0;
    let (nj, nk) = (j1 - j0 + 1, k1 - k0 + 1);
    let mut hits: Vec<Vec<(f64, FaceSide)>> = vec![Vec::new(); nj * nk];
    let mut degenerate = vec![false; nj * nk];
    let yc = |j: usize| o.y + (j as f64 + 0.5) * h;
    let zc = |k: usize| o.z + (k as f64 + 0.5) * h;

    for tri in m.triangles() {
        let p = tri.map(|i| world[i as usize]);
        let tb = Aabb::from_points(p.iter());
        let (Some((ja, jb)), Some((ka, kb))) = (
            center_range(o.y, h, d[1], tb.min.y, tb.max.y),
            center_range(o.z, h, d[2], tb.min.z, tb.max.z),
        ) else {
            continue;
        };
        for k in ka.max(k0)..=kb.min(k1) {
            for j in ja.max(j0)..=jb.min(j1) {
                let ray = Ray::infinite(Point3::new(x0, yc(j), zc(k)), Vec3::x());
                if let Some(hit) = ShearedRay::new(&ray).intersect(&p) {
                    let c = (k - k0) * nj + (j - j0);
                    degenerate[c] |= hit.near_boundary();
                    hits[c].push((hit.t, hit.side));
                }
            }
        }
    }

    let inverse = pose.inverse();
    let mut runs = Vec::new();
    for k in k0..=k1 {
        for j in j0..=j1 {
            let c = (k - k0) * nj + (j - j0);
            let base = Ray::infinite(Point3::new(x0, yc(j), zc(k)), Vec3::x());
            let mut dir_x = 1.0;
            if degenerate[c] {
                // re-trace the whole column with a tilted ray in the mesh frame
                for attempt in 1..=MAX_RETRACES {
                    let r = base.jittered(attempt);
                    hits[c].clear();
                    dir_x = r.dir.x;
                    if !mesh.collect_hits(&r.transformed(&inverse), &mut hits[c]) {
                        break;
                    }
                }
            }
            if !hits[c].is_empty() {
                column_runs(&mut hits[c], x0, dir_x, grid, j, k, &mut runs);
            }
        }
    }
    runs
}

fn apply_runs(grid: &mut VoxelGrid, runs: impl IntoIterator<Item = Run>) {
    for (j, k, a, b) in runs {
        grid.set_run(j, k, a, b);
    }
}

/// Voxels whose centers lie inside any of the posed meshes (union).
pub fn voxelize_meshes(meshes: &[(Arc<MeshBvh>, Iso3)], resolution: f64, bounds: &Aabb) -> Result<VoxelGrid> {
    let mut grid = VoxelGrid::from_bounds(bounds, resolution)?;
    voxelize_meshes_into(&mut grid, meshes);
    Ok(grid)
}

/// ORs the posed meshes into an existing grid.
pub fn voxelize_meshes_into(grid: &mut VoxelGrid, meshes: &[(Arc<MeshBvh>, Iso3)]) {
    let runs: Vec<Vec<Run>> = meshes.par_iter().map(|(m, pose)| mesh_runs(m, pose, grid)).collect();
    apply_runs(grid, runs.into_iter().flatten());
}

/// Voxels whose centers lie within some sphere.
pub fn voxelize_spheres(spheres: &[Sphere], resolution: f64, bounds: &Aabb) -> Result<VoxelGrid> {
    let caps: Vec<Capsule> = spheres.iter().map(|s| Capsule::new(s.center, s.center, s.radius)).collect();
    voxelize_capsules(&caps, resolution, bounds)
}

/// Voxels whose centers lie within some capsule.
pub fn voxelize_capsules(capsules: &[Capsule], resolution: f64, bounds: &Aabb) -> Result<VoxelGrid> {
    let mut grid = VoxelGrid::from_bounds(bounds, resolution)?;
    let runs: Vec<Vec<Run>> = capsules.par_iter().map(|c| capsule_runs(c, &grid)).collect();
    apply_runs(&mut grid, runs.into_iter().flatten());
    Ok(grid)
}

fn capsule_runs(c: &Capsule, grid: &VoxelGrid) -> Vec<Run> {
    let (h, d, o) = (grid.voxel_size(), grid.dims(), grid.origin());
    let b = c.aabb();
    let (Some((j0, j1)), Some((k0, k1))) = (
        center_range(o.y, h, d[1], b.min.y, b.max.y),
        center_range(o.z, h, d[2], b.min.z, b.max.z),
    ) else {
        return Vec::new();
    };
    let span = b.max.x - b.min.x + 2.0;
    let mut runs = Vec::new();
    for k in k0..=k1 {
        for j in j0..=j1 {
            let (y, z) = (o.y + (j as f64 + 0.5) * h, o.z + (k as f64 + 0.5) * h);
            let fwd = Ray::new(Point3::new(b.min.x - 1.0, y, z), Vec3::x(), 0.0, span);
            let Some(t_in) = c.ray_entry(&fwd) else {
                continue;
            };
            let back = Ray::new(Point3::new(b.max.x + 1.0, y, z), -Vec3::x(), 0.0, span);
            let Some(t_out) = c.ray_entry(&back) else {
                continue;
            };
            if let Some((a, e)) = center_range(o.x, h, d[0], fwd.origin.x + t_in, back.origin.x - t_out) {
                runs.push((j, k, a, e));
            }
        }
    }
    runs
}

/// Voxels within `radius` of each curve's path (flattened splines).
pub fn voxelize_swept_spheres(curves: &[SweptSphereCurve], resolution: f64, bounds: &Aabb) -> Result<VoxelGrid> {
    let caps: Vec<Capsule> = curves.iter().flat_map(|c| c.capsules(FLATTEN_TOLERANCE)).collect();
    voxelize_capsules(&caps, resolution, bounds)
}

/// ORs the link meshes at every configuration into `grid`.
pub fn voxelize_robot_poses(robot: &RobotModel, configs: &[Configuration], grid: &mut VoxelGrid) -> Result<()> {
    let poses = forward_kinematics_batch(robot, configs)?;
    let mut batch = Vec::with_capacity(64 * robot.link_count());
    for k in 0..poses.configs() {
        for (l, link) in robot.links().iter().enumerate() {
            batch.push((link.mesh.clone(), *poses.get(k, l)));
        }
        if batch.len() >= 64 * robot.link_count() {
            voxelize_meshes_into(grid, &batch);
            batch.clear();
        }
    }
    voxelize_meshes_into(grid, &batch);
    Ok(())
}

/// Ground-truth swept volume: union of the mesh voxelizations at `k` evenly spaced
/// poses along the straight C-space segment through the trajectory waypoints.
pub fn swept_truth_grid(
    robot: &RobotModel,
    trajectory: &[Configuration],
    resolution: f64,
    bounds: &Aabb,
    k: usize,
) -> Result<VoxelGrid> {
    let mut grid = VoxelGrid::from_bounds(bounds, resolution)?;
    voxelize_robot_poses(robot, &dense_poses(trajectory, k)?, &mut grid)?;
    Ok(grid)
}

/// Result of [`swept_truth_converged`].
#[derive(Debug, Clone)]
pub struct TruthGrid {
    pub grid: VoxelGrid,
    /// Pose count of the final grid.
    pub poses: usize,
    /// Relative occupancy change of the last refinement.
    pub last_change: f64,
    pub converged: bool,
}

/// Relative occupancy change below which refinement stops.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-3;

/// Refines the pose spacing by halves, starting at `k` poses (so `k`, `2k-1`, `4k-3`, ...),
/// until occupancy changes by less than [`CONVERGENCE_TOLERANCE`] or the pose count
/// would exceed `k_cap`. Each refinement only voxelizes the new midpoint poses.
pub fn swept_truth_converged(
    robot: &RobotModel,
    trajectory: &[Configuration],
    resolution: f64,
    bounds: &Aabb,
    k: usize,
    k_cap: usize,
) -> Result<TruthGrid> {
    let mut grid = swept_truth_grid(robot, trajectory, resolution, bounds, k)?;
    let mut count = grid.count();
    let mut poses = k;
    let mut last_change = f64::INFINITY;
    while 2 * poses - 1 <= k_cap {
        let finer = dense_poses(trajectory, 2 * poses - 1)?;
        let mids: Vec<Configuration> = finer.into_iter().skip(1).step_by(2).collect();
        voxelize_robot_poses(robot, &mids, &mut grid)?;
        poses = 2 * poses - 1;
        let new_count = grid.count();
        last_change = (new_count - count) as f64 / count.max(1) as f64;
        count = new_count;
        if last_change < CONVERGENCE_TOLERANCE {
            return Ok(TruthGrid {
                grid,
                poses,
                last_change,
                converged: true,
            });
        }
    }
    log::warn!("swept truth grid not converged at {poses} poses: last relative change {last_change:.3e}");
    Ok(TruthGrid {
        grid,
        poses,
        last_change,
        converged: false,
    })
}

/// `k` configurations evenly spaced by arc parameter along the waypoint polyline in C-space.
pub fn dense_poses(trajectory: &[Configuration], k: usize) -> Result<Vec<Configuration>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 poses, got {k}")));
    }
    if trajectory.is_empty() {
        return Err(Error::EmptyInput("trajectory has no waypoints"));
    }
    if trajectory.len() == 1 {
        return Ok(vec![trajectory[0].clone(); k]);
    }
    let segs = trajectory.len() - 1;
    Ok((0..k)
        .map(|i| {
            let s = i as f64 / (k - 1) as f64 * segs as f64;
            let seg = (s.floor() as usize).min(segs - 1);
            let f = s - seg as f64;
            let (a, b) = (&trajectory[seg], &trajectory[seg + 1]);
            if f == 0.0 {
                a.clone()
            } else if f == 1.0 {
                b.clone()
            } else {
                a.iter().zip(b).map(|(&x, &y)| ((1.0 - f) * x + f * y).clamp(x.min(y), x.max(y))).collect()
            }
        })
        .collect())
}

/// Voxelized swept-sphere volume of one trajectory.
pub fn swept_sphere_grid(
    robot: &RobotModel,
    trajectory: &[Configuration],
    kind: CurveKind,
    n: usize,
    resolution: f64,
    bounds: &Aabb,
) -> Result<VoxelGrid> {
    let curves = crate::ccd::generate_swept_curves(trajectory, robot, kind, n)?;
    voxelize_swept_spheres(&curves, resolution, bounds)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CoverageMetrics {
    pub precision: f64,
    pub recall: f64,
    pub true_positive: u64,
    pub approx_total: u64,
    pub truth_total: u64,
}

impl CoverageMetrics {
    /// Metrics from summed counts; empty denominators give 1.
    pub fn from_counts(true_positive: u64, approx_total: u64, truth_total: u64) -> CoverageMetrics {
        let ratio = |a: u64, b: u64| if b == 0 { 1.0 } else { a as f64 / b as f64 };
        CoverageMetrics {
            precision: ratio(true_positive, approx_total),
            recall: ratio(true_positive, truth_total),
            true_positive,
            approx_total,
            truth_total,
        }
    }

    /// Pools counts (volume-weighted aggregation).
    pub fn combine(&self, other: &CoverageMetrics) -> CoverageMetrics {
        CoverageMetrics::from_counts(
            self.true_positive + other.true_positive,
            self.approx_total + other.approx_total,
            self.truth_total + other.truth_total,
        )
    }
}

pub fn coverage(approx: &VoxelGrid, truth: &VoxelGrid) -> Result<CoverageMetrics> {
    if !approx.same_layout(truth) {
        return Err(Error::GridMismatch);
    }
    Ok(CoverageMetrics::from_counts(
        approx.intersection_count(truth),
        approx.count() as u64,
        truth.count() as u64,
    ))
}

/// Bounds enclosing `aabb` plus `margin` on every side.
pub fn fit_bounds(aabb: &Aabb, margin: f64) -> Aabb {
    aabb.inflate(margin)
}

/// World AABB of the robot over a set of configurations (link mesh boxes).
pub fn robot_bounds(robot: &RobotModel, configs: &[Configuration]) -> Result<Aabb> {
    let poses = forward_kinematics_batch(robot, configs)?;
    let mut b = Aabb::empty();
    for k in 0..poses.configs() {
        for (l, link) in robot.links().iter().enumerate() {
            b = b.union(&link.mesh.aabb().transformed(poses.get(k, l)));
            for s in &link.spheres {
                let c = poses.get(k, l) * s.center;
                b = b.union(&Aabb::new(c, c).inflate(s.radius));
            }
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;

    fn bvh(m: crate::mesh::TriangleMesh) -> Arc<MeshBvh> {
        Arc::new(MeshBvh::build(Arc::new(m)).unwrap())
    }

    #[test]
    fn aligned_cube() {
        let b = Aabb::new(Point3::origin(), Point3::new(1.0, 1.0, 1.0));
        let g = voxelize_meshes(&[(bvh(shapes::unit_cube()), Iso3::identity())], 0.1, &b).unwrap();
        assert_eq!(g.dims(), [10, 10, 10]);
        assert_eq!(g.count(), 1000);
        let far = voxelize_meshes(&[(bvh(shapes::unit_cube()), Iso3::translation(5.0, 0.0, 0.0))], 0.1, &b).unwrap();
        assert_eq!(far.count(), 0);
    }

    #[test]
    fn sphere_volumes_agree() {
        let r = 0.1;
        let b = Aabb::new(Point3::from(Vec3::repeat(-0.12)), Point3::from(Vec3::repeat(0.12)));
        let h = 0.004;
        let analytic = voxelize_spheres(&[Sphere::new(Point3::origin(), r)], h, &b).unwrap();
        let v = analytic.count() as f64 * h * h * h;
        let exact = 4.0 / 3.0 * std::f64::consts::PI * r * r * r;
        assert!((v - exact).abs() / exact < 0.02, "{v} vs {exact}");
        let mesh = voxelize_meshes(&[(bvh(shapes::icosphere(r, 5)), Iso3::identity())], h, &b).unwrap();
        let m = coverage(&mesh, &analytic).unwrap();
        assert!(m.recall > 0.98 && m.precision > 0.99, "{m:?}");
    }

    #[test]
    fn coverage_basics() {
        let b = Aabb::new(Point3::from(Vec3::repeat(-1.0)), Point3::from(Vec3::repeat(1.0)));
        let g = voxelize_spheres(&[Sphere::new(Point3::origin(), 0.5)], 0.05, &b).unwrap();
        let m = coverage(&g, &g).unwrap();
        assert_eq!((m.precision, m.recall), (1.0, 1.0));
        let dilated = voxelize_spheres(&[Sphere::new(Point3::origin(), 0.56)], 0.05, &b).unwrap();
        let m = coverage(&dilated, &g).unwrap();
        assert_eq!(m.recall, 1.0);
        assert!(m.precision < 1.0);
        let other = VoxelGrid::from_bounds(&b, 0.1).unwrap();
        assert!(matches!(coverage(&other, &g), Err(Error::GridMismatch)));
        assert_eq!(voxelize_spheres(&[], 0.05, &b).unwrap().count(), 0);
    }

    #[test]
    fn dense_pose_spacing() {
        let t = vec![vec![0.0], vec![1.0], vec![3.0]];
        let p = dense_poses(&t, 5).unwrap();
        assert_eq!(p, vec![vec![0.0], vec![0.5], vec![1.0], vec![2.0], vec![3.0]]);
    }
}
