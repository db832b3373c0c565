//! Incircle-based penetration bound for swept-sphere edge tracing, and the
//! longest-edge bisection that drives it down.

use std::collections::{HashMap, VecDeque};

use super::TriangleMesh;
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Triangle count at which [`split_triangles`] gives up.
pub const DEFAULT_TRIANGLE_CAP: usize = 4_000_000;

/// Radius of the triangle's inscribed circle (area over semi-perimeter); 0 for slivers.
pub fn inscribed_circle_radius(tri: &[Point3; 3]) -> f64 {
    let [a, b, c] = tri;
    let la = (b - c).norm();
    let lb = (c - a).norm();
    let lc = (a - b).norm();
    let longest = la.max(lb).max(lc);
    let area = 0.5 * (b - a).cross(&(c - a)).norm();
    if longest == 0.0 || area <= 1e-12 * longest * longest {
        return 0.0;
    }
    area / (0.5 * (la + lb + lc))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenetrationBound {
    Bounded(f64),
    /// The sphere's cross-section can fit entirely inside the face.
    Unbounded,
}

impl PenetrationBound {
    pub fn depth(&self) -> f64 {
        match self {
            PenetrationBound::Bounded(d) => *d,
            PenetrationBound::Unbounded => f64::INFINITY,
        }
    }
}

/// Deepest a sphere of radius `sphere_radius` can sink into a face with incircle
/// radius `incircle_radius` without touching the face's edges: `R - sqrt(R^2 - r^2)`.
pub fn max_penetration_bound(sphere_radius: f64, incircle_radius: f64) -> PenetrationBound {
    let (big_r, r) = (sphere_radius, incircle_radius.max(0.0));
    if r >= big_r {
        PenetrationBound::Unbounded
    } else {
        PenetrationBound::Bounded(big_r - (big_r * big_r - r * r).sqrt())
    }
}

/// Largest incircle radius that keeps the penetration of a radius-`sphere_radius`
/// sphere within `depth` (inverse of [`max_penetration_bound`]).
pub fn incircle_for_depth(sphere_radius: f64, depth: f64) -> f64 {
    let d = depth.min(sphere_radius);
    (2.0 * sphere_radius * d - d * d).max(0.0).sqrt()
}

pub fn max_inscribed_radius(mesh: &TriangleMesh) -> f64 {
    (0..mesh.triangles().len())
        .map(|t| inscribed_circle_radius(&mesh.triangle_points(t)))
        .fold(0.0, f64::max)
}

/// Bisects longest edges (both triangles sharing the edge at once) until every
/// triangle's incircle radius is at most `r_max`. New vertices are edge midpoints,
/// so the surface is unchanged.
pub fn split_triangles(mesh: &TriangleMesh, r_max: f64) -> Result<TriangleMesh> {
    split_triangles_capped(mesh, r_max, DEFAULT_TRIANGLE_CAP)
}

pub fn split_triangles_capped(mesh: &TriangleMesh, r_max: f64, cap: usize) -> Result<TriangleMesh> {
    if !(r_max > 0.0) {
        return Err(Error::InvalidArgument(format!("r_max must be positive, got {r_max}")));
    }
    let mut vertices = mesh.vertices().to_vec();
    let mut tris = mesh.triangles().to_vec();
    let radius = |t: &[u32; 3], v: &[Point3]| inscribed_circle_radius(&t.map(|i| v[i as usize]));

    if tris.iter().all(|t| radius(t, &vertices) <= r_max) {
        return Ok(mesh.clone());
    }

    let mut owner: HashMap<(u32, u32), usize> = HashMap::with_capacity(tris.len() * 3);
    for (i, t) in tris.iter().enumerate() {
        for k in 0..3 {
            owner.insert((t[k], t[(k + 1) % 3]), i);
        }
    }
    let mut queue: VecDeque<usize> = (0..tris.len()).collect();

    while let Some(ti) = queue.pop_front() {
        if radius(&tris[ti], &vertices) <= r_max {
            continue;
        }
        if tris.len() + 2 > cap {
            let residual = tris.iter().map(|t| radius(t, &vertices)).fold(0.0, f64::max);
            return Err(Error::RefinementCap { cap, residual });
        }
        // rotate so (u, v) is the longest edge
        let t = tris[ti];
        let len = |k: usize| (vertices[t[(k + 1) % 3] as usize] - vertices[t[k] as usize]).norm_squared();
        let k = (0..3).fold(0, |best, k| if len(k) > len(best) { k } else { best });
        let (u, v, w) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
        let ni = owner[&(v, u)];
        let nt = tris[ni];
        let j = (0..3).find(|&j| nt[j] == v && nt[(j + 1) % 3] == u).expect("twin edge");
        let x = nt[(j + 2) % 3];

        let m = vertices.len() as u32;
        vertices.push(nalgebra::center(&vertices[u as usize], &vertices[v as usize]));

        for (a, b) in [(u, v), (v, w), (w, u), (v, u), (u, x), (x, v)] {
            owner.remove(&(a, b));
        }
        let t2 = tris.len();
        let n2 = t2 + 1;
        tris[ti] = [u, m, w];
        tris.push([m, v, w]);
        tris[ni] = [v, m, x];
        tris.push([m, u, x]);
        for idx in [ti, t2, ni, n2] {
            let tt = tris[idx];
            for k in 0..3 {
                owner.insert((tt[k], tt[(k + 1) % 3]), idx);
            }
            queue.push_back(idx);
        }
    }
    TriangleMesh::new(vertices, tris)
}
