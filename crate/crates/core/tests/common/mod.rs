//! Independent reference implementations used as test oracles. None of these share code
//! with the library's ray tracing kernels.
#![allow(dead_code)]

use rtcd::geometry::{Aabb, Iso3, Point3, Vec3};
use rtcd::mesh::TriangleMesh;

/// Möller–Trumbore segment/triangle test, boundaries included.
pub fn segment_hits_triangle(p: &Point3, q: &Point3, tri: &[Point3; 3]) -> bool {
    let d = q - p;
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let pv = d.cross(&e2);
    let det = e1.dot(&pv);
    if det.abs() < 1e-300 {
        return false;
    }
    let inv = 1.0 / det;
    let s = p - tri[0];
    let u = s.dot(&pv) * inv;
    if !(0.0..=1.0).contains(&u) {
        return false;
    }
    let qv = s.cross(&e1);
    let v = d.dot(&qv) * inv;
    if v < 0.0 || u + v > 1.0 {
        return false;
    }
    let t = e2.dot(&qv) * inv;
    (0.0..=1.0).contains(&t)
}

/// Non-coplanar triangle/triangle intersection: some edge of one crosses the other.
pub fn triangles_intersect(a: &[Point3; 3], b: &[Point3; 3]) -> bool {
    (0..3).any(|i| segment_hits_triangle(&a[i], &a[(i + 1) % 3], b))
        || (0..3).any(|i| segment_hits_triangle(&b[i], &b[(i + 1) % 3], a))
}

/// Closest point on a triangle (Voronoi-region walk).
pub fn closest_point_on_triangle(p: &Point3, t: &[Point3; 3]) -> Point3 {
    let (a, b, c) = (t[0], t[1], t[2]);
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

pub fn point_triangle_distance(p: &Point3, t: &[Point3; 3]) -> f64 {
    (p - closest_point_on_triangle(p, t)).norm()
}

/// Distance between segments `p1q1` and `p2q2` (clamped parametric solve).
pub fn segment_segment_distance(p1: &Point3, q1: &Point3, p2: &Point3, q2: &Point3) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let (s, t);
    if a <= 1e-300 && e <= 1e-300 {
        return r.norm();
    }
    if a <= 1e-300 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= 1e-300 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let s0 = if denom > 0.0 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            } else {
                t = t0;
                s = s0;
            }
        }
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

pub fn triangle_distance(a: &[Point3; 3], b: &[Point3; 3]) -> f64 {
    if triangles_intersect(a, b) {
        return 0.0;
    }
    let mut d = f64::INFINITY;
    for i in 0..3 {
        d = d.min(point_triangle_distance(&a[i], b)).min(point_triangle_distance(&b[i], a));
        for j in 0..3 {
            d = d.min(segment_segment_distance(&a[i], &a[(i + 1) % 3], &b[j], &b[(j + 1) % 3]));
        }
    }
    d
}

/// A mesh's triangles in world space.
pub fn world_triangles(mesh: &TriangleMesh, pose: &Iso3) -> Vec<[Point3; 3]> {
    (0..mesh.triangles().len())
        .map(|t| mesh.triangle_points(t).map(|p| pose * p))
        .collect()
}

/// Generalized winding number of a closed triangle soup around `p` (solid angle sum / 4π).
pub fn winding_number(tris: &[[Point3; 3]], p: &Point3) -> f64 {
    let mut total = 0.0;
    for t in tris {
        let a = t[0] - p;
        let b = t[1] - p;
        let c = t[2] - p;
        let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
        let num = a.dot(&b.cross(&c));
        let den = la * lb * lc + a.dot(&b) * lc + b.dot(&c) * la + c.dot(&a) * lb;
        total += 2.0 * num.atan2(den);
    }
    total / (4.0 * std::f64::consts::PI)
}

pub fn inside(tris: &[[Point3; 3]], p: &Point3) -> bool {
    winding_number(tris, p) > 0.5
}

fn box_gap(a: &Aabb, b: &Aabb) -> f64 {
    let gap = (a.min - b.max).sup(&(b.min - a.max)).sup(&Vec3::zeros());
    gap.norm()
}

fn tri_box(t: &[Point3; 3]) -> Aabb {
    Aabb::from_points(t.iter())
}

/// Brute-force solid intersection test: any triangle pair crossing, or one solid
/// containing a vertex of the other.
pub fn solids_collide(a: &[[Point3; 3]], b: &[[Point3; 3]]) -> bool {
    let bb: Vec<Aabb> = b.iter().map(tri_box).collect();
    let b_all = bb.iter().fold(Aabb::empty(), |acc, x| acc.union(x));
    for ta in a {
        let ba = tri_box(ta);
        if !ba.overlaps(&b_all) {
            continue;
        }
        for (tb, bx) in b.iter().zip(&bb) {
            if ba.overlaps(bx) && triangles_intersect(ta, tb) {
                return true;
            }
        }
    }
    inside(b, &a[0][0]) || inside(a, &b[0][0])
}

/// Minimum surface-to-surface distance (0 when the surfaces cross).
pub fn surface_distance(a: &[[Point3; 3]], b: &[[Point3; 3]]) -> f64 {
    let mut best = f64::INFINITY;
    let bb: Vec<Aabb> = b.iter().map(tri_box).collect();
    for ta in a {
        let ba = tri_box(ta);
        for (tb, bx) in b.iter().zip(&bb) {
            if box_gap(&ba, bx) < best {
                best = best.min(triangle_distance(ta, tb));
            }
        }
    }
    best
}

/// Minimum distance from `p` to a triangle soup.
pub fn point_surface_distance(tris: &[[Point3; 3]], p: &Point3) -> f64 {
    tris.iter().map(|t| point_triangle_distance(p, t)).fold(f64::INFINITY, f64::min)
}

/// Whether a sphere overlaps a closed solid.
pub fn sphere_hits_solid(tris: &[[Point3; 3]], bounds: &Aabb, c: &Point3, r: f64) -> bool {
    if bounds.distance_squared(c) > r * r {
        return false;
    }
    let near = tris
        .iter()
        .any(|t| tri_box(t).inflate(r).contains_point(c) && point_triangle_distance(c, t) <= r);
    near || (bounds.contains_point(c) && inside(tris, c))
}

/// Unit directions along the axes and cube diagonals.
pub fn probe_directions() -> Vec<Vec3> {
    let mut v = vec![Vec3::x(), -Vec3::x(), Vec3::y(), -Vec3::y(), Vec3::z(), -Vec3::z()];
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            for sz in [-1.0, 1.0] {
                v.push(Vec3::new(sx, sy, sz).normalize());
            }
        }
    }
    v
}

pub fn translate(tris: &[[Point3; 3]], d: &Vec3) -> Vec<[Point3; 3]> {
    tris.iter().map(|t| t.map(|p| p + d)).collect()
}

/// Whether any triangle pair of the two surfaces comes within `eps`.
pub fn surfaces_within(a: &[[Point3; 3]], b: &[[Point3; 3]], eps: f64) -> bool {
    let bb: Vec<Aabb> = b.iter().map(|t| tri_box(t).inflate(eps)).collect();
    let b_all = bb.iter().fold(Aabb::empty(), |acc, x| acc.union(x));
    a.iter().any(|ta| {
        let ba = tri_box(ta);
        ba.overlaps(&b_all) && b.iter().zip(&bb).any(|(tb, bx)| ba.overlaps(bx) && triangle_distance(ta, tb) <= eps)
    })
}

/// Signed distance from `p` to a closed solid (negative inside).
pub fn signed_distance(tris: &[[Point3; 3]], p: &Point3) -> f64 {
    let d = point_surface_distance(tris, p);
    if inside(tris, p) {
        -d
    } else {
        d
    }
}
