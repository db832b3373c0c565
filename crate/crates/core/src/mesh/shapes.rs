//! Procedural closed meshes used by the demo assets and the test suites.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use super::TriangleMesh;
use crate::geometry::{Point3, Vec3};

fn finish(vertices: Vec<Point3>, mut triangles: Vec<[u32; 3]>) -> TriangleMesh {
    let vol: f64 = triangles
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|i| vertices[i as usize].coords);
            a.dot(&b.cross(&c))
        })
        .sum();
    if vol < 0.0 {
        for t in &mut triangles {
            t.swap(1, 2);
        }
    }
    TriangleMesh::new(vertices, triangles).expect("procedural mesh is closed")
}

/// Axis-aligned unit cube `[0, 1]^3`, 8 vertices and 12 triangles.
pub fn unit_cube() -> TriangleMesh {
    cuboid(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 1.0, 1.0), [1, 1, 1])
}

/// Axis-aligned box between `min` and `max`, with `divisions` grid cells per axis on each face.
pub fn cuboid(min: Point3, max: Point3, divisions: [usize; 3]) -> TriangleMesh {
    let n = divisions.map(|d| d.max(1));
    let mut index: HashMap<[usize; 3], u32> = HashMap::new();
    let mut vertices = Vec::new();
    let mut vid = |g: [usize; 3], vertices: &mut Vec<Point3>| -> u32 {
        *index.entry(g).or_insert_with(|| {
            let p = Point3::from(std::array::from_fn::<f64, 3, _>(|i| {
                min[i] + (max[i] - min[i]) * g[i] as f64 / n[i] as f64
            }));
            vertices.push(p);
            (vertices.len() - 1) as u32
        })
    };
    let mut triangles = Vec::new();
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in [0, n[axis]] {
            let outward = if side == 0 { -1.0 } else { 1.0 };
            for i in 0..n[u] {
                for j in 0..n[v] {
                    let mut g = [[0usize; 3]; 4];
                    for (k, (di, dj)) in [(0, 0), (1, 0), (1, 1), (0, 1)].into_iter().enumerate() {
                        g[k][axis] = side;
                        g[k][u] = i + di;
                        g[k][v] = j + dj;
                    }
                    let q = g.map(|gg| vid(gg, &mut vertices));
                    let mut t1 = [q[0], q[1], q[2]];
                    let mut t2 = [q[0], q[2], q[3]];
                    let [a, b, c] = t1.map(|i| vertices[i as usize]);
                    let nrm = (b - a).cross(&(c - a));
                    if nrm[axis] * outward < 0.0 {
                        t1.swap(1, 2);
                        t2.swap(1, 2);
                    }
                    triangles.push(t1);
                    triangles.push(t2);
                }
            }
        }
    }
    finish(vertices, triangles)
}

/// Box centred at the origin with the given half extents.
pub fn centered_box(half: Vec3, divisions: [usize; 3]) -> TriangleMesh {
    cuboid(Point3::from(-half), Point3::from(half), divisions)
}

/// Regular tetrahedron inscribed in the cube `[-s, s]^3`.
pub fn tetrahedron(s: f64) -> TriangleMesh {
    let v = vec![
        Point3::new(s, s, s),
        Point3::new(s, -s, -s),
        Point3::new(-s, s, -s),
        Point3::new(-s, -s, s),
    ];
    finish(v, vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])
}

/// Geodesic sphere from a subdivided icosahedron (`20 * 4^subdivisions` triangles).
pub fn icosphere(radius: f64, subdivisions: u32) -> TriangleMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid: HashMap<(u32, u32), u32> = HashMap::new();
        let mut midpoint = |a: u32, b: u32, verts: &mut Vec<Vec3>| -> u32 {
            let k = (a.min(b), a.max(b));
            *mid.entry(k).or_insert_with(|| {
                verts.push(((verts[a as usize] + verts[b as usize]) * 0.5).normalize());
                (verts.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let vertices = verts.into_iter().map(|v| Point3::from(v * radius)).collect();
    finish(vertices, faces)
}

/// Surface of revolution about +z. `profile` lists `(z, rho)` from bottom to top;
/// a `rho` of zero at either end closes that end with a pole.
pub fn lathe(profile: &[(f64, f64)], segments: usize) -> TriangleMesh {
    assert!(profile.len() >= 2 && segments >= 3);
    let mut vertices = Vec::new();
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for &(z, rho) in profile {
        if rho == 0.0 {
            vertices.push(Point3::new(0.0, 0.0, z));
            rows.push(vec![(vertices.len() - 1) as u32]);
        } else {
            let row = (0..segments)
                .map(|s| {
                    let a = TAU * s as f64 / segments as f64;
                    vertices.push(Point3::new(rho * a.cos(), rho * a.sin(), z));
                    (vertices.len() - 1) as u32
                })
                .collect();
            rows.push(row);
        }
    }
    let mut triangles = Vec::new();
    for w in rows.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        for s in 0..segments {
            let s1 = (s + 1) % segments;
            match (lo.len(), hi.len()) {
                (1, 1) => panic!("adjacent poles"),
                (1, _) => triangles.push([lo[0], hi[s1], hi[s]]),
                (_, 1) => triangles.push([lo[s], lo[s1], hi[0]]),
                _ => {
                    triangles.push([lo[s], lo[s1], hi[s1]]);
                    triangles.push([lo[s], hi[s1], hi[s]]);
                }
            }
        }
    }
    finish(vertices, triangles)
}

/// Capsule around the segment `z ∈ [0, length]`.
pub fn capsule(radius: f64, length: f64, segments: usize, cap_rings: usize) -> TriangleMesh {
    let rings = cap_rings.max(1);
    let mut profile = vec![(-radius, 0.0)];
    for i in 1..=rings {
        let a = -PI / 2.0 + (PI / 2.0) * i as f64 / rings as f64;
        profile.push((radius * a.sin(), radius * a.cos()));
    }
    for i in 0..rings {
        let a = (PI / 2.0) * i as f64 / rings as f64;
        profile.push((length + radius * a.sin(), radius * a.cos()));
    }
    profile.push((length + radius, 0.0));
    lathe(&profile, segments)
}

/// Closed cylinder (n-gon prism) along `z ∈ [0, length]`.
pub fn cylinder(radius: f64, length: f64, segments: usize) -> TriangleMesh {
    lathe(
        &[(0.0, 0.0), (0.0, radius), (length, radius), (length, 0.0)],
        segments,
    )
}

pub fn uv_sphere(radius: f64, segments: usize, rings: usize) -> TriangleMesh {
    let mut profile = vec![(-radius, 0.0)];
    for i in 1..rings {
        let a = -PI / 2.0 + PI * i as f64 / rings as f64;
        profile.push((radius * a.sin(), radius * a.cos()));
    }
    profile.push((radius, 0.0));
    lathe(&profile, segments)
}

/// Torus in the xy-plane: `major` ring radius, `minor` tube radius.
pub fn torus(major: f64, minor: f64, major_segments: usize, minor_segments: usize) -> TriangleMesh {
    let (nu, nv) = (major_segments, minor_segments);
    let mut vertices = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = TAU * i as f64 / nu as f64;
        for j in 0..nv {
            let v = TAU * j as f64 / nv as f64;
            let r = major + minor * v.cos();
            vertices.push(Point3::new(r * u.cos(), r * u.sin(), minor * v.sin()));
        }
    }
    let id = |i: usize, j: usize| ((i % nu) * nv + (j % nv)) as u32;
    let mut triangles = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    finish(vertices, triangles)
}
