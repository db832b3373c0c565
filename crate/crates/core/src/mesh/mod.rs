//! Closed triangle meshes: validation, edge topology, OBBs, refinement.

mod io;
pub mod obb;
pub mod refine;
pub mod shapes;

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Iso3, Point3, Vec3};

pub use io::{load_mesh, parse_obj, parse_stl_binary, write_obj};
pub use obb::{compute_obb, obb_overlap, Obb};
pub use refine::{inscribed_circle_radius, max_penetration_bound, split_triangles, PenetrationBound};

/// An undirected mesh edge with the two triangles sharing it.
///
/// `v[0] < v[1]`. `tris[0]` is the triangle whose winding runs `v[0] -> v[1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub v: [u32; 2],
    pub tris: [u32; 2],
}

/// Watertight, outward-oriented indexed triangle mesh (meters).
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3>,
    triangles: Vec<[u32; 3]>,
    edges: Vec<Edge>,
}

/// Everything wrong with a candidate mesh; empty when the mesh is valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub vertex_count: usize,
    pub triangle_count: usize,
    pub index_out_of_range: Vec<usize>,
    pub repeated_index: Vec<usize>,
    /// Undirected edges used by only one triangle.
    pub boundary_edges: Vec<[u32; 2]>,
    /// Undirected edges used by three or more triangles.
    pub non_manifold_edges: Vec<[u32; 2]>,
    /// Edges whose two triangles traverse them in the same direction.
    pub inconsistent_edges: Vec<[u32; 2]>,
    /// Total signed volume; must be positive for outward normals.
    pub signed_volume: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.index_out_of_range.is_empty()
            && self.repeated_index.is_empty()
            && self.boundary_edges.is_empty()
            && self.non_manifold_edges.is_empty()
            && self.inconsistent_edges.is_empty()
            && self.signed_volume > 0.0
            && self.triangle_count > 0
    }
}

fn write_list<T: fmt::Debug>(f: &mut fmt::Formatter<'_>, key: &str, items: &[T]) -> fmt::Result {
    const SHOWN: usize = 16;
    write!(f, "{key}: {}", items.len())?;
    if !items.is_empty() {
        let head: Vec<_> = items.iter().take(SHOWN).collect();
        write!(f, " {head:?}")?;
        if items.len() > SHOWN {
            write!(f, " ...")?;
        }
    }
    writeln!(f)
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vertices: {}", self.vertex_count)?;
        writeln!(f, "triangles: {}", self.triangle_count)?;
        write_list(f, "index_out_of_range_triangles", &self.index_out_of_range)?;
        write_list(f, "repeated_index_triangles", &self.repeated_index)?;
        write_list(f, "boundary_edges", &self.boundary_edges)?;
        write_list(f, "non_manifold_edges", &self.non_manifold_edges)?;
        write_list(f, "inconsistent_winding_edges", &self.inconsistent_edges)?;
        writeln!(f, "signed_volume: {:.9e}", self.signed_volume)?;
        write!(f, "valid: {}", self.is_valid())
    }
}

fn key(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Validates topology and builds the deduplicated edge list.
fn build_edges(vertices: &[Point3], triangles: &[[u32; 3]]) -> (ValidationReport, Vec<Edge>) {
    let mut report = ValidationReport {
        vertex_count: vertices.len(),
        triangle_count: triangles.len(),
        ..Default::default()
    };
    let nv = vertices.len() as u32;
    // (lo, hi) -> triangles traversing lo->hi, triangles traversing hi->lo
    let mut uses: HashMap<(u32, u32), (Vec<u32>, Vec<u32>)> = HashMap::with_capacity(triangles.len() * 3 / 2);
    for (ti, t) in triangles.iter().enumerate() {
        if t.iter().any(|&i| i >= nv) {
            report.index_out_of_range.push(ti);
            continue;
        }
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            report.repeated_index.push(ti);
            continue;
        }
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let entry = uses.entry(key(a, b)).or_default();
            if a < b {
                entry.0.push(ti as u32);
            } else {
                entry.1.push(ti as u32);
            }
        }
    }
    let mut keys: Vec<_> = uses.keys().copied().collect();
    keys.sort_unstable();
    let mut edges = Vec::with_capacity(keys.len());
    for k in keys {
        let (fwd, bwd) = &uses[&k];
        let e = [k.0, k.1];
        match fwd.len() + bwd.len() {
            1 => report.boundary_edges.push(e),
            2 if fwd.len() == 1 => edges.push(Edge {
                v: e,
                tris: [fwd[0], bwd[0]],
            }),
            2 => report.inconsistent_edges.push(e),
            _ => report.non_manifold_edges.push(e),
        }
    }
    report.signed_volume = signed_volume(vertices, triangles);
    (report, edges)
}

fn signed_volume(vertices: &[Point3], triangles: &[[u32; 3]]) -> f64 {
    let nv = vertices.len() as u32;
    triangles
        .iter()
        .filter(|t| t.iter().all(|&i| i < nv))
        .map(|t| {
            let [a, b, c] = t.map(|i| vertices[i as usize].coords);
            a.dot(&b.cross(&c))
        })
        .sum::<f64>()
        / 6.0
}

impl TriangleMesh {
    /// Validates and builds a mesh. Fails with a report naming every offending edge.
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        let (report, edges) = build_edges(&vertices, &triangles);
        if !report.is_valid() {
            return Err(Error::InvalidMesh(Box::new(report)));
        }
        Ok(Self {
            vertices,
            triangles,
            edges,
        })
    }

    /// Validation report without constructing the mesh.
    pub fn validate(vertices: &[Point3], triangles: &[[u32; 3]]) -> ValidationReport {
        build_edges(vertices, triangles).0
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn triangle_points(&self, t: usize) -> [Point3; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize])
    }

    /// Unnormalized outward normal (twice the area).
    pub fn triangle_normal(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.triangle_points(t);
        (b - a).cross(&(c - a))
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        0.5 * self.triangle_normal(t).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn volume(&self) -> f64 {
        signed_volume(&self.vertices, &self.triangles)
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter())
    }

    pub fn edge_points(&self, e: usize) -> (Point3, Point3) {
        let [a, b] = self.edges[e].v;
        (self.vertices[a as usize], self.vertices[b as usize])
    }

    /// Rigidly transformed copy; topology is reused unchanged.
    pub fn transformed(&self, iso: &Iso3) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.iter().map(|p| iso * p).collect(),
            triangles: self.triangles.clone(),
            edges: self.edges.clone(),
        }
    }

    /// Concatenates closed meshes into one multi-shell mesh.
    pub fn merge(meshes: &[&TriangleMesh]) -> Result<TriangleMesh> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for m in meshes {
            let off = vertices.len() as u32;
            vertices.extend_from_slice(&m.vertices);
            triangles.extend(m.triangles.iter().map(|t| t.map(|i| i + off)));
        }
        TriangleMesh::new(vertices, triangles)
    }
}
