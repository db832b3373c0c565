//! Wavefront-style `v`/`f` text meshes and binary STL.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::TriangleMesh;
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Loads a mesh by extension: `.stl` is read as binary STL, anything else as `v`/`f` text.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let is_stl = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("stl"));
    if is_stl {
        parse_stl_binary(&bytes)
    } else {
        let text = std::str::from_utf8(&bytes)
            .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        parse_obj(text)
    }
}

/// Parses `v x y z` / `f a b c ...` records; polygons are fan-triangulated.
/// Face tokens may carry `/vt/vn` suffixes and negative (relative) indices.
pub fn parse_obj(text: &str) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut it = line.split_whitespace();
        let err = |m: &str| Error::parse(format!("obj line {}", lineno + 1), m.to_string());
        match it.next() {
            Some("v") => {
                let mut c = [0.0; 3];
                for slot in &mut c {
                    *slot = it
                        .next()
                        .ok_or_else(|| err("vertex needs 3 coordinates"))?
                        .parse()
                        .map_err(|_| err("bad vertex coordinate"))?;
                }
                vertices.push(Point3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let mut idx = Vec::with_capacity(4);
                for tok in it {
                    let first = tok.split('/').next().unwrap_or("");
                    let i: i64 = first.parse().map_err(|_| err("bad face index"))?;
                    let resolved = match i {
                        i if i > 0 => i - 1,
                        i if i < 0 => vertices.len() as i64 + i,
                        _ => return Err(err("face index 0 is invalid")),
                    };
                    if resolved < 0 || resolved >= vertices.len() as i64 {
                        return Err(err("face index out of range"));
                    }
                    idx.push(resolved as u32);
                }
                if idx.len() < 3 {
                    return Err(err("face needs at least 3 vertices"));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    if triangles.is_empty() {
        return Err(Error::EmptyInput("mesh file has no faces"));
    }
    TriangleMesh::new(vertices, triangles)
}

/// Binary STL: 80-byte header, u32 count, then 50-byte facet records.
/// Vertices with bit-identical coordinates are welded.
pub fn parse_stl_binary(bytes: &[u8]) -> Result<TriangleMesh> {
    let err = |m: &str| Error::parse("binary stl", m.to_string());
    if bytes.len() < 84 {
        return Err(err("file shorter than header"));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    if bytes.len() < 84 + count * 50 {
        return Err(err("truncated facet records"));
    }
    let mut welded: HashMap<[u32; 3], u32> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::with_capacity(count);
    for f in 0..count {
        let rec = &bytes[84 + f * 50..84 + (f + 1) * 50];
        let mut tri = [0u32; 3];
        for (k, slot) in tri.iter_mut().enumerate() {
            let off = 12 + k * 12;
            let bits: [u32; 3] = std::array::from_fn(|c| {
                u32::from_le_bytes(rec[off + c * 4..off + c * 4 + 4].try_into().unwrap())
            });
            *slot = *welded.entry(bits).or_insert_with(|| {
                let p = bits.map(|b| f32::from_bits(b) as f64);
                vertices.push(Point3::new(p[0], p[1], p[2]));
                (vertices.len() - 1) as u32
            });
        }
        triangles.push(tri);
    }
    if triangles.is_empty() {
        return Err(Error::EmptyInput("stl has no facets"));
    }
    TriangleMesh::new(vertices, triangles)
}

pub fn write_obj(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for v in mesh.vertices() {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    let path = path.as_ref();
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;

    const CUBE_OBJ: &str = "\
# unit cube
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 4 3 2
f 5 6 7 8
f 1 2 6 5
f 2 3 7 6
f 3 4 8 7
f 4 1 5 8
";

    #[test]
    fn quads_are_triangulated() {
        let m = parse_obj(CUBE_OBJ).unwrap();
        assert_eq!(m.triangles().len(), 12);
        assert_eq!(m.edges().len(), 18);
    }

    #[test]
    fn slash_and_negative_indices() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n\
                    f 1/1/1 3/1/1 2/1/1\nf -4 -3 -1\nf 1 4 3\nf 2 3 4\n";
        let m = parse_obj(text).unwrap();
        assert_eq!(m.edges().len(), 6);
    }

    #[test]
    fn open_surface_reports_offending_edges() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3\nf 1 3 4\n";
        let e = parse_obj(text).unwrap_err().to_string();
        assert!(e.contains("boundary_edges: 4"), "{e}");
    }

    #[test]
    fn stl_roundtrip_welds_vertices() {
        let cube = shapes::unit_cube();
        let mut bytes = vec![0u8; 80];
        bytes.extend_from_slice(&(cube.triangles().len() as u32).to_le_bytes());
        for t in 0..cube.triangles().len() {
            bytes.extend_from_slice(&[0u8; 12]);
            for p in cube.triangle_points(t) {
                for c in [p.x, p.y, p.z] {
                    bytes.extend_from_slice(&(c as f32).to_le_bytes());
                }
            }
            bytes.extend_from_slice(&[0u8; 2]);
        }
        let m = parse_stl_binary(&bytes).unwrap();
        assert_eq!(m.vertices().len(), 8);
        assert_eq!(m.edges().len(), 18);
    }

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ico.obj");
        let ico = shapes::icosphere(0.5, 2);
        write_obj(&ico, &p).unwrap();
        let back = load_mesh(&p).unwrap();
        assert_eq!(back, ico);
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_mesh("/nonexistent/x.obj"), Err(Error::Io { .. })));
    }
}
