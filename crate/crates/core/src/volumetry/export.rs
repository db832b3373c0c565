//! Binary grid files and JSON occupancy summaries.
//!
//! Binary layout, little endian: magic `RTVX`, format version `u32` (1), origin `3 x f64`,
//! voxel size `f64`, dims `3 x u32`, then occupancy packed LSB-first in bit-index order
//! (`i + nx * (j + ny * k)`), padded to whole bytes.

use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use super::VoxelGrid;
use crate::error::{Error, Result};
use crate::geometry::Point3;

const MAGIC: &[u8; 4] = b"RTVX";
const VERSION: u32 = 1;

pub fn write_grid(grid: &VoxelGrid, path: &Path) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    let o = grid.origin();
    let mut header = Vec::with_capacity(56);
    header.extend_from_slice(MAGIC);
    header.extend_from_slice(&VERSION.to_le_bytes());
    for v in [o.x, o.y, o.z, grid.voxel_size()] {
        header.extend_from_slice(&v.to_le_bytes());
    }
    for d in grid.dims() {
        let d = u32::try_from(d).map_err(|_| Error::InvalidArgument("grid dimension exceeds u32".into()))?;
        header.extend_from_slice(&d.to_le_bytes());
    }
    f.write_all(&header).map_err(io)?;
    let nbytes = grid.len().div_ceil(8);
    let bytes: Vec<u8> = grid.words().iter().flat_map(|w| w.to_le_bytes()).take(nbytes).collect();
    f.write_all(&bytes).map_err(io)?;
    f.flush().map_err(io)
}

pub fn read_grid(path: &Path) -> Result<VoxelGrid> {
    let mut buf = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(path, e))?;
    let bad = |m: &str| Error::parse("voxel grid", m);
    if buf.len() < 52 || &buf[..4] != MAGIC {
        return Err(bad("missing RTVX header"));
    }
    let u32_at = |i: usize| u32::from_le_bytes(buf[i..i + 4].try_into().expect("4 bytes"));
    let f64_at = |i: usize| f64::from_le_bytes(buf[i..i + 8].try_into().expect("8 bytes"));
    if u32_at(4) != VERSION {
        return Err(bad("unsupported version"));
    }
    let origin = Point3::new(f64_at(8), f64_at(16), f64_at(24));
    let h = f64_at(32);
    let dims = [u32_at(40) as usize, u32_at(44) as usize, u32_at(48) as usize];
    let n = dims[0] * dims[1] * dims[2];
    let body = &buf[52..];
    if body.len() != n.div_ceil(8) {
        return Err(bad("payload length does not match dimensions"));
    }
    let words = body
        .chunks(8)
        .map(|c| {
            let mut w = [0u8; 8];
            w[..c.len()].copy_from_slice(c);
            u64::from_le_bytes(w)
        })
        .collect();
    VoxelGrid::from_words(origin, h, dims, words)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSummary {
    pub origin: [f64; 3],
    pub voxel_size: f64,
    pub dims: [usize; 3],
    pub occupied: usize,
    pub occupied_volume: f64,
}

impl GridSummary {
    pub fn of(grid: &VoxelGrid) -> GridSummary {
        let o = grid.origin();
        let h = grid.voxel_size();
        GridSummary {
            origin: [o.x, o.y, o.z],
            voxel_size: h,
            dims: grid.dims(),
            occupied: grid.count(),
            occupied_volume: grid.count() as f64 * h * h * h,
        }
    }
}

pub fn write_summary(grid: &VoxelGrid, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&GridSummary::of(grid)).expect("summary serializes");
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
