use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point3, Vec3};

/// Dense occupancy bitset over a regular grid; voxel `(i, j, k)` covers
/// `origin + h * [i, i+1] x [j, j+1] x [k, k+1]`, bit index `i + nx * (j + ny * k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoxelGrid {
    origin: [u64; 3],
    voxel_size: u64,
    dims: [usize; 3],
    bits: Vec<u64>,
}

// Floats are stored as bit patterns so grids can derive Eq.
impl VoxelGrid {
    pub fn new(origin: Point3, voxel_size: f64, dims: [usize; 3]) -> Result<VoxelGrid> {
        if !(voxel_size > 0.0) || dims.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "voxel grid needs positive size and dimensions (h={voxel_size}, dims={dims:?})"
            )));
        }
        let n = dims[0]
            .checked_mul(dims[1])
            .and_then(|v| v.checked_mul(dims[2]))
            .ok_or_else(|| Error::InvalidArgument(format!("voxel grid {dims:?} too large")))?;
        Ok(VoxelGrid {
            origin: [origin.x.to_bits(), origin.y.to_bits(), origin.z.to_bits()],
            voxel_size: voxel_size.to_bits(),
            dims,
            bits: vec![0; n.div_ceil(64)],
        })
    }

    /// Grid starting at `bounds.min` with enough voxels to cover `bounds`.
    pub fn from_bounds(bounds: &Aabb, voxel_size: f64) -> Result<VoxelGrid> {
        if bounds.is_empty() {
            return Err(Error::InvalidArgument("voxel bounds are empty".into()));
        }
        let e = bounds.extent();
        let dim = |x: f64| ((x / voxel_size - 1e-9).ceil() as usize).max(1);
        VoxelGrid::new(bounds.min, voxel_size, [dim(e.x), dim(e.y), dim(e.z)])
    }

    pub fn origin(&self) -> Point3 {
        Point3::new(
            f64::from_bits(self.origin[0]),
            f64::from_bits(self.origin[1]),
            f64::from_bits(self.origin[2]),
        )
    }

    pub fn voxel_size(&self) -> f64 {
        f64::from_bits(self.voxel_size)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bounds(&self) -> Aabb {
        let o = self.origin();
        let h = self.voxel_size();
        Aabb::new(o, o + Vec3::new(self.dims[0] as f64, self.dims[1] as f64, self.dims[2] as f64) * h)
    }

    pub fn center(&self, i: usize, j: usize, k: usize) -> Point3 {
        let h = self.voxel_size();
        self.origin() + Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * h
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        let b = self.index(i, j, k);
        self.bits[b / 64] >> (b % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize) {
        let b = self.index(i, j, k);
        self.bits[b / 64] |= 1 << (b % 64);
    }

    /// Sets voxels `i_first..=i_last` of row `(j, k)`.
    pub fn set_run(&mut self, j: usize, k: usize, i_first: usize, i_last: usize) {
        let (mut a, b) = (self.index(i_first, j, k), self.index(i_last, j, k) + 1);
        while a < b {
            let w = a / 64;
            let lo = a % 64;
            let hi = (b - w * 64).min(64);
            let mask = if hi - lo == 64 { u64::MAX } else { ((1u64 << (hi - lo)) - 1) << lo };
            self.bits[w] |= mask;
            a = w * 64 + hi;
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn same_layout(&self, other: &VoxelGrid) -> bool {
        self.origin == other.origin && self.voxel_size == other.voxel_size && self.dims == other.dims
    }

    pub fn intersection_count(&self, other: &VoxelGrid) -> u64 {
        self.bits.iter().zip(&other.bits).map(|(a, b)| (a & b).count_ones() as u64).sum()
    }

    pub fn union_with(&mut self, other: &VoxelGrid) -> Result<()> {
        if !self.same_layout(other) {
            return Err(Error::GridMismatch);
        }
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        Ok(())
    }

    /// `true` when every occupied voxel of `self` is occupied in `other`.
    pub fn is_subset_of(&self, other: &VoxelGrid) -> bool {
        self.same_layout(other) && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// Raw little-endian-bit-order words.
    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    pub(crate) fn from_words(origin: Point3, voxel_size: f64, dims: [usize; 3], words: Vec<u64>) -> Result<VoxelGrid> {
        let mut g = VoxelGrid::new(origin, voxel_size, dims)?;
        if words.len() != g.bits.len() {
            return Err(Error::parse("voxel grid", "payload length does not match dimensions"));
        }
        g.bits = words;
        Ok(g)
    }
}
