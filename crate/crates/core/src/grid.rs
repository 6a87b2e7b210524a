//! Dense 3D voxel grids, coordinates and neighborhoods.
//!
//! All grids store voxels in x-fastest linear order:
//! `index = x + nx * (y + ny * z)`. Reads outside the grid are background.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid extent in voxels along x, y and z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl Dims {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::EmptyDims(nx, ny, nz));
        }
        Ok(Dims { nx, ny, nz })
    }

    /// Cube of side `n`.
    pub fn cube(n: usize) -> Result<Self> {
        Self::new(n, n, n)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn slice_len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn contains(&self, v: Voxel) -> bool {
        v.x < self.nx && v.y < self.ny && v.z < self.nz
    }

    #[inline]
    pub fn contains_signed(&self, x: isize, y: isize, z: isize) -> bool {
        x >= 0
            && y >= 0
            && z >= 0
            && (x as usize) < self.nx
            && (y as usize) < self.ny
            && (z as usize) < self.nz
    }

    #[inline]
    pub fn index(&self, v: Voxel) -> usize {
        v.x + self.nx * (v.y + self.ny * v.z)
    }

    #[inline]
    pub fn voxel(&self, index: usize) -> Voxel {
        let x = index % self.nx;
        let rest = index / self.nx;
        Voxel {
            x,
            y: rest % self.ny,
            z: rest / self.ny,
        }
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    /// Dims grown by `margin` voxels on every side.
    pub fn padded(&self, margin: usize) -> Dims {
        Dims {
            nx: self.nx + 2 * margin,
            ny: self.ny + 2 * margin,
            nz: self.nz + 2 * margin,
        }
    }

    fn check(&self, v: Voxel) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                voxel: v,
                dims: *self,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Voxel {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl Voxel {
    pub const fn new(x: usize, y: usize, z: usize) -> Self {
        Voxel { x, y, z }
    }
}

/// Digital adjacency relation between voxels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Connectivity {
    /// Shared face.
    Six,
    /// Shared face or edge.
    Eighteen,
    /// Shared face, edge or corner.
    TwentySix,
}

impl Connectivity {
    /// Largest number of nonzero coordinates an offset may have.
    #[inline]
    fn max_nonzero(self) -> usize {
        match self {
            Connectivity::Six => 1,
            Connectivity::Eighteen => 2,
            Connectivity::TwentySix => 3,
        }
    }

    #[inline]
    pub fn admits(self, dx: isize, dy: isize, dz: isize) -> bool {
        let nonzero = (dx != 0) as usize + (dy != 0) as usize + (dz != 0) as usize;
        nonzero >= 1 && nonzero <= self.max_nonzero()
    }

    pub fn from_count(n: u32) -> Option<Self> {
        match n {
            6 => Some(Connectivity::Six),
            18 => Some(Connectivity::Eighteen),
            26 => Some(Connectivity::TwentySix),
            _ => None,
        }
    }
}

/// The 26 unit offsets in ascending (z, y, x) order.
pub const OFFSETS_26: [(isize, isize, isize); 26] = {
    let mut out = [(0, 0, 0); 26];
    let mut i = 0;
    let mut k = 0;
    while k < 27 {
        let dx = (k % 3) as isize - 1;
        let dy = ((k / 3) % 3) as isize - 1;
        let dz = (k / 9) as isize - 1;
        if k != 13 {
            out[i] = (dx, dy, dz);
            i += 1;
        }
        k += 1;
    }
    out
};

/// In-bounds neighbors of `p`, ordered by ascending (z, y, x) offset.
pub fn neighbors(p: Voxel, dims: Dims, connectivity: Connectivity) -> Result<Vec<Voxel>> {
    dims.check(p)?;
    let (px, py, pz) = (p.x as isize, p.y as isize, p.z as isize);
    Ok(OFFSETS_26
        .iter()
        .filter(|&&(dx, dy, dz)| connectivity.admits(dx, dy, dz))
        .filter(|&&(dx, dy, dz)| dims.contains_signed(px + dx, py + dy, pz + dz))
        .map(|&(dx, dy, dz)| {
            Voxel::new(
                (px + dx) as usize,
                (py + dy) as usize,
                (pz + dz) as usize,
            )
        })
        .collect())
}

/// Packed 3x3x3 occupancy window.
///
/// Bit `(dz + 1) * 9 + (dy + 1) * 3 + (dx + 1)` holds the voxel at offset
/// `(dx, dy, dz)`; the center is bit 13.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Neighborhood(pub u32);

impl Neighborhood {
    pub const CENTER: u32 = 13;
    pub const CENTER_MASK: u32 = 1 << 13;
    pub const FULL: u32 = (1 << 27) - 1;

    #[inline]
    pub const fn bit(dx: isize, dy: isize, dz: isize) -> u32 {
        ((dz + 1) * 9 + (dy + 1) * 3 + (dx + 1)) as u32
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_set(self, dx: isize, dy: isize, dz: isize) -> bool {
        self.0 >> Self::bit(dx, dy, dz) & 1 == 1
    }

    #[inline]
    pub fn center_set(self) -> bool {
        self.0 & Self::CENTER_MASK != 0
    }

    /// Foreground voxels among the 26 neighbors.
    #[inline]
    pub fn neighbor_count(self) -> u32 {
        (self.0 & !Self::CENTER_MASK & Self::FULL).count_ones()
    }
}

/// Binary occupancy grid; every voxel is 0 or 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryVolume {
    dims: Dims,
    spacing: [f64; 3],
    data: Vec<u8>,
}

impl BinaryVolume {
    pub fn zeros(dims: Dims) -> Self {
        BinaryVolume {
            dims,
            spacing: [1.0; 3],
            data: vec![0; dims.len()],
        }
    }

    pub fn ones(dims: Dims) -> Self {
        BinaryVolume {
            dims,
            spacing: [1.0; 3],
            data: vec![1; dims.len()],
        }
    }

    pub fn from_vec(dims: Dims, data: Vec<u8>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|&v| v > 1) {
            return Err(Error::InvalidValue {
                index,
                value: data[index] as f64,
            });
        }
        Ok(BinaryVolume {
            dims,
            spacing: [1.0; 3],
            data,
        })
    }

    /// Builds a volume by evaluating `f` at every voxel.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(Voxel) -> bool) -> Self {
        let data = (0..dims.len()).map(|i| f(dims.voxel(i)) as u8).collect();
        BinaryVolume {
            dims,
            spacing: [1.0; 3],
            data,
        }
    }

    pub fn with_spacing(mut self, spacing: [f64; 3]) -> Self {
        self.spacing = spacing;
        self
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn set_spacing(&mut self, spacing: [f64; 3]) {
        self.spacing = spacing;
    }

    #[inline]
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, v: Voxel) -> bool {
        self.data[self.dims.index(v)] != 0
    }

    /// Signed-coordinate read; anything outside the grid is background.
    #[inline]
    pub fn get_or_zero(&self, x: isize, y: isize, z: isize) -> bool {
        self.dims.contains_signed(x, y, z)
            && self.data[x as usize + self.dims.nx * (y as usize + self.dims.ny * z as usize)] != 0
    }

    #[inline]
    pub fn get_index(&self, index: usize) -> bool {
        self.data[index] != 0
    }

    #[inline]
    pub fn set(&mut self, v: Voxel, value: bool) {
        let i = self.dims.index(v);
        self.data[i] = value as u8;
    }

    #[inline]
    pub fn set_index(&mut self, index: usize, value: bool) {
        self.data[index] = value as u8;
    }

    pub fn count_foreground(&self) -> usize {
        self.data.iter().map(|&v| v as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// Linear indices of foreground voxels, ascending.
    pub fn foreground_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, _)| i)
    }

    pub fn and(&self, other: &BinaryVolume) -> Result<BinaryVolume> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn or(&self, other: &BinaryVolume) -> Result<BinaryVolume> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn not(&self) -> BinaryVolume {
        BinaryVolume {
            dims: self.dims,
            spacing: self.spacing,
            data: self.data.iter().map(|&v| v ^ 1).collect(),
        }
    }

    /// |self ∩ other| without materializing the intersection.
    pub fn intersection_count(&self, other: &BinaryVolume) -> Result<usize> {
        self.ensure_same_dims(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a & b) as usize)
            .sum())
    }

    /// True when every foreground voxel of `self` is foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryVolume) -> bool {
        self.dims == other.dims && self.data.iter().zip(&other.data).all(|(&a, &b)| a <= b)
    }

    pub fn ensure_same_dims(&self, other: &BinaryVolume) -> Result<()> {
        if self.dims == other.dims {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(self.dims, other.dims))
        }
    }

    /// Copy of `self` embedded in a larger zero grid with `margin` voxels on each side.
    pub fn padded(&self, margin: usize) -> BinaryVolume {
        let pd = self.dims.padded(margin);
        let mut out = BinaryVolume::zeros(pd).with_spacing(self.spacing);
        for z in 0..self.dims.nz {
            for y in 0..self.dims.ny {
                let src = self.dims.index(Voxel::new(0, y, z));
                let dst = pd.index(Voxel::new(margin, y + margin, z + margin));
                out.data[dst..dst + self.dims.nx]
                    .copy_from_slice(&self.data[src..src + self.dims.nx]);
            }
        }
        out
    }

    fn zip_with(&self, other: &BinaryVolume, f: impl Fn(u8, u8) -> u8) -> Result<BinaryVolume> {
        self.ensure_same_dims(other)?;
        Ok(BinaryVolume {
            dims: self.dims,
            spacing: self.spacing,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

/// Count of voxels equal to 1.
pub fn count_foreground(vol: &BinaryVolume) -> usize {
    vol.count_foreground()
}

/// The 3x3x3 window around `p`, zero-padded at the grid border.
pub fn extract_neighborhood27(vol: &BinaryVolume, p: Voxel) -> Result<Neighborhood> {
    vol.dims.check(p)?;
    Ok(neighborhood_at(vol, p))
}

/// Unchecked variant of [`extract_neighborhood27`]; `p` must be in bounds.
#[inline]
pub(crate) fn neighborhood_at(vol: &BinaryVolume, p: Voxel) -> Neighborhood {
    let Dims { nx, ny, nz } = vol.dims;
    let data = &vol.data;
    let interior = p.x >= 1 && p.y >= 1 && p.z >= 1 && p.x + 1 < nx && p.y + 1 < ny && p.z + 1 < nz;
    let mut bits = 0u32;
    if interior {
        let sy = nx;
        let sz = nx * ny;
        let base = p.x + nx * (p.y + ny * p.z) - 1 - sy - sz;
        let mut k = 0;
        for dz in 0..3 {
            for dy in 0..3 {
                let row = base + dz * sz + dy * sy;
                bits |= (data[row] as u32) << k;
                bits |= (data[row + 1] as u32) << (k + 1);
                bits |= (data[row + 2] as u32) << (k + 2);
                k += 3;
            }
        }
    } else {
        let (px, py, pz) = (p.x as isize, p.y as isize, p.z as isize);
        let mut k = 0;
        for dz in -1..=1 {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if vol.get_or_zero(px + dx, py + dy, pz + dz) {
                        bits |= 1 << k;
                    }
                    k += 1;
                }
            }
        }
    }
    Neighborhood(bits)
}

/// Real-valued grid with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarVolume {
    dims: Dims,
    spacing: [f64; 3],
    data: Vec<f32>,
}

impl ScalarVolume {
    pub fn zeros(dims: Dims) -> Self {
        ScalarVolume {
            dims,
            spacing: [1.0; 3],
            data: vec![0.0; dims.len()],
        }
    }

    /// Wraps `data`, clamping every value into `[0, 1]` (NaN becomes 0).
    pub fn from_vec(dims: Dims, mut data: Vec<f32>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                actual: data.len(),
            });
        }
        for v in &mut data {
            *v = clamp_unit(*v);
        }
        Ok(ScalarVolume {
            dims,
            spacing: [1.0; 3],
            data,
        })
    }

    pub fn from_binary(vol: &BinaryVolume) -> Self {
        ScalarVolume {
            dims: vol.dims,
            spacing: vol.spacing,
            data: vol.data.iter().map(|&v| v as f32).collect(),
        }
    }

    /// Foreground where the value exceeds 0.5.
    pub fn to_binary(&self) -> BinaryVolume {
        BinaryVolume {
            dims: self.dims,
            spacing: self.spacing,
            data: self.data.iter().map(|&v| (v > 0.5) as u8).collect(),
        }
    }

    pub fn with_spacing(mut self, spacing: [f64; 3]) -> Self {
        self.spacing = spacing;
        self
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, v: Voxel) -> f32 {
        self.data[self.dims.index(v)]
    }

    pub fn set(&mut self, v: Voxel, value: f32) {
        let i = self.dims.index(v);
        self.data[i] = clamp_unit(value);
    }

    /// Crate-internal constructor for data already known to lie in `[0, 1]`.
    pub(crate) fn from_raw_parts(dims: Dims, spacing: [f64; 3], data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), dims.len());
        ScalarVolume {
            dims,
            spacing,
            data,
        }
    }
}

#[inline]
fn clamp_unit(v: f32) -> f32 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}
