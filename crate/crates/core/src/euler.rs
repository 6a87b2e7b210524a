//! Octant lookup tables for the Euler characteristic of closed-cube unions.
//!
//! A foreground voxel is treated as a closed unit cube, so voxels touching at
//! a corner are connected (26-adjacency) and the background connects through
//! faces only (6-adjacency). Each lattice vertex of the grid is shared by a
//! 2x2x2 window of voxels; the cells incident to the vertex are weighted by
//! the reciprocal of the number of vertices they touch (edges 1/2, faces 1/4,
//! cubes 1/8). Summing the weighted contributions of all vertices gives the
//! exact Euler characteristic. The tables store eight times the contribution
//! so that every entry is an integer.
//!
//! Window bit `a + 2b + 4c` addresses the voxel on the positive (`1`) or
//! negative (`0`) side of the vertex along x, y and z.

use std::sync::OnceLock;

use crate::grid::{BinaryVolume, Dims, Neighborhood};
use crate::par::{sum_i64, Execution};

/// Eight times the Euler contribution of one lattice vertex.
pub fn vertex_table() -> &'static [i8; 256] {
    static TABLE: OnceLock<[i8; 256]> = OnceLock::new();
    TABLE.get_or_init(build_vertex_table)
}

/// `8 * (chi(with center) - chi(without center))` for one octant of a 3x3x3
/// window, where bit 0 is the center voxel.
///
/// Summed over the 8 octants around a voxel, the entries give eight times
/// the change of the Euler characteristic caused by deleting that voxel.
pub fn octant_delta_table() -> &'static [i8; 256] {
    static TABLE: OnceLock<[i8; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let v = vertex_table();
        let mut t = [0i8; 256];
        for (p, e) in t.iter_mut().enumerate() {
            *e = v[p | 1] - v[p & !1];
        }
        t
    })
}

fn build_vertex_table() -> [i8; 256] {
    let mut table = [0i8; 256];
    for (pattern, entry) in table.iter_mut().enumerate() {
        let cube = |a: usize, b: usize, c: usize| pattern >> (a + 2 * b + 4 * c) & 1 == 1;
        let vertex = pattern != 0;

        // Edges: one per axis direction and side; shared by the 4 cubes on that side.
        let mut edges = 0i32;
        for axis in 0..3 {
            for side in 0..2 {
                let mut present = false;
                for u in 0..2 {
                    for w in 0..2 {
                        let mut idx = [0usize; 3];
                        idx[axis] = side;
                        idx[(axis + 1) % 3] = u;
                        idx[(axis + 2) % 3] = w;
                        present |= cube(idx[0], idx[1], idx[2]);
                    }
                }
                edges += present as i32;
            }
        }

        // Faces: one per normal axis and quadrant of the other two; shared by 2 cubes.
        let mut faces = 0i32;
        for normal in 0..3 {
            for u in 0..2 {
                for w in 0..2 {
                    let mut present = false;
                    for side in 0..2 {
                        let mut idx = [0usize; 3];
                        idx[normal] = side;
                        idx[(normal + 1) % 3] = u;
                        idx[(normal + 2) % 3] = w;
                        present |= cube(idx[0], idx[1], idx[2]);
                    }
                    faces += present as i32;
                }
            }
        }

        let cubes = pattern.count_ones() as i32;
        *entry = (8 * vertex as i32 - 4 * edges + 2 * faces - cubes) as i8;
    }
    table
}

/// Gathers from one 9-bit plane of a 3x3x3 window into the low nibble of an
/// octant pattern, one table per (x, y) quadrant. Octant window bits `a + 2b`
/// come from the center plane and bits `4 + a + 2b` from the plane above or
/// below, so a pattern is `g[center] | g[other] << 4`.
const QUADRANT_GATHER: [[u8; 512]; 4] = {
    let mut out = [[0u8; 512]; 4];
    let mut q = 0;
    while q < 4 {
        let sx: isize = if q & 1 == 0 { -1 } else { 1 };
        let sy: isize = if q & 2 == 0 { -1 } else { 1 };
        let mut plane = 0;
        while plane < 512 {
            let mut nibble = 0u8;
            let mut k = 0;
            while k < 4 {
                let dx = if k & 1 == 0 { 0 } else { sx };
                let dy = if k & 2 == 0 { 0 } else { sy };
                let bit = ((dy + 1) * 3 + (dx + 1)) as usize;
                if plane >> bit & 1 == 1 {
                    nibble |= 1 << k;
                }
                k += 1;
            }
            out[q][plane] = nibble;
            plane += 1;
        }
        q += 1;
    }
    out
};

/// Eight times the drop in Euler characteristic when the center is deleted.
#[inline]
pub fn euler_delta8(config: Neighborhood) -> i32 {
    let table = octant_delta_table();
    let bits = config.bits() | Neighborhood::CENTER_MASK;
    let (below, center, above) = (
        (bits & 511) as usize,
        (bits >> 9 & 511) as usize,
        (bits >> 18 & 511) as usize,
    );
    let mut sum = 0;
    for g in &QUADRANT_GATHER {
        let mid = g[center] as usize;
        sum += table[mid | (g[below] as usize) << 4] as i32;
        sum += table[mid | (g[above] as usize) << 4] as i32;
    }
    sum
}

/// Euler characteristic of the closed-cube union, accumulated per lattice vertex.
pub fn euler_characteristic_lut(vol: &BinaryVolume) -> i64 {
    euler_characteristic_lut_with(vol, Execution::default())
}

pub fn euler_characteristic_lut_with(vol: &BinaryVolume, exec: Execution) -> i64 {
    let Dims { nx, ny, nz } = vol.dims();
    let table = vertex_table();
    let data = vol.data();
    let at = |x: usize, y: usize, z: usize| -> usize {
        // Vertex (x, y, z) sits at the low corner of voxel (x, y, z).
        if x < nx && y < ny && z < nz {
            data[x + nx * (y + ny * z)] as usize
        } else {
            0
        }
    };
    let total8 = sum_i64(exec, nz + 1, |z| {
        let mut acc = 0i64;
        for y in 0..=ny {
            for x in 0..=nx {
                let get = |a: usize, b: usize, c: usize| -> usize {
                    // a = 0 is the voxel on the negative side of the vertex.
                    let (xx, yy, zz) = (x + a, y + b, z + c);
                    if xx == 0 || yy == 0 || zz == 0 {
                        0
                    } else {
                        at(xx - 1, yy - 1, zz - 1)
                    }
                };
                let mut p = 0usize;
                for c in 0..2 {
                    for b in 0..2 {
                        for a in 0..2 {
                            p |= get(a, b, c) << (a + 2 * b + 4 * c);
                        }
                    }
                }
                if p != 0 {
                    acc += table[p] as i64;
                }
            }
        }
        acc
    });
    debug_assert_eq!(total8 % 8, 0);
    total8 / 8
}
