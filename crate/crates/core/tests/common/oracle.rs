//! Brute-force reference implementations, independent of the library.
//!
//! A voxel at (x, y, z) is the closed unit cube [x, x+1] x [y, y+1] x [z, z+1].
//! Cells of the union are stored in doubled coordinates: a cell is the point
//! (2x + a, 2y + b, 2z + c) with a, b, c in {0, 1, 2}; its dimension is the
//! number of odd coordinates.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use skeltop::{BinaryVolume, Dims, Voxel};

pub type Cell = [i64; 3];

pub fn dim_of(c: &Cell) -> usize {
    c.iter().filter(|v| v.rem_euclid(2) == 1).count()
}

/// Every cell of the closed cube of voxel `(x, y, z)`.
pub fn cube_cells(x: i64, y: i64, z: i64) -> impl Iterator<Item = Cell> {
    (0..27).map(move |k| [2 * x + k % 3, 2 * y + (k / 3) % 3, 2 * z + k / 9])
}

pub fn complex_of(vol: &BinaryVolume) -> HashSet<Cell> {
    let d = vol.dims();
    let mut cells = HashSet::new();
    for i in 0..d.len() {
        if vol.get_index(i) {
            let v = d.voxel(i);
            cells.extend(cube_cells(v.x as i64, v.y as i64, v.z as i64));
        }
    }
    cells
}

/// V - E + F - C of a cell set.
pub fn chi_of_cells(cells: &HashSet<Cell>) -> i64 {
    cells
        .iter()
        .map(|c| if dim_of(c).is_multiple_of(2) { 1 } else { -1 })
        .sum()
}

pub fn chi(vol: &BinaryVolume) -> i64 {
    chi_of_cells(&complex_of(vol))
}

/// Faces of codimension one.
fn boundary(c: &Cell) -> Vec<Cell> {
    let mut out = Vec::new();
    for axis in 0..3 {
        if c[axis].rem_euclid(2) == 1 {
            for s in [-1, 1] {
                let mut f = *c;
                f[axis] += s;
                out.push(f);
            }
        }
    }
    out
}

/// Rank over GF(2) of a set of sparse rows given as column indices.
fn gf2_rank(rows: Vec<Vec<usize>>, ncols: usize) -> usize {
    let words = ncols.div_ceil(64).max(1);
    let mut pivots: HashMap<usize, Vec<u64>> = HashMap::new();
    let mut rank = 0;
    for row in rows {
        let mut bits = vec![0u64; words];
        for c in row {
            bits[c / 64] ^= 1 << (c % 64);
        }
        loop {
            let lead = bits
                .iter()
                .enumerate()
                .find(|(_, w)| **w != 0)
                .map(|(i, w)| i * 64 + w.trailing_zeros() as usize);
            let Some(lead) = lead else { break };
            match pivots.get(&lead) {
                Some(p) => {
                    for (b, q) in bits.iter_mut().zip(p) {
                        *b ^= q;
                    }
                }
                None => {
                    pivots.insert(lead, bits);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

/// Mod-2 Betti numbers (b0, b1, b2, b3) of a closed cell complex.
pub fn homology(cells: &HashSet<Cell>) -> [usize; 4] {
    let mut by_dim: [Vec<Cell>; 4] = Default::default();
    for c in cells {
        by_dim[dim_of(c)].push(*c);
    }
    let index: Vec<HashMap<Cell, usize>> = by_dim
        .iter()
        .map(|cs| cs.iter().enumerate().map(|(i, c)| (*c, i)).collect())
        .collect();
    // rank[k] = rank of the boundary map from k-cells to (k-1)-cells
    let mut rank = [0usize; 5];
    for k in 1..4 {
        let rows = by_dim[k]
            .iter()
            .map(|c| {
                boundary(c)
                    .iter()
                    .map(|f| *index[k - 1].get(f).expect("complex is not closed"))
                    .collect()
            })
            .collect();
        rank[k] = gf2_rank(rows, by_dim[k - 1].len());
    }
    let mut b = [0; 4];
    for k in 0..4 {
        b[k] = by_dim[k].len() - rank[k] - rank[k + 1];
    }
    b
}

/// (b0, b1, b2, chi) of a binary volume from its cubical complex.
pub fn betti(vol: &BinaryVolume) -> (usize, usize, usize, i64) {
    let cells = complex_of(vol);
    let h = homology(&cells);
    assert_eq!(h[3], 0);
    (h[0], h[1], h[2], chi_of_cells(&cells))
}

/// Component sizes by breadth-first search, in first-encounter scan order.
pub fn components(vol: &BinaryVolume, max_nonzero: usize) -> Vec<usize> {
    let d = vol.dims();
    let mut seen = vec![false; d.len()];
    let mut sizes = Vec::new();
    for start in 0..d.len() {
        if !vol.get_index(start) || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut size = 0;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let v = d.voxel(i);
            for dz in -1i64..=1 {
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let nz = (dx != 0) as usize + (dy != 0) as usize + (dz != 0) as usize;
                        if nz == 0 || nz > max_nonzero {
                            continue;
                        }
                        let (x, y, z) = (v.x as i64 + dx, v.y as i64 + dy, v.z as i64 + dz);
                        if x < 0 || y < 0 || z < 0 {
                            continue;
                        }
                        let w = Voxel::new(x as usize, y as usize, z as usize);
                        if !d.contains(w) {
                            continue;
                        }
                        let j = d.index(w);
                        if vol.get_index(j) && !seen[j] {
                            seen[j] = true;
                            queue.push_back(j);
                        }
                    }
                }
            }
        }
        sizes.push(size);
    }
    sizes
}

/// 3x3x3 volume from a packed configuration, bit `(dz+1)*9 + (dy+1)*3 + (dx+1)`.
pub fn config_volume(bits: u32) -> BinaryVolume {
    let d = Dims::cube(3).unwrap();
    BinaryVolume::from_fn(d, |v| bits >> (v.z * 9 + v.y * 3 + v.x) & 1 == 1)
}

/// Simple-point test through the attachment set: the center is simple iff
/// the intersection of its cube with the cubes of its foreground neighbors
/// has the homology of a point.
pub fn is_simple(bits: u32) -> bool {
    assert!(bits >> 13 & 1 == 1);
    let mut attach = HashSet::new();
    let own: HashSet<Cell> = cube_cells(1, 1, 1).collect();
    for k in 0..27 {
        if k != 13 && bits >> k & 1 == 1 {
            let (x, y, z) = ((k % 3) as i64, (k / 3 % 3) as i64, (k / 9) as i64);
            attach.extend(cube_cells(x, y, z).filter(|c| own.contains(c)));
        }
    }
    homology(&attach) == [1, 0, 0, 0]
}

/// Whether removing the center leaves the 3x3x3 window's topology intact,
/// padded so the background surrounds it.
pub fn window_betti_unchanged(bits: u32) -> bool {
    let before = betti(&config_volume(bits).padded(1));
    let after = betti(&config_volume(bits & !(1 << 13)).padded(1));
    before == after
}
