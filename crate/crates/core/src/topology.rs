//! Connected components, Euler characteristic and Betti numbers of binary
//! volumes under the (26, 6) adjacency pair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::euler_characteristic_lut_with;
use crate::grid::{BinaryVolume, Connectivity, Dims, Voxel, OFFSETS_26};
use crate::par::{sum_i64, Execution};

/// Betti numbers of a 3D binary object and its Euler characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BettiTriple {
    pub b0: usize,
    pub b1: usize,
    pub b2: usize,
    pub chi: i64,
}

impl BettiTriple {
    pub const EMPTY: BettiTriple = BettiTriple::new(0, 0, 0);

    pub const fn new(b0: usize, b1: usize, b2: usize) -> Self {
        BettiTriple {
            b0,
            b1,
            b2,
            chi: b0 as i64 - b1 as i64 + b2 as i64,
        }
    }

    /// Componentwise sum, as for a disjoint union.
    pub fn disjoint_union(self, other: BettiTriple) -> BettiTriple {
        BettiTriple::new(self.b0 + other.b0, self.b1 + other.b1, self.b2 + other.b2)
    }
}

impl std::fmt::Display for BettiTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {}) chi={}", self.b0, self.b1, self.b2, self.chi)
    }
}

/// Absolute differences between two Betti triples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BettiError {
    pub b0: u64,
    pub b1: u64,
    pub chi: u64,
}

impl BettiError {
    pub fn between(a: BettiTriple, b: BettiTriple) -> Self {
        BettiError {
            b0: a.b0.abs_diff(b.b0) as u64,
            b1: a.b1.abs_diff(b.b1) as u64,
            chi: a.chi.abs_diff(b.chi),
        }
    }
}

/// Foreground labels 1..=K in first-encounter scan order; 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub dims: Dims,
    pub labels: Vec<u32>,
    /// `component_sizes[l - 1]` is the voxel count of label `l`.
    pub component_sizes: Vec<usize>,
    pub connectivity: Connectivity,
}

impl ComponentLabeling {
    pub fn count(&self) -> usize {
        self.component_sizes.len()
    }

    pub fn label_at(&self, v: Voxel) -> u32 {
        self.labels[self.dims.index(v)]
    }

    pub fn size_of(&self, label: u32) -> Option<usize> {
        (label as usize)
            .checked_sub(1)
            .and_then(|i| self.component_sizes.get(i).copied())
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new() -> Self {
        // Slot 0 is unused so provisional labels start at 1.
        UnionFind { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut a: u32) -> u32 {
        while self.parent[a as usize] != a {
            let grand = self.parent[self.parent[a as usize] as usize];
            self.parent[a as usize] = grand;
            a = grand;
        }
        a
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.find(a), self.find(b));
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        lo
    }
}

/// Offsets of neighbors that precede a voxel in scan order.
fn backward_offsets(connectivity: Connectivity) -> Vec<(isize, isize, isize)> {
    OFFSETS_26
        .iter()
        .copied()
        .filter(|&(dx, dy, dz)| connectivity.admits(dx, dy, dz))
        .filter(|&(dx, dy, dz)| (dz, dy, dx) < (0, 0, 0))
        .collect()
}

/// Two-pass union-find labeling.
pub fn label_components(vol: &BinaryVolume, connectivity: Connectivity) -> ComponentLabeling {
    let dims = vol.dims();
    let Dims { nx, ny, nz } = dims;
    let back = backward_offsets(connectivity);
    let mut labels = vec![0u32; dims.len()];
    let mut uf = UnionFind::new();
    let data = vol.data();

    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let i = x + nx * (y + ny * z);
                if data[i] == 0 {
                    continue;
                }
                let mut current = 0u32;
                for &(dx, dy, dz) in &back {
                    let (qx, qy, qz) = (x as isize + dx, y as isize + dy, z as isize + dz);
                    if !dims.contains_signed(qx, qy, qz) {
                        continue;
                    }
                    let l = labels[qx as usize + nx * (qy as usize + ny * qz as usize)];
                    if l != 0 {
                        current = if current == 0 { l } else { uf.union(current, l) };
                    }
                }
                labels[i] = if current == 0 { uf.make() } else { current };
            }
        }
    }

    let mut remap = vec![0u32; uf.parent.len()];
    let mut sizes = Vec::new();
    for l in labels.iter_mut().filter(|l| **l != 0) {
        let root = uf.find(*l) as usize;
        if remap[root] == 0 {
            sizes.push(0);
            remap[root] = sizes.len() as u32;
        }
        *l = remap[root];
        sizes[*l as usize - 1] += 1;
    }

    ComponentLabeling {
        dims,
        labels,
        component_sizes: sizes,
        connectivity,
    }
}

/// Euler characteristic by direct count of the vertices, edges, faces and
/// cubes of the closed-cube complex spanned by the foreground.
pub fn euler_characteristic(vol: &BinaryVolume) -> i64 {
    let Dims { nx, ny, nz } = vol.dims();
    let fg = |x: usize, y: usize, z: usize| -> bool {
        // Cell coordinates are offset by one: 0 means "before the first voxel".
        x >= 1 && y >= 1 && z >= 1 && vol.get_or_zero(x as isize - 1, y as isize - 1, z as isize - 1)
    };
    let exec = Execution::default();

    let vertices = sum_i64(exec, nz + 1, |z| {
        let mut n = 0;
        for y in 0..=ny {
            for x in 0..=nx {
                let any = (0..2).any(|c| (0..2).any(|b| (0..2).any(|a| fg(x + a, y + b, z + c))));
                n += any as i64;
            }
        }
        n
    });

    // Edge along axis `a` at lattice point p spans p..p+e_a; it touches the
    // four cubes around it in the two other axes.
    let edges = sum_i64(exec, nz + 1, |z| {
        let mut n = 0;
        for y in 0..=ny {
            for x in 0..=nx {
                if x < nx {
                    n += (0..2).any(|c| (0..2).any(|b| fg(x + 1, y + b, z + c))) as i64;
                }
                if y < ny {
                    n += (0..2).any(|c| (0..2).any(|a| fg(x + a, y + 1, z + c))) as i64;
                }
                if z < nz {
                    n += (0..2).any(|b| (0..2).any(|a| fg(x + a, y + b, z + 1))) as i64;
                }
            }
        }
        n
    });

    // Face with normal `a` at lattice point p touches the two cubes on either side.
    let faces = sum_i64(exec, nz + 1, |z| {
        let mut n = 0;
        for y in 0..=ny {
            for x in 0..=nx {
                if y < ny && z < nz {
                    n += (fg(x, y + 1, z + 1) || fg(x + 1, y + 1, z + 1)) as i64;
                }
                if x < nx && z < nz {
                    n += (fg(x + 1, y, z + 1) || fg(x + 1, y + 1, z + 1)) as i64;
                }
                if x < nx && y < ny {
                    n += (fg(x + 1, y + 1, z) || fg(x + 1, y + 1, z + 1)) as i64;
                }
            }
        }
        n
    });

    let cubes = vol.count_foreground() as i64;
    vertices - edges + faces - cubes
}

/// Betti numbers under (26, 6) adjacency.
///
/// b0 counts 26-connected foreground components, b2 counts 6-connected
/// background components of the zero-padded volume other than the outside,
/// and b1 follows from the Euler characteristic.
pub fn betti_numbers(vol: &BinaryVolume) -> Result<BettiTriple> {
    betti_numbers_with(vol, Execution::default())
}

pub fn betti_numbers_with(vol: &BinaryVolume, exec: Execution) -> Result<BettiTriple> {
    if vol.is_empty() {
        return Ok(BettiTriple::EMPTY);
    }
    let b0 = label_components(vol, Connectivity::TwentySix).count() as i64;
    let background = vol.padded(1).not();
    let b2 = label_components(&background, Connectivity::Six).count() as i64 - 1;
    let chi = euler_characteristic_lut_with(vol, exec);
    let b1 = b0 + b2 - chi;
    if b1 < 0 {
        return Err(Error::InconsistentTopology { b0, b2, chi });
    }
    Ok(BettiTriple {
        b0: b0 as usize,
        b1: b1 as usize,
        b2: b2 as usize,
        chi,
    })
}

pub fn betti_error(pred: &BinaryVolume, gt: &BinaryVolume) -> Result<BettiError> {
    pred.ensure_same_dims(gt)?;
    Ok(BettiError::between(betti_numbers(pred)?, betti_numbers(gt)?))
}
