//! Topology-preserving sequential thinning by simple-point deletion.
//!
//! Each pass peels the object from the six face directions in the order
//! up, down, north, south, east, west. A subpass collects the border voxels
//! for its direction (foreground voxels whose face neighbor in that direction
//! is background), then visits them in ascending (z, y, x) order and deletes
//! each one that is simple in the current, partially thinned volume. Passes
//! repeat until one deletes nothing.
//!
//! Under [`Execution::Parallel`] the simplicity of every candidate is
//! evaluated up front in parallel. The sequential sweep reuses that answer
//! unless one of the candidate's 26 neighbors was deleted earlier in the same
//! subpass, in which case it is evaluated again; the result is therefore
//! identical to the purely sequential sweep.

use serde::{Deserialize, Serialize};

use crate::grid::{neighborhood_at, BinaryVolume, Dims, Neighborhood, OFFSETS_26};
use crate::par::{flat_map_ordered, Execution};
use crate::simple::{is_endpoint, simple_boolean, simple_euler};

/// Which simple-point characterization drives deletion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SimplePointTest {
    Euler,
    Boolean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThinningMethod {
    pub variant: SimplePointTest,
    /// Keep voxels with at most one foreground neighbor.
    pub preserve_endpoints: bool,
}

impl ThinningMethod {
    pub const fn euler() -> Self {
        ThinningMethod {
            variant: SimplePointTest::Euler,
            preserve_endpoints: true,
        }
    }

    pub const fn boolean() -> Self {
        ThinningMethod {
            variant: SimplePointTest::Boolean,
            preserve_endpoints: true,
        }
    }

    pub const fn with_endpoints(mut self, preserve: bool) -> Self {
        self.preserve_endpoints = preserve;
        self
    }

    #[inline]
    fn deletable(&self, config: Neighborhood) -> bool {
        if self.preserve_endpoints && is_endpoint(config) {
            return false;
        }
        match self.variant {
            SimplePointTest::Euler => simple_euler(config),
            SimplePointTest::Boolean => simple_boolean(config),
        }
    }
}

/// Peeling direction of a subpass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Up,
    Down,
    North,
    South,
    East,
    West,
}

const DIRECTIONS: [Direction; 6] = [
    Direction::Up,
    Direction::Down,
    Direction::North,
    Direction::South,
    Direction::East,
    Direction::West,
];

impl Direction {
    fn offset(self) -> (isize, isize, isize) {
        match self {
            Direction::Up => (0, 0, 1),
            Direction::Down => (0, 0, -1),
            Direction::North => (0, 1, 0),
            Direction::South => (0, -1, 0),
            Direction::East => (1, 0, 0),
            Direction::West => (-1, 0, 0),
        }
    }
}

/// Thins `vol` down to a curve skeleton with the same topology.
pub fn skeletonize(vol: &BinaryVolume, method: ThinningMethod) -> BinaryVolume {
    skeletonize_with(vol, method, Execution::default())
}

pub fn skeletonize_with(vol: &BinaryVolume, method: ThinningMethod, exec: Execution) -> BinaryVolume {
    let mut work = vol.clone();
    let dims = vol.dims();
    let precompute = exec.is_parallel();
    // stamp[i] == subpass id: a neighbor of i was deleted in this subpass.
    let mut stamp: Vec<u32> = if precompute { vec![0; dims.len()] } else { Vec::new() };
    let mut subpass_id = 0u32;

    // Foreground indices in ascending (z, y, x) order.
    let mut foreground: Vec<usize> = vol.foreground_indices().collect();

    loop {
        let mut deleted = 0usize;
        for dir in DIRECTIONS {
            subpass_id += 1;
            let candidates = collect_candidates(&work, &foreground, dir, method, precompute, exec);
            for (index, verdict) in candidates {
                let p = dims.voxel(index);
                let delete = if precompute && stamp[index] != subpass_id {
                    verdict
                } else {
                    method.deletable(neighborhood_at(&work, p))
                };
                if delete {
                    work.set_index(index, false);
                    deleted += 1;
                    if precompute {
                        mark_neighbors(&mut stamp, dims, index, subpass_id);
                    }
                }
            }
        }
        if deleted == 0 {
            return work;
        }
        foreground.retain(|&i| work.get_index(i));
    }
}

fn mark_neighbors(stamp: &mut [u32], dims: Dims, index: usize, id: u32) {
    let p = dims.voxel(index);
    let (px, py, pz) = (p.x as isize, p.y as isize, p.z as isize);
    for &(dx, dy, dz) in &OFFSETS_26 {
        let (x, y, z) = (px + dx, py + dy, pz + dz);
        if dims.contains_signed(x, y, z) {
            stamp[x as usize + dims.nx * (y as usize + dims.ny * z as usize)] = id;
        }
    }
}

/// Border voxels of one direction in ascending linear order, each paired with
/// its deletability at collection time (only evaluated when `precompute`).
fn collect_candidates(
    vol: &BinaryVolume,
    foreground: &[usize],
    dir: Direction,
    method: ThinningMethod,
    precompute: bool,
    exec: Execution,
) -> Vec<(usize, bool)> {
    const CHUNK: usize = 2048;
    let dims = vol.dims();
    let data = vol.data();
    let (dx, dy, dz) = dir.offset();
    let step = dx + dy * dims.nx as isize + dz * dims.slice_len() as isize;
    flat_map_ordered(exec, foreground.len().div_ceil(CHUNK), |c| {
        let part = &foreground[c * CHUNK..foreground.len().min((c + 1) * CHUNK)];
        let mut out = Vec::new();
        for &i in part {
            if data[i] == 0 {
                continue;
            }
            let p = dims.voxel(i);
            let open = !dims.contains_signed(p.x as isize + dx, p.y as isize + dy, p.z as isize + dz)
                || data[(i as isize + step) as usize] == 0;
            if open {
                let verdict = precompute && method.deletable(neighborhood_at(vol, p));
                out.push((i, verdict));
            }
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(n: usize, r: f64) -> BinaryVolume {
        let c = (n / 2) as f64;
        BinaryVolume::from_fn(Dims::cube(n).unwrap(), |v| {
            let d2 = (v.x as f64 - c).powi(2) + (v.y as f64 - c).powi(2) + (v.z as f64 - c).powi(2);
            d2 <= r * r
        })
    }

    #[test]
    fn empty_stays_empty() {
        let v = BinaryVolume::zeros(Dims::cube(6).unwrap());
        assert_eq!(skeletonize(&v, ThinningMethod::euler()), v);
        assert_eq!(skeletonize(&v, ThinningMethod::boolean()), v);
    }

    #[test]
    fn ball_thins_to_subset() {
        let v = ball(15, 5.0);
        for m in [ThinningMethod::euler(), ThinningMethod::boolean()] {
            let s = skeletonize(&v, m);
            assert!(s.is_subset_of(&v));
            assert!(s.count_foreground() >= 1);
            assert!(s.count_foreground() < v.count_foreground() / 10);
        }
    }

    #[test]
    fn without_endpoints_ball_collapses_to_a_point() {
        let v = ball(13, 4.0);
        let s = skeletonize(&v, ThinningMethod::euler().with_endpoints(false));
        assert_eq!(s.count_foreground(), 1);
    }

    #[test]
    fn straight_line_is_kept() {
        let d = Dims::new(9, 5, 5).unwrap();
        let line = BinaryVolume::from_fn(d, |v| v.y == 2 && v.z == 2 && (1..8).contains(&v.x));
        assert_eq!(skeletonize(&line, ThinningMethod::euler()), line);
        assert_eq!(skeletonize(&line, ThinningMethod::boolean()), line);
    }

    #[test]
    fn solid_box_yields_connected_skeleton_in_both_modes() {
        let d = Dims::new(12, 8, 6).unwrap();
        let v = BinaryVolume::from_fn(d, |p| {
            (1..11).contains(&p.x) && (1..7).contains(&p.y) && (1..5).contains(&p.z)
        });
        for m in [ThinningMethod::euler(), ThinningMethod::boolean()] {
            let a = skeletonize_with(&v, m, Execution::Sequential);
            let b = skeletonize_with(&v, m, Execution::Parallel);
            assert_eq!(a, b);
        }
    }
}
