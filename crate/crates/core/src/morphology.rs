//! Min/max-filter morphology on scalar volumes and the iterative soft skeleton.
//!
//! The structuring element is the 7-voxel cross (center plus 6 face
//! neighbors). Voxels outside the grid read as 0, so erosion zeroes the whole
//! grid border.

use crate::error::{Error, Result};
use crate::grid::{Dims, ScalarVolume};
use crate::par::{for_each_chunk_mut, for_each_chunk_pair_mut, Execution};

/// Number of erosion rounds of the soft skeleton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SoftSkeletonConfig {
    iterations: usize,
}

impl SoftSkeletonConfig {
    pub const DEFAULT_ITERATIONS: usize = 10;

    pub fn new(iterations: usize) -> Result<Self> {
        if iterations == 0 {
            return Err(Error::InvalidParameter(
                "soft skeleton needs at least one iteration".into(),
            ));
        }
        Ok(SoftSkeletonConfig { iterations })
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

impl Default for SoftSkeletonConfig {
    fn default() -> Self {
        SoftSkeletonConfig {
            iterations: Self::DEFAULT_ITERATIONS,
        }
    }
}

#[inline(always)]
fn min2(a: f32, b: f32) -> f32 {
    if a < b {
        a
    } else {
        b
    }
}

#[inline(always)]
fn max2(a: f32, b: f32) -> f32 {
    if a > b {
        a
    } else {
        b
    }
}

#[inline(always)]
fn relu(x: f32) -> f32 {
    max2(x, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Min,
    Max,
}

/// Voxel values plus a flag per x-row telling whether the row has any
/// nonzero value. Values are never negative, so a zero row stays zero under
/// erosion and only neighbouring nonzero rows can light it up under dilation.
struct Field {
    data: Vec<f32>,
    rows: Vec<bool>,
}

impl Field {
    fn new(dims: Dims, data: Vec<f32>) -> Field {
        let rows = data.chunks(dims.nx).map(|r| r.iter().any(|&v| v != 0.0)).collect();
        Field { data, rows }
    }
}

#[inline(always)]
fn filter_row<F: Fn(f32, f32) -> f32>(dst: &mut [f32], row: &[f32], n: [&[f32]; 4], op: F) {
    let nx = dst.len();
    let [ym, yp, zm, zp] = n;
    let vertical = |x: usize| op(op(ym[x], yp[x]), op(zm[x], zp[x]));
    if nx == 1 {
        dst[0] = op(op(row[0], 0.0), vertical(0));
        return;
    }
    dst[0] = op(op(row[0], op(0.0, row[1])), vertical(0));
    dst[nx - 1] = op(op(row[nx - 1], op(row[nx - 2], 0.0)), vertical(nx - 1));
    let m = nx - 2;
    let (left, mid, right) = (&row[..m], &row[1..m + 1], &row[2..]);
    let (a, b, c, e) = (&ym[1..m + 1], &yp[1..m + 1], &zm[1..m + 1], &zp[1..m + 1]);
    let d = &mut dst[1..m + 1];
    for x in 0..m {
        d[x] = op(op(op(mid[x], left[x]), op(right[x], a[x])), op(op(b[x], c[x]), e[x]));
    }
}

/// Applies `op` over the 7-cell cross at every voxel, zero outside the grid.
fn cross_filter(dims: Dims, src: &Field, exec: Execution, op: Op) -> Field {
    let Dims { nx, ny, nz } = dims;
    let zeros = vec![0.0f32; nx];
    let mut data = vec![0.0f32; dims.len()];
    let mut rows = vec![false; ny * nz];
    for_each_chunk_pair_mut(exec, &mut data, nx * ny, &mut rows, ny, |z, out, flags| {
        let row_at = |zz: usize, yy: usize| -> (&[f32], bool) {
            let r = zz * ny + yy;
            (&src.data[r * nx..(r + 1) * nx], src.rows[r])
        };
        let none: (&[f32], bool) = (&zeros[..], false);
        for y in 0..ny {
            let center = row_at(z, y);
            let ym = if y > 0 { row_at(z, y - 1) } else { none };
            let yp = if y + 1 < ny { row_at(z, y + 1) } else { none };
            let zm = if z > 0 { row_at(z - 1, y) } else { none };
            let zp = if z + 1 < nz { row_at(z + 1, y) } else { none };
            let live = [center.1, ym.1, yp.1, zm.1, zp.1];
            let skip = match op {
                Op::Min => live.contains(&false),
                Op::Max => !live.contains(&true),
            };
            if skip {
                continue;
            }
            let dst = &mut out[y * nx..(y + 1) * nx];
            let n = [ym.0, yp.0, zm.0, zp.0];
            match op {
                Op::Min => filter_row(dst, center.0, n, min2),
                Op::Max => filter_row(dst, center.0, n, max2),
            }
            flags[y] = dst.iter().any(|&v| v != 0.0);
        }
    });
    Field { data, rows }
}

/// Cross-shaped minimum filter.
pub fn soft_erode(f: &ScalarVolume) -> ScalarVolume {
    soft_erode_with(f, Execution::default())
}

pub fn soft_erode_with(f: &ScalarVolume, exec: Execution) -> ScalarVolume {
    let out = cross_filter(f.dims(), &Field::new(f.dims(), f.data().to_vec()), exec, Op::Min);
    ScalarVolume::from_raw_parts(f.dims(), f.spacing(), out.data)
}

/// Cross-shaped maximum filter.
pub fn soft_dilate(f: &ScalarVolume) -> ScalarVolume {
    soft_dilate_with(f, Execution::default())
}

pub fn soft_dilate_with(f: &ScalarVolume, exec: Execution) -> ScalarVolume {
    let out = cross_filter(f.dims(), &Field::new(f.dims(), f.data().to_vec()), exec, Op::Max);
    ScalarVolume::from_raw_parts(f.dims(), f.spacing(), out.data)
}

/// Opening: dilation of the erosion.
pub fn soft_open(f: &ScalarVolume) -> ScalarVolume {
    soft_open_with(f, Execution::default())
}

pub fn soft_open_with(f: &ScalarVolume, exec: Execution) -> ScalarVolume {
    let e = cross_filter(f.dims(), &Field::new(f.dims(), f.data().to_vec()), exec, Op::Min);
    let out = cross_filter(f.dims(), &e, exec, Op::Max);
    ScalarVolume::from_raw_parts(f.dims(), f.spacing(), out.data)
}

/// Iterative soft skeleton.
///
/// ```text
/// skel = relu(f - open(f))
/// repeat k times:
///     f     = erode(f)
///     delta = relu(f - open(f))
///     skel  = skel + relu(delta - skel * delta)
/// ```
pub fn soft_skeleton(f: &ScalarVolume, cfg: SoftSkeletonConfig) -> ScalarVolume {
    soft_skeleton_with(f, cfg, Execution::default())
}

pub fn soft_skeleton_with(f: &ScalarVolume, cfg: SoftSkeletonConfig, exec: Execution) -> ScalarVolume {
    let dims = f.dims();
    let nx = dims.nx;
    let chunk = dims.slice_len();
    let rows_per_slice = dims.ny;

    // open(cur) = dilate(erode(cur)), and erode(cur) is the next `cur`, so
    // each round costs one erosion and one dilation.
    let mut cur = Field::new(dims, f.data().to_vec());
    let mut eroded = cross_filter(dims, &cur, exec, Op::Min);
    let mut skel = vec![0.0f32; dims.len()];
    for round in 0..=cfg.iterations {
        if round > 0 {
            cur = eroded;
            eroded = cross_filter(dims, &cur, exec, Op::Min);
        }
        let opened = cross_filter(dims, &eroded, exec, Op::Max);
        let (cur, first) = (&cur, round == 0);
        for_each_chunk_mut(exec, &mut skel, chunk, |z, s| {
            for y in 0..rows_per_slice {
                let r = z * rows_per_slice + y;
                // a zero row of `cur` has zero residual and leaves skel as is
                if !cur.rows[r] {
                    continue;
                }
                let c = &cur.data[r * nx..(r + 1) * nx];
                let o = &opened.data[r * nx..(r + 1) * nx];
                let dst = &mut s[y * nx..(y + 1) * nx];
                if first {
                    for ((v, &ci), &oi) in dst.iter_mut().zip(c).zip(o) {
                        *v = relu(ci - oi);
                    }
                } else {
                    for ((v, &ci), &oi) in dst.iter_mut().zip(c).zip(o) {
                        let delta = relu(ci - oi);
                        *v = min2(*v + relu(delta - *v * delta), 1.0);
                    }
                }
            }
        });
    }
    ScalarVolume::from_raw_parts(dims, f.spacing(), skel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BinaryVolume, Voxel};

    fn cube(n: usize) -> Dims {
        Dims::cube(n).unwrap()
    }

    fn block3_in5() -> ScalarVolume {
        ScalarVolume::from_binary(&BinaryVolume::from_fn(cube(5), |v| {
            (1..4).contains(&v.x) && (1..4).contains(&v.y) && (1..4).contains(&v.z)
        }))
    }

    fn single(n: usize, p: Voxel) -> ScalarVolume {
        let mut s = ScalarVolume::zeros(cube(n));
        s.set(p, 1.0);
        s
    }

    fn line_x(n: usize) -> ScalarVolume {
        ScalarVolume::from_binary(&BinaryVolume::from_fn(cube(n), |v| v.y == n / 2 && v.z == n / 2 && v.x > 0 && v.x + 1 < n))
    }

    fn nonzero(s: &ScalarVolume) -> usize {
        s.data().iter().filter(|&&v| v != 0.0).count()
    }

    #[test]
    fn erode_examples() {
        assert_eq!(nonzero(&soft_erode(&ScalarVolume::zeros(cube(4)))), 0);
        assert_eq!(nonzero(&soft_erode(&single(5, Voxel::new(2, 2, 2)))), 0);
        let e = soft_erode(&block3_in5());
        assert_eq!(nonzero(&e), 1);
        assert_eq!(e.get(Voxel::new(2, 2, 2)), 1.0);
    }

    #[test]
    fn dilate_examples() {
        assert_eq!(nonzero(&soft_dilate(&ScalarVolume::zeros(cube(4)))), 0);
        let d = soft_dilate(&single(5, Voxel::new(2, 2, 2)));
        assert_eq!(nonzero(&d), 7);
        let ones = ScalarVolume::from_binary(&BinaryVolume::ones(cube(4)));
        assert_eq!(soft_dilate(&ones), ones);
    }

    #[test]
    fn open_examples() {
        assert_eq!(nonzero(&soft_open(&line_x(7))), 0);
        assert_eq!(nonzero(&soft_open(&ScalarVolume::zeros(cube(3)))), 0);
        let o = soft_open(&block3_in5());
        assert_eq!(nonzero(&o), 7);
        assert_eq!(o, soft_dilate(&single(5, Voxel::new(2, 2, 2))));
    }

    #[test]
    fn skeleton_examples() {
        let cfg = SoftSkeletonConfig::new(1).unwrap();
        assert_eq!(nonzero(&soft_skeleton(&ScalarVolume::zeros(cube(6)), cfg)), 0);
        let line = line_x(9);
        assert_eq!(soft_skeleton(&line, cfg), line);
        assert!(SoftSkeletonConfig::new(0).is_err());
        assert_eq!(SoftSkeletonConfig::default().iterations(), 10);
    }

    #[test]
    fn thin_edge_grids() {
        // nx == 1 and ny == 1 exercise the degenerate row paths.
        let s = ScalarVolume::from_vec(Dims::new(1, 3, 1).unwrap(), vec![0.2, 0.9, 0.4]).unwrap();
        assert_eq!(soft_dilate(&s).data(), &[0.9, 0.9, 0.9]);
        assert_eq!(soft_erode(&s).data(), &[0.0, 0.0, 0.0]);
        let r = ScalarVolume::from_vec(Dims::new(3, 1, 1).unwrap(), vec![0.2, 0.9, 0.4]).unwrap();
        assert_eq!(soft_dilate(&r).data(), &[0.9, 0.9, 0.9]);
    }

    #[test]
    fn sequential_and_parallel_match() {
        let dims = Dims::new(13, 9, 7).unwrap();
        let data: Vec<f32> = (0..dims.len()).map(|i| ((i * 2654435761) % 1000) as f32 / 999.0).collect();
        let f = ScalarVolume::from_vec(dims, data).unwrap();
        let cfg = SoftSkeletonConfig::new(3).unwrap();
        assert_eq!(
            soft_skeleton_with(&f, cfg, Execution::Sequential),
            soft_skeleton_with(&f, cfg, Execution::Parallel)
        );
    }
}
