#![allow(dead_code)]

pub mod oracle;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use skeltop::{BinaryVolume, Dims};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Bernoulli volume with foreground probability `p`.
pub fn random_volume(rng: &mut StdRng, dims: Dims, p: f64) -> BinaryVolume {
    BinaryVolume::from_fn(dims, |_| rng.random_bool(p))
}

/// Random dims with every side in `1..=max`.
pub fn random_dims(rng: &mut StdRng, max: usize) -> Dims {
    Dims::new(
        rng.random_range(1..=max),
        rng.random_range(1..=max),
        rng.random_range(1..=max),
    )
    .unwrap()
}

/// Union of random axis-aligned boxes, which gives blobby shapes with tunnels and cavities.
pub fn random_boxes(rng: &mut StdRng, dims: Dims, count: usize) -> BinaryVolume {
    let mut vol = BinaryVolume::zeros(dims);
    for _ in 0..count {
        let lo = [
            rng.random_range(0..dims.nx),
            rng.random_range(0..dims.ny),
            rng.random_range(0..dims.nz),
        ];
        let hi = [
            rng.random_range(lo[0]..dims.nx.min(lo[0] + 6)),
            rng.random_range(lo[1]..dims.ny.min(lo[1] + 6)),
            rng.random_range(lo[2]..dims.nz.min(lo[2] + 6)),
        ];
        let carve = rng.random_bool(0.3);
        for z in lo[2]..=hi[2] {
            for y in lo[1]..=hi[1] {
                for x in lo[0]..=hi[0] {
                    vol.set(skeltop::Voxel::new(x, y, z), !carve);
                }
            }
        }
    }
    vol
}

/// Solid `n`^3 block with a one-voxel empty border, so the grid is `(n+2)`^3.
pub fn block(n: usize) -> BinaryVolume {
    let d = Dims::cube(n + 2).unwrap();
    BinaryVolume::from_fn(d, |v| {
        (1..=n).contains(&v.x) && (1..=n).contains(&v.y) && (1..=n).contains(&v.z)
    })
}
