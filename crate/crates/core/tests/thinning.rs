mod common;

use proptest::prelude::*;
use skeltop::phantom::{generate, PhantomKind, PhantomSpec};
use skeltop::thinning::skeletonize_with;
use skeltop::{betti_numbers, skeletonize, BinaryVolume, Dims, Execution, ThinningMethod, Voxel};

const METHODS: [ThinningMethod; 4] = [
    ThinningMethod::euler(),
    ThinningMethod::boolean(),
    ThinningMethod::euler().with_endpoints(false),
    ThinningMethod::boolean().with_endpoints(false),
];

fn arb_volume(max: usize) -> impl Strategy<Value = BinaryVolume> {
    (1..=max, 1..=max, 1..=max, 0.2f64..0.9).prop_flat_map(|(x, y, z, p)| {
        let d = Dims::new(x, y, z).unwrap();
        proptest::collection::vec(proptest::bool::weighted(p), d.len()).prop_map(move |bits| {
            BinaryVolume::from_vec(d, bits.into_iter().map(u8::from).collect()).unwrap()
        })
    })
}

/// No skeleton voxel is enclosed by foreground on all six faces.
fn no_interior_voxels(skel: &BinaryVolume) -> bool {
    let d = skel.dims();
    skel.foreground_indices().all(|i| {
        let v = d.voxel(i);
        let (x, y, z) = (v.x as isize, v.y as isize, v.z as isize);
        [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
            .iter()
            .any(|(dx, dy, dz)| !skel.get_or_zero(x + dx, y + dy, z + dz))
    })
}

#[test]
fn phantoms_keep_topology() {
    let dims = Dims::cube(48).unwrap();
    let mut kinds = vec![
        PhantomKind::Torus,
        PhantomKind::YBranch,
        PhantomKind::MultiTube(3),
        PhantomKind::StraightTube,
    ];
    kinds.extend((0..6).map(|seed| PhantomKind::RandomVesselTree { seed, branches: 8 }));
    for kind in kinds {
        for r in [1.0, 2.0, 3.0] {
            let spec = PhantomSpec::new(kind, dims, r).unwrap();
            let vol = generate(&spec).unwrap().volume;
            for m in [ThinningMethod::euler(), ThinningMethod::boolean()] {
                let skel = skeletonize(&vol, m);
                assert_eq!(betti_numbers(&skel).unwrap(), spec.expected(), "{spec} {m:?}");
                assert!(skel.is_subset_of(&vol));
                assert!(no_interior_voxels(&skel));
            }
        }
    }
}

#[test]
fn euler_and_boolean_thinning_coincide() {
    // the two characterizations are equivalent, so the deletion sequence is identical
    let mut rng = common::rng(21);
    for _ in 0..40 {
        let d = common::random_dims(&mut rng, 12);
        let vol = common::random_boxes(&mut rng, d, 6);
        assert_eq!(
            skeletonize(&vol, ThinningMethod::euler()),
            skeletonize(&vol, ThinningMethod::boolean())
        );
    }
}

#[test]
fn tube_thins_to_a_curve() {
    let spec: PhantomSpec = "kind=straight radius=3 dims=40".parse().unwrap();
    let vol = generate(&spec).unwrap().volume;
    let skel = skeletonize(&vol, ThinningMethod::euler());
    // every voxel of a curve skeleton has at most two 26-neighbors
    let d = skel.dims();
    for i in skel.foreground_indices() {
        let v = d.voxel(i);
        let n = skeltop::grid::extract_neighborhood27(&skel, v).unwrap().neighbor_count();
        assert!(n <= 2, "voxel {v:?} has {n} neighbors");
    }
    assert!(skel.count_foreground() >= 20);
}

#[test]
fn hollow_box_keeps_its_cavity() {
    let d = Dims::cube(10).unwrap();
    let shell = BinaryVolume::from_fn(d, |v| {
        let inside = |c: usize| (1..=8).contains(&c);
        let hole = |c: usize| (3..=6).contains(&c);
        inside(v.x) && inside(v.y) && inside(v.z) && !(hole(v.x) && hole(v.y) && hole(v.z))
    });
    for m in METHODS {
        let skel = skeletonize(&shell, m);
        assert_eq!(betti_numbers(&skel).unwrap(), skeltop::BettiTriple::new(1, 0, 1));
    }
}

#[test]
fn single_voxel_and_full_grid() {
    let d = Dims::cube(5).unwrap();
    let mut one = BinaryVolume::zeros(d);
    one.set(Voxel::new(2, 2, 2), true);
    assert_eq!(skeletonize(&one, ThinningMethod::euler()), one);
    // a solid grid touching every border collapses but stays one component
    let full = BinaryVolume::ones(d);
    for m in METHODS {
        let skel = skeletonize(&full, m);
        assert_eq!(betti_numbers(&skel).unwrap(), skeltop::BettiTriple::new(1, 0, 0));
    }
}

#[test]
fn execution_modes_agree_on_phantom() {
    let spec: PhantomSpec = "kind=tree seed=2 branches=10 radius=3 dims=80,80,48".parse().unwrap();
    let vol = generate(&spec).unwrap().volume;
    for m in METHODS {
        assert_eq!(
            skeletonize_with(&vol, m, Execution::Sequential),
            skeletonize_with(&vol, m, Execution::Parallel)
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn preserves_topology_on_random_volumes(vol in arb_volume(8), which in 0usize..4) {
        let m = METHODS[which];
        let skel = skeletonize(&vol, m);
        prop_assert!(skel.is_subset_of(&vol));
        prop_assert_eq!(betti_numbers(&skel).unwrap(), betti_numbers(&vol).unwrap());
    }

    #[test]
    fn idempotent(vol in arb_volume(8), which in 0usize..4) {
        let m = METHODS[which];
        let once = skeletonize(&vol, m);
        prop_assert_eq!(skeletonize(&once, m), once.clone());
    }

    #[test]
    fn deterministic_across_modes(vol in arb_volume(10), which in 0usize..4) {
        let m = METHODS[which];
        prop_assert_eq!(
            skeletonize_with(&vol, m, Execution::Sequential),
            skeletonize_with(&vol, m, Execution::Parallel)
        );
    }
}
