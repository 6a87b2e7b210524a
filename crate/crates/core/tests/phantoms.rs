use skeltop::phantom::{generate, Lcg, PhantomKind, PhantomSpec};
use skeltop::{betti_numbers, BettiTriple, Dims, Error};

fn spec(kind: PhantomKind, n: usize, r: f64) -> PhantomSpec {
    PhantomSpec::new(kind, Dims::cube(n).unwrap(), r).unwrap()
}

fn check(spec: &PhantomSpec) {
    let p = generate(spec).unwrap();
    let measured = betti_numbers(&p.volume).unwrap();
    assert_eq!(measured, spec.expected(), "{spec}");
    assert_eq!(p.expected, spec.expected());
    // nothing closer than the margin to the border
    let d = p.volume.dims();
    for i in p.volume.foreground_indices() {
        let v = d.voxel(i);
        for (c, n) in [(v.x, d.nx), (v.y, d.ny), (v.z, d.nz)] {
            assert!(c >= 2 && c + 2 < n, "{spec}: voxel {v:?} touches the margin");
        }
    }
}

#[test]
fn fixed_kinds_have_expected_topology() {
    for r in [1.0, 1.5, 2.0, 3.0, 4.0] {
        for kind in [
            PhantomKind::StraightTube,
            PhantomKind::Torus,
            PhantomKind::YBranch,
            PhantomKind::MultiTube(1),
            PhantomKind::MultiTube(3),
            PhantomKind::MultiTube(4),
        ] {
            check(&spec(kind, 64, r));
        }
    }
}

#[test]
fn vessel_trees_across_seeds_and_radii() {
    for seed in 0..40 {
        for r in [1.0, 2.0, 3.0, 4.0] {
            let kind = PhantomKind::RandomVesselTree {
                seed,
                branches: 4 + (seed as usize % 12),
            };
            check(&spec(kind, 72, r));
        }
    }
}

#[test]
fn anisotropic_grids() {
    let kind = PhantomKind::RandomVesselTree { seed: 3, branches: 16 };
    let s = PhantomSpec::new(kind, Dims::new(192, 192, 64).unwrap(), 3.0).unwrap();
    check(&s);
    let s = PhantomSpec::new(PhantomKind::Torus, Dims::new(40, 60, 20).unwrap(), 2.0).unwrap();
    check(&s);
}

#[test]
fn generation_is_deterministic() {
    let kind = PhantomKind::RandomVesselTree { seed: 9, branches: 10 };
    let s = spec(kind, 64, 2.0);
    assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
    let other = spec(PhantomKind::RandomVesselTree { seed: 10, branches: 10 }, 64, 2.0);
    assert_ne!(generate(&s).unwrap().volume, generate(&other).unwrap().volume);
}

#[test]
fn expected_topology_by_kind() {
    assert_eq!(PhantomKind::Torus.expected_topology(), BettiTriple::new(1, 1, 0));
    assert_eq!(PhantomKind::MultiTube(3).expected_topology().b0, 3);
    assert_eq!(PhantomKind::YBranch.expected_topology().chi, 1);
}

#[test]
fn unconstructible_specs_fail() {
    let tiny = PhantomSpec::new(PhantomKind::Torus, Dims::cube(8).unwrap(), 3.0).unwrap();
    assert!(matches!(generate(&tiny), Err(Error::PhantomDoesNotFit(_))));
    let crowded = PhantomSpec::new(PhantomKind::MultiTube(50), Dims::cube(20).unwrap(), 2.0).unwrap();
    assert!(generate(&crowded).is_err());
    assert!(PhantomSpec::new(PhantomKind::StraightTube, Dims::cube(20).unwrap(), 0.5).is_err());
    assert!("kind=blob".parse::<PhantomSpec>().is_err());
    assert!("kind=torus radius=x".parse::<PhantomSpec>().is_err());
}

#[test]
fn lcg_is_reproducible() {
    let mut a = Lcg::new(42);
    let mut b = Lcg::new(42);
    for _ in 0..100 {
        let x = a.next_f64();
        assert!((0.0..1.0).contains(&x));
        assert_eq!(x, b.next_f64());
    }
}

#[test]
fn trees_grow_branches() {
    let count = |branches| {
        let kind = PhantomKind::RandomVesselTree { seed: 4, branches };
        generate(&spec(kind, 96, 2.0)).unwrap().volume.count_foreground()
    };
    let trunk = count(0);
    let tree = count(12);
    assert!(tree > 2 * trunk);
}
