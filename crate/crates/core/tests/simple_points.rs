mod common;

use common::oracle;
use proptest::prelude::*;
use rand::Rng;
use skeltop::euler::euler_delta8;
use skeltop::simple::{is_endpoint, is_simple_boolean, is_simple_euler, t26, t6};
use skeltop::Neighborhood;

const CENTER: u32 = 1 << 13;

#[test]
fn both_tests_match_attachment_oracle() {
    let mut rng = common::rng(5);
    for i in 0..20_000 {
        // vary density so sparse and dense neighborhoods both show up
        let keep: u32 = rng.random::<u32>() & rng.random::<u32>();
        let fill: u32 = rng.random::<u32>() | rng.random::<u32>();
        let bits = (match i % 3 {
            0 => keep,
            1 => fill,
            _ => rng.random::<u32>(),
        } & ((1 << 27) - 1))
            | CENTER;
        let want = oracle::is_simple(bits);
        let n = Neighborhood(bits);
        assert_eq!(is_simple_euler(n).unwrap(), want, "euler {bits:#x}");
        assert_eq!(is_simple_boolean(n).unwrap(), want, "boolean {bits:#x}");
    }
}

#[test]
fn euler_delta_matches_cell_count() {
    let mut rng = common::rng(6);
    for _ in 0..5_000 {
        let bits = rng.random::<u32>() & ((1 << 27) - 1) | CENTER;
        let with = oracle::chi(&oracle::config_volume(bits));
        let without = oracle::chi(&oracle::config_volume(bits & !CENTER));
        assert_eq!(euler_delta8(Neighborhood(bits)) as i64, 8 * (with - without), "{bits:#x}");
    }
}

#[test]
fn simple_points_keep_window_topology() {
    let mut rng = common::rng(7);
    for _ in 0..5_000 {
        let bits = rng.random::<u32>() & ((1 << 27) - 1) | CENTER;
        if is_simple_euler(Neighborhood(bits)).unwrap() {
            assert!(oracle::window_betti_unchanged(bits), "{bits:#x}");
        }
    }
}

#[test]
fn named_configurations() {
    let b = |dx: isize, dy: isize, dz: isize| 1u32 << Neighborhood::bit(dx, dy, dz);
    // a single face neighbor: an endpoint, simple
    let end = Neighborhood(CENTER | b(1, 0, 0));
    assert!(is_endpoint(end));
    assert_eq!((t26(end), t6(end)), (1, 1));
    // middle of a line: two foreground components around it
    let mid = Neighborhood(CENTER | b(1, 0, 0) | b(-1, 0, 0));
    assert_eq!(t26(mid), 2);
    assert!(!is_simple_euler(mid).unwrap());
    // full cube center: interior point, no background
    let full = Neighborhood(Neighborhood::FULL);
    assert_eq!(t6(full), 0);
    assert!(!is_simple_boolean(full).unwrap());
    assert!(is_simple_euler(Neighborhood(0)).is_err());
    assert!(is_simple_boolean(Neighborhood(0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn euler_and_boolean_agree(bits in 0u32..(1 << 27)) {
        let n = Neighborhood(bits | CENTER);
        prop_assert_eq!(is_simple_euler(n).unwrap(), is_simple_boolean(n).unwrap());
    }

    #[test]
    fn simplicity_is_invariant_under_mirroring(bits in 0u32..(1 << 27)) {
        let bits = bits | CENTER;
        let mut mirrored = 0;
        for k in 0..27 {
            if bits >> k & 1 == 1 {
                let (x, y, z) = (k % 3, k / 3 % 3, k / 9);
                mirrored |= 1 << (z * 9 + y * 3 + (2 - x));
            }
        }
        prop_assert_eq!(
            is_simple_euler(Neighborhood(bits)).unwrap(),
            is_simple_euler(Neighborhood(mirrored)).unwrap()
        );
    }
}
