use std::collections::BTreeSet;

use proptest::prelude::*;

use treerange_core::analytics::{kemperman_check, GreenTable};
use treerange_core::brw::progeny_pmf;
use treerange_core::gw_trees::{assign_locations, cycle_rotate, lukasiewicz, range_of, sample_gw, tree_from_lukasiewicz, PlaneTree};
use treerange_core::replicate::Replication;
use treerange_core::rng::stream;
use treerange_core::snake::pitman_pmf;
use treerange_core::{make_geometric_critical, make_jump_srw, Point, SiteSet};

fn point(dim: usize) -> impl Strategy<Value = Point> {
    proptest::collection::vec(-6i32..=6, dim).prop_map(|v| Point::from_slice(&v))
}

fn gw_tree(seed: u64) -> PlaneTree {
    sample_gw(&make_geometric_critical(), &mut stream(seed, 0), 5000).unwrap_or_else(|_| PlaneTree::root_only())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn lukasiewicz_roundtrip(seed in any::<u64>()) {
        let t = gw_tree(seed);
        let back = tree_from_lukasiewicz(&lukasiewicz(&t)).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(PlaneTree::from_text(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn accepted_paths_are_lukasiewicz(incs in proptest::collection::vec(-1i64..=3, 1..40)) {
        if tree_from_lukasiewicz(&incs).is_ok() {
            let mut x = 0;
            for (i, s) in incs.iter().enumerate() {
                x += s;
                prop_assert!(x >= 0 || i + 1 == incs.len());
            }
            prop_assert_eq!(x, -1);
        }
    }

    #[test]
    fn rotation_yields_a_tree(counts in proptest::collection::vec(0u32..4, 1..60)) {
        // pad with leaves until the counts sum to len − 1
        let mut c = counts;
        let total: u32 = c.iter().sum();
        if total + 1 < c.len() as u32 {
            return Ok(());
        }
        c.extend(std::iter::repeat_n(0, (total + 1) as usize - c.len()));
        let before = c.clone();
        cycle_rotate(&mut c);
        let incs: Vec<i64> = c.iter().map(|&k| k as i64 - 1).collect();
        prop_assert!(tree_from_lukasiewicz(&incs).is_ok());
        let mut a = before; a.sort_unstable();
        let mut b = c; b.sort_unstable();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn range_is_bounded_and_translation_invariant(seed in any::<u64>(), dim in 1usize..=6, v in point(6)) {
        let t = gw_tree(seed);
        let s = assign_locations(&t, &make_jump_srw(dim), &mut stream(seed, 1));
        let r = range_of(&s);
        prop_assert!(1 <= r && r <= t.size());
        let mut shift = Point::ORIGIN;
        shift.0[..dim].copy_from_slice(&v.0[..dim]);
        prop_assert_eq!(range_of(&s.translated(shift)), r);
    }

    #[test]
    fn site_set_matches_btreeset(points in proptest::collection::vec(point(5), 0..300)) {
        let mut set = SiteSet::new(5);
        let mut reference = BTreeSet::new();
        for p in &points {
            prop_assert_eq!(set.insert(*p), reference.insert(*p));
        }
        prop_assert_eq!(set.len(), reference.len());
        prop_assert!(points.iter().all(|p| set.contains(p)));
        let mut listed = set.points();
        listed.sort();
        prop_assert_eq!(listed, reference.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn kemperman_identity(m in 0u64..15, j in 0u64..40) {
        let k = m + 1 + 2 * j;
        let (lhs, rhs) = kemperman_check(m, k).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pitman_law_is_normalized(k in 0u64..60) {
        use num_traits::One;
        let total = (0..=k).filter(|m| (k + m) % 2 == 0).map(|m| pitman_pmf(k, m).unwrap()).fold(num_rational::BigRational::from_integer(0.into()), |a, b| a + b);
        prop_assert!(total.is_one());
    }

    #[test]
    fn progeny_law_is_subprobability(p in 1u64..6, nmax in 1usize..40) {
        let pmf = progeny_pmf(&make_geometric_critical(), p, nmax);
        prop_assert!(pmf.iter().all(|&q| (0.0..=1.0).contains(&q)));
        prop_assert!(pmf.iter().sum::<f64>() <= 1.0 + 1e-12);
        prop_assert!(pmf[..(p as usize).min(nmax + 1)].iter().all(|&q| q == 0.0));
    }

    #[test]
    fn replicas_do_not_depend_on_workers(seed in any::<u64>(), workers in 1usize..5) {
        let f = |i: u64, rng: &mut treerange_core::rng::Stream| { use rand::Rng; (i, rng.random::<u64>()) };
        let one = Replication::new(40, seed).with_workers(1).run(f);
        let many = Replication::new(40, seed).with_workers(workers).run(f);
        prop_assert_eq!(one, many);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn green_table_symmetries(x in point(4)) {
        let table = green_table();
        let g = table.eval(&x);
        prop_assert!((table.eval(&-x) - g).abs() <= 1e-12 * g);
        let mut swapped = x;
        swapped.0.swap(0, 3);
        prop_assert!((table.eval(&swapped) - g).abs() <= 1e-12 * g);
        prop_assert!(g > 0.0 && g <= table.eval(&Point::ORIGIN));
    }
}

fn green_table() -> &'static GreenTable {
    static T: std::sync::OnceLock<GreenTable> = std::sync::OnceLock::new();
    T.get_or_init(|| GreenTable::build(&make_jump_srw(4), 6).unwrap())
}
