use std::cmp::Ordering;

use proptest::prelude::*;
use range_median::types::ceil_log2;
use range_median::{
    filter, naive_filter, oracle_select, CascadeNode, CascadeTree, CompactTree, DynamicTree,
    Element, GrayImage, OrderIndex, Parallelism, RangeQuery, SelectionStrategy, Value,
};

fn strategy() -> impl Strategy<Value = SelectionStrategy> {
    prop_oneof![
        Just(SelectionStrategy::Deterministic),
        any::<u64>().prop_map(|seed| SelectionStrategy::Randomized { seed }),
    ]
}

/// An array (with many ties) plus queries that are valid for it.
fn instance(max_len: usize) -> impl Strategy<Value = (Vec<i32>, Vec<RangeQuery>)> {
    (1..=max_len).prop_flat_map(|n| {
        let query = (1..=n, 1..=n, any::<prop::sample::Index>(), any::<bool>()).prop_map(
            |(a, b, p, median)| {
                let (l, r) = (a.min(b), a.max(b));
                if median {
                    RangeQuery::median(l, r)
                } else {
                    RangeQuery::with_rank(l, r, p.index(r - l + 1) + 1)
                }
            },
        );
        (
            prop::collection::vec(-20i32..20, n),
            prop::collection::vec(query, 1..40),
        )
    })
}

fn elements(values: &[i32]) -> Vec<Element<i32>> {
    range_median::types::elements_of(values).unwrap()
}

/// Checks the child-position tables of every split node below `node`.
fn check_cascade<V: Value + PartialEq>(node: &CascadeNode<V>) {
    let (Some(low), Some(high)) = (node.low(), node.high()) else {
        return;
    };
    let (lp, hp) = (node.low_pred(), node.high_pred());
    assert_eq!(lp.len(), node.len() + 1);
    assert_eq!((lp[0], hp[0]), (0, 0));
    for j in 1..=node.len() {
        assert_eq!((lp[j] + hp[j]) as usize, j);
        let went_low = lp[j] - lp[j - 1];
        assert!(went_low <= 1);
        let e = node.elems()[j - 1];
        let child = if went_low == 1 {
            low.elems()[lp[j] as usize - 1]
        } else {
            high.elems()[hp[j] as usize - 1]
        };
        assert_eq!(child, e);
    }
    assert_eq!(low.len(), node.len().div_ceil(2));
    if let (Some(a), Some(b)) = (
        low.elems()
            .iter()
            .max_by(|a, b| range_median::total_cmp(a, b)),
        high.elems().first(),
    ) {
        assert!(
            high.elems()
                .iter()
                .all(|h| range_median::total_cmp(a, h) == Ordering::Less),
            "{b:?}"
        );
    }
    check_cascade(low);
    check_cascade(high);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn all_structures_match_the_oracle((values, queries) in instance(150), strategy in strategy()) {
        let elems = elements(&values);
        let mut cascade = CascadeTree::with_strategy(&values, strategy).unwrap();
        cascade.set_verify_cascade(true);
        let mut compact = CompactTree::with_strategy(&values, strategy).unwrap();
        let (mut dynamic, handles) = DynamicTree::from_values(&values).unwrap();
        for q in &queries {
            let expected = oracle_select(&elems, q).unwrap();
            prop_assert_eq!(cascade.query(q).unwrap(), expected);
            prop_assert_eq!(compact.query(q).unwrap(), expected);
            let got = dynamic.query(handles[q.left - 1], handles[q.right - 1], q.rank).unwrap();
            prop_assert_eq!(got, expected.value);
        }
        check_cascade(cascade.root());
    }

    #[test]
    fn depth_and_idempotence((values, queries) in instance(300)) {
        let n = values.len();
        let depth = u64::from(ceil_log2(n));
        let mut tree = CascadeTree::new(&values).unwrap();
        let mut compact = CompactTree::new(&values).unwrap();
        for q in &queries {
            let (a, t) = tree.query_traced(q).unwrap();
            prop_assert!(t.nodes_visited >= depth && t.nodes_visited <= depth + 1);
            let (b, again) = tree.query_traced(q).unwrap();
            prop_assert_eq!(a, b);
            prop_assert_eq!(again.splits, 0);
            let (c, u) = compact.query_traced(q).unwrap();
            prop_assert_eq!(c, a);
            prop_assert_eq!(u.nodes_visited, t.nodes_visited);
        }
    }

    #[test]
    fn lazy_partition_work_is_bounded(n in 1usize..3000, k in 1usize..200, seed in any::<u64>()) {
        let values = range_median::datagen::random_reals(n, seed);
        let queries = range_median::datagen::random_queries(n, k, true, seed);
        let mut tree = CascadeTree::new(&values).unwrap();
        for q in &queries {
            tree.query(q).unwrap();
        }
        let partitioned = tree.stats().elements_partitioned;
        let depth = u64::from(ceil_log2(n));
        prop_assert!(partitioned <= n as u64 * depth);
        // odd node sizes round the lower half up, at most one element per split node
        let rounding = if n.is_power_of_two() { 0 } else { k as u64 * depth };
        let levels = u64::from(ceil_log2(k)) + 2;
        prop_assert!(partitioned <= n as u64 * levels + rounding);
        if k.is_power_of_two() {
            prop_assert!(partitioned <= n as u64 * (u64::from(k.ilog2()) + 2) + rounding);
        }
    }

    #[test]
    fn compact_space_is_monotone_and_levels_contract((values, queries) in instance(400)) {
        let n = values.len();
        let mut lazy = CompactTree::new(&values).unwrap();
        for q in &queries {
            lazy.query(q).unwrap();
        }
        let mut eager = CompactTree::new(&values).unwrap();
        eager.build_eager(Parallelism::Sequential);
        let (l, e) = (lazy.space_report(), eager.space_report());
        prop_assert!(l.total_words <= e.total_words);
        prop_assert!(l.payload_bits <= e.payload_bits);
        prop_assert_eq!(e.leaves as usize, n);
        for level in &e.levels {
            // every level except possibly the last is complete
            if level.level + 1 < e.levels.len() {
                prop_assert_eq!(level.payload_bits as usize, n);
            }
        }
    }

    #[test]
    fn dynamic_audit_after_random_updates(ops in prop::collection::vec((0u8..3, any::<prop::sample::Index>(), 0i32..30), 1..300)) {
        let mut tree = DynamicTree::new();
        let mut shadow = Vec::new();
        for (kind, idx, value) in ops {
            if kind < 2 || shadow.is_empty() {
                let pos = idx.index(shadow.len() + 1);
                let after = pos.checked_sub(1).map(|i| shadow[i]);
                shadow.insert(pos, tree.insert(after, value).unwrap());
            } else {
                let pos = idx.index(shadow.len());
                tree.delete(shadow.remove(pos)).unwrap();
            }
        }
        prop_assert!(tree.audit().is_ok(), "{:?}", tree.audit());
        let listed: Vec<_> = tree.handles().collect();
        prop_assert_eq!(listed, shadow);
    }

    #[test]
    fn order_index_is_a_strict_total_order(inserts in prop::collection::vec(any::<prop::sample::Index>(), 1..200), picks in prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>(), any::<prop::sample::Index>()), 1..50)) {
        let mut idx = OrderIndex::new();
        let mut shadow = Vec::new();
        for at in inserts {
            let pos = at.index(shadow.len() + 1);
            let after = pos.checked_sub(1).map(|i| shadow[i]);
            shadow.insert(pos, idx.insert_after(after).unwrap());
        }
        for (a, b, c) in picks {
            let (i, j, k) = (a.index(shadow.len()), b.index(shadow.len()), c.index(shadow.len()));
            let cmp = |x: usize, y: usize| idx.compare(shadow[x], shadow[y]).unwrap();
            prop_assert_eq!(cmp(i, j), i.cmp(&j));
            prop_assert_eq!(cmp(i, j), cmp(j, i).reverse());
            if cmp(i, j) == Ordering::Less && cmp(j, k) == Ordering::Less {
                prop_assert_eq!(cmp(i, k), Ordering::Less);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn filter_matches_naive(w in 3usize..60, h in 3usize..60, r in 1usize..8, levels in 1u16..300, seed in any::<u64>()) {
        prop_assume!(2 * r < w.min(h));
        let img = range_median::datagen::random_image(w, h, levels, seed);
        let (fast, _) = filter(&img, r, Parallelism::default()).unwrap();
        prop_assert_eq!(fast, naive_filter(&img, r).unwrap());
    }
}

#[test]
fn filter_matches_naive_on_large_images() {
    for (seed, r) in [(1u64, 7usize), (2, 4), (3, 1)] {
        let img = range_median::datagen::random_image(128, 128, 255, seed);
        let (fast, _) = filter(&img, r, Parallelism::default()).unwrap();
        assert_eq!(fast, naive_filter(&img, r).unwrap(), "r={r}");
    }
    let flat = GrayImage::filled(128, 128, 255, 200).unwrap();
    assert_eq!(filter(&flat, 7, Parallelism::default()).unwrap().0, flat);
}

#[test]
fn eager_builds_are_independent_of_parallelism() {
    let values = range_median::datagen::random_ints(5000, 100, 8);
    let build = |par| {
        let mut c = CascadeTree::new(&values).unwrap();
        c.build_eager(par);
        let mut d = CompactTree::new(&values).unwrap();
        d.build_eager(par);
        (c.stats().clone(), d.stats().clone(), d.space_report())
    };
    assert_eq!(build(Parallelism::Sequential), build(Parallelism::Parallel));
}
