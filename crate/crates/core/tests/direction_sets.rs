use std::collections::BTreeSet;

use maxdir::directions::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

mod common;
use common::brute_longest;

/// Quadratic DP over distances sorted ascending.
fn dp_longest(set: &DirectionSet, node: &BigRational) -> usize {
    let mut d: Vec<BigRational> = set
        .dirs()
        .iter()
        .map(|v| circular_distance(v.angle(), node))
        .collect();
    d.sort();
    let two = BigRational::from_integer(BigInt::from(2));
    let mut best = vec![1usize; d.len()];
    for i in 0..d.len() {
        for j in 0..i {
            if d[i] >= &d[j] * &two {
                best[i] = best[i].max(best[j] + 1);
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

fn small_set() -> impl Strategy<Value = DirectionSet> {
    (2i64..40, prop::collection::btree_set(0i64..40, 1..10)).prop_filter_map(
        "numerators below denominator",
        |(q, nums)| {
            let angles: BTreeSet<BigRational> =
                nums.into_iter().map(|p| wrap_turns(&ratio(p, q))).collect();
            DirectionSet::custom(angles).ok()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_matches_oracles(set in small_set(), res in 1u32..9) {
        let cands: Vec<BigRational> = node_candidates(&set, res).into_iter().collect();
        let est = longest_lacunary_with_candidates(&set, &cands);
        prop_assert!(est.certificate.verify(&set));
        let brute = cands.iter().map(|c| brute_longest(&set, c)).max().unwrap();
        let dp = cands.iter().map(|c| dp_longest(&set, c)).max().unwrap();
        prop_assert_eq!(est.length, brute);
        prop_assert_eq!(est.length, dp);
    }

    #[test]
    fn estimate_monotone_in_candidates(set in small_set(), extra in prop::collection::vec((0i64..17, 1i64..17), 0..6)) {
        let base: Vec<BigRational> = node_candidates(&set, 4).into_iter().collect();
        let mut more = base.clone();
        more.extend(extra.into_iter().map(|(p, q)| wrap_turns(&ratio(p, q))));
        let a = longest_lacunary_with_candidates(&set, &base).length;
        let b = longest_lacunary_with_candidates(&set, &more).length;
        prop_assert!(b >= a);
    }

    #[test]
    fn extraction_is_valid_and_long_enough(set in small_set()) {
        prop_assume!(set.len() >= 2);
        let c = extract_lacunary_subsequence(&set).unwrap();
        prop_assert!(c.verify(&set));
        let bound = ((set.len() as f64).log2() / 3.0).floor() as usize;
        prop_assert!(c.len() >= bound.max(2));
    }

    #[test]
    fn lacunary_generator_is_lacunary(p in 1i64..4, q in 2i64..9, n in 1usize..30, a in 0i64..7, b in 1i64..7) {
        prop_assume!(2 * p <= q);
        let node = wrap_turns(&ratio(a, b));
        let set = gen_lacunary(&ratio(p, q), n, &node).unwrap();
        let mut by_dist: Vec<Direction> = set.dirs().to_vec();
        by_dist.sort_by(|x, y| circular_distance(y.angle(), &node).cmp(&circular_distance(x.angle(), &node)));
        prop_assert!(is_lacunary_with_node(&by_dist, &node));
    }

    #[test]
    fn rotation_preserves_lacunarity(set in small_set()) {
        let est = longest_lacunary_estimate(&set, 8);
        let rot = set.rotate_quarter();
        let node = wrap_turns(&(est.certificate.node.clone() + ratio(1, 4)));
        let seq: Vec<Direction> = est
            .certificate
            .subsequence
            .iter()
            .map(|&i| set.dirs()[i].rotate_quarter())
            .collect();
        prop_assert!(is_lacunary_with_node(&seq, &node));
        prop_assert_eq!(rot.len(), set.len());
    }

    #[test]
    fn json_round_trip(set in small_set()) {
        let back = DirectionSet::from_json(&set.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, set);
    }
}

#[test]
fn extraction_lower_bound_on_large_families() {
    for set in [
        gen_uniform(4096).unwrap(),
        gen_cantor(3, 10).unwrap(),
        gen_lacunary(&ratio(1, 3), 200, &ratio(1, 7)).unwrap(),
    ] {
        let c = extract_lacunary_subsequence(&set).unwrap();
        assert!(c.verify(&set));
        let bound = ((set.len() as f64).log2() / 3.0).floor() as usize;
        assert!(c.len() >= bound, "{} < {bound}", c.len());
    }
}

#[test]
fn random_sets_are_seeded() {
    let a = maxdir::directions::gen_random(50, 7).unwrap();
    assert_eq!(a.len(), 50);
    assert_eq!(a, maxdir::directions::gen_random(50, 7).unwrap());
    assert_ne!(a, maxdir::directions::gen_random(50, 8).unwrap());
    assert!(maxdir::directions::gen_random(0, 1).is_err());
}
