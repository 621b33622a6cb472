use maxdir::bmo::*;
use num_complex::Complex64;
use proptest::prelude::*;

mod common;
use common::{brute_product_size, haar_delta12_oracle, random_field, sb_oracle, union_by_cells};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn size_matches_subset_enumeration(seed in 0u64..100_000, count in 1usize..=10) {
        let b = ProductCoefficients::random(seed, count, 3);
        let s = b.product_size().unwrap();
        prop_assert!(s.exact);
        let want = brute_product_size(&b, 3);
        prop_assert!((s.value - want).abs() <= 1e-12 * want, "{} vs {}", s.value, want);
        let sub = b.subfamily(&s.witness);
        let m: f64 = sub.entries().iter().map(|(_, c)| c.norm_sqr()).sum();
        let area = union_by_cells(b.entries(), &s.witness, 3);
        prop_assert!(((m / area).sqrt() - s.value).abs() <= 1e-12 * s.value);
    }

    #[test]
    fn shadow_matches_cells(seed in 0u64..100_000, count in 1usize..=20) {
        let b = ProductCoefficients::random(seed, count, 3);
        let all: Vec<usize> = (0..b.len()).collect();
        prop_assert_eq!(b.shadow_area(&all).unwrap(), union_by_cells(b.entries(), &all, 3));
    }

    #[test]
    fn size_is_homogeneous(seed in 0u64..100_000, t in 0.1f64..10.0) {
        let b = ProductCoefficients::random(seed, 6, 2);
        let a = b.product_size().unwrap().value;
        let c = b.scaled(t).product_size().unwrap().value;
        prop_assert!((c - t * a).abs() <= 1e-12 * c);
    }
}

#[test]
fn large_family_estimate_is_a_lower_bound_of_its_witness() {
    let b = ProductCoefficients::random(4, 40, 3);
    let s = b.product_size().unwrap();
    assert!(!s.exact);
    let all: Vec<usize> = (0..b.len()).collect();
    let mass: f64 = b.entries().iter().map(|(_, c)| c.norm_sqr()).sum();
    assert!(s.value >= (mass / b.shadow_area(&all).unwrap()).sqrt());
    for (k, (r, c)) in b.entries().iter().enumerate() {
        assert!(s.value >= c.norm() / r.area().sqrt(), "singleton {k}");
    }
    let m: f64 = s.witness.iter().map(|&i| b.entries()[i].1.norm_sqr()).sum();
    assert!(((m / b.shadow_area(&s.witness).unwrap()).sqrt() - s.value).abs() < 1e-12);
}

#[test]
fn delta12_matches_explicit_haar_system() {
    for (n, side, seed) in [(8, 1.0, 1), (8, 4.0, 2), (16, 2.0, 3)] {
        let f = random_field(n, side, seed);
        let fast = haar_delta12(&f);
        let slow = haar_delta12_oracle(&f);
        for (a, b) in fast.data().iter().zip(&slow) {
            assert!((a.re - b).abs() < 1e-10);
        }
    }
}

#[test]
fn delta12_parseval() {
    let f = random_field(64, 2.0, 9);
    let d = haar_delta12(&f);
    let lhs: f64 = d.data().iter().map(|z| z.re * z.re).sum::<f64>() * f.cell_area();
    let rhs = f.remove_mean().norm_l2().powi(2);
    assert!((lhs - rhs).abs() < 1e-10 * rhs);
}

#[test]
fn delta1_is_one_parameter_parseval() {
    let f = random_field(32, 1.0, 2);
    let row: Vec<Complex64> = f.data()[..32].to_vec();
    let d = haar_delta1(&row, 1.0).unwrap();
    let mean = row.iter().sum::<Complex64>() / 32.0;
    let lhs: f64 = d.iter().map(|x| x * x).sum::<f64>() / 32.0;
    let rhs: f64 = row.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / 32.0;
    assert!((lhs - rhs).abs() < 1e-12);
    assert!(haar_delta1(&row[..12], 1.0).is_err());
}

#[test]
fn sb_matches_membership_sum() {
    for seed in 0..10 {
        let b = ProductCoefficients::random(seed, 12, 3);
        let raster = Raster { n: 16, log2_side: 0 };
        let fast = b.sb_square_function(raster).unwrap();
        let slow = sb_oracle(b.entries(), 16, 1.0);
        for (a, x) in fast.data().iter().zip(&slow) {
            assert!((a.re - x).abs() < 1e-10);
        }
    }
}

#[test]
fn haar_square_function_of_packets_is_sb() {
    // Distinct unshifted rectangles give orthonormal tensor Haar packets,
    // so the Haar square function of B reproduces SB exactly.
    for seed in 0..10 {
        let b = ProductCoefficients::random(seed, 15, 3);
        let raster = Raster { n: 16, log2_side: 0 };
        let c = b.domination_constant(raster).unwrap();
        assert!((c - 1.0).abs() < 1e-9, "{c}");
        let field = b.packet_field(raster).unwrap();
        let d = haar_delta12(&field);
        let sb = b.sb_square_function(raster).unwrap();
        assert!(d.max_abs_diff(&sb) < 1e-10);
    }
}

#[test]
fn jn_profile_decays() {
    let mut positive = 0;
    for seed in 0..20 {
        let b = ProductCoefficients::random(seed, 30, 4);
        let size = b.product_size().unwrap().value;
        let p = b.scaled(1.0 / size).jn_level_set_profile(Raster { n: 32, log2_side: 0 }, 16).unwrap();
        assert!((p.size - 1.0).abs() < 1e-12);
        assert!(p.fractions.windows(2).all(|w| w[1] <= w[0]));
        assert!(p.fractions[0] <= 1.0);
        if p.decay_rate > 0.0 {
            positive += 1;
        }
    }
    assert!(positive >= 18, "{positive}");
}

#[test]
fn json_and_errors() {
    let b = ProductCoefficients::random(5, 9, 3);
    let back = ProductCoefficients::from_json(&b.to_json().unwrap()).unwrap();
    assert_eq!(b, back);
    assert!(ProductCoefficients::from_json(r#"{"rects":[{"shift":0,"i":[0,0],"j":[0,0],"b":[1,0],"x":1}]}"#).is_err());
    assert!(ProductCoefficients::from_json(r#"{"rects":[{"shift":3,"i":[0,0],"j":[0,0],"b":[1,0]}]}"#).is_err());
    let coarse = Raster { n: 4, log2_side: 0 };
    assert!(b.packet_field(coarse).is_err());
    let empty = ProductCoefficients::new(vec![]).unwrap();
    assert_eq!(empty.product_size().unwrap().value, 0.0);
}
