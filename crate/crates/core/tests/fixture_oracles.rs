mod common;

use std::cmp::Ordering;

use genlab::fixtures::{embed_countable_class, l2_case1, l2_case2, prime_reals, weighted, EmbeddingSpec, L2Case1, L2Case2};
use genlab::hypothesis::{ClassOracle, ExplicitClass, Labeled, UusResult};
use genlab::metric_core::{dist_cmp, in_ball, Point, Scalar};
use rand::seq::IndexedRandom;
use rand::Rng;

const QUERIES: usize = 250;

/// Random consistency, closure membership and ERM queries drawn from `universe`.
fn agree(name: &str, oracle: &dyn ClassOracle, truncated: &ExplicitClass, universe: &[Point], seed: u64) {
    let mut rng = common::rng(seed);
    for i in 0..QUERIES {
        let n = rng.random_range(1..=3);
        let sample: Vec<Point> = (0..n).map(|_| universe.choose(&mut rng).unwrap().clone()).collect();
        assert_eq!(oracle.consistent(&sample), truncated.consistent(&sample), "{name} #{i} consistency {sample:?}");
        let x = universe.choose(&mut rng).unwrap();
        assert_eq!(
            oracle.closure_contains(&sample, x).unwrap(),
            truncated.closure_contains(&sample, x).unwrap(),
            "{name} #{i} closure {sample:?} {x}"
        );
        let m = rng.random_range(1..=5);
        let labeled: Vec<Labeled> =
            (0..m).map(|_| (universe.choose(&mut rng).unwrap().clone(), rng.random_bool(0.5))).collect();
        assert_eq!(oracle.erm(&labeled).unwrap(), truncated.erm(&labeled).unwrap(), "{name} #{i} erm {labeled:?}");
    }
}

#[test]
fn prime_reals_oracle_matches_truncation() {
    let (t, u) = prime_reals::truncation(1, 12, &[3, 5, 7, 11, 13, 17]).unwrap();
    agree("prime_reals", &prime_reals::PrimeReals::new(500), &t, &u, 1);
}

#[test]
fn l2_case1_oracle_matches_truncation() {
    let half = Scalar::new(1, 2);
    let (t, u) = l2_case1::truncation(3).unwrap();
    agree("l2_case1", &L2Case1::new(&Scalar::one(), &half, &half).unwrap(), &t, &u, 2);
}

#[test]
fn l2_case2_oracle_matches_truncation() {
    let o = L2Case2::new(&Scalar::one(), &Scalar::new(3, 10), &Scalar::new(6, 10), &Scalar::new(1, 2)).unwrap();
    let (t, u) = l2_case2::truncation().unwrap();
    agree("l2_case2", &o, &t, &u, 3);
}

#[test]
fn weighted_oracle_matches_truncation_under_both_metrics() {
    for (seed, w) in [(4, false), (5, true)] {
        let (t, u) = weighted::truncation(w).unwrap();
        agree("weighted", &weighted::WeightedLevels::new(w), &t, &u, seed);
    }
}

fn assert_separated(name: &str, oracle: &dyn ClassOracle, pts: &[Point], radius: &Scalar) {
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            let d = dist_cmp(oracle.metric(), p, q, radius).unwrap();
            assert_eq!(d, Ordering::Greater, "{name}: {p} and {q} within {radius}");
        }
    }
}

#[test]
fn unbounded_families_are_separated() {
    let one = Scalar::one();
    let two = Scalar::int(2);

    let pr = prime_reals::PrimeReals::new(500);
    let powers: Vec<Point> = (1..8u32).map(|n| Point::real(3i64.pow(n))).collect();
    assert_separated("prime_reals", &pr, &powers, &two);
    assert!(pr.uus(&one).is_satisfied());

    let half = Scalar::new(1, 2);
    let c1 = L2Case1::new(&one, &half, &half).unwrap();
    let us: Vec<Point> = (1..10).map(|k| c1.u(k)).collect();
    assert_separated("l2_case1", &c1, &us, &two);
    assert!(c1.uus(&one).is_satisfied());

    let c2 = L2Case2::new(&one, &Scalar::new(3, 10), &Scalar::new(6, 10), &half).unwrap();
    let us: Vec<Point> = (2..10).map(|k| c2.u(k)).collect();
    assert_separated("l2_case2", &c2, &us, &two);
    assert!(c2.uus(&one).is_satisfied());

    // level-1 odd points are 1 apart: only the internal witness applies at r = 3/5
    let tau = Scalar::new(3, 5);
    let w = weighted::WeightedLevels::new(true);
    let odd: Vec<Point> = [3u64, 5, 7, 9, 11].map(|k| weighted::level_point(1, k)).to_vec();
    assert_separated("weighted", &w, &odd, &tau);
    assert!(matches!(w.uus(&tau), UusResult::Satisfied(_)));

    let src = genlab::fixtures::embedding::demo_source().unwrap();
    let real = embed_countable_class(&src, &half, &EmbeddingSpec::real(2)).unwrap();
    let pts: Vec<Point> = (0..8).map(|j| genlab::fixtures::embed_point(&EmbeddingSpec::real(2), j)).collect();
    assert_separated("embedding", &real, &pts, &one);
    assert!(real.uus(&half).is_satisfied());
}

#[test]
fn boundary_pairs_are_inside_closed_balls() {
    let one = Scalar::one();
    let pr = prime_reals::PrimeReals::new(500);
    assert!(in_ball(pr.metric(), &Point::real(27), &one, &Point::real(26)).unwrap());

    let c2 = L2Case2::new(&one, &Scalar::new(3, 10), &Scalar::new(6, 10), &Scalar::new(1, 2)).unwrap();
    assert!(in_ball(c2.metric(), &c2.g(4), &Scalar::new(1, 2), &c2.g(16)).unwrap());

    let w = weighted::WeightedLevels::new(true);
    for m in 1..=4u32 {
        let r = Scalar::inv_pow2(m);
        let (a, b) = (weighted::level_point(m, 6), weighted::level_point(m, 12));
        assert_eq!(dist_cmp(w.metric(), &a, &b, &r).unwrap(), Ordering::Equal);
    }
}
