mod common;

use proptest::prelude::*;
use wcounts_core::enumerate::{
    entry_bound, enumerate_auto, enumerate_bounded, enumerate_pgl2_columns,
    enumerate_sl2_specialized, CountQuery, EnumOptions,
};
use wcounts_core::picard::{BoundarySelection, DivisorVector};
use wcounts_core::place::Place;

fn listing() -> EnumOptions {
    EnumOptions {
        list_points: true,
        ..Default::default()
    }
}

fn points(s: &wcounts_core::enumerate::CountSeries) -> Vec<Vec<i64>> {
    s.points.as_ref().unwrap().iter().map(|p| p.entries.clone()).collect()
}

fn query(n: usize, lam: &[i64], a_d: &[usize], places: &[Place], b: Vec<f64>) -> CountQuery {
    CountQuery::new(
        n,
        DivisorVector::from_ints(lam),
        BoundarySelection::new(n - 1, a_d.iter().copied()).unwrap(),
        places,
        b,
    )
    .unwrap()
}

fn primes(places: &[Place]) -> Vec<u64> {
    places.iter().filter_map(|p| p.prime()).collect()
}

fn check_against_box(n: usize, lam: &[i64], a_d: &[usize], places: &[Place], b: f64) {
    let q = query(n, lam, a_d, places, vec![b]);
    let got = enumerate_auto(&q, &listing()).unwrap();
    let lamf: Vec<f64> = lam.iter().map(|&x| x as f64).collect();
    let want = common::box_scan(n, &lamf, a_d, &primes(places), b, entry_bound(&q) as i64, 1e-9);
    assert_eq!(points(&got), want, "n={n} lam={lam:?} A_D={a_d:?} B={b}");
    assert_eq!(got.counts[0] as usize, want.len());
}

#[test]
fn sl2_strategies_match_box_scan() {
    let inf = [Place::Infinite];
    let q = query(2, &[1], &[0], &inf, vec![100.0]);
    let a = enumerate_bounded(&q, &listing()).unwrap();
    let b = enumerate_pgl2_columns(&q, &listing()).unwrap();
    let c = enumerate_sl2_specialized(vec![100.0], &inf, &listing()).unwrap();
    let oracle = common::box_scan(2, &[1.0], &[0], &[], 100.0, 10, 1e-9);
    assert_eq!(points(&a), oracle);
    assert_eq!(points(&b), oracle);
    assert_eq!(points(&c), oracle);
}

#[test]
fn s_units_match_box_scan() {
    check_against_box(2, &[1], &[0], &[Place::Infinite, Place::Prime(2)], 300.0);
    let s = enumerate_sl2_specialized(vec![300.0], &[Place::Infinite, Place::Prime(2)], &listing()).unwrap();
    assert!(points(&s).iter().any(|m| common::det(2, m).abs() == 8));
}

#[test]
fn anticanonical_matches_box_scan() {
    check_against_box(2, &[2], &[], &[Place::Infinite], 1e4);
    check_against_box(2, &[1], &[], &[Place::Infinite, Place::Prime(3)], 60.0);
}

#[test]
fn pgl3_matches_box_scan() {
    // entry bound 2 keeps the box at 5^9 matrices
    check_against_box(3, &[2, 2], &[0, 1], &[Place::Infinite], 20.0);
    check_against_box(3, &[3, 3], &[], &[Place::Infinite], 60.0);
    check_against_box(3, &[2, 3], &[0], &[Place::Infinite, Place::Prime(2)], 20.0);
}

#[test]
fn partition_independence_and_determinism() {
    let q = query(2, &[1], &[0], &[Place::Infinite, Place::Prime(3)], vec![50.0, 200.0, 800.0]);
    let base = enumerate_pgl2_columns(&q, &listing()).unwrap();
    for blocks in [1, 3, 7, 1000] {
        let opts = EnumOptions {
            blocks,
            ..listing()
        };
        let s = enumerate_pgl2_columns(&q, &opts).unwrap();
        assert_eq!(s.counts, base.counts);
        assert_eq!(s.points, base.points);
    }
    let again = enumerate_pgl2_columns(&q, &listing()).unwrap();
    assert_eq!(again.points, base.points);
    assert!(base.counts.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn transpose_symmetry() {
    for (n, lam, a_d, b) in [(2, vec![1], vec![0], 400.0), (2, vec![2], vec![], 2000.0), (3, vec![2, 2], vec![0, 1], 20.0)] {
        let q = query(n, &lam, &a_d, &[Place::Infinite, Place::Prime(2)], vec![b]);
        let pts = points(&enumerate_auto(&q, &listing()).unwrap());
        let mut transposed: Vec<Vec<i64>> = pts
            .iter()
            .map(|m| {
                let t: Vec<i64> = (0..n * n).map(|k| m[(k % n) * n + k / n]).collect();
                let s = if t.iter().find(|&&x| x != 0).unwrap() < &0 { -1 } else { 1 };
                t.iter().map(|x| s * x).collect()
            })
            .collect();
        transposed.sort();
        assert_eq!(transposed, pts);
    }
}

#[test]
fn budget_rejects_without_partial_results() {
    let q = query(2, &[1], &[0], &[Place::Infinite], vec![1e5]);
    let opts = EnumOptions {
        budget: 1000,
        ..Default::default()
    };
    assert!(enumerate_auto(&q, &opts).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    // Matrices just outside the entry box never have height <= B.
    #[test]
    fn entry_bound_is_sound(
        b in 2.0f64..500.0,
        lam in 1i64..4,
        n in 2usize..4,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let q = query(n, &vec![lam; n - 1], &[], &[Place::Infinite], vec![b]);
        let e = entry_bound(&q) as i64;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let mut m = common::random_primitive(&mut rng, n, e + 1);
            let k = rng.gen_range(0..n * n);
            m[k] = if rng.gen_bool(0.5) { e + 1 } else { -(e + 1) };
            if common::det(n, &m) == 0 || common::gcd_all(&m) != 1 {
                continue;
            }
            let (h, _) = common::oracle_height(n, &m, &vec![lam as f64; n - 1], &[], &[]);
            prop_assert!(h > b, "{m:?} has height {h} <= {b} outside E = {e}");
        }
    }
}
