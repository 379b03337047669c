mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wcounts_core::heights::{
    arch_exponents, global_height, integrality_delta, local_elementary_valuations, singular_values,
    PointRep, DEFAULT_ARCH_TOL,
};
use wcounts_core::picard::{BoundarySelection, DivisorVector};
use wcounts_core::place::Place;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn lam_for(n: usize, seed: u64) -> DivisorVector {
    let c: Vec<BigRational> = (0..n - 1)
        .map(|i| BigRational::new(BigInt::from(1 + ((seed >> (4 * i)) % 4) as i64), BigInt::from(1 + ((seed >> (4 * i + 2)) % 2) as i64)))
        .collect();
    DivisorVector::new(c)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    // Finite parts are bi-invariant under GL_n(Z), which lies in every
    // GL_n(Z_p); the archimedean part only under GL_n(Z) meet O(n), the
    // signed permutations.
    #[test]
    fn height_is_well_defined(n in 2usize..4, seed in any::<u64>(), scale in prop::sample::select(vec![-6i64, -1, 2, 35])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_primitive(&mut rng, n, 30);
        let lam = lam_for(n, seed);
        let h0 = global_height(&PointRep::new(n, m.clone()).unwrap(), &lam).unwrap();

        let u = common::random_unimodular(&mut rng, n, 6);
        let v = common::random_unimodular(&mut rng, n, 6);
        let umv = common::matmul(n, &common::matmul(n, &u, &m), &v);
        let h1 = global_height(&PointRep::new(n, umv).unwrap(), &lam).unwrap();
        prop_assert_eq!(&h0.finite_exponents, &h1.finite_exponents);

        let u = common::random_signed_permutation(&mut rng, n);
        let v = common::random_signed_permutation(&mut rng, n);
        let umv = common::matmul(n, &common::matmul(n, &u, &m), &v);
        let h2 = global_height(&PointRep::new(n, umv).unwrap(), &lam).unwrap();
        prop_assert_eq!(&h0.finite_exponents, &h2.finite_exponents);
        prop_assert!(rel(h0.arch(), h2.arch()) < 1e-10, "{} vs {}", h0.arch(), h2.arch());

        let scaled: Vec<i64> = m.iter().map(|x| x * scale).collect();
        let h3 = global_height(&PointRep::new(n, scaled).unwrap(), &lam).unwrap();
        prop_assert_eq!(&h0.finite_exponents, &h3.finite_exponents);
        prop_assert!(rel(h0.arch(), h3.arch()) < 1e-10);
    }

    #[test]
    fn smith_matches_determinantal_divisors(n in 2usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_primitive(&mut rng, n, 40);
        let d = common::elementary_divisors(n, &m);
        let p = PointRep::new(n, m).unwrap();
        for q in [2u64, 3, 5, 7] {
            let got = local_elementary_valuations(&p, q);
            let want: Vec<u32> = d.iter().map(|&x| {
                let mut x = x.abs();
                let mut v = 0;
                while x % q as i128 == 0 { x /= q as i128; v += 1; }
                v
            }).collect();
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn singular_values_match_svd(n in 2usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_primitive(&mut rng, n, 1000);
        let want = common::singular_values(n, &m);
        let got = singular_values(&PointRep::new(n, m).unwrap(), DEFAULT_ARCH_TOL).unwrap();
        for (g, w) in got.iter().zip(&want) {
            prop_assert!(rel(*g, *w) < 1e-9, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn height_matches_oracle(n in 2usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_primitive(&mut rng, n, 12);
        let lam = vec![1i64 + (seed % 3) as i64; n - 1];
        let h = global_height(&PointRep::new(n, m.clone()).unwrap(), &DivisorVector::from_ints(&lam)).unwrap();
        let lamf: Vec<f64> = lam.iter().map(|&x| x as f64).collect();
        let (want, _) = common::oracle_height(n, &m, &lamf, &[], &[]);
        prop_assert!(rel(h.total(), want) < 1e-9);
    }

    #[test]
    fn integrality_matches_oracle(n in 2usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_primitive(&mut rng, n, 6);
        let p = PointRep::new(n, m.clone()).unwrap();
        let a_d: Vec<usize> = (0..n - 1).filter(|i| seed >> i & 1 == 1).collect();
        let sel = BoundarySelection::new(n - 1, a_d.iter().copied()).unwrap();
        for s in [vec![], vec![2u64], vec![2, 3]] {
            let mut places = vec![Place::Infinite];
            places.extend(s.iter().map(|&q| Place::Prime(q)));
            let (_, want) = common::oracle_height(n, &m, &vec![1.0; n - 1], &a_d, &s);
            prop_assert_eq!(integrality_delta(&p, &sel, &places).unwrap(), want);
        }
    }
}

#[test]
fn general_unimodular_moves_the_arch_part() {
    let id = PointRep::new(2, vec![1, 0, 0, 1]).unwrap();
    let shear = PointRep::new(2, vec![1, 1, 0, 1]).unwrap();
    let lam = DivisorVector::from_ints(&[1]);
    assert_eq!(global_height(&id, &lam).unwrap().total(), 1.0);
    let h = global_height(&shear, &lam).unwrap().total();
    assert!(rel(h, (3.0 + 5f64.sqrt()) / 2.0) < 1e-14);
}

#[test]
fn pgl2_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lam = DivisorVector::from_ints(&[1]);
    for _ in 0..2000 {
        let m = common::random_primitive(&mut rng, 2, 200);
        let det = common::det(2, &m).abs();
        let h = global_height(&PointRep::new(2, m.clone()).unwrap(), &lam).unwrap();
        assert_eq!(h.finite_exact().unwrap(), BigRational::from_integer(BigInt::from(det)));
        let s = common::singular_values(2, &m);
        assert!(rel(h.total(), s[0] * s[0]) < 1e-10);
    }
}

#[test]
fn large_entries_use_exact_arithmetic() {
    // det = 2^62 * 3, beyond the fast modulus
    let m = vec![1i64 << 31, 0, 0, 3i64 << 31];
    let p = PointRep::new(2, m).unwrap();
    assert_eq!(p.entries(), &[1, 0, 0, 3]);
    let m = vec![1, 1i64 << 40, 0, 3i64 << 40];
    let p = PointRep::new(2, m).unwrap();
    assert_eq!(local_elementary_valuations(&p, 2), vec![0, 40]);
    assert_eq!(local_elementary_valuations(&p, 3), vec![0, 1]);
    let e = arch_exponents(&p, DEFAULT_ARCH_TOL).unwrap();
    let s = common::singular_values(2, p.entries());
    assert!(rel(e[0], (s[0] / s[1]).ln()) < 1e-9);
}
