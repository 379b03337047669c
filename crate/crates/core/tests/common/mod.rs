//! Brute-force oracles shared by the integration tests. Nothing here calls
//! the library's height or Smith-form code.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_integer::Integer;
use rand::Rng;

pub fn gcd_all(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

fn det_i128(n: usize, m: &[i64]) -> i128 {
    match n {
        1 => m[0] as i128,
        2 => m[0] as i128 * m[3] as i128 - m[1] as i128 * m[2] as i128,
        _ => (0..n)
            .map(|j| {
                let minor: Vec<i64> = (1..n)
                    .flat_map(|r| (0..n).filter(move |&c| c != j).map(move |c| (r, c)))
                    .map(|(r, c)| m[r * n + c])
                    .collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[j] as i128 * det_i128(n - 1, &minor)
            })
            .sum(),
    }
}

pub fn det(n: usize, m: &[i64]) -> i128 {
    det_i128(n, m)
}

fn combos(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 0..n {
        for rest in combos(n, k - 1) {
            if rest.first().is_none_or(|&r| r > first) {
                let mut v = vec![first];
                v.extend(rest);
                out.push(v);
            }
        }
    }
    out
}

/// Elementary divisors `d_1 | d_2 | ... | d_n` from determinantal divisors:
/// `D_k` is the gcd of all `k x k` minors and `d_k = D_k / D_(k-1)`.
pub fn elementary_divisors(n: usize, m: &[i64]) -> Vec<i128> {
    let mut dd = vec![1i128];
    for k in 1..=n {
        let mut g = 0i128;
        for rows in combos(n, k) {
            for cols in combos(n, k) {
                let sub: Vec<i64> = rows
                    .iter()
                    .flat_map(|&r| cols.iter().map(move |&c| m[r * n + c]))
                    .collect();
                g = g.gcd(&det_i128(k, &sub));
            }
        }
        dd.push(g);
    }
    (1..=n).map(|k| dd[k] / dd[k - 1]).collect()
}

/// Singular values, descending, by nalgebra's SVD.
pub fn singular_values(n: usize, m: &[i64]) -> Vec<f64> {
    let a = DMatrix::from_row_slice(n, n, &m.iter().map(|&x| x as f64).collect::<Vec<_>>());
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

fn strip(mut x: i128, primes: &[u64]) -> i128 {
    x = x.abs();
    for &p in primes {
        let p = p as i128;
        while x % p == 0 {
            x /= p;
        }
    }
    x
}

/// The height `prod_i ((d_(i+1)/d_i) (s_i/s_(i+1)))^lam_i` and the
/// integrality flag: for `i` in `a_d`, `d_(i+1)/d_i` is an S-unit.
pub fn oracle_height(n: usize, m: &[i64], lam: &[f64], a_d: &[usize], s_primes: &[u64]) -> (f64, bool) {
    let d = elementary_divisors(n, m);
    let delta = a_d.iter().all(|&i| strip(d[i + 1] / d[i], s_primes) == 1);
    let h = if n == 2 {
        // s_1^2 = (F + sqrt(F^2 - 4 det^2)) / 2; s_1/s_2 = s_1^2/|det|
        let f: f64 = m.iter().map(|&x| (x * x) as f64).sum();
        let u = det(2, m).abs() as f64;
        let s1sq = 0.5 * (f + (f * f - 4.0 * u * u).max(0.0).sqrt());
        ((d[1] / d[0]) as f64 * s1sq / u).powf(lam[0])
    } else {
        let s = singular_values(n, m);
        (0..n - 1)
            .map(|i| ((d[i + 1] / d[i]) as f64 * s[i] / s[i + 1]).powf(lam[i]))
            .product()
    };
    (h, delta)
}

pub fn is_normalized(m: &[i64]) -> bool {
    gcd_all(m) == 1 && m.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

/// Every normalized nonsingular matrix with entries in `[-e, e]` that is
/// integral and has height at most `b` (with the same relative guard as the
/// enumerator), sorted lexicographically.
pub fn box_scan(
    n: usize,
    lam: &[f64],
    a_d: &[usize],
    s_primes: &[u64],
    b: f64,
    e: i64,
    guard: f64,
) -> Vec<Vec<i64>> {
    let total = (2 * e + 1).pow((n * n) as u32);
    let mut out = Vec::new();
    let mut m = vec![0i64; n * n];
    for code in 0..total {
        let mut c = code;
        for x in m.iter_mut() {
            *x = c % (2 * e + 1) - e;
            c /= 2 * e + 1;
        }
        if !is_normalized(&m) || det(n, &m) == 0 {
            continue;
        }
        // cheap integrality prefilter for the full PGL_2 boundary
        if n == 2 && a_d == [0] && strip(det(2, &m), s_primes) != 1 {
            continue;
        }
        let (h, delta) = oracle_height(n, &m, lam, a_d, s_primes);
        if delta && (h <= b || (h - b).abs() <= guard * b.max(1.0)) {
            out.push(m.clone());
        }
    }
    out.sort();
    out
}

pub fn random_primitive<R: Rng>(rng: &mut R, n: usize, range: i64) -> Vec<i64> {
    loop {
        let m: Vec<i64> = (0..n * n).map(|_| rng.gen_range(-range..=range)).collect();
        if gcd_all(&m) == 1 && det(n, &m) != 0 {
            return m;
        }
    }
}

/// A random product of elementary matrices and signed permutations.
pub fn random_unimodular<R: Rng>(rng: &mut R, n: usize, steps: usize) -> Vec<i64> {
    let mut u: Vec<i64> = (0..n * n).map(|k| (k / n == k % n) as i64).collect();
    for _ in 0..steps {
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        match rng.gen_range(0..3) {
            0 => {
                let c = rng.gen_range(-2..=2);
                for k in 0..n {
                    u[i * n + k] += c * u[j * n + k];
                }
            }
            1 => {
                for k in 0..n {
                    u.swap(i * n + k, j * n + k);
                }
            }
            _ => {
                for k in 0..n {
                    u[i * n + k] = -u[i * n + k];
                }
            }
        }
    }
    u
}

/// A random signed permutation matrix: the integral points of `O(n)`.
pub fn random_signed_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<i64> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let mut u = vec![0i64; n * n];
    for (i, &j) in perm.iter().enumerate() {
        u[i * n + j] = if rng.gen_bool(0.5) { 1 } else { -1 };
    }
    u
}

pub fn matmul(n: usize, a: &[i64], b: &[i64]) -> Vec<i64> {
    (0..n * n)
        .map(|k| (0..n).map(|t| a[(k / n) * n + t] * b[t * n + k % n]).sum())
        .collect()
}
