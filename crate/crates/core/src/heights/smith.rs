//! Local Smith normal form at a prime `p`.
//!
//! Elementary divisor valuations are computed by elimination over
//! `Z / p^N` with `N = v_p(det) + 1`: every elementary divisor has valuation
//! at most `v_p(det) < N`, so the truncation loses nothing. Each step pivots
//! on an entry of minimal valuation and rescales the pivot row by a p-adic
//! unit.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::point::PointRep;

fn valuation<T: Integer + Clone>(x: &T, p: &T, cap: u32) -> u32 {
    if x.is_zero() {
        return cap;
    }
    let mut x = x.clone();
    let mut v = 0;
    while v < cap {
        let (q, r) = x.div_rem(p);
        if !r.is_zero() {
            break;
        }
        x = q;
        v += 1;
    }
    v
}

fn mod_inverse<T: Integer + Clone + Signed>(u: &T, m: &T) -> T {
    let e = u.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

fn local_valuations_generic<T>(n: usize, entries: Vec<T>, p: &T, cap: u32) -> Vec<u32>
where
    T: Integer + Clone + Signed,
{
    let mut m = T::one();
    for _ in 0..cap {
        m = m * p.clone();
    }
    let mut a: Vec<T> = entries.into_iter().map(|x| x.mod_floor(&m)).collect();
    let mut vals = Vec::with_capacity(n);
    for k in 0..n {
        let mut best = (cap, k, k);
        for i in k..n {
            for j in k..n {
                let v = valuation(&a[i * n + j], p, cap);
                if v < best.0 {
                    best = (v, i, j);
                }
            }
        }
        let (v, pi, pj) = best;
        if v == cap {
            vals.extend(std::iter::repeat_n(cap, n - k));
            break;
        }
        if pi != k {
            for j in 0..n {
                a.swap(k * n + j, pi * n + j);
            }
        }
        if pj != k {
            for i in 0..n {
                a.swap(i * n + k, i * n + pj);
            }
        }
        let mut pv = T::one();
        for _ in 0..v {
            pv = pv * p.clone();
        }
        let unit = a[k * n + k].div_floor(&pv);
        let inv = mod_inverse(&unit, &m);
        for j in k..n {
            a[k * n + j] = (a[k * n + j].clone() * inv.clone()).mod_floor(&m);
        }
        for i in k + 1..n {
            let f = a[i * n + k].div_floor(&pv);
            if f.is_zero() {
                continue;
            }
            for j in k..n {
                let t = a[i * n + j].clone() - f.clone() * a[k * n + j].clone();
                a[i * n + j] = t.mod_floor(&m);
            }
        }
        // column k below the pivot is now zero, so only row k changes here
        for j in k + 1..n {
            let f = a[k * n + j].div_floor(&pv);
            a[k * n + j] = (a[k * n + j].clone() - f * pv.clone()).mod_floor(&m);
        }
        vals.push(v);
    }
    vals
}

/// `v_p` of the elementary divisors `d_1 | ... | d_n`, ascending.
pub fn local_elementary_valuations(point: &PointRep, p: u64) -> Vec<u32> {
    let n = point.n();
    let det = point.determinant();
    let vdet = valuation(&det, &BigInt::from(p), u32::MAX);
    let cap = vdet + 1;
    let fits = (p as f64).ln() * cap as f64 <= 61.0 * std::f64::consts::LN_2;
    if fits {
        let entries = point.entries().iter().map(|&x| x as i128).collect();
        local_valuations_generic::<i128>(n, entries, &(p as i128), cap)
    } else {
        let entries = point.entries().iter().map(|&x| BigInt::from(x)).collect();
        local_valuations_generic::<BigInt>(n, entries, &BigInt::from(p), cap)
    }
}

/// Gaps `v_p(d_{i+1}) - v_p(d_i)`, one per simple root.
pub fn smith_gaps(point: &PointRep, p: u64) -> Vec<i64> {
    let v = local_elementary_valuations(point, p);
    v.windows(2).map(|w| w[1] as i64 - w[0] as i64).collect()
}

/// Elementary divisors over `Z` from determinantal divisors (gcd of all
/// `k x k` minors). Exponential in `n`; meant for small matrices and tests.
pub fn elementary_divisors_by_minors(point: &PointRep) -> Vec<BigInt> {
    let n = point.n();
    let mut det_divisors = vec![BigInt::one()];
    for k in 1..=n {
        let mut g = BigInt::zero();
        for rows in subsets(n, k) {
            for cols in subsets(n, k) {
                let mut sub: Vec<BigInt> = Vec::with_capacity(k * k);
                for &r in &rows {
                    for &c in &cols {
                        sub.push(BigInt::from(point.entry(r, c)));
                    }
                }
                g = g.gcd(&super::point::bareiss(k, &mut sub));
            }
        }
        det_divisors.push(g);
    }
    det_divisors
        .windows(2)
        .map(|w| &w[1] / &w[0])
        .collect()
}

pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

#[cfg(test)]
fn big_valuation(x: &BigInt, p: u64) -> u32 {
    valuation(x, &BigInt::from(p), u32::MAX)
}
