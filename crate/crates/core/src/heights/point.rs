use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of `PGL_n(Q)`: a primitive integer matrix with nonzero
/// determinant whose first nonzero entry (row-major) is positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PointRep {
    n: usize,
    entries: Vec<i64>,
}

impl PointRep {
    /// Validates and normalizes: divides by the gcd of the entries and fixes
    /// the sign. Rejects singular matrices.
    pub fn new(n: usize, entries: Vec<i64>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::InvalidPoint(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                entries.len()
            )));
        }
        if determinant(n, &entries).is_zero() {
            return Err(Error::InvalidPoint("determinant is zero".into()));
        }
        Ok(Self {
            n,
            entries: normalize_entries(&entries),
        })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidPoint("matrix is not square".into()));
        }
        Self::new(n, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.n).map(<[i64]>::to_vec).collect()
    }

    pub fn determinant(&self) -> BigInt {
        determinant(self.n, &self.entries)
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let t = (0..n * n).map(|k| self.entries[(k % n) * n + k / n]).collect();
        Self::new(n, t).expect("transpose of a valid point is valid")
    }
}

impl fmt::Display for PointRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .entries
            .chunks(self.n)
            .map(|r| format!("{r:?}"))
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// True iff the entries are primitive and the first nonzero entry is positive.
pub fn is_normalized(entries: &[i64]) -> bool {
    let first_positive = entries.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0);
    first_positive && entries.iter().fold(0i64, |g, &x| g.gcd(&x)) == 1
}

pub fn normalize_entries(entries: &[i64]) -> Vec<i64> {
    let g = entries.iter().fold(0i64, |g, &x| g.gcd(&x));
    if g == 0 {
        return entries.to_vec();
    }
    let sign = match entries.iter().find(|&&x| x != 0) {
        Some(&x) if x < 0 => -1,
        _ => 1,
    };
    entries.iter().map(|&x| sign * x / g).collect()
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(n: usize, entries: &[i64]) -> BigInt {
    if n == 2 {
        let d = entries[0] as i128 * entries[3] as i128 - entries[1] as i128 * entries[2] as i128;
        return BigInt::from(d);
    }
    let mut a: Vec<BigInt> = entries.iter().map(|&x| BigInt::from(x)).collect();
    bareiss(n, &mut a)
}

pub(crate) fn bareiss(n: usize, a: &mut [BigInt]) -> BigInt {
    let mut sign = BigInt::from(1);
    let mut prev = BigInt::from(1);
    for k in 0..n.saturating_sub(1) {
        if a[k * n + k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !a[r * n + k].is_zero()) else {
                return BigInt::zero();
            };
            for j in 0..n {
                a.swap(k * n + j, r * n + j);
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j]) / &prev;
                a[i * n + j] = v;
            }
        }
        prev = a[k * n + k].clone();
    }
    sign * a[n * n - 1].clone()
}

/// Prime factorization of `|m|` by trial division, ascending primes.
pub fn factorize(m: &BigInt) -> Vec<(u64, u32)> {
    let mut m = m.abs();
    let mut out = Vec::new();
    if let Some(small) = m.to_u128() {
        let mut r = small;
        let mut d: u128 = 2;
        while d * d <= r {
            if r % d == 0 {
                let mut e = 0;
                while r % d == 0 {
                    r /= d;
                    e += 1;
                }
                out.push((d as u64, e));
            }
            d += if d == 2 { 1 } else { 2 };
        }
        if r > 1 {
            out.push((r as u64, 1));
        }
        return out;
    }
    let mut d = BigInt::from(2u32);
    while &d * &d <= m {
        if (&m % &d).is_zero() {
            let mut e = 0;
            while (&m % &d).is_zero() {
                m /= &d;
                e += 1;
            }
            out.push((d.to_u64().expect("factor exceeds u64"), e));
        }
        d += 1;
    }
    if m > BigInt::from(1) {
        out.push((m.to_u64().expect("factor exceeds u64"), 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        let p = PointRep::new(2, vec![-2, 4, 6, 8]).unwrap();
        assert_eq!(p.entries(), &[1, -2, -3, -4]);
        let p = PointRep::new(2, vec![0, -3, 3, 0]).unwrap();
        assert_eq!(p.entries(), &[0, 1, -1, 0]);
        assert!(is_normalized(&[0, 1, -1, 0]));
        assert!(!is_normalized(&[0, -1, 1, 0]));
        assert!(!is_normalized(&[2, 0, 0, 2]));
    }

    #[test]
    fn singular_rejected() {
        assert!(PointRep::new(2, vec![1, 2, 2, 4]).is_err());
        assert!(PointRep::new(3, vec![1, 2, 3, 4, 5, 6, 7, 8, 9]).is_err());
        assert!(PointRep::new(2, vec![1, 2, 3]).is_err());
    }

    #[test]
    fn determinants() {
        assert_eq!(determinant(3, &[2, 0, 1, 1, 3, 2, 1, 1, 2]), BigInt::from(6));
        assert_eq!(determinant(3, &[0, 1, 0, 1, 0, 0, 0, 0, 1]), BigInt::from(-1));
        assert_eq!(
            determinant(4, &[1, 2, 0, 0, 3, 4, 0, 0, 0, 0, 5, 6, 0, 0, 7, 8]),
            BigInt::from(4)
        );
    }

    #[test]
    fn factorization() {
        assert_eq!(factorize(&BigInt::from(-360)), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factorize(&BigInt::from(1)), vec![]);
        assert_eq!(factorize(&BigInt::from(97)), vec![(97, 1)]);
    }

    #[test]
    fn transpose_roundtrip() {
        let p = PointRep::from_rows(&[vec![1, 2], vec![3, 5]]).unwrap();
        assert_eq!(p.transpose().entries(), &[1, 3, 2, 5]);
        assert_eq!(p.transpose().transpose(), p);
    }
}
