//! Boundary divisors, effective cone and Picard ranks of the wonderful
//! compactification, all in the boundary-divisor basis `D_alpha`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::diagram_action::{orbit_of, DiagramAction};
use crate::error::{Error, Result};
use crate::root_system::RootSystem;

/// `lambda = sum_alpha lambda_alpha D_alpha`, exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DivisorVector {
    coeffs: Vec<BigRational>,
}

impl DivisorVector {
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        Self { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(c.into()))
                .collect(),
        )
    }

    /// Validates that the coefficients are constant on every orbit of `da`.
    pub fn for_action(coeffs: Vec<BigRational>, da: &DiagramAction) -> Result<Self> {
        let lam = Self::new(coeffs);
        lam.check_action(da)?;
        Ok(lam)
    }

    pub fn check_action(&self, da: &DiagramAction) -> Result<()> {
        if self.len() != da.rank() {
            return Err(Error::DimensionMismatch {
                expected: da.rank(),
                got: self.len(),
            });
        }
        for orbit in da.orbits() {
            let first = orbit[0];
            for &j in &orbit[1..] {
                if self.coeffs[j] != self.coeffs[first] {
                    return Err(Error::NotOrbitConstant {
                        i: first + 1,
                        j: j + 1,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn scale(&self, t: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * t).collect())
    }

    /// Index (0-based) of the first non-positive coefficient, if any.
    pub fn first_non_positive(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_positive())
    }

    pub fn require_effective_interior(&self) -> Result<()> {
        match self.first_non_positive() {
            None => Ok(()),
            Some(i) => Err(Error::OutsideEffectiveInterior {
                index: i + 1,
                value: self.coeffs[i].to_string(),
            }),
        }
    }
}

impl fmt::Display for DivisorVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Parses `"p/q"`, `"p"` or a decimal such as `"0.5"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Config(format!("cannot parse {s:?} as a rational"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q == BigInt::from(0) {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let digits = format!("{int}{frac}");
        let p: BigInt = digits.parse().map_err(|_| bad())?;
        let q = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(p, q));
    }
    Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?))
}

pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl Serialize for DivisorVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = self.coeffs.iter().map(format_rational).collect();
        v.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DivisorVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<serde_json::Value> = Vec::deserialize(deserializer)?;
        let coeffs = raw
            .iter()
            .map(|v| match v {
                serde_json::Value::String(s) => parse_rational(s),
                serde_json::Value::Number(n) => parse_rational(&n.to_string()),
                other => Err(Error::Config(format!("bad lambda entry {other}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Ok(DivisorVector::new(coeffs))
    }
}

/// The simple roots `A_D` whose boundary divisors make up `D`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoundarySelection {
    rank: usize,
    indices: BTreeSet<usize>,
}

impl BoundarySelection {
    /// `indices` are 0-based.
    pub fn new(rank: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let indices: BTreeSet<usize> = indices.into_iter().collect();
        if let Some(&bad) = indices.iter().find(|&&i| i >= rank) {
            return Err(Error::IndexOutOfRange { index: bad, rank });
        }
        Ok(Self { rank, indices })
    }

    pub fn empty(rank: usize) -> Self {
        Self {
            rank,
            indices: BTreeSet::new(),
        }
    }

    pub fn full(rank: usize) -> Self {
        Self {
            rank,
            indices: (0..rank).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn indices(&self) -> &BTreeSet<usize> {
        &self.indices
    }

    pub fn complement(&self) -> BTreeSet<usize> {
        (0..self.rank).filter(|i| !self.indices.contains(i)).collect()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.contains(&i)
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `A_D` must be a union of orbits of the action.
    pub fn check_orbit_stable(&self, da: &DiagramAction) -> Result<()> {
        if self.rank != da.rank() {
            return Err(Error::DimensionMismatch {
                expected: da.rank(),
                got: self.rank,
            });
        }
        for &i in &self.indices {
            let orbit = da.orbit(orbit_of(da, i)?);
            if let Some(&missing) = orbit.iter().find(|j| !self.indices.contains(j)) {
                return Err(Error::NotOrbitStable {
                    index: i + 1,
                    missing: missing + 1,
                });
            }
        }
        Ok(())
    }
}

/// `-K_X = sum (kappa_alpha + 1) D_alpha`.
pub fn anticanonical(rs: &RootSystem) -> DivisorVector {
    let k: Vec<i64> = rs.kappa().iter().map(|k| k + 1).collect();
    DivisorVector::from_ints(&k)
}

/// `-(K_X + D)`: coefficient `kappa` on `A_D`, `kappa + 1` off it.
pub fn log_anticanonical(rs: &RootSystem, sel: &BoundarySelection) -> DivisorVector {
    let k: Vec<i64> = rs
        .kappa()
        .iter()
        .enumerate()
        .map(|(i, k)| if sel.contains(i) { *k } else { k + 1 })
        .collect();
    DivisorVector::from_ints(&k)
}

/// Rank of `Pic(X \ D)`: number of orbits not contained in `A_D`.
pub fn pic_rank_complement(da: &DiagramAction, sel: &BoundarySelection) -> Result<usize> {
    sel.check_orbit_stable(da)?;
    let selected = da
        .orbits()
        .iter()
        .filter(|orbit| sel.contains(orbit[0]))
        .count();
    Ok(da.orbit_count() - selected)
}

pub fn in_effective_interior(lam: &DivisorVector) -> bool {
    lam.first_non_positive().is_none()
}
