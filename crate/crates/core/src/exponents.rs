//! Predicted growth exponent `a(lambda)` and log-power `b(lambda)` for
//! `(S, D)`-integral points of bounded height.
//!
//! `a(lambda)` is the larger of `max kappa/lambda` over `A_D` and
//! `max (kappa + 1)/lambda` off `A_D`. The pruned Clemens complex at a place
//! keeps the vertices of `A_D` with `kappa = a * lambda`; in the split case it
//! is the full simplex on those vertices. The pole order is
//! `b = rk Pic(X \ D) + sum_{v in S} (1 + d_v)`, where an empty complex
//! (dimension -1) contributes nothing.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::diagram_action::DiagramAction;
use crate::error::{Error, Result};
use crate::picard::{
    format_rational, log_anticanonical, parse_rational, pic_rank_complement, BoundarySelection,
    DivisorVector,
};
use crate::place::{normalize_places, Place};
use crate::root_system::RootSystem;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AValue {
    pub a: BigRational,
    /// 0-based indices in `A_D` with `kappa / lambda = a`.
    pub achievers_d: BTreeSet<usize>,
    /// 0-based indices off `A_D` with `(kappa + 1) / lambda = a`.
    pub achievers_off_d: BTreeSet<usize>,
}

/// Full simplex on `vertices` (split case).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClemensComplex {
    pub vertices: BTreeSet<usize>,
}

impl ClemensComplex {
    pub fn dimension(&self) -> i64 {
        self.vertices.len() as i64 - 1
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// All nonempty subsets of the vertex set, each sorted.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        let v: Vec<usize> = self.vertices.iter().copied().collect();
        let n = v.len();
        assert!(n < 31, "face enumeration is exponential in the vertex count");
        (1u32..(1 << n))
            .map(|mask| {
                (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| v[i])
                    .collect()
            })
            .collect()
    }
}

fn ratio(num: i64, den: &BigRational) -> BigRational {
    BigRational::from_integer(BigInt::from(num)) / den
}

pub fn a_of_lambda(rs: &RootSystem, sel: &BoundarySelection, lam: &DivisorVector) -> Result<AValue> {
    if lam.len() != rs.rank() {
        return Err(Error::DimensionMismatch {
            expected: rs.rank(),
            got: lam.len(),
        });
    }
    if sel.rank() != rs.rank() {
        return Err(Error::DimensionMismatch {
            expected: rs.rank(),
            got: sel.rank(),
        });
    }
    lam.require_effective_interior()?;

    let candidates: Vec<(usize, bool, BigRational)> = (0..rs.rank())
        .map(|i| {
            let in_d = sel.contains(i);
            let k = rs.kappa()[i] + if in_d { 0 } else { 1 };
            (i, in_d, ratio(k, &lam.coeffs()[i]))
        })
        .collect();
    let a = candidates
        .iter()
        .map(|(_, _, r)| r)
        .max()
        .cloned()
        .expect("rank >= 1");

    let mut achievers_d = BTreeSet::new();
    let mut achievers_off_d = BTreeSet::new();
    for (i, in_d, r) in candidates {
        if r == a {
            if in_d {
                achievers_d.insert(i);
            } else {
                achievers_off_d.insert(i);
            }
        }
    }
    Ok(AValue {
        a,
        achievers_d,
        achievers_off_d,
    })
}

pub fn pruned_clemens(
    rs: &RootSystem,
    sel: &BoundarySelection,
    lam: &DivisorVector,
    a: &BigRational,
) -> ClemensComplex {
    let vertices = sel
        .indices()
        .iter()
        .copied()
        .filter(|&i| BigRational::from_integer(rs.kappa()[i].into()) == a * &lam.coeffs()[i])
        .collect();
    ClemensComplex { vertices }
}

/// Pole order `b(lambda)`; see the module docs for the place convention.
pub fn b_of_lambda(
    da: &DiagramAction,
    sel: &BoundarySelection,
    lam: &DivisorVector,
    places: &[Place],
) -> Result<i64> {
    Ok(exponent_report(da, sel, lam, places)?.b)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentReport {
    pub a: BigRational,
    pub b: i64,
    pub achievers_d: BTreeSet<usize>,
    pub achievers_off_d: BTreeSet<usize>,
    pub d_per_place: BTreeMap<Place, i64>,
    pub pic_rank: usize,
}

pub fn exponent_report(
    da: &DiagramAction,
    sel: &BoundarySelection,
    lam: &DivisorVector,
    places: &[Place],
) -> Result<ExponentReport> {
    let rs = da.root_system();
    lam.check_action(da)?;
    let pic_rank = pic_rank_complement(da, sel)?;
    let places = normalize_places(places)?;
    let av = a_of_lambda(rs, sel, lam)?;
    let complex = pruned_clemens(rs, sel, lam, &av.a);
    let d = complex.dimension();

    let d_per_place: BTreeMap<Place, i64> = places.iter().map(|&v| (v, d)).collect();
    let b = pic_rank as i64 + d_per_place.values().map(|d| 1 + d).sum::<i64>();
    Ok(ExponentReport {
        a: av.a,
        b,
        achievers_d: av.achievers_d,
        achievers_off_d: av.achievers_off_d,
        d_per_place,
        pic_rank,
    })
}

/// True iff `lam` is the log-anticanonical class `-(K_X + D)`.
pub fn is_log_anticanonical(rs: &RootSystem, sel: &BoundarySelection, lam: &DivisorVector) -> bool {
    *lam == log_anticanonical(rs, sel)
}

#[derive(Serialize, Deserialize)]
struct ExponentReportJson {
    a: String,
    b: i64,
    #[serde(rename = "achievers_D")]
    achievers_d: Vec<usize>,
    #[serde(rename = "achievers_offD")]
    achievers_off_d: Vec<usize>,
    d_per_place: BTreeMap<String, i64>,
    pic_rank: usize,
}

impl Serialize for ExponentReport {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ExponentReportJson {
            a: format_rational(&self.a),
            b: self.b,
            achievers_d: self.achievers_d.iter().map(|i| i + 1).collect(),
            achievers_off_d: self.achievers_off_d.iter().map(|i| i + 1).collect(),
            d_per_place: self
                .d_per_place
                .iter()
                .map(|(p, d)| (p.to_string(), *d))
                .collect(),
            pic_rank: self.pic_rank,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExponentReport {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = ExponentReportJson::deserialize(deserializer)?;
        let one_based = |v: Vec<usize>| -> std::result::Result<BTreeSet<usize>, D::Error> {
            v.into_iter()
                .map(|i| i.checked_sub(1).ok_or_else(|| D::Error::custom("indices are 1-based")))
                .collect()
        };
        Ok(ExponentReport {
            a: parse_rational(&raw.a).map_err(D::Error::custom)?,
            b: raw.b,
            achievers_d: one_based(raw.achievers_d)?,
            achievers_off_d: one_based(raw.achievers_off_d)?,
            d_per_place: raw
                .d_per_place
                .into_iter()
                .map(|(k, v)| k.parse::<Place>().map(|p| (p, v)).map_err(D::Error::custom))
                .collect::<std::result::Result<_, _>>()?,
            pic_rank: raw.pic_rank,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_system::{build_root_system, TypeLetter};

    fn a(rank: usize) -> RootSystem {
        build_root_system(TypeLetter::A, rank).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn sel(rank: usize, idx: &[usize]) -> BoundarySelection {
        BoundarySelection::new(rank, idx.iter().copied()).unwrap()
    }

    #[test]
    fn a_examples() {
        let av = a_of_lambda(&a(1), &sel(1, &[0]), &DivisorVector::from_ints(&[1])).unwrap();
        assert_eq!(av.a, q(1, 1));
        assert_eq!(av.achievers_d, BTreeSet::from([0]));

        let av = a_of_lambda(&a(2), &sel(2, &[0]), &DivisorVector::from_ints(&[2, 3])).unwrap();
        assert_eq!(av.a, q(1, 1));
        assert_eq!(av.achievers_d, BTreeSet::from([0]));
        assert_eq!(av.achievers_off_d, BTreeSet::from([1]));

        let av = a_of_lambda(&a(2), &sel(2, &[]), &DivisorVector::from_ints(&[1, 1])).unwrap();
        assert_eq!(av.a, q(3, 1));
        assert_eq!(av.achievers_off_d, BTreeSet::from([0, 1]));
        assert!(av.achievers_d.is_empty());
    }

    #[test]
    fn a_rejects_non_interior() {
        let err = a_of_lambda(&a(2), &sel(2, &[]), &DivisorVector::from_ints(&[1, 0])).unwrap_err();
        assert!(matches!(err, Error::OutsideEffectiveInterior { index: 2, .. }));
    }

    #[test]
    fn pruned_examples() {
        let c = pruned_clemens(&a(1), &sel(1, &[0]), &DivisorVector::from_ints(&[1]), &q(1, 1));
        assert_eq!(c.dimension(), 0);
        let c = pruned_clemens(&a(2), &sel(2, &[0, 1]), &DivisorVector::from_ints(&[2, 2]), &q(1, 1));
        assert_eq!(c.dimension(), 1);
        assert_eq!(c.faces(), vec![vec![0], vec![1], vec![0, 1]]);
        let lam = DivisorVector::from_ints(&[4, 3]);
        let av = a_of_lambda(&a(2), &sel(2, &[0]), &lam).unwrap();
        assert_eq!(av.a, q(1, 1));
        let c = pruned_clemens(&a(2), &sel(2, &[0]), &lam, &av.a);
        assert!(c.is_empty());
        assert_eq!(c.dimension(), -1);
    }

    #[test]
    fn b_examples() {
        let inf = [Place::Infinite];
        let da1 = DiagramAction::trivial(&a(1));
        let da2 = DiagramAction::trivial(&a(2));
        assert_eq!(
            b_of_lambda(&da1, &sel(1, &[0]), &DivisorVector::from_ints(&[1]), &inf).unwrap(),
            1
        );
        assert_eq!(
            b_of_lambda(&da2, &sel(2, &[0, 1]), &DivisorVector::from_ints(&[2, 2]), &inf).unwrap(),
            2
        );
        assert_eq!(
            b_of_lambda(&da2, &sel(2, &[]), &DivisorVector::from_ints(&[3, 3]), &inf).unwrap(),
            2
        );
        assert_eq!(
            b_of_lambda(
                &da1,
                &sel(1, &[0]),
                &DivisorVector::from_ints(&[1]),
                &[Place::Infinite, Place::Prime(2)]
            )
            .unwrap(),
            2
        );
    }

    #[test]
    fn report_json_shape() {
        let da = DiagramAction::trivial(&a(1));
        let r = exponent_report(&da, &sel(1, &[0]), &DivisorVector::from_ints(&[1]), &[Place::Infinite])
            .unwrap();
        let js = serde_json::to_value(&r).unwrap();
        assert_eq!(js["a"], "1");
        assert_eq!(js["b"], 1);
        assert_eq!(js["achievers_D"], serde_json::json!([1]));
        assert_eq!(js["d_per_place"]["inf"], 0);
        let back: ExponentReport = serde_json::from_value(js).unwrap();
        assert_eq!(back, r);
    }
}
