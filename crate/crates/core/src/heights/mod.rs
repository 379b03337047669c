//! Local and global heights on `PGL_n(Q)` with respect to a boundary class
//! `lambda = sum lambda_i D_i`.
//!
//! At every place the local height of `D_i` is `|alpha_i(t)|_v` for the
//! Cartan decomposition `g = k t k'`. At a prime `p` the exponent of
//! `alpha_i(t)` is the gap `v_p(d_{i+1}) - v_p(d_i)` between consecutive
//! elementary divisors; at infinity it is `log(s_i / s_{i+1})` for the
//! singular values. Only primes dividing `det M` can contribute.

pub mod arch;
pub mod point;
pub mod smith;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::picard::{BoundarySelection, DivisorVector};
use crate::place::Place;

pub use arch::{arch_exponents, singular_values, DEFAULT_ARCH_TOL};
pub use point::{factorize, is_normalized, normalize_entries, PointRep};
pub use smith::{elementary_divisors_by_minors, local_elementary_valuations, smith_gaps};

#[derive(Clone, Debug, PartialEq)]
pub enum ProfileExponents {
    Finite(Vec<i64>),
    Arch(Vec<f64>),
}

/// Simple-root exponents of the torus part of a Cartan decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct CartanProfile {
    pub place: Place,
    pub exponents: ProfileExponents,
}

impl CartanProfile {
    pub fn len(&self) -> usize {
        match &self.exponents {
            ProfileExponents::Finite(e) => e.len(),
            ProfileExponents::Arch(e) => e.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_trivial(&self) -> bool {
        match &self.exponents {
            ProfileExponents::Finite(e) => e.iter().all(|&x| x == 0),
            ProfileExponents::Arch(e) => e.iter().all(|&x| x == 0.0),
        }
    }
}

pub fn smith_exponents(point: &PointRep, p: u64) -> CartanProfile {
    CartanProfile {
        place: Place::Prime(p),
        exponents: ProfileExponents::Finite(smith_gaps(point, p)),
    }
}

pub fn arch_profile(point: &PointRep, tol: f64) -> Result<CartanProfile> {
    Ok(CartanProfile {
        place: Place::Infinite,
        exponents: ProfileExponents::Arch(arch_exponents(point, tol)?),
    })
}

/// A local height value: `p^exponent` at a prime (exact exponent), or
/// `exp(log_value)` at infinity.
#[derive(Clone, Debug, PartialEq)]
pub enum LocalHeight {
    Finite { p: u64, exponent: BigRational },
    Arch { log_value: f64 },
}

impl LocalHeight {
    pub fn ln(&self) -> f64 {
        match self {
            LocalHeight::Finite { p, exponent } => {
                (*p as f64).ln() * exponent.to_f64().unwrap_or(f64::NAN)
            }
            LocalHeight::Arch { log_value } => *log_value,
        }
    }

    pub fn value(&self) -> f64 {
        self.ln().exp()
    }

    /// Exact value when the exponent is integral.
    pub fn exact(&self) -> Option<BigRational> {
        match self {
            LocalHeight::Finite { p, exponent } if exponent.is_integer() => {
                let e = exponent.to_integer().to_i32()?;
                let base = BigRational::from_integer(BigInt::from(*p));
                Some(num_traits::pow::Pow::pow(&base, e))
            }
            _ => None,
        }
    }
}

pub fn local_height(profile: &CartanProfile, lam: &DivisorVector) -> Result<LocalHeight> {
    if profile.len() != lam.len() {
        return Err(Error::DimensionMismatch {
            expected: profile.len(),
            got: lam.len(),
        });
    }
    Ok(match (&profile.exponents, profile.place) {
        (ProfileExponents::Finite(e), Place::Prime(p)) => LocalHeight::Finite {
            p,
            exponent: e
                .iter()
                .zip(lam.coeffs())
                .map(|(&x, l)| l * BigRational::from_integer(x.into()))
                .fold(BigRational::zero(), |a, b| a + b),
        },
        (ProfileExponents::Arch(e), _) => LocalHeight::Arch {
            log_value: e.iter().zip(lam.to_f64()).map(|(x, l)| x * l).sum(),
        },
        (ProfileExponents::Finite(_), Place::Infinite) => {
            return Err(Error::InvalidPoint("finite exponents at the archimedean place".into()))
        }
    })
}

/// Height of a single boundary divisor `D_i`: exact finite part and the
/// archimedean factor.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisorHeight {
    pub finite: BigInt,
    pub arch: f64,
}

impl DivisorHeight {
    pub fn total(&self) -> f64 {
        self.finite.to_f64().unwrap_or(f64::INFINITY) * self.arch
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeightValue {
    /// `p -> sum_i lambda_i * gap_i(p)`; primes with zero exponent omitted.
    pub finite_exponents: BTreeMap<u64, BigRational>,
    pub arch_log: f64,
    pub per_divisor: Vec<DivisorHeight>,
}

impl HeightValue {
    pub fn finite_ln(&self) -> f64 {
        self.finite_exponents
            .iter()
            .map(|(p, e)| (*p as f64).ln() * e.to_f64().unwrap_or(f64::NAN))
            .sum()
    }

    /// Finite part as an exact rational, when every exponent is integral.
    pub fn finite_exact(&self) -> Option<BigRational> {
        let mut acc = BigRational::one();
        for (p, e) in &self.finite_exponents {
            let h = LocalHeight::Finite {
                p: *p,
                exponent: e.clone(),
            };
            acc *= h.exact()?;
        }
        Some(acc)
    }

    pub fn finite(&self) -> f64 {
        match self.finite_exact() {
            Some(q) => q.to_f64().unwrap_or(f64::INFINITY),
            None => self.finite_ln().exp(),
        }
    }

    pub fn arch(&self) -> f64 {
        self.arch_log.exp()
    }

    pub fn ln(&self) -> f64 {
        self.finite_ln() + self.arch_log
    }

    pub fn total(&self) -> f64 {
        self.finite() * self.arch()
    }
}

/// Product of local heights over infinity and the primes dividing `det M`.
pub fn global_height(point: &PointRep, lam: &DivisorVector) -> Result<HeightValue> {
    global_height_with_tol(point, lam, DEFAULT_ARCH_TOL)
}

pub fn global_height_with_tol(point: &PointRep, lam: &DivisorVector, tol: f64) -> Result<HeightValue> {
    let r = point.n() - 1;
    if lam.len() != r {
        return Err(Error::DimensionMismatch {
            expected: r,
            got: lam.len(),
        });
    }
    lam.require_effective_interior()?;

    let arch = arch_profile(point, tol)?;
    let arch_log = local_height(&arch, lam)?.ln();
    let ProfileExponents::Arch(arch_e) = &arch.exponents else {
        unreachable!()
    };
    let mut per_divisor: Vec<DivisorHeight> = arch_e
        .iter()
        .map(|e| DivisorHeight {
            finite: BigInt::one(),
            arch: e.exp(),
        })
        .collect();

    let mut finite_exponents = BTreeMap::new();
    for (p, _) in factorize(&point.determinant()) {
        let prof = smith_exponents(point, p);
        if let ProfileExponents::Finite(gaps) = &prof.exponents {
            for (d, &g) in per_divisor.iter_mut().zip(gaps) {
                if g > 0 {
                    d.finite *= num_traits::pow(BigInt::from(p), g as usize);
                }
            }
        }
        let LocalHeight::Finite { exponent, .. } = local_height(&prof, lam)? else {
            unreachable!()
        };
        if !exponent.is_zero() {
            finite_exponents.insert(p, exponent);
        }
    }
    Ok(HeightValue {
        finite_exponents,
        arch_log,
        per_divisor,
    })
}

/// `(S, D)`-integrality: at every prime outside `S`, the Smith gaps indexed
/// by `A_D` vanish.
pub fn integrality_delta(point: &PointRep, sel: &BoundarySelection, places: &[Place]) -> Result<bool> {
    if sel.rank() != point.n() - 1 {
        return Err(Error::DimensionMismatch {
            expected: point.n() - 1,
            got: sel.rank(),
        });
    }
    if !places.contains(&Place::Infinite) {
        return Err(Error::Config("the place set S must contain inf".into()));
    }
    if sel.is_empty() {
        return Ok(true);
    }
    for (p, _) in factorize(&point.determinant()) {
        if places.contains(&Place::Prime(p)) {
            continue;
        }
        let gaps = smith_gaps(point, p);
        if sel.indices().iter().any(|&i| gaps[i] != 0) {
            return Ok(false);
        }
    }
    Ok(true)
}
