//! Irreducible reduced root systems in the simple-root basis.
//!
//! Simple roots follow Bourbaki numbering. The Cartan matrix uses the
//! convention `a_ij = <alpha_i, alpha_j^vee>`, so the pairing of a root
//! `beta = sum_j c_j alpha_j` with the coroot of `alpha_i` is
//! `sum_j c_j a_ji`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::picard::DivisorVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TypeLetter {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl TypeLetter {
    pub fn as_char(self) -> char {
        match self {
            TypeLetter::A => 'A',
            TypeLetter::B => 'B',
            TypeLetter::C => 'C',
            TypeLetter::D => 'D',
            TypeLetter::E => 'E',
            TypeLetter::F => 'F',
            TypeLetter::G => 'G',
        }
    }
}

impl fmt::Display for TypeLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for TypeLetter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(TypeLetter::A),
            "B" => Ok(TypeLetter::B),
            "C" => Ok(TypeLetter::C),
            "D" => Ok(TypeLetter::D),
            "E" => Ok(TypeLetter::E),
            "F" => Ok(TypeLetter::F),
            "G" => Ok(TypeLetter::G),
            other => Err(Error::Config(format!("unknown type letter {other:?}"))),
        }
    }
}

/// A cocharacter attached to a simple root `theta`, stored with the sign
/// convention `<alpha, theta^vee> = -delta_{alpha theta}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cocharacter {
    pub theta_index: usize,
    pub pairing_row: Vec<i64>,
}

impl Cocharacter {
    pub fn pairing(&self, alpha_index: usize) -> i64 {
        self.pairing_row[alpha_index]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSystem {
    type_letter: TypeLetter,
    rank: usize,
    cartan_matrix: Vec<Vec<i64>>,
    positive_roots: Vec<Vec<i64>>,
    kappa: Vec<i64>,
}

impl RootSystem {
    pub fn type_letter(&self) -> TypeLetter {
        self.type_letter
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cartan_matrix(&self) -> &[Vec<i64>] {
        &self.cartan_matrix
    }

    /// Positive roots as coordinate vectors, sorted lexicographically.
    pub fn positive_roots(&self) -> &[Vec<i64>] {
        &self.positive_roots
    }

    pub fn kappa(&self) -> &[i64] {
        &self.kappa
    }

    pub fn name(&self) -> String {
        format!("{}{}", self.type_letter, self.rank)
    }

    pub fn cocharacter(&self, theta_index: usize) -> Result<Cocharacter> {
        if theta_index >= self.rank {
            return Err(Error::IndexOutOfRange {
                index: theta_index,
                rank: self.rank,
            });
        }
        let pairing_row = (0..self.rank)
            .map(|i| if i == theta_index { -1 } else { 0 })
            .collect();
        Ok(Cocharacter {
            theta_index,
            pairing_row,
        })
    }
}

fn check_rank(letter: TypeLetter, rank: usize) -> Result<()> {
    let constraint = match letter {
        TypeLetter::A if rank >= 1 => return Ok(()),
        TypeLetter::A => "type A requires rank >= 1",
        TypeLetter::B | TypeLetter::C if rank >= 2 => return Ok(()),
        TypeLetter::B | TypeLetter::C => "types B and C require rank >= 2",
        TypeLetter::D if rank >= 3 => return Ok(()),
        TypeLetter::D => "type D requires rank >= 3",
        TypeLetter::E if (6..=8).contains(&rank) => return Ok(()),
        TypeLetter::E => "type E requires rank 6, 7 or 8",
        TypeLetter::F if rank == 4 => return Ok(()),
        TypeLetter::F => "type F requires rank 4",
        TypeLetter::G if rank == 2 => return Ok(()),
        TypeLetter::G => "type G requires rank 2",
    };
    Err(Error::InvalidType {
        letter: letter.as_char(),
        rank,
        constraint,
    })
}

/// Cartan matrix in Bourbaki numbering, `a_ij = <alpha_i, alpha_j^vee>`.
pub fn cartan_matrix(letter: TypeLetter, rank: usize) -> Result<Vec<Vec<i64>>> {
    check_rank(letter, rank)?;
    let n = rank;
    let mut a = vec![vec![0i64; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 2;
    }
    // (i, j, a_ij, a_ji) with 0-based indices
    let mut bonds: Vec<(usize, usize, i64, i64)> = Vec::new();
    match letter {
        TypeLetter::A => {
            for i in 0..n - 1 {
                bonds.push((i, i + 1, -1, -1));
            }
        }
        TypeLetter::B => {
            for i in 0..n - 2 {
                bonds.push((i, i + 1, -1, -1));
            }
            // alpha_n short
            bonds.push((n - 2, n - 1, -2, -1));
        }
        TypeLetter::C => {
            for i in 0..n - 2 {
                bonds.push((i, i + 1, -1, -1));
            }
            // alpha_n long
            bonds.push((n - 2, n - 1, -1, -2));
        }
        TypeLetter::D => {
            for i in 0..n - 2 {
                bonds.push((i, i + 1, -1, -1));
            }
            bonds.push((n - 3, n - 1, -1, -1));
        }
        TypeLetter::E => {
            // 1-3-4-5-6-7-8 with 2 attached to 4
            bonds.push((0, 2, -1, -1));
            bonds.push((1, 3, -1, -1));
            for i in 2..n - 1 {
                bonds.push((i, i + 1, -1, -1));
            }
        }
        TypeLetter::F => {
            bonds.push((0, 1, -1, -1));
            bonds.push((1, 2, -2, -1));
            bonds.push((2, 3, -1, -1));
        }
        TypeLetter::G => {
            // alpha_1 short, alpha_2 long
            bonds.push((0, 1, -1, -3));
        }
    }
    for (i, j, aij, aji) in bonds {
        a[i][j] = aij;
        a[j][i] = aji;
    }
    Ok(a)
}

/// Builds the root system of the given type, generating positive roots by
/// closure under addition of simple roots (root strings).
pub fn build_root_system(letter: TypeLetter, rank: usize) -> Result<RootSystem> {
    let cartan = cartan_matrix(letter, rank)?;
    let n = rank;

    let mut roots: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            let mut e = vec![0i64; n];
            e[i] = 1;
            e
        })
        .collect();
    let mut known: HashSet<Vec<i64>> = roots.iter().cloned().collect();
    let mut layer = roots.clone();

    while !layer.is_empty() {
        let mut next = BTreeSet::new();
        for beta in &layer {
            for i in 0..n {
                // alpha_i-string through beta: beta - p alpha_i .. beta + q alpha_i
                let mut p = 0;
                let mut down = beta.clone();
                loop {
                    down[i] -= 1;
                    if known.contains(&down) {
                        p += 1;
                    } else {
                        break;
                    }
                }
                let pairing: i64 = (0..n).map(|j| beta[j] * cartan[j][i]).sum();
                let q = p - pairing;
                if q > 0 {
                    let mut up = beta.clone();
                    up[i] += 1;
                    if !known.contains(&up) {
                        next.insert(up);
                    }
                }
            }
        }
        layer = next.into_iter().collect();
        for r in &layer {
            known.insert(r.clone());
            roots.push(r.clone());
        }
    }

    roots.sort();
    let kappa = sum_roots(&roots, n);
    Ok(RootSystem {
        type_letter: letter,
        rank,
        cartan_matrix: cartan,
        positive_roots: roots,
        kappa,
    })
}

fn sum_roots(roots: &[Vec<i64>], n: usize) -> Vec<i64> {
    roots.iter().fold(vec![0i64; n], |mut acc, r| {
        for (a, c) in acc.iter_mut().zip(r) {
            *a += c;
        }
        acc
    })
}

/// Coordinates of the sum of positive roots in the simple-root basis.
pub fn kappa_vector(rs: &RootSystem) -> Vec<i64> {
    sum_roots(&rs.positive_roots, rs.rank)
}

/// Coefficients of `lam` in the fundamental-weight basis: `m_i = sum_j lam_j a_ji`.
pub fn fundamental_weight_coords(rs: &RootSystem, lam: &DivisorVector) -> Result<Vec<BigRational>> {
    if lam.len() != rs.rank {
        return Err(Error::DimensionMismatch {
            expected: rs.rank,
            got: lam.len(),
        });
    }
    let n = rs.rank;
    Ok((0..n)
        .map(|i| {
            (0..n).fold(BigRational::zero(), |acc, j| {
                acc + &lam.coeffs()[j] * BigRational::from_integer(rs.cartan_matrix[j][i].into())
            })
        })
        .collect())
}

/// True iff `lam` is a regular dominant weight (ample class).
pub fn is_regular_dominant(rs: &RootSystem, lam: &DivisorVector) -> Result<bool> {
    Ok(fundamental_weight_coords(rs, lam)?
        .iter()
        .all(|m| m.is_positive()))
}
