//! Finite permutation actions on the Dynkin diagram and their orbits.

use crate::error::{Error, Result};
use crate::root_system::RootSystem;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagramAction {
    rs: RootSystem,
    generators: Vec<Vec<usize>>,
    orbits: Vec<Vec<usize>>,
    orbit_index: Vec<usize>,
}

/// Identifier of an orbit; orbits are numbered by their smallest member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrbitId(pub usize);

impl DiagramAction {
    pub fn trivial(rs: &RootSystem) -> Self {
        build_action(rs, &[]).expect("trivial action is always valid")
    }

    pub fn root_system(&self) -> &RootSystem {
        &self.rs
    }

    pub fn rank(&self) -> usize {
        self.rs.rank()
    }

    /// Generators as 0-based permutation images.
    pub fn generators(&self) -> &[Vec<usize>] {
        &self.generators
    }

    pub fn orbits(&self) -> &[Vec<usize>] {
        &self.orbits
    }

    pub fn orbit_sizes(&self) -> Vec<usize> {
        self.orbits.iter().map(Vec::len).collect()
    }

    pub fn orbit_count(&self) -> usize {
        self.orbits.len()
    }

    pub fn orbit(&self, id: OrbitId) -> &[usize] {
        &self.orbits[id.0]
    }

    pub fn is_split(&self) -> bool {
        self.orbits.len() == self.rank()
    }
}

/// Builds the action generated by `generators` (0-based images), checking
/// that each generator preserves the Cartan matrix.
pub fn build_action(rs: &RootSystem, generators: &[Vec<usize>]) -> Result<DiagramAction> {
    let n = rs.rank();
    let a = rs.cartan_matrix();
    for g in generators {
        if g.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: g.len(),
            });
        }
        let mut seen = vec![false; n];
        for &x in g {
            if x >= n || seen[x] {
                return Err(Error::InvalidPermutation(format!(
                    "{:?} is not a permutation of 1..={n}",
                    g.iter().map(|x| x + 1).collect::<Vec<_>>()
                )));
            }
            seen[x] = true;
        }
        for i in 0..n {
            for j in 0..n {
                if a[g[i]][g[j]] != a[i][j] {
                    return Err(Error::NotAutomorphism {
                        i: i + 1,
                        j: j + 1,
                        si: g[i] + 1,
                        sj: g[j] + 1,
                        a_ij: a[i][j],
                        a_sisj: a[g[i]][g[j]],
                    });
                }
            }
        }
    }

    // union-find over generator cycles
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    for g in generators {
        for (i, &gi) in g.iter().enumerate() {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, gi));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }

    let mut orbits: Vec<Vec<usize>> = Vec::new();
    let mut orbit_index = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if orbit_index[r] == usize::MAX {
            orbit_index[r] = orbits.len();
            orbits.push(Vec::new());
        }
        let id = orbit_index[r];
        orbit_index[i] = id;
        orbits[id].push(i);
    }

    Ok(DiagramAction {
        rs: rs.clone(),
        generators: generators.to_vec(),
        orbits,
        orbit_index,
    })
}

/// Same as [`build_action`] but with 1-based permutation images, as written in configs.
pub fn build_action_one_based(rs: &RootSystem, generators: &[Vec<usize>]) -> Result<DiagramAction> {
    let zero_based = generators
        .iter()
        .map(|g| {
            g.iter()
                .map(|&x| {
                    x.checked_sub(1).ok_or_else(|| {
                        Error::InvalidPermutation("generator images are 1-based".into())
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    build_action(rs, &zero_based)
}

pub fn orbit_of(da: &DiagramAction, idx: usize) -> Result<OrbitId> {
    da.orbit_index
        .get(idx)
        .map(|&o| OrbitId(o))
        .ok_or(Error::IndexOutOfRange {
            index: idx,
            rank: da.rank(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_system::{build_root_system, TypeLetter};

    #[test]
    fn a3_flip_orbits() {
        let rs = build_root_system(TypeLetter::A, 3).unwrap();
        let da = build_action(&rs, &[vec![2, 1, 0]]).unwrap();
        assert_eq!(da.orbits(), &[vec![0, 2], vec![1]]);
        assert_eq!(da.orbit_sizes(), vec![2, 1]);
        assert_eq!(orbit_of(&da, 0).unwrap(), orbit_of(&da, 2).unwrap());
        assert_ne!(orbit_of(&da, 0).unwrap(), orbit_of(&da, 1).unwrap());
    }

    #[test]
    fn trivial_action_is_split() {
        let rs = build_root_system(TypeLetter::A, 3).unwrap();
        let da = DiagramAction::trivial(&rs);
        assert_eq!(da.orbit_count(), 3);
        assert!(da.is_split());
        assert_eq!(da.orbit(orbit_of(&da, 1).unwrap()), &[1]);
    }

    #[test]
    fn a2_flip_single_orbit() {
        let rs = build_root_system(TypeLetter::A, 2).unwrap();
        let da = build_action_one_based(&rs, &[vec![2, 1]]).unwrap();
        assert_eq!(da.orbits(), &[vec![0, 1]]);
    }

    #[test]
    fn non_automorphism_rejected() {
        let rs = build_root_system(TypeLetter::A, 3).unwrap();
        let err = build_action(&rs, &[vec![1, 0, 2]]).unwrap_err();
        assert!(matches!(err, Error::NotAutomorphism { .. }), "{err}");
        let rs = build_root_system(TypeLetter::B, 2).unwrap();
        assert!(build_action(&rs, &[vec![1, 0]]).is_err());
    }

    #[test]
    fn bad_inputs_rejected() {
        let rs = build_root_system(TypeLetter::A, 3).unwrap();
        assert!(build_action(&rs, &[vec![0, 1]]).is_err());
        assert!(build_action(&rs, &[vec![0, 0, 1]]).is_err());
        let da = DiagramAction::trivial(&rs);
        assert!(orbit_of(&da, 3).is_err());
    }

    #[test]
    fn d4_triality_orbits() {
        let rs = build_root_system(TypeLetter::D, 4).unwrap();
        let da = build_action(&rs, &[vec![2, 1, 3, 0]]).unwrap();
        assert_eq!(da.orbits(), &[vec![0, 2, 3], vec![1]]);
    }
}
