//! Standard finite lattices: MO(n), Boolean algebras, subspace lattices of
//! small finite vector spaces, and the two-element lattice.
//!
//! MO(n) is the finite stand-in for the projective lattice of a
//! two-dimensional Hilbert space: height two, every pair of atoms joins to
//! the top, atoms paired off by the orthocomplementation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atomset::{AtomSet, MAX_ATOMS};
use crate::lattice::{FamilyMode, Lattice};
use crate::ortho::{closure_from_orthogonality, OrthoMap};

pub const DEFAULT_BOOLEAN_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("MO(n) requires n >= 1, got {0}")]
    MoOrder(usize),
    #[error("{what} would need {atoms} atoms, above the cap of {cap}")]
    TooLarge {
        what: String,
        atoms: usize,
        cap: usize,
    },
    #[error("field order {0} is not supported (expected 2, 3, 4 or 5)")]
    FieldOrder(usize),
    #[error("dimension {0} is out of range (expected 1..=4)")]
    Dimension(usize),
}

/// A lattice produced by a builder, with its orthocomplementation when the
/// family carries a standard one.
#[derive(Debug, Clone)]
pub struct Built {
    pub lattice: Lattice,
    pub ortho: Option<OrthoMap>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LatticeSpec {
    Mo { n: usize },
    Boolean { n: usize },
    Subspace { q: usize, d: usize },
    Two,
}

impl LatticeSpec {
    pub fn build(self) -> Result<Built, BuildError> {
        match self {
            LatticeSpec::Mo { n } => {
                let (lattice, ortho) = build_mo(n)?;
                Ok(Built { lattice, ortho: Some(ortho) })
            }
            LatticeSpec::Boolean { n } => {
                let (lattice, ortho) = build_boolean(n)?;
                Ok(Built { lattice, ortho: Some(ortho) })
            }
            LatticeSpec::Subspace { q, d } => Ok(Built {
                lattice: build_subspace_lattice(q, d)?,
                ortho: None,
            }),
            LatticeSpec::Two => Ok(Built {
                lattice: build_two(),
                ortho: None,
            }),
        }
    }

    pub fn name(self) -> String {
        match self {
            LatticeSpec::Mo { n } => format!("MO({n})"),
            LatticeSpec::Boolean { n } => format!("B{n}"),
            LatticeSpec::Subspace { q, d } => format!("Sub(GF({q})^{d})"),
            LatticeSpec::Two => "2".to_string(),
        }
    }
}

/// MO(n): `2n` atoms, closed sets `∅`, the singletons and the full set;
/// atom `2k` is orthogonal to `2k+1`. MO(1) is the four-element Boolean
/// algebra.
pub fn build_mo(n: usize) -> Result<(Lattice, OrthoMap), BuildError> {
    if n == 0 {
        return Err(BuildError::MoOrder(n));
    }
    if 2 * n > MAX_ATOMS {
        return Err(BuildError::TooLarge {
            what: format!("MO({n})"),
            atoms: 2 * n,
            cap: MAX_ATOMS,
        });
    }
    let (lat, ortho) = closure_from_orthogonality(2 * n, (0..n).map(|k| (2 * k, 2 * k + 1)))
        .expect("pairing relation is separating");
    let labels = (0..2 * n)
        .map(|p| if p % 2 == 0 { format!("{}", p / 2) } else { format!("{}'", p / 2) })
        .collect();
    Ok((lat.with_labels(labels).expect("label count"), ortho))
}

pub fn build_boolean(n: usize) -> Result<(Lattice, OrthoMap), BuildError> {
    build_boolean_capped(n, DEFAULT_BOOLEAN_CAP)
}

/// All `2^n` subsets, with set complement.
pub fn build_boolean_capped(n: usize, cap: usize) -> Result<(Lattice, OrthoMap), BuildError> {
    if n > cap.min(MAX_ATOMS) {
        return Err(BuildError::TooLarge {
            what: format!("B{n}"),
            atoms: n,
            cap: cap.min(MAX_ATOMS),
        });
    }
    let lat = Lattice::from_closed_family(
        n,
        (0..1u64 << n).map(AtomSet::from_bits),
        FamilyMode::Validate,
    )
    .expect("power set is a closure system");
    let full = lat.top();
    let ortho = OrthoMap::from_fn(&lat, |x| full.difference(x)).expect("complement is an orthocomplementation");
    Ok((lat, ortho))
}

/// The lattice `2 = {0, 1}` with a single atom.
pub fn build_two() -> Lattice {
    Lattice::from_closed_family(1, [AtomSet::EMPTY, AtomSet::singleton(0)], FamilyMode::Validate)
        .expect("two-element lattice")
}

/// Arithmetic in GF(q) for q ∈ {2, 3, 4, 5}, by lookup tables.
#[derive(Debug, Clone)]
pub struct SmallField {
    q: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
}

impl SmallField {
    pub fn new(q: usize) -> Result<SmallField, BuildError> {
        let (add, mul): (Vec<u8>, Vec<u8>) = match q {
            2 | 3 | 5 => (0..q * q)
                .map(|i| (((i / q + i % q) % q) as u8, ((i / q) * (i % q) % q) as u8))
                .unzip(),
            4 => {
                // GF(2)[x] / (x² + x + 1); element b1·x + b0 stored as bits.
                let mul4 = |a: usize, b: usize| -> u8 {
                    let mut r = 0usize;
                    for i in 0..2 {
                        if b >> i & 1 == 1 {
                            r ^= a << i;
                        }
                    }
                    if r & 0b100 != 0 {
                        r ^= 0b111;
                    }
                    r as u8
                };
                (0..16).map(|i| (((i / 4) ^ (i % 4)) as u8, mul4(i / 4, i % 4))).unzip()
            }
            _ => return Err(BuildError::FieldOrder(q)),
        };
        Ok(SmallField { q, add, mul })
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.q + b as usize]
    }

    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q + b as usize]
    }

    pub fn dot(&self, u: &[u8], v: &[u8]) -> u8 {
        u.iter().zip(v).fold(0, |acc, (&a, &b)| self.add(acc, self.mul(a, b)))
    }
}

/// Representatives of the 1-dimensional subspaces of GF(q)^d: nonzero
/// vectors whose first nonzero coordinate is 1, in lexicographic order.
pub fn projective_points(q: usize, d: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let total = q.pow(d as u32);
    for code in 1..total {
        let mut v = vec![0u8; d];
        let mut c = code;
        for slot in v.iter_mut().rev() {
            *slot = (c % q) as u8;
            c /= q;
        }
        if v.iter().find(|&&x| x != 0) == Some(&1) {
            out.push(v);
        }
    }
    out
}

/// Subspace lattice of GF(q)^d as a closure system on its points. Every
/// subspace is an intersection of hyperplanes, so the family is generated
/// by the hyperplanes `{v : f·v = 0}`.
pub fn build_subspace_lattice(q: usize, d: usize) -> Result<Lattice, BuildError> {
    let field = SmallField::new(q)?;
    if !(1..=4).contains(&d) {
        return Err(BuildError::Dimension(d));
    }
    let points = projective_points(q, d);
    if points.len() > MAX_ATOMS {
        return Err(BuildError::TooLarge {
            what: format!("Sub(GF({q})^{d})"),
            atoms: points.len(),
            cap: MAX_ATOMS,
        });
    }
    // Functionals are normalized the same way as points.
    let hyperplanes = points.iter().map(|f| {
        points
            .iter()
            .enumerate()
            .filter(|(_, v)| field.dot(f, v) == 0)
            .map(|(i, _)| i)
            .collect::<AtomSet>()
    });
    let lat = Lattice::generated_by(points.len(), hyperplanes).expect("points are closed");
    let labels = points
        .iter()
        .map(|v| {
            let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            format!("({})", parts.join(","))
        })
        .collect();
    Ok(lat.with_labels(labels).expect("label count"))
}
