//! Orthocomplementations, and the ortholattice of biorthogonally closed atom
//! sets induced by an orthogonality relation on atoms.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::atomset::{AtomId, AtomSet, MAX_ATOMS};
use crate::lattice::{Lattice, LatticeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrthoLaw {
    /// Every image must be an element of the lattice.
    Totality,
    /// `x ∧ x⊥ = 0` and `x ∨ x⊥ = 1`.
    Complement,
    /// `x⊥⊥ = x`.
    Involution,
    /// `x ≤ y ⇒ y⊥ ≤ x⊥`.
    OrderReversing,
}

impl fmt::Display for OrthoLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrthoLaw::Totality => "totality",
            OrthoLaw::Complement => "complement law",
            OrthoLaw::Involution => "involution",
            OrthoLaw::OrderReversing => "order reversal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrthoError {
    #[error("candidate has {got} images for {expected} elements")]
    WrongLength { expected: usize, got: usize },
    #[error("orthocomplementation violates the {law} at {witness:?}")]
    Violation { law: OrthoLaw, witness: Vec<AtomSet> },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// A validated orthocomplementation, stored element by element in the
/// canonical element order of its lattice.
#[derive(Clone)]
pub struct OrthoMap {
    images: Vec<AtomSet>,
    lookup: HashMap<AtomSet, AtomSet>,
}

impl PartialEq for OrthoMap {
    fn eq(&self, other: &Self) -> bool {
        self.images == other.images
    }
}

impl Eq for OrthoMap {}

impl Serialize for OrthoMap {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.images.serialize(serializer)
    }
}

impl fmt::Debug for OrthoMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.images.iter()).finish()
    }
}

impl OrthoMap {
    pub(crate) fn new_unchecked(lat: &Lattice, images: Vec<AtomSet>) -> OrthoMap {
        debug_assert_eq!(images.len(), lat.len());
        let lookup = lat.elements().iter().copied().zip(images.iter().copied()).collect();
        OrthoMap { images, lookup }
    }

    /// Validates a candidate map given as images aligned with
    /// `lat.elements()`.
    pub fn validate(lat: &Lattice, candidate: Vec<AtomSet>) -> Result<OrthoMap, OrthoError> {
        if candidate.len() != lat.len() {
            return Err(OrthoError::WrongLength {
                expected: lat.len(),
                got: candidate.len(),
            });
        }
        let els = lat.elements();
        let violation = |law, witness: Vec<AtomSet>| Err(OrthoError::Violation { law, witness });
        for (&x, &img) in els.iter().zip(&candidate) {
            if !lat.is_element(img) {
                return violation(OrthoLaw::Totality, vec![x, img]);
            }
        }
        let map = OrthoMap::new_unchecked(lat, candidate);
        for &x in els {
            let xp = map.apply(x);
            if !x.is_disjoint(xp) || lat.closure(x.union(xp)) != lat.top() {
                return violation(OrthoLaw::Complement, vec![x]);
            }
        }
        for &x in els {
            if map.apply(map.apply(x)) != x {
                return violation(OrthoLaw::Involution, vec![x]);
            }
        }
        for &x in els {
            for &y in els {
                if x.is_proper_subset(y) && !map.apply(y).is_subset(map.apply(x)) {
                    return violation(OrthoLaw::OrderReversing, vec![x, y]);
                }
            }
        }
        Ok(map)
    }

    /// Validates a map given as a function on elements.
    pub fn from_fn(lat: &Lattice, f: impl Fn(AtomSet) -> AtomSet) -> Result<OrthoMap, OrthoError> {
        Self::validate(lat, lat.elements().iter().map(|&x| f(x)).collect())
    }

    /// Extends atom images by `a⊥ = ∧{p⊥ : p ∈ A(a)}` and validates the
    /// result. `atom_images[p]` is the image of atom `p`.
    pub fn from_atom_images(lat: &Lattice, atom_images: &[AtomSet]) -> Result<OrthoMap, OrthoError> {
        if atom_images.len() != lat.atom_count() {
            return Err(OrthoError::WrongLength {
                expected: lat.atom_count(),
                got: atom_images.len(),
            });
        }
        Self::from_fn(lat, |x| extend_by_meets(lat.top(), atom_images, x))
    }

    /// Images aligned with the element order of the lattice.
    pub fn images(&self) -> &[AtomSet] {
        &self.images
    }

    pub fn get(&self, x: AtomSet) -> Option<AtomSet> {
        self.lookup.get(&x).copied()
    }

    /// `x⊥`. Panics if `x` is not an element of the underlying lattice.
    pub fn apply(&self, x: AtomSet) -> AtomSet {
        match self.lookup.get(&x) {
            Some(&y) => y,
            None => panic!("{x} is not an element of the lattice"),
        }
    }

    /// `p ⊥ q`, i.e. `p ≤ q⊥`.
    pub fn atom_perp(&self, p: AtomId, q: AtomId) -> bool {
        self.apply(AtomSet::singleton(q)).contains(p)
    }

    /// The atom-level orthogonality relation of this map.
    pub fn orthogonality(&self, atom_count: usize) -> Vec<AtomSet> {
        (0..atom_count)
            .map(|p| self.apply(AtomSet::singleton(p)))
            .collect()
    }

    /// Whether `x ≤ y` always gives `y = x ∨ (x⊥ ∧ y)`.
    ///
    /// Checked through the equivalent form: `x ≤ y` and `x⊥ ∧ y = 0`
    /// force `x = y`.
    pub fn is_orthomodular(&self, lat: &Lattice) -> bool {
        self.orthomodularity_witness(lat).is_none()
    }

    pub fn orthomodularity_witness(&self, lat: &Lattice) -> Option<(AtomSet, AtomSet)> {
        let els = lat.elements();
        els.iter().find_map(|&x| {
            let xp = self.apply(x);
            els.iter()
                .find(|&&y| x.is_proper_subset(y) && xp.is_disjoint(y))
                .map(|&y| (x, y))
        })
    }

    /// `a = (a ∧ b) ∨ (a ∧ b⊥)`.
    pub fn commutes(&self, lat: &Lattice, a: AtomSet, b: AtomSet) -> Result<bool, LatticeError> {
        let bp = self.get(b).ok_or(LatticeError::ForeignElement(b))?;
        let left = lat.meet([a, b])?;
        let right = lat.meet([a, bp])?;
        Ok(lat.join([left, right])? == a)
    }
}

pub(crate) fn extend_by_meets(top: AtomSet, atom_images: &[AtomSet], x: AtomSet) -> AtomSet {
    x.iter().fold(top, |acc, p| acc.intersection(atom_images[p]))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelationError {
    #[error("relation over {count} atoms exceeds the {MAX_ATOMS}-atom limit")]
    TooManyAtoms { count: usize },
    #[error("pair ({0}, {1}) is out of range")]
    OutOfRange(AtomId, AtomId),
    #[error("relation is not anti-reflexive: atom {0} is related to itself")]
    Reflexive(AtomId),
    #[error("relation is not symmetric: {0} relates to {1} but not back")]
    Asymmetric(AtomId, AtomId),
    #[error("relation is not separating: no atom is related to {0} but not to {1}")]
    NotSeparating(AtomId, AtomId),
}

/// A symmetric, anti-reflexive, separating relation on atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomOrthogonality {
    neighbors: Vec<AtomSet>,
}

impl AtomOrthogonality {
    /// Builds the relation from unordered pairs.
    pub fn from_pairs(
        atom_count: usize,
        pairs: impl IntoIterator<Item = (AtomId, AtomId)>,
    ) -> Result<Self, RelationError> {
        if atom_count > MAX_ATOMS {
            return Err(RelationError::TooManyAtoms { count: atom_count });
        }
        let mut neighbors = vec![AtomSet::EMPTY; atom_count];
        for (p, q) in pairs {
            if p >= atom_count || q >= atom_count {
                return Err(RelationError::OutOfRange(p, q));
            }
            neighbors[p].insert(q);
            neighbors[q].insert(p);
        }
        Self::from_neighbors(neighbors)
    }

    /// `neighbors[p]` is the set of atoms related to `p`.
    pub fn from_neighbors(neighbors: Vec<AtomSet>) -> Result<Self, RelationError> {
        let n = neighbors.len();
        if n > MAX_ATOMS {
            return Err(RelationError::TooManyAtoms { count: n });
        }
        let full = AtomSet::full(n);
        for (p, &nb) in neighbors.iter().enumerate() {
            if let Some(q) = nb.difference(full).first() {
                return Err(RelationError::OutOfRange(p, q));
            }
            if nb.contains(p) {
                return Err(RelationError::Reflexive(p));
            }
            if let Some(q) = nb.iter().find(|&q| !neighbors[q].contains(p)) {
                return Err(RelationError::Asymmetric(p, q));
            }
        }
        for p in 0..n {
            for q in 0..n {
                if p != q && neighbors[p].difference(neighbors[q]).is_empty() {
                    return Err(RelationError::NotSeparating(p, q));
                }
            }
        }
        Ok(AtomOrthogonality { neighbors })
    }

    pub fn atom_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn related(&self, p: AtomId, q: AtomId) -> bool {
        self.neighbors[p].contains(q)
    }

    pub fn neighbors(&self, p: AtomId) -> AtomSet {
        self.neighbors[p]
    }

    /// `S# = {p : p related to every q ∈ S}`; the polar of the empty set is
    /// every atom.
    pub fn polar(&self, s: AtomSet) -> AtomSet {
        s.iter().fold(AtomSet::full(self.atom_count()), |acc, q| {
            acc.intersection(self.neighbors[q])
        })
    }

    pub fn biclosure(&self, s: AtomSet) -> AtomSet {
        self.polar(self.polar(s))
    }

    /// The complete ortholattice of sets with `S = S##`, together with the
    /// map `S ↦ S#`.
    ///
    /// Every polar is an intersection of atom polars, so the closed sets are
    /// generated by intersecting the `{q}#` and no subset enumeration is
    /// needed.
    pub fn closure_lattice(&self) -> (Lattice, OrthoMap) {
        let lat = Lattice::generated_by(self.atom_count(), self.neighbors.iter().copied())
            .expect("a separating relation yields closed singletons and bottom");
        let images = lat.elements().iter().map(|&x| self.polar(x)).collect();
        let ortho = OrthoMap::new_unchecked(&lat, images);
        (lat, ortho)
    }
}

/// Validates `pairs` as an orthogonality relation and builds its ortholattice.
pub fn closure_from_orthogonality(
    atom_count: usize,
    pairs: impl IntoIterator<Item = (AtomId, AtomId)>,
) -> Result<(Lattice, OrthoMap), RelationError> {
    Ok(AtomOrthogonality::from_pairs(atom_count, pairs)?.closure_lattice())
}
