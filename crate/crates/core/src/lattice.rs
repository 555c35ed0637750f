//! Finite complete atomistic lattices as closure systems on their atoms.
//!
//! An element `a` is identified with its atom set `A(a)`. The family of
//! those sets contains the empty set, every singleton and the full set, and
//! is closed under intersection. Meets are intersections; the join of a
//! collection is the smallest closed superset of the union.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::atomset::{AtomId, AtomSet, MAX_ATOMS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("atom count {count} exceeds the cap of {cap}")]
    TooManyAtoms { count: usize, cap: usize },
    #[error("the family of closed sets is empty")]
    EmptyFamily,
    #[error("set {set} mentions atom {atom}, outside 0..{atom_count}")]
    AtomOutOfRange {
        set: AtomSet,
        atom: AtomId,
        atom_count: usize,
    },
    #[error("closed set {0} appears more than once")]
    Duplicate(AtomSet),
    #[error("missing top: the full atom set {0} is not in the family")]
    MissingTop(AtomSet),
    #[error("missing bottom: the empty set is not in the family")]
    MissingBottom,
    #[error("atom {0} is not an element: singleton {{{0}}} is missing")]
    MissingSingleton(AtomId),
    #[error("not closed under intersection: {left} ∩ {right} = {missing} is missing")]
    NotIntersectionClosed {
        left: AtomSet,
        right: AtomSet,
        missing: AtomSet,
    },
    #[error("{0} is not an element of this lattice")]
    ForeignElement(AtomSet),
    #[error("expected {expected} atom labels, got {got}")]
    LabelCount { expected: usize, got: usize },
}

/// How [`Lattice::from_closed_family`] treats its input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyMode {
    /// Accept the family only if it already is a closure system.
    Validate,
    /// Add top, bottom and singletons, then close under intersection.
    Complete,
}

#[derive(Clone)]
pub struct Lattice {
    atom_count: usize,
    closed: Vec<AtomSet>,
    index: HashMap<AtomSet, usize>,
    irreducibles: Vec<AtomSet>,
    labels: Option<Vec<String>>,
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.atom_count == other.atom_count && self.closed == other.closed
    }
}

impl Eq for Lattice {}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lattice")
            .field("atom_count", &self.atom_count)
            .field("closed", &self.closed)
            .finish()
    }
}

/// Closes `gens` under intersection inside `universe`; the universe itself is
/// always included (the empty intersection).
pub(crate) fn intersection_closure(
    universe: AtomSet,
    gens: impl IntoIterator<Item = AtomSet>,
) -> Vec<AtomSet> {
    let mut seen: HashSet<AtomSet> = HashSet::new();
    seen.insert(universe);
    let mut family = vec![universe];
    for g in gens {
        if seen.contains(&g) {
            continue;
        }
        let n = family.len();
        for i in 0..n {
            let x = family[i].intersection(g);
            if seen.insert(x) {
                family.push(x);
            }
        }
    }
    family
}

impl Lattice {
    /// Builds a lattice from a family of atom sets, with the default cap of
    /// [`MAX_ATOMS`] atoms.
    pub fn from_closed_family(
        atom_count: usize,
        sets: impl IntoIterator<Item = AtomSet>,
        mode: FamilyMode,
    ) -> Result<Lattice, LatticeError> {
        Self::from_closed_family_capped(atom_count, sets, mode, MAX_ATOMS)
    }

    pub fn from_closed_family_capped(
        atom_count: usize,
        sets: impl IntoIterator<Item = AtomSet>,
        mode: FamilyMode,
        cap: usize,
    ) -> Result<Lattice, LatticeError> {
        let cap = cap.min(MAX_ATOMS);
        if atom_count > cap {
            return Err(LatticeError::TooManyAtoms {
                count: atom_count,
                cap,
            });
        }
        let sets: Vec<AtomSet> = sets.into_iter().collect();
        if sets.is_empty() {
            return Err(LatticeError::EmptyFamily);
        }
        let full = AtomSet::full(atom_count);
        for &s in &sets {
            if let Some(atom) = s.difference(full).first() {
                return Err(LatticeError::AtomOutOfRange {
                    set: s,
                    atom,
                    atom_count,
                });
            }
        }
        match mode {
            FamilyMode::Complete => {
                let extra = std::iter::once(AtomSet::EMPTY)
                    .chain((0..atom_count).map(AtomSet::singleton));
                Self::generated_by(atom_count, sets.into_iter().chain(extra))
            }
            FamilyMode::Validate => {
                let mut seen = HashSet::with_capacity(sets.len());
                for &s in &sets {
                    if !seen.insert(s) {
                        return Err(LatticeError::Duplicate(s));
                    }
                }
                if !seen.contains(&full) {
                    return Err(LatticeError::MissingTop(full));
                }
                if !seen.contains(&AtomSet::EMPTY) {
                    return Err(LatticeError::MissingBottom);
                }
                for p in 0..atom_count {
                    if !seen.contains(&AtomSet::singleton(p)) {
                        return Err(LatticeError::MissingSingleton(p));
                    }
                }
                let mut sorted = sets;
                sorted.sort();
                for (i, &a) in sorted.iter().enumerate() {
                    for &b in &sorted[i + 1..] {
                        let m = a.intersection(b);
                        if m != a && m != b && !seen.contains(&m) {
                            return Err(LatticeError::NotIntersectionClosed {
                                left: a,
                                right: b,
                                missing: m,
                            });
                        }
                    }
                }
                Ok(Self::assemble(atom_count, sorted))
            }
        }
    }

    /// The closure system generated by `gens`: all their intersections plus
    /// the full set. Fails if the result is not atomistic (missing bottom or
    /// a singleton).
    pub fn generated_by(
        atom_count: usize,
        gens: impl IntoIterator<Item = AtomSet>,
    ) -> Result<Lattice, LatticeError> {
        if atom_count > MAX_ATOMS {
            return Err(LatticeError::TooManyAtoms {
                count: atom_count,
                cap: MAX_ATOMS,
            });
        }
        let full = AtomSet::full(atom_count);
        let gens: Vec<AtomSet> = gens.into_iter().collect();
        for &s in &gens {
            if let Some(atom) = s.difference(full).first() {
                return Err(LatticeError::AtomOutOfRange {
                    set: s,
                    atom,
                    atom_count,
                });
            }
        }
        let mut family = intersection_closure(full, gens);
        let present: HashSet<AtomSet> = family.iter().copied().collect();
        if !present.contains(&AtomSet::EMPTY) {
            return Err(LatticeError::MissingBottom);
        }
        for p in 0..atom_count {
            if !present.contains(&AtomSet::singleton(p)) {
                return Err(LatticeError::MissingSingleton(p));
            }
        }
        family.sort();
        Ok(Self::assemble(atom_count, family))
    }

    fn assemble(atom_count: usize, closed: Vec<AtomSet>) -> Lattice {
        debug_assert!(closed.windows(2).all(|w| w[0] < w[1]));
        let index = closed.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let full = AtomSet::full(atom_count);
        let irreducibles = closed
            .iter()
            .copied()
            .filter(|&x| {
                x != full
                    && closed
                        .iter()
                        .filter(|&&y| x.is_proper_subset(y))
                        .fold(full, |acc, &y| acc.intersection(y))
                        != x
            })
            .collect();
        Lattice {
            atom_count,
            closed,
            index,
            irreducibles,
            labels: None,
        }
    }

    /// Attaches display labels, one per atom.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Lattice, LatticeError> {
        if labels.len() != self.atom_count {
            return Err(LatticeError::LabelCount {
                expected: self.atom_count,
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn atom_label(&self, p: AtomId) -> String {
        match &self.labels {
            Some(l) => l[p].clone(),
            None => p.to_string(),
        }
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    /// Number of elements.
    pub fn len(&self) -> usize {
        self.closed.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The one-element lattice (no atoms, `0 = 1`).
    pub fn is_degenerate(&self) -> bool {
        self.atom_count == 0
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> &[AtomSet] {
        &self.closed
    }

    pub fn element_index(&self, x: AtomSet) -> Option<usize> {
        self.index.get(&x).copied()
    }

    pub fn is_element(&self, x: AtomSet) -> bool {
        self.index.contains_key(&x)
    }

    pub fn top(&self) -> AtomSet {
        AtomSet::full(self.atom_count)
    }

    pub fn bottom(&self) -> AtomSet {
        AtomSet::EMPTY
    }

    /// Meet-irreducible elements. Every element is an intersection of these.
    pub fn irreducibles(&self) -> &[AtomSet] {
        &self.irreducibles
    }

    /// Smallest element containing an arbitrary atom set.
    pub fn closure(&self, s: AtomSet) -> AtomSet {
        self.irreducibles
            .iter()
            .filter(|&&m| s.is_subset(m))
            .fold(self.top(), |acc, &m| acc.intersection(m))
    }

    fn check(&self, x: AtomSet) -> Result<AtomSet, LatticeError> {
        if self.is_element(x) {
            Ok(x)
        } else {
            Err(LatticeError::ForeignElement(x))
        }
    }

    pub fn leq(&self, x: AtomSet, y: AtomSet) -> Result<bool, LatticeError> {
        Ok(self.check(x)?.is_subset(self.check(y)?))
    }

    /// Meet of a collection; the empty meet is top.
    pub fn meet(&self, xs: impl IntoIterator<Item = AtomSet>) -> Result<AtomSet, LatticeError> {
        xs.into_iter()
            .try_fold(self.top(), |acc, x| Ok(acc.intersection(self.check(x)?)))
    }

    /// Join of a collection; the empty join is bottom.
    pub fn join(&self, xs: impl IntoIterator<Item = AtomSet>) -> Result<AtomSet, LatticeError> {
        let union = xs
            .into_iter()
            .try_fold(AtomSet::EMPTY, |acc, x| Ok(acc.union(self.check(x)?)))?;
        Ok(self.closure(union))
    }

    pub fn atoms(&self) -> Vec<AtomSet> {
        (0..self.atom_count).map(AtomSet::singleton).collect()
    }

    /// `y` covers `x`: `x < y` with no element strictly between.
    pub fn is_cover(&self, x: AtomSet, y: AtomSet) -> bool {
        // Any z with x < z < y contains some q in y \ x, and then
        // closure(x ∪ {q}) ⊆ z ⊊ y.
        x.is_proper_subset(y)
            && y.difference(x)
                .iter()
                .all(|q| self.closure(x.with(q)) == y)
    }

    /// Upper covers of `x`, in canonical order.
    pub fn upper_covers(&self, x: AtomSet) -> Vec<AtomSet> {
        let mut candidates: Vec<AtomSet> = self
            .top()
            .difference(x)
            .iter()
            .map(|p| self.closure(x.with(p)))
            .collect();
        candidates.sort();
        candidates.dedup();
        candidates
            .iter()
            .copied()
            .filter(|&y| !candidates.iter().any(|&z| z.is_proper_subset(y)))
            .collect()
    }

    /// Maximal proper elements.
    pub fn coatoms(&self) -> Vec<AtomSet> {
        let top = self.top();
        self.closed
            .iter()
            .copied()
            .filter(|&y| y != top && self.is_cover(y, top))
            .collect()
    }

    /// Every cover pair `(x, y)`, ordered by `x` then `y`.
    pub fn covers(&self) -> Vec<(AtomSet, AtomSet)> {
        self.closed
            .iter()
            .flat_map(|&x| self.upper_covers(x).into_iter().map(move |y| (x, y)))
            .collect()
    }

    /// Every element is the meet of the coatoms above it.
    pub fn is_coatomistic(&self) -> bool {
        let coatoms = self.coatoms();
        self.closed.iter().all(|&x| {
            coatoms
                .iter()
                .filter(|&&c| x.is_subset(c))
                .fold(self.top(), |acc, &c| acc.intersection(c))
                == x
        })
    }

    /// For every atom `p` and element `a` with `p ∉ a`, `a ∨ p` covers `a`.
    pub fn has_covering_property(&self) -> bool {
        self.covering_property_witness().is_none()
    }

    /// First `(a, p)` where `a ∨ p` fails to cover `a`.
    pub fn covering_property_witness(&self) -> Option<(AtomSet, AtomId)> {
        self.closed.iter().find_map(|&a| {
            self.top().difference(a).iter().find_map(|p| {
                let y = self.closure(a.with(p));
                (!self.is_cover(a, y)).then_some((a, p))
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(xs: &[usize]) -> AtomSet {
        xs.iter().collect()
    }

    fn mo2() -> Lattice {
        Lattice::from_closed_family(
            4,
            [s(&[]), s(&[0]), s(&[1]), s(&[2]), s(&[3]), s(&[0, 1, 2, 3])],
            FamilyMode::Validate,
        )
        .unwrap()
    }

    fn boolean(n: usize) -> Lattice {
        Lattice::from_closed_family(
            n,
            (0..1u64 << n).map(AtomSet::from_bits),
            FamilyMode::Validate,
        )
        .unwrap()
    }

    #[test]
    fn mo2_from_family() {
        let l = mo2();
        assert_eq!(l.len(), 6);
        assert_eq!(l.atom_count(), 4);
    }

    #[test]
    fn completion_of_b2() {
        let l = Lattice::from_closed_family(2, [s(&[0, 1])], FamilyMode::Complete).unwrap();
        assert_eq!(l.elements(), &[s(&[]), s(&[0]), s(&[0, 1]), s(&[1])]);
    }

    #[test]
    fn validation_errors() {
        let e = Lattice::from_closed_family(2, [s(&[0]), s(&[1])], FamilyMode::Validate);
        assert_eq!(e.unwrap_err(), LatticeError::MissingTop(s(&[0, 1])));

        let e = Lattice::from_closed_family(
            4,
            [
                s(&[]),
                s(&[0]),
                s(&[1]),
                s(&[2]),
                s(&[3]),
                s(&[0, 1, 2]),
                s(&[1, 2, 3]),
                s(&[0, 1, 2, 3]),
            ],
            FamilyMode::Validate,
        );
        assert_eq!(
            e.unwrap_err(),
            LatticeError::NotIntersectionClosed {
                left: s(&[0, 1, 2]),
                right: s(&[1, 2, 3]),
                missing: s(&[1, 2]),
            }
        );
    }

    #[test]
    fn missing_singleton_and_range() {
        let e = Lattice::from_closed_family(2, [s(&[]), s(&[0]), s(&[0, 1])], FamilyMode::Validate);
        assert_eq!(e.unwrap_err(), LatticeError::MissingSingleton(1));
        let e = Lattice::from_closed_family(2, [s(&[]), s(&[5])], FamilyMode::Validate);
        assert!(matches!(e, Err(LatticeError::AtomOutOfRange { atom: 5, .. })));
        let e = Lattice::from_closed_family(2, Vec::new(), FamilyMode::Validate);
        assert_eq!(e.unwrap_err(), LatticeError::EmptyFamily);
        let e = Lattice::from_closed_family_capped(9, [s(&[])], FamilyMode::Complete, 8);
        assert!(matches!(e, Err(LatticeError::TooManyAtoms { count: 9, cap: 8 })));
    }

    #[test]
    fn order_and_operations() {
        let l = mo2();
        assert!(l.leq(s(&[0]), l.top()).unwrap());
        assert!(!l.leq(s(&[0]), s(&[1])).unwrap());
        assert_eq!(l.join([s(&[0]), s(&[1])]).unwrap(), l.top());
        assert_eq!(l.meet([s(&[0]), s(&[2])]).unwrap(), AtomSet::EMPTY);
        assert_eq!(l.meet(std::iter::empty()).unwrap(), l.top());
        assert_eq!(l.join(std::iter::empty()).unwrap(), AtomSet::EMPTY);
        assert_eq!(l.leq(s(&[0, 1]), l.top()), Err(LatticeError::ForeignElement(s(&[0, 1]))));

        let b3 = boolean(3);
        assert!(b3.leq(s(&[0]), s(&[0, 1])).unwrap());
        assert_eq!(b3.join([s(&[0]), s(&[1])]).unwrap(), s(&[0, 1]));
    }

    #[test]
    fn atoms_coatoms_covers() {
        let l = mo2();
        assert_eq!(l.coatoms(), vec![s(&[0]), s(&[1]), s(&[2]), s(&[3])]);
        assert_eq!(boolean(3).coatoms(), vec![s(&[0, 1]), s(&[0, 2]), s(&[1, 2])]);
        assert_eq!(
            boolean(2).covers(),
            vec![
                (s(&[]), s(&[0])),
                (s(&[]), s(&[1])),
                (s(&[0]), s(&[0, 1])),
                (s(&[1]), s(&[0, 1])),
            ]
        );
    }

    #[test]
    fn structural_predicates() {
        let l = mo2();
        assert!(l.is_coatomistic());
        assert!(l.has_covering_property());
        let b3 = boolean(3);
        assert!(b3.is_coatomistic());
        assert!(b3.has_covering_property());

        let odd = Lattice::from_closed_family(
            3,
            [s(&[]), s(&[0]), s(&[1]), s(&[2]), s(&[0, 1]), s(&[0, 1, 2])],
            FamilyMode::Validate,
        )
        .unwrap();
        assert!(!odd.has_covering_property());
        // {0} < {0,1} < {0,1,2} = {0} ∨ {2}
        assert_eq!(odd.covering_property_witness(), Some((s(&[0]), 2)));
    }

    #[test]
    fn atoms_cover_bottom_and_coatoms_cocover_top() {
        for l in [mo2(), boolean(3), boolean(0)] {
            let bottom_covers: Vec<_> = l
                .covers()
                .into_iter()
                .filter(|(x, _)| x.is_empty())
                .map(|(_, y)| y)
                .collect();
            assert_eq!(bottom_covers, l.atoms());
            let mut top_cocovers: Vec<_> = l
                .covers()
                .into_iter()
                .filter(|&(_, y)| y == l.top())
                .map(|(x, _)| x)
                .collect();
            top_cocovers.sort();
            assert_eq!(top_cocovers, l.coatoms());
        }
    }

    fn arb_lattice() -> impl Strategy<Value = Lattice> {
        (1usize..=8).prop_flat_map(|n| {
            prop::collection::vec(0u64..(1u64 << n), 1..6).prop_map(move |gens| {
                Lattice::from_closed_family(
                    n,
                    gens.into_iter().map(AtomSet::from_bits),
                    FamilyMode::Complete,
                )
                .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn lattice_laws(l in arb_lattice()) {
            let els = l.elements();
            for &x in els {
                for &y in els {
                    let m = l.meet([x, y]).unwrap();
                    let j = l.join([x, y]).unwrap();
                    prop_assert!(l.is_element(m) && l.is_element(j));
                    prop_assert_eq!(m, x.intersection(y));
                    prop_assert_eq!(l.meet([x, j]).unwrap(), x);
                    prop_assert_eq!(l.join([x, m]).unwrap(), x);
                    prop_assert_eq!(j, l.join([y, x]).unwrap());
                    // least upper bound
                    for &z in els {
                        if x.is_subset(z) && y.is_subset(z) {
                            prop_assert!(j.is_subset(z));
                        }
                    }
                }
            }
        }

        #[test]
        fn join_and_meet_associate(l in arb_lattice()) {
            let els = l.elements();
            for &x in els.iter().take(8) {
                for &y in els.iter().take(8) {
                    for &z in els.iter().take(8) {
                        let a = l.join([l.join([x, y]).unwrap(), z]).unwrap();
                        let b = l.join([x, l.join([y, z]).unwrap()]).unwrap();
                        prop_assert_eq!(a, b);
                        prop_assert_eq!(l.join([x, y, z]).unwrap(), a);
                    }
                }
            }
        }

        #[test]
        fn completed_family_validates(l in arb_lattice()) {
            let again = Lattice::from_closed_family(
                l.atom_count(),
                l.elements().iter().copied(),
                FamilyMode::Validate,
            );
            prop_assert_eq!(again.unwrap(), l);
        }
    }
}
