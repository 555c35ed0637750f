//! The separated product of two complete atomistic lattices.
//!
//! Pair-atoms `(p1, p2)` are linearized as `p1 · |A(L2)| + p2`. Two
//! constructions are provided:
//!
//! * [`aerts_product_general`]: all intersections of the cross-shaped sets
//!   `A(a1)×A(L2) ∪ A(L1)×A(a2)`; works for any pair of lattices.
//! * [`aerts_product_sharp`]: the biorthogonally closed sets of the relation
//!   `(p1,p2) # (q1,q2) ⇔ p1 ⊥ q1 or p2 ⊥ q2`; needs orthocomplementations on
//!   both factors and produces one on the product.
//!
//! The two agree whenever both apply.

use std::collections::HashMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atomset::{AtomId, AtomSet, MAX_ATOMS};
use crate::lattice::{Lattice, LatticeError};
use crate::ortho::{AtomOrthogonality, OrthoMap, RelationError};
use crate::report::{CheckOutcome, Witness};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProductError {
    #[error("factor {0} has no atoms")]
    EmptyFactor(usize),
    #[error("product of {left} and {right} atoms exceeds the {MAX_ATOMS}-atom cap")]
    TooManyAtoms { left: usize, right: usize },
    #[error("embedding h{which} has {got} images for {expected} elements")]
    EmbeddingLength {
        which: usize,
        expected: usize,
        got: usize,
    },
    #[error("embedding h{which} sends element {element} to {image}, which is not closed")]
    EmbeddingImage {
        which: usize,
        element: AtomSet,
        image: AtomSet,
    },
    #[error("orthocomplementation has {got} images for {expected} elements")]
    OrthoLength { expected: usize, got: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Relation(#[from] RelationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Generators,
    Sharp,
    External,
}

/// An atom of `A(L1) × A(L2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairAtom {
    pub left: AtomId,
    pub right: AtomId,
}

impl PairAtom {
    pub fn new(left: AtomId, right: AtomId) -> PairAtom {
        PairAtom { left, right }
    }

    pub fn index(self, right_count: usize) -> AtomId {
        self.left * right_count + self.right
    }

    pub fn from_index(i: AtomId, right_count: usize) -> PairAtom {
        PairAtom {
            left: i / right_count,
            right: i % right_count,
        }
    }
}

/// A lattice over pair-atoms together with embeddings of both factors.
#[derive(Debug, Clone)]
pub struct ProductLattice {
    left: Lattice,
    right: Lattice,
    base: Lattice,
    h1: Vec<AtomSet>,
    h2: Vec<AtomSet>,
    route: Route,
    ortho: Option<OrthoMap>,
    atom_products: Vec<AtomSet>,
    h1_index: HashMap<AtomSet, AtomSet>,
    h2_index: HashMap<AtomSet, AtomSet>,
}

/// `A1 × A2` in the canonical linearization.
pub fn canonical_obar(a1: AtomSet, a2: AtomSet, right_count: usize) -> AtomSet {
    a1.iter()
        .flat_map(|p| a2.iter().map(move |q| PairAtom::new(p, q).index(right_count)))
        .collect()
}

fn check_factor_sizes(left: &Lattice, right: &Lattice) -> Result<(), ProductError> {
    if left.atom_count() == 0 {
        return Err(ProductError::EmptyFactor(1));
    }
    if right.atom_count() == 0 {
        return Err(ProductError::EmptyFactor(2));
    }
    if left.atom_count() * right.atom_count() > MAX_ATOMS {
        return Err(ProductError::TooManyAtoms {
            left: left.atom_count(),
            right: right.atom_count(),
        });
    }
    Ok(())
}

fn pair_labels(left: &Lattice, right: &Lattice) -> Vec<String> {
    (0..left.atom_count())
        .flat_map(|p| {
            (0..right.atom_count())
                .map(move |q| format!("({},{})", left.atom_label(p), right.atom_label(q)))
        })
        .collect()
}

impl ProductLattice {
    /// Assembles a product from explicit parts. `h1[i]` is the image of
    /// `left.elements()[i]`, likewise for `h2`.
    pub fn from_parts(
        left: Lattice,
        right: Lattice,
        base: Lattice,
        h1: Vec<AtomSet>,
        h2: Vec<AtomSet>,
        ortho: Option<OrthoMap>,
        route: Route,
    ) -> Result<ProductLattice, ProductError> {
        for (which, factor, h) in [(1, &left, &h1), (2, &right, &h2)] {
            if h.len() != factor.len() {
                return Err(ProductError::EmbeddingLength {
                    which,
                    expected: factor.len(),
                    got: h.len(),
                });
            }
            for (&element, &image) in factor.elements().iter().zip(h) {
                if !base.is_element(image) {
                    return Err(ProductError::EmbeddingImage { which, element, image });
                }
            }
        }
        if let Some(o) = &ortho {
            if o.images().len() != base.len() {
                return Err(ProductError::OrthoLength {
                    expected: base.len(),
                    got: o.images().len(),
                });
            }
        }
        let h1_index: HashMap<_, _> = left.elements().iter().copied().zip(h1.iter().copied()).collect();
        let h2_index: HashMap<_, _> = right.elements().iter().copied().zip(h2.iter().copied()).collect();
        let atom_products = (0..left.atom_count())
            .flat_map(|p| {
                let row = h1_index[&AtomSet::singleton(p)];
                (0..right.atom_count()).map(move |q| (row, q))
            })
            .map(|(row, q)| row.intersection(h2_index[&AtomSet::singleton(q)]))
            .collect();
        Ok(ProductLattice {
            left,
            right,
            base,
            h1,
            h2,
            route,
            ortho,
            atom_products,
            h1_index,
            h2_index,
        })
    }

    fn canonical(
        left: &Lattice,
        right: &Lattice,
        base: Lattice,
        ortho: Option<OrthoMap>,
        route: Route,
    ) -> Result<ProductLattice, ProductError> {
        let n2 = right.atom_count();
        let all1 = left.top();
        let all2 = right.top();
        let h1 = left.elements().iter().map(|&a| canonical_obar(a, all2, n2)).collect();
        let h2 = right.elements().iter().map(|&a| canonical_obar(all1, a, n2)).collect();
        let base = base.with_labels(pair_labels(left, right))?;
        Self::from_parts(left.clone(), right.clone(), base, h1, h2, ortho, route)
    }

    /// Replaces the orthocomplementation (which must belong to `base`).
    pub fn with_ortho(mut self, ortho: OrthoMap) -> Result<ProductLattice, ProductError> {
        if ortho.images().len() != self.base.len() {
            return Err(ProductError::OrthoLength {
                expected: self.base.len(),
                got: ortho.images().len(),
            });
        }
        self.ortho = Some(ortho);
        Ok(self)
    }

    pub fn left(&self) -> &Lattice {
        &self.left
    }

    pub fn right(&self) -> &Lattice {
        &self.right
    }

    pub fn base(&self) -> &Lattice {
        &self.base
    }

    pub fn route(&self) -> Route {
        self.route
    }

    pub fn ortho(&self) -> Option<&OrthoMap> {
        self.ortho.as_ref()
    }

    pub fn left_atoms(&self) -> usize {
        self.left.atom_count()
    }

    pub fn right_atoms(&self) -> usize {
        self.right.atom_count()
    }

    /// Images of the left embedding, aligned with `left().elements()`.
    pub fn h1_table(&self) -> &[AtomSet] {
        &self.h1
    }

    pub fn h2_table(&self) -> &[AtomSet] {
        &self.h2
    }

    pub fn h1(&self, a1: AtomSet) -> Result<AtomSet, LatticeError> {
        self.h1_index.get(&a1).copied().ok_or(LatticeError::ForeignElement(a1))
    }

    pub fn h2(&self, a2: AtomSet) -> Result<AtomSet, LatticeError> {
        self.h2_index.get(&a2).copied().ok_or(LatticeError::ForeignElement(a2))
    }

    /// `a1 ⊗ a2 = h1(a1) ∧ h2(a2)`.
    pub fn otimes(&self, a1: AtomSet, a2: AtomSet) -> Result<AtomSet, LatticeError> {
        Ok(self.h1(a1)?.intersection(self.h2(a2)?))
    }

    /// `p1 ⊗ p2` for atoms.
    pub fn atom_product(&self, p1: AtomId, p2: AtomId) -> AtomSet {
        self.atom_products[p1 * self.right.atom_count() + p2]
    }

    /// The base atom equal to `p1 ⊗ p2`, if that product is an atom.
    pub fn pair_atom(&self, p1: AtomId, p2: AtomId) -> Option<AtomId> {
        let x = self.atom_product(p1, p2);
        (x.len() == 1).then(|| x.first().unwrap())
    }

    /// `A1 ⊗̄ A2 = {p1 ⊗ p2 : p1 ∈ A1, p2 ∈ A2}` as a raw atom set.
    pub fn obar(&self, a1: AtomSet, a2: AtomSet) -> AtomSet {
        a1.iter()
            .flat_map(|p| a2.iter().map(move |q| (p, q)))
            .fold(AtomSet::EMPTY, |acc, (p, q)| acc.union(self.atom_product(p, q)))
    }

    /// `{p} ⊗̄ A(L2)`.
    pub fn row(&self, p1: AtomId) -> AtomSet {
        self.obar(AtomSet::singleton(p1), self.right.top())
    }

    /// `A(L1) ⊗̄ {q}`.
    pub fn column(&self, p2: AtomId) -> AtomSet {
        self.obar(self.left.top(), AtomSet::singleton(p2))
    }

    /// Inverse of the atom table: base atom -> pair, when `p1 ⊗ p2` are
    /// distinct atoms covering every base atom.
    pub fn decomposition(&self) -> Option<Vec<PairAtom>> {
        let n = self.base.atom_count();
        if self.atom_products.len() != n {
            return None;
        }
        let mut out: Vec<Option<PairAtom>> = vec![None; n];
        for p1 in 0..self.left_atoms() {
            for p2 in 0..self.right_atoms() {
                let a = self.pair_atom(p1, p2)?;
                if out[a].replace(PairAtom::new(p1, p2)).is_some() {
                    return None;
                }
            }
        }
        out.into_iter().collect()
    }
}

/// Separated product as all intersections of
/// `A(a1)×A(L2) ∪ A(L1)×A(a2)` over `(a1, a2) ∈ L1 × L2`.
pub fn aerts_product_general(left: &Lattice, right: &Lattice) -> Result<ProductLattice, ProductError> {
    check_factor_sizes(left, right)?;
    let n2 = right.atom_count();
    let n = left.atom_count() * n2;
    let gens = left.elements().iter().flat_map(|&a1| {
        let row = canonical_obar(a1, right.top(), n2);
        right
            .elements()
            .iter()
            .map(move |&a2| row.union(canonical_obar(left.top(), a2, n2)))
    });
    let base = Lattice::generated_by(n, gens)?;
    ProductLattice::canonical(left, right, base, None, Route::Generators)
}

/// `(p1,p2) # (q1,q2)` iff `p1 ⊥1 q1` or `p2 ⊥2 q2`.
pub fn sharp_relation(
    left: &Lattice,
    o1: &OrthoMap,
    right: &Lattice,
    o2: &OrthoMap,
) -> Result<AtomOrthogonality, ProductError> {
    check_factor_sizes(left, right)?;
    let n2 = right.atom_count();
    let neighbors = (0..left.atom_count())
        .flat_map(|p1| (0..n2).map(move |p2| (p1, p2)))
        .map(|(p1, p2)| {
            let perp1 = o1.apply(AtomSet::singleton(p1));
            let perp2 = o2.apply(AtomSet::singleton(p2));
            canonical_obar(perp1, right.top(), n2).union(canonical_obar(left.top(), perp2, n2))
        })
        .collect();
    Ok(AtomOrthogonality::from_neighbors(neighbors)?)
}

/// Separated product as the biorthogonally closed sets of `#`, carrying the
/// orthocomplementation `S ↦ S#`.
pub fn aerts_product_sharp(
    left: &Lattice,
    o1: &OrthoMap,
    right: &Lattice,
    o2: &OrthoMap,
) -> Result<ProductLattice, ProductError> {
    let rel = sharp_relation(left, o1, right, o2)?;
    let (base, ortho) = rel.closure_lattice();
    ProductLattice::canonical(left, right, base, Some(ortho), Route::Sharp)
}

#[derive(Debug, Clone, Serialize)]
pub struct LateralJoinReport {
    /// `{(p1,p2)} ∨ {(p1,q2)} = {p1} × A(p2 ∨ q2)`.
    pub left_lateral: CheckOutcome,
    /// `{(p1,p2)} ∨ {(q1,p2)} = A(p1 ∨ q1) × {p2}`.
    pub right_lateral: CheckOutcome,
    /// `∨{h1(a) : a ∈ ω} = h1(∨ω)` for small `ω ⊆ L1`.
    pub left_joins: CheckOutcome,
    /// `∨{h2(a) : a ∈ ω} = h2(∨ω)` for small `ω ⊆ L2`.
    pub right_joins: CheckOutcome,
}

impl LateralJoinReport {
    pub fn passed(&self) -> bool {
        self.left_lateral.passed()
            && self.right_lateral.passed()
            && self.left_joins.passed()
            && self.right_joins.passed()
    }
}

pub const DEFAULT_SUBSET_SIZE: usize = 3;

/// Checks the lateral-join formulas of the separated product exhaustively,
/// and join preservation of the embeddings on every family of at most
/// `max_subset` elements.
pub fn lateral_join_check(p: &ProductLattice, max_subset: usize) -> LateralJoinReport {
    let base = p.base();
    let (n1, n2) = (p.left_atoms(), p.right_atoms());
    let mut left_lateral = CheckOutcome::default();
    for p1 in 0..n1 {
        for p2 in 0..n2 {
            for q2 in (0..n2).filter(|&q2| q2 != p2) {
                let x = p.atom_product(p1, p2);
                let y = p.atom_product(p1, q2);
                let got = base.closure(x.union(y));
                let line = p.right().closure(AtomSet::singleton(p2).with(q2));
                let want = p.obar(AtomSet::singleton(p1), line);
                left_lateral.record(got == want, || {
                    Witness::new(format!("({p1},{p2}) ∨ ({p1},{q2})"), vec![got, want])
                });
            }
        }
    }
    let mut right_lateral = CheckOutcome::default();
    for p2 in 0..n2 {
        for p1 in 0..n1 {
            for q1 in (0..n1).filter(|&q1| q1 != p1) {
                let x = p.atom_product(p1, p2);
                let y = p.atom_product(q1, p2);
                let got = base.closure(x.union(y));
                let line = p.left().closure(AtomSet::singleton(p1).with(q1));
                let want = p.obar(line, AtomSet::singleton(p2));
                right_lateral.record(got == want, || {
                    Witness::new(format!("({p1},{p2}) ∨ ({q1},{p2})"), vec![got, want])
                });
            }
        }
    }
    let joins = |factor: &Lattice, h: &dyn Fn(AtomSet) -> AtomSet| {
        let mut out = CheckOutcome::default();
        for omega in subsets_up_to(factor.elements(), max_subset) {
            let union = omega.iter().fold(AtomSet::EMPTY, |acc, &a| acc.union(a));
            let want = h(factor.closure(union));
            let got = base.closure(omega.iter().fold(AtomSet::EMPTY, |acc, &a| acc.union(h(a))));
            out.record(got == want, || Witness::new("join of embedded family", omega.clone()));
        }
        out
    };
    let left_joins = joins(p.left(), &|a| p.h1(a).expect("factor element"));
    let right_joins = joins(p.right(), &|a| p.h2(a).expect("factor element"));
    LateralJoinReport {
        left_lateral,
        right_lateral,
        left_joins,
        right_joins,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JoinLemmaReport {
    /// `p1⊗p2 ∨ q1⊗q2` has exactly two atoms when `p1 ≠ q1`, `p2 ≠ q2`.
    pub no_third_atom: CheckOutcome,
    /// `A(p1⊗a2 ∨ a1⊗p2) = p1 ⊗̄ a2 ∪ a1 ⊗̄ p2` when `p1 ≤ a1`, `p2 ≤ a2`.
    pub cross_join: CheckOutcome,
}

impl JoinLemmaReport {
    pub fn passed(&self) -> bool {
        self.no_third_atom.passed() && self.cross_join.passed()
    }
}

/// Exhaustive check of the two join identities every S-product satisfies.
pub fn sproduct_join_lemma_check(p: &ProductLattice) -> JoinLemmaReport {
    let base = p.base();
    let (n1, n2) = (p.left_atoms(), p.right_atoms());
    let mut no_third_atom = CheckOutcome::default();
    for p1 in 0..n1 {
        for q1 in (0..n1).filter(|&q1| q1 != p1) {
            for p2 in 0..n2 {
                for q2 in (0..n2).filter(|&q2| q2 != p2) {
                    let x = p.atom_product(p1, p2);
                    let y = p.atom_product(q1, q2);
                    let got = base.closure(x.union(y));
                    let ok = x.len() == 1 && y.len() == 1 && got == x.union(y);
                    no_third_atom.record(ok, || {
                        Witness::new(format!("({p1},{p2}) ∨ ({q1},{q2})"), vec![got])
                    });
                }
            }
        }
    }
    let mut cross_join = CheckOutcome::default();
    for &a1 in p.left().elements() {
        for &a2 in p.right().elements() {
            for p1 in a1.iter() {
                for p2 in a2.iter() {
                    let s1 = AtomSet::singleton(p1);
                    let s2 = AtomSet::singleton(p2);
                    let x = p.otimes(s1, a2).expect("factor element");
                    let y = p.otimes(a1, s2).expect("factor element");
                    let got = base.closure(x.union(y));
                    let want = p.obar(s1, a2).union(p.obar(a1, s2));
                    cross_join.record(got == want, || {
                        Witness::new(
                            format!("p1={p1}, p2={p2}, a1={a1}, a2={a2}"),
                            vec![got, want],
                        )
                    });
                }
            }
        }
    }
    JoinLemmaReport {
        no_third_atom,
        cross_join,
    }
}

/// Every subfamily of `items` with at most `k` members, smallest first.
pub(crate) fn subsets_up_to<T: Copy>(items: &[T], k: usize) -> Vec<Vec<T>> {
    (0..=k.min(items.len()))
        .flat_map(|r| items.iter().copied().combinations(r))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build_boolean, build_mo, build_two};
    use crate::lattice::FamilyMode;

    fn mo(n: usize) -> (Lattice, OrthoMap) {
        build_mo(n).unwrap()
    }

    #[test]
    fn subsets_counts() {
        let items = [1, 2, 3, 4];
        assert_eq!(subsets_up_to(&items, 2).len(), 1 + 4 + 6);
        assert_eq!(subsets_up_to(&items, 4).len(), 16);
    }

    #[test]
    fn pair_atom_linearization() {
        for i in 0..24 {
            assert_eq!(PairAtom::from_index(i, 6).index(6), i);
        }
        assert_eq!(PairAtom::new(2, 3).index(6), 15);
    }

    #[test]
    fn general_sizes() {
        let (m2, _) = mo(2);
        let (m3, _) = mo(3);
        let p = aerts_product_general(&m2, &m2).unwrap();
        assert_eq!(p.base().atom_count(), 16);
        assert_eq!(p.route(), Route::Generators);
        assert!(p.ortho().is_none());
        let p = aerts_product_general(&m2, &m3).unwrap();
        assert_eq!(p.base().atom_count(), 24);
        for i in 0..24 {
            assert!(p.base().is_element(AtomSet::singleton(i)));
        }
    }

    #[test]
    fn size_guard_and_empty_factor() {
        let (m3, _) = mo(3);
        let (m6, _) = mo(6);
        assert!(matches!(
            aerts_product_general(&m6, &m3),
            Err(ProductError::TooManyAtoms { left: 12, right: 6 })
        ));
        let (b0, _) = build_boolean(0).unwrap();
        assert_eq!(aerts_product_general(&b0, &m3).unwrap_err(), ProductError::EmptyFactor(1));
    }

    #[test]
    fn sharp_relation_examples() {
        let (m2, o2) = mo(2);
        let rel = sharp_relation(&m2, &o2, &m2, &o2).unwrap();
        let idx = |a, b| PairAtom::new(a, b).index(4);
        // atoms 0 and 1 of MO(2) are orthogonal
        for x in 0..4 {
            assert!(rel.related(idx(0, 2), idx(1, x)));
        }
        assert!(!rel.related(idx(0, 2), idx(0, 2)));
        let polar = rel.polar(AtomSet::singleton(idx(0, 2)));
        let want: AtomSet = (0..4).map(|x| idx(1, x)).chain((0..4).map(|x| idx(x, 3))).collect();
        assert_eq!(polar, want);
        assert_eq!(polar.len(), 7);
    }

    #[test]
    fn routes_agree_on_mo2() {
        let (m2, o2) = mo(2);
        let g = aerts_product_general(&m2, &m2).unwrap();
        let s = aerts_product_sharp(&m2, &o2, &m2, &o2).unwrap();
        assert_eq!(g.base(), s.base());
        assert_eq!(g.h1_table(), s.h1_table());
        let o = s.ortho().unwrap();
        let a = AtomSet::singleton(PairAtom::new(0, 2).index(4));
        let c = o.apply(a);
        assert_eq!(c.len(), 7);
        assert_eq!(o.apply(c), a);
        assert!(s.base().coatoms().contains(&c));
    }

    #[test]
    fn sharp_of_b2_is_boolean() {
        let (b2, ob) = build_boolean(2).unwrap();
        let p = aerts_product_sharp(&b2, &ob, &b2, &ob).unwrap();
        assert_eq!(p.base().atom_count(), 4);
        // B2 ⋀○ B2 over four pair-atoms: the full power set
        assert_eq!(p.base().len(), 16);
    }

    #[test]
    fn otimes_identities() {
        let (m2, o2) = mo(2);
        let p = aerts_product_sharp(&m2, &o2, &m2, &o2).unwrap();
        for p1 in 0..4 {
            for p2 in 0..4 {
                let x = p.otimes(AtomSet::singleton(p1), AtomSet::singleton(p2)).unwrap();
                assert_eq!(x, AtomSet::singleton(PairAtom::new(p1, p2).index(4)));
            }
        }
        for &a in m2.elements() {
            assert_eq!(p.otimes(a, AtomSet::EMPTY).unwrap(), AtomSet::EMPTY);
            assert_eq!(p.otimes(AtomSet::EMPTY, a).unwrap(), AtomSet::EMPTY);
            assert_eq!(p.otimes(m2.top(), a).unwrap(), p.h2(a).unwrap());
            assert_eq!(p.otimes(a, m2.top()).unwrap(), p.h1(a).unwrap());
        }
        assert!(p.otimes(AtomSet::singleton(0).with(1), m2.top()).is_err());
        // ⊗̄ is a raw set, not necessarily closed
        let raw = p.obar(AtomSet::singleton(0).with(1), AtomSet::singleton(0));
        assert_eq!(raw.len(), 2);
    }

    #[test]
    fn two_factor_gives_other_factor_size() {
        let two = build_two();
        let (m2, _) = mo(2);
        let p = aerts_product_general(&two, &m2).unwrap();
        assert_eq!(p.base().len(), m2.len());
        assert_eq!(p.base().elements(), m2.elements());
    }

    #[test]
    fn lateral_joins_on_mo2() {
        let (m2, o2) = mo(2);
        let p = aerts_product_sharp(&m2, &o2, &m2, &o2).unwrap();
        let r = lateral_join_check(&p, DEFAULT_SUBSET_SIZE);
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.left_lateral.checked, 4 * 4 * 3);
        let a = PairAtom::new(0, 2).index(4);
        let b = PairAtom::new(0, 3).index(4);
        let j = p.base().closure(AtomSet::singleton(a).with(b));
        assert_eq!(j, p.row(0));
        let c = PairAtom::new(1, 3).index(4);
        assert_eq!(p.base().closure(AtomSet::singleton(a).with(c)).len(), 2);
    }

    #[test]
    fn join_lemma_on_mo2_and_mutation() {
        let (m2, o2) = mo(2);
        let p = aerts_product_sharp(&m2, &o2, &m2, &o2).unwrap();
        assert!(sproduct_join_lemma_check(&p).passed());

        // Dropping a coatom keeps a closure system but breaks the cross join.
        let coatom = p.base().coatoms()[0];
        let family = p.base().elements().iter().copied().filter(|&x| x != coatom);
        let base = Lattice::from_closed_family(16, family, FamilyMode::Validate).unwrap();
        let bad = ProductLattice::from_parts(
            m2.clone(),
            m2.clone(),
            base,
            p.h1_table().to_vec(),
            p.h2_table().to_vec(),
            None,
            Route::External,
        )
        .unwrap();
        let r = sproduct_join_lemma_check(&bad);
        assert!(!r.passed());
        assert!(r.no_third_atom.passed());
        assert!(!r.cross_join.witnesses.is_empty());
    }

    #[test]
    fn from_parts_rejects_bad_embeddings() {
        let (m2, o2) = mo(2);
        let p = aerts_product_sharp(&m2, &o2, &m2, &o2).unwrap();
        let mut h1 = p.h1_table().to_vec();
        h1.pop();
        let e = ProductLattice::from_parts(
            m2.clone(),
            m2.clone(),
            p.base().clone(),
            h1,
            p.h2_table().to_vec(),
            None,
            Route::External,
        );
        assert!(matches!(e, Err(ProductError::EmbeddingLength { which: 1, .. })));
        let mut h2 = p.h2_table().to_vec();
        h2[1] = AtomSet::from_bits(0b11);
        let e = ProductLattice::from_parts(
            m2.clone(),
            m2.clone(),
            p.base().clone(),
            p.h1_table().to_vec(),
            h2,
            None,
            Route::External,
        );
        assert!(matches!(e, Err(ProductError::EmbeddingImage { which: 2, .. })));
    }

    #[test]
    fn decomposition_inverts_linearization() {
        let (m2, _) = mo(2);
        let (m3, _) = mo(3);
        let p = aerts_product_general(&m2, &m3).unwrap();
        let d = p.decomposition().unwrap();
        for (i, pa) in d.iter().enumerate() {
            assert_eq!(pa.index(6), i);
        }
    }
}
