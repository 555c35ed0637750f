//! The coatom-pair characterization of orthocomplemented S-products.
//!
//! Given an orthocomplementation `⊥` on an S-product `L`, the map
//! `Δ(x1, x2) = (h1(x1) ∨ h2(x2))^⊥` on pairs of coatoms is shown to be a
//! bijection onto the atoms of `L`, and
//! `f(a) = ∧{Δ(x)^⊥ : a ⊆ A(x1)×A(L2) ∪ A(L1)×A(x2)}` is then an isomorphism
//! from the separated product onto `L`. The orthogonality of `L`, pulled
//! back along `f`, induces orthocomplementations on both factors.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::atomset::{AtomId, AtomSet};
use crate::axioms::{check_sproduct, strongly_transitive, Covering, SProductReport};
use crate::lattice::Lattice;
use crate::morphisms::enumerate_automorphisms;
use crate::ortho::OrthoMap;
use crate::product::{aerts_product_general, canonical_obar, ProductLattice};
use crate::report::{CheckOutcome, Witness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Step {
    Preconditions,
    Nontrivial,
    PairwiseMeetZero,
    Coverage,
    Atomhood,
    Bijection,
    Isomorphism,
    InducedOrtho,
}

impl Step {
    pub const ALL: [Step; 8] = [
        Step::Preconditions,
        Step::Nontrivial,
        Step::PairwiseMeetZero,
        Step::Coverage,
        Step::Atomhood,
        Step::Bijection,
        Step::Isomorphism,
        Step::InducedOrtho,
    ];
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Step::Preconditions => "preconditions",
            Step::Nontrivial => "0 < Δ(x) < 1",
            Step::PairwiseMeetZero => "Δ(x) ∧ Δ(y) = 0",
            Step::Coverage => "atoms covered by Δ",
            Step::Atomhood => "Δ(x) is an atom",
            Step::Bijection => "Δ is a bijection onto A(L)",
            Step::Isomorphism => "f is an isomorphism",
            Step::InducedOrtho => "induced orthocomplementations",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("characterization failed at {step}: {witness}")]
pub struct CharacterizationFailure {
    pub step: Step,
    pub witness: Witness,
}

fn failure(step: Step, message: impl Into<String>, sets: Vec<AtomSet>) -> CharacterizationFailure {
    CharacterizationFailure {
        step,
        witness: Witness::new(message, sets),
    }
}

fn require(step: Step, outcome: CheckOutcome) -> Result<(Step, CheckOutcome), CharacterizationFailure> {
    match outcome.first_witness() {
        Some(w) => Err(CharacterizationFailure {
            step,
            witness: w.clone(),
        }),
        None => Ok((step, outcome)),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Preconditions {
    pub coatomistic: [bool; 2],
    pub coverings: [Option<Covering>; 2],
    pub strongly_transitive: [bool; 2],
    pub automorphisms: [usize; 2],
    pub sproduct: Option<SProductReport>,
}

impl Preconditions {
    pub fn passed(&self) -> bool {
        self.coatomistic.iter().all(|&b| b)
            && self.coverings.iter().all(Option::is_some)
            && self.strongly_transitive.iter().all(|&b| b)
            && self.sproduct.as_ref().is_some_and(SProductReport::passed)
    }

    fn first_failure(&self) -> Option<String> {
        for i in 0..2 {
            if !self.coatomistic[i] {
                return Some(format!("L{} is not coatomistic", i + 1));
            }
            if self.coverings[i].is_none() {
                return Some(format!("no connected covering found for L{}", i + 1));
            }
            if !self.strongly_transitive[i] {
                return Some(format!("L{} is not strongly transitive under its automorphisms", i + 1));
            }
        }
        match &self.sproduct {
            Some(r) if !r.passed() => {
                let failed: Vec<&str> = r.summary().iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
                Some(format!("S-product axioms fail: {}", failed.join(", ")))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeltaEntry {
    pub x1: AtomSet,
    pub x2: AtomSet,
    pub delta: AtomSet,
}

#[derive(Debug, Clone, Serialize)]
pub struct CharacterizationResult {
    pub delta_table: Vec<DeltaEntry>,
    /// `(a, f(a))` for every element `a` of the separated product.
    pub iso: Vec<(AtomSet, AtomSet)>,
    /// `f` maps every element to itself.
    pub iso_is_identity: bool,
    pub induced_ortho1: OrthoMap,
    pub induced_ortho2: OrthoMap,
    pub steps: Vec<(Step, CheckOutcome)>,
}

/// Checks the hypotheses once, then runs the construction for any number
/// of orthocomplementations of the same product.
#[derive(Debug, Clone)]
pub struct Characterizer<'a> {
    p: &'a ProductLattice,
    canonical: ProductLattice,
    preconditions: Preconditions,
}

pub fn check_preconditions(p: &ProductLattice) -> Preconditions {
    let factors = [p.left(), p.right()];
    let coatomistic = factors.map(Lattice::is_coatomistic);
    let coverings = factors.map(Covering::find);
    let groups = factors.map(|l| enumerate_automorphisms(l).ok());
    let strong = [0, 1].map(|i| match &groups[i] {
        Some(g) => strongly_transitive(factors[i], g).is_ok_and(|r| r.passed()),
        None => false,
    });
    let sproduct = match (&groups, &coverings) {
        ([Some(t1), Some(t2)], [Some(c1), Some(c2)]) => check_sproduct(p, t1, t2, c1, c2).ok(),
        _ => None,
    };
    Preconditions {
        coatomistic,
        coverings,
        strongly_transitive: strong,
        automorphisms: [0, 1].map(|i| groups[i].as_ref().map_or(0, |g| g.len())),
        sproduct,
    }
}

impl<'a> Characterizer<'a> {
    pub fn new(p: &'a ProductLattice) -> Result<Characterizer<'a>, CharacterizationFailure> {
        let preconditions = check_preconditions(p);
        if let Some(msg) = preconditions.first_failure() {
            return Err(failure(Step::Preconditions, msg, vec![]));
        }
        let canonical = aerts_product_general(p.left(), p.right())
            .map_err(|e| failure(Step::Preconditions, e.to_string(), vec![]))?;
        Ok(Characterizer {
            p,
            canonical,
            preconditions,
        })
    }

    pub fn preconditions(&self) -> &Preconditions {
        &self.preconditions
    }

    pub fn run(&self, ortho: &OrthoMap) -> Result<CharacterizationResult, CharacterizationFailure> {
        let p = self.p;
        let base = p.base();
        if ortho.images().len() != base.len() || base.elements().iter().any(|&x| ortho.get(x).is_none()) {
            return Err(failure(Step::Preconditions, "orthocomplementation belongs to another lattice", vec![]));
        }
        let mut steps = vec![(Step::Preconditions, {
            let mut o = CheckOutcome::default();
            o.record(true, || unreachable!());
            o
        })];

        let (c1, c2) = (p.left().coatoms(), p.right().coatoms());
        let mut table = Vec::with_capacity(c1.len() * c2.len());
        for &x1 in &c1 {
            for &x2 in &c2 {
                let j = base.closure(p.h1(x1).expect("coatom").union(p.h2(x2).expect("coatom")));
                table.push(DeltaEntry {
                    x1,
                    x2,
                    delta: ortho.apply(j),
                });
            }
        }

        let mut nontrivial = CheckOutcome::default();
        for e in &table {
            nontrivial.record(!e.delta.is_empty() && e.delta != base.top(), || {
                Witness::new("Δ is 0 or 1 at", vec![e.x1, e.x2, e.delta])
            });
        }
        steps.push(require(Step::Nontrivial, nontrivial)?);

        let mut meet_zero = CheckOutcome::default();
        for (i, a) in table.iter().enumerate() {
            for b in &table[i + 1..] {
                meet_zero.record(a.delta.is_disjoint(b.delta), || {
                    Witness::new("Δ(x) ∧ Δ(y) ≠ 0", vec![a.x1, a.x2, b.x1, b.x2])
                });
            }
        }
        steps.push(require(Step::PairwiseMeetZero, meet_zero)?);

        let mut coverage = CheckOutcome::default();
        let union = table.iter().fold(AtomSet::EMPTY, |acc, e| acc.union(e.delta));
        coverage.record(union == base.top(), || {
            Witness::new("atoms under no Δ(x)", vec![base.top().difference(union)])
        });
        steps.push(require(Step::Coverage, coverage)?);

        let mut atomhood = CheckOutcome::default();
        for e in &table {
            atomhood.record(e.delta.len() == 1, || Witness::new("Δ(x) is not an atom", vec![e.x1, e.x2, e.delta]));
        }
        steps.push(require(Step::Atomhood, atomhood)?);

        let mut bijection = CheckOutcome::default();
        let images: HashSet<AtomSet> = table.iter().map(|e| e.delta).collect();
        bijection.record(images.len() == table.len(), || Witness::new("Δ is not injective", vec![]));
        bijection.record(table.len() == base.atom_count(), || {
            Witness::new(format!("{} coatom pairs for {} atoms", table.len(), base.atom_count()), vec![])
        });
        steps.push(require(Step::Bijection, bijection)?);

        let (iso, outcome) = self.build_iso(ortho, &table);
        steps.push(require(Step::Isomorphism, outcome)?);
        let iso_is_identity = iso.iter().all(|(a, b)| a == b);

        let mut atom_image = vec![0; base.atom_count()];
        for &(a, b) in &iso {
            if a.len() == 1 {
                atom_image[a.first().unwrap()] = b.first().expect("atoms map to atoms");
            }
        }
        let (induced_ortho1, induced_ortho2, outcome) = self.induce(ortho, &atom_image);
        steps.push((Step::InducedOrtho, outcome));
        let (Some(induced_ortho1), Some(induced_ortho2)) = (induced_ortho1, induced_ortho2) else {
            let outcome = steps.pop().expect("just pushed").1;
            return Err(require(Step::InducedOrtho, outcome).unwrap_err());
        };
        Ok(CharacterizationResult {
            delta_table: table,
            iso,
            iso_is_identity,
            induced_ortho1,
            induced_ortho2,
            steps,
        })
    }

    fn build_iso(&self, ortho: &OrthoMap, table: &[DeltaEntry]) -> (Vec<(AtomSet, AtomSet)>, CheckOutcome) {
        let base = self.p.base();
        let canon = self.canonical.base();
        let n2 = self.canonical.right_atoms();
        let (top1, top2) = (self.p.left().top(), self.p.right().top());
        let gens: Vec<(AtomSet, AtomSet)> = table
            .iter()
            .map(|e| {
                let g = canonical_obar(e.x1, top2, n2).union(canonical_obar(top1, e.x2, n2));
                (g, ortho.apply(e.delta))
            })
            .collect();
        let iso: Vec<(AtomSet, AtomSet)> = canon
            .elements()
            .iter()
            .map(|&a| {
                let fa = gens
                    .iter()
                    .filter(|(g, _)| a.is_subset(*g))
                    .fold(base.top(), |acc, &(_, d)| acc.intersection(d));
                (a, fa)
            })
            .collect();
        let mut outcome = CheckOutcome::default();
        outcome.record(canon.len() == base.len(), || {
            Witness::new(format!("{} elements in the separated product, {} in L", canon.len(), base.len()), vec![])
        });
        let mut seen = HashSet::new();
        for &(a, fa) in &iso {
            outcome.record(base.is_element(fa), || Witness::new("f(a) is not an element", vec![a, fa]));
            outcome.record(seen.insert(fa), || Witness::new("f is not injective", vec![a, fa]));
        }
        for &(a, fa) in &iso {
            for &(b, fb) in &iso {
                outcome.record(a.is_subset(b) == fa.is_subset(fb), || {
                    Witness::new("f does not preserve and reflect order", vec![a, b])
                });
            }
        }
        (iso, outcome)
    }

    fn induce(&self, ortho: &OrthoMap, atom_image: &[AtomId]) -> (Option<OrthoMap>, Option<OrthoMap>, CheckOutcome) {
        let (n1, n2) = (self.p.left_atoms(), self.p.right_atoms());
        let image = |a: AtomId, b: AtomId| atom_image[a * n2 + b];
        let mut outcome = CheckOutcome::default();
        let mut perp1 = vec![AtomSet::EMPTY; n1];
        for (a, slot) in perp1.iter_mut().enumerate() {
            for c in 0..n1 {
                let first = ortho.atom_perp(image(a, 0), image(c, 0));
                let consistent = (1..n2).all(|b| ortho.atom_perp(image(a, b), image(c, b)) == first);
                outcome.record(consistent, || {
                    Witness::new(format!("({a},·) ⊥ ({c},·) depends on the second component"), vec![])
                });
                if first {
                    slot.insert(c);
                }
            }
        }
        let mut perp2 = vec![AtomSet::EMPTY; n2];
        for (b, slot) in perp2.iter_mut().enumerate() {
            for d in 0..n2 {
                let first = ortho.atom_perp(image(0, b), image(0, d));
                let consistent = (1..n1).all(|a| ortho.atom_perp(image(a, b), image(a, d)) == first);
                outcome.record(consistent, || {
                    Witness::new(format!("(·,{b}) ⊥ (·,{d}) depends on the first component"), vec![])
                });
                if first {
                    slot.insert(d);
                }
            }
        }
        let mut make = |lat: &Lattice, perp: &[AtomSet], which: usize| match OrthoMap::from_atom_images(lat, perp) {
            Ok(o) => Some(o),
            Err(e) => {
                outcome.fail(Witness::new(format!("induced map on L{which}: {e}"), perp.to_vec()));
                None
            }
        };
        let o1 = make(self.p.left(), &perp1, 1);
        let o2 = make(self.p.right(), &perp2, 2);
        if outcome.passed() {
            (o1, o2, outcome)
        } else {
            (None, None, outcome)
        }
    }
}

/// Runs the characterization with the orthocomplementation carried by `p`.
pub fn characterize(p: &ProductLattice) -> Result<CharacterizationResult, CharacterizationFailure> {
    let ortho = p
        .ortho()
        .ok_or_else(|| failure(Step::Preconditions, "the product carries no orthocomplementation", vec![]))?;
    Characterizer::new(p)?.run(ortho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build_boolean, build_mo};
    use crate::morphisms::enumerate_orthocomplementations;
    use crate::product::aerts_product_sharp;

    fn mo_product(m: usize, n: usize) -> ProductLattice {
        let (a, oa) = build_mo(m).unwrap();
        let (b, ob) = build_mo(n).unwrap();
        aerts_product_sharp(&a, &oa, &b, &ob).unwrap()
    }

    #[test]
    fn sharp_mo2_squared_is_identity() {
        let p = mo_product(2, 2);
        let r = characterize(&p).unwrap();
        assert!(r.iso_is_identity);
        assert_eq!(r.delta_table.len(), 16);
        assert_eq!(r.steps.len(), Step::ALL.len());
        assert!(r.steps.iter().all(|(_, o)| o.passed()));
    }

    #[test]
    fn sharp_mo2_mo3_recovers_factor_orthos() {
        let (m2, o2) = build_mo(2).unwrap();
        let (m3, o3) = build_mo(3).unwrap();
        let p = aerts_product_sharp(&m2, &o2, &m3, &o3).unwrap();
        let r = characterize(&p).unwrap();
        assert_eq!(r.induced_ortho1, o2);
        assert_eq!(r.induced_ortho2, o3);
    }

    #[test]
    fn every_ortho_of_mo2_squared() {
        let p = mo_product(2, 2);
        let orthos = enumerate_orthocomplementations(p.base(), None).unwrap();
        assert_eq!(orthos.len(), 9);
        assert!(orthos.contains(p.ortho().unwrap()));
        let factor_orthos = enumerate_orthocomplementations(p.left(), None).unwrap();
        let c = Characterizer::new(&p).unwrap();
        let mut pairs = HashSet::new();
        for o in &orthos {
            let r = c.run(o).unwrap();
            let i1 = factor_orthos.iter().position(|f| *f == r.induced_ortho1).unwrap();
            let i2 = factor_orthos.iter().position(|f| *f == r.induced_ortho2).unwrap();
            pairs.insert((i1, i2));
        }
        // each orthocomplementation is the # map of a distinct pair
        assert_eq!(pairs.len(), 9);
    }

    #[test]
    fn missing_ortho_and_failed_preconditions() {
        let (m2, _) = build_mo(2).unwrap();
        let p = aerts_product_general(&m2, &m2).unwrap();
        let e = characterize(&p).unwrap_err();
        assert_eq!(e.step, Step::Preconditions);
        let (b2, ob) = build_boolean(2).unwrap();
        let (m2, o2) = build_mo(2).unwrap();
        let q = aerts_product_sharp(&b2, &ob, &m2, &o2).unwrap();
        let e = characterize(&q).unwrap_err();
        assert_eq!(e.step, Step::Preconditions);
        assert!(e.witness.message.contains("L1"));
    }

    #[test]
    fn foreign_ortho_is_rejected() {
        let p = mo_product(2, 2);
        let q = mo_product(2, 3);
        let c = Characterizer::new(&p).unwrap();
        assert_eq!(c.run(q.ortho().unwrap()).unwrap_err().step, Step::Preconditions);
    }
}
