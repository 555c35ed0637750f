//! Automorphisms and isomorphisms as atom permutations, the factorization of
//! product automorphisms, and the search for orthocomplementations.
//!
//! In an atomistic lattice an order isomorphism is determined by its action
//! on atoms, and an atom bijection is an isomorphism exactly when it carries
//! the closed-set family onto the closed-set family. Since every closed set
//! is an intersection of meet-irreducibles, it suffices to check that the
//! irreducibles land in the target family.

use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atomset::{AtomId, AtomSet};
use crate::lattice::Lattice;
use crate::ortho::OrthoMap;
use crate::product::{PairAtom, ProductLattice};
use crate::report::Witness;

pub const DEFAULT_AUT_CAP: usize = 24;
pub const DEFAULT_ORTHO_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error("{what} needs at most {cap} atoms, lattice has {atoms}")]
    CapExceeded {
        what: &'static str,
        atoms: usize,
        cap: usize,
    },
    #[error("permutation of length {got} for a lattice with {expected} atoms")]
    WrongLength { expected: usize, got: usize },
    #[error("not a permutation: {0:?}")]
    NotPermutation(Vec<AtomId>),
    #[error("atom map does not preserve the closed sets: {0} is sent outside the family")]
    NotAutomorphism(AtomSet),
}

fn check_cap(what: &'static str, lat: &Lattice, cap: usize) -> Result<(), MorphismError> {
    if lat.atom_count() > cap {
        return Err(MorphismError::CapExceeded {
            what,
            atoms: lat.atom_count(),
            cap,
        });
    }
    Ok(())
}

/// An automorphism of an atomistic lattice, stored by its atom permutation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Automorphism {
    perm: Vec<AtomId>,
}

fn is_permutation(perm: &[AtomId]) -> bool {
    let mut seen = vec![false; perm.len()];
    perm.iter().all(|&p| p < perm.len() && !std::mem::replace(&mut seen[p], true))
}

/// Whether the atom map `perm` sends every closed set of `from` into `to`
/// (and the two families have the same size).
pub(crate) fn maps_family(perm: &[AtomId], from: &Lattice, to: &Lattice) -> Result<(), AtomSet> {
    if from.len() != to.len() {
        return Err(from.top());
    }
    match from.irreducibles().iter().find(|x| !to.is_element(x.map(perm))) {
        Some(&x) => Err(x),
        None => Ok(()),
    }
}

impl Automorphism {
    pub fn identity(n: usize) -> Automorphism {
        Automorphism { perm: (0..n).collect() }
    }

    /// Validates `perm` as an automorphism of `lat`.
    pub fn from_perm(lat: &Lattice, perm: Vec<AtomId>) -> Result<Automorphism, MorphismError> {
        if perm.len() != lat.atom_count() {
            return Err(MorphismError::WrongLength {
                expected: lat.atom_count(),
                got: perm.len(),
            });
        }
        if !is_permutation(&perm) {
            return Err(MorphismError::NotPermutation(perm));
        }
        maps_family(&perm, lat, lat).map_err(MorphismError::NotAutomorphism)?;
        Ok(Automorphism { perm })
    }

    pub(crate) fn from_perm_unchecked(perm: Vec<AtomId>) -> Automorphism {
        Automorphism { perm }
    }

    pub fn perm(&self) -> &[AtomId] {
        &self.perm
    }

    pub fn atom_count(&self) -> usize {
        self.perm.len()
    }

    pub fn apply_atom(&self, p: AtomId) -> AtomId {
        self.perm[p]
    }

    pub fn apply(&self, s: AtomSet) -> AtomSet {
        s.map(&self.perm)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        Automorphism {
            perm: other.perm.iter().map(|&p| self.perm[p]).collect(),
        }
    }

    pub fn inverse(&self) -> Automorphism {
        let mut perm = vec![0; self.perm.len()];
        for (p, &q) in self.perm.iter().enumerate() {
            perm[q] = p;
        }
        Automorphism { perm }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn preserves(&self, lat: &Lattice) -> bool {
        self.perm.len() == lat.atom_count() && maps_family(&self.perm, lat, lat).is_ok()
    }
}

impl fmt::Display for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, p) in self.perm.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("]")
    }
}

/// Byte-indexed lookup tables applying an atom permutation to a whole set.
#[derive(Debug, Clone)]
pub(crate) struct SetMapper {
    tables: Vec<[u64; 256]>,
}

impl SetMapper {
    pub(crate) fn new(perm: &[AtomId]) -> SetMapper {
        let chunks = perm.len().div_ceil(8);
        let tables = (0..chunks)
            .map(|c| {
                let mut t = [0u64; 256];
                for (byte, slot) in t.iter_mut().enumerate() {
                    for bit in 0..8 {
                        let p = c * 8 + bit;
                        if byte >> bit & 1 == 1 && p < perm.len() {
                            *slot |= 1u64 << perm[p];
                        }
                    }
                }
                t
            })
            .collect();
        SetMapper { tables }
    }

    pub(crate) fn apply(&self, s: AtomSet) -> AtomSet {
        let bits = s.bits();
        let mut out = 0u64;
        for (c, t) in self.tables.iter().enumerate() {
            out |= t[(bits >> (8 * c) & 0xff) as usize];
        }
        AtomSet::from_bits(out)
    }
}

/// A set of automorphisms of one lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AutoGroup {
    atom_count: usize,
    members: Vec<Automorphism>,
    contains_identity: bool,
}

impl AutoGroup {
    /// Sorts and deduplicates `members`.
    pub fn from_members(atom_count: usize, mut members: Vec<Automorphism>) -> AutoGroup {
        members.sort();
        members.dedup();
        let contains_identity = members.iter().any(Automorphism::is_identity);
        AutoGroup {
            atom_count,
            members,
            contains_identity,
        }
    }

    pub fn identity(atom_count: usize) -> AutoGroup {
        AutoGroup::from_members(atom_count, vec![Automorphism::identity(atom_count)])
    }

    pub fn full(lat: &Lattice) -> Result<AutoGroup, MorphismError> {
        enumerate_automorphisms(lat)
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn members(&self) -> &[Automorphism] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains_identity(&self) -> bool {
        self.contains_identity
    }

    pub fn contains(&self, u: &Automorphism) -> bool {
        self.members.binary_search(u).is_ok()
    }

    /// Identity present and closed under inverses.
    pub fn has_inverses(&self) -> bool {
        self.contains_identity && self.members.iter().all(|u| self.contains(&u.inverse()))
    }

    /// Full closure check, quadratic in the group order.
    pub fn is_group(&self) -> bool {
        let set: HashSet<&Automorphism> = self.members.iter().collect();
        self.has_inverses()
            && self
                .members
                .iter()
                .all(|u| self.members.iter().all(|v| set.contains(&u.compose(v))))
    }

    /// Whether every member is an automorphism of `lat`.
    pub fn acts_on(&self, lat: &Lattice) -> bool {
        self.atom_count == lat.atom_count() && self.members.iter().all(|u| u.preserves(lat))
    }

    pub(crate) fn mappers(&self) -> Vec<SetMapper> {
        self.members.iter().map(|u| SetMapper::new(u.perm())).collect()
    }
}

/// Per-lattice data used to prune the isomorphism search.
struct Profile<'a> {
    lat: &'a Lattice,
    n: usize,
    pair: Vec<AtomSet>,
    invariant: Vec<Vec<usize>>,
}

impl<'a> Profile<'a> {
    fn new(lat: &'a Lattice) -> Profile<'a> {
        let n = lat.atom_count();
        let mut pair = vec![AtomSet::EMPTY; n * n];
        for p in 0..n {
            for q in 0..n {
                pair[p * n + q] = lat.closure(AtomSet::singleton(p).with(q));
            }
        }
        let invariant = (0..n)
            .map(|p| {
                let mut sizes = vec![0usize; n + 1];
                for x in lat.elements().iter().filter(|x| x.contains(p)) {
                    sizes[x.len()] += 1;
                }
                sizes
            })
            .collect();
        Profile {
            lat,
            n,
            pair,
            invariant,
        }
    }

    fn pair(&self, p: AtomId, q: AtomId) -> AtomSet {
        self.pair[p * self.n + q]
    }

    fn compatible(&self, other: &Profile) -> bool {
        if self.n != other.n
            || self.lat.len() != other.lat.len()
            || self.lat.irreducibles().len() != other.lat.irreducibles().len()
        {
            return false;
        }
        let mut a = self.invariant.clone();
        let mut b = other.invariant.clone();
        a.sort();
        b.sort();
        a == b
    }
}

const UNSET: usize = usize::MAX;

struct Search<'a, 'b> {
    from: &'a Profile<'b>,
    to: &'a Profile<'b>,
    first_only: bool,
}

impl Search<'_, '_> {
    fn consistent(&self, i: AtomId, j: AtomId, sigma: &[usize], inv: &[usize]) -> bool {
        if self.from.invariant[i] != self.to.invariant[j] {
            return false;
        }
        for k in 0..i {
            let a = self.from.pair(i, k);
            let b = self.to.pair(j, sigma[k]);
            if a.len() != b.len() {
                return false;
            }
            if a.iter().any(|r| r < i && !b.contains(sigma[r])) {
                return false;
            }
            if b.iter().any(|s| s != j && inv[s] != UNSET && !a.contains(inv[s])) {
                return false;
            }
        }
        true
    }

    fn extend(&self, i: AtomId, sigma: &mut Vec<usize>, inv: &mut Vec<usize>, out: &mut Vec<Vec<AtomId>>) {
        if i == self.from.n {
            if maps_family(sigma, self.from.lat, self.to.lat).is_ok() {
                out.push(sigma.clone());
            }
            return;
        }
        for j in 0..self.to.n {
            if inv[j] != UNSET || !self.consistent(i, j, sigma, inv) {
                continue;
            }
            sigma[i] = j;
            inv[j] = i;
            self.extend(i + 1, sigma, inv, out);
            sigma[i] = UNSET;
            inv[j] = UNSET;
            if self.first_only && !out.is_empty() {
                return;
            }
        }
    }

    fn rooted_at(&self, j: AtomId) -> Vec<Vec<AtomId>> {
        let mut sigma = vec![UNSET; self.from.n];
        let mut inv = vec![UNSET; self.to.n];
        let mut out = Vec::new();
        if self.consistent(0, j, &sigma, &inv) {
            sigma[0] = j;
            inv[j] = 0;
            self.extend(1, &mut sigma, &mut inv, &mut out);
        }
        out
    }

    fn run(&self) -> Vec<Vec<AtomId>> {
        if !self.from.compatible(self.to) {
            return Vec::new();
        }
        if self.from.n == 0 {
            return vec![Vec::new()];
        }
        if self.first_only {
            (0..self.to.n)
                .into_par_iter()
                .find_map_first(|j| self.rooted_at(j).into_iter().next())
                .into_iter()
                .collect()
        } else {
            let per_root: Vec<Vec<Vec<AtomId>>> =
                (0..self.to.n).into_par_iter().map(|j| self.rooted_at(j)).collect();
            per_root.into_iter().flatten().collect()
        }
    }
}

pub fn enumerate_automorphisms(lat: &Lattice) -> Result<AutoGroup, MorphismError> {
    enumerate_automorphisms_capped(lat, DEFAULT_AUT_CAP)
}

/// All automorphisms of `lat`, lexicographically sorted by permutation.
pub fn enumerate_automorphisms_capped(lat: &Lattice, cap: usize) -> Result<AutoGroup, MorphismError> {
    check_cap("automorphism enumeration", lat, cap)?;
    let profile = Profile::new(lat);
    let search = Search {
        from: &profile,
        to: &profile,
        first_only: false,
    };
    let members = search.run().into_iter().map(Automorphism::from_perm_unchecked).collect();
    let group = AutoGroup::from_members(lat.atom_count(), members);
    debug_assert!(group.has_inverses());
    Ok(group)
}

/// An atom bijection carrying `l` onto `m`, if one exists.
pub fn isomorphic(l: &Lattice, m: &Lattice) -> Result<Option<Vec<AtomId>>, MorphismError> {
    check_cap("isomorphism search", l, DEFAULT_AUT_CAP)?;
    check_cap("isomorphism search", m, DEFAULT_AUT_CAP)?;
    let from = Profile::new(l);
    let to = Profile::new(m);
    let search = Search {
        from: &from,
        to: &to,
        first_only: true,
    };
    Ok(search.run().into_iter().next())
}

/// Orthocomplementations of `lat`, at most `limit` of them, ordered by the
/// sequence of atom images.
pub fn enumerate_orthocomplementations(lat: &Lattice, limit: Option<usize>) -> Result<Vec<OrthoMap>, MorphismError> {
    check_cap("orthocomplementation search", lat, DEFAULT_ORTHO_CAP)?;
    let n = lat.atom_count();
    let coatoms = lat.coatoms();
    let mut out = Vec::new();
    if coatoms.len() != n {
        return Ok(out);
    }
    let limit = limit.unwrap_or(usize::MAX);
    let mut images = vec![AtomSet::EMPTY; n];
    let mut used = vec![false; coatoms.len()];
    ortho_extend(lat, &coatoms, 0, &mut images, &mut used, &mut out, limit);
    Ok(out)
}

fn ortho_extend(
    lat: &Lattice,
    coatoms: &[AtomSet],
    p: AtomId,
    images: &mut Vec<AtomSet>,
    used: &mut Vec<bool>,
    out: &mut Vec<OrthoMap>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    if p == images.len() {
        if let Ok(o) = OrthoMap::from_atom_images(lat, images) {
            out.push(o);
        }
        return;
    }
    for (k, &c) in coatoms.iter().enumerate() {
        if used[k] || c.contains(p) {
            continue;
        }
        if (0..p).any(|q| c.contains(q) != images[q].contains(p)) {
            continue;
        }
        used[k] = true;
        images[p] = c;
        ortho_extend(lat, coatoms, p + 1, images, used, out, limit);
        used[k] = false;
        if out.len() >= limit {
            return;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Xi {
    Identity,
    Swap,
}

/// `u(p1⊗p2) = u1(p1)⊗u2(p2)` for `Xi::Identity`, `u2(p2)⊗u1(p1)` for
/// `Xi::Swap`. `u1` maps atoms of `L1` to atoms of `L_ξ(1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorizationResult {
    pub xi: Xi,
    pub u1: Vec<AtomId>,
    pub u2: Vec<AtomId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorStep {
    Preconditions,
    SliceSide,
    Constancy,
    Surjectivity,
    FactorMaps,
    Recomposition,
}

impl fmt::Display for FactorStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FactorStep::Preconditions => "preconditions",
            FactorStep::SliceSide => "slice side",
            FactorStep::Constancy => "constancy",
            FactorStep::Surjectivity => "surjectivity",
            FactorStep::FactorMaps => "factor maps",
            FactorStep::Recomposition => "recomposition",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("factorization failed at {step}: {witness}")]
pub struct FactorizationError {
    pub step: FactorStep,
    pub witness: Witness,
}

fn factor_fail(step: FactorStep, message: String, sets: Vec<AtomSet>) -> FactorizationError {
    FactorizationError {
        step,
        witness: Witness::new(message, sets),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Row,
    Column,
}

/// Factors an automorphism of an S-product into automorphisms (or
/// isomorphisms) of the factors, following the constructive proof.
pub fn factor_automorphism(p: &ProductLattice, u: &Automorphism) -> Result<FactorizationResult, FactorizationError> {
    use FactorStep::*;
    let base = p.base();
    let (n1, n2) = (p.left_atoms(), p.right_atoms());
    if u.atom_count() != base.atom_count() || !u.preserves(base) {
        return Err(factor_fail(Preconditions, format!("{u} is not an automorphism of the product"), vec![]));
    }
    let dec = p
        .decomposition()
        .ok_or_else(|| factor_fail(Preconditions, "atoms are not the pair products".into(), vec![]))?;
    let atom = |a: AtomId, b: AtomId| p.pair_atom(a, b).expect("decomposition exists");

    // step 1: rows p1⊗1 go to a row or a column through u(p)
    let side_of = |slice: AtomSet, image_atom: PairAtom| -> Option<Side> {
        let img = u.apply(slice);
        if img == p.row(image_atom.left) {
            Some(Side::Row)
        } else if img == p.column(image_atom.right) {
            Some(Side::Column)
        } else {
            None
        }
    };
    let mut row_sides = Vec::with_capacity(base.atom_count());
    let mut column_sides = Vec::with_capacity(base.atom_count());
    for (a, pa) in dec.iter().enumerate() {
        let image = dec[u.apply_atom(a)];
        let rs = side_of(p.row(pa.left), image).ok_or_else(|| {
            factor_fail(SliceSide, format!("row through atom {a} is not sent to a slice"), vec![p.row(pa.left)])
        })?;
        let cs = side_of(p.column(pa.right), image).ok_or_else(|| {
            factor_fail(SliceSide, format!("column through atom {a} is not sent to a slice"), vec![p.column(pa.right)])
        })?;
        row_sides.push(rs);
        column_sides.push(cs);
    }

    // step 2: the side does not depend on the atom
    for (sides, what) in [(&row_sides, "rows"), (&column_sides, "columns")] {
        if let Some(a) = sides.iter().position(|&s| s != sides[0]) {
            return Err(factor_fail(
                Constancy,
                format!("{what} through atoms 0 and {a} go to different sides"),
                vec![AtomSet::singleton(0).with(a)],
            ));
        }
    }

    // step 3: ξ is a permutation
    let xi = match (row_sides.first(), column_sides.first()) {
        (Some(Side::Row), Some(Side::Column)) | (None, None) => Xi::Identity,
        (Some(Side::Column), Some(Side::Row)) => Xi::Swap,
        _ => {
            return Err(factor_fail(
                Surjectivity,
                "rows and columns are sent to the same side".into(),
                vec![],
            ))
        }
    };
    let (target1, target2) = match xi {
        Xi::Identity => (p.left(), p.right()),
        Xi::Swap => {
            if n1 != n2 {
                return Err(factor_fail(Surjectivity, "swap between factors of different size".into(), vec![]));
            }
            (p.right(), p.left())
        }
    };
    let component = |pa: PairAtom, which: usize| -> AtomId {
        match (xi, which) {
            (Xi::Identity, 1) | (Xi::Swap, 2) => pa.left,
            _ => pa.right,
        }
    };

    // step 4: U1, U2 are well defined and extend to isomorphisms
    let mut u1 = vec![UNSET; n1];
    for (p1, slot) in u1.iter_mut().enumerate() {
        for p2 in 0..n2 {
            let c = component(dec[u.apply_atom(atom(p1, p2))], 1);
            if *slot == UNSET {
                *slot = c;
            } else if *slot != c {
                return Err(factor_fail(
                    FactorMaps,
                    format!("U1({p1}) depends on the second component ({p2})"),
                    vec![],
                ));
            }
        }
    }
    let mut u2 = vec![UNSET; n2];
    for (p2, slot) in u2.iter_mut().enumerate() {
        for p1 in 0..n1 {
            let c = component(dec[u.apply_atom(atom(p1, p2))], 2);
            if *slot == UNSET {
                *slot = c;
            } else if *slot != c {
                return Err(factor_fail(
                    FactorMaps,
                    format!("U2({p2}) depends on the first component ({p1})"),
                    vec![],
                ));
            }
        }
    }
    for (which, map, from, to) in [(1, &u1, p.left(), target1), (2, &u2, p.right(), target2)] {
        if !is_permutation(map) {
            return Err(factor_fail(FactorMaps, format!("U{which} is not a bijection"), vec![]));
        }
        if let Err(x) = maps_family(map, from, to) {
            return Err(factor_fail(FactorMaps, format!("u{which} is not an isomorphism"), vec![x]));
        }
    }

    for (p1, &v1) in u1.iter().enumerate() {
        for (p2, &v2) in u2.iter().enumerate() {
            let want = match xi {
                Xi::Identity => atom(v1, v2),
                Xi::Swap => atom(v2, v1),
            };
            let a = atom(p1, p2);
            if u.apply_atom(a) != want {
                return Err(factor_fail(
                    Recomposition,
                    format!("u({p1},{p2}) differs from the recomposed image"),
                    vec![AtomSet::singleton(a)],
                ));
            }
        }
    }
    Ok(FactorizationResult { xi, u1, u2 })
}

impl FactorizationResult {
    /// Rebuilds the product automorphism from the factor maps.
    pub fn recompose(&self, p: &ProductLattice) -> Option<Automorphism> {
        let mut perm = vec![UNSET; p.base().atom_count()];
        for (p1, &a) in self.u1.iter().enumerate() {
            for (p2, &b) in self.u2.iter().enumerate() {
                let (l, r) = match self.xi {
                    Xi::Identity => (a, b),
                    Xi::Swap => (b, a),
                };
                perm[p.pair_atom(p1, p2)?] = p.pair_atom(l, r)?;
            }
        }
        Some(Automorphism::from_perm_unchecked(perm))
    }
}
