//! Independent brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use itertools::Itertools;
use sepprod::{
    aerts_product_sharp, build_boolean, build_mo, build_subspace_lattice, closure_from_orthogonality, AtomSet,
    Lattice, OrthoMap,
};

/// Rank over GF(p), p prime, by Gaussian elimination.
pub fn rank(p: u32, rows: &[Vec<u32>]) -> usize {
    let mut m: Vec<Vec<u32>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(pivot) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, pivot);
        let inv = (1..p).find(|&x| x * m[r][c] % p == 1).unwrap();
        for x in m[r].iter_mut() {
            *x = *x * inv % p;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let f = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = (*x + p * p - f * y) % p;
                }
            }
        }
        r += 1;
    }
    r
}

fn parse_point(label: &str) -> Vec<u32> {
    label
        .trim_matches(|c| c == '(' || c == ')')
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect()
}

struct Space {
    p: u32,
    points: Vec<Vec<u32>>,
}

impl Space {
    fn vectors(&self, s: AtomSet) -> Vec<Vec<u32>> {
        s.iter().map(|i| self.points[i].clone()).collect()
    }

    fn in_span(&self, s: AtomSet, v: &[u32]) -> bool {
        let mut rows = self.vectors(s);
        let before = rank(self.p, &rows);
        rows.push(v.to_vec());
        rank(self.p, &rows) == before
    }

    fn span(&self, s: AtomSet) -> AtomSet {
        (0..self.points.len()).filter(|&i| self.in_span(s, &self.points[i])).collect()
    }

    fn meet(&self, x: AtomSet, y: AtomSet) -> AtomSet {
        (0..self.points.len())
            .filter(|&i| self.in_span(x, &self.points[i]) && self.in_span(y, &self.points[i]))
            .collect()
    }

    fn dim(&self, s: AtomSet) -> usize {
        rank(self.p, &self.vectors(s))
    }
}

/// Compares the subspace lattice of GF(q)^d (q prime) against row reduction:
/// the family itself, then meet and join on every pair. Returns the number
/// of pairs compared.
pub fn check_subspace(q: u32, d: usize) -> Result<usize, String> {
    let lat = build_subspace_lattice(q as usize, d).map_err(|e| e.to_string())?;
    let points: Vec<Vec<u32>> = (0..lat.atom_count()).map(|i| parse_point(&lat.atom_label(i))).collect();
    if points.len() as u32 != (q.pow(d as u32) - 1) / (q - 1) {
        return Err(format!("{} points", points.len()));
    }
    if let Some(v) = points.iter().find(|v| v.len() != d || v.iter().find(|&&x| x != 0) != Some(&1)) {
        return Err(format!("point {v:?} is not normalized"));
    }
    let space = Space { p: q, points };

    // Every subspace is spanned by at most d points.
    let mut family: Vec<AtomSet> = (0..=d)
        .flat_map(|k| (0..lat.atom_count()).combinations(k))
        .map(|c| space.span(c.into_iter().collect()))
        .collect();
    family.sort();
    family.dedup();
    let mut elements = lat.elements().to_vec();
    elements.sort();
    if family != elements {
        return Err(format!("family differs: {} subspaces vs {} elements", family.len(), elements.len()));
    }

    let mut pairs = 0;
    for &x in lat.elements() {
        for &y in lat.elements() {
            let meet = lat.meet([x, y]).map_err(|e| e.to_string())?;
            let join = lat.join([x, y]).map_err(|e| e.to_string())?;
            if meet != space.meet(x, y) {
                return Err(format!("meet {x} {y}"));
            }
            if join != space.span(x.union(y)) {
                return Err(format!("join {x} {y}"));
            }
            if space.dim(join) + space.dim(meet) != space.dim(x) + space.dim(y) {
                return Err(format!("dimension formula at {x} {y}"));
            }
            pairs += 1;
        }
    }
    Ok(pairs)
}

/// `x ≤ y ⇒ y = x ∨ (x⊥ ∧ y)` checked pair by pair with plain set operations.
pub fn orthomodular_oracle(lat: &Lattice, o: &OrthoMap) -> bool {
    let els = lat.elements();
    let join = |a: AtomSet, b: AtomSet| -> AtomSet {
        *els.iter()
            .filter(|z| a.is_subset(**z) && b.is_subset(**z))
            .min_by_key(|z| z.len())
            .unwrap()
    };
    els.iter().all(|&x| {
        els.iter()
            .filter(|&&y| x.is_subset(y))
            .all(|&y| join(x, o.apply(x).intersection(y)) == y)
    })
}

/// Every ortholattice the builders produce, plus the two MO products and a
/// non-orthomodular control.
pub fn built_ortholattices() -> Vec<(String, Lattice, OrthoMap)> {
    let mut out = Vec::new();
    for n in 1..=4 {
        let (l, o) = build_mo(n).unwrap();
        out.push((format!("MO({n})"), l, o));
    }
    for n in 0..=4 {
        let (l, o) = build_boolean(n).unwrap();
        out.push((format!("B{n}"), l, o));
    }
    let (m2, o2) = build_mo(2).unwrap();
    let (m3, o3) = build_mo(3).unwrap();
    let p = aerts_product_sharp(&m2, &o2, &m2, &o2).unwrap();
    out.push(("MO(2)⋀MO(2)".into(), p.base().clone(), p.ortho().unwrap().clone()));
    let p = aerts_product_sharp(&m2, &o2, &m3, &o3).unwrap();
    out.push(("MO(2)⋀MO(3)".into(), p.base().clone(), p.ortho().unwrap().clone()));
    // Orthogonality along a 5-cycle: an ortholattice that is not orthomodular.
    let (l, o) = closure_from_orthogonality(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
    out.push(("pentagon".into(), l, o));
    out
}

fn sorted_family(lat: &Lattice) -> Vec<AtomSet> {
    let mut family = lat.elements().to_vec();
    family.sort();
    family
}

fn permute(s: AtomSet, perm: &[usize]) -> AtomSet {
    s.iter().map(|i| perm[i]).collect()
}

/// Every permutation of the atoms that maps the closed-set family onto itself.
pub fn brute_force_aut(lat: &Lattice) -> Vec<Vec<usize>> {
    let n = lat.atom_count();
    let family = sorted_family(lat);
    (0..n)
        .permutations(n)
        .filter(|perm| {
            let mut image: Vec<AtomSet> = family.iter().map(|&s| permute(s, perm)).collect();
            image.sort();
            image == family
        })
        .collect()
}

/// Pair permutations `(p1,p2) ↦ (u1 p1, u2 p2)` on the linearization
/// `p1 · n2 + p2`, optionally followed by the factor swap (square case).
pub fn pair_group(u1s: &[Vec<usize>], u2s: &[Vec<usize>], with_swap: bool) -> Vec<Vec<usize>> {
    let n1 = u1s[0].len();
    let n2 = u2s[0].len();
    let mut out = Vec::new();
    for u1 in u1s {
        for u2 in u2s {
            let lifted: Vec<usize> = (0..n1 * n2).map(|i| u1[i / n2] * n2 + u2[i % n2]).collect();
            if with_swap {
                assert_eq!(n1, n2);
                out.push((0..n1 * n2).map(|i| (lifted[i] % n2) * n2 + lifted[i] / n2).collect());
            }
            out.push(lifted);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Blocks of imprimitivity (`g(R) = R` or `g(R) ∩ R = ∅` for every `g`),
/// found by testing every subset through atom 0 and closing under the
/// group. Assumes the group is transitive.
pub fn blocks_oracle(n: usize, group: &[Vec<usize>]) -> Vec<AtomSet> {
    let mut out = Vec::new();
    for bits in 0u64..(1u64 << (n - 1)) {
        let r = AtomSet::from_bits((bits << 1) | 1);
        let is_block = group.iter().all(|g| {
            let img = permute(r, g);
            img == r || img.intersection(r).is_empty()
        });
        if is_block {
            out.extend(group.iter().map(|g| permute(r, g)));
        }
    }
    out.sort();
    out.dedup();
    out
}
