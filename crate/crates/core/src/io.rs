//! JSON document format for lattices and products, and Graphviz export.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::atomset::AtomSet;
use crate::lattice::{FamilyMode, Lattice, LatticeError};
use crate::ortho::{OrthoError, OrthoMap};
use crate::product::{canonical_obar, ProductError, ProductLattice, Route};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Ortho(#[from] OrthoError),
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error("ortho_elements has {got} entries for {expected} closed sets")]
    OrthoLength { expected: usize, got: usize },
    #[error("ortho_elements entry {0} is not a closed-set index")]
    OrthoIndex(usize),
    #[error("meta field {field}: {message}")]
    Meta { field: &'static str, message: String },
}

/// A lattice on disk: atom labels, closed sets as index lists, an optional
/// orthocomplementation as closed-set indices, and free-form metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeDocument {
    pub atoms: Vec<String>,
    pub closed_sets: Vec<AtomSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ortho_elements: Option<Vec<usize>>,
    #[serde(default)]
    pub meta: Map<String, Value>,
}

impl LatticeDocument {
    pub fn from_lattice(lat: &Lattice, ortho: Option<&OrthoMap>, meta: Map<String, Value>) -> LatticeDocument {
        let ortho_elements = ortho.map(|o| {
            o.images()
                .iter()
                .map(|&y| lat.element_index(y).expect("ortho images are elements"))
                .collect()
        });
        LatticeDocument {
            atoms: (0..lat.atom_count()).map(|p| lat.atom_label(p)).collect(),
            closed_sets: lat.elements().to_vec(),
            ortho_elements,
            meta,
        }
    }

    /// Validates the family (and the orthocomplementation, if present).
    pub fn to_lattice(&self) -> Result<(Lattice, Option<OrthoMap>), DocumentError> {
        let n = self.atoms.len();
        let lat = Lattice::from_closed_family(n, self.closed_sets.iter().copied(), FamilyMode::Validate)?
            .with_labels(self.atoms.clone())?;
        let ortho = match &self.ortho_elements {
            None => None,
            Some(idx) => {
                if idx.len() != self.closed_sets.len() {
                    return Err(DocumentError::OrthoLength {
                        expected: self.closed_sets.len(),
                        got: idx.len(),
                    });
                }
                let mut images = vec![AtomSet::EMPTY; lat.len()];
                for (&x, &i) in self.closed_sets.iter().zip(idx) {
                    let y = *self.closed_sets.get(i).ok_or(DocumentError::OrthoIndex(i))?;
                    images[lat.element_index(x).expect("validated family")] = y;
                }
                Some(OrthoMap::validate(&lat, images)?)
            }
        };
        Ok((lat, ortho))
    }

    pub fn meta_str(&self, key: &str) -> Option<&str> {
        self.meta.get(key).and_then(Value::as_str)
    }
}

fn route_name(route: Route) -> &'static str {
    match route {
        Route::Generators => "generators",
        Route::Sharp => "sharp",
        Route::External => "external",
    }
}

/// The base lattice with `h1`, `h2` recorded in `meta` as index maps from
/// factor closed-set indices to product closed-set indices.
pub fn product_document(p: &ProductLattice, mut meta: Map<String, Value>) -> LatticeDocument {
    let base = p.base();
    let index = |h: &[AtomSet]| -> Vec<usize> {
        h.iter()
            .map(|&x| base.element_index(x).expect("embedding images are elements"))
            .collect()
    };
    meta.insert("builder".into(), json!("product"));
    meta.insert("route".into(), json!(route_name(p.route())));
    meta.insert("left_atoms".into(), json!(p.left_atoms()));
    meta.insert("right_atoms".into(), json!(p.right_atoms()));
    meta.insert("h1".into(), json!(index(p.h1_table())));
    meta.insert("h2".into(), json!(index(p.h2_table())));
    LatticeDocument::from_lattice(base, p.ortho(), meta)
}

fn meta_indices(doc: &LatticeDocument, field: &'static str) -> Result<Option<Vec<usize>>, DocumentError> {
    match doc.meta.get(field) {
        None => Ok(None),
        Some(v) => serde_json::from_value(v.clone()).map(Some).map_err(|e| DocumentError::Meta {
            field,
            message: e.to_string(),
        }),
    }
}

/// Rebuilds a product from its document and the two factor lattices (in
/// their canonical element order). Without `h1`/`h2` in `meta`, the pair
/// linearization `p1 · |A(L2)| + p2` is assumed.
pub fn product_from_document(
    doc: &LatticeDocument,
    left: &Lattice,
    right: &Lattice,
) -> Result<ProductLattice, DocumentError> {
    let (base, ortho) = doc.to_lattice()?;
    let n2 = right.atom_count();
    let map = |field: &'static str, factor: &Lattice, canonical: &dyn Fn(AtomSet) -> AtomSet| {
        match meta_indices(doc, field)? {
            Some(idx) => {
                if idx.len() != factor.len() {
                    return Err(DocumentError::Meta {
                        field,
                        message: format!("{} entries for {} factor elements", idx.len(), factor.len()),
                    });
                }
                idx.iter()
                    .map(|&i| {
                        doc.closed_sets.get(i).copied().ok_or(DocumentError::Meta {
                            field,
                            message: format!("index {i} out of range"),
                        })
                    })
                    .collect()
            }
            None => Ok(factor.elements().iter().map(|&a| canonical(a)).collect()),
        }
    };
    let h1 = map("h1", left, &|a| canonical_obar(a, right.top(), n2))?;
    let h2 = map("h2", right, &|a| canonical_obar(left.top(), a, n2))?;
    let route = match doc.meta_str("route") {
        Some("generators") => Route::Generators,
        Some("sharp") => Route::Sharp,
        _ => Route::External,
    };
    Ok(ProductLattice::from_parts(
        left.clone(),
        right.clone(),
        base,
        h1,
        h2,
        ortho,
        route,
    )?)
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn element_label(lat: &Lattice, x: AtomSet) -> String {
    let parts: Vec<String> = x.iter().map(|p| lat.atom_label(p)).collect();
    format!("{{{}}}", parts.join(","))
}

/// Hasse diagram: one node per element, one edge per cover, pointing up.
pub fn to_dot(lat: &Lattice, ortho: Option<&OrthoMap>) -> String {
    let mut out = String::from("digraph lattice {\n  rankdir=BT;\n  node [shape=box];\n");
    for (i, &x) in lat.elements().iter().enumerate() {
        let mut label = element_label(lat, x);
        if let Some(o) = ortho {
            let j = lat.element_index(o.apply(x)).expect("ortho images are elements");
            let _ = write!(label, " ⊥{j}");
        }
        let _ = writeln!(out, "  n{i} [label=\"{}\"];", dot_escape(&label));
    }
    for (x, y) in lat.covers() {
        let i = lat.element_index(x).expect("element");
        let j = lat.element_index(y).expect("element");
        let _ = writeln!(out, "  n{i} -> n{j};");
    }
    out.push_str("}\n");
    out
}
