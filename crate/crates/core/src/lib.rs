//! Finite complete atomistic (ortho)lattices and the separated product.
//!
//! Lattices are closure systems on at most 64 atoms ([`AtomSet`] is a
//! machine word). The separated product of two lattices is built by two
//! independent routes. Further modules decide the S-product hypotheses and
//! search for automorphisms and orthocomplementations; `characterization`
//! rebuilds an orthocomplemented S-product from its coatom pairs.

pub mod atomset;
pub mod axioms;
pub mod builders;
pub mod characterization;
pub mod io;
pub mod lattice;
pub mod morphisms;
pub mod ortho;
pub mod product;
pub mod report;

pub use atomset::{AtomId, AtomSet, MAX_ATOMS};
pub use lattice::{FamilyMode, Lattice, LatticeError};
pub use ortho::{closure_from_orthogonality, AtomOrthogonality, OrthoError, OrthoLaw, OrthoMap, RelationError};
pub use builders::{build_boolean, build_mo, build_subspace_lattice, build_two, BuildError, Built, LatticeSpec};
pub use product::{
    aerts_product_general, aerts_product_sharp, lateral_join_check, sharp_relation, sproduct_join_lemma_check,
    PairAtom, ProductError, ProductLattice, Route,
};
pub use report::{CheckOutcome, Witness};
pub use morphisms::{
    enumerate_automorphisms, enumerate_orthocomplementations, factor_automorphism, isomorphic, AutoGroup,
    Automorphism, FactorizationError, FactorizationResult, MorphismError, Xi,
};
pub use axioms::{
    check_sproduct, classify_invariant_subsets, laterally_connected, refute_weak_connectedness, strongly_transitive,
    weakly_connected, AxiomError, Covering, InvariantKind, InvariantSubset, SProductReport, SweepMode,
};
pub use characterization::{characterize, CharacterizationFailure, CharacterizationResult, Characterizer, Step};
pub use io::{product_document, product_from_document, to_dot, DocumentError, LatticeDocument};
