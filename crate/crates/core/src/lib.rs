//! Exact computations with pointwise finite-dimensional persistence modules on
//! finite grid posets.
//!
//! The crate covers:
//!
//! - exact linear algebra over `GF(p)` and `Q` ([`field`]);
//! - grid modules, their validation and elementary constructions ([`grid`]);
//! - modules over finite posets and pullbacks along quantizations ([`poset`]);
//! - zigzag transport inside isotopy regions ([`zigzag`]);
//! - isotopy subdivisions into convex chambers, the chamber poset, and the
//!   condensation of a module to a finite encoding ([`chambers`]);
//! - decomposition of thin modules into interval modules ([`thin`]);
//! - `Hom` spaces between modules ([`hom`]);
//! - canonical JSON files and SVG rendering ([`io`], [`svg`]).

pub mod chambers;
pub mod field;
pub mod fixtures;
pub mod generate;
pub mod grid;
pub mod hom;
pub mod io;
pub mod morphism;
pub mod poset;
pub mod sample;
pub mod svg;
pub mod thin;
pub mod zigzag;

pub use chambers::{
    chamber_poset, check_fully_faithful, condense, detect_isotopy_subdivision, quantization_f, verify_condensation, Chamber,
    ChamberError, Condensation, Incoherence, Subdivision,
};
pub use field::{FieldError, FieldSpec, Matrix, Scalar};
pub use grid::{random_thin_module, Cell, GridError, GridShape, PersistenceModule, Region};
pub use hom::{are_isomorphic, end_dim, hom_space, HomError, HomSpace};
pub use morphism::{ModuleMap, Representation};
pub use poset::{inflate, FinitePoset, PosetError, PosetModule, Quantization};
pub use thin::{ex_dim3, iso_to_interval, split_components, support_quiver, ThinError};
pub use zigzag::{random_zigzag, reduce_to_staircase, transport, verify_path_independence, ZigzagError, ZigzagPath};
