//! K-theoretic Morita invariants of graph C*-algebras and Leavitt path
//! algebras, the standard graph moves, and decision procedures built on them.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`]: the graph model, file formats and structural predicates;
//! - [`canon`]: isomorphism testing and canonical forms for small graphs;
//! - [`exactalg`]: Smith normal form, determinants, abelian group descriptors;
//! - [`ktheory`]: presentation matrices and every K-theoretic invariant;
//! - [`moves`]: source removal, out/in-splitting, reduction, inverses, and
//!   the Cuntz splice;
//! - [`classify`]: three-valued Morita and flow equivalence verdicts;
//! - [`search`]: bounded bidirectional search for move-sequence certificates.

pub mod canon;
pub mod classify;
pub mod exactalg;
pub mod graph;
pub mod ktheory;
pub mod moves;
pub mod search;

pub use canon::{canonical_form, graphs_isomorphic, CanonicalForm, VertexBoundExceeded, DEFAULT_MAX_VERTICES};
pub use classify::{
    cstar_morita_decide, flow_equivalence_decide, leavitt_morita_decide, Assumptions, ClassifyError, Comparison,
    Outcome, Theorem, Verdict,
};
pub use exactalg::{AbGroup, DetSign, IntMatrix, Rank};
pub use graph::{classify_vertices, structural_report, vertex_matrix, Graph, Mult, ParseError, StructuralReport, VertexClasses};
pub use ktheory::{
    bowen_franks, invariants_cstar, invariants_leavitt, kn_alg_bounds, presentation_matrix, FieldDescriptor,
    GraphClass, InvariantBundle, LeavittInvariants,
};
pub use moves::{apply_move, enumerate_moves, validate_move, MoveBounds, MoveError, MoveInstance, MoveKind};
pub use search::{find_move_path, replay_and_check, MovePath, SearchError, SearchOptions, SearchOutcome};
