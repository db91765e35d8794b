//! Elliptic boundary value problems with boundary conditions that depend on
//! the spectral parameter, solved through boundary triples.
//!
//! The boundary function τ is realized as the Weyl function of a boundary
//! triple ([`realize`]); coupling that triple to the discrete elliptic
//! operator ([`elliptic`]) yields a selfadjoint linearization whose
//! compressed resolvent solves the problem ([`solver`]).

pub mod elliptic;
pub mod error;
pub mod json;
pub mod krein;
pub mod linalg;
pub mod opfunc;
pub mod realize;
pub mod solver;
pub mod triple;

pub use error::{Error, Result};
pub use krein::{intersect, KreinSpace, LinearRelation, Subspace};
pub use linalg::{Mat, Vector, C64};
pub use opfunc::{MatrixFunction, OperatorFunction, RationalNevanlinna, RepresentationForm, Window};
pub use triple::{BoundaryTriple, IdentityReport, WeylData};
pub use elliptic::{build_1d, build_2d, elliptic_triple, Coefficient, DiscreteElliptic, EllipticTriple};
pub use realize::{realize, RealizeOptions, Realization};
pub use solver::{direct_solve, krein_resolve, Linearization, SolveReport};
