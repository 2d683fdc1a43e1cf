//! Exact arithmetic for Frobenius-twisted lattices over Laurent series fields.
//!
//! The ambient field is `L = F_{q^m}((t))` with `q = p^e`, equipped with the
//! Frobenius `σ` raising coefficients to the `q`-th power and fixing `t`.
//! On top of that sit:
//!
//! * [`arith`] — finite field towers with compatible embeddings, Laurent
//!   polynomials with exact or truncated precision;
//! * [`coweight`] — integral and rational coweights, dominance order, Levi
//!   block combinatorics;
//! * [`lattice`] — `O = F_{q^m}[[t]]`-lattices in canonical Hermite form,
//!   relative positions, duals, periodic lattice chains;
//! * [`isocrystal`] — σ-twisted operators `F = b·σ`, Newton points via
//!   certified multi-path computation, standard forms;
//! * [`mazur`] — the Hodge/Newton dominance check and lattice witness
//!   constructions realizing a prescribed Hodge vector;
//! * [`chains`] — membership and step-by-step extension of twist-stable
//!   lattice chains, with symplectic (similitude) variants;
//! * [`incidence`] — circular diagrams of semilinear maps and the stable
//!   line-tuple solver;
//! * [`weyl`] — extended affine Weyl groups for `GL_n` and `GSp_{2n}`,
//!   Bruhat order, admissible sets;
//! * [`resscalars`] — graded isocrystals (restriction of scalars), ungrading,
//!   diagonal interpolation, and graded chain extension.

pub mod arith;
pub mod chains;
pub mod coweight;
pub mod incidence;
pub mod isocrystal;
pub mod lattice;
pub mod matrix;
pub mod mazur;
pub mod search;
pub mod weyl;

pub use arith::{FieldCtx, FieldElem, FieldTower, LaurentPoly};
pub use chains::{ChainOutcome, ChainWitness, ResidueSpace};
pub use coweight::Coweight;
pub use incidence::{CircularDiagram, LineTuple, RankProfile};
pub use isocrystal::{Isocrystal, NewtonPoint};
pub use lattice::{Lattice, LatticeChain};
pub use mazur::{MazurReport, Witness};
pub use search::SearchConfig;
pub use weyl::{AdmissibleSet, GroupTag, WeylElem};

/// Exact rational scalar used throughout (coweight entries, slopes).
pub type Rat = num_rational::Rational64;
