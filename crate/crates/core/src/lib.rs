//! Truncated Fock-space operator calculus.
//!
//! A desk-scale realization of the composition law on symmetric Fock
//! space, the Segal-Bargmann transform family, anti-Wick/Wick/Weyl
//! quantization and the two star-product expansions (Wick-symbol
//! composition series and the Weyl/Moyal expansion with trace bounds),
//! everything truncated at a finite mode count and particle degree so
//! each identity becomes an exact or tolerance-bounded numerical check.

pub mod error;
pub mod fock;
pub mod index;
pub mod operator;
pub mod symbol;

pub use error::{Error, Result};
pub use fock::{
    coherent_overlap, coherent_product_check, coherent_state, displacement, CoherentState,
    DegreePolicy, FockVector, PhasePoint, Truncated,
};
pub use index::{binomial, merge_weight, BasisTable, MultiIndex, TruncationSpec};
pub use operator::OperatorMatrix;
pub use symbol::{
    poisson_bracket, q_seminorm_dominates, scaled_coeff_residual, symplectic_bidiff_power,
    PhaseSymbol, QuadraticForm, Var,
};
