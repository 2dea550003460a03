//! Exact type-level workbench for reducts of the dense linear order `(Q;<)`
//! and the random graph.
//!
//! Definable relations are finite sets of complete quantifier-free types,
//! canonical functions are finite tables on 2-types. On top of these sit
//! pp/ep definability, the classical reduct classifications, CSP complexity
//! classifiers, pp-interpretation checks and a small Ramsey arrow search.

pub mod canonical;
pub mod classifiers;
pub mod definability;
pub mod error;
pub mod formulas;
pub mod interp;
pub mod ppalg;
pub mod ramsey;
pub mod typespace;

pub use error::{Error, Result};
pub use formulas::{Language, PpFormula, QfFormula, Relation};
pub use typespace::{Base, Constants, FiniteStructure, Type, TypeSpace};
