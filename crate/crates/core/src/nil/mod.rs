//! Exact models of filtered nilmanifolds and the Taylor and character
//! calculus on polynomial sequences.

pub mod character;
pub mod checks;
pub mod linalg;
pub mod matrix;
pub mod model;
pub mod taylor;

pub use character::{
    congruent_mod_nabla, enumerate_characters, factor_coefficient, in_nabla, integral_mod_nabla, is_irrational,
    level_witness, FactorOutcome, IrrationalityCheck, LevelCharacter, LevelQuotient,
};
pub use matrix::RatMatrix;
pub use model::{FilteredNilmanifoldModel, ModelJson, ModelRef, UnitriangularElement};
pub use taylor::{shared, taylor_coefficients, PolynomialSequence, TaylorReport};
