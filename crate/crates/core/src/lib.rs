//! Resolution of monomial basic objects by weighted blowups of coordinate
//! strata, together with the combinatorial bounds on resolution length.

pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod explorer;
pub mod ideal;
pub mod invariant;
pub mod monomial;
pub mod transform;

pub use error::{Error, Result};
pub use ideal::MonomialIdeal;
pub use invariant::{compare, gamma, invariant_at, max_locus, GammaValue, InvariantEntry, InvariantValue};
pub use monomial::{ChartState, DivisorLedger, ExponentVector, LevelDivisors, Rational, Stratum, VarSet};
