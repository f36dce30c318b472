//! Level-3 word mappings: iterated pushdown stores and automata, HDT0L and
//! recurrence-system evaluators, lowering of L-system compositions to
//! polynomial recurrences, and a Gröbner-basis decision procedure for
//! equality of polynomially recurrent sequences.

pub mod equivalence;
pub mod error;
pub mod groebner;
pub mod kpda;
pub mod lowering;
pub mod matrix;
pub mod morphisms;
pub mod poly;
pub mod pushdown;
pub mod recurrences;
pub mod symbol;

pub use error::{Error, Result};
pub use symbol::{Alphabet, Symbol, Word};
