//! Finite-model view calculus.
//!
//! Programs are relations over enumerated finite state spaces. Views relate
//! system states to what an observer sees. Localisation, globalisation and
//! inference move between the two by exhaustive quantification.

pub mod alphabet;
pub mod bits;
pub mod design;
pub mod domain;
pub mod error;
pub mod exec;
pub mod expr;
pub mod laws;
pub mod leak;
pub mod predicate;
pub mod view;

pub use alphabet::{Alphabet, Entry, Namespace, QName, State, DEFAULT_STATE_LIMIT};
pub use bits::Bits;
pub use domain::{Domain, Value};
pub use error::{AlgebraError, Result};
pub use expr::{BinOp, Expr};
pub use predicate::{Connective, Equality, Predicate, Quantifier};
pub use view::{LocalRelation, Observation, Program, View, ViewedRelation};
