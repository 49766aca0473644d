//! Weakest preconditions for database updates: generation, simplification
//! by a resolution-based rewriting system, deductive (Datalog) variants
//! with delta programs, and a brute-force evaluation oracle.

pub mod datalog;
pub mod deductive;
pub mod db;
pub mod error;
pub mod logic;
pub mod oracle;
pub mod relational;
pub mod syntax;

pub use error::{Error, Result};
