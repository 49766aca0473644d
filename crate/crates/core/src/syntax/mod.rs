//! Surface syntax: constraints, update programs, Datalog programs and
//! database instances, plus update normalization.

mod lexer;
mod normalize;
mod parser;
mod schema;
mod update;

pub use normalize::{normalize_update, normalize_update_avoiding, Normalized};
pub use parser::{parse_clause, parse_constraint, parse_database, parse_formula, parse_program, parse_update, Mode};
pub use schema::{PredKind, Schema};
pub use update::{Action, Foreach, NormUpdate, Update};
