//! Datalog with stratified negation: rules, dependency analysis,
//! stratification and semi-naive bottom-up evaluation.

mod analysis;
mod eval;
mod program;

pub use analysis::{dependents, depends, stratify};
pub use eval::{evaluate, evaluate_logged, Interpretation};
#[allow(unused_imports)]
pub(crate) use eval::fire;
pub use program::{Program, Rule};
