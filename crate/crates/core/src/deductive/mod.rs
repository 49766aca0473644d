//! Weakest preconditions over Datalog-defined predicates: primed
//! programs, hypothesis checks, execution on deductive databases and
//! delta programs for insertions.

mod delta;
mod exec;
mod hypotheses;
mod names;
mod prime;
mod rules;
mod wp;

pub use delta::{
    delta_for_update, delta_qualified_insert, delta_saturation, DeltaOptions, DeltaResult, DeltaRule, DeltaVerdict,
};
pub use exec::{exec_deductive, DeductiveState};
pub use hypotheses::{check_hypotheses, HypothesisReport, Violation};
pub use names::{check_reserved, is_reserved, NameGen};
pub use prime::{prime_program, PrimedProgram};
pub use wp::{wp_deductive, DeductiveWp};
