//! Ground truth: update execution, active-domain evaluation, brute-force
//! equivalence over small universes and random case generation.

mod compiled;
mod equiv;
mod eval;
mod exec;
mod generate;
pub mod par;

pub use compiled::{Compiled, CompiledUpdate, State, Universe};
pub use equiv::{equiv_bruteforce, equiv_bruteforce_capped, fresh_constants, universe_for, Verdict, DEFAULT_CAP};
pub use eval::{eval_over, eval_sentence};
pub use exec::{exec_norm, exec_update};
pub use generate::{generate_case, GenConfig};
