//! Terms, clauses and formulas, with unification, restricted resolution
//! and θ-subsumption.

mod clause;
mod formula;
mod resolution;
mod subst;
mod subsume;
mod term;

pub use clause::{dedup_variants, Clause};
pub use formula::Formula;
pub use resolution::{binary_resolvents_on, res_r, simplify_disequalities, Simplified};
pub use subst::{match_terms, mgu, unify_terms, Substitution};
pub use subsume::theta_subsumes;
pub use term::{is_var_name, vars_in_order, Atom, Literal, Pred, Term};
