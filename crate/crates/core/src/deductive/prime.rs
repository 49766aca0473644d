use std::collections::BTreeMap;

use super::names::NameGen;
use super::rules::rename_preds;
use crate::datalog::{dependents, Program, Rule};
use crate::error::{Error, Result};

/// A program extended with post-state copies of every predicate depending
/// on the updated one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimedProgram {
    pub program: Program,
    /// Every predicate depending on `r` (and `r` itself) to its primed
    /// name.
    pub primed_of: BTreeMap<String, String>,
    /// The primed rules, in the order of the rules they copy.
    pub added: Vec<Rule>,
}

/// Adds a primed copy `q_prime` of every predicate `q` depending on `r`,
/// and for each rule defining such a `q` a copy with every dependent
/// symbol primed. An extensional `r` gets a primed symbol without rules.
pub fn prime_program(p: &Program, r: &str) -> Result<PrimedProgram> {
    if !p.predicates().contains(r) {
        return Err(Error::Undeclared(r.to_string()));
    }
    let mut names = NameGen::new(p.predicates());
    Ok(prime_with(p, r, &mut names))
}

pub(crate) fn prime_with(p: &Program, r: &str, names: &mut NameGen) -> PrimedProgram {
    let deps = dependents(p, r);
    let primed_of: BTreeMap<String, String> = deps.iter().map(|q| (q.clone(), names.prime(q))).collect();
    let added: Vec<Rule> = p
        .rules
        .iter()
        .filter(|rule| deps.contains(rule.head_pred()))
        .map(|rule| rename_preds(rule, &primed_of))
        .collect();
    let mut program = p.clone();
    program.extend(added.iter().cloned());
    PrimedProgram {
        program,
        primed_of,
        added,
    }
}
