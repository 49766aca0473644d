use crate::datalog::{evaluate, Program};
use crate::db::Database;
use crate::error::Result;
use crate::logic::Formula;
use crate::oracle::{eval_sentence, exec_update};
use crate::syntax::{Action, Foreach, Update};

/// A deductive database: stored facts and the rules deriving the
/// intensional predicates. Stored facts of intensional predicates act as
/// additional base facts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeductiveState {
    pub program: Program,
    pub facts: Database,
}

impl DeductiveState {
    pub fn new(program: Program, facts: Database) -> Self {
        DeductiveState { program, facts }
    }

    /// The least model.
    pub fn model(&self) -> Result<Database> {
        evaluate(&self.program, &self.facts)
    }

    /// Truth of the universal closure of `f` in the least model.
    pub fn satisfies(&self, f: &Formula) -> Result<bool> {
        Ok(eval_sentence(f, &self.model()?))
    }
}

/// Tuples selected by a foreach, read from the least model.
fn selected(fe: &Foreach, model: &Database) -> Result<Vec<Vec<String>>> {
    // Executing an insert into a scratch relation reuses the relational
    // selection semantics.
    let scratch = format!("{}#sel", fe.target);
    let probe = Update::Foreach(Foreach {
        vars: fe.vars.clone(),
        qual: fe.qual.clone(),
        action: Action::Insert,
        target: scratch.clone(),
    });
    let mut m = model.clone();
    m.remove_relation(&scratch);
    let out = exec_update(&probe, &m)?;
    Ok(out.tuples(&scratch).cloned().collect())
}

/// Executes an update on a deductive database. Insertions add stored
/// facts, also for intensional predicates. Deleting from an intensional
/// predicate stores its remaining extension and drops its rules.
pub fn exec_deductive(u: &Update, s: &DeductiveState) -> Result<DeductiveState> {
    let mut out = s.clone();
    run(u, &mut out)?;
    Ok(out)
}

fn run(u: &Update, s: &mut DeductiveState) -> Result<()> {
    match u {
        Update::Skip => {}
        Update::Seq(a, b) => {
            run(a, s)?;
            run(b, s)?;
        }
        Update::If { cond, then, els } => {
            if s.satisfies(cond)? {
                run(then, s)?;
            } else if let Some(e) = els {
                run(e, s)?;
            }
        }
        Update::Foreach(fe) => {
            let model = s.model()?;
            let sel = selected(fe, &model)?;
            let r = fe.target.as_str();
            s.facts.declare(r, fe.vars.len())?;
            match fe.action {
                Action::Insert => {
                    for t in sel {
                        s.facts.insert(r, t)?;
                    }
                }
                Action::Delete if s.program.is_idb(r) => {
                    s.facts.remove_relation(r);
                    s.facts.declare(r, fe.vars.len())?;
                    for t in model.tuples(r) {
                        if !sel.contains(t) {
                            s.facts.insert(r, t.clone())?;
                        }
                    }
                    s.program = Program::new(s.program.rules.iter().filter(|x| x.head_pred() != r).cloned().collect());
                }
                Action::Delete => {
                    for t in sel {
                        s.facts.remove(r, &t);
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_database, parse_formula, parse_program, parse_update};

    const TC: &str = "tc(X,Y) :- arc(X,Y). tc(X,Y) :- arc(X,Z), tc(Z,Y).";

    #[test]
    fn insert_creates_a_cycle() {
        let s = DeductiveState::new(parse_program(TC).unwrap(), parse_database("arc(b,c). arc(c,d).").unwrap());
        let c = parse_formula("!exists X: tc(X,X)").unwrap();
        assert!(s.satisfies(&c).unwrap());
        let t = exec_deductive(&parse_update("insert arc(d,b)").unwrap(), &s).unwrap();
        assert!(!t.satisfies(&c).unwrap());
    }

    #[test]
    fn idb_delete_materializes() {
        let s = DeductiveState::new(parse_program(TC).unwrap(), parse_database("arc(a,b). arc(b,c).").unwrap());
        let t = exec_deductive(&parse_update("delete tc(a,c)").unwrap(), &s).unwrap();
        assert!(t.program.is_empty());
        assert_eq!(t.model().unwrap().len_of("tc"), 2);
    }
}
