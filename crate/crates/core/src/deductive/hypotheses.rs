use std::fmt;

use crate::datalog::{dependents, Program};
use crate::logic::Formula;
use crate::syntax::Update;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// A qualification is not a conjunction of literals.
    NotConjunctive { target: String, qual: String },
    /// A qualification literal depends on the updated predicate.
    DependsOnTarget { target: String, literal: String },
    /// A predicate is used with two arities.
    ArityMismatch { pred: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotConjunctive { target, qual } => write!(
                f,
                "H1: the qualification `{qual}` of the update on `{target}` is not a conjunction of literals"
            ),
            Violation::DependsOnTarget { target, literal } => write!(
                f,
                "H2: qualification literal `{literal}` depends on the updated predicate `{target}`"
            ),
            Violation::ArityMismatch { pred } => write!(f, "H1: predicate `{pred}` is used with different arities"),
        }
    }
}

/// Outcome of the hypothesis check.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HypothesisReport {
    pub violations: Vec<Violation>,
}

impl HypothesisReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for HypothesisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "hypotheses: ok");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Flattens a conjunction of literals; `None` for anything else.
pub(crate) fn conjunct_literals(f: &Formula) -> Option<Vec<Formula>> {
    match f {
        Formula::True => Some(vec![]),
        Formula::Atom(_) => Some(vec![f.clone()]),
        Formula::Not(g) if matches!(g.as_ref(), Formula::Atom(_)) => Some(vec![f.clone()]),
        Formula::And(gs) => {
            let mut out = Vec::new();
            for g in gs {
                out.extend(conjunct_literals(g)?);
            }
            Some(out)
        }
        _ => None,
    }
}

/// Checks that qualifications are conjunctions of literals none of which
/// depends on the updated predicate, and that arities agree. Predicates
/// without defining rules are extensional.
pub fn check_hypotheses(p: &Program, u: &Update, c: &Formula) -> HypothesisReport {
    let mut report = HypothesisReport::default();
    let mut arities = p.arities();
    let mut note = |pred: &str, n: usize, report: &mut HypothesisReport| {
        if let Some(&m) = arities.get(pred) {
            if m != n && !report.violations.contains(&Violation::ArityMismatch { pred: pred.to_string() }) {
                report.violations.push(Violation::ArityMismatch { pred: pred.to_string() });
            }
        } else {
            arities.insert(pred.to_string(), n);
        }
    };
    for (pred, n) in c.predicates() {
        note(&pred, n, &mut report);
    }
    for (pred, n) in u.predicates() {
        note(&pred, n, &mut report);
    }
    for fe in u.foreaches() {
        let Some(lits) = conjunct_literals(&fe.qual) else {
            report.violations.push(Violation::NotConjunctive {
                target: fe.target.clone(),
                qual: fe.qual.to_string(),
            });
            continue;
        };
        let deps = dependents(p, &fe.target);
        for l in lits {
            if l.predicates().keys().any(|q| deps.contains(q)) {
                report.violations.push(Violation::DependsOnTarget {
                    target: fe.target.clone(),
                    literal: l.to_string(),
                });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_program, parse_update};

    const TC_PATH: &str = "tc(X,Y) :- arc(X,Y). tc(X,Y) :- arc(X,Z), tc(Z,Y).
        path(X,Y) :- edge(X,Y). path(X,Y) :- edge(X,Z), path(Z,Y). i(X,Y) :- body(X,Y).";

    #[test]
    fn example_program_passes() {
        let p = parse_program(TC_PATH).unwrap();
        let u = parse_update("foreach X,Y: path(X,Y) do insert tc(X,Y)").unwrap();
        let c = parse_formula("forall X,Y: !tc(X,Y) | i(X,Y)").unwrap();
        assert!(check_hypotheses(&p, &u, &c).holds());
    }

    #[test]
    fn qualification_depending_on_target() {
        let p = parse_program("tc(X,Y) :- arc(X,Y). tc(X,Y) :- arc(X,Z), tc(Z,Y).").unwrap();
        let u = parse_update("foreach X,Y: tc(X,Y) do insert arc(X,Y)").unwrap();
        let r = check_hypotheses(&p, &u, &parse_formula("!exists X: tc(X,X)").unwrap());
        assert_eq!(r.violations.len(), 1);
        assert!(r.to_string().contains("H2"));
    }

    #[test]
    fn disjunctive_qualification() {
        let p = Program::default();
        let u = parse_update("foreach X: p(X) | q(X) do insert r(X)").unwrap();
        let r = check_hypotheses(&p, &u, &parse_formula("forall X: !r(X)").unwrap());
        assert!(matches!(r.violations[0], Violation::NotConjunctive { .. }));
    }
}
