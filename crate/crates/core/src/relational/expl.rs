use std::collections::BTreeSet;
use std::fmt;

use crate::logic::{Clause, Formula};

/// A boolean combination of universally closed clauses: the explicit
/// form reached once no rewrite rule applies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expl {
    True,
    False,
    Clause(Clause),
    And(Vec<Expl>),
    Or(Vec<Expl>),
    Not(Box<Expl>),
}

impl Expl {
    /// Each clause is closed separately.
    pub fn to_formula(&self) -> Formula {
        match self {
            Expl::True => Formula::True,
            Expl::False => Formula::False,
            Expl::Clause(c) => Formula::closed_clause(c),
            Expl::And(v) => Formula::And(v.iter().map(Expl::to_formula).collect()),
            Expl::Or(v) => Formula::Or(v.iter().map(Expl::to_formula).collect()),
            Expl::Not(e) => Formula::not(e.to_formula()),
        }
    }

    pub fn clauses(&self) -> Vec<&Clause> {
        let mut out = Vec::new();
        self.collect_clauses(&mut out);
        out
    }

    fn collect_clauses<'a>(&'a self, out: &mut Vec<&'a Clause>) {
        match self {
            Expl::True | Expl::False => {}
            Expl::Clause(c) => out.push(c),
            Expl::And(v) | Expl::Or(v) => v.iter().for_each(|e| e.collect_clauses(out)),
            Expl::Not(e) => e.collect_clauses(out),
        }
    }

    /// Number of literal occurrences.
    pub fn size(&self) -> usize {
        self.clauses().iter().map(|c| c.len()).sum()
    }

    /// Constant propagation and flattening. The empty clause is `false`.
    pub fn simplify(self) -> Expl {
        match self {
            Expl::Clause(c) if c.is_empty() => Expl::False,
            Expl::True | Expl::False | Expl::Clause(_) => self,
            Expl::Not(e) => match e.simplify() {
                Expl::True => Expl::False,
                Expl::False => Expl::True,
                Expl::Not(inner) => *inner,
                other => Expl::Not(Box::new(other)),
            },
            Expl::And(v) => {
                let mut out = Vec::new();
                for e in v {
                    match e.simplify() {
                        Expl::True => {}
                        Expl::False => return Expl::False,
                        Expl::And(inner) => out.extend(inner),
                        other => out.push(other),
                    }
                }
                match out.len() {
                    0 => Expl::True,
                    1 => out.pop().unwrap(),
                    _ => Expl::And(out),
                }
            }
            Expl::Or(v) => {
                let mut out = Vec::new();
                for e in v {
                    match e.simplify() {
                        Expl::False => {}
                        Expl::True => return Expl::True,
                        Expl::Or(inner) => out.extend(inner),
                        other => out.push(other),
                    }
                }
                match out.len() {
                    0 => Expl::False,
                    1 => out.pop().unwrap(),
                    _ => Expl::Or(out),
                }
            }
        }
    }

    /// Evaluates atoms over `preds` to false.
    pub fn assume_empty(&self, preds: &BTreeSet<String>) -> Expl {
        if preds.is_empty() {
            return self.clone();
        }
        let hit = |l: &crate::logic::Literal| l.atom.rel_name().is_some_and(|n| preds.contains(n));
        match self {
            Expl::True | Expl::False => self.clone(),
            Expl::Clause(c) => {
                if c.literals().any(|l| !l.positive && hit(l)) {
                    Expl::True
                } else {
                    Expl::Clause(Clause::new(c.literals().filter(|l| !hit(l)).cloned()))
                }
            }
            Expl::And(v) => Expl::And(v.iter().map(|e| e.assume_empty(preds)).collect()),
            Expl::Or(v) => Expl::Or(v.iter().map(|e| e.assume_empty(preds)).collect()),
            Expl::Not(e) => Expl::Not(Box::new(e.assume_empty(preds))),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Expl::Or(v) if v.len() > 1 => 1,
            Expl::Clause(c) if c.len() > 1 => 1,
            Expl::And(v) if v.len() > 1 => 2,
            _ => 3,
        }
    }
}

fn child(f: &mut fmt::Formatter<'_>, e: &Expl, min: u8) -> fmt::Result {
    if let Expl::Clause(c) = e {
        // Below a connective the closure of each clause must be explicit.
        if !c.vars().is_empty() {
            return write!(f, "({})", Formula::closed_clause(c));
        }
    }
    if e.prec() <= min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expl::True => f.write_str("true"),
            Expl::False => f.write_str("false"),
            Expl::Clause(c) => write!(f, "{c}"),
            Expl::And(v) | Expl::Or(v) if v.is_empty() => {
                f.write_str(if matches!(self, Expl::And(_)) { "true" } else { "false" })
            }
            Expl::And(v) => {
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    child(f, e, 2)?;
                }
                Ok(())
            }
            Expl::Or(v) => {
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    child(f, e, 1)?;
                }
                Ok(())
            }
            Expl::Not(e) => {
                f.write_str("!")?;
                child(f, e, 2)
            }
        }
    }
}
