use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::logic::{Atom, Literal};

/// `head :- body.` A rule with an empty body is a fact rule.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub head: Atom,
    pub body: Vec<Literal>,
}

impl Rule {
    pub fn new(head: Atom, body: Vec<Literal>) -> Self {
        Rule { head, body }
    }

    pub fn head_pred(&self) -> &str {
        self.head.rel_name().expect("rule head is relational")
    }

    pub fn body_preds(&self) -> impl Iterator<Item = (&str, bool)> {
        self.body.iter().filter_map(|l| l.atom.rel_name().map(|n| (n, l.positive)))
    }

    /// Every head variable and every variable of a negative or equality
    /// literal must occur in a positive relational body literal. Variables
    /// bound by an equality with a constant or a bound variable count as
    /// bound.
    pub fn is_safe(&self) -> bool {
        let mut bound: BTreeSet<&str> = self
            .body
            .iter()
            .filter(|l| l.positive && !l.atom.is_eq())
            .flat_map(|l| l.atom.vars())
            .collect();
        loop {
            let before = bound.len();
            for l in self.body.iter().filter(|l| l.positive && l.atom.is_eq()) {
                let (lhs, rhs) = l.atom.eq_sides();
                for (a, b) in lhs.iter().zip(rhs) {
                    let a_ok = a.is_const() || bound.contains(a.name());
                    let b_ok = b.is_const() || bound.contains(b.name());
                    if a_ok && b.is_var() {
                        bound.insert(b.name());
                    }
                    if b_ok && a.is_var() {
                        bound.insert(a.name());
                    }
                }
            }
            if bound.len() == before {
                break;
            }
        }
        let needed = self
            .head
            .vars()
            .chain(self.body.iter().filter(|l| !l.positive || l.atom.is_eq()).flat_map(|l| l.atom.vars()));
        needed.into_iter().all(|v| bound.contains(v))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, l) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{l}")?;
            }
        }
        f.write_str(".")
    }
}

/// A finite set of function-free rules, possibly with negated body
/// literals. Predicates defined by some rule are intensional (IDB); all
/// others are extensional (EDB).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Self {
        Program { rules }
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn idb(&self) -> BTreeSet<String> {
        self.rules.iter().map(|r| r.head_pred().to_string()).collect()
    }

    pub fn is_idb(&self, pred: &str) -> bool {
        self.rules.iter().any(|r| r.head_pred() == pred)
    }

    pub fn defining(&self, pred: &str) -> impl Iterator<Item = &Rule> + '_ {
        let pred = pred.to_string();
        self.rules.iter().filter(move |r| r.head_pred() == pred)
    }

    /// All relational predicates with their arity.
    pub fn arities(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for r in &self.rules {
            out.insert(r.head_pred().to_string(), r.head.arity());
            for l in &r.body {
                if let Some(n) = l.atom.rel_name() {
                    out.insert(n.to_string(), l.atom.arity());
                }
            }
        }
        out
    }

    pub fn predicates(&self) -> BTreeSet<String> {
        self.arities().into_keys().collect()
    }

    pub fn edb(&self) -> BTreeSet<String> {
        let idb = self.idb();
        self.predicates().into_iter().filter(|p| !idb.contains(p)).collect()
    }

    /// Arity consistency and rule safety.
    pub fn validate(&self) -> Result<()> {
        let mut ar: BTreeMap<&str, usize> = BTreeMap::new();
        for r in &self.rules {
            let atoms = std::iter::once(&r.head).chain(r.body.iter().map(|l| &l.atom));
            for a in atoms {
                if let Some(n) = a.rel_name() {
                    match ar.get(n) {
                        Some(&k) if k != a.arity() => {
                            return Err(Error::Arity {
                                pred: n.to_string(),
                                expected: k,
                                found: a.arity(),
                            })
                        }
                        _ => {
                            ar.insert(n, a.arity());
                        }
                    }
                }
            }
            if !r.is_safe() {
                return Err(Error::Validation(format!("unsafe rule `{r}`")));
            }
        }
        Ok(())
    }

    /// Each rule body has at most one IDB atom.
    pub fn is_linear(&self) -> bool {
        let idb = self.idb();
        self.rules
            .iter()
            .all(|r| r.body_preds().filter(|(p, _)| idb.contains(*p)).count() <= 1)
    }

    pub fn extend(&mut self, rules: impl IntoIterator<Item = Rule>) {
        for r in rules {
            if !self.rules.contains(&r) {
                self.rules.push(r);
            }
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
