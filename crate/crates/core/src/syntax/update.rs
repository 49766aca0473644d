use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::logic::{Atom, Clause, Formula, Literal, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Insert,
    Delete,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::Insert => "insert",
            Action::Delete => "delete",
        })
    }
}

/// `foreach vars : qual do insert|delete target(vars)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Foreach {
    pub vars: Vec<String>,
    pub qual: Formula,
    pub action: Action,
    pub target: String,
}

impl Foreach {
    pub fn target_atom(&self) -> Atom {
        Atom::new(self.target.clone(), self.vars.iter().map(|v| Term::var(v.clone())).collect())
    }

    /// Ground sugar `insert r(ā)`: `foreach X1..Xn : (X1..Xn) = (ā) do …`.
    pub fn ground(action: Action, target: &str, args: &[String]) -> Self {
        let vars: Vec<String> = (1..=args.len()).map(|i| format!("X{i}")).collect();
        let qual = if args.is_empty() {
            Formula::True
        } else {
            Formula::Atom(Atom::eq(
                vars.iter().map(|v| Term::var(v.clone())).collect(),
                args.iter().map(|a| Term::constant(a.clone())).collect(),
            ))
        };
        Foreach {
            vars,
            qual,
            action,
            target: target.to_string(),
        }
    }
}

/// An update program.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Update {
    Foreach(Foreach),
    Seq(Box<Update>, Box<Update>),
    If {
        cond: Formula,
        then: Box<Update>,
        els: Option<Box<Update>>,
    },
    /// The unit of sequencing.
    Skip,
}

impl Update {
    pub fn seq(a: Update, b: Update) -> Self {
        Update::Seq(Box::new(a), Box::new(b))
    }

    /// Right-nested sequence; empty input gives `Skip`.
    pub fn seq_all(mut items: Vec<Update>) -> Self {
        let Some(mut acc) = items.pop() else {
            return Update::Skip;
        };
        while let Some(prev) = items.pop() {
            acc = Update::seq(prev, acc);
        }
        acc
    }

    pub fn depth(&self) -> usize {
        match self {
            Update::Foreach(_) | Update::Skip => 1,
            Update::Seq(a, b) => 1 + a.depth().max(b.depth()),
            Update::If { then, els, .. } => 1 + then.depth().max(els.as_ref().map_or(0, |e| e.depth())),
        }
    }

    pub fn foreaches(&self) -> Vec<&Foreach> {
        let mut out = Vec::new();
        self.visit(&mut |u| {
            if let Update::Foreach(f) = u {
                out.push(f)
            }
        });
        out
    }

    pub fn conditions(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        self.visit(&mut |u| {
            if let Update::If { cond, .. } = u {
                out.push(cond)
            }
        });
        out
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Update)) {
        f(self);
        match self {
            Update::Seq(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Update::If { then, els, .. } => {
                then.visit(f);
                if let Some(e) = els {
                    e.visit(f);
                }
            }
            Update::Foreach(_) | Update::Skip => {}
        }
    }

    pub fn targets(&self) -> BTreeSet<String> {
        self.foreaches().into_iter().map(|f| f.target.clone()).collect()
    }

    pub fn constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for f in self.foreaches() {
            out.extend(f.qual.constants());
        }
        for c in self.conditions() {
            out.extend(c.constants());
        }
        out
    }

    /// Every relational predicate mentioned, with arity.
    pub fn predicates(&self) -> std::collections::BTreeMap<String, usize> {
        let mut out = std::collections::BTreeMap::new();
        for f in self.foreaches() {
            out.insert(f.target.clone(), f.vars.len());
            out.extend(f.qual.predicates());
        }
        for c in self.conditions() {
            out.extend(c.predicates());
        }
        out
    }
}

fn write_stmt(f: &mut fmt::Formatter<'_>, u: &Update) -> fmt::Result {
    if matches!(u, Update::Seq(..) | Update::If { .. }) {
        write!(f, "({u})")
    } else {
        write!(f, "{u}")
    }
}

impl fmt::Display for Foreach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "foreach {}: {} do {} {}", self.vars.join(","), self.qual, self.action, self.target_atom())
    }
}

impl fmt::Display for Update {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Update::Foreach(fe) => write!(f, "{fe}"),
            Update::Seq(a, b) => {
                write_stmt(f, a)?;
                f.write_str(" ; ")?;
                write_stmt(f, b)
            }
            Update::If { cond, then, els } => {
                write!(f, "if ({cond}) then ")?;
                write_stmt(f, then)?;
                if let Some(e) = els {
                    f.write_str(" else ")?;
                    write_stmt(f, e)?;
                }
                Ok(())
            }
            Update::Skip => f.write_str("skip"),
        }
    }
}

/// Update whose qualifications are conjunctions of literals not mentioning
/// the target, and whose conditions are single clauses.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NormUpdate {
    Foreach {
        vars: Vec<String>,
        qual: Vec<Literal>,
        action: Action,
        target: String,
    },
    Seq(Box<NormUpdate>, Box<NormUpdate>),
    If {
        cond: Clause,
        then: Box<NormUpdate>,
        els: Box<NormUpdate>,
    },
    Skip,
}

impl NormUpdate {
    pub fn seq(a: NormUpdate, b: NormUpdate) -> Self {
        NormUpdate::Seq(Box::new(a), Box::new(b))
    }

    pub fn seq_all(mut items: Vec<NormUpdate>) -> Self {
        let Some(mut acc) = items.pop() else {
            return NormUpdate::Skip;
        };
        while let Some(prev) = items.pop() {
            acc = NormUpdate::seq(prev, acc);
        }
        acc
    }

    pub fn to_update(&self) -> Update {
        match self {
            NormUpdate::Foreach {
                vars,
                qual,
                action,
                target,
            } => Update::Foreach(Foreach {
                vars: vars.clone(),
                qual: Formula::conj(qual),
                action: *action,
                target: target.clone(),
            }),
            NormUpdate::Seq(a, b) => Update::seq(a.to_update(), b.to_update()),
            NormUpdate::If { cond, then, els } => Update::If {
                cond: Formula::closed_clause(cond),
                then: Box::new(then.to_update()),
                els: Some(Box::new(els.to_update())),
            },
            NormUpdate::Skip => Update::Skip,
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            NormUpdate::Foreach { .. } | NormUpdate::Skip => 1,
            NormUpdate::Seq(a, b) => 1 + a.size() + b.size(),
            NormUpdate::If { then, els, .. } => 1 + then.size() + els.size(),
        }
    }

    /// Checks the three normal-form restrictions.
    pub fn is_normal(&self) -> bool {
        match self {
            NormUpdate::Foreach { qual, target, .. } => qual.iter().all(|l| l.atom.rel_name() != Some(target)),
            NormUpdate::Seq(a, b) => a.is_normal() && b.is_normal(),
            NormUpdate::If { then, els, .. } => then.is_normal() && els.is_normal(),
            NormUpdate::Skip => true,
        }
    }
}

impl fmt::Display for NormUpdate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_update())
    }
}
