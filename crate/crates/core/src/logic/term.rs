use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

/// A function-free term: a variable or a constant.
///
/// Variables start with an uppercase letter or `_`, constants with a
/// lowercase letter or a digit. The two namespaces never overlap.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    /// Classifies an identifier by its first character.
    pub fn from_ident(name: &str) -> Self {
        if is_var_name(name) {
            Term::Var(name.to_string())
        } else {
            Term::Const(name.to_string())
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Term::Const(_))
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Const(n) => n,
        }
    }
}

pub fn is_var_name(name: &str) -> bool {
    name.chars()
        .next()
        .map(|c| c.is_ascii_uppercase() || c == '_')
        .unwrap_or(false)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Predicate of an atom. Equality is binary over term tuples: an equality
/// atom with `2n` arguments states `(args[..n]) = (args[n..])`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pred {
    Eq,
    Rel(String),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: Pred,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            pred: Pred::Rel(pred.into()),
            args,
        }
    }

    /// Tuple equality `lhs = rhs`. Both sides must have the same length.
    pub fn eq(lhs: Vec<Term>, rhs: Vec<Term>) -> Self {
        assert_eq!(lhs.len(), rhs.len(), "tuple equality sides differ in length");
        let mut args = lhs;
        args.extend(rhs);
        Atom { pred: Pred::Eq, args }
    }

    pub fn is_eq(&self) -> bool {
        self.pred == Pred::Eq
    }

    pub fn rel_name(&self) -> Option<&str> {
        match &self.pred {
            Pred::Rel(n) => Some(n),
            Pred::Eq => None,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// Left and right sides of an equality atom.
    pub fn eq_sides(&self) -> (&[Term], &[Term]) {
        debug_assert!(self.is_eq());
        self.args.split_at(self.args.len() / 2)
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }

    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Const(c) => Some(c.as_str()),
            Term::Var(_) => None,
        })
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_const)
    }

    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> Atom {
        Atom {
            pred: self.pred.clone(),
            args: self.args.iter().map(&mut f).collect(),
        }
    }

    pub fn renamed_pred(&self, name: impl Into<String>) -> Atom {
        Atom {
            pred: Pred::Rel(name.into()),
            args: self.args.clone(),
        }
    }
}

fn write_tuple(f: &mut fmt::Formatter<'_>, ts: &[Term]) -> fmt::Result {
    for (i, t) in ts.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{t}")?;
    }
    Ok(())
}

impl Atom {
    pub(crate) fn fmt_with_sign(&self, f: &mut fmt::Formatter<'_>, positive: bool) -> fmt::Result {
        match &self.pred {
            Pred::Rel(name) => {
                if !positive {
                    f.write_str("!")?;
                }
                f.write_str(name)?;
                if !self.args.is_empty() {
                    f.write_str("(")?;
                    write_tuple(f, &self.args)?;
                    f.write_str(")")?;
                }
                Ok(())
            }
            Pred::Eq => {
                let op = if positive { "=" } else { "!=" };
                let (l, r) = self.eq_sides();
                if l.len() == 1 {
                    write!(f, "{} {op} {}", l[0], r[0])
                } else {
                    f.write_str("(")?;
                    write_tuple(f, l)?;
                    write!(f, ") {op} (")?;
                    write_tuple(f, r)?;
                    f.write_str(")")
                }
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with_sign(f, true)
    }
}

/// A signed atom. A negative equality literal is a disequality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { atom, positive: true }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { atom, positive: false }
    }

    pub fn negated(&self) -> Self {
        Literal {
            atom: self.atom.clone(),
            positive: !self.positive,
        }
    }

    pub fn is_complement_of(&self, other: &Literal) -> bool {
        self.positive != other.positive && self.atom == other.atom
    }

    pub fn map_terms(&self, f: impl FnMut(&Term) -> Term) -> Literal {
        Literal {
            atom: self.atom.map_terms(f),
            positive: self.positive,
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.atom.vars()
    }
}

// Sort key: (predicate, sign, arguments). Negative literals first so that
// printed clauses read as implications.
impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.atom
            .pred
            .cmp(&other.atom.pred)
            .then(self.positive.cmp(&other.positive))
            .then_with(|| self.atom.args.cmp(&other.atom.args))
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.atom.fmt_with_sign(f, self.positive)
    }
}

/// Collects variable names in first-occurrence order.
pub fn vars_in_order<'a>(lits: impl IntoIterator<Item = &'a Literal>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for l in lits {
        for v in l.vars() {
            if seen.insert(v) {
                out.push(v.to_string());
            }
        }
    }
    out
}
