use std::collections::BTreeMap;
use std::fmt;

use super::term::{Atom, Literal, Term};

/// A finite, idempotent map from variables to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.map.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.map.iter()
    }

    /// Adds `var ↦ term`, keeping the substitution idempotent: the new
    /// binding is applied to every existing range term. Self-bindings are
    /// ignored.
    pub fn bind(&mut self, var: &str, term: Term) {
        let term = self.apply_term(&term);
        if term == Term::Var(var.to_string()) {
            return;
        }
        for t in self.map.values_mut() {
            if matches!(t, Term::Var(v) if v == var) {
                *t = term.clone();
            }
        }
        self.map.insert(var.to_string(), term);
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.map.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Const(_) => t.clone(),
        }
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        a.map_terms(|t| self.apply_term(t))
    }

    pub fn apply_literal(&self, l: &Literal) -> Literal {
        l.map_terms(|t| self.apply_term(t))
    }
}

impl FromIterator<(String, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (String, Term)>>(iter: I) -> Self {
        let mut s = Substitution::new();
        for (v, t) in iter {
            s.bind(&v, t);
        }
        s
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}->{t}")?;
        }
        f.write_str("}")
    }
}

/// Unifies two term lists pairwise, extending `s`.
pub fn unify_terms(lhs: &[Term], rhs: &[Term], s: &mut Substitution) -> bool {
    if lhs.len() != rhs.len() {
        return false;
    }
    for (a, b) in lhs.iter().zip(rhs) {
        let a = s.apply_term(a);
        let b = s.apply_term(b);
        match (&a, &b) {
            _ if a == b => {}
            (Term::Var(v), _) => s.bind(v, b.clone()),
            (_, Term::Var(v)) => s.bind(v, a.clone()),
            _ => return false,
        }
    }
    true
}

/// Most general unifier of two relational atoms. Variables of `a1` are
/// preferably bound to terms of `a2`.
pub fn mgu(a1: &Atom, a2: &Atom) -> Option<Substitution> {
    if a1.pred != a2.pred || a1.args.len() != a2.args.len() {
        return None;
    }
    let mut s = Substitution::new();
    unify_terms(&a1.args, &a2.args, &mut s).then_some(s)
}

/// One-way matching: finds σ extending `s` with `pattern σ = target`,
/// binding only variables of `pattern`. Variables of `target` behave as
/// constants.
pub fn match_terms(pattern: &[Term], target: &[Term], s: &mut Substitution) -> bool {
    if pattern.len() != target.len() {
        return false;
    }
    for (p, t) in pattern.iter().zip(target) {
        match p {
            Term::Var(v) => match s.get(v) {
                Some(bound) => {
                    if bound != t {
                        return false;
                    }
                }
                None => {
                    s.map.insert(v.clone(), t.clone());
                }
            },
            Term::Const(_) => {
                if p != t {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n)
    }
    fn c(n: &str) -> Term {
        Term::constant(n)
    }

    #[test]
    fn mgu_binds_variables() {
        let s = mgu(&Atom::new("p", vec![v("X"), v("Y")]), &Atom::new("p", vec![c("a"), v("Z")])).unwrap();
        assert_eq!(s.get("X"), Some(&c("a")));
        assert_eq!(s.get("Y"), Some(&v("Z")));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn mgu_constant_clash() {
        assert!(mgu(&Atom::new("p", vec![c("a")]), &Atom::new("p", vec![c("b")])).is_none());
    }

    #[test]
    fn mgu_repeated_variable_clash() {
        let a = Atom::new("p", vec![v("X"), v("X")]);
        let b = Atom::new("p", vec![c("a"), c("b")]);
        assert!(mgu(&a, &b).is_none());
    }

    #[test]
    fn mgu_different_predicates() {
        assert!(mgu(&Atom::new("p", vec![v("X")]), &Atom::new("q", vec![v("X")])).is_none());
        assert!(mgu(&Atom::new("p", vec![v("X")]), &Atom::new("p", vec![v("X"), v("Y")])).is_none());
    }

    #[test]
    fn mgu_chain_stays_idempotent() {
        let a = Atom::new("p", vec![v("X"), v("Y"), v("X")]);
        let b = Atom::new("p", vec![v("Y"), v("Z"), c("a")]);
        let s = mgu(&a, &b).unwrap();
        let once = s.apply_atom(&a);
        assert_eq!(once, s.apply_atom(&once));
        assert_eq!(once, s.apply_atom(&b));
        assert_eq!(once.args, vec![c("a"), c("a"), c("a")]);
    }

    #[test]
    fn no_self_binding() {
        let s: Substitution = [("X".to_string(), v("X"))].into_iter().collect();
        assert!(s.is_empty());
    }
}
