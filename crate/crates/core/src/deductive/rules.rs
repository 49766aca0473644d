//! Rule-level helpers shared by the deductive constructions.

use std::collections::{BTreeMap, BTreeSet};

use crate::datalog::Rule;
use crate::logic::{unify_terms, Atom, Clause, Literal, Substitution};

pub(crate) fn rename_preds(rule: &Rule, map: &BTreeMap<String, String>) -> Rule {
    let ren = |a: &Atom| match a.rel_name().and_then(|n| map.get(n)) {
        Some(m) => a.renamed_pred(m.clone()),
        None => a.clone(),
    };
    Rule::new(
        ren(&rule.head),
        rule.body
            .iter()
            .map(|l| Literal {
                atom: ren(&l.atom),
                positive: l.positive,
            })
            .collect(),
    )
}

pub(crate) fn apply(rule: &Rule, s: &Substitution) -> Rule {
    Rule::new(s.apply_atom(&rule.head), rule.body.iter().map(|l| s.apply_literal(l)).collect())
}

pub(crate) fn vars(rule: &Rule) -> BTreeSet<String> {
    rule.head
        .vars()
        .chain(rule.body.iter().flat_map(|l| l.vars()))
        .map(str::to_string)
        .collect()
}

/// Renames variables of `rule` occurring in `taken` by appending primes.
pub(crate) fn rename_apart(rule: &Rule, taken: &BTreeSet<String>) -> Rule {
    let mut used = taken.clone();
    used.extend(vars(rule));
    let mut s = Substitution::new();
    for v in vars(rule) {
        if taken.contains(&v) {
            let mut fresh = format!("{v}'");
            while used.contains(&fresh) {
                fresh.push('\'');
            }
            used.insert(fresh.clone());
            s.bind(&v, crate::logic::Term::Var(fresh));
        }
    }
    apply(rule, &s)
}

/// Solves positive equalities in the body by unification. `None` if one
/// of them cannot hold.
pub(crate) fn inline_equalities(rule: &Rule) -> Option<Rule> {
    let mut s = Substitution::new();
    let mut rest = Vec::new();
    for l in &rule.body {
        if l.positive && l.atom.is_eq() {
            let (a, b) = l.atom.eq_sides();
            let a: Vec<_> = a.iter().map(|t| s.apply_term(t)).collect();
            let b: Vec<_> = b.iter().map(|t| s.apply_term(t)).collect();
            if !unify_terms(&a, &b, &mut s) {
                return None;
            }
        } else {
            rest.push(l.clone());
        }
    }
    Some(apply(&Rule::new(rule.head.clone(), rest), &s))
}

/// Resolvents of `rule` with the ground fact `fact` on positive body
/// atoms.
pub(crate) fn resolve_with_fact(rule: &Rule, fact: &Atom) -> Vec<Rule> {
    let mut out = Vec::new();
    for (i, l) in rule.body.iter().enumerate() {
        if !l.positive || l.atom.pred != fact.pred || l.atom.arity() != fact.arity() {
            continue;
        }
        let mut s = Substitution::new();
        if unify_terms(&l.atom.args, &fact.args, &mut s) {
            let body = rule
                .body
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, m)| s.apply_literal(m))
                .collect();
            out.push(Rule::new(s.apply_atom(&rule.head), body));
        }
    }
    out
}

/// The rule as a clause, for comparison modulo variable renaming.
pub(crate) fn as_clause(rule: &Rule) -> Clause {
    let mut c = Clause::new(rule.body.iter().map(Literal::negated));
    c.insert(Literal::pos(rule.head.clone()));
    c
}

pub(crate) fn is_variant(a: &Rule, b: &Rule) -> bool {
    a.body.len() == b.body.len() && as_clause(a).is_variant(&as_clause(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    fn rule(s: &str) -> Rule {
        parse_program(s).unwrap().rules.remove(0)
    }

    #[test]
    fn equalities_are_inlined() {
        let r = inline_equalities(&rule("a(X1,X2) :- (X1,X2) = (d,b).")).unwrap();
        assert_eq!(r.to_string(), "a(d,b).");
        assert!(inline_equalities(&rule("a(X) :- X = d, X = b.")).is_none());
    }

    #[test]
    fn resolution_with_a_fact() {
        let rs = resolve_with_fact(&rule("d(X,Y) :- arc(X,Z), tc(Z,Y)."), &rule("arc(d,b).").head);
        assert_eq!(rs.len(), 1);
        assert_eq!(rs[0].to_string(), "d(d,Y) :- tc(b,Y).");
    }

    #[test]
    fn variants() {
        assert!(is_variant(&rule("d(X,Y) :- arc(X,Z), t(Z,Y)."), &rule("d(A,B) :- arc(A,C), t(C,B).")));
        assert!(!is_variant(&rule("d(X,Y) :- arc(X,Z), t(Z,Y)."), &rule("d(A,B) :- arc(A,C), t(B,C).")));
    }
}
