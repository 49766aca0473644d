use std::collections::{BTreeMap, BTreeSet};

use super::analysis::stratify;
use super::program::{Program, Rule};
use crate::db::{Database, Tuple};
use crate::error::Result;
use crate::logic::{Literal, Term};

/// The model of a program over a database: the input facts plus every
/// derived IDB fact.
pub type Interpretation = Database;

type Binding = BTreeMap<String, String>;

fn value<'a>(t: &'a Term, b: &'a Binding) -> Option<&'a str> {
    match t {
        Term::Const(c) => Some(c),
        Term::Var(v) => b.get(v).map(String::as_str),
    }
}

/// Extends `b` so that `args` matches `tuple`.
fn bind_tuple(args: &[Term], tuple: &[String], b: &Binding) -> Option<Binding> {
    let mut out = b.clone();
    for (t, v) in args.iter().zip(tuple) {
        match t {
            Term::Const(c) if c != v => return None,
            Term::Const(_) => {}
            Term::Var(x) => match out.get(x) {
                Some(w) if w != v => return None,
                Some(_) => {}
                None => {
                    out.insert(x.clone(), v.clone());
                }
            },
        }
    }
    Some(out)
}

/// Evaluates the remaining (non-generator) literals, binding variables
/// through positive equalities where possible.
fn filter(lits: &[&Literal], b: Binding, db: &Database) -> Option<Binding> {
    let mut b = b;
    let mut pending: Vec<&Literal> = lits.to_vec();
    while !pending.is_empty() {
        let mut progressed = false;
        let mut rest = Vec::new();
        for l in pending {
            if l.atom.is_eq() {
                let (lhs, rhs) = l.atom.eq_sides();
                let mut unresolved = false;
                let mut equal = true;
                for (s, t) in lhs.iter().zip(rhs) {
                    match (value(s, &b).map(str::to_string), value(t, &b).map(str::to_string)) {
                        (Some(x), Some(y)) => equal &= x == y,
                        (Some(x), None) if l.positive && lhs.len() == 1 => {
                            b.insert(t.name().to_string(), x);
                        }
                        (None, Some(y)) if l.positive && lhs.len() == 1 => {
                            b.insert(s.name().to_string(), y);
                        }
                        _ => unresolved = true,
                    }
                }
                if unresolved {
                    rest.push(l);
                    continue;
                }
                progressed = true;
                if equal != l.positive {
                    return None;
                }
            } else {
                let vals: Option<Vec<String>> = l.atom.args.iter().map(|t| value(t, &b).map(str::to_string)).collect();
                match vals {
                    Some(tuple) => {
                        progressed = true;
                        if db.contains(l.atom.rel_name().unwrap(), &tuple) != l.positive {
                            return None;
                        }
                    }
                    None => rest.push(l),
                }
            }
        }
        if !progressed {
            // Multi-component equalities with unbound sides: bind componentwise.
            let l = rest.iter().position(|l| l.atom.is_eq() && l.positive)?;
            let lit = rest.remove(l);
            let (lhs, rhs) = lit.atom.eq_sides();
            for (s, t) in lhs.iter().zip(rhs) {
                let single = Literal::pos(crate::logic::Atom::eq(vec![s.clone()], vec![t.clone()]));
                b = filter(&[&single], b, db)?;
            }
        }
        pending = rest;
    }
    Some(b)
}

/// All head tuples derivable by one application of `rule`. When
/// `delta_at` is given, the positive literal at that body index ranges
/// over `delta` instead of `db`.
pub(crate) fn fire(rule: &Rule, db: &Database, delta_at: Option<(usize, &Database)>) -> BTreeSet<Tuple> {
    let generators: Vec<(usize, &Literal)> = rule
        .body
        .iter()
        .enumerate()
        .filter(|(_, l)| l.positive && !l.atom.is_eq())
        .collect();
    let others: Vec<&Literal> = rule.body.iter().filter(|l| !l.positive || l.atom.is_eq()).collect();
    let mut bindings = vec![Binding::new()];
    for (i, l) in generators {
        let source = match delta_at {
            Some((k, d)) if k == i => d,
            _ => db,
        };
        let pred = l.atom.rel_name().unwrap();
        let mut next = Vec::new();
        for b in &bindings {
            for t in source.tuples(pred) {
                if let Some(nb) = bind_tuple(&l.atom.args, t, b) {
                    next.push(nb);
                }
            }
        }
        bindings = next;
        if bindings.is_empty() {
            return BTreeSet::new();
        }
    }
    bindings
        .into_iter()
        .filter_map(|b| filter(&others, b, db))
        .filter_map(|b| {
            rule.head
                .args
                .iter()
                .map(|t| value(t, &b).map(str::to_string))
                .collect::<Option<Tuple>>()
        })
        .collect()
}

/// Stratified semi-naive bottom-up evaluation.
pub fn evaluate(p: &Program, b: &Database) -> Result<Interpretation> {
    Ok(evaluate_logged(p, b)?.0)
}

/// As [`evaluate`], also returning the strata in the order they were
/// completed.
pub fn evaluate_logged(p: &Program, b: &Database) -> Result<(Interpretation, Vec<BTreeSet<String>>)> {
    let strata = stratify(p)?;
    let mut db = b.clone();
    for (pred, n) in p.arities() {
        db.declare(&pred, n)?;
    }
    for stratum in &strata {
        let rules: Vec<&Rule> = p.rules.iter().filter(|r| stratum.contains(r.head_pred())).collect();
        let recursive_at = |r: &Rule| -> Vec<usize> {
            r.body
                .iter()
                .enumerate()
                .filter(|(_, l)| l.positive && l.atom.rel_name().is_some_and(|n| stratum.contains(n)))
                .map(|(i, _)| i)
                .collect()
        };
        let mut delta = Database::new();
        for r in &rules {
            for t in fire(r, &db, None) {
                if !db.contains(r.head_pred(), &t) {
                    delta.insert(r.head_pred(), t)?;
                }
            }
        }
        while delta.fact_count() > 0 {
            for (pred, rel) in delta.relations() {
                for t in &rel.tuples {
                    db.insert(pred, t.clone())?;
                }
            }
            let mut next = Database::new();
            for r in &rules {
                for i in recursive_at(r) {
                    for t in fire(r, &db, Some((i, &delta))) {
                        if !db.contains(r.head_pred(), &t) {
                            next.insert(r.head_pred(), t)?;
                        }
                    }
                }
            }
            delta = next;
        }
    }
    Ok((db, strata))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_database, parse_program};

    const TC: &str = "tc(X,Y) :- arc(X,Y). tc(X,Y) :- arc(X,Z), tc(Z,Y).";

    #[test]
    fn transitive_closure() {
        let p = parse_program(TC).unwrap();
        let m = evaluate(&p, &parse_database("arc(a,b). arc(b,c).").unwrap()).unwrap();
        let tc: Vec<_> = m.tuples("tc").map(|t| t.join(",")).collect();
        assert_eq!(tc, vec!["a,b", "a,c", "b,c"]);
    }

    #[test]
    fn empty_program_is_identity() {
        let b = parse_database("arc(a,b).").unwrap();
        assert!(evaluate(&Program::default(), &b).unwrap().same_facts(&b));
    }

    #[test]
    fn empty_database_derives_nothing() {
        let m = evaluate(&parse_program(TC).unwrap(), &Database::new()).unwrap();
        assert_eq!(m.fact_count(), 0);
    }

    #[test]
    fn negation_and_equality() {
        let p = parse_program("r2(X) :- r(X), !t(X). t(X) :- s(X), X != b. e(X) :- r(X), X = a.").unwrap();
        let m = evaluate(&p, &parse_database("r(a). r(b). s(a). s(b).").unwrap()).unwrap();
        assert_eq!(m.tuples("r2").map(|t| t[0].as_str()).collect::<Vec<_>>(), vec!["b"]);
        assert_eq!(m.len_of("e"), 1);
    }

    #[test]
    fn tuple_equality_binds_head() {
        let p = parse_program("s(X,Y) :- d, (X,Y) = (a,b).").unwrap();
        let m = evaluate(&p, &parse_database("d.").unwrap()).unwrap();
        assert!(m.contains("s", &["a".into(), "b".into()]));
    }
}
