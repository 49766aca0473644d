use std::collections::{BTreeMap, BTreeSet};

use crate::db::Database;
use crate::logic::{Atom, Formula, Term};

/// Truth of the universal closure of `f` under active-domain semantics:
/// variables range over the constants of `b` and of `f`.
pub fn eval_sentence(f: &Formula, b: &Database) -> bool {
    let mut domain = b.active_domain();
    domain.extend(f.constants());
    eval_over(f, b, &domain)
}

/// Truth of the universal closure of `f` with variables ranging over
/// `domain`.
pub fn eval_over(f: &Formula, b: &Database, domain: &BTreeSet<String>) -> bool {
    let closed = Formula::forall(f.free_vars(), f.clone());
    let dom: Vec<&str> = domain.iter().map(String::as_str).collect();
    eval_env(&closed, b, &dom, &mut BTreeMap::new())
}

fn term_value<'a>(t: &'a Term, env: &BTreeMap<String, &'a str>) -> &'a str {
    match t {
        Term::Const(c) => c,
        Term::Var(v) => env.get(v).copied().unwrap_or_else(|| panic!("unbound variable {v}")),
    }
}

pub(crate) fn eval_atom(a: &Atom, b: &Database, env: &BTreeMap<String, &str>) -> bool {
    if a.is_eq() {
        let (l, r) = a.eq_sides();
        return l.iter().zip(r).all(|(x, y)| term_value(x, env) == term_value(y, env));
    }
    let tuple: Vec<String> = a.args.iter().map(|t| term_value(t, env).to_string()).collect();
    b.contains(a.rel_name().unwrap_or_default(), &tuple)
}

pub(crate) fn eval_env<'a>(f: &'a Formula, b: &Database, dom: &[&'a str], env: &mut BTreeMap<String, &'a str>) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => eval_atom(a, b, env),
        Formula::Not(g) => !eval_env(g, b, dom, env),
        Formula::And(gs) => gs.iter().all(|g| eval_env(g, b, dom, env)),
        Formula::Or(gs) => gs.iter().any(|g| eval_env(g, b, dom, env)),
        Formula::Forall(vs, g) => quantify(vs, g, b, dom, env, true),
        Formula::Exists(vs, g) => quantify(vs, g, b, dom, env, false),
    }
}

fn quantify<'a>(
    vs: &'a [String],
    g: &'a Formula,
    b: &Database,
    dom: &[&'a str],
    env: &mut BTreeMap<String, &'a str>,
    universal: bool,
) -> bool {
    let Some((v, rest)) = vs.split_first() else {
        return eval_env(g, b, dom, env);
    };
    let saved = env.get(v).copied();
    let mut result = universal;
    for c in dom {
        env.insert(v.clone(), c);
        if quantify(rest, g, b, dom, env, universal) != universal {
            result = !universal;
            break;
        }
    }
    match saved {
        Some(s) => env.insert(v.clone(), s),
        None => env.remove(v),
    };
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_database, parse_formula};

    #[test]
    fn implication_examples() {
        let f = parse_formula("forall X: r(X) -> q(X)").unwrap();
        assert!(eval_sentence(&f, &parse_database("r(a). q(a). q(b).").unwrap()));
        assert!(!eval_sentence(&f, &parse_database("r(a).").unwrap()));
    }

    #[test]
    fn free_variables_are_universal() {
        let f = parse_formula("!p(X) | q(X)").unwrap();
        assert!(!eval_sentence(&f, &parse_database("p(a). q(b).").unwrap()));
    }

    #[test]
    fn tuple_equality_and_constants_join_the_domain() {
        let f = parse_formula("exists X,Y: (X,Y) = (c,d)").unwrap();
        assert!(eval_sentence(&f, &Database::new()));
        let g = parse_formula("exists X: X != c").unwrap();
        assert!(!eval_sentence(&g, &Database::new()));
    }
}
