//! Binary resolution restricted to one predicate, followed by
//! (dis)equality elimination.

use std::collections::BTreeSet;

use super::clause::{dedup_variants, Clause};
use super::subst::{mgu, Substitution};
use super::term::{Atom, Literal, Term};

/// Result of [`simplify_disequalities`]. When `tautology` is set the clause
/// is valid; `clause` then still carries a syntactic witness (a ground
/// `a != b` or a trivial `s = s`) so that [`Clause::is_tautology`] agrees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simplified {
    pub clause: Clause,
    pub tautology: bool,
}

/// Eliminates (dis)equality literals.
///
/// `C ∨ s̄ ≠ t̄` is equivalent to `C σ` where σ = mgu(s̄, t̄); when the
/// tuples do not unify the disequality is true and the clause valid.
/// Positive equalities lose identical components; a component between
/// distinct constants makes the equality false and it is removed.
pub fn simplify_disequalities(c: &Clause) -> Simplified {
    let mut cur = c.clone();
    loop {
        let next = cur.literals().find(|l| l.atom.is_eq()).cloned();
        let Some(_) = next else { break };
        let mut changed = false;
        for l in cur.literals().filter(|l| l.atom.is_eq()).cloned().collect::<Vec<_>>() {
            let (lhs, rhs) = l.atom.eq_sides();
            if !l.positive {
                match unify_or_clash(lhs, rhs) {
                    Ok(s) => {
                        cur = cur.without(&l).apply(&s);
                        changed = true;
                        break;
                    }
                    Err((a, b)) => {
                        let mut witness = cur.without(&l);
                        witness.insert(Literal::neg(Atom::eq(vec![a], vec![b])));
                        return Simplified {
                            clause: witness,
                            tautology: true,
                        };
                    }
                }
            } else {
                let mut keep_l = Vec::new();
                let mut keep_r = Vec::new();
                let mut falsified = false;
                for (a, b) in lhs.iter().zip(rhs) {
                    if a == b {
                        continue;
                    }
                    if a.is_const() && b.is_const() {
                        falsified = true;
                        break;
                    }
                    keep_l.push(a.clone());
                    keep_r.push(b.clone());
                }
                if falsified {
                    cur = cur.without(&l);
                    changed = true;
                    break;
                }
                if keep_l.is_empty() {
                    let t = lhs[0].clone();
                    let mut witness = cur.without(&l);
                    witness.insert(Literal::pos(Atom::eq(vec![t.clone()], vec![t])));
                    return Simplified {
                        clause: witness,
                        tautology: true,
                    };
                }
                if keep_l.len() != lhs.len() {
                    let reduced = Literal::pos(Atom::eq(keep_l, keep_r));
                    let mut c2 = cur.without(&l);
                    c2.insert(reduced);
                    cur = c2;
                    changed = true;
                    break;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let tautology = cur.is_tautology();
    Simplified { clause: cur, tautology }
}

fn unify_or_clash(lhs: &[Term], rhs: &[Term]) -> Result<Substitution, (Term, Term)> {
    let mut s = Substitution::new();
    for (a, b) in lhs.iter().zip(rhs) {
        let a = s.apply_term(a);
        let b = s.apply_term(b);
        match (&a, &b) {
            _ if a == b => {}
            (Term::Var(v), _) => s.bind(v, b.clone()),
            (_, Term::Var(v)) => s.bind(v, a.clone()),
            _ => return Err((a, b)),
        }
    }
    Ok(s)
}

/// Simplified binary resolvents of `c1` and `c2` upon literals of
/// predicate `r`, in both orientations. `c2` is renamed apart from `c1`
/// first (renamed variables carry a prime suffix). Variables of `c2` are
/// bound towards the terms of `c1` where unification leaves a choice.
pub fn binary_resolvents_on(c1: &Clause, c2: &Clause, r: &str) -> Vec<Clause> {
    let taken: BTreeSet<String> = c1.vars().into_iter().collect();
    let c2 = c2.rename_apart(&taken);
    let mut out = Vec::new();
    for l1 in c1.literals().filter(|l| l.atom.rel_name() == Some(r)) {
        for l2 in c2.literals().filter(|l| l.atom.rel_name() == Some(r)) {
            if l1.positive == l2.positive {
                continue;
            }
            if let Some(s) = mgu(&l2.atom, &l1.atom) {
                let resolvent = c1.without(l1).union(&c2.without(l2)).apply(&s);
                out.push(simplify_disequalities(&resolvent).clause);
            }
        }
    }
    dedup_variants(out)
}

/// All simplified binary resolvents over `r` of pairs of clauses from `s`,
/// including each clause with a renamed copy of itself; duplicates modulo
/// renaming are removed.
pub fn res_r(s: &[Clause], r: &str) -> Vec<Clause> {
    let mut out = Vec::new();
    for i in 0..s.len() {
        for j in i..s.len() {
            out.extend(binary_resolvents_on(&s[i], &s[j], r));
        }
    }
    dedup_variants(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_clause;

    fn cl(s: &str) -> Clause {
        parse_clause(s).unwrap()
    }

    fn same_set(got: &[Clause], want: &[&str]) {
        assert_eq!(got.len(), want.len(), "got {got:?}");
        for w in want {
            let w = cl(w);
            assert!(got.iter().any(|g| g.is_variant(&w)), "missing {w} in {got:?}");
        }
    }

    #[test]
    fn tuple_disequality_substitutes() {
        let s = simplify_disequalities(&cl("q(Y,Z) | (X,Y) != (a,b) | !r(X,Z)"));
        assert!(!s.tautology);
        assert_eq!(s.clause, cl("q(b,Z) | !r(a,Z)"));
    }

    #[test]
    fn distinct_constants_make_a_tautology() {
        let s = simplify_disequalities(&cl("p(X) | a != b"));
        assert!(s.tautology);
        assert!(s.clause.is_tautology());
        let s = simplify_disequalities(&cl("p(X) | X != a | X != b"));
        assert!(s.tautology);
    }

    #[test]
    fn identical_disequality_is_dropped() {
        let s = simplify_disequalities(&cl("p(X) | a != a"));
        assert_eq!(s.clause, cl("p(X)"));
        assert!(!s.tautology);
    }

    #[test]
    fn positive_equalities() {
        assert!(simplify_disequalities(&cl("p(X) | a = a")).tautology);
        assert_eq!(simplify_disequalities(&cl("p(X) | a = b")).clause, cl("p(X)"));
        assert_eq!(simplify_disequalities(&cl("p(X) | (a,X) = (a,Y)")).clause, cl("p(X) | X = Y"));
    }

    #[test]
    fn variable_disequality_merges_variables() {
        let s = simplify_disequalities(&cl("p(X,Y) | X != Y"));
        assert!(s.clause.is_variant(&cl("p(Z,Z)")));
    }

    #[test]
    fn resolvents_simple() {
        let got = binary_resolvents_on(&cl("!r(X,Y) | q(Y,Z)"), &cl("r(X,Y) | !q(X,Y)"), "r");
        same_set(&got, &["q(Y,Z) | !q(X,Y)"]);
    }

    #[test]
    fn resolvents_with_disequality() {
        let got = binary_resolvents_on(&cl("!r(X,Y) | !r(X,Z) | q(Y,Z)"), &cl("r(X,Y) | (X,Y) != (a,b)"), "r");
        same_set(&got, &["!r(a,Z) | q(b,Z)", "!r(a,Y) | q(Y,b)"]);
    }

    #[test]
    fn no_literals_on_predicate() {
        assert!(binary_resolvents_on(&cl("q(X)"), &cl("p(X)"), "r").is_empty());
    }

    #[test]
    fn res_r_on_sets() {
        same_set(&res_r(&[cl("!r(X,Y) | q(Y,Z)"), cl("r(X,Y) | !q(X,Y)")], "r"), &["q(Y,Z) | !q(X,Y)"]);
        same_set(
            &res_r(&[cl("!r(X,Y) | !r(X,Z) | q(Y,Z)"), cl("r(X,Y) | (X,Y) != (a,b)")], "r"),
            &["!r(a,Z) | q(b,Z)", "!r(a,Y) | q(Y,b)"],
        );
        assert!(res_r(&[cl("!r(X) | q(X)"), cl("!r(Y) | p(Y)")], "r").is_empty());
    }

    #[test]
    fn self_resolution_uses_a_renamed_copy() {
        let got = res_r(&[cl("!r(X) | r(Y)")], "r");
        same_set(&got, &["!r(X) | r(Y')"]);
    }
}
