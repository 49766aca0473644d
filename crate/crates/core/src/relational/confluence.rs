use std::fmt;

use super::expl::Expl;
use super::rewrite::{rewrite_swp, Strategy, SwpOptions, SwpReport};
use crate::db::Database;
use crate::error::Result;
use crate::logic::Formula;
use crate::oracle::{equiv_bruteforce, Verdict};
use crate::syntax::Normalized;

/// Outcome of running the rewriting under several redex orders.
#[derive(Clone, Debug)]
pub enum ConfluenceVerdict {
    Confluent {
        orders: usize,
        /// Orders whose result differed syntactically from the reference
        /// and were certified by enumeration.
        checked_semantically: usize,
    },
    Divergent {
        seed: u64,
        reference: Formula,
        other: Formula,
        db: Database,
    },
}

impl ConfluenceVerdict {
    pub fn is_confluent(&self) -> bool {
        matches!(self, ConfluenceVerdict::Confluent { .. })
    }
}

impl fmt::Display for ConfluenceVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfluenceVerdict::Confluent {
                orders,
                checked_semantically,
            } => write!(
                f,
                "confluent over {orders} orders ({checked_semantically} certified by enumeration)"
            ),
            ConfluenceVerdict::Divergent {
                seed,
                reference,
                other,
                db,
            } => write!(
                f,
                "order {seed} diverges\n  reference: {reference}\n  other: {other}\ncounterexample:\n{db}"
            ),
        }
    }
}

fn key(e: &Expl) -> String {
    match e {
        Expl::True => "T".into(),
        Expl::False => "F".into(),
        Expl::Clause(c) => c.canonical().to_string(),
        Expl::Not(e) => format!("!({})", key(e)),
        Expl::And(v) | Expl::Or(v) => {
            let mut ks: Vec<String> = v.iter().map(key).collect();
            ks.sort();
            ks.dedup();
            let op = if matches!(e, Expl::And(_)) { "&" } else { "|" };
            format!("{op}[{}]", ks.join(","))
        }
    }
}

fn report_key(r: &SwpReport) -> String {
    key(&Expl::And(r.swp.clone()))
}

/// Runs the rewriting under `n_orders` seeded random redex orders and
/// compares each swp with the leftmost-innermost result: first by
/// canonical form, then by enumeration with `extra` fresh constants.
pub fn check_confluence_sample(
    n: &Normalized,
    c: &Formula,
    n_orders: usize,
    seed: u64,
    extra: usize,
) -> Result<ConfluenceVerdict> {
    let reference = rewrite_swp(n, c, &SwpOptions::default())?;
    let ref_key = report_key(&reference);
    let ref_formula = reference.swp_formula();
    let mut semantic = 0;
    for i in 0..n_orders as u64 {
        let s = seed.wrapping_add(i);
        let opts = SwpOptions {
            strategy: Strategy::Random(s),
            ..SwpOptions::default()
        };
        let other = rewrite_swp(n, c, &opts)?;
        if report_key(&other) == ref_key {
            continue;
        }
        semantic += 1;
        let other_formula = other.swp_formula();
        if let Verdict::Counterexample { db, .. } = equiv_bruteforce(&ref_formula, &other_formula, extra)? {
            return Ok(ConfluenceVerdict::Divergent {
                seed: s,
                reference: ref_formula,
                other: other_formula,
                db,
            });
        }
    }
    Ok(ConfluenceVerdict::Confluent {
        orders: n_orders,
        checked_semantically: semantic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{normalize_update, parse_formula, parse_update};

    fn check(u: &str, c: &str) -> ConfluenceVerdict {
        let n = normalize_update(&parse_update(u).unwrap()).unwrap();
        check_confluence_sample(&n, &parse_formula(c).unwrap(), 10, 1, 1).unwrap()
    }

    #[test]
    fn sequence_example_is_confluent() {
        let v = check(
            "foreach X: s(X) do delete r(X) ; foreach X: p(X) do insert r(X)",
            "!r(X) | q(X)",
        );
        assert!(v.is_confluent(), "{v}");
    }

    #[test]
    fn functional_dependency_is_confluent() {
        let v = check("insert p(a,b)", "!p(X,Y) | !p(X,Z) | q(Y,Z)");
        assert!(v.is_confluent(), "{v}");
    }

    #[test]
    fn unrelated_insert_is_syntactically_identical() {
        let v = check("insert s(a)", "!p(X) | q(X)");
        assert!(matches!(
            v,
            ConfluenceVerdict::Confluent {
                checked_semantically: 0,
                ..
            }
        ));
    }

    #[test]
    fn random_orders_differ_but_agree() {
        let n = normalize_update(
            &parse_update("if (forall X: !s(X)) then (foreach X: p(X) do insert r(X) ; delete r(a)) else insert r(b)")
                .unwrap(),
        )
        .unwrap();
        let c = parse_formula("!r(X) | !r(Y) | q(X,Y)").unwrap();
        let rules = |strategy| {
            let opts = SwpOptions {
                trace: true,
                strategy,
                ..SwpOptions::default()
            };
            let r = rewrite_swp(&n, &c, &opts).unwrap();
            r.trace.iter().map(|t| t.rule.clone()).collect::<Vec<_>>()
        };
        let base = rules(Strategy::LeftmostInnermost);
        assert!((0..8).any(|s| rules(Strategy::Random(s)) != base));
        assert!(check_confluence_sample(&n, &c, 8, 0, 1).unwrap().is_confluent());
    }
}
