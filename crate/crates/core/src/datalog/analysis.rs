use std::collections::{BTreeMap, BTreeSet};

use super::program::Program;
use crate::error::{Error, Result};

/// `q` depends on `r`: `q = r`, or `r` occurs in the body of a rule
/// defining `q`, transitively.
pub fn depends(p: &Program, q: &str, r: &str) -> Result<bool> {
    let preds = p.predicates();
    for s in [q, r] {
        if !preds.contains(s) {
            return Err(Error::Undeclared(s.to_string()));
        }
    }
    Ok(dependents(p, r).contains(q))
}

/// Every predicate depending on `r`, including `r` itself.
pub fn dependents(p: &Program, r: &str) -> BTreeSet<String> {
    let mut out: BTreeSet<String> = [r.to_string()].into();
    loop {
        let before = out.len();
        for rule in &p.rules {
            if rule.body_preds().any(|(b, _)| out.contains(b)) {
                out.insert(rule.head_pred().to_string());
            }
        }
        if out.len() == before {
            return out;
        }
    }
}

/// Assigns strata to the IDB predicates so that positive dependencies
/// stay within or below the head's stratum and negative ones are strictly
/// below. Returns the IDB predicates grouped by stratum, lowest first.
pub fn stratify(p: &Program) -> Result<Vec<BTreeSet<String>>> {
    let idb = p.idb();
    let mut level: BTreeMap<&str, usize> = idb.iter().map(|s| (s.as_str(), 0)).collect();
    let limit = idb.len();
    loop {
        let mut changed = false;
        for rule in &p.rules {
            let h = rule.head_pred();
            for (b, positive) in rule.body_preds() {
                let Some(&lb) = level.get(b) else { continue };
                let need = if positive { lb } else { lb + 1 };
                if level[h] < need {
                    if need > limit {
                        return Err(Error::NotStratifiable(h.to_string()));
                    }
                    level.insert(h, need);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let top = level.values().copied().max().unwrap_or(0);
    let mut strata = vec![BTreeSet::new(); if idb.is_empty() { 0 } else { top + 1 }];
    for (pred, l) in level {
        strata[l].insert(pred.to_string());
    }
    strata.retain(|s| !s.is_empty());
    Ok(strata)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    const TC_PATH: &str = "tc(X,Y) :- arc(X,Y). tc(X,Y) :- arc(X,Z), tc(Z,Y). path(X,Y) :- edge(X,Y). \
                       ok(X,Y) :- i(X,Y).";

    #[test]
    fn dependency_examples() {
        let p = parse_program(TC_PATH).unwrap();
        assert!(depends(&p, "tc", "arc").unwrap());
        assert!(!depends(&p, "i", "tc").unwrap());
        assert!(depends(&p, "path", "path").unwrap());
        assert!(depends(&p, "nope", "tc").is_err());
    }

    #[test]
    fn horn_program_has_one_stratum() {
        let p = parse_program(TC_PATH).unwrap();
        assert_eq!(stratify(&p).unwrap().len(), 1);
    }

    #[test]
    fn delete_construction_stratifies() {
        let p = parse_program("r2(X) :- r(X), !t(X). t(X) :- s(X).").unwrap();
        let s = stratify(&p).unwrap();
        let pos = |n: &str| s.iter().position(|l| l.contains(n)).unwrap();
        assert!(pos("t") < pos("r2"));
    }

    #[test]
    fn negative_self_cycle_rejected() {
        let p = parse_program("p(X) :- q(X), !p(X).").unwrap();
        assert!(matches!(stratify(&p), Err(Error::NotStratifiable(_))));
    }
}
