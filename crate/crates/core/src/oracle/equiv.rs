use std::collections::{BTreeMap, BTreeSet};

use super::compiled::Universe;
use super::par::find_first;
use crate::db::Database;
use crate::error::{Error, Result};
use crate::logic::Formula;

/// Default bound on the number of enumerated databases.
pub const DEFAULT_CAP: u128 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equivalent { instances: u128 },
    /// The first database, in enumeration order, on which the formulas
    /// disagree.
    Counterexample { db: Database, left: bool, right: bool },
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent { .. })
    }
}

/// Names `k1, k2, …` avoiding `taken`.
pub fn fresh_constants(n: usize, taken: &BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    let mut i = 1;
    while out.len() < n {
        let c = format!("k{i}");
        if !taken.contains(&c) {
            out.push(c);
        }
        i += 1;
    }
    out
}

/// The universe of two formulas: their relations, their constants and
/// `extra` fresh constants.
pub fn universe_for(fs: &[&Formula], extra: usize) -> Result<Universe> {
    let mut rels: BTreeMap<String, usize> = BTreeMap::new();
    let mut consts: BTreeSet<String> = BTreeSet::new();
    for f in fs {
        for (r, a) in f.predicates() {
            if let Some(&b) = rels.get(&r) {
                if a != b {
                    return Err(Error::Arity {
                        pred: r,
                        expected: b,
                        found: a,
                    });
                }
            }
            rels.insert(r, a);
        }
        consts.extend(f.constants());
    }
    let fresh = fresh_constants(extra, &consts);
    consts.extend(fresh);
    Universe::new(consts, &rels)
}

/// Checks that `f` and `g` agree on every database over their relations,
/// with variables ranging over their constants plus `extra` fresh ones.
pub fn equiv_bruteforce(f: &Formula, g: &Formula, extra: usize) -> Result<Verdict> {
    equiv_bruteforce_capped(f, g, extra, DEFAULT_CAP)
}

pub fn equiv_bruteforce_capped(f: &Formula, g: &Formula, extra: usize, cap: u128) -> Result<Verdict> {
    let u = universe_for(&[f, g], extra)?;
    let total = u.instance_count();
    if total > cap {
        return Err(Error::EnumerationCap { needed: total, cap });
    }
    let cf = u.compile(f)?;
    let cg = u.compile(g)?;
    let hit = find_first(total as u64, |i| cf.eval(&u, i as u128) != cg.eval(&u, i as u128));
    Ok(match hit {
        None => Verdict::Equivalent { instances: total },
        Some(i) => Verdict::Counterexample {
            db: u.decode(i as u128),
            left: cf.eval(&u, i as u128),
            right: cg.eval(&u, i as u128),
        },
    })
}
