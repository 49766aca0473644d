//! Finite relational instances.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

pub type Tuple = Vec<String>;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Relation {
    pub arity: usize,
    pub tuples: BTreeSet<Tuple>,
}

/// Named relations of fixed arity over constants. Also used for the
/// models computed by Datalog evaluation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Database {
    rels: BTreeMap<String, Relation>,
}

impl Database {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers an (empty) relation, or checks the arity of an existing one.
    pub fn declare(&mut self, pred: &str, arity: usize) -> Result<()> {
        match self.rels.get(pred) {
            Some(r) if r.arity != arity => Err(Error::Arity {
                pred: pred.to_string(),
                expected: r.arity,
                found: arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.rels.insert(
                    pred.to_string(),
                    Relation {
                        arity,
                        tuples: BTreeSet::new(),
                    },
                );
                Ok(())
            }
        }
    }

    /// Adds a fact; returns whether it was new.
    pub fn insert(&mut self, pred: &str, tuple: Tuple) -> Result<bool> {
        self.declare(pred, tuple.len())?;
        Ok(self.rels.get_mut(pred).unwrap().tuples.insert(tuple))
    }

    pub fn remove(&mut self, pred: &str, tuple: &[String]) -> bool {
        self.rels.get_mut(pred).map_or(false, |r| r.tuples.remove(tuple))
    }

    pub fn contains(&self, pred: &str, tuple: &[String]) -> bool {
        self.rels.get(pred).map_or(false, |r| r.tuples.contains(tuple))
    }

    pub fn relation(&self, pred: &str) -> Option<&Relation> {
        self.rels.get(pred)
    }

    pub fn tuples(&self, pred: &str) -> impl Iterator<Item = &Tuple> {
        self.rels.get(pred).into_iter().flat_map(|r| r.tuples.iter())
    }

    pub fn len_of(&self, pred: &str) -> usize {
        self.rels.get(pred).map_or(0, |r| r.tuples.len())
    }

    pub fn relations(&self) -> impl Iterator<Item = (&String, &Relation)> {
        self.rels.iter()
    }

    pub fn arity(&self, pred: &str) -> Option<usize> {
        self.rels.get(pred).map(|r| r.arity)
    }

    pub fn fact_count(&self) -> usize {
        self.rels.values().map(|r| r.tuples.len()).sum()
    }

    /// Constants occurring in some fact.
    pub fn active_domain(&self) -> BTreeSet<String> {
        self.rels
            .values()
            .flat_map(|r| r.tuples.iter().flatten().cloned())
            .collect()
    }

    pub fn remove_relation(&mut self, pred: &str) {
        self.rels.remove(pred);
    }

    /// Keeps only the listed relations.
    pub fn restricted_to(&self, preds: &BTreeSet<String>) -> Database {
        Database {
            rels: self
                .rels
                .iter()
                .filter(|(k, _)| preds.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Equality of the facts, ignoring declared-but-empty relations.
    pub fn same_facts(&self, other: &Database) -> bool {
        let nonempty = |d: &Database| -> BTreeMap<String, BTreeSet<Tuple>> {
            d.rels
                .iter()
                .filter(|(_, r)| !r.tuples.is_empty())
                .map(|(k, r)| (k.clone(), r.tuples.clone()))
                .collect()
        };
        nonempty(self) == nonempty(other)
    }
}

/// One `pred(args).` line per fact, sorted.
impl fmt::Display for Database {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, rel) in &self.rels {
            for t in &rel.tuples {
                if t.is_empty() {
                    writeln!(f, "{name}.")?;
                } else {
                    writeln!(f, "{name}({}).", t.join(","))?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arity_is_fixed() {
        let mut db = Database::new();
        db.insert("p", vec!["a".into()]).unwrap();
        assert!(db.insert("p", vec!["a".into(), "b".into()]).is_err());
    }

    #[test]
    fn display_is_sorted() {
        let mut db = Database::new();
        db.insert("q", vec!["b".into()]).unwrap();
        db.insert("p", vec!["b".into()]).unwrap();
        db.insert("p", vec!["a".into()]).unwrap();
        assert_eq!(db.to_string(), "p(a).\np(b).\nq(b).\n");
    }
}
