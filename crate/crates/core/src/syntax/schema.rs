use std::collections::BTreeMap;

use super::update::Update;
use crate::datalog::Program;
use crate::db::Database;
use crate::error::{Error, Result};
use crate::logic::Formula;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PredKind {
    Edb,
    Idb,
}

/// Predicate symbols with their arity and kind, shared by every artifact
/// of a session.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    preds: BTreeMap<String, (usize, PredKind)>,
}

impl Schema {
    pub fn new() -> Self {
        Self::default()
    }

    /// IDB predicates are the heads of `program`; everything else it
    /// mentions is EDB.
    pub fn from_program(program: &Program) -> Result<Self> {
        let mut s = Schema::new();
        let idb = program.idb();
        for (p, n) in program.arities() {
            let kind = if idb.contains(&p) { PredKind::Idb } else { PredKind::Edb };
            s.declare(&p, n, kind)?;
        }
        Ok(s)
    }

    /// Adds a predicate, or checks it against an existing declaration.
    /// A predicate first seen as EDB may later be promoted to IDB.
    pub fn declare(&mut self, pred: &str, arity: usize, kind: PredKind) -> Result<()> {
        match self.preds.get_mut(pred) {
            Some((n, _)) if *n != arity => Err(Error::Arity {
                pred: pred.to_string(),
                expected: *n,
                found: arity,
            }),
            Some((_, k)) => {
                if kind == PredKind::Idb {
                    *k = PredKind::Idb;
                }
                Ok(())
            }
            None => {
                self.preds.insert(pred.to_string(), (arity, kind));
                Ok(())
            }
        }
    }

    pub fn arity(&self, pred: &str) -> Option<usize> {
        self.preds.get(pred).map(|p| p.0)
    }

    pub fn kind(&self, pred: &str) -> Option<PredKind> {
        self.preds.get(pred).map(|p| p.1)
    }

    pub fn is_idb(&self, pred: &str) -> bool {
        self.kind(pred) == Some(PredKind::Idb)
    }

    pub fn contains(&self, pred: &str) -> bool {
        self.preds.contains_key(pred)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, usize, PredKind)> {
        self.preds.iter().map(|(k, (n, kind))| (k, *n, *kind))
    }

    /// Registers unseen predicates of `f` as EDB and checks arities.
    pub fn absorb_formula(&mut self, f: &Formula) -> Result<()> {
        for (p, n) in f.predicates() {
            self.declare(&p, n, PredKind::Edb)?;
        }
        Ok(())
    }

    pub fn absorb_update(&mut self, u: &Update) -> Result<()> {
        for (p, n) in u.predicates() {
            self.declare(&p, n, PredKind::Edb)?;
        }
        Ok(())
    }

    pub fn absorb_database(&mut self, db: &Database) -> Result<()> {
        for (p, rel) in db.relations() {
            self.declare(p, rel.arity, PredKind::Edb)?;
        }
        Ok(())
    }

    /// Facts may only be stored for EDB predicates.
    pub fn check_database(&self, db: &Database) -> Result<()> {
        for (p, rel) in db.relations() {
            if self.is_idb(p) && !rel.tuples.is_empty() {
                return Err(Error::Validation(format!("database stores facts for IDB predicate `{p}`")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_program};

    #[test]
    fn kinds_from_program() {
        let p = parse_program("tc(X,Y) :- arc(X,Y). tc(X,Y) :- arc(X,Z), tc(Z,Y).").unwrap();
        let s = Schema::from_program(&p).unwrap();
        assert_eq!(s.kind("tc"), Some(PredKind::Idb));
        assert_eq!(s.kind("arc"), Some(PredKind::Edb));
    }

    #[test]
    fn cross_artifact_arity_clash() {
        let p = parse_program("tc(X,Y) :- arc(X,Y).").unwrap();
        let mut s = Schema::from_program(&p).unwrap();
        assert!(s.absorb_formula(&parse_formula("!tc(X)").unwrap()).is_err());
    }
}
