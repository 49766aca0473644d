use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::db::Database;
use crate::logic::{Atom, Clause, Formula, Literal, Term};
use crate::syntax::{Action, Foreach, Update};

/// Parameters of the random case generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    /// At least 1.
    pub domain_size: usize,
    pub relations: Vec<(String, usize)>,
    pub max_depth: usize,
    pub seed: u64,
    /// Probability, in percent, of each ground fact in the database.
    pub fact_density: u32,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            domain_size: 3,
            relations: vec![("p".into(), 1), ("q".into(), 1), ("e".into(), 2)],
            max_depth: 3,
            seed: 0,
            fact_density: 30,
        }
    }
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> Self {
        GenConfig {
            seed,
            ..Default::default()
        }
    }

    /// `a, b, c, …` then `c26, c27, …`.
    pub fn constants(&self) -> Vec<String> {
        (0..self.domain_size.max(1))
            .map(|i| {
                if i < 26 {
                    ((b'a' + i as u8) as char).to_string()
                } else {
                    format!("c{i}")
                }
            })
            .collect()
    }
}

const VARS: [&str; 4] = ["X", "Y", "Z", "W"];

struct Gen<'a> {
    cfg: &'a GenConfig,
    rng: ChaCha8Rng,
    consts: Vec<String>,
}

impl Gen<'_> {
    fn term(&mut self, vars: &[String], const_pct: u32) -> Term {
        if vars.is_empty() || self.rng.gen_range(0..100) < const_pct {
            Term::constant(self.consts.choose(&mut self.rng).unwrap().clone())
        } else {
            Term::var(vars.choose(&mut self.rng).unwrap().clone())
        }
    }

    fn rel(&mut self) -> (String, usize) {
        self.cfg.relations.choose(&mut self.rng).unwrap().clone()
    }

    fn atom(&mut self, vars: &[String], const_pct: u32) -> Atom {
        let (r, a) = self.rel();
        let args = (0..a).map(|_| self.term(vars, const_pct)).collect();
        Atom::new(r, args)
    }

    fn eq_atom(&mut self, vars: &[String]) -> Atom {
        let l = self.term(vars, 0);
        let r = self.term(vars, 50);
        Atom::eq(vec![l], vec![r])
    }

    /// A range-restricted clause: every variable occurs in a negative
    /// relational literal.
    fn clause(&mut self) -> Clause {
        let mut c = Clause::empty();
        if self.rng.gen_range(0..10) == 0 {
            c.insert(Literal::pos(self.atom(&[], 100)));
            return c;
        }
        let pool: Vec<String> = VARS[..self.rng.gen_range(1..=3)].iter().map(|s| s.to_string()).collect();
        for _ in 0..self.rng.gen_range(1..=2) {
            let a = self.atom(&pool, 15);
            c.insert(Literal::neg(a));
        }
        let bound: Vec<String> = c.vars();
        for _ in 0..self.rng.gen_range(0..=2) {
            let l = match self.rng.gen_range(0..6) {
                0 if !bound.is_empty() => Literal::pos(self.eq_atom(&bound)),
                1 if !bound.is_empty() => Literal::neg(self.eq_atom(&bound)),
                _ => Literal::pos(self.atom(&bound, 15)),
            };
            c.insert(l);
        }
        c
    }

    /// A safe qualification over exactly `vars`.
    fn qual(&mut self, vars: &[String]) -> Formula {
        let mut lits: Vec<Formula> = Vec::new();
        for _ in 0..self.rng.gen_range(1..=2) {
            lits.push(Formula::Atom(self.atom(vars, 15)));
        }
        if self.rng.gen_range(0..3) == 0 {
            let neg = if self.rng.gen_bool(0.5) {
                self.atom(vars, 15)
            } else {
                self.eq_atom(vars)
            };
            lits.push(Formula::not(Formula::Atom(neg)));
        }
        let covered: BTreeSet<String> = lits
            .iter()
            .filter(|f| matches!(f, Formula::Atom(_)))
            .flat_map(|f| f.free_vars())
            .collect();
        for v in vars {
            if !covered.contains(v) {
                let unary: Vec<String> = self.cfg.relations.iter().filter(|(_, a)| *a == 1).map(|(r, _)| r.clone()).collect();
                let guard = match unary.choose(&mut self.rng) {
                    Some(r) if self.rng.gen_bool(0.7) => Atom::new(r.clone(), vec![Term::var(v.clone())]),
                    _ => Atom::eq(
                        vec![Term::var(v.clone())],
                        vec![Term::constant(self.consts.choose(&mut self.rng).unwrap().clone())],
                    ),
                };
                lits.push(Formula::Atom(guard));
            }
        }
        if lits.len() == 1 {
            lits.pop().unwrap()
        } else {
            Formula::And(lits)
        }
    }

    fn foreach(&mut self) -> Update {
        let (target, arity) = self.rel();
        let action = if self.rng.gen_bool(0.5) {
            Action::Insert
        } else {
            Action::Delete
        };
        if arity == 0 || self.rng.gen_range(0..4) == 0 {
            let args: Vec<String> = (0..arity).map(|_| self.consts.choose(&mut self.rng).unwrap().clone()).collect();
            return Update::Foreach(Foreach::ground(action, &target, &args));
        }
        let vars: Vec<String> = VARS[..arity.min(VARS.len())].iter().map(|s| s.to_string()).collect();
        let vars: Vec<String> = if arity > VARS.len() {
            (1..=arity).map(|i| format!("X{i}")).collect()
        } else {
            vars
        };
        let qual = self.qual(&vars);
        Update::Foreach(Foreach {
            vars,
            qual,
            action,
            target,
        })
    }

    fn update(&mut self, depth: usize) -> Update {
        if depth <= 1 {
            return self.foreach();
        }
        match self.rng.gen_range(0..20) {
            0..=7 => self.foreach(),
            8..=14 => Update::seq(self.update(depth - 1), self.update(depth - 1)),
            _ => {
                let cond = Formula::closed_clause(&self.clause());
                let then = Box::new(self.update(depth - 1));
                let els = if self.rng.gen_bool(0.5) {
                    Some(Box::new(self.update(depth - 1)))
                } else {
                    None
                };
                Update::If { cond, then, els }
            }
        }
    }

    fn database(&mut self) -> Database {
        let mut db = Database::new();
        let rels = self.cfg.relations.clone();
        for (r, a) in rels {
            db.declare(&r, a).expect("distinct relation names");
            let n = self.consts.len();
            for t in 0..n.pow(a as u32) {
                if self.rng.gen_range(0..100) < self.cfg.fact_density {
                    let mut rem = t;
                    let mut tuple = vec![String::new(); a];
                    for k in (0..a).rev() {
                        tuple[k] = self.consts[rem % n].clone();
                        rem /= n;
                    }
                    db.insert(&r, tuple).expect("arity");
                }
            }
        }
        db
    }
}

/// A seed-deterministic random instance: a database, an update of depth
/// at most `max_depth` whose qualifications are safe conjunctions over the
/// foreach variables, and a range-restricted single-clause constraint.
pub fn generate_case(cfg: &GenConfig) -> (Database, Update, Formula) {
    assert!(!cfg.relations.is_empty(), "generator needs at least one relation");
    let mut g = Gen {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        consts: cfg.constants(),
    };
    let c = g.clause();
    let u = g.update(cfg.max_depth.max(1));
    let b = g.database();
    (b, u, Formula::closed_clause(&c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{normalize_update, Mode};

    #[test]
    fn deterministic() {
        let cfg = GenConfig::with_seed(1);
        assert_eq!(generate_case(&cfg), generate_case(&cfg));
    }

    #[test]
    fn cases_are_well_formed() {
        for seed in 0..300 {
            let cfg = GenConfig::with_seed(seed);
            let (_, u, c) = generate_case(&cfg);
            assert!(u.depth() <= 3);
            let clauses = c.universal_matrix().unwrap().to_clauses();
            assert_eq!(clauses.len(), 1, "{c}");
            let n = normalize_update(&u).unwrap_or_else(|e| panic!("{u}: {e}"));
            assert!(n.update.is_normal());
            let printed = u.to_string();
            let reparsed = crate::syntax::parse_update(&printed).unwrap_or_else(|e| panic!("{printed}: {e}"));
            assert_eq!(reparsed, u, "{printed}");
            let _ = crate::syntax::parse_constraint(&c.to_string(), Mode::Relational).unwrap();
        }
    }
}
