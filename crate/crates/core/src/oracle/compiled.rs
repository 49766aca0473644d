//! Small-scope evaluation: a fixed finite universe of constants and
//! relations, with every database over it encoded as a bitset of ground
//! facts.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::db::Database;
use crate::error::{Error, Result};
use crate::logic::{Atom, Formula, Term};
use crate::syntax::{Action, Update};

/// Databases over a universe are `u128` fact sets.
pub type State = u128;

/// Constants and relation symbols fixing the ground facts.
#[derive(Clone, Debug)]
pub struct Universe {
    consts: Vec<String>,
    index: HashMap<String, u8>,
    rels: BTreeMap<String, (u32, usize)>,
    facts: u32,
}

#[derive(Clone, Copy, Debug)]
enum Arg {
    Var(u8),
    Const(u8),
}

#[derive(Clone, Debug)]
enum Node {
    True,
    False,
    Atom { off: u32, args: Vec<Arg> },
    Eq(Vec<(Arg, Arg)>),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Forall(Vec<u8>, Box<Node>),
    Exists(Vec<u8>, Box<Node>),
}

/// A sentence compiled against a universe.
#[derive(Clone, Debug)]
pub struct Compiled {
    node: Node,
    slots: usize,
}

#[derive(Clone, Debug)]
enum Instr {
    Skip,
    Foreach { slots: Vec<u8>, qual: Node, insert: bool, off: u32, arity: usize },
    Seq(Box<Instr>, Box<Instr>),
    If { cond: Node, then: Box<Instr>, els: Box<Instr> },
}

/// An update compiled against a universe.
#[derive(Clone, Debug)]
pub struct CompiledUpdate {
    instr: Instr,
    slots: usize,
}

impl Universe {
    /// `rels` maps each relation to its arity. At most 128 ground facts and
    /// 255 constants.
    pub fn new(consts: impl IntoIterator<Item = String>, rels: &BTreeMap<String, usize>) -> Result<Self> {
        let consts: Vec<String> = consts.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if consts.len() > 255 {
            return Err(Error::Validation("too many constants for the small-scope evaluator".into()));
        }
        let n = consts.len() as u128;
        let mut off: u128 = 0;
        let mut table = BTreeMap::new();
        for (r, &a) in rels {
            table.insert(r.clone(), (off as u32, a));
            off += n.checked_pow(a as u32).unwrap_or(u128::MAX);
            if off > 128 {
                return Err(Error::EnumerationCap {
                    needed: off,
                    cap: 128,
                });
            }
        }
        let index = consts.iter().enumerate().map(|(i, c)| (c.clone(), i as u8)).collect();
        Ok(Universe {
            consts,
            index,
            rels: table,
            facts: off as u32,
        })
    }

    pub fn constants(&self) -> &[String] {
        &self.consts
    }

    pub fn relations(&self) -> impl Iterator<Item = (&String, usize)> {
        self.rels.iter().map(|(r, &(_, a))| (r, a))
    }

    /// Number of ground facts.
    pub fn fact_count(&self) -> u32 {
        self.facts
    }

    /// Number of databases, `2^facts`.
    pub fn instance_count(&self) -> u128 {
        if self.facts >= 128 {
            u128::MAX
        } else {
            1u128 << self.facts
        }
    }

    fn fact_at(&self, mut i: u32) -> (String, Vec<String>) {
        let n = self.consts.len() as u32;
        let (name, &(off, a)) = self.rels.iter().rev().find(|(_, &(off, _))| off <= i).expect("fact index");
        i -= off;
        let mut args = vec![String::new(); a];
        for k in (0..a).rev() {
            args[k] = self.consts[(i % n) as usize].clone();
            i /= n;
        }
        (name.clone(), args)
    }

    pub fn decode(&self, s: State) -> Database {
        let mut db = Database::new();
        for (r, &(_, a)) in &self.rels {
            db.declare(r, a).expect("fresh relation");
        }
        for i in 0..self.facts {
            if s >> i & 1 == 1 {
                let (r, t) = self.fact_at(i);
                db.insert(&r, t).expect("arity");
            }
        }
        db
    }

    /// Facts of `db` outside the universe are an error.
    pub fn encode(&self, db: &Database) -> Result<State> {
        let mut s = 0u128;
        for (r, rel) in db.relations() {
            for t in &rel.tuples {
                let Some(&(off, a)) = self.rels.get(r) else {
                    return Err(Error::Undeclared(r.clone()));
                };
                if a != t.len() {
                    return Err(Error::Arity {
                        pred: r.clone(),
                        expected: a,
                        found: t.len(),
                    });
                }
                let mut idx = 0u32;
                for c in t {
                    let Some(&k) = self.index.get(c) else {
                        return Err(Error::Validation(format!("constant `{c}` outside the universe")));
                    };
                    idx = idx * self.consts.len() as u32 + k as u32;
                }
                s |= 1u128 << (off + idx);
            }
        }
        Ok(s)
    }

    fn arg(&self, t: &Term, scope: &BTreeMap<String, u8>) -> Result<Arg> {
        match t {
            Term::Var(v) => scope
                .get(v)
                .map(|&s| Arg::Var(s))
                .ok_or_else(|| Error::Validation(format!("unbound variable `{v}`"))),
            Term::Const(c) => self
                .index
                .get(c)
                .map(|&k| Arg::Const(k))
                .ok_or_else(|| Error::Validation(format!("constant `{c}` outside the universe"))),
        }
    }

    fn atom(&self, a: &Atom, scope: &BTreeMap<String, u8>) -> Result<Node> {
        if a.is_eq() {
            let (l, r) = a.eq_sides();
            let pairs = l
                .iter()
                .zip(r)
                .map(|(x, y)| Ok((self.arg(x, scope)?, self.arg(y, scope)?)))
                .collect::<Result<_>>()?;
            return Ok(Node::Eq(pairs));
        }
        let name = a.rel_name().unwrap_or_default();
        let &(off, ar) = self.rels.get(name).ok_or_else(|| Error::Undeclared(name.to_string()))?;
        if ar != a.arity() {
            return Err(Error::Arity {
                pred: name.to_string(),
                expected: ar,
                found: a.arity(),
            });
        }
        let args = a.args.iter().map(|t| self.arg(t, scope)).collect::<Result<_>>()?;
        Ok(Node::Atom { off, args })
    }

    fn node(&self, f: &Formula, scope: &mut BTreeMap<String, u8>, slots: &mut usize) -> Result<Node> {
        Ok(match f {
            Formula::True => Node::True,
            Formula::False => Node::False,
            Formula::Atom(a) => self.atom(a, scope)?,
            Formula::Not(g) => Node::Not(Box::new(self.node(g, scope, slots)?)),
            Formula::And(gs) => Node::And(gs.iter().map(|g| self.node(g, scope, slots)).collect::<Result<_>>()?),
            Formula::Or(gs) => Node::Or(gs.iter().map(|g| self.node(g, scope, slots)).collect::<Result<_>>()?),
            Formula::Forall(vs, g) | Formula::Exists(vs, g) => {
                let saved: Vec<(String, Option<u8>)> = vs.iter().map(|v| (v.clone(), scope.get(v).copied())).collect();
                let mut ids = Vec::new();
                for v in vs {
                    let id = u8::try_from(*slots).map_err(|_| Error::Validation("too many variables".into()))?;
                    *slots += 1;
                    scope.insert(v.clone(), id);
                    ids.push(id);
                }
                let body = Box::new(self.node(g, scope, slots)?);
                for (v, old) in saved {
                    match old {
                        Some(o) => scope.insert(v, o),
                        None => scope.remove(&v),
                    };
                }
                if matches!(f, Formula::Forall(..)) {
                    Node::Forall(ids, body)
                } else {
                    Node::Exists(ids, body)
                }
            }
        })
    }

    /// Compiles the universal closure of `f`.
    pub fn compile(&self, f: &Formula) -> Result<Compiled> {
        let closed = Formula::forall(f.free_vars(), f.clone());
        let mut slots = 0;
        let node = self.node(&closed, &mut BTreeMap::new(), &mut slots)?;
        Ok(Compiled { node, slots })
    }

    fn instr(&self, u: &Update, slots: &mut usize) -> Result<Instr> {
        Ok(match u {
            Update::Skip => Instr::Skip,
            Update::Seq(a, b) => Instr::Seq(Box::new(self.instr(a, slots)?), Box::new(self.instr(b, slots)?)),
            Update::If { cond, then, els } => {
                let closed = Formula::forall(cond.free_vars(), cond.clone());
                Instr::If {
                    cond: self.node(&closed, &mut BTreeMap::new(), slots)?,
                    then: Box::new(self.instr(then, slots)?),
                    els: Box::new(match els {
                        Some(e) => self.instr(e, slots)?,
                        None => Instr::Skip,
                    }),
                }
            }
            Update::Foreach(fe) => {
                let &(off, arity) = self
                    .rels
                    .get(&fe.target)
                    .ok_or_else(|| Error::Undeclared(fe.target.clone()))?;
                if arity != fe.vars.len() {
                    return Err(Error::Arity {
                        pred: fe.target.clone(),
                        expected: arity,
                        found: fe.vars.len(),
                    });
                }
                let mut scope = BTreeMap::new();
                let mut ids = Vec::new();
                for v in &fe.vars {
                    let id = u8::try_from(*slots).map_err(|_| Error::Validation("too many variables".into()))?;
                    *slots += 1;
                    scope.insert(v.clone(), id);
                    ids.push(id);
                }
                let extra: Vec<String> = fe.qual.free_vars().into_iter().filter(|v| !fe.vars.contains(v)).collect();
                let qual = self.node(&Formula::exists(extra, fe.qual.clone()), &mut scope, slots)?;
                Instr::Foreach {
                    slots: ids,
                    qual,
                    insert: fe.action == Action::Insert,
                    off,
                    arity,
                }
            }
        })
    }

    pub fn compile_update(&self, u: &Update) -> Result<CompiledUpdate> {
        let mut slots = 0;
        let instr = self.instr(u, &mut slots)?;
        Ok(CompiledUpdate { instr, slots })
    }

    fn n(&self) -> u8 {
        self.consts.len() as u8
    }
}

#[inline]
fn val(a: Arg, env: &[u8]) -> u8 {
    match a {
        Arg::Var(s) => env[s as usize],
        Arg::Const(c) => c,
    }
}

fn fact_index(off: u32, args: &[Arg], env: &[u8], n: u32) -> u32 {
    let mut i = 0u32;
    for &a in args {
        i = i * n + val(a, env) as u32;
    }
    off + i
}

fn eval(node: &Node, s: State, env: &mut [u8], n: u8) -> bool {
    match node {
        Node::True => true,
        Node::False => false,
        Node::Atom { off, args } => s >> fact_index(*off, args, env, n as u32) & 1 == 1,
        Node::Eq(pairs) => pairs.iter().all(|&(x, y)| val(x, env) == val(y, env)),
        Node::Not(g) => !eval(g, s, env, n),
        Node::And(gs) => gs.iter().all(|g| eval(g, s, env, n)),
        Node::Or(gs) => gs.iter().any(|g| eval(g, s, env, n)),
        Node::Forall(ids, g) => quant(ids, g, s, env, n, true),
        Node::Exists(ids, g) => quant(ids, g, s, env, n, false),
    }
}

fn quant(ids: &[u8], g: &Node, s: State, env: &mut [u8], n: u8, universal: bool) -> bool {
    let Some((&v, rest)) = ids.split_first() else {
        return eval(g, s, env, n);
    };
    for c in 0..n {
        env[v as usize] = c;
        if quant(rest, g, s, env, n, universal) != universal {
            return !universal;
        }
    }
    universal
}

fn run(i: &Instr, s: State, env: &mut [u8], n: u8) -> State {
    match i {
        Instr::Skip => s,
        Instr::Seq(a, b) => {
            let mid = run(a, s, env, n);
            run(b, mid, env, n)
        }
        Instr::If { cond, then, els } => {
            if eval(cond, s, env, n) {
                run(then, s, env, n)
            } else {
                run(els, s, env, n)
            }
        }
        Instr::Foreach {
            slots,
            qual,
            insert,
            off,
            arity,
        } => {
            let mut mask: State = 0;
            let total = (n as u32).pow(*arity as u32);
            for t in 0..total {
                let mut rem = t;
                for k in (0..*arity).rev() {
                    env[slots[k] as usize] = (rem % n as u32) as u8;
                    rem /= n as u32;
                }
                if eval(qual, s, env, n) {
                    mask |= 1u128 << (off + t);
                }
            }
            if *insert {
                s | mask
            } else {
                s & !mask
            }
        }
    }
}

impl Compiled {
    pub fn eval(&self, u: &Universe, s: State) -> bool {
        let mut env = vec![0u8; self.slots.max(1)];
        eval(&self.node, s, &mut env, u.n())
    }

    /// Evaluation reusing a caller-provided scratch buffer.
    pub fn eval_with(&self, u: &Universe, s: State, env: &mut Vec<u8>) -> bool {
        if env.len() < self.slots {
            env.resize(self.slots, 0);
        }
        eval(&self.node, s, env, u.n())
    }
}

impl CompiledUpdate {
    pub fn exec(&self, u: &Universe, s: State) -> State {
        let mut env = vec![0u8; self.slots.max(1)];
        run(&self.instr, s, &mut env, u.n())
    }

    pub fn exec_with(&self, u: &Universe, s: State, env: &mut Vec<u8>) -> State {
        if env.len() < self.slots {
            env.resize(self.slots, 0);
        }
        run(&self.instr, s, env, u.n())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{eval_over, exec_update};
    use crate::syntax::{parse_database, parse_formula, parse_update};

    fn universe() -> Universe {
        let rels: BTreeMap<String, usize> = [("p".to_string(), 1), ("q".to_string(), 1), ("e".to_string(), 2)].into();
        Universe::new(["a", "b", "c"].map(String::from), &rels).unwrap()
    }

    #[test]
    fn encode_decode_roundtrip() {
        let u = universe();
        assert_eq!(u.fact_count(), 15);
        for s in [0u128, 1, 0b101, 0x7fff, 12345] {
            assert_eq!(u.encode(&u.decode(s)).unwrap(), s);
        }
    }

    #[test]
    fn agrees_with_interpreter() {
        let u = universe();
        let dom: BTreeSet<String> = u.constants().iter().cloned().collect();
        let f = parse_formula("forall X: p(X) -> exists Y: (e(X,Y) & !q(Y) & X != Y)").unwrap();
        let g = u.compile(&f).unwrap();
        for s in (0..1u128 << 15).step_by(97) {
            assert_eq!(g.eval(&u, s), eval_over(&f, &u.decode(s), &dom), "state {s}");
        }
    }

    #[test]
    fn update_agrees_with_interpreter() {
        let u = universe();
        let upd = parse_update("foreach X,Z: e(X,Y) & e(Y,Z) do insert e(X,Z) ; if (forall X: !p(X)) then delete q(a)").unwrap();
        let c = u.compile_update(&upd).unwrap();
        let b = parse_database("e(a,b). e(b,c). q(a). p(a). p(b). p(c).").unwrap();
        let s = u.encode(&b).unwrap();
        let post = exec_update(&upd, &b).unwrap();
        assert!(u.decode(c.exec(&u, s)).same_facts(&post));
    }
}
