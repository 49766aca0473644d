use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::bound::step_bound;
use super::expl::Expl;
use super::substitute::check_relational;
use crate::error::{Error, Result};
use crate::logic::{binary_resolvents_on, simplify_disequalities, theta_subsumes, Atom, Clause, Formula, Literal, Term};
use crate::syntax::{Action, NormUpdate, Normalized};

/// Redex selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    LeftmostInnermost,
    /// Uniform choice among all redexes, seeded.
    Random(u64),
}

#[derive(Clone, Debug)]
pub struct SwpOptions {
    /// Cap on generated conjuncts; exceeding it is [`Error::BlowUp`].
    pub max_conjuncts: usize,
    pub trace: bool,
    pub strategy: Strategy,
    /// Also drop top-level clauses subsumed by an earlier kept conjunct.
    pub drop_subsumed_by_emitted: bool,
}

impl Default for SwpOptions {
    fn default() -> Self {
        SwpOptions {
            max_conjuncts: 10_000,
            trace: false,
            strategy: Strategy::LeftmostInnermost,
            drop_subsumed_by_emitted: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DropReason {
    Tautology,
    SubsumedByConstraint(Clause),
    SubsumedByConjunct(Clause),
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DropReason::Tautology => f.write_str("tautology"),
            DropReason::SubsumedByConstraint(c) => write!(f, "subsumed by constraint clause {c}"),
            DropReason::SubsumedByConjunct(c) => write!(f, "subsumed by conjunct {c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dropped {
    pub clause: Clause,
    pub reason: DropReason,
    /// Dropped inside a disjunction or negation rather than at top level.
    pub nested: bool,
}

/// One rewrite step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub step: u64,
    pub rule: String,
    pub redex: String,
    pub result: String,
}

#[derive(Clone, Debug)]
pub struct SwpReport {
    /// Conjuncts of the simplified weakest precondition.
    pub swp: Vec<Expl>,
    pub dropped: Vec<Dropped>,
    /// The explicit form before dropping; equivalent to the full wp.
    pub full: Expl,
    pub trace: Vec<TraceStep>,
    pub steps: u64,
    pub bound: u64,
    pub conjuncts_generated: usize,
}

impl SwpReport {
    pub fn swp_formula(&self) -> Formula {
        Formula::And(self.swp.iter().map(Expl::to_formula).collect()).simplify_constants()
    }

    pub fn is_true(&self) -> bool {
        self.swp.is_empty()
    }

    pub fn swp_clauses(&self) -> Vec<&Clause> {
        self.swp
            .iter()
            .filter_map(|e| match e {
                Expl::Clause(c) => Some(c),
                _ => None,
            })
            .collect()
    }

    pub fn json(&self) -> ReportJson {
        ReportJson {
            swp: self.swp.iter().map(|e| e.to_string()).collect(),
            dropped: self
                .dropped
                .iter()
                .map(|d| DroppedJson {
                    clause: d.clause.to_string(),
                    reason: match d.reason {
                        DropReason::Tautology => "tautology",
                        DropReason::SubsumedByConstraint(_) => "subsumed-by-constraint",
                        DropReason::SubsumedByConjunct(_) => "subsumed-by-conjunct",
                    }
                    .to_string(),
                    by: match &d.reason {
                        DropReason::Tautology => None,
                        DropReason::SubsumedByConstraint(c) | DropReason::SubsumedByConjunct(c) => Some(c.to_string()),
                    },
                    nested: d.nested,
                })
                .collect(),
            steps: self.steps,
            bound: self.bound,
            trace: self.trace.clone(),
        }
    }
}

/// Serializable view of a report; field names are documented in
/// `docs/trace.md`.
#[derive(Clone, Debug, Serialize)]
pub struct ReportJson {
    pub swp: Vec<String>,
    pub dropped: Vec<DroppedJson>,
    pub steps: u64,
    pub bound: u64,
    pub trace: Vec<TraceStep>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DroppedJson {
    pub clause: String,
    pub reason: String,
    pub by: Option<String>,
    pub nested: bool,
}

impl fmt::Display for SwpReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.swp.is_empty() {
            writeln!(f, "swp: true")?;
        } else {
            writeln!(f, "swp:")?;
            for e in &self.swp {
                writeln!(f, "  {e}")?;
            }
        }
        if !self.dropped.is_empty() {
            writeln!(f, "dropped:")?;
            for d in &self.dropped {
                let nested = if d.nested { " (nested)" } else { "" };
                writeln!(f, "  {}  % {}{nested}", d.clause, d.reason)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
enum Node {
    Clause(Clause),
    And(Vec<Node>),
    Or(Vec<Node>),
    Not(Box<Node>),
    Wp {
        u: Rc<NormUpdate>,
        group: Option<usize>,
        body: Box<Node>,
    },
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, v: &[Node], sep: &str| -> fmt::Result {
            if v.is_empty() {
                return f.write_str(if sep == " & " { "true" } else { "false" });
            }
            for (i, n) in v.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                match n {
                    Node::And(w) | Node::Or(w) if w.len() > 1 => write!(f, "({n})")?,
                    Node::Clause(c) if c.len() > 1 => write!(f, "({n})")?,
                    _ => write!(f, "{n}")?,
                }
            }
            Ok(())
        };
        match self {
            Node::Clause(c) => write!(f, "{c}"),
            Node::And(v) => list(f, v, " & "),
            Node::Or(v) => list(f, v, " | "),
            Node::Not(n) => write!(f, "!({n})"),
            Node::Wp { u, body, .. } => write!(f, "wp({u}, {body})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rule {
    Skip,
    R5,
    R6,
    R7,
    R8,
    R9,
    Clausal,
}

fn rule_at(n: &Node) -> Option<Rule> {
    let Node::Wp { u, body, .. } = n else { return None };
    match u.as_ref() {
        NormUpdate::Skip => Some(Rule::Skip),
        NormUpdate::Seq(..) => Some(Rule::R5),
        NormUpdate::If { .. } => Some(Rule::R6),
        NormUpdate::Foreach { .. } => match body.as_ref() {
            Node::Not(_) => Some(Rule::R7),
            Node::And(_) => Some(Rule::R8),
            Node::Or(_) => Some(Rule::R9),
            Node::Clause(_) => Some(Rule::Clausal),
            Node::Wp { .. } => None,
        },
    }
}

struct Engine {
    opts: SwpOptions,
    steps: u64,
    bound: u64,
    generated: usize,
    trace: Vec<TraceStep>,
    memo: Vec<HashSet<Clause>>,
}

impl Engine {
    fn count(&mut self, n: usize) -> Result<()> {
        self.generated += n;
        if self.generated > self.opts.max_conjuncts {
            return Err(Error::BlowUp {
                limit: self.opts.max_conjuncts,
            });
        }
        Ok(())
    }

    /// Rewrites a redex at the root of `n`.
    fn apply(&mut self, n: Node) -> Result<Node> {
        let rule = rule_at(&n).expect("apply on a non-redex");
        self.steps += 1;
        if self.steps > self.bound {
            return Err(Error::StepBound { bound: self.bound });
        }
        let redex = if self.opts.trace { Some(n.to_string()) } else { None };
        let Node::Wp { u, group, body } = n else { unreachable!() };
        let wrap = |u: &Rc<NormUpdate>, b: Node| Node::Wp {
            u: u.clone(),
            group: None,
            body: Box::new(b),
        };
        let (name, result) = match rule {
            Rule::Skip => ("skip", *body),
            Rule::R5 => {
                let NormUpdate::Seq(a, b) = u.as_ref() else { unreachable!() };
                let inner = wrap(&Rc::new((**b).clone()), *body);
                ("R5", wrap(&Rc::new((**a).clone()), inner))
            }
            Rule::R6 => {
                let NormUpdate::If { cond, then, els } = u.as_ref() else { unreachable!() };
                self.count(2)?;
                let then_u = Rc::new((**then).clone());
                let els_u = Rc::new((**els).clone());
                let b = *body;
                (
                    "R6",
                    Node::Or(vec![
                        Node::And(vec![Node::Clause(cond.clone()), wrap(&then_u, b.clone())]),
                        Node::And(vec![Node::Not(Box::new(Node::Clause(cond.clone()))), wrap(&els_u, b)]),
                    ]),
                )
            }
            Rule::R7 => {
                let Node::Not(inner) = *body else { unreachable!() };
                ("R7", Node::Not(Box::new(wrap(&u, *inner))))
            }
            Rule::R8 => {
                let Node::And(v) = *body else { unreachable!() };
                ("R8", Node::And(v.into_iter().map(|b| wrap(&u, b)).collect()))
            }
            Rule::R9 => {
                let Node::Or(v) = *body else { unreachable!() };
                ("R9", Node::Or(v.into_iter().map(|b| wrap(&u, b)).collect()))
            }
            Rule::Clausal => {
                let Node::Clause(c) = *body else { unreachable!() };
                self.clausal(&u, group, &c)?
            }
        };
        if let Some(redex) = redex {
            self.trace.push(TraceStep {
                step: self.steps,
                rule: name.to_string(),
                redex,
                result: result.to_string(),
            });
        }
        Ok(result)
    }

    /// R1–R4 on `wp(foreach, c)`.
    fn clausal(&mut self, u: &Rc<NormUpdate>, group: Option<usize>, c: &Clause) -> Result<(&'static str, Node)> {
        let NormUpdate::Foreach {
            vars,
            qual,
            action,
            target,
        } = u.as_ref()
        else {
            unreachable!()
        };
        let insert = *action == Action::Insert;
        let head = Atom::new(target.clone(), vars.iter().map(|v| Term::var(v.clone())).collect());
        let mut d = Clause::new(qual.iter().map(Literal::negated));
        d.insert(if insert { Literal::pos(head) } else { Literal::neg(head) });
        let resolvents = binary_resolvents_on(c, &d, target);

        let explicit = expand(c, insert, target, vars, qual);
        self.count(explicit.len())?;
        let explicit_node = if explicit.len() == 1 {
            Node::Clause(explicit.into_iter().next().unwrap())
        } else {
            Node::And(explicit.into_iter().map(Node::Clause).collect())
        };
        let (r_empty, r_more) = if insert { ("R1", "R2") } else { ("R3", "R4") };
        if resolvents.is_empty() {
            return Ok((r_empty, explicit_node));
        }
        let g = match group {
            Some(g) => g,
            None => {
                self.memo.push([c.canonical()].into_iter().collect());
                self.memo.len() - 1
            }
        };
        let resolved_sign = !insert;
        let before = c.count_pred(target, resolved_sign);
        let mut children = vec![explicit_node];
        for cj in resolvents {
            assert!(
                cj.count_pred(target, resolved_sign) < before,
                "resolvent {cj} of {c} does not decrease the occurrences of {target}"
            );
            if !self.memo[g].insert(cj.canonical()) {
                continue;
            }
            self.count(1)?;
            if cj.is_tautology() {
                children.push(Node::Clause(cj));
            } else {
                children.push(Node::Wp {
                    u: u.clone(),
                    group: Some(g),
                    body: Box::new(Node::Clause(cj)),
                });
            }
        }
        Ok((r_more, Node::And(children)))
    }

    /// Leftmost-innermost normalization.
    fn normalize(&mut self, n: Node) -> Result<Node> {
        Ok(match n {
            Node::Clause(_) => n,
            Node::And(v) => Node::And(v.into_iter().map(|x| self.normalize(x)).collect::<Result<_>>()?),
            Node::Or(v) => Node::Or(v.into_iter().map(|x| self.normalize(x)).collect::<Result<_>>()?),
            Node::Not(x) => Node::Not(Box::new(self.normalize(*x)?)),
            Node::Wp { u, group, body } => {
                let body = self.normalize(*body)?;
                let r = self.apply(Node::Wp {
                    u,
                    group,
                    body: Box::new(body),
                })?;
                self.normalize(r)?
            }
        })
    }

    fn normalize_random(&mut self, mut root: Node, seed: u64) -> Result<Node> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let mut paths = Vec::new();
            collect_redexes(&root, &mut Vec::new(), &mut paths);
            if paths.is_empty() {
                return Ok(root);
            }
            let path = &paths[rng.gen_range(0..paths.len())];
            let slot = node_at(&mut root, path);
            let redex = std::mem::replace(slot, Node::And(vec![]));
            *slot = self.apply(redex)?;
        }
    }
}

fn collect_redexes(n: &Node, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    match n {
        Node::Clause(_) => {}
        Node::And(v) | Node::Or(v) => {
            for (i, x) in v.iter().enumerate() {
                path.push(i);
                collect_redexes(x, path, out);
                path.pop();
            }
        }
        Node::Not(x) | Node::Wp { body: x, .. } => {
            if rule_at(n).is_some() {
                out.push(path.clone());
            }
            path.push(0);
            collect_redexes(x, path, out);
            path.pop();
        }
    }
}

fn node_at<'a>(mut n: &'a mut Node, path: &[usize]) -> &'a mut Node {
    for &i in path {
        n = match n {
            Node::And(v) | Node::Or(v) => &mut v[i],
            Node::Not(x) | Node::Wp { body: x, .. } => x,
            Node::Clause(_) => unreachable!("path into a clause"),
        };
    }
    n
}

fn to_expl(n: Node) -> Expl {
    match n {
        Node::Clause(c) => Expl::Clause(c),
        Node::And(v) => Expl::And(v.into_iter().map(to_expl).collect()),
        Node::Or(v) => Expl::Or(v.into_iter().map(to_expl).collect()),
        Node::Not(x) => Expl::Not(Box::new(to_expl(*x))),
        Node::Wp { .. } => unreachable!("wp left after normalization"),
    }
}

/// `c[+r→r∪φ]` (insert) or `c[−r→¬r∪φ]` (delete) in clausal form: every
/// occurrence of the unresolved sign gains one literal of φ, in all
/// combinations.
fn expand(c: &Clause, insert: bool, target: &str, vars: &[String], qual: &[Literal]) -> Vec<Clause> {
    let occ_sign = insert;
    let occs: Vec<&Literal> = c
        .literals()
        .filter(|l| l.positive == occ_sign && l.atom.rel_name() == Some(target))
        .collect();
    if occs.is_empty() {
        return vec![c.clone()];
    }
    if qual.is_empty() {
        // r ∪ true: every occurrence becomes true.
        return vec![];
    }
    let mut acc = vec![c.clone()];
    for o in occs {
        let map: BTreeMap<&str, &Term> = vars.iter().map(String::as_str).zip(&o.atom.args).collect();
        let inst: Vec<Literal> = qual
            .iter()
            .map(|l| {
                l.map_terms(|t| match t {
                    Term::Var(v) => map.get(v.as_str()).map(|x| (*x).clone()).unwrap_or_else(|| t.clone()),
                    Term::Const(_) => t.clone(),
                })
            })
            .collect();
        acc = acc
            .iter()
            .flat_map(|a| {
                inst.iter().map(move |l| {
                    let mut b = a.clone();
                    b.insert(l.clone());
                    b
                })
            })
            .collect();
    }
    let mut out: Vec<Clause> = Vec::new();
    for cl in acc {
        let s = simplify_disequalities(&cl).clause;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

struct Filter<'a> {
    constraint: &'a [Clause],
    dropped: Vec<Dropped>,
}

impl Filter<'_> {
    fn clause(&mut self, c: Clause, positive: bool, nested: bool) -> Expl {
        if c.is_tautology() {
            self.dropped.push(Dropped {
                clause: c,
                reason: DropReason::Tautology,
                nested,
            });
            return Expl::True;
        }
        if positive {
            if let Some(by) = self.constraint.iter().find(|k| theta_subsumes(k, &c)) {
                self.dropped.push(Dropped {
                    clause: c,
                    reason: DropReason::SubsumedByConstraint(by.clone()),
                    nested,
                });
                return Expl::True;
            }
        }
        Expl::Clause(c)
    }

    fn run(&mut self, e: Expl, positive: bool, nested: bool) -> Expl {
        match e {
            Expl::True | Expl::False => e,
            Expl::Clause(c) => self.clause(c, positive, nested),
            Expl::And(v) => Expl::And(v.into_iter().map(|x| self.run(x, positive, nested)).collect()),
            Expl::Or(v) => Expl::Or(v.into_iter().map(|x| self.run(x, positive, true)).collect()),
            Expl::Not(x) => Expl::Not(Box::new(self.run(*x, !positive, true))),
        }
    }
}

/// Simplified weakest precondition of a normalized update for a universal
/// constraint, with the dropped conjuncts and the rewrite trace.
pub fn rewrite_swp(n: &Normalized, c: &Formula, opts: &SwpOptions) -> Result<SwpReport> {
    check_relational(&n.update)?;
    let clauses = c.universal_matrix()?.to_clauses();
    let bound = step_bound(&n.update, &clauses);
    let body = if clauses.len() == 1 {
        Node::Clause(clauses[0].clone())
    } else {
        Node::And(clauses.iter().cloned().map(Node::Clause).collect())
    };
    let root = Node::Wp {
        u: Rc::new(n.update.clone()),
        group: None,
        body: Box::new(body),
    };
    let mut eng = Engine {
        opts: opts.clone(),
        steps: 0,
        bound,
        generated: 0,
        trace: Vec::new(),
        memo: Vec::new(),
    };
    let normal = match opts.strategy {
        Strategy::LeftmostInnermost => eng.normalize(root)?,
        Strategy::Random(seed) => eng.normalize_random(root, seed)?,
    };
    let snaps: BTreeSet<String> = n.snapshots.iter().cloned().collect();
    let full = to_expl(normal).assume_empty(&snaps).simplify();

    let mut filter = Filter {
        constraint: &clauses,
        dropped: Vec::new(),
    };
    let filtered = filter.run(full.clone(), true, false).simplify();
    let mut dropped = filter.dropped;
    let top = match filtered {
        Expl::True => vec![],
        Expl::And(v) => v,
        other => vec![other],
    };
    let mut swp: Vec<Expl> = Vec::new();
    for e in top {
        if let Expl::Clause(c) = &e {
            if swp.iter().any(|k| matches!(k, Expl::Clause(k) if k.is_variant(c))) {
                continue;
            }
            if opts.drop_subsumed_by_emitted {
                if let Some(Expl::Clause(by)) =
                    swp.iter().find(|k| matches!(k, Expl::Clause(k) if theta_subsumes(k, c)))
                {
                    dropped.push(Dropped {
                        clause: c.clone(),
                        reason: DropReason::SubsumedByConjunct(by.clone()),
                        nested: false,
                    });
                    continue;
                }
            }
        }
        swp.push(e);
    }
    Ok(SwpReport {
        swp,
        dropped,
        full,
        trace: eng.trace,
        steps: eng.steps,
        bound,
        conjuncts_generated: eng.generated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{normalize_update, parse_clause, parse_constraint, parse_update, Mode};

    fn run(u: &str, c: &str) -> SwpReport {
        let n = normalize_update(&parse_update(u).unwrap()).unwrap();
        let c = parse_constraint(c, Mode::Relational).unwrap();
        rewrite_swp(
            &n,
            &c,
            &SwpOptions {
                trace: true,
                ..Default::default()
            },
        )
        .unwrap()
    }

    fn has(r: &SwpReport, want: &str) -> bool {
        let w = parse_clause(want).unwrap();
        r.swp_clauses().iter().any(|c| c.is_variant(&w))
    }

    #[test]
    fn tautological_resolvent_gives_true() {
        let r = run(
            "foreach X,Y: (X,Y) = (a,a) do insert p(X,Y)",
            "forall X,Y,Z: p(X,Y) & q(Y,Z) -> p(X,Z) | q(X,Z)",
        );
        assert!(r.is_true(), "{r}");
        assert!(r.dropped.iter().any(|d| d.reason == DropReason::Tautology));
        assert!(r.dropped.iter().any(|d| matches!(d.reason, DropReason::SubsumedByConstraint(_))));
        assert_eq!(r.trace[0].rule, "R2");
    }

    #[test]
    fn delete_then_insert() {
        let r = run("foreach X: s(X) do delete r(X) ; foreach X: p(X) do insert r(X)", "forall X: r(X) -> q(X)");
        assert_eq!(r.swp.len(), 1, "{r}");
        assert!(has(&r, "!p(X) | q(X)"));
    }

    #[test]
    fn three_conjuncts() {
        let r = run("insert p(a,b)", "forall X,Y,Z: !p(X,Y) | !p(X,Z) | q(Y,Z)");
        assert_eq!(r.swp.len(), 3, "{r}");
        assert!(has(&r, "q(b,b)"));
        assert!(has(&r, "!p(a,Z) | q(b,Z)"));
        assert!(has(&r, "!p(a,Y) | q(Y,b)"));
    }

    #[test]
    fn unrelated_insert_is_true() {
        let r = run("insert s(a)", "forall X: !r(X) | q(X)");
        assert!(r.is_true());
    }

    #[test]
    fn random_orders_terminate_within_bound() {
        let n = normalize_update(
            &parse_update("if (forall X: !t(X)) then (insert p(a,b) ; foreach X,Y: s(X) & X = Y do delete q(X,Y)) else skip").unwrap(),
        )
        .unwrap();
        let c = parse_constraint("forall X,Y,Z: !p(X,Y) | !p(X,Z) | q(Y,Z)", Mode::Relational).unwrap();
        for seed in 0..10 {
            let opts = SwpOptions {
                strategy: Strategy::Random(seed),
                ..Default::default()
            };
            let r = rewrite_swp(&n, &c, &opts).unwrap();
            assert!(r.steps <= r.bound);
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let k = 14;
        let xs: Vec<String> = (1..=k).map(|i| format!("X{i}")).collect();
        let c = format!(
            "{} | q({})",
            xs.iter().map(|x| format!("!r({x})")).collect::<Vec<_>>().join(" | "),
            xs.join(",")
        );
        let n = normalize_update(&parse_update("foreach X: p(X) do insert r(X)").unwrap()).unwrap();
        let e = rewrite_swp(&n, &parse_constraint(&c, Mode::Relational).unwrap(), &SwpOptions::default()).unwrap_err();
        assert!(matches!(e, Error::BlowUp { .. }));
        assert_eq!(e.exit_code(), 3);
    }
}
