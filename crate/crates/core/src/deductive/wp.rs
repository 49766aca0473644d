use std::collections::{BTreeMap, BTreeSet};

use super::hypotheses::{check_hypotheses, conjunct_literals};
use super::names::NameGen;
use super::prime::prime_with;
use super::rules::inline_equalities;
use crate::datalog::{dependents, stratify, Program, Rule};
use crate::error::{Error, Result};
use crate::logic::{Atom, Formula, Literal, Term};
use crate::syntax::{Action, Foreach, Update};

/// A weakest precondition for a deductive database: `formula` evaluated
/// over the intensional predicates defined by `program`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeductiveWp {
    pub formula: Formula,
    pub program: Program,
    /// Rules beyond the input program, in generation order.
    pub added: Vec<Rule>,
}

#[derive(Clone, Debug)]
struct Ctx {
    /// User rules in force.
    base: Program,
    /// Generated rules.
    extra: Vec<Rule>,
}

impl Ctx {
    fn full(&self) -> Program {
        let mut p = self.base.clone();
        p.extend(self.extra.iter().cloned());
        p
    }
}

/// Program in force after `u`: deleting from an intensional predicate
/// materializes it and drops its rules.
fn post(u: &Update, p: &Program) -> Option<Program> {
    match u {
        Update::Skip => Some(p.clone()),
        Update::Foreach(fe) => {
            if fe.action == Action::Delete && p.is_idb(&fe.target) {
                Some(Program::new(
                    p.rules.iter().filter(|r| r.head_pred() != fe.target).cloned().collect(),
                ))
            } else {
                Some(p.clone())
            }
        }
        Update::Seq(a, b) => post(b, &post(a, p)?),
        Update::If { then, els, .. } => {
            let t = post(then, p)?;
            let e = match els {
                Some(e) => post(e, p)?,
                None => p.clone(),
            };
            (t == e).then_some(t)
        }
    }
}

fn right_assoc(u: &Update) -> Update {
    match u {
        Update::Seq(a, b) => match a.as_ref() {
            Update::Seq(x, y) => right_assoc(&Update::Seq(x.clone(), Box::new(Update::Seq(y.clone(), b.clone())))),
            _ => Update::Seq(Box::new(right_assoc(a)), Box::new(right_assoc(b))),
        },
        Update::If { cond, then, els } => Update::If {
            cond: cond.clone(),
            then: Box::new(right_assoc(then)),
            els: els.as_ref().map(|e| Box::new(right_assoc(e))),
        },
        _ => u.clone(),
    }
}

/// Weakest precondition of `u` for `c` over program `p`: insertions and
/// deletions prime every predicate depending on the target, sequences
/// compose and conditionals split on the pre-state condition.
pub fn wp_deductive(u: &Update, c: &Formula, p: &Program) -> Result<DeductiveWp> {
    let report = check_hypotheses(p, u, c);
    if !report.holds() {
        let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::Hypothesis(msgs.join("; ")));
    }
    let mut used: BTreeSet<String> = p.predicates();
    used.extend(c.predicates().into_keys());
    used.extend(u.predicates().into_keys());
    let mut names = NameGen::new(used);
    let u = right_assoc(u);
    let post_state = Ctx {
        base: post(&u, p).unwrap_or_else(|| p.clone()),
        extra: Vec::new(),
    };
    let closed = Formula::forall(c.free_vars(), c.clone());
    let (formula, ctx) = go(&u, closed, post_state, p, &mut names)?;
    let program = ctx.full();
    stratify(&program)?;
    Ok(DeductiveWp {
        formula: formula.simplify_constants(),
        added: program.rules.iter().filter(|r| !p.rules.contains(r)).cloned().collect(),
        program,
    })
}

fn go(u: &Update, f: Formula, q: Ctx, pre: &Program, names: &mut NameGen) -> Result<(Formula, Ctx)> {
    match u {
        Update::Skip => Ok((f, q)),
        Update::Foreach(fe) => foreach(fe, f, q, pre, names),
        Update::Seq(a, b) => {
            if let Update::If { cond, then, els } = a.as_ref() {
                if post(a, pre).is_none() {
                    let els = els.clone().unwrap_or_else(|| Box::new(Update::Skip));
                    let split = Update::If {
                        cond: cond.clone(),
                        then: Box::new(Update::Seq(then.clone(), b.clone())),
                        els: Some(Box::new(Update::Seq(els, b.clone()))),
                    };
                    return go(&split, f, q, pre, names);
                }
            }
            let mid = post(a, pre).expect("branches agree after splitting");
            let (fb, qb) = go(b, f, q, &mid, names)?;
            go(a, fb, qb, pre, names)
        }
        Update::If { cond, then, els } => {
            let skip = Update::Skip;
            let els = els.as_deref().unwrap_or(&skip);
            let branch_ctx = |branch: &Update| -> Result<Ctx> {
                let base = if q.extra.is_empty() {
                    post(branch, pre).unwrap_or_else(|| q.base.clone())
                } else {
                    q.base.clone()
                };
                Ok(Ctx {
                    base,
                    extra: q.extra.clone(),
                })
            };
            let (ft, qt) = go(then, f.clone(), branch_ctx(then)?, pre, names)?;
            let (fe, qe) = go(els, f, branch_ctx(els)?, pre, names)?;
            let cond = Formula::forall(cond.free_vars(), cond.clone());
            let mut extra = qt.extra;
            for r in qe.extra {
                if !extra.contains(&r) {
                    extra.push(r);
                }
            }
            Ok((
                Formula::Or(vec![
                    Formula::And(vec![cond.clone(), ft]),
                    Formula::And(vec![Formula::not(cond), fe]),
                ]),
                Ctx {
                    base: pre.clone(),
                    extra,
                },
            ))
        }
    }
}

fn foreach(fe: &Foreach, f: Formula, q: Ctx, pre: &Program, names: &mut NameGen) -> Result<(Formula, Ctx)> {
    let full = q.full();
    let r = fe.target.as_str();
    let lits: Vec<Literal> = conjunct_literals(&fe.qual)
        .expect("checked by the hypotheses")
        .iter()
        .map(|g| match g {
            Formula::Atom(a) => Literal::pos(a.clone()),
            Formula::Not(a) => match a.as_ref() {
                Formula::Atom(a) => Literal::neg(a.clone()),
                _ => unreachable!(),
            },
            _ => unreachable!(),
        })
        .collect();
    let deps = dependents(&full, r);
    if !f.predicates().keys().any(|p| deps.contains(p)) {
        return Ok((f, Ctx { base: pre.clone(), extra: q.extra }));
    }
    let primed = prime_with(&full, r, names);
    let r_prime = primed.primed_of[r].clone();
    let xs: Vec<Term> = fe.vars.iter().map(|v| Term::var(v.clone())).collect();
    let head = Atom::new(r_prime, xs.clone());
    let old = Literal::pos(Atom::new(r, xs.clone()));
    let mut new_rules = primed.added.clone();
    match fe.action {
        Action::Insert => {
            new_rules.push(Rule::new(head.clone(), vec![old]));
            if let Some(rule) = inline_equalities(&Rule::new(head, lits)) {
                new_rules.push(rule);
            }
        }
        Action::Delete => {
            let t = names.deletion();
            let t_atom = Atom::new(t, xs);
            new_rules.push(Rule::new(head, vec![old, Literal::neg(t_atom.clone())]));
            if let Some(rule) = inline_equalities(&Rule::new(t_atom, lits)) {
                new_rules.push(rule);
            }
        }
    }
    for rule in &new_rules {
        if !rule.is_safe() {
            return Err(Error::Validation(format!("generated rule `{rule}` is unsafe")));
        }
    }
    let map: BTreeMap<String, String> = primed.primed_of.clone();
    let formula = f.rename_preds(&map);
    let mut extra = q.extra;
    // The pre-state defines the target through its own rules again.
    let mut base = pre.clone();
    base.extend(full.rules.iter().filter(|r| !extra.contains(r)).cloned());
    for r in new_rules {
        if !extra.contains(&r) {
            extra.push(r);
        }
    }
    Ok((formula, Ctx { base, extra }))
}
