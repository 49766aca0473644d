//! A structural upper bound on the number of rewrite steps.
//!
//! Clauses are abstracted to signatures counting literal occurrences per
//! (predicate, sign). A foreach on `r` applied to a clause with `n`
//! occurrences of `r` of the resolved sign yields at most `2^n` distinct
//! resolvents (one per subset of resolved occurrences), each costing one
//! R1–R4 step; the `p` occurrences of the other sign expand into at most
//! `(m+1)^p` clauses for an `m`-literal qualification. Connective nodes
//! cost one R7–R9 step per update passing through them. A conditional may
//! duplicate the unreduced continuation of a sequence, which the
//! multiplier `mult` accounts for.

use std::collections::BTreeMap;

use crate::logic::{Clause, Literal};
use crate::syntax::{Action, NormUpdate};

type Sig = BTreeMap<(String, bool), f64>;

#[derive(Clone, Debug)]
struct Abs {
    groups: Vec<(Sig, f64)>,
    conn: f64,
}

fn sig_of(c: &Clause) -> Sig {
    let mut s = Sig::new();
    for l in c.literals() {
        if let Some(n) = l.atom.rel_name() {
            *s.entry((n.to_string(), l.positive)).or_default() += 1.0;
        }
    }
    s
}

fn add_lits(s: &mut Sig, lits: &[Literal], times: f64, flip: bool) {
    for l in lits {
        if let Some(n) = l.atom.rel_name() {
            *s.entry((n.to_string(), l.positive != flip)).or_default() += times;
        }
    }
}

fn mult(u: &NormUpdate) -> f64 {
    match u {
        NormUpdate::Foreach { .. } | NormUpdate::Skip => 1.0,
        NormUpdate::Seq(a, b) => mult(a) * mult(b),
        NormUpdate::If { then, els, .. } => mult(then) + mult(els),
    }
}

fn cost(u: &NormUpdate, t: &Abs) -> (f64, Abs) {
    match u {
        NormUpdate::Skip => (1.0, t.clone()),
        NormUpdate::Seq(a, b) => {
            let (sb, tb) = cost(b, t);
            let (sa, ta) = cost(a, &tb);
            (1.0 + mult(a) * sb + sa, ta)
        }
        NormUpdate::If { cond, then, els } => {
            let (st, tt) = cost(then, t);
            let (se, te) = cost(els, t);
            let mut groups = tt.groups;
            groups.extend(te.groups);
            groups.push((sig_of(cond), 2.0));
            (
                1.0 + st + se,
                Abs {
                    groups,
                    conn: tt.conn + te.conn + 5.0,
                },
            )
        }
        NormUpdate::Foreach {
            qual, action, target, ..
        } => {
            let resolved_sign = *action == Action::Delete;
            let m = qual.len() as f64;
            let mut steps = t.conn;
            let mut conn = t.conn;
            let mut groups = Vec::with_capacity(t.groups.len());
            for (sig, cnt) in &t.groups {
                let n = sig.get(&(target.clone(), resolved_sign)).copied().unwrap_or(0.0);
                let p = sig.get(&(target.clone(), !resolved_sign)).copied().unwrap_or(0.0);
                let k = 2f64.powf(n);
                steps += cnt * k;
                conn += 2.0 * cnt * k;
                let mut out = sig.clone();
                add_lits(&mut out, qual, n, true);
                add_lits(&mut out, qual, p, false);
                groups.push((out, cnt * k * (m + 1.0).powf(p)));
            }
            (steps, Abs { groups, conn })
        }
    }
}

/// Upper bound on rewrite steps for `wp(u, c1 & … & cn)`.
pub fn step_bound(u: &NormUpdate, clauses: &[Clause]) -> u64 {
    let t = Abs {
        groups: clauses.iter().map(|c| (sig_of(c), 1.0)).collect(),
        conn: if clauses.len() == 1 { 0.0 } else { 1.0 },
    };
    let (s, _) = cost(u, &t);
    if s.is_finite() && s < u64::MAX as f64 {
        s.ceil() as u64
    } else {
        u64::MAX
    }
}
