use std::collections::{BTreeMap, BTreeSet};

use super::eval::eval_env;
use crate::db::{Database, Tuple};
use crate::error::Result;
use crate::logic::Formula;
use crate::syntax::{Action, Foreach, NormUpdate, Update};

/// Executes an update. Qualifications and conditions are evaluated on the
/// state before the instruction they belong to; qualification variables
/// other than the foreach variables are existential. Variables range over
/// the active domain of that state plus the constants of the update.
pub fn exec_update(u: &Update, b: &Database) -> Result<Database> {
    let consts = u.constants();
    let mut out = b.clone();
    run(u, &mut out, &consts)?;
    Ok(out)
}

/// Executes a normalized update, snapshot relations included.
pub fn exec_norm(u: &NormUpdate, b: &Database) -> Result<Database> {
    exec_update(&u.to_update(), b)
}

fn domain(b: &Database, consts: &BTreeSet<String>) -> BTreeSet<String> {
    let mut d = b.active_domain();
    d.extend(consts.iter().cloned());
    d
}

fn selected(fe: &Foreach, b: &Database, consts: &BTreeSet<String>) -> Vec<Tuple> {
    let extra: Vec<String> = fe.qual.free_vars().into_iter().filter(|v| !fe.vars.contains(v)).collect();
    let phi = Formula::exists(extra, fe.qual.clone());
    let dom = domain(b, consts);
    let dom: Vec<&str> = dom.iter().map(String::as_str).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; fe.vars.len()];
    if fe.vars.is_empty() || !dom.is_empty() {
        loop {
            let mut env: BTreeMap<String, &str> = fe.vars.iter().cloned().zip(idx.iter().map(|&i| dom[i])).collect();
            if eval_env(&phi, b, &dom, &mut env) {
                out.push(idx.iter().map(|&i| dom[i].to_string()).collect());
            }
            // Odometer increment over dom^k.
            let mut k = idx.len();
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < dom.len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
    out
}

fn run(u: &Update, b: &mut Database, consts: &BTreeSet<String>) -> Result<()> {
    match u {
        Update::Skip => {}
        Update::Foreach(fe) => {
            let tuples = selected(fe, b, consts);
            b.declare(&fe.target, fe.vars.len())?;
            for t in tuples {
                match fe.action {
                    Action::Insert => {
                        b.insert(&fe.target, t)?;
                    }
                    Action::Delete => {
                        b.remove(&fe.target, &t);
                    }
                }
            }
        }
        Update::Seq(x, y) => {
            run(x, b, consts)?;
            run(y, b, consts)?;
        }
        Update::If { cond, then, els } => {
            let closed = Formula::forall(cond.free_vars(), cond.clone());
            let dom = domain(b, consts);
            let dom: Vec<&str> = dom.iter().map(String::as_str).collect();
            if eval_env(&closed, b, &dom, &mut BTreeMap::new()) {
                run(then, b, consts)?;
            } else if let Some(e) = els {
                run(e, b, consts)?;
            }
        }
    }
    Ok(())
}
