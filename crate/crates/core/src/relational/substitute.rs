use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::{Atom, Formula, Term};
use crate::syntax::{Action, NormUpdate, Normalized};

/// Which occurrences of the updated predicate are replaced, and by what.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubstMode {
    /// Every `r(s̄)` becomes `r(s̄) | φ(s̄)`.
    AllUnion,
    /// Every `r(s̄)` becomes `r(s̄) & !φ(s̄)`.
    AllDiff,
    /// Positive occurrences become `r(s̄) | φ(s̄)`.
    PosUnion,
    /// Negative occurrences `!r(s̄)` become `!r(s̄) | φ(s̄)`.
    NegUnion,
}

/// Replaces occurrences of `r` in `c`. `phi` is a formula over `vars`
/// (the positional parameters of `r`); its other free variables are read
/// existentially.
pub fn substitute(c: &Formula, r: &str, mode: SubstMode, vars: &[String], phi: &Formula) -> Result<Formula> {
    let extra: Vec<String> = phi.free_vars().into_iter().filter(|v| !vars.contains(v)).collect();
    let closed_phi = Formula::exists(extra, phi.clone());
    go(c, r, mode, vars, &closed_phi, true)
}

fn instance(vars: &[String], phi: &Formula, atom: &Atom) -> Result<Formula> {
    if atom.arity() != vars.len() {
        return Err(Error::Arity {
            pred: atom.rel_name().unwrap_or("=").to_string(),
            expected: vars.len(),
            found: atom.arity(),
        });
    }
    let map: BTreeMap<String, Term> = vars.iter().cloned().zip(atom.args.iter().cloned()).collect();
    Ok(phi.subst_vars(&map))
}

fn go(f: &Formula, r: &str, mode: SubstMode, vars: &[String], phi: &Formula, pos: bool) -> Result<Formula> {
    Ok(match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(a) if a.rel_name() == Some(r) => {
            let orig = Formula::Atom(a.clone());
            let union = |i: Formula| Formula::Or(vec![orig.clone(), i]);
            let diff = |i: Formula| Formula::And(vec![orig.clone(), Formula::not(i)]);
            match (mode, pos) {
                (SubstMode::AllUnion, _) | (SubstMode::PosUnion, true) => union(instance(vars, phi, a)?),
                (SubstMode::AllDiff, _) | (SubstMode::NegUnion, false) => diff(instance(vars, phi, a)?),
                _ => orig,
            }
        }
        Formula::Atom(_) => f.clone(),
        Formula::Not(g) => Formula::not(go(g, r, mode, vars, phi, !pos)?),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| go(g, r, mode, vars, phi, pos)).collect::<Result<_>>()?),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| go(g, r, mode, vars, phi, pos)).collect::<Result<_>>()?),
        Formula::Forall(vs, g) => Formula::Forall(vs.clone(), Box::new(go(g, r, mode, vars, phi, pos)?)),
        Formula::Exists(vs, g) => Formula::Exists(vs.clone(), Box::new(go(g, r, mode, vars, phi, pos)?)),
    })
}

/// Weakest precondition by direct substitution: insertions replace `r`
/// by `r ∪ Φ`, deletions by `r − Φ`, sequences compose right to left and
/// conditionals split on the (pre-state) condition.
pub fn wp_full(u: &NormUpdate, c: &Formula) -> Result<Formula> {
    let closed = Formula::forall(c.free_vars(), c.clone());
    Ok(wp_rec(u, &closed)?.simplify_constants())
}

/// [`wp_full`] for a normalized update; snapshot predicates, empty in
/// every pre-state, are replaced by `false`.
pub fn wp_full_normalized(n: &Normalized, c: &Formula) -> Result<Formula> {
    let f = wp_full(&n.update, c)?;
    let snaps: BTreeSet<String> = n.snapshots.iter().cloned().collect();
    Ok(assume_empty(&f, &snaps).simplify_constants())
}

fn wp_rec(u: &NormUpdate, c: &Formula) -> Result<Formula> {
    Ok(match u {
        NormUpdate::Skip => c.clone(),
        NormUpdate::Foreach {
            vars,
            qual,
            action,
            target,
        } => {
            let phi = Formula::conj(qual);
            let mode = match action {
                Action::Insert => SubstMode::AllUnion,
                Action::Delete => SubstMode::AllDiff,
            };
            substitute(c, target, mode, vars, &phi)?
        }
        NormUpdate::Seq(a, b) => wp_rec(a, &wp_rec(b, c)?)?,
        NormUpdate::If { cond, then, els } => {
            let cf = Formula::closed_clause(cond);
            Formula::Or(vec![
                Formula::And(vec![cf.clone(), wp_rec(then, c)?]),
                Formula::And(vec![Formula::not(cf), wp_rec(els, c)?]),
            ])
        }
    })
}

/// Replaces atoms over `preds` by `false`.
pub fn assume_empty(f: &Formula, preds: &BTreeSet<String>) -> Formula {
    match f {
        Formula::Atom(a) if a.rel_name().is_some_and(|n| preds.contains(n)) => Formula::False,
        Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
        Formula::Not(g) => Formula::not(assume_empty(g, preds)),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| assume_empty(g, preds)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| assume_empty(g, preds)).collect()),
        Formula::Forall(vs, g) => Formula::Forall(vs.clone(), Box::new(assume_empty(g, preds))),
        Formula::Exists(vs, g) => Formula::Exists(vs.clone(), Box::new(assume_empty(g, preds))),
    }
}

/// Relational mode requires every qualification variable to be a foreach
/// variable.
pub(crate) fn check_relational(u: &NormUpdate) -> Result<()> {
    match u {
        NormUpdate::Skip => Ok(()),
        NormUpdate::Seq(a, b) => {
            check_relational(a)?;
            check_relational(b)
        }
        NormUpdate::If { then, els, .. } => {
            check_relational(then)?;
            check_relational(els)
        }
        NormUpdate::Foreach { vars, qual, target, .. } => {
            for l in qual {
                if let Some(v) = l.vars().find(|v| !vars.iter().any(|w| w == v)) {
                    return Err(Error::Validation(format!(
                        "qualification variable `{v}` of the update on `{target}` is not a foreach variable"
                    )));
                }
            }
            Ok(())
        }
    }
}
