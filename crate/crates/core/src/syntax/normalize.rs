use std::collections::{BTreeMap, BTreeSet};

use super::update::{Action, Foreach, NormUpdate, Update};
use crate::error::{Error, Result};
use crate::logic::{Formula, Literal};

/// A normalized update together with the snapshot predicates it
/// introduced. Snapshots are empty before and after the update.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalized {
    pub update: NormUpdate,
    pub snapshots: Vec<String>,
}

/// Brings an update into the restricted form used by the rewriting
/// system: conjunctive qualifications not mentioning their target, and
/// single-clause conditions.
pub fn normalize_update(u: &Update) -> Result<Normalized> {
    normalize_update_avoiding(u, &BTreeSet::new())
}

/// As [`normalize_update`], never choosing a snapshot name in `avoid`.
pub fn normalize_update_avoiding(u: &Update, avoid: &BTreeSet<String>) -> Result<Normalized> {
    let mut used: BTreeSet<String> = avoid.clone();
    used.extend(u.predicates().into_keys());
    let mut snapshots = Vec::new();
    let update = norm(u, &mut used, &mut snapshots)?;
    Ok(Normalized { update, snapshots })
}

fn snapshot_name(r: &str, used: &mut BTreeSet<String>) -> String {
    let base = format!("{r}_hat");
    if used.insert(base.clone()) {
        return base;
    }
    let mut i = 2;
    loop {
        let n = format!("{r}_hat_{i}");
        if used.insert(n.clone()) {
            return n;
        }
        i += 1;
    }
}

fn norm(u: &Update, used: &mut BTreeSet<String>, snaps: &mut Vec<String>) -> Result<NormUpdate> {
    Ok(match u {
        Update::Skip => NormUpdate::Skip,
        Update::Seq(a, b) => NormUpdate::seq(norm(a, used, snaps)?, norm(b, used, snaps)?),
        Update::If { cond, then, els } => {
            let matrix = cond.universal_matrix()?;
            let clauses = matrix.to_clauses();
            let then = norm(then, used, snaps)?;
            let els = match els {
                Some(e) => norm(e, used, snaps)?,
                None => NormUpdate::Skip,
            };
            // if c1 & … & cn then S else T  ==  if c1 then (… if cn then S else T …) else T
            let mut acc = then;
            for c in clauses.into_iter().rev() {
                acc = NormUpdate::If {
                    cond: c,
                    then: Box::new(acc),
                    els: Box::new(els.clone()),
                };
            }
            acc
        }
        Update::Foreach(fe) => norm_foreach(fe, used, snaps)?,
    })
}

fn norm_foreach(fe: &Foreach, used: &mut BTreeSet<String>, snaps: &mut Vec<String>) -> Result<NormUpdate> {
    if !fe.qual.is_quantifier_free() {
        return Err(Error::Unsupported(format!(
            "quantified qualification in `{fe}`; qualifications must be quantifier-free \
             (extra variables are read existentially)"
        )));
    }
    let mut qual = fe.qual.clone();
    let mut prefix = Vec::new();
    let mut suffix = Vec::new();
    if qual.mentions(&fe.target) {
        let hat = snapshot_name(&fe.target, used);
        snaps.push(hat.clone());
        let ren: BTreeMap<String, String> = [(fe.target.clone(), hat.clone())].into();
        qual = qual.rename_preds(&ren);
        let copy = Foreach {
            vars: fe.vars.clone(),
            qual: Formula::Atom(fe.target_atom()),
            action: Action::Insert,
            target: hat.clone(),
        };
        let clear = Foreach {
            vars: fe.vars.clone(),
            qual: Formula::True,
            action: Action::Delete,
            target: hat,
        };
        prefix.push(plain(&copy));
        suffix.push(plain(&clear));
    }
    let mut items = prefix;
    for conj in qual.to_dnf() {
        items.push(NormUpdate::Foreach {
            vars: fe.vars.clone(),
            qual: conj,
            action: fe.action,
            target: fe.target.clone(),
        });
    }
    items.extend(suffix);
    Ok(NormUpdate::seq_all(items))
}

fn plain(fe: &Foreach) -> NormUpdate {
    let qual: Vec<Literal> = match &fe.qual {
        Formula::True => vec![],
        f => f.to_dnf().pop().expect("single conjunction"),
    };
    NormUpdate::Foreach {
        vars: fe.vars.clone(),
        qual,
        action: fe.action,
        target: fe.target.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_update;

    fn n(s: &str) -> Normalized {
        normalize_update(&parse_update(s).unwrap()).unwrap()
    }

    #[test]
    fn disjunctive_qualification_splits() {
        let r = n("foreach X: p(X) | q(X) do insert r(X)");
        assert_eq!(r.update.to_string(), "foreach X: p(X) do insert r(X) ; foreach X: q(X) do insert r(X)");
        assert!(r.update.is_normal());
    }

    #[test]
    fn normal_update_unchanged() {
        let s = "foreach X: s(X) do delete r(X) ; foreach Y: p(Y) do insert r(Y)";
        assert_eq!(n(s).update.to_update(), parse_update(s).unwrap());
    }

    #[test]
    fn self_reference_uses_snapshot() {
        let r = n("foreach X: r(X) & s(X) do delete r(X)");
        assert_eq!(r.snapshots, vec!["r_hat"]);
        assert_eq!(
            r.update.to_string(),
            "foreach X: r(X) do insert r_hat(X) ; (foreach X: r_hat(X) & s(X) do delete r(X) ; \
             foreach X: true do delete r_hat(X))"
        );
        assert!(r.update.is_normal());
    }

    #[test]
    fn conditions_become_nested_ifs() {
        let r = n("if (forall X: p(X) & q(X)) then insert s(a)");
        let NormUpdate::If { then, els, .. } = &r.update else { panic!() };
        assert!(matches!(**then, NormUpdate::If { .. }));
        assert_eq!(**els, NormUpdate::Skip);
    }

    #[test]
    fn true_condition_keeps_then_branch() {
        let r = n("if true then insert s(a)");
        assert!(matches!(r.update, NormUpdate::Foreach { .. }));
    }
}
