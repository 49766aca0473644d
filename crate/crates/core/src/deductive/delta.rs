use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::hypotheses::{check_hypotheses, conjunct_literals};
use super::names::NameGen;
use super::rules::{inline_equalities, is_variant, rename_apart, resolve_with_fact};
use crate::datalog::{dependents, Program, Rule};
use crate::error::{Error, Result};
use crate::logic::{mgu, Atom, Formula, Literal, Term};
use crate::syntax::{Action, Foreach, Update};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaVerdict {
    /// No new fact of the constraint predicate can arise.
    Safe,
    /// The constraint holds after the update iff `wp` holds before it.
    Check,
}

/// A generated rule and the construction step that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaRule {
    pub rule: Rule,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaResult {
    pub verdict: DeltaVerdict,
    /// `!exists X..: delta_t(X..)`, or `true` when safe.
    pub wp: Formula,
    /// The input program together with the delta rules.
    pub program: Program,
    pub rules: Vec<DeltaRule>,
    /// Rules removed by the pruning pass.
    pub pruned: Vec<DeltaRule>,
}

impl DeltaResult {
    fn safe(p: &Program) -> Self {
        DeltaResult {
            verdict: DeltaVerdict::Safe,
            wp: Formula::True,
            program: p.clone(),
            rules: vec![],
            pruned: vec![],
        }
    }
}

impl fmt::Display for DeltaResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let input = self.program.rules.len() - self.rules.len();
        for r in &self.program.rules[..input] {
            writeln!(f, "{r}")?;
        }
        for d in &self.rules {
            writeln!(f, "{}  % {}", d.rule, d.provenance)?;
        }
        for d in &self.pruned {
            writeln!(f, "% pruned: {}  % {}", d.rule, d.provenance)?;
        }
        if self.verdict == DeltaVerdict::Safe {
            writeln!(f, "% the update is safe")?;
        }
        writeln!(f, "wp: {}", self.wp)
    }
}

#[derive(Clone, Debug)]
pub struct DeltaOptions {
    /// Drop re-entrant step-3 resolvents for single insertions and rules
    /// using underivable delta predicates.
    pub prune: bool,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions { prune: true }
    }
}

/// The atom `t(s̄)` of a constraint `!exists X..: t(s̄)`.
fn constraint_atom(c: &Formula) -> Result<Atom> {
    let shape = || Error::Validation(format!("constraint `{c}` is not of the form !exists X..: t(X..)"));
    let clauses = c.universal_matrix()?.to_clauses();
    let [clause] = clauses.as_slice() else { return Err(shape()) };
    let lits: Vec<&Literal> = clause.literals().collect();
    match lits.as_slice() {
        [l] if !l.positive && !l.atom.is_eq() => Ok(l.atom.clone()),
        _ => Err(shape()),
    }
}

fn delta_wp(atom: &Atom, delta: &str) -> Formula {
    let mut vars: Vec<String> = Vec::new();
    for v in atom.vars() {
        if !vars.iter().any(|w| w == v) {
            vars.push(v.to_string());
        }
    }
    Formula::not(Formula::exists(vars, Formula::Atom(atom.renamed_pred(delta))))
}

fn require_linear(p: &Program) -> Result<()> {
    let idb = p.idb();
    for r in &p.rules {
        let n = r.body_preds().filter(|(q, _)| idb.contains(*q)).count();
        if n > 1 {
            return Err(Error::Unsupported(format!(
                "delta construction needs a linear program; rule `{r}` has {n} intensional body atoms"
            )));
        }
    }
    Ok(())
}

fn require_positive(p: &Program, deps: &BTreeSet<String>) -> Result<()> {
    for r in &p.rules {
        if let Some((q, _)) = r.body_preds().find(|(q, pos)| !pos && deps.contains(*q)) {
            return Err(Error::Unsupported(format!(
                "delta construction needs positive dependencies; rule `{r}` negates `{q}`"
            )));
        }
    }
    Ok(())
}

fn push_new(out: &mut Vec<DeltaRule>, rule: Rule, provenance: String) -> bool {
    if out.iter().any(|d| is_variant(&d.rule, &rule)) {
        return false;
    }
    out.push(DeltaRule { rule, provenance });
    true
}

/// Removes rules using a delta predicate that no remaining rule defines.
fn prune_underivable(rules: &mut Vec<DeltaRule>, pruned: &mut Vec<DeltaRule>, deltas: &BTreeSet<String>) {
    loop {
        let defined: BTreeSet<&str> = rules.iter().map(|d| d.rule.head_pred()).collect();
        let dead = rules.iter().position(|d| {
            d.rule
                .body
                .iter()
                .filter_map(|l| l.atom.rel_name())
                .any(|q| deltas.contains(q) && !defined.contains(q))
        });
        match dead {
            Some(i) => {
                let mut d = rules.remove(i);
                d.provenance.push_str("; body predicate underivable");
                pruned.push(d);
            }
            None => return,
        }
    }
}

/// A step-3 resolvent `delta_q(d̄, Ȳ) :- delta_q(b̄, Ȳ)` is redundant when a
/// derivation that uses the inserted fact several times can be cut back to
/// its first use: every rule of `q` passes `Ȳ` through unchanged, reads no
/// other predicate depending on `r`, and every step-2 rule for `delta_q`
/// enters at the same node `d̄`.
fn redundant_reentry(
    p: &Program,
    r: &str,
    res: &Rule,
    delta_of: &BTreeMap<String, String>,
    rules: &[DeltaRule],
) -> bool {
    let [lit] = res.body.as_slice() else { return false };
    if !lit.positive || lit.atom.pred != res.head.pred {
        return false;
    }
    let dq = res.head_pred();
    let Some(q) = delta_of.iter().find(|(_, d)| d.as_str() == dq).map(|(q, _)| q.as_str()) else {
        return false;
    };
    let mut inv = Vec::new();
    for (i, (h, b)) in res.head.args.iter().zip(&lit.atom.args).enumerate() {
        match (h, b) {
            (Term::Var(x), Term::Var(y)) if x == y => inv.push(i),
            (Term::Const(_), Term::Const(_)) => {}
            _ => return false,
        }
    }
    let r_deps = dependents(p, r);
    for rule in p.defining(q) {
        let mut rec = None;
        for l in &rule.body {
            match l.atom.rel_name() {
                Some(n) if n == q => rec = Some(&l.atom),
                Some(n) if p.is_idb(n) && r_deps.contains(n) => return false,
                _ => {}
            }
        }
        if let Some(a) = rec {
            let passes = inv
                .iter()
                .all(|&i| matches!((&rule.head.args[i], &a.args[i]), (Term::Var(x), Term::Var(y)) if x == y));
            if !passes {
                return false;
            }
        }
    }
    let node = |a: &Atom| -> Vec<Term> {
        a.args.iter().enumerate().filter(|(i, _)| !inv.contains(i)).map(|(_, t)| t.clone()).collect()
    };
    let target = node(&res.head);
    rules
        .iter()
        .filter(|d| d.provenance.starts_with("step2") && d.rule.head_pred() == dq)
        .all(|d| node(&d.rule.head) == target)
}

/// Delta program for inserting ground facts into an extensional predicate
/// of a linear program, for a constraint `!exists X..: t(X..)`: seeds a
/// delta rule for each rule whose head depends on the target (step 1),
/// resolves them with the inserted facts until exhaustion (step 2), and
/// repeats the resolution on the recursive seeds with delta predicates in
/// their bodies (step 3).
pub fn delta_saturation(p: &Program, inserts: &[Atom], c: &Formula, opts: &DeltaOptions) -> Result<DeltaResult> {
    let Some(first) = inserts.first() else {
        return Err(Error::Validation("no inserted facts".into()));
    };
    let r = first.rel_name().ok_or_else(|| Error::Validation("cannot insert an equality".into()))?;
    for a in inserts {
        if a.rel_name() != Some(r) || a.arity() != first.arity() || !a.is_ground() {
            return Err(Error::Validation(format!(
                "inserted facts must be ground atoms of one predicate; got `{a}`"
            )));
        }
    }
    if p.is_idb(r) {
        return Err(Error::Validation(format!("delta saturation inserts into an extensional predicate; `{r}` has rules")));
    }
    let t = constraint_atom(c)?;
    require_linear(p)?;
    let deps = dependents(p, r);
    require_positive(p, &deps)?;
    let t_name = t.rel_name().unwrap_or_default().to_string();

    let mut names = NameGen::new(p.predicates().into_iter().chain(c.predicates().into_keys()));
    let idb = p.idb();
    let dep_idb: Vec<String> = deps.iter().filter(|q| idb.contains(*q)).cloned().collect();
    let delta_of: BTreeMap<String, String> = dep_idb.iter().map(|q| (q.clone(), names.delta(q))).collect();

    // Step 1.
    let pi: Vec<(usize, Rule)> = p
        .rules
        .iter()
        .enumerate()
        .filter(|(_, rule)| delta_of.contains_key(rule.head_pred()))
        .map(|(i, rule)| {
            let head = rule.head.renamed_pred(delta_of[rule.head_pred()].clone());
            (i + 1, Rule::new(head, rule.body.clone()))
        })
        .collect();
    if pi.is_empty() || !delta_of.contains_key(&t_name) {
        return Ok(DeltaResult::safe(p));
    }

    let mut rules: Vec<DeltaRule> = Vec::new();
    let mut pruned: Vec<DeltaRule> = Vec::new();
    let saturate = |seed: Vec<(usize, Rule)>,
                    step: &str,
                    rules: &mut Vec<DeltaRule>,
                    pruned: &mut Vec<DeltaRule>,
                    prune_reentrant: bool| {
        let mut frontier = seed;
        let mut round = 1;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for (origin, rule) in &frontier {
                for fact in inserts {
                    for res in resolve_with_fact(rule, fact) {
                        let round_note = if round > 1 { format!(" (round {round})") } else { String::new() };
                        let prov = format!("{step} resolvent of rule {origin} with {fact}{round_note}");
                        if prune_reentrant && redundant_reentry(p, r, &res, &delta_of, rules) {
                            let note = format!("{prov}; re-enters {} through the inserted fact", res.head.rel_name().unwrap_or_default());
                            push_new(pruned, res, note);
                            continue;
                        }
                        if push_new(rules, res.clone(), prov) {
                            next.push((*origin, res));
                        }
                    }
                }
            }
            frontier = next;
            round += 1;
        }
    };

    // Step 2.
    saturate(pi.clone(), "step2", &mut rules, &mut pruned, false);
    if rules.is_empty() {
        return Ok(DeltaResult::safe(p));
    }

    // Step 3.
    let sigma: Vec<(usize, Rule)> = pi
        .iter()
        .filter(|(_, rule)| rule.body.iter().any(|l| l.atom.rel_name().is_some_and(|q| delta_of.contains_key(q))))
        .cloned()
        .collect();
    if !sigma.is_empty() {
        let substituted: Vec<(usize, Rule)> = sigma
            .iter()
            .map(|(i, rule)| {
                let body = rule
                    .body
                    .iter()
                    .map(|l| match l.atom.rel_name().and_then(|q| delta_of.get(q)) {
                        Some(d) => Literal {
                            atom: l.atom.renamed_pred(d.clone()),
                            positive: l.positive,
                        },
                        None => l.clone(),
                    })
                    .collect();
                (*i, Rule::new(rule.head.clone(), body))
            })
            .collect();
        let mut seed = Vec::new();
        for (i, rule) in substituted {
            if push_new(&mut rules, rule.clone(), format!("step3 delta substitution in rule {i}")) {
                seed.push((i, rule));
            }
        }
        saturate(seed, "step3", &mut rules, &mut pruned, opts.prune && inserts.len() == 1);
    }
    if opts.prune {
        let deltas: BTreeSet<String> = delta_of.values().cloned().collect();
        prune_underivable(&mut rules, &mut pruned, &deltas);
    }
    let mut program = p.clone();
    program.rules.extend(rules.iter().map(|d| d.rule.clone()));
    Ok(DeltaResult {
        verdict: DeltaVerdict::Check,
        wp: delta_wp(&t, &delta_of[&t_name]),
        program,
        rules,
        pruned,
    })
}

/// Delta program for `foreach x̄: Φ do insert r(x̄)`: the potentially new
/// `r` facts are seeded from Φ, unfolding one level of the rules of Φ's
/// predicate when Φ is a single intensional atom over x̄ (each recursive
/// occurrence read both as the old `r` and as `delta_r`), and propagated
/// to every predicate depending on `r`.
pub fn delta_qualified_insert(p: &Program, fe: &Foreach, c: &Formula) -> Result<DeltaResult> {
    if fe.action != Action::Insert {
        return Err(Error::Unsupported("delta programs cover insertions only".into()));
    }
    let report = check_hypotheses(p, &Update::Foreach(fe.clone()), c);
    if !report.holds() {
        let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::Hypothesis(msgs.join("; ")));
    }
    let lits: Vec<Literal> = conjunct_literals(&fe.qual)
        .expect("checked by the hypotheses")
        .into_iter()
        .map(|g| match g {
            Formula::Atom(a) => Literal::pos(a),
            Formula::Not(a) => match *a {
                Formula::Atom(a) => Literal::neg(a),
                _ => unreachable!(),
            },
            _ => unreachable!(),
        })
        .collect();
    let idb = p.idb();
    if let Some(l) = lits.iter().find(|l| !l.positive && l.atom.rel_name().is_some_and(|q| idb.contains(q))) {
        return Err(Error::Unsupported(format!("qualification negates the intensional atom `{}`", l.atom)));
    }
    let r = fe.target.as_str();
    let t = constraint_atom(c)?;
    require_linear(p)?;
    let deps = dependents(p, r);
    require_positive(p, &deps)?;
    let t_name = t.rel_name().unwrap_or_default().to_string();
    if !deps.contains(&t_name) {
        return Ok(DeltaResult::safe(p));
    }

    let mut names = NameGen::new(p.predicates().into_iter().chain(c.predicates().into_keys()).chain([r.to_string()]));
    let delta_of: BTreeMap<String, String> = deps.iter().map(|q| (q.clone(), names.delta(q))).collect();
    let xs: Vec<Term> = fe.vars.iter().map(|v| Term::var(v.clone())).collect();
    let head = Atom::new(delta_of[r].clone(), xs.clone());
    let mut rules: Vec<DeltaRule> = Vec::new();

    // Seeds.
    let unfold = match lits.as_slice() {
        [l] if l.positive && l.atom.args == xs && l.atom.rel_name().is_some_and(|q| idb.contains(q)) => Some(l.atom.clone()),
        _ => None,
    };
    match unfold {
        Some(phi) => {
            let q = phi.rel_name().unwrap_or_default().to_string();
            let taken: BTreeSet<String> = fe.vars.iter().cloned().collect();
            for (i, rule) in p.rules.iter().enumerate().filter(|(_, x)| x.head_pred() == q) {
                let rule = rename_apart(rule, &taken);
                let Some(s) = mgu(&rule.head, &phi) else { continue };
                let body: Vec<Literal> = rule.body.iter().map(|l| s.apply_literal(l)).collect();
                let h = s.apply_atom(&head);
                let rec: Vec<usize> = (0..body.len()).filter(|&k| body[k].atom.rel_name() == Some(q.as_str())).collect();
                let variants = 1usize << rec.len();
                for mask in 0..variants {
                    let mut b = body.clone();
                    let mut kinds = Vec::new();
                    for (bit, &k) in rec.iter().enumerate() {
                        let to = if mask >> bit & 1 == 1 { delta_of[r].clone() } else { r.to_string() };
                        kinds.push(if mask >> bit & 1 == 1 { "delta" } else { "old" });
                        b[k] = Literal::pos(b[k].atom.renamed_pred(to));
                    }
                    let note = if kinds.is_empty() {
                        String::new()
                    } else {
                        format!(", {q} read as {}", kinds.join("/"))
                    };
                    if let Some(rule) = inline_equalities(&Rule::new(h.clone(), b)) {
                        push_new(&mut rules, rule, format!("seed: unfolding of rule {}{note}", i + 1));
                    }
                }
            }
        }
        None => {
            if let Some(rule) = inline_equalities(&Rule::new(head.clone(), lits.clone())) {
                push_new(&mut rules, rule, "seed: qualification".to_string());
            }
        }
    }

    // Propagation.
    for (i, rule) in p.rules.iter().enumerate() {
        let Some(dh) = delta_of.get(rule.head_pred()) else { continue };
        for (k, l) in rule.body.iter().enumerate() {
            let Some(ds) = l.atom.rel_name().and_then(|s| delta_of.get(s)) else { continue };
            if !l.positive {
                continue;
            }
            let mut body = rule.body.clone();
            body[k] = Literal::pos(l.atom.renamed_pred(ds.clone()));
            let new = Rule::new(rule.head.renamed_pred(dh.clone()), body);
            push_new(&mut rules, new, format!("propagation through rule {}", i + 1));
        }
    }

    let mut program = p.clone();
    program.rules.extend(rules.iter().map(|d| d.rule.clone()));
    Ok(DeltaResult {
        verdict: DeltaVerdict::Check,
        wp: delta_wp(&t, &delta_of[&t_name]),
        program,
        rules,
        pruned: vec![],
    })
}

/// Dispatches an insertion update to the matching delta construction:
/// a sequence of ground insertions into one predicate, or one qualified
/// insertion.
pub fn delta_for_update(p: &Program, u: &Update, c: &Formula, opts: &DeltaOptions) -> Result<DeltaResult> {
    let fes = u.foreaches();
    let only_foreach = fn_only_foreach(u);
    if !only_foreach || fes.is_empty() || fes.iter().any(|f| f.action != Action::Insert) {
        return Err(Error::Unsupported(
            "delta programs cover insertions only (ground facts or one qualified insertion)".into(),
        ));
    }
    let ground: Option<Vec<Atom>> = fes.iter().map(|f| ground_fact(f)).collect();
    match ground {
        Some(atoms) => delta_saturation(p, &atoms, c, opts),
        None if fes.len() == 1 => delta_qualified_insert(p, fes[0], c),
        None => Err(Error::Unsupported("several qualified insertions".into())),
    }
}

fn fn_only_foreach(u: &Update) -> bool {
    match u {
        Update::Foreach(_) => true,
        Update::Seq(a, b) => fn_only_foreach(a) && fn_only_foreach(b),
        _ => false,
    }
}

/// The fact inserted by `insert r(ā)`.
fn ground_fact(fe: &Foreach) -> Option<Atom> {
    let rule = Rule::new(fe.target_atom(), conjunct_literals(&fe.qual)?.into_iter().map(|g| match g {
        Formula::Atom(a) => Some(Literal::pos(a)),
        _ => None,
    }).collect::<Option<Vec<_>>>()?);
    if rule.body.iter().any(|l| !l.atom.is_eq()) {
        return None;
    }
    let r = inline_equalities(&rule)?;
    r.head.is_ground().then_some(r.head)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_program, parse_update};

    const TC: &str = "tc(X,Y) :- arc(X,Y). tc(X,Y) :- arc(X,Z), tc(Z,Y).";

    fn strings(d: &DeltaResult) -> Vec<String> {
        d.rules.iter().map(|r| r.rule.to_string()).collect()
    }

    #[test]
    fn single_ground_insert() {
        let p = parse_program(TC).unwrap();
        let c = parse_formula("!exists X: tc(X,X)").unwrap();
        let d = delta_for_update(&p, &parse_update("insert arc(d,b)").unwrap(), &c, &DeltaOptions::default()).unwrap();
        assert_eq!(d.verdict, DeltaVerdict::Check);
        assert_eq!(strings(&d), ["delta_tc(d,b).", "delta_tc(d,Y) :- tc(b,Y).", "delta_tc(X,Y) :- arc(X,Z), delta_tc(Z,Y)."]);
        assert_eq!(d.wp.to_string(), "!exists X: delta_tc(X,X)");
        assert_eq!(d.pruned.len(), 1);
        let full = delta_for_update(&p, &parse_update("insert arc(d,b)").unwrap(), &c, &DeltaOptions { prune: false }).unwrap();
        assert_eq!(full.rules.len(), 4);
    }

    #[test]
    fn state_changing_recursion_keeps_reentrant_rule() {
        let p = parse_program(
            "p(X,S) :- fin(X,S). p(X,S) :- arc(X,Y), p(Y,T), nxt(T,S). t(X) :- p(X,s1), target(X).",
        )
        .unwrap();
        let c = parse_formula("!exists X: t(X)").unwrap();
        let d = delta_for_update(&p, &parse_update("insert arc(d,b)").unwrap(), &c, &DeltaOptions::default()).unwrap();
        assert!(d.pruned.is_empty());
        assert!(strings(&d).contains(&"delta_p(d,S) :- delta_p(b,T), nxt(T,S).".to_string()));
        // Going round the new loop twice reaches the forbidden state.
        let db = crate::syntax::parse_database(
            "fin(d,s0). arc(b,d). nxt(s0,s1). nxt(s1,s2). nxt(s2,s0). target(d).",
        )
        .unwrap();
        let model = crate::datalog::evaluate(&d.program, &db).unwrap();
        assert!(!crate::oracle::eval_sentence(&d.wp, &model));
    }

    #[test]
    fn two_ground_inserts_keep_reentrant_rules() {
        let p = parse_program(TC).unwrap();
        let c = parse_formula("!exists X: tc(X,X)").unwrap();
        let d = delta_for_update(&p, &parse_update("insert arc(d,b) ; insert arc(e,f)").unwrap(), &c, &DeltaOptions::default())
            .unwrap();
        assert_eq!(d.rules.len(), 7, "{d}");
    }

    #[test]
    fn unrelated_insert_is_safe() {
        let p = parse_program(TC).unwrap();
        let c = parse_formula("!exists X: tc(X,X)").unwrap();
        let d = delta_for_update(&p, &parse_update("insert s(a)").unwrap(), &c, &DeltaOptions::default()).unwrap();
        assert_eq!(d.verdict, DeltaVerdict::Safe);
    }

    #[test]
    fn non_linear_program_is_unsupported() {
        let p = parse_program("tc(X,Y) :- arc(X,Y). tc(X,Y) :- tc(X,Z), tc(Z,Y).").unwrap();
        let c = parse_formula("!exists X: tc(X,X)").unwrap();
        let e = delta_for_update(&p, &parse_update("insert arc(d,b)").unwrap(), &c, &DeltaOptions::default()).unwrap_err();
        assert!(matches!(e, Error::Unsupported(_)));
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn qualified_insert() {
        let p = parse_program(
            "tc(X,Y) :- arc(X,Y). tc(X,Y) :- arc(X,Z), tc(Z,Y). path(X,Y) :- edge(X,Y). path(X,Y) :- edge(X,Z), path(Z,Y).",
        )
        .unwrap();
        let c = parse_formula("!exists X: tc(X,X)").unwrap();
        let d = delta_for_update(&p, &parse_update("foreach X,Y: path(X,Y) do insert tc(X,Y)").unwrap(), &c, &DeltaOptions::default())
            .unwrap();
        assert_eq!(
            strings(&d),
            [
                "delta_tc(X,Y) :- edge(X,Y).",
                "delta_tc(X,Y) :- edge(X,Z), tc(Z,Y).",
                "delta_tc(X,Y) :- edge(X,Z), delta_tc(Z,Y).",
                "delta_tc(X,Y) :- arc(X,Z), delta_tc(Z,Y).",
            ]
        );
    }
}
