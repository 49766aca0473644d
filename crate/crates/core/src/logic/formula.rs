use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::clause::Clause;
use super::term::{Atom, Literal, Term};
use crate::error::{Error, Result};

/// First-order formula over function-free atoms. Free variables are
/// implicitly universally closed when a formula is used as a sentence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Forall(Vec<String>, Box<Formula>),
    Exists(Vec<String>, Box<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Self {
        Formula::Atom(a)
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Or(vec![Formula::not(a), b])
    }

    pub fn forall(vars: Vec<String>, body: Formula) -> Self {
        if vars.is_empty() {
            body
        } else {
            Formula::Forall(vars, Box::new(body))
        }
    }

    pub fn exists(vars: Vec<String>, body: Formula) -> Self {
        if vars.is_empty() {
            body
        } else {
            Formula::Exists(vars, Box::new(body))
        }
    }

    pub fn literal(l: &Literal) -> Self {
        let a = Formula::Atom(l.atom.clone());
        if l.positive {
            a
        } else {
            Formula::not(a)
        }
    }

    /// The disjunction of a clause's literals (open: no quantifier).
    pub fn from_clause(c: &Clause) -> Self {
        match c.len() {
            0 => Formula::False,
            1 => Formula::literal(c.literals().next().unwrap()),
            _ => Formula::Or(c.literals().map(Formula::literal).collect()),
        }
    }

    /// A clause as a closed sentence: `forall vars: l1 | … | ln`.
    pub fn closed_clause(c: &Clause) -> Self {
        Formula::forall(c.vars(), Formula::from_clause(c))
    }

    pub fn conj(lits: &[Literal]) -> Self {
        match lits.len() {
            0 => Formula::True,
            1 => Formula::literal(&lits[0]),
            _ => Formula::And(lits.iter().map(Formula::literal).collect()),
        }
    }

    /// Free variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut seen, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, seen: &mut BTreeSet<String>, out: &mut Vec<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                for v in a.vars() {
                    if !bound.iter().any(|b| b == v) && seen.insert(v.to_string()) {
                        out.push(v.to_string());
                    }
                }
            }
            Formula::Not(f) => f.collect_free(bound, seen, out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_free(bound, seen, out);
                }
            }
            Formula::Forall(vs, f) | Formula::Exists(vs, f) => {
                let n = bound.len();
                bound.extend(vs.iter().cloned());
                f.collect_free(bound, seen, out);
                bound.truncate(n);
            }
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| out.push(a));
        out
    }

    fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => f(a),
            Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => g.visit_atoms(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_atoms(f)),
        }
    }

    pub fn constants(&self) -> BTreeSet<String> {
        self.atoms()
            .into_iter()
            .flat_map(|a| a.constants().map(str::to_string).collect::<Vec<_>>())
            .collect()
    }

    /// Relational predicates with their arities.
    pub fn predicates(&self) -> BTreeMap<String, usize> {
        self.atoms()
            .into_iter()
            .filter_map(|a| a.rel_name().map(|n| (n.to_string(), a.arity())))
            .collect()
    }

    pub fn mentions(&self, pred: &str) -> bool {
        self.atoms().iter().any(|a| a.rel_name() == Some(pred))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_quantifier_free),
            Formula::Forall(..) | Formula::Exists(..) => false,
        }
    }

    /// Negation normal form: negations only on atoms.
    pub fn nnf(&self) -> Formula {
        self.nnf_signed(true)
    }

    fn nnf_signed(&self, positive: bool) -> Formula {
        match (self, positive) {
            (Formula::True, true) | (Formula::False, false) => Formula::True,
            (Formula::True, false) | (Formula::False, true) => Formula::False,
            (Formula::Atom(a), true) => Formula::Atom(a.clone()),
            (Formula::Atom(a), false) => Formula::not(Formula::Atom(a.clone())),
            (Formula::Not(f), _) => f.nnf_signed(!positive),
            (Formula::And(fs), true) | (Formula::Or(fs), false) => {
                Formula::And(fs.iter().map(|f| f.nnf_signed(positive)).collect())
            }
            (Formula::Or(fs), true) | (Formula::And(fs), false) => {
                Formula::Or(fs.iter().map(|f| f.nnf_signed(positive)).collect())
            }
            (Formula::Forall(vs, f), true) | (Formula::Exists(vs, f), false) => {
                Formula::Forall(vs.clone(), Box::new(f.nnf_signed(positive)))
            }
            (Formula::Exists(vs, f), true) | (Formula::Forall(vs, f), false) => {
                Formula::Exists(vs.clone(), Box::new(f.nnf_signed(positive)))
            }
        }
    }

    /// Strips universal quantifiers from a universal sentence, renaming
    /// bound variables apart from each other and from the free variables.
    /// Fails if an existential quantifier survives negation normal form.
    pub fn universal_matrix(&self) -> Result<Formula> {
        let nnf = self.nnf();
        let mut used: BTreeSet<String> = nnf.free_vars().into_iter().collect();
        nnf.strip_universal(&BTreeMap::new(), &mut used)
    }

    fn strip_universal(&self, ren: &BTreeMap<String, String>, used: &mut BTreeSet<String>) -> Result<Formula> {
        Ok(match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => Formula::Atom(rename_atom(a, ren)),
            Formula::Not(f) => Formula::not(f.strip_universal(ren, used)?),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.strip_universal(ren, used)).collect::<Result<_>>()?),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.strip_universal(ren, used)).collect::<Result<_>>()?),
            Formula::Forall(vs, f) => {
                let mut ren = ren.clone();
                for v in vs {
                    let fresh = fresh_name(v, used);
                    ren.insert(v.clone(), fresh);
                }
                f.strip_universal(&ren, used)?
            }
            Formula::Exists(..) => {
                return Err(Error::Unsupported(
                    "existentially quantified formulas cannot be simplified".into(),
                ))
            }
        })
    }

    /// Conjunctive normal form of a quantifier-free formula.
    pub fn to_clauses(&self) -> Vec<Clause> {
        debug_assert!(self.is_quantifier_free(), "to_clauses on quantified formula");
        let mut out: Vec<Clause> = Vec::new();
        for c in cnf(&self.nnf()) {
            if !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }

    /// Disjunctive normal form of a quantifier-free formula.
    pub fn to_dnf(&self) -> Vec<Vec<Literal>> {
        debug_assert!(self.is_quantifier_free(), "to_dnf on quantified formula");
        let mut out: Vec<Vec<Literal>> = Vec::new();
        for mut conj in dnf(&self.nnf()) {
            let mut seen = BTreeSet::new();
            conj.retain(|l| seen.insert(l.clone()));
            if !out.contains(&conj) {
                out.push(conj);
            }
        }
        out
    }

    /// Capture-avoiding substitution of free variables by terms.
    pub fn subst_vars(&self, map: &BTreeMap<String, Term>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => Formula::Atom(a.map_terms(|t| match t {
                Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| t.clone()),
                Term::Const(_) => t.clone(),
            })),
            Formula::Not(f) => Formula::not(f.subst_vars(map)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.subst_vars(map)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.subst_vars(map)).collect()),
            Formula::Forall(vs, f) | Formula::Exists(vs, f) => {
                let mut inner = map.clone();
                for v in vs {
                    inner.remove(v);
                }
                // Rename binders that would capture a substituted variable.
                let incoming: BTreeSet<String> = inner
                    .values()
                    .filter_map(|t| match t {
                        Term::Var(v) => Some(v.clone()),
                        Term::Const(_) => None,
                    })
                    .collect();
                let mut used: BTreeSet<String> = incoming.clone();
                used.extend(f.free_vars());
                let mut new_vs = Vec::with_capacity(vs.len());
                for v in vs {
                    if incoming.contains(v) {
                        let fresh = fresh_name(v, &mut used);
                        inner.insert(v.clone(), Term::Var(fresh.clone()));
                        new_vs.push(fresh);
                    } else {
                        new_vs.push(v.clone());
                    }
                }
                let body = Box::new(f.subst_vars(&inner));
                if matches!(self, Formula::Forall(..)) {
                    Formula::Forall(new_vs, body)
                } else {
                    Formula::Exists(new_vs, body)
                }
            }
        }
    }

    /// Renames relational predicates according to `map`.
    pub fn rename_preds(&self, map: &BTreeMap<String, String>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => match a.rel_name().and_then(|n| map.get(n)) {
                Some(n) => Formula::Atom(a.renamed_pred(n.clone())),
                None => self.clone(),
            },
            Formula::Not(f) => Formula::not(f.rename_preds(map)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.rename_preds(map)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.rename_preds(map)).collect()),
            Formula::Forall(vs, f) => Formula::Forall(vs.clone(), Box::new(f.rename_preds(map))),
            Formula::Exists(vs, f) => Formula::Exists(vs.clone(), Box::new(f.rename_preds(map))),
        }
    }

    /// Propagates `true`/`false`, flattens nested connectives and removes
    /// double negations.
    pub fn simplify_constants(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => self.clone(),
            Formula::Not(f) => match f.simplify_constants() {
                Formula::True => Formula::False,
                Formula::False => Formula::True,
                Formula::Not(g) => *g,
                g => Formula::not(g),
            },
            Formula::And(fs) => {
                let mut out = Vec::new();
                for f in fs {
                    match f.simplify_constants() {
                        Formula::True => {}
                        Formula::False => return Formula::False,
                        Formula::And(gs) => out.extend(gs),
                        g => out.push(g),
                    }
                }
                match out.len() {
                    0 => Formula::True,
                    1 => out.pop().unwrap(),
                    _ => Formula::And(out),
                }
            }
            Formula::Or(fs) => {
                let mut out = Vec::new();
                for f in fs {
                    match f.simplify_constants() {
                        Formula::False => {}
                        Formula::True => return Formula::True,
                        Formula::Or(gs) => out.extend(gs),
                        g => out.push(g),
                    }
                }
                match out.len() {
                    0 => Formula::False,
                    1 => out.pop().unwrap(),
                    _ => Formula::Or(out),
                }
            }
            Formula::Forall(vs, f) => match f.simplify_constants() {
                g @ (Formula::True | Formula::False) => g,
                g => Formula::Forall(vs.clone(), Box::new(g)),
            },
            Formula::Exists(vs, f) => match f.simplify_constants() {
                g @ (Formula::True | Formula::False) => g,
                g => Formula::Exists(vs.clone(), Box::new(g)),
            },
        }
    }

    /// Number of atom occurrences.
    pub fn size(&self) -> usize {
        self.atoms().len()
    }
}

fn rename_atom(a: &Atom, ren: &BTreeMap<String, String>) -> Atom {
    a.map_terms(|t| match t {
        Term::Var(v) => Term::Var(ren.get(v).cloned().unwrap_or_else(|| v.clone())),
        Term::Const(_) => t.clone(),
    })
}

pub(crate) fn fresh_name(base: &str, used: &mut BTreeSet<String>) -> String {
    let mut name = base.to_string();
    while used.contains(&name) {
        name.push('\'');
    }
    used.insert(name.clone());
    name
}

fn as_literal(f: &Formula) -> Option<Literal> {
    match f {
        Formula::Atom(a) => Some(Literal::pos(a.clone())),
        Formula::Not(g) => match g.as_ref() {
            Formula::Atom(a) => Some(Literal::neg(a.clone())),
            _ => None,
        },
        _ => None,
    }
}

fn cnf(f: &Formula) -> Vec<Clause> {
    if let Some(l) = as_literal(f) {
        return vec![Clause::new([l])];
    }
    match f {
        Formula::True => vec![],
        Formula::False => vec![Clause::empty()],
        Formula::And(fs) => fs.iter().flat_map(cnf).collect(),
        Formula::Or(fs) => {
            let mut acc = vec![Clause::empty()];
            for g in fs {
                let part = cnf(g);
                acc = acc.iter().flat_map(|a| part.iter().map(move |b| a.union(b))).collect();
            }
            acc
        }
        _ => unreachable!("cnf expects a quantifier-free formula in negation normal form"),
    }
}

fn dnf(f: &Formula) -> Vec<Vec<Literal>> {
    if let Some(l) = as_literal(f) {
        return vec![vec![l]];
    }
    match f {
        Formula::True => vec![vec![]],
        Formula::False => vec![],
        Formula::Or(fs) => fs.iter().flat_map(dnf).collect(),
        Formula::And(fs) => {
            let mut acc: Vec<Vec<Literal>> = vec![vec![]];
            for g in fs {
                let part = dnf(g);
                acc = acc
                    .iter()
                    .flat_map(|a| {
                        part.iter().map(move |b| {
                            let mut c = a.clone();
                            c.extend(b.iter().cloned());
                            c
                        })
                    })
                    .collect();
            }
            acc
        }
        _ => unreachable!("dnf expects a quantifier-free formula in negation normal form"),
    }
}

// Printing precedence: quantifier 0, or 1, and 2, unary 3.
fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Forall(..) | Formula::Exists(..) => 0,
        Formula::Not(g) if prec(g) == 0 && matches!(g.as_ref(), Formula::Forall(..) | Formula::Exists(..) | Formula::Not(_)) => 0,
        Formula::Or(v) if v.len() > 1 => 1,
        Formula::And(v) if v.len() > 1 => 2,
        _ => 3,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Formula, min: u8) -> fmt::Result {
    if prec(child) <= min {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => match g.as_ref() {
                Formula::Atom(a) => a.fmt_with_sign(f, false),
                Formula::True | Formula::False | Formula::Not(_) => write!(f, "!{g}"),
                Formula::Forall(..) | Formula::Exists(..) => write!(f, "!{g}"),
                _ => write!(f, "!({g})"),
            },
            Formula::And(gs) | Formula::Or(gs) if gs.is_empty() => {
                f.write_str(if matches!(self, Formula::And(_)) { "true" } else { "false" })
            }
            Formula::And(gs) | Formula::Or(gs) if gs.len() == 1 => write!(f, "{}", gs[0]),
            Formula::And(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    write_child(f, g, 2)?;
                }
                Ok(())
            }
            Formula::Or(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write_child(f, g, 1)?;
                }
                Ok(())
            }
            Formula::Forall(vs, g) => write!(f, "forall {}: {g}", vs.join(",")),
            Formula::Exists(vs, g) => write!(f, "exists {}: {g}", vs.join(",")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_clause, parse_formula};

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn cnf_of_implication() {
        assert_eq!(f("(p & q) -> r").to_clauses(), vec![parse_clause("!p | !q | r").unwrap()]);
    }

    #[test]
    fn cnf_of_conjunction_of_implications() {
        let got = f("(p -> q) & (r -> s)").to_clauses();
        assert_eq!(got, vec![parse_clause("!p | q").unwrap(), parse_clause("!r | s").unwrap()]);
    }

    #[test]
    fn clause_is_its_own_cnf() {
        let c = parse_clause("!r(X,Y) | q(X,Y)").unwrap();
        assert_eq!(Formula::from_clause(&c).to_clauses(), vec![c]);
    }

    #[test]
    fn dnf_examples() {
        let d = f("p | (q & r)").to_dnf();
        assert_eq!(d.len(), 2);
        assert_eq!(d[0].len(), 1);
        assert_eq!(d[1].len(), 2);
        assert_eq!(f("!(p & q)").to_dnf().len(), 2);
        assert_eq!(f("p & !q & r").to_dnf().len(), 1);
    }

    #[test]
    fn universal_matrix_rejects_existentials() {
        assert!(f("exists X: r(X)").universal_matrix().is_err());
        assert!(f("!exists X: r(X)").universal_matrix().is_ok());
        assert!(f("!(exists X: r(X))").universal_matrix().is_ok());
        assert!(f("!(forall X: r(X))").universal_matrix().is_err());
    }

    #[test]
    fn subst_avoids_capture() {
        let g = f("forall Y: p(X,Y)");
        let map: BTreeMap<String, Term> = [("X".to_string(), Term::var("Y"))].into();
        let h = g.subst_vars(&map);
        assert_eq!(h.to_string(), "forall Y': p(Y,Y')");
    }

    #[test]
    fn constants_fold() {
        assert_eq!(f("(true & p) | (!true & p)").simplify_constants(), f("p"));
    }

    #[test]
    fn printing_round_trips_precedence() {
        for s in ["!(r(X) | p(X)) | q(X)", "(r(X) & !s(X) | p(X)) -> q(X)", "forall X: !q(X)", "(!exists X: p(X)) | q", "(X,Y) != (a,b) | p(X)"] {
            let g = f(s);
            assert_eq!(f(&g.to_string()), g, "{s} printed as {g}");
        }
    }
}
