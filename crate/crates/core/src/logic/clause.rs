use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::subst::Substitution;
use super::term::{vars_in_order, Literal, Term};

/// A universally closed disjunction of literals with set semantics.
/// The empty clause is false.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    lits: BTreeSet<Literal>,
}

impl Clause {
    pub fn new(lits: impl IntoIterator<Item = Literal>) -> Self {
        Clause {
            lits: lits.into_iter().collect(),
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> + Clone {
        self.lits.iter()
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains(&self, l: &Literal) -> bool {
        self.lits.contains(l)
    }

    pub fn insert(&mut self, l: Literal) {
        self.lits.insert(l);
    }

    pub fn remove(&mut self, l: &Literal) -> bool {
        self.lits.remove(l)
    }

    pub fn without(&self, l: &Literal) -> Clause {
        let mut c = self.clone();
        c.lits.remove(l);
        c
    }

    pub fn union(&self, other: &Clause) -> Clause {
        Clause {
            lits: self.lits.union(&other.lits).cloned().collect(),
        }
    }

    /// Variables in first-occurrence order over the sorted literals.
    pub fn vars(&self) -> Vec<String> {
        vars_in_order(&self.lits)
    }

    pub fn constants(&self) -> BTreeSet<String> {
        self.lits
            .iter()
            .flat_map(|l| l.atom.constants().map(str::to_string))
            .collect()
    }

    pub fn predicates(&self) -> BTreeSet<String> {
        self.lits
            .iter()
            .filter_map(|l| l.atom.rel_name().map(str::to_string))
            .collect()
    }

    pub fn count_pred(&self, pred: &str, positive: bool) -> usize {
        self.lits
            .iter()
            .filter(|l| l.positive == positive && l.atom.rel_name() == Some(pred))
            .count()
    }

    pub fn mentions(&self, pred: &str) -> bool {
        self.lits.iter().any(|l| l.atom.rel_name() == Some(pred))
    }

    pub fn apply(&self, s: &Substitution) -> Clause {
        if s.is_empty() {
            return self.clone();
        }
        Clause::new(self.lits.iter().map(|l| s.apply_literal(l)))
    }

    /// Renames every variable that also occurs in `taken` by appending
    /// primes until the name is free. Returns the renamed clause.
    pub fn rename_apart(&self, taken: &BTreeSet<String>) -> Clause {
        let mut used: BTreeSet<String> = taken.clone();
        used.extend(self.vars());
        let mut s = Substitution::new();
        for v in self.vars() {
            if taken.contains(&v) {
                let mut fresh = format!("{v}'");
                while used.contains(&fresh) {
                    fresh.push('\'');
                }
                used.insert(fresh.clone());
                s.bind(&v, Term::Var(fresh));
            }
        }
        self.apply(&s)
    }

    /// True iff the clause holds in every interpretation for purely
    /// syntactic reasons: a complementary pair on identical atoms, an
    /// equality whose sides are identical, or a disequality between tuples
    /// that differ on a pair of distinct constants.
    pub fn is_tautology(&self) -> bool {
        for l in &self.lits {
            if l.atom.is_eq() {
                let (lhs, rhs) = l.atom.eq_sides();
                let trivially_equal = lhs == rhs;
                let distinct_consts = lhs
                    .iter()
                    .zip(rhs)
                    .any(|(a, b)| a.is_const() && b.is_const() && a != b);
                if (l.positive && trivially_equal) || (!l.positive && distinct_consts) {
                    return true;
                }
            } else if !l.positive && self.lits.contains(&l.negated()) {
                return true;
            }
        }
        false
    }

    /// A renaming-invariant key: literals are ordered with variables
    /// masked, then variables are renamed `_0, _1, …` in first-occurrence
    /// order. Variant clauses usually share a key; `is_variant` is exact.
    pub fn canonical(&self) -> Clause {
        let mut lits: Vec<&Literal> = self.lits.iter().collect();
        lits.sort_by_key(|l| {
            let masked: Vec<Option<&str>> = l
                .atom
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(_) => None,
                    Term::Const(c) => Some(c.as_str()),
                })
                .collect();
            (l.atom.pred.clone(), l.positive, masked)
        });
        let mut names: BTreeMap<&str, usize> = BTreeMap::new();
        for l in &lits {
            for v in l.vars() {
                let n = names.len();
                names.entry(v).or_insert(n);
            }
        }
        Clause::new(self.lits.iter().map(|l| {
            l.map_terms(|t| match t {
                Term::Var(v) => Term::Var(format!("_{}", names[v.as_str()])),
                other => other.clone(),
            })
        }))
    }

    /// True iff `other` equals `self` up to a bijective renaming of
    /// variables.
    pub fn is_variant(&self, other: &Clause) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let b: Vec<&Literal> = other.lits.iter().collect();
        let candidates = |l: &Literal| {
            b.iter()
                .filter(|m| m.positive == l.positive && m.atom.pred == l.atom.pred)
                .count()
        };
        // Most constrained literals first keeps the search from permuting
        // interchangeable literals before a binding literal fails.
        let mut a: Vec<(usize, usize, &Literal)> = self
            .lits
            .iter()
            .map(|l| (candidates(l), usize::MAX - l.vars().count(), l))
            .collect();
        if a.iter().any(|(n, _, _)| *n == 0) {
            return false;
        }
        a.sort_by_key(|(n, v, _)| (*n, *v));
        let a: Vec<&Literal> = a.into_iter().map(|(_, _, l)| l).collect();
        let mut used = vec![false; b.len()];
        variant_rec(&a, &b, &mut used, &mut BTreeMap::new(), &mut BTreeMap::new())
    }
}

fn variant_rec(
    a: &[&Literal],
    b: &[&Literal],
    used: &mut [bool],
    fwd: &mut BTreeMap<String, String>,
    bwd: &mut BTreeMap<String, String>,
) -> bool {
    let Some((first, rest)) = a.split_first() else {
        return true;
    };
    for j in 0..b.len() {
        if used[j] || b[j].positive != first.positive || b[j].atom.pred != first.atom.pred {
            continue;
        }
        let (mut f2, mut b2) = (fwd.clone(), bwd.clone());
        let ok = first.atom.args.iter().zip(&b[j].atom.args).all(|(x, y)| match (x, y) {
            (Term::Var(x), Term::Var(y)) => {
                let fx = f2.entry(x.clone()).or_insert_with(|| y.clone()).clone();
                let by = b2.entry(y.clone()).or_insert_with(|| x.clone()).clone();
                &fx == y && &by == x
            }
            (Term::Const(x), Term::Const(y)) => x == y,
            _ => false,
        });
        if ok {
            used[j] = true;
            if variant_rec(rest, b, used, &mut f2, &mut b2) {
                return true;
            }
            used[j] = false;
        }
    }
    false
}

impl FromIterator<Literal> for Clause {
    fn from_iter<I: IntoIterator<Item = Literal>>(iter: I) -> Self {
        Clause::new(iter)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lits.is_empty() {
            return f.write_str("false");
        }
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Removes clauses that are variants of an earlier clause, keeping order.
pub fn dedup_variants(clauses: impl IntoIterator<Item = Clause>) -> Vec<Clause> {
    let mut out: Vec<Clause> = Vec::new();
    let mut keys: BTreeSet<Clause> = BTreeSet::new();
    for c in clauses {
        let key = c.canonical();
        if keys.contains(&key) || out.iter().any(|o| o.is_variant(&c)) {
            continue;
        }
        keys.insert(key);
        out.push(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::term::Atom;

    fn lit(pos: bool, p: &str, args: &[&str]) -> Literal {
        let a = Atom::new(p, args.iter().map(|s| Term::from_ident(s)).collect());
        if pos {
            Literal::pos(a)
        } else {
            Literal::neg(a)
        }
    }

    #[test]
    fn tautology_detection() {
        let c = Clause::new([lit(false, "q", &["a", "Z"]), lit(true, "p", &["a", "Z"]), lit(true, "q", &["a", "Z"])]);
        assert!(c.is_tautology());
        let c = Clause::new([lit(true, "p", &["X"]), lit(false, "p", &["Y"])]);
        assert!(!c.is_tautology());
        let eq = Clause::new([Literal::pos(Atom::eq(vec![Term::constant("a")], vec![Term::constant("a")]))]);
        assert!(eq.is_tautology());
    }

    #[test]
    fn duplicates_collapse() {
        let c = Clause::new([lit(true, "p", &["X"]), lit(true, "p", &["X"])]);
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn variants() {
        let a = Clause::new([lit(false, "r", &["X", "Y"]), lit(true, "q", &["Y", "Z"])]);
        let b = Clause::new([lit(false, "r", &["A", "B"]), lit(true, "q", &["B", "C"])]);
        let c = Clause::new([lit(false, "r", &["A", "B"]), lit(true, "q", &["A", "C"])]);
        assert!(a.is_variant(&b));
        assert!(!a.is_variant(&c));
        assert_eq!(a.canonical(), b.canonical());
    }

    #[test]
    fn rename_apart_primes() {
        let a = Clause::new([lit(true, "p", &["X", "Y"])]);
        let taken: BTreeSet<String> = ["X".to_string()].into();
        let r = a.rename_apart(&taken);
        assert_eq!(r.to_string(), "p(X',Y)");
    }

    #[test]
    fn empty_prints_false() {
        assert_eq!(Clause::empty().to_string(), "false");
    }
}
