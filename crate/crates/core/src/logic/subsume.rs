use super::clause::Clause;
use super::subst::{match_terms, Substitution};
use super::term::Literal;

/// θ-subsumption: is there σ with `c1 σ ⊆ c2`? Variables of `c2` are
/// treated as constants.
pub fn theta_subsumes(c1: &Clause, c2: &Clause) -> bool {
    if c1.len() > c2.len() && c1.vars().is_empty() {
        return false;
    }
    let mut pattern: Vec<&Literal> = c1.literals().collect();
    // Most constrained literals first: fewest candidates in the target.
    pattern.sort_by_key(|l| {
        c2.literals()
            .filter(|t| t.positive == l.positive && t.atom.pred == l.atom.pred)
            .count()
    });
    let target: Vec<&Literal> = c2.literals().collect();
    subsumes_rec(&pattern, &target, &Substitution::new())
}

fn subsumes_rec(pattern: &[&Literal], target: &[&Literal], s: &Substitution) -> bool {
    let Some((first, rest)) = pattern.split_first() else {
        return true;
    };
    for t in target {
        if t.positive != first.positive || t.atom.pred != first.atom.pred {
            continue;
        }
        let mut s2 = s.clone();
        if match_terms(&first.atom.args, &t.atom.args, &mut s2) && subsumes_rec(rest, target, &s2) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_clause;

    fn cl(s: &str) -> Clause {
        parse_clause(s).unwrap()
    }

    #[test]
    fn instance_is_subsumed() {
        assert!(theta_subsumes(&cl("!r(X) | q(X)"), &cl("!r(a) | q(a) | s(b)")));
    }

    #[test]
    fn reflexive() {
        let c = cl("!p(X,Y) | !p(X,Z) | q(Y,Z)");
        assert!(theta_subsumes(&c, &c));
    }

    #[test]
    fn repeated_variable_blocks_match() {
        assert!(!theta_subsumes(&cl("q(X,X)"), &cl("q(a,b)")));
    }

    #[test]
    fn larger_clause_can_subsume_by_merging() {
        // p(X) | p(Y) subsumes p(a) via X,Y -> a.
        assert!(theta_subsumes(&cl("p(X) | p(Y)"), &cl("p(a)")));
    }

    #[test]
    fn target_variables_are_rigid() {
        assert!(!theta_subsumes(&cl("p(a)"), &cl("p(X)")));
        assert!(theta_subsumes(&cl("p(X)"), &cl("p(Y)")));
    }
}
