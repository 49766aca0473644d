use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Suffix of primed (post-state) predicates.
pub const PRIME_SUFFIX: &str = "_prime";
/// Prefix of delta predicates.
pub const DELTA_PREFIX: &str = "delta_";
/// Prefix of deletion auxiliaries.
pub const DEL_PREFIX: &str = "t_del_";
/// Suffix of normalization snapshots.
pub const HAT_SUFFIX: &str = "_hat";

/// Whether `name` belongs to the generated namespace.
pub fn is_reserved(name: &str) -> bool {
    name.starts_with(DELTA_PREFIX)
        || name.starts_with(DEL_PREFIX)
        || name.contains(PRIME_SUFFIX)
        || name.ends_with(HAT_SUFFIX)
        || name.contains("_hat_")
}

/// Rejects user symbols that could collide with generated ones.
pub fn check_reserved<'a>(names: impl IntoIterator<Item = &'a str>) -> Result<()> {
    for n in names {
        if is_reserved(n) {
            return Err(Error::Validation(format!(
                "predicate `{n}` uses a reserved name (generated symbols use `{DELTA_PREFIX}`, `{DEL_PREFIX}`, `{PRIME_SUFFIX}` and `{HAT_SUFFIX}`)"
            )));
        }
    }
    Ok(())
}

/// Fresh predicate names, shared across one construction.
#[derive(Clone, Debug, Default)]
pub struct NameGen {
    used: BTreeSet<String>,
    deletions: usize,
}

impl NameGen {
    pub fn new(used: impl IntoIterator<Item = String>) -> Self {
        NameGen {
            used: used.into_iter().collect(),
            deletions: 0,
        }
    }

    pub fn reserve(&mut self, name: &str) {
        self.used.insert(name.to_string());
    }

    /// `base`, or `base_2`, `base_3`, … if taken.
    pub fn fresh(&mut self, base: &str) -> String {
        let mut name = base.to_string();
        let mut i = 2;
        while self.used.contains(&name) {
            name = format!("{base}_{i}");
            i += 1;
        }
        self.used.insert(name.clone());
        name
    }

    pub fn prime(&mut self, pred: &str) -> String {
        self.fresh(&format!("{pred}{PRIME_SUFFIX}"))
    }

    pub fn delta(&mut self, pred: &str) -> String {
        self.fresh(&format!("{DELTA_PREFIX}{pred}"))
    }

    /// `t_del_1`, `t_del_2`, …
    pub fn deletion(&mut self) -> String {
        loop {
            self.deletions += 1;
            let name = format!("{DEL_PREFIX}{}", self.deletions);
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_avoids_collisions() {
        let mut g = NameGen::new(["tc_prime".to_string()]);
        assert_eq!(g.prime("tc"), "tc_prime_2");
        assert_eq!(g.prime("tc"), "tc_prime_3");
        assert_eq!(g.delta("tc"), "delta_tc");
        assert_eq!(g.deletion(), "t_del_1");
        assert_eq!(g.deletion(), "t_del_2");
    }

    #[test]
    fn reserved_names() {
        assert!(check_reserved(["arc", "tc"]).is_ok());
        assert!(check_reserved(["delta_tc"]).is_err());
        assert!(check_reserved(["arc_prime"]).is_err());
        assert!(check_reserved(["r_hat"]).is_err());
    }
}
