//! Structural invariants over randomly generated cases.

use std::collections::BTreeMap;

use proptest::prelude::*;
use swp_core::logic::theta_subsumes;
use swp_core::oracle::{eval_sentence, exec_update, generate_case, GenConfig, Universe};
use swp_core::relational::{rewrite_swp, DropReason, SwpOptions};
use swp_core::syntax::{normalize_update, parse_formula, parse_update};

fn universe() -> Universe {
    let rels: BTreeMap<String, usize> = [("p".to_string(), 1), ("q".to_string(), 1), ("e".to_string(), 2)].into();
    Universe::new(["a", "b", "c"].map(String::from), &rels).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_cases_reparse(seed in any::<u64>()) {
        let (_, u, c) = generate_case(&GenConfig::with_seed(seed));
        prop_assert_eq!(parse_update(&u.to_string()).unwrap(), u);
        prop_assert_eq!(parse_formula(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn execution_is_deterministic(seed in any::<u64>()) {
        let (db, u, _) = generate_case(&GenConfig::with_seed(seed));
        let a = exec_update(&u, &db).unwrap();
        let b = exec_update(&u, &db).unwrap();
        prop_assert!(a.same_facts(&b));
    }

    #[test]
    fn delete_undoes_fresh_insert(seed in any::<u64>(), x in 0usize..3, y in 0usize..3) {
        let (db, _, _) = generate_case(&GenConfig::with_seed(seed));
        let (x, y) = (["a", "b", "c"][x], ["a", "b", "c"][y]);
        prop_assume!(!db.contains("e", &[x.to_string(), y.to_string()]));
        let u = parse_update(&format!("insert e({x},{y}) ; delete e({x},{y})")).unwrap();
        prop_assert!(exec_update(&u, &db).unwrap().same_facts(&db));
    }

    #[test]
    fn compiled_and_interpreted_evaluation_agree(seed in any::<u64>(), state in 0u128..(1 << 15)) {
        let (_, u, c) = generate_case(&GenConfig::with_seed(seed));
        let uni = universe();
        let db = uni.decode(state);
        // The interpreter quantifies over the active domain, so pin it to the universe.
        let mut full = db.clone();
        full.declare("dom", 1).unwrap();
        for k in ["a", "b", "c"] {
            full.insert("dom", vec![k.to_string()]).unwrap();
        }
        prop_assert_eq!(eval_sentence(&c, &full), uni.compile(&c).unwrap().eval(&uni, state));
        let next = uni.compile_update(&u).unwrap().exec(&uni, state);
        let mut post = exec_update(&u, &full).unwrap();
        post.remove_relation("dom");
        prop_assert!(post.same_facts(&uni.decode(next)));
    }

    #[test]
    fn drops_are_justified_and_steps_bounded(seed in any::<u64>()) {
        let (_, u, c) = generate_case(&GenConfig::with_seed(seed));
        let n = normalize_update(&u).unwrap();
        let r = rewrite_swp(&n, &c, &SwpOptions::default()).unwrap();
        prop_assert!(r.steps <= r.bound, "steps {} > bound {}", r.steps, r.bound);
        let clauses = c.universal_matrix().unwrap().to_clauses();
        for d in &r.dropped {
            match &d.reason {
                DropReason::Tautology => prop_assert!(d.clause.is_tautology()),
                DropReason::SubsumedByConstraint(by) => {
                    prop_assert!(clauses.contains(by));
                    prop_assert!(theta_subsumes(by, &d.clause));
                }
                DropReason::SubsumedByConjunct(by) => prop_assert!(theta_subsumes(by, &d.clause)),
            }
        }
    }
}
