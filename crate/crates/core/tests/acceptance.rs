//! Acceptance gate: one PASS/FAIL line per criterion.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swp_core::datalog::{evaluate, Program};
use swp_core::db::Database;
use swp_core::deductive::{
    delta_for_update, delta_qualified_insert, delta_saturation, wp_deductive, DeltaOptions, DeltaVerdict,
};
use swp_core::error::Error;
use swp_core::logic::{res_r, Atom, Clause, Formula, Term};
use swp_core::oracle::{eval_sentence, generate_case, par, universe_for, GenConfig, Universe};
use swp_core::relational::{check_confluence_sample, rewrite_swp, wp_full_normalized, SwpOptions};
use swp_core::syntax::{normalize_update, parse_clause, parse_formula, parse_program, parse_update, Update};

type Outcome = Result<String, String>;

fn f(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

fn cl(s: &str) -> Clause {
    parse_clause(s).unwrap()
}

fn same_clauses(got: &[Clause], want: &[&str]) -> bool {
    let want: Vec<Clause> = want.iter().map(|s| cl(s)).collect();
    got.len() == want.len()
        && got.iter().all(|g| want.iter().any(|w| w.is_variant(g)))
        && want.iter().all(|w| got.iter().any(|g| g.is_variant(w)))
}

/// Renames variables (capitalised identifiers) in first-occurrence order.
fn canon_rule(text: &str) -> String {
    let mut names: BTreeMap<String, String> = BTreeMap::new();
    let mut out = String::new();
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String, names: &mut BTreeMap<String, String>| {
        if word.starts_with(|c: char| c.is_ascii_uppercase()) {
            let n = names.len();
            out.push_str(names.entry(word.clone()).or_insert_with(|| format!("V{n}")));
        } else {
            out.push_str(word);
        }
        word.clear();
    };
    for ch in text.chars().filter(|c| !c.is_whitespace()) {
        if ch.is_alphanumeric() || ch == '_' || ch == '\'' {
            word.push(ch);
        } else {
            flush(&mut word, &mut out, &mut names);
            out.push(ch);
        }
    }
    flush(&mut word, &mut out, &mut names);
    out
}

fn same_rules<T: ToString>(got: &[T], want: &str) -> bool {
    let got: BTreeSet<String> = got.iter().map(|r| canon_rule(&r.to_string())).collect();
    let want: BTreeSet<String> = want
        .split('.')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| canon_rule(&format!("{s}.")))
        .collect();
    got == want
}

fn swp_of(u: &str, c: &str) -> swp_core::relational::SwpReport {
    let n = normalize_update(&parse_update(u).unwrap()).unwrap();
    rewrite_swp(&n, &f(c), &SwpOptions::default()).unwrap()
}

fn wp_of(u: &str, c: &str) -> Formula {
    let n = normalize_update(&parse_update(u).unwrap()).unwrap();
    wp_full_normalized(&n, &f(c)).unwrap()
}

fn check(ok: bool, what: &str, failures: &mut Vec<String>) {
    if !ok {
        failures.push(what.to_string());
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    let ins_p = "foreach X: p(X) do insert r(X)";
    check(wp_of(ins_p, "!r(X) | q(X)") == f("forall X: !(r(X) | p(X)) | q(X)"), "wp of a single insertion", &mut bad);
    check(
        wp_of(&format!("foreach X: s(X) do delete r(X) ; {ins_p}"), "!r(X) | q(X)")
            == f("forall X: !(r(X) & !s(X) | p(X)) | q(X)"),
        "wp of delete then insert",
        &mut bad,
    );
    check(
        same_clauses(&swp_of(ins_p, "!r(X) | q(X)").swp_clauses().into_iter().cloned().collect::<Vec<_>>(), &["!p(X) | q(X)"]),
        "simplified wp of a single insertion",
        &mut bad,
    );
    check(
        same_clauses(&res_r(&[cl("!r(X,Y) | q(Y,Z)"), cl("r(X,Y) | !q(X,Y)")], "r"), &["q(Y,Z) | !q(X,Y)"]),
        "resolvents of the two-clause set",
        &mut bad,
    );
    check(
        same_clauses(
            &res_r(&[cl("!r(X,Y) | !r(X,Z) | q(Y,Z)"), cl("r(X,Y) | (X,Y) != (a,b)")], "r"),
            &["!r(a,Z) | q(b,Z)", "!r(a,Y) | q(Y,b)"],
        ),
        "resolvents with a tuple disequality",
        &mut bad,
    );
    check(swp_of("insert p(a,a)", "!p(X,Y) | !q(Y,Z) | p(X,Z) | q(X,Z)").is_true(), "tautological resolvent gives true", &mut bad);
    let seq = swp_of(&format!("foreach X: s(X) do delete r(X) ; {ins_p}"), "!r(X) | q(X)");
    check(
        same_clauses(&seq.swp_clauses().into_iter().cloned().collect::<Vec<_>>(), &["!p(X) | q(X)"]) && seq.swp.len() == 1,
        "simplified wp of delete then insert",
        &mut bad,
    );
    let fd = swp_of("insert p(a,b)", "!p(X,Y) | !p(X,Z) | q(Y,Z)");
    check(
        fd.swp.len() == 3
            && same_clauses(
                &fd.swp_clauses().into_iter().cloned().collect::<Vec<_>>(),
                &["q(b,b)", "!p(a,Z) | q(b,Z)", "!p(a,Y) | q(Y,b)"],
            ),
        "three-conjunct simplified wp",
        &mut bad,
    );

    let p4 = parse_program(
        "tc(X,Y) :- arc(X,Y). tc(X,Y) :- arc(X,Z), tc(Z,Y). path(X,Y) :- edge(X,Y).
         path(X,Y) :- edge(X,Z), path(Z,Y). i(X,Y) :- body(X,Y).",
    )
    .unwrap();
    let u4 = parse_update("foreach X,Y: path(X,Y) do insert tc(X,Y)").unwrap();
    let w4 = wp_deductive(&u4, &f("forall X,Y: !tc(X,Y) | i(X,Y)"), &p4).unwrap();
    check(
        same_rules(
            &w4.added,
            "tc_prime(X,Y) :- arc(X,Y). tc_prime(X,Y) :- arc(X,Z), tc_prime(Z,Y).
             tc_prime(X,Y) :- tc(X,Y). tc_prime(X,Y) :- path(X,Y).",
        ) && w4.formula == f("forall X,Y: !tc_prime(X,Y) | i(X,Y)"),
        "primed program and wp for insert into tc",
        &mut bad,
    );

    let p6 = parse_program("tc(X,Y) :- arc(X,Y). tc(X,Y) :- arc(X,Z), tc(Z,Y).").unwrap();
    let c6 = f("!exists X: tc(X,X)");
    let arc = parse_update("insert arc(d,b)").unwrap();
    let d6 = delta_saturation(&p6, &[Atom::new("arc", vec![Term::constant("d"), Term::constant("b")])], &c6, &DeltaOptions::default());
    match d6 {
        Ok(d) => check(
            same_rules(
                &d.rules.iter().map(|r| &r.rule).collect::<Vec<_>>(),
                "delta_tc(d,b). delta_tc(d,Y) :- tc(b,Y). delta_tc(X,Y) :- arc(X,Z), delta_tc(Z,Y).",
            ) && d.wp == f("!exists X: delta_tc(X,X)"),
            "delta program for a single arc insertion",
            &mut bad,
        ),
        Err(e) => bad.push(format!("delta program for a single arc insertion: {e}")),
    }
    let w6 = wp_deductive(&arc, &c6, &p6).unwrap();
    check(
        same_rules(
            &w6.added,
            "arc_prime(X,Y) :- arc(X,Y). arc_prime(d,b).
             tc_prime(X,Y) :- arc_prime(X,Y). tc_prime(X,Y) :- arc_prime(X,Z), tc_prime(Z,Y).",
        ) && w6.formula == f("!exists X: tc_prime(X,X)"),
        "primed program for a single arc insertion",
        &mut bad,
    );
    let pq = parse_program(
        "tc(X,Y) :- arc(X,Y). tc(X,Y) :- arc(X,Z), tc(Z,Y). path(X,Y) :- edge(X,Y). path(X,Y) :- edge(X,Z), path(Z,Y).",
    )
    .unwrap();
    let Update::Foreach(fe) = u4 else { unreachable!() };
    let dq = delta_qualified_insert(&pq, &fe, &c6).unwrap();
    check(
        same_rules(
            &dq.rules.iter().map(|r| &r.rule).collect::<Vec<_>>(),
            "delta_tc(X,Y) :- edge(X,Y). delta_tc(X,Y) :- edge(X,Z), tc(Z,Y).
             delta_tc(X,Y) :- edge(X,Z), delta_tc(Z,Y). delta_tc(X,Y) :- arc(X,Z), delta_tc(Z,Y).",
        ) && dq.wp == f("!exists X: delta_tc(X,X)"),
        "delta program for the qualified insertion (four displayed rules)",
        &mut bad,
    );
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 1.0 {
        bad.push(format!("took {elapsed:.2}s"));
    }
    if bad.is_empty() {
        Ok(format!("13 golden checks in {elapsed:.3}s"))
    } else {
        Err(bad.join("; "))
    }
}

fn small_universe() -> Universe {
    let rels: BTreeMap<String, usize> = [("p".to_string(), 1), ("q".to_string(), 1), ("e".to_string(), 2)].into();
    Universe::new(["a", "b", "c"].map(String::from), &rels).unwrap()
}

struct CorpusStats {
    pairs: usize,
    wp_violations: Vec<String>,
    swp_violations: Vec<String>,
    weaker_violations: Vec<String>,
    bound_violations: Vec<String>,
    blow_ups: usize,
    max_ratio: f64,
    seconds: f64,
}

fn corpus(pairs: u64) -> CorpusStats {
    let start = Instant::now();
    let uni = small_universe();
    let total = uni.instance_count() as u64;
    let mut s = CorpusStats {
        pairs: pairs as usize,
        wp_violations: vec![],
        swp_violations: vec![],
        weaker_violations: vec![],
        bound_violations: vec![],
        blow_ups: 0,
        max_ratio: 0.0,
        seconds: 0.0,
    };
    for seed in 0..pairs {
        let cfg = GenConfig::with_seed(seed);
        let (_, u, c) = generate_case(&cfg);
        let n = normalize_update(&u).unwrap();
        let wp = wp_full_normalized(&n, &c).unwrap();
        let report = match rewrite_swp(&n, &c, &SwpOptions::default()) {
            Ok(r) => r,
            Err(Error::BlowUp { .. }) => {
                s.blow_ups += 1;
                continue;
            }
            Err(e) => panic!("seed {seed}: {e}"),
        };
        if report.steps > report.bound {
            s.bound_violations.push(format!("seed {seed}"));
        }
        if report.bound > 0 {
            s.max_ratio = s.max_ratio.max(report.steps as f64 / report.bound as f64);
        }
        let swp = report.swp_formula();
        let (cu, cc, cwp, cswp) = (
            uni.compile_update(&u).unwrap(),
            uni.compile(&c).unwrap(),
            uni.compile(&wp).unwrap(),
            uni.compile(&swp).unwrap(),
        );
        let show = |st: u64| format!("seed {seed} on\n{}", uni.decode(st as u128));
        if let Some(st) = par::find_first(total, |st| cwp.eval(&uni, st as u128) != cc.eval(&uni, cu.exec(&uni, st as u128))) {
            s.wp_violations.push(show(st));
        }
        if let Some(st) = par::find_first(total, |st| {
            let st = st as u128;
            cc.eval(&uni, st) && cswp.eval(&uni, st) != cc.eval(&uni, cu.exec(&uni, st))
        }) {
            s.swp_violations.push(show(st));
        }
        if let Some(st) = par::find_first(total, |st| cwp.eval(&uni, st as u128) && !cswp.eval(&uni, st as u128)) {
            s.weaker_violations.push(show(st));
        }
    }
    s.seconds = start.elapsed().as_secs_f64();
    s
}

fn criterion_2(s: &CorpusStats) -> Outcome {
    if s.wp_violations.is_empty() && s.blow_ups == 0 {
        Ok(format!(
            "{} pairs x 32768 databases, 0 violations, {:.1}s (target < 60s)",
            s.pairs, s.seconds
        ))
    } else {
        Err(format!("{} violations, first: {:?}", s.wp_violations.len(), s.wp_violations.first()))
    }
}

/// A database satisfying the simplified precondition (true) but not the
/// full one, for the tautological-resolvent constraint.
fn strictness_witness() -> Option<Database> {
    let u = "insert p(a,a)";
    let c = "!p(X,Y) | !q(Y,Z) | p(X,Z) | q(X,Z)";
    if !swp_of(u, c).is_true() {
        return None;
    }
    let wp = wp_of(u, c);
    let uni = universe_for(&[&wp], 1).ok()?;
    let cw = uni.compile(&wp).ok()?;
    (0..uni.instance_count()).find(|&st| !cw.eval(&uni, st)).map(|st| uni.decode(st))
}

fn criterion_3(s: &CorpusStats) -> Outcome {
    let witness = strictness_witness();
    if !s.swp_violations.is_empty() {
        return Err(format!("swp violations: {:?}", s.swp_violations.first()));
    }
    if !s.weaker_violations.is_empty() {
        return Err(format!("wp does not imply swp: {:?}", s.weaker_violations.first()));
    }
    match witness {
        Some(db) => Ok(format!(
            "{} pairs, 0 violations; witness with swp true and wp false: {}",
            s.pairs,
            db.to_string().split_whitespace().collect::<Vec<_>>().join(" ")
        )),
        None => Err("no strictness witness found".into()),
    }
}

fn criterion_4() -> Outcome {
    let mut semantic = 0;
    for seed in 0..100u64 {
        let (_, u, c) = generate_case(&GenConfig::with_seed(seed));
        let n = normalize_update(&u).unwrap();
        match check_confluence_sample(&n, &c, 10, seed * 1000, 1) {
            Ok(swp_core::relational::ConfluenceVerdict::Confluent {
                checked_semantically, ..
            }) => semantic += checked_semantically,
            Ok(v) => return Err(format!("seed {seed}: {v}")),
            Err(e) => return Err(format!("seed {seed}: {e}")),
        }
    }
    Ok(format!("100 pairs x 10 orders, 0 divergences ({semantic} results certified by enumeration)"))
}

fn criterion_5(s: &CorpusStats) -> Outcome {
    let k = 14;
    let (u, c) = negative_family(k);
    let n = normalize_update(&parse_update(&u).unwrap()).unwrap();
    let family_hits = matches!(rewrite_swp(&n, &f(&c), &SwpOptions::default()), Err(Error::BlowUp { .. }));
    if !s.bound_violations.is_empty() {
        return Err(format!("bound exceeded: {:?}", s.bound_violations));
    }
    if s.blow_ups > 0 {
        return Err(format!("{} cap hits on the corpus", s.blow_ups));
    }
    if !family_hits {
        return Err("the constructed blow-up family did not hit the cap".into());
    }
    Ok(format!(
        "{} pairs within the structural bound (max steps/bound {:.2}), 0 cap hits; the constructed family at k = {k} hits the cap",
        s.pairs, s.max_ratio
    ))
}

fn node(i: usize) -> String {
    format!("n{i}")
}

fn acyclic_graph(rng: &mut ChaCha8Rng, nodes: usize, rel: &str, density: f64, db: &mut Database) {
    let mut perm: Vec<usize> = (0..nodes).collect();
    for i in (1..nodes).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    db.declare(rel, 2).unwrap();
    for i in 0..nodes {
        for j in i + 1..nodes {
            if rng.gen_bool(density) {
                db.insert(rel, vec![node(perm[i]), node(perm[j])]).unwrap();
            }
        }
    }
}

fn holds(p: &Program, f: &Formula, db: &Database) -> bool {
    eval_sentence(f, &evaluate(p, db).unwrap())
}

fn delta_agrees(p: &Program, u: &Update, c: &Formula, db: &Database) -> Result<(), String> {
    let d = delta_for_update(p, u, c, &DeltaOptions::default()).map_err(|e| e.to_string())?;
    let w = wp_deductive(u, c, p).map_err(|e| e.to_string())?;
    let delta_ok = d.verdict == DeltaVerdict::Safe || holds(&d.program, &d.wp, db);
    if delta_ok == holds(&w.program, &w.formula, db) {
        Ok(())
    } else {
        Err(format!("update {u}; replay with:\n{db}"))
    }
}

fn criterion_6() -> Outcome {
    let c = f("!exists X: tc(X,X)");
    let p6 = parse_program("tc(X,Y) :- arc(X,Y). tc(X,Y) :- arc(X,Z), tc(Z,Y).").unwrap();
    let p4 = parse_program(
        "tc(X,Y) :- arc(X,Y). tc(X,Y) :- arc(X,Z), tc(Z,Y). path(X,Y) :- edge(X,Y). path(X,Y) :- edge(X,Z), path(Z,Y).",
    )
    .unwrap();
    let qualified = parse_update("foreach X,Y: path(X,Y) do insert tc(X,Y)").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut fired = 0;
    for _ in 0..200 {
        let nodes = rng.gen_range(2..=8);
        let mut db = Database::new();
        acyclic_graph(&mut rng, nodes, "arc", 0.3, &mut db);
        let (a, b) = (node(rng.gen_range(0..nodes)), node(rng.gen_range(0..nodes)));
        let ins = parse_update(&format!("insert arc({a},{b})")).unwrap();
        let w = wp_deductive(&ins, &c, &p6).unwrap();
        fired += !holds(&w.program, &w.formula, &db) as usize;
        delta_agrees(&p6, &ins, &c, &db)?;
        db.declare("edge", 2).unwrap();
        for _ in 0..rng.gen_range(0..=3) {
            let (x, y) = (node(rng.gen_range(0..nodes)), node(rng.gen_range(0..nodes)));
            db.insert("edge", vec![x, y]).unwrap();
        }
        delta_agrees(&p4, &qualified, &c, &db)?;
    }
    Ok(format!(
        "200 acyclic graphs x 2 settings, 0 disagreements ({fired} single insertions create a cycle)"
    ))
}

fn negative_family(k: usize) -> (String, String) {
    let xs: Vec<String> = (1..=k).map(|i| format!("X{i}")).collect();
    let negs: Vec<String> = xs.iter().map(|x| format!("!r({x})")).collect();
    ("foreach Y: p(Y) do insert r(Y)".into(), format!("{} | q({})", negs.join(" | "), xs.join(",")))
}

fn positive_family(k: usize) -> (String, String) {
    let xs: Vec<String> = (1..=k).map(|i| format!("X{i}")).collect();
    let pos: Vec<String> = xs.iter().map(|x| format!("r({x})")).collect();
    ("foreach Y: p(Y) do insert r(Y)".into(), format!("{} | !q({})", pos.join(" | "), xs.join(",")))
}

fn family_sizes(family: fn(usize) -> (String, String)) -> Vec<usize> {
    (1..=5)
        .map(|k| {
            let (u, c) = family(k);
            swp_of(&u, &c).full.size()
        })
        .collect()
}

fn criterion_7() -> Outcome {
    let neg = family_sizes(negative_family);
    let pos = family_sizes(positive_family);
    let geometric = neg.windows(2).all(|w| w[1] as f64 >= 1.5 * w[0] as f64);
    // Least-squares line through (k, size).
    let n = pos.len() as f64;
    let ks: Vec<f64> = (1..=pos.len()).map(|k| k as f64).collect();
    let ys: Vec<f64> = pos.iter().map(|&y| y as f64).collect();
    let (mk, my) = (ks.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = ks.iter().zip(&ys).map(|(k, y)| (k - mk) * (y - my)).sum::<f64>()
        / ks.iter().map(|k| (k - mk).powi(2)).sum::<f64>();
    let fit = |k: f64| my + slope * (k - mk);
    let linear = slope > 0.0 && ks.iter().zip(&ys).all(|(&k, &y)| y <= 2.0 * fit(k) && y >= fit(k) / 2.0);
    let detail = format!("negative family sizes {neg:?}, positive family sizes {pos:?}");
    if geometric && linear {
        Ok(detail)
    } else {
        Err(format!("{detail} (geometric: {geometric}, linear: {linear})"))
    }
}

fn criterion_8() -> Outcome {
    let reach = parse_program("tc(X,Y) :- arc(X,Y). tc(X,Y) :- arc(X,Z), tc(Z,Y). reach(X) :- tc(a,X).").unwrap();
    let h2 = parse_update("foreach X,Y: reach(X) & arc(X,Y) do insert tc(X,Y)").unwrap();
    let c = f("!exists X: tc(X,X)");
    let e1 = wp_deductive(&h2, &c, &reach).err().ok_or("H2 violation accepted")?;
    let nonlinear = parse_program("tc(X,Y) :- arc(X,Y). tc(X,Y) :- tc(X,Z), tc(Z,Y).").unwrap();
    let ins = parse_update("insert arc(d,b)").unwrap();
    let e2 = delta_for_update(&nonlinear, &ins, &c, &DeltaOptions::default())
        .err()
        .ok_or("non-linear program accepted")?;
    let (m1, m2) = (e1.to_string(), e2.to_string());
    if e1.exit_code() == 3 && e2.exit_code() == 3 && m1.contains("H2") && m2.contains("linear") {
        Ok(format!("exit 3: \"{m1}\"; exit 3: \"{m2}\""))
    } else {
        Err(format!("got exit {} \"{m1}\" and exit {} \"{m2}\"", e1.exit_code(), e2.exit_code()))
    }
}

#[test]
fn acceptance() {
    let start = Instant::now();
    let stats = corpus(500);
    let corpus_time = start.elapsed().as_secs_f64();
    let criteria: Vec<(u8, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, "golden reproduction of the reference cases", Box::new(criterion_1)),
        (2, "weakest-precondition property", Box::new(|| criterion_2(&stats))),
        (3, "simplified precondition property", Box::new(|| criterion_3(&stats))),
        (4, "confluence sampling", Box::new(criterion_4)),
        (5, "termination within the structural bound", Box::new(|| criterion_5(&stats))),
        (6, "delta program equivalence", Box::new(criterion_6)),
        (7, "blow-up growth", Box::new(criterion_7)),
        (8, "hypothesis guards", Box::new(criterion_8)),
    ];
    println!("shared corpus of 500 pairs evaluated in {corpus_time:.1}s");
    let mut failed = Vec::new();
    for (n, name, run) in &criteria {
        let t = Instant::now();
        let r = run();
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(d) => println!("criterion {n}: PASS  {name}: {d} [{secs:.1}s]"),
            Err(e) => {
                println!("criterion {n}: FAIL  {name}: {e} [{secs:.1}s]");
                failed.push(*n);
            }
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
