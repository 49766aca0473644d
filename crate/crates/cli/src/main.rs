use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use swp_core::datalog::Program;
use swp_core::db::Database;
use swp_core::deductive::{
    check_reserved, delta_for_update, exec_deductive, prime_program, wp_deductive, DeductiveState, DeltaOptions,
};
use swp_core::error::Error;
use swp_core::logic::Formula;
use swp_core::oracle::{
    equiv_bruteforce, eval_sentence, exec_update, generate_case, par, GenConfig, Universe, Verdict,
};
use swp_core::relational::{rewrite_swp, wp_full_normalized, Strategy, SwpOptions};
use swp_core::syntax::{normalize_update, parse_database, parse_formula, parse_program, parse_update, Update};

/// Writes to stdout; a closed pipe ends the process quietly.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

macro_rules! out {
    ($($t:tt)*) => { emit(&format!($($t)*)) };
}

macro_rules! outln {
    ($($t:tt)*) => { emit(&(format!($($t)*) + "\n")) };
}

#[derive(Parser)]
#[command(name = "swp", version, about = "Weakest preconditions for database integrity constraints")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the weakest precondition of a constraint under an update.
    Wp {
        constraint: PathBuf,
        update: PathBuf,
        /// Datalog rules; switches to the deductive construction.
        #[arg(long)]
        program: Option<PathBuf>,
    },
    /// Print the simplified weakest precondition and the dropped clauses.
    Swp {
        constraint: PathBuf,
        update: PathBuf,
        #[command(flatten)]
        rw: RewriteArgs,
        /// Print every rewrite step.
        #[arg(long)]
        trace: bool,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Execute an update and print the post-state.
    Exec {
        update: PathBuf,
        db: PathBuf,
        #[arg(long)]
        program: Option<PathBuf>,
    },
    /// Decide whether a database satisfies the precondition.
    Check {
        constraint: PathBuf,
        update: PathBuf,
        db: PathBuf,
        #[arg(long)]
        program: Option<PathBuf>,
        /// Cross-check against execution and certify by enumeration.
        #[arg(long)]
        verify: bool,
        /// Fresh constants added to the enumeration domain.
        #[arg(long, default_value_t = 1)]
        extra_constants: usize,
        #[command(flatten)]
        rw: RewriteArgs,
    },
    /// Print the program extended with primed copies for a predicate.
    Prime { program: PathBuf, predicate: String },
    /// Print the delta program and its precondition for an insertion.
    Delta {
        program: PathBuf,
        constraint: PathBuf,
        update: PathBuf,
        /// Keep rules the pruning pass would remove.
        #[arg(long)]
        no_prune: bool,
    },
    /// Check the relational properties on generated cases.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: u64,
        #[command(flatten)]
        rw: RewriteArgs,
    },
}

#[derive(Args, Clone)]
struct RewriteArgs {
    /// Cap on generated conjuncts.
    #[arg(long, default_value_t = 10_000)]
    max_conjuncts: usize,
    /// Random redex selection with this seed instead of leftmost-innermost.
    #[arg(long)]
    random_order: Option<u64>,
}

impl RewriteArgs {
    fn options(&self, trace: bool) -> SwpOptions {
        SwpOptions {
            max_conjuncts: self.max_conjuncts,
            trace,
            strategy: self.random_order.map_or(Strategy::LeftmostInnermost, Strategy::Random),
            ..SwpOptions::default()
        }
    }
}

/// A property violation, reported with exit status 2.
#[derive(Debug)]
struct Violation(String);

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Violation {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            return err.exit_code() as u8;
        }
        if cause.is::<Violation>() {
            return 2;
        }
    }
    1
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load<T>(path: &Path, parse: impl Fn(&str) -> swp_core::error::Result<T>) -> Result<T> {
    let text = read(path)?;
    parse(&text).with_context(|| format!("in {}", path.display()))
}

fn reserved(path: &Path, preds: impl IntoIterator<Item = String>) -> Result<()> {
    let names: Vec<String> = preds.into_iter().collect();
    check_reserved(names.iter().map(String::as_str)).with_context(|| format!("in {}", path.display()))
}

fn load_constraint(path: &Path) -> Result<Formula> {
    let f = load(path, parse_formula)?;
    reserved(path, f.predicates().into_keys())?;
    Ok(f)
}

fn load_update(path: &Path) -> Result<Update> {
    let u = load(path, parse_update)?;
    reserved(path, u.predicates().into_keys())?;
    Ok(u)
}

fn load_program(path: &Path) -> Result<Program> {
    let p = load(path, parse_program)?;
    reserved(path, p.predicates())?;
    Ok(p)
}

fn load_db(path: &Path) -> Result<Database> {
    let db = load(path, parse_database)?;
    reserved(path, db.relations().map(|(r, _)| r.clone()))?;
    Ok(db)
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Wp {
            constraint,
            update,
            program,
        } => {
            let c = load_constraint(&constraint)?;
            let u = load_update(&update)?;
            match program {
                None => {
                    let n = normalize_update(&u)?;
                    outln!("{}", wp_full_normalized(&n, &c)?);
                }
                Some(p) => {
                    let p = load_program(&p)?;
                    let w = wp_deductive(&u, &c, &p)?;
                    for r in &w.added {
                        outln!("{r}");
                    }
                    outln!("wp: {}", w.formula);
                }
            }
        }
        Cmd::Swp {
            constraint,
            update,
            rw,
            trace,
            json,
        } => {
            let c = load_constraint(&constraint)?;
            let n = normalize_update(&load_update(&update)?)?;
            let report = rewrite_swp(&n, &c, &rw.options(trace))?;
            if json {
                outln!("{}", serde_json::to_string_pretty(&report.json())?);
            } else {
                if trace {
                    for s in &report.trace {
                        outln!("[{}] {}: {}  =>  {}", s.step, s.rule, s.redex, s.result);
                    }
                }
                out!("{report}");
            }
        }
        Cmd::Exec { update, db, program } => {
            let u = load_update(&update)?;
            let b = load_db(&db)?;
            match program {
                None => out!("{}", exec_update(&u, &b)?),
                Some(p) => {
                    let p = load_program(&p)?;
                    let post = exec_deductive(&u, &DeductiveState::new(p.clone(), b))?;
                    for q in p.idb().difference(&post.program.idb()) {
                        eprintln!("note: rules for `{q}` replaced by its stored extension");
                    }
                    out!("{}", post.facts);
                }
            }
        }
        Cmd::Check {
            constraint,
            update,
            db,
            program,
            verify,
            extra_constants,
            rw,
        } => {
            let c = load_constraint(&constraint)?;
            let u = load_update(&update)?;
            let b = load_db(&db)?;
            match program {
                None => check_relational(&c, &u, &b, verify, extra_constants, &rw)?,
                Some(p) => check_deductive(&c, &u, &b, &load_program(&p)?, verify)?,
            }
        }
        Cmd::Prime { program, predicate } => {
            let p = load_program(&program)?;
            out!("{}", prime_program(&p, &predicate)?.program);
        }
        Cmd::Delta {
            program,
            constraint,
            update,
            no_prune,
        } => {
            let p = load_program(&program)?;
            let c = load_constraint(&constraint)?;
            let u = load_update(&update)?;
            out!("{}", delta_for_update(&p, &u, &c, &DeltaOptions { prune: !no_prune })?);
        }
        Cmd::Fuzz { seed, cases, rw } => fuzz(seed, cases, &rw)?,
    }
    Ok(())
}

fn check_relational(c: &Formula, u: &Update, b: &Database, verify: bool, extra: usize, rw: &RewriteArgs) -> Result<()> {
    let n = normalize_update(u)?;
    let report = rewrite_swp(&n, c, &rw.options(false))?;
    let swp = report.swp_formula();
    let closed = Formula::forall(c.free_vars(), c.clone());
    let pre = eval_sentence(&closed, b);
    let swp_holds = eval_sentence(&swp, b);
    outln!("constraint holds: {pre}");
    outln!("swp holds: {swp_holds}");
    if !pre {
        outln!("% swp decides the post-state only when the constraint holds");
    }
    if !verify {
        return Ok(());
    }
    let post = eval_sentence(&closed, &exec_update(u, b)?);
    let wp = wp_full_normalized(&n, c)?;
    let wp_holds = eval_sentence(&wp, b);
    outln!("post-state satisfies constraint: {post}");
    outln!("wp holds: {wp_holds}");
    if wp_holds != post {
        return Err(Violation(format!("wp disagrees with execution on this database: wp {wp_holds}, post {post}")).into());
    }
    if pre && swp_holds != post {
        return Err(Violation(format!("swp disagrees with execution: swp {swp_holds}, post {post}")).into());
    }
    let left = Formula::And(vec![closed.clone(), swp]);
    let right = Formula::And(vec![closed, wp]);
    match equiv_bruteforce(&left, &right, extra)? {
        Verdict::Equivalent { instances } => {
            outln!("certified: constraint & swp == constraint & wp on {instances} databases");
            Ok(())
        }
        Verdict::Counterexample { db, .. } => {
            out!("counterexample:\n{db}");
            Err(Violation("constraint & swp differs from constraint & wp".into()).into())
        }
    }
}

fn check_deductive(c: &Formula, u: &Update, b: &Database, p: &Program, verify: bool) -> Result<()> {
    let state = DeductiveState::new(p.clone(), b.clone());
    let w = wp_deductive(u, c, p)?;
    let pre = state.satisfies(c)?;
    let wp_holds = DeductiveState::new(w.program.clone(), b.clone()).satisfies(&w.formula)?;
    outln!("constraint holds: {pre}");
    outln!("wp holds: {wp_holds}");
    if verify {
        let post = exec_deductive(u, &state)?.satisfies(c)?;
        outln!("post-state satisfies constraint: {post}");
        if post != wp_holds {
            bail!(Violation(format!("wp disagrees with execution: wp {wp_holds}, post {post}")));
        }
    }
    Ok(())
}

#[derive(Default)]
struct FuzzOutcome {
    violation: Option<String>,
    blow_up: bool,
    steps: u64,
    bound: u64,
}

fn fuzz_case(seed: u64, rw: &RewriteArgs) -> Result<FuzzOutcome> {
    let cfg = GenConfig::with_seed(seed);
    let (_, u, c) = generate_case(&cfg);
    let n = normalize_update(&u)?;
    let report = match rewrite_swp(&n, &c, &rw.options(false)) {
        Ok(r) => r,
        Err(Error::BlowUp { .. }) => {
            return Ok(FuzzOutcome {
                blow_up: true,
                ..FuzzOutcome::default()
            })
        }
        Err(e) => return Err(e.into()),
    };
    let mut out = FuzzOutcome {
        steps: report.steps,
        bound: report.bound,
        ..FuzzOutcome::default()
    };
    if report.steps > report.bound {
        out.violation = Some(format!("seed {seed}: {} steps exceed the bound {}", report.steps, report.bound));
        return Ok(out);
    }
    let wp = wp_full_normalized(&n, &c)?;
    let swp = report.swp_formula();
    let rels: BTreeMap<String, usize> = cfg.relations.iter().cloned().collect();
    let uni = Universe::new(cfg.constants(), &rels)?;
    let (cu, cc, cwp, cswp) = (uni.compile_update(&u)?, uni.compile(&c)?, uni.compile(&wp)?, uni.compile(&swp)?);
    let bad = (0..uni.instance_count()).find(|&s| {
        let post = cc.eval(&uni, cu.exec(&uni, s));
        let wp_v = cwp.eval(&uni, s);
        let swp_v = cswp.eval(&uni, s);
        wp_v != post || (wp_v && !swp_v) || (cc.eval(&uni, s) && swp_v != post)
    });
    if let Some(s) = bad {
        out.violation = Some(format!(
            "seed {seed}\n% update: {u}\n% constraint: {c}\n% wp: {wp}\n% swp: {swp}\n{}",
            uni.decode(s)
        ));
    }
    Ok(out)
}

fn fuzz(seed: u64, cases: u64, rw: &RewriteArgs) -> Result<()> {
    let seeds: Vec<u64> = (seed..seed.saturating_add(cases)).collect();
    let results = par::map_collect(&seeds, |&s| fuzz_case(s, rw));
    let mut blow_ups = 0;
    let mut max_ratio = 0.0f64;
    let mut violations = Vec::new();
    for r in results {
        let r = r?;
        blow_ups += r.blow_up as usize;
        if r.bound > 0 {
            max_ratio = max_ratio.max(r.steps as f64 / r.bound as f64);
        }
        violations.extend(r.violation);
    }
    outln!("cases: {cases}");
    outln!("violations: {}", violations.len());
    outln!("blow-up cap hits: {blow_ups}");
    outln!("max steps/bound: {max_ratio:.3}");
    if let Some(v) = violations.first() {
        outln!("first violation: {v}");
        bail!(Violation(format!("{} property violations", violations.len())));
    }
    Ok(())
}
