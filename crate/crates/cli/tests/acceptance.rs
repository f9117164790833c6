//! End-to-end acceptance suite. Each criterion prints one `PASS` or `FAIL`
//! line; the process exits non-zero when any criterion fails.

use std::collections::{BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use treesolve::answer::{alpha_equivalent, final_to_general};
use treesolve::basics::{BasicFormula, FlatAtom};
use treesolve::engine::{init_working, Engine, EngineError, EngineOptions, WorkingNode};
use treesolve::normalizer::{normalize, to_normalized};
use treesolve::oracle::{decide_exists, decode_position, k_winning_positions, Position, RationalTree};
use treesolve::syntax::{parse_formula_with, OrderKey, ParseOptions, Symbol, VarContext};
use treesolve::{
    gen_random, gen_winning, parse_formula, solve, Answer, ExplicitSolvedForm, Formula, RandomSpec, SolveOptions,
    SolveStatus, Variable,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn parse_ordered(src: &str, order: &[&str]) -> Formula {
    let opts = ParseOptions {
        free_order: order.iter().map(|s| s.to_string()).collect(),
    };
    parse_formula_with(src, &opts).unwrap()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn answer_of(f: &Formula, opts: &SolveOptions) -> Result<Answer, String> {
    let r = solve(f, opts).map_err(|e| e.to_string())?;
    r.answer.ok_or_else(|| format!("no answer: {:?}", r.status))
}

fn verdict(f: &Formula) -> Result<bool, String> {
    match answer_of(f, &SolveOptions::default())? {
        Answer::True => Ok(true),
        Answer::False => Ok(false),
        other => Err(format!("open answer for a closed formula: {other}")),
    }
}

fn positions(a: &Answer, x: &Variable) -> Result<BTreeSet<Position>, String> {
    a.disjuncts()
        .iter()
        .map(|d| {
            let t = d.ground_value(x).ok_or_else(|| format!("disjunct does not pin x: {d}"))?;
            decode_position(&t).ok_or_else(|| format!("not a game position: {t}"))
        })
        .collect()
}

fn tree(t: &str) -> RationalTree {
    RationalTree::from_term(match &parse_formula(&format!("{t} = {t}")).unwrap() {
        Formula::Eq(s, _) => s,
        _ => unreachable!(),
    })
    .unwrap()
}

const INTRO: &str = "~(ex y. x = f(y) & ~(ex z, w. x = f(z) & w = f(w)))";

const WORKED: &str = "~(ex v1. v1 = f(u1, u2) & u2 = g(u1) & ~(ex w1. v1 = g(w1)) \
                      & ~(ex w2. u2 = g(w2) & w2 = g(u3) & finite(w2)))";
const WORKED_ORDER: &[&str] = &["u1", "u2", "u3"];

const FINAL: &str = "~(v = u & finite(u) & ~(v = u & u = u1 & finite(u1)) & ~(ex w2. v = u & u = s(w2) & finite(w2)))";
const FINAL_GENERAL: &str = "~(v = u & finite(u) & ~(u = u1 & finite(u1)) & ~(ex w2. u = s(w2) & finite(w2)))";
const FINAL_ORDER: &[&str] = &["v", "u", "u1"];

const WINNING_1: &[&str] = &["ex u1, u2. x = c(u1, u2) & u1 = g(u2) & u2 = 0"];
const WINNING_2: &[&str] = &[
    "ex u1, u2. x = c(u1, u2) & u1 = g(u2) & u2 = 0",
    "ex u3, u4, u5, u6. x = c(u3, u6) & u3 = g(u4) & u4 = f(u5) & u5 = g(u6) & u6 = 0",
];

const NORMALIZER_EXAMPLE: &str = "(f(u, v) = f(w, u) & ex x. u = x) | (ex u. all w. u = f(v, w))";

fn worked_tree() -> WorkingNode {
    let f = parse_ordered(WORKED, WORKED_ORDER);
    let mut t = WorkingNode::from_normalized(&to_normalized(&f).unwrap(), 0);
    t.level = 4;
    t
}

fn same_forms(got: &Answer, printed: &[&str]) -> Result<(), String> {
    let want: Vec<ExplicitSolvedForm> = printed
        .iter()
        .map(|s| ExplicitSolvedForm::from_formula(&parse_formula(s).unwrap()).unwrap())
        .collect();
    let got = got.disjuncts();
    ensure!(got.len() == want.len(), "{} disjuncts, expected {}", got.len(), want.len());
    for w in &want {
        ensure!(got.iter().any(|g| alpha_equivalent(g, w)), "missing disjunct {w}");
    }
    Ok(())
}

fn golden() -> Outcome {
    let (a, t) = timed(|| answer_of(&parse_formula(INTRO).unwrap(), &SolveOptions::default()));
    ensure!(a? == Answer::True, "intro formula is not true");
    ensure!(t < Duration::from_secs(1), "intro took {t:?}");

    let (forest, t) = timed(|| {
        let mut e = Engine::new(vec![worked_tree()], EngineOptions::default());
        e.run().map(|_| e.forest())
    });
    let forest = forest.map_err(|e| e.to_string())?;
    ensure!(t < Duration::from_secs(1), "worked example took {t:?}");
    let printed_final = parse_ordered("~(u2 = g(u1) & ~(u2 = g(u1) & u1 = g(u3) & finite(u3)))", WORKED_ORDER);
    let printed_final = WorkingNode::from_normalized(&to_normalized(&printed_final).unwrap(), 5);
    ensure!(forest.len() == 1, "worked example gave {} final formulas", forest.len());
    let root = &forest[0];
    ensure!(
        root.level == 5
            && root.quant.is_empty()
            && root.basic.set_eq(&printed_final.basic)
            && root.children.len() == 1
            && root.children[0].quant.is_empty()
            && root.children[0].basic.set_eq(&printed_final.children[0].basic),
        "worked example final formula is {}",
        root.to_formula()
    );
    let g = final_to_general(root).map_err(|e| e.to_string())?;
    let printed = parse_ordered("u2 = g(u1) & ~(u1 = g(u3) & finite(u3))", WORKED_ORDER);
    ensure!(
        alpha_equivalent(&g.explicit(), &ExplicitSolvedForm::from_formula(&printed).unwrap()),
        "worked example general form is {g}"
    );

    let node = WorkingNode::from_normalized(&to_normalized(&parse_ordered(FINAL, FINAL_ORDER)).unwrap(), 5);
    let g = final_to_general(&node).map_err(|e| e.to_string())?;
    let printed = parse_ordered(FINAL_GENERAL, FINAL_ORDER);
    ensure!(g.to_formula().to_string() == printed.to_string(), "extraction gave {g}");

    let mut details = Vec::new();
    for (k, printed) in [(1, WINNING_1), (2, WINNING_2)] {
        let f = gen_winning(k);
        let (a, t) = timed(|| answer_of(&f, &SolveOptions::default()));
        let a = a?;
        same_forms(&a, printed).map_err(|e| format!("winning {k}: {e}"))?;
        ensure!(t < Duration::from_secs(5), "winning {k} took {t:?}");
        details.push(format!("winning {k} in {} ms", t.as_millis()));
        if k == 1 {
            let x = f.free_vars().into_iter().next().unwrap();
            let d = &a.disjuncts()[0];
            let check = |t: &str| d.check_solution(&HashMap::from([(x.clone(), tree(t))])).unwrap();
            ensure!(check("c(g(0), 0)") && !check("c(0, 0)"), "winning 1 solution check disagrees");
        }
    }
    Ok(format!("intro, worked example, extraction, {}", details.join(", ")))
}

fn game() -> Outcome {
    let (r, t) = timed(|| -> Result<Vec<String>, String> {
        let mut out = Vec::new();
        for k in 1..=3u32 {
            let f = gen_winning(k);
            let x = f.free_vars().into_iter().next().unwrap();
            let got = positions(&answer_of(&f, &SolveOptions::default())?, &x)?;
            let want = k_winning_positions(k, 2 * k + 2);
            ensure!(got == want, "k = {k}: solver {got:?}, game {want:?}");
            out.push(format!("k={k}: {}", got.iter().map(|p| format!("({},{})", p.i, p.j)).collect::<Vec<_>>().join(" ")));
        }
        Ok(out)
    });
    let r = r?;
    ensure!(t < Duration::from_secs(60), "took {t:?}");
    Ok(format!("{} in {} ms", r.join("; "), t.as_millis()))
}

fn sentences() -> Outcome {
    let (mut t, mut f) = (0, 0);
    for seed in 0..50u64 {
        let depth = 1 + (seed % 4) as usize;
        let p = gen_random(&RandomSpec::new(depth, seed).closed()).to_formula();
        let a = verdict(&p).map_err(|e| format!("seed {seed}: {e}"))?;
        let b = verdict(&Formula::not(p)).map_err(|e| format!("seed {seed}, negated: {e}"))?;
        ensure!(a != b, "seed {seed}: p and its negation both {a}");
        if a {
            t += 1;
        } else {
            f += 1;
        }
    }
    Ok(format!("50 sentences: {t} true, {f} false, negations complementary"))
}

fn random_conjunction(rng: &mut ChaCha8Rng) -> (Vec<Variable>, BasicFormula) {
    let n_vars = rng.gen_range(1..=6);
    let vars: Vec<Variable> = (0..n_vars)
        .map(|i| Variable::new(format!("x{i}"), OrderKey::from_int(i as i64 + 1)))
        .collect();
    let symbols = [
        Symbol::new("a", 0),
        Symbol::new("b", 0),
        Symbol::new("f", 1),
        Symbol::new("g", 1),
        Symbol::new("h", 2),
        Symbol::new("k", 2),
    ];
    let n_atoms = rng.gen_range(1..=8);
    let mut b = BasicFormula::default();
    for _ in 0..n_atoms {
        let pick = |rng: &mut ChaCha8Rng| vars[rng.gen_range(0..vars.len())].clone();
        let atom = match rng.gen_range(0..4) {
            0 => FlatAtom::EqVar(pick(rng), pick(rng)),
            1 => FlatAtom::Finite(pick(rng)),
            _ => {
                let f = symbols[rng.gen_range(0..symbols.len())].clone();
                let x = pick(rng);
                let args = (0..f.arity()).map(|_| pick(rng)).collect();
                FlatAtom::EqApp(x, f, args)
            }
        };
        b.push(atom);
    }
    let used: BTreeSet<Variable> = b.vars();
    (vars.into_iter().filter(|v| used.contains(v)).collect(), b)
}

fn oracle_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut sat = 0;
    for i in 0..1000 {
        let (vars, b) = random_conjunction(&mut rng);
        let closed = Formula::exists(vars.clone(), b.to_formula());
        let solver = verdict(&closed).map_err(|e| format!("case {i}: {e}"))?;
        let oracle = decide_exists(&vars, &b);
        ensure!(solver == oracle, "case {i}: solver {solver}, oracle {oracle} on {closed}");
        sat += oracle as usize;
    }
    Ok(format!("1000 conjunctions agree ({sat} satisfiable)"))
}

struct Case {
    name: String,
    start: WorkingNode,
    closed: bool,
    entailment: bool,
}

fn corpus() -> Vec<Case> {
    let from = |name: &str, f: Formula, entailment: bool| {
        let mut ctx = VarContext::new();
        let closed = f.is_closed();
        let p1 = normalize(&Formula::not(f), &mut ctx).unwrap();
        Case {
            name: name.to_string(),
            start: init_working(&p1),
            closed,
            entailment,
        }
    };
    let mut out = vec![
        from("intro", parse_formula(INTRO).unwrap(), true),
        from("normalizer example", parse_formula(NORMALIZER_EXAMPLE).unwrap(), true),
        from("winning 1", gen_winning(1), false),
        from("winning 2", gen_winning(2), false),
        Case {
            name: "worked example".into(),
            start: worked_tree(),
            closed: false,
            entailment: true,
        },
    ];
    for seed in 0..100u64 {
        let depth = 1 + (seed % 4) as usize;
        let spec = RandomSpec::new(depth, 1000 + seed);
        let spec = if seed % 2 == 0 { spec.closed() } else { spec };
        out.push(from(&format!("random seed {}", 1000 + seed), gen_random(&spec).to_formula(), true));
    }
    out
}

fn run_checked(case: &Case, options: EngineOptions) -> Result<(Vec<WorkingNode>, u64), String> {
    let mut e = Engine::new(vec![case.start.clone()], options);
    match e.run() {
        Ok(()) => Ok((e.forest(), e.stats().steps)),
        Err(err @ EngineError::InvariantViolation { .. }) => Err(format!("{}: {err}", case.name)),
        Err(err) => Err(format!("{}: did not finish: {err}", case.name)),
    }
}

fn measure_suite() -> Outcome {
    let mut steps = 0;
    let mut small = Vec::new();
    let cases = corpus();
    for case in &cases {
        let options = EngineOptions {
            check_measure: true,
            ..EngineOptions::default()
        };
        let n = run_checked(case, options)?.1;
        steps += n;
        if n <= 5000 {
            small.push(case);
        }
    }
    // The engine compares measures of the rewritten span; a tracer sees the
    // measure of the whole forest after every step.
    let mut traced = 0;
    for case in small {
        let mut last = None;
        let mut bad = None;
        {
            let mut e = Engine::new(vec![case.start.clone()], EngineOptions::default()).with_tracer(|ev| {
                if let Some(prev) = &last {
                    if ev.measure >= *prev && bad.is_none() {
                        bad = Some(ev.step);
                    }
                }
                last = Some(ev.measure.clone());
            });
            e.run().map_err(|e| format!("{}: {e}", case.name))?;
            traced += e.stats().steps;
        }
        ensure!(bad.is_none(), "{}: forest measure rose at step {}", case.name, bad.unwrap());
    }
    Ok(format!(
        "{} formulas, {steps} rule applications decrease the measure ({traced} also checked on the whole forest)",
        cases.len()
    ))
}

fn invariant_suite() -> Outcome {
    let mut steps = 0;
    let mut generals = 0;
    let cases = corpus();
    for case in &cases {
        let options = EngineOptions {
            check_invariants: true,
            check_entailment: case.entailment,
            ..EngineOptions::default()
        };
        let (forest, n) = run_checked(case, options)?;
        steps += n;
        for t in &forest {
            ensure!(t.level == 5 && t.depth() <= 2, "{}: not final: {}", case.name, t.to_formula());
            let g = final_to_general(t).map_err(|e| format!("{}: {e}", case.name))?;
            g.validate().map_err(|e| format!("{}: {e}", case.name))?;
            generals += 1;
        }
        if case.closed {
            let a = treesolve::answer::assemble(&forest, true).map_err(|e| format!("{}: {e}", case.name))?;
            ensure!(matches!(a, Answer::True | Answer::False), "{}: open answer {a}", case.name);
        }
    }
    Ok(format!(
        "{} formulas, {steps} rule applications, {generals} general solved formulas validated",
        cases.len()
    ))
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_treesolve")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn scale() -> Outcome {
    let f = gen_winning(4);
    let opts = SolveOptions::default().with_limits(1_000_000, 120_000);
    let (r, t) = timed(|| solve(&f, &opts));
    let r = r.map_err(|e| e.to_string())?;
    ensure!(r.status == SolveStatus::Completed, "winning 4 stopped: {:?}", r.status);
    ensure!(t < Duration::from_secs(120), "winning 4 took {t:?}");
    let x = f.free_vars().into_iter().next().unwrap();
    let found = positions(r.answer.as_ref().unwrap(), &x)?;

    for args in [
        &["bench", "winning", "3", "--json", "--max-nodes", "50"][..],
        &["bench", "winning", "3", "--json", "--timeout-ms", "1"][..],
    ] {
        let (code, out) = cli(args);
        ensure!(code == 2, "{args:?} exited with {code}");
        let doc: serde_json::Value = serde_json::from_str(&out).map_err(|e| format!("{args:?}: {e}"))?;
        ensure!(doc["schema"] == 1 && doc["answer"].is_null(), "{args:?}: {doc}");
        ensure!(doc["stats"]["steps"].as_u64().unwrap_or(0) > 0, "{args:?}: no partial stats");
    }
    Ok(format!(
        "winning 4 in {} ms, peak {} nodes, {} disjuncts; limit exits clean",
        t.as_millis(),
        r.stats.peak_nodes,
        found.len()
    ))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("golden end-to-end", golden),
        ("game oracle cross-check", game),
        ("sentences are decided", sentences),
        ("oracle equivalence", oracle_agreement),
        ("termination measure", measure_suite),
        ("working formula invariants", invariant_suite),
        ("scale and limits", scale),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {} {name} ({secs:.1} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {} {name} ({secs:.1} s): {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
