use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use treesolve::oracle::{decide_exists, decode_position, encode_position, k_winning_positions, Position};
use treesolve::{
    gen_random, gen_winning, parse_formula, solve, solve_traced, Answer, EngineLimits, Formula, RandomSpec, SolveError,
    SolveOptions, SolveReport, SolveStatus, Stats,
};

mod conjunction;

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(name = "treesolve", version, about = "Constraint solver over finite or infinite trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the formula in FILE (`-` reads standard input).
    Solve {
        file: PathBuf,
        /// Print one line per rule application to standard error.
        #[arg(long)]
        trace: bool,
        /// Print rule counts and node statistics after the answer.
        #[arg(long)]
        stats: bool,
        #[arg(long)]
        json: bool,
        /// Assert the termination measure and level conditions after every rule.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Run generated workloads.
    #[command(subcommand)]
    Bench(Bench),
    /// Ground-truth procedures independent of the solver.
    #[command(subcommand)]
    Oracle(Oracle),
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long, default_value_t = EngineLimits::default().max_nodes)]
    max_nodes: usize,
    #[arg(long, default_value_t = EngineLimits::default().timeout_ms)]
    timeout_ms: u64,
}

#[derive(Subcommand)]
enum Bench {
    /// Solve the k-move winning-position formula of the counter game.
    Winning {
        k: u32,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Solve a batch of random normalized formulas.
    Random {
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 10)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Keep free variables instead of quantifying them all.
        #[arg(long)]
        open: bool,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        limits: LimitArgs,
    },
}

#[derive(Subcommand)]
enum Oracle {
    /// Decide an existentially quantified conjunction of atoms.
    Sat { file: PathBuf },
    /// List the k-winning positions `(i, j)` with `i ≤ BOUND`.
    Game { k: u32, bound: u32 },
}

enum Failure {
    Input(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Internal(_) => 3,
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        Failure::Internal(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            file,
            trace,
            stats,
            json,
            check,
            limits,
        } => run_solve(&file, trace, stats, json, check, &limits),
        Command::Bench(Bench::Winning { k, json, limits }) => run_winning(k, json, &limits),
        Command::Bench(Bench::Random {
            depth,
            count,
            seed,
            open,
            json,
            limits,
        }) => run_random(depth, count, seed, open, json, &limits),
        Command::Oracle(Oracle::Sat { file }) => run_sat(&file),
        Command::Oracle(Oracle::Game { k, bound }) => run_game(k, bound),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            match &f {
                Failure::Input(m) | Failure::Internal(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn read_formula(path: &PathBuf) -> Result<Formula, Failure> {
    let mut src = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin()
            .read_to_string(&mut src)
            .map_err(|e| Failure::Input(format!("stdin: {e}")))?;
    } else {
        src = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    parse_formula(&src).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn options(limits: &LimitArgs, check: bool) -> SolveOptions {
    let base = if check { SolveOptions::checked() } else { SolveOptions::default() };
    base.with_limits(limits.max_nodes, limits.timeout_ms)
}

fn exit_for(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Completed => 0,
        SolveStatus::NodeLimit | SolveStatus::Timeout => 2,
    }
}

fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Completed => "completed",
        SolveStatus::NodeLimit => "node-limit",
        SolveStatus::Timeout => "timeout",
    }
}

fn report_json(r: &SolveReport) -> Value {
    json!({
        "schema": SCHEMA,
        "status": status_name(r.status),
        "answer": r.answer.as_ref().map(Answer::to_doc),
        "forest_size": r.forest_size,
        "stats": r.stats,
    })
}

fn print_stats(s: &Stats) {
    let fired: Vec<String> = (1..=16u8)
        .filter(|&r| s.fired(r) > 0)
        .map(|r| format!("{r}:{}", s.fired(r)))
        .collect();
    println!("steps {}  peak nodes {}  created {}  {} ms", s.steps, s.peak_nodes, s.created_nodes, s.elapsed_ms);
    println!("rules {}", fired.join(" "));
}

fn run_solve(path: &PathBuf, trace: bool, stats: bool, json: bool, check: bool, limits: &LimitArgs) -> Result<u8, Failure> {
    let f = read_formula(path)?;
    let opts = options(limits, check);
    let report = if trace {
        solve_traced(&f, &opts, |e| eprintln!("{e}"))?
    } else {
        solve(&f, &opts)?
    };
    if json {
        println!("{}", report_json(&report));
    } else {
        match &report.answer {
            Some(a) => println!("{a}"),
            None => println!("{}: no answer", status_name(report.status)),
        }
        if stats || report.answer.is_none() {
            print_stats(&report.stats);
        }
    }
    Ok(exit_for(report.status))
}

fn positions(answer: &Answer, f: &Formula) -> Vec<Option<Position>> {
    let Some(x) = f.free_vars().into_iter().next() else {
        return Vec::new();
    };
    answer
        .disjuncts()
        .iter()
        .map(|d| d.ground_value(&x).as_ref().and_then(decode_position))
        .collect()
}

fn position_text(p: &Option<Position>) -> String {
    match p {
        Some(p) => format!("({}, {})", p.i, p.j),
        None => "?".to_string(),
    }
}

fn run_winning(k: u32, json: bool, limits: &LimitArgs) -> Result<u8, Failure> {
    if k == 0 {
        return Err(Failure::Input("k must be at least 1".into()));
    }
    let f = gen_winning(k);
    let report = solve(&f, &options(limits, false))?;
    let decoded = report.answer.as_ref().map(|a| positions(a, &f)).unwrap_or_default();
    if json {
        let mut doc = report_json(&report);
        doc["k"] = json!(k);
        doc["positions"] = decoded
            .iter()
            .map(|p| p.map(|p| json!([p.i, p.j])).unwrap_or(Value::Null))
            .collect();
        println!("{doc}");
    } else {
        match &report.answer {
            Some(a) => {
                println!("{a}");
                let ps: Vec<String> = decoded.iter().map(position_text).collect();
                println!("positions {}", ps.join(" "));
            }
            None => println!("{}: no answer", status_name(report.status)),
        }
        print_stats(&report.stats);
    }
    Ok(exit_for(report.status))
}

fn run_random(depth: usize, count: u64, seed: u64, open: bool, json: bool, limits: &LimitArgs) -> Result<u8, Failure> {
    if depth == 0 {
        return Err(Failure::Input("depth must be at least 1".into()));
    }
    let opts = options(limits, false);
    let mut rows = Vec::new();
    let mut worst = 0;
    for s in seed..seed + count {
        let spec = if open { RandomSpec::new(depth, s) } else { RandomSpec::new(depth, s).closed() };
        let f = gen_random(&spec).to_formula();
        let r = solve(&f, &opts)?;
        worst = worst.max(exit_for(r.status));
        let kind = r.answer.as_ref().map(Answer::kind).unwrap_or("none");
        if !json {
            println!(
                "seed {s:>6}  {:<10}  {:<11}  steps {:>9}  peak {:>7}  {:>7} ms",
                status_name(r.status),
                kind,
                r.stats.steps,
                r.stats.peak_nodes,
                r.stats.elapsed_ms
            );
        }
        rows.push(json!({
            "seed": s,
            "status": status_name(r.status),
            "answer": kind,
            "stats": r.stats,
        }));
    }
    if json {
        println!(
            "{}",
            json!({ "schema": SCHEMA, "depth": depth, "closed": !open, "spec": RandomSpec::new(depth, seed), "runs": rows })
        );
    }
    Ok(worst)
}

fn run_sat(path: &PathBuf) -> Result<u8, Failure> {
    let f = read_formula(path)?;
    let (quant, b) = conjunction::exists_conjunction(&f)
        .ok_or_else(|| Failure::Input("expected an existentially quantified conjunction of atoms".into()))?;
    println!("{}", if decide_exists(&quant, &b) { "sat" } else { "unsat" });
    Ok(0)
}

fn run_game(k: u32, bound: u32) -> Result<u8, Failure> {
    if k == 0 || bound < 2 * k + 2 {
        return Err(Failure::Input(format!("need k >= 1 and BOUND >= {}", 2 * k + 2)));
    }
    for p in k_winning_positions(k, bound) {
        println!("{}  {}", position_text(&Some(p)), encode_position(p));
    }
    Ok(0)
}
