pub mod syntax;
pub mod basics;
pub mod oracle;
pub mod normalizer;
pub mod engine;
pub mod answer;
pub mod gen;
pub mod solve;

pub use answer::{Answer, ExplicitSolvedForm, GeneralSolvedFormula};
pub use engine::{EngineLimits, EngineOptions, Stats, TraceEvent};
pub use gen::{gen_random, gen_winning, RandomSpec};
pub use normalizer::NormalizedFormula;
pub use solve::{solve, solve_traced, SolveError, SolveOptions, SolveReport, SolveStatus};
pub use syntax::{parse_formula, print_formula, Formula, Term, Variable};
