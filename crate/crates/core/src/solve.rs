//! End-to-end solving: normalize the negation, saturate, assemble.

use serde::Serialize;
use thiserror::Error;

use crate::answer::{assemble, Answer, AnswerError};
use crate::engine::{init_working, Engine, EngineError, EngineOptions, Stats, TraceEvent};
use crate::normalizer::{normalize, NormalizeError};
use crate::syntax::{Formula, VarContext};

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    pub engine: EngineOptions,
}

impl SolveOptions {
    pub fn checked() -> Self {
        SolveOptions {
            engine: EngineOptions::checked(),
        }
    }

    pub fn with_limits(mut self, max_nodes: usize, timeout_ms: u64) -> Self {
        self.engine.limits.max_nodes = max_nodes;
        self.engine.limits.timeout_ms = timeout_ms;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Completed,
    NodeLimit,
    Timeout,
}

/// Outcome of one solve. `answer` is present exactly when the run completed.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub answer: Option<Answer>,
    pub stats: Stats,
    pub status: SolveStatus,
    /// Final working formulas before deduplication.
    pub forest_size: usize,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error("invariant violated after rule {rule} at node {node}: {detail}")]
    Invariant { rule: u8, node: usize, detail: String },
    #[error(transparent)]
    Answer(#[from] AnswerError),
}

/// Solves `p`, reporting each rule application to `tracer`.
pub fn solve_traced(
    p: &Formula,
    options: &SolveOptions,
    tracer: impl FnMut(&TraceEvent),
) -> Result<SolveReport, SolveError> {
    run(p, options, Some(Box::new(tracer)))
}

pub fn solve(p: &Formula, options: &SolveOptions) -> Result<SolveReport, SolveError> {
    run(p, options, None)
}

type BoxedTracer<'t> = Box<dyn FnMut(&TraceEvent) + 't>;

fn run(p: &Formula, options: &SolveOptions, tracer: Option<BoxedTracer<'_>>) -> Result<SolveReport, SolveError> {
    let mut ctx = VarContext::new();
    let p1 = normalize(&Formula::not(p.clone()), &mut ctx)?;
    let mut engine = Engine::new(vec![init_working(&p1)], options.engine.clone());
    if let Some(t) = tracer {
        engine = engine.with_tracer(t);
    }
    let limited = |status, stats: &Stats| SolveReport {
        answer: None,
        stats: stats.clone(),
        status,
        forest_size: 0,
    };
    match engine.run() {
        Ok(()) => {}
        Err(EngineError::NodeLimitExceeded { stats, .. }) => return Ok(limited(SolveStatus::NodeLimit, &stats)),
        Err(EngineError::TimeoutExceeded { stats, .. }) => return Ok(limited(SolveStatus::Timeout, &stats)),
        Err(EngineError::InvariantViolation { rule, node, detail }) => {
            return Err(SolveError::Invariant { rule, node, detail })
        }
    }
    let forest = engine.forest();
    let answer = assemble(&forest, p.is_closed())?;
    Ok(SolveReport {
        answer: Some(answer),
        stats: engine.stats().clone(),
        status: SolveStatus::Completed,
        forest_size: forest.len(),
    })
}
