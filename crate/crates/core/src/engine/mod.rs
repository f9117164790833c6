//! Working formulas and their rewriting to a conjunction of final working
//! formulas.
//!
//! The forest of working trees lives in an arena. Rules fire under a fixed
//! depth-first, leftmost-child-first schedule; every application goes through
//! [`Engine::fire`], which keeps statistics, enforces limits and optionally
//! asserts the termination measure and the level invariants.

mod invariants;
mod measure;
mod rules;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::basics::BasicFormula;
use crate::normalizer::NormalizedFormula;
use crate::syntax::{Formula, VarContext, Variable};

pub use invariants::{check_forest, check_node_conditions, check_span};
pub use measure::{lambda, measure, measure_with, MeasureTuple, Tower};

pub type NodeId = usize;

/// `¬level(∃quant basic ∧ ⋀ children)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkingNode {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub level: u8,
    pub quant: Vec<Variable>,
    pub basic: BasicFormula,
    pub children: Vec<WorkingNode>,
}

impl WorkingNode {
    /// Copies a normalized formula, every negation at `level`.
    pub fn from_normalized(n: &NormalizedFormula, level: u8) -> WorkingNode {
        WorkingNode {
            id: 0,
            parent: None,
            level,
            quant: n.quant.clone(),
            basic: n.basic.clone(),
            children: n.children.iter().map(|c| WorkingNode::from_normalized(c, level)).collect(),
        }
    }

    pub fn to_normalized(&self) -> NormalizedFormula {
        NormalizedFormula {
            quant: self.quant.clone(),
            basic: self.basic.clone(),
            children: self.children.iter().map(WorkingNode::to_normalized).collect(),
        }
    }

    pub fn to_formula(&self) -> Formula {
        self.to_normalized().to_formula()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(WorkingNode::depth).max().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(WorkingNode::node_count).sum::<usize>()
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a WorkingNode)) {
        f(self);
        for c in &self.children {
            c.visit(f);
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Variable> {
        self.to_formula().free_vars()
    }
}

impl fmt::Display for WorkingNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "~{}(ex ", self.level)?;
        if self.quant.is_empty() {
            f.write_str("eps")?;
        } else {
            for (i, v) in self.quant.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{v}")?;
            }
        }
        write!(f, ". {}", self.basic)?;
        for c in &self.children {
            write!(f, " & {c}")?;
        }
        f.write_str(")")
    }
}

/// Formula of a forest: the conjunction of its trees.
pub fn forest_formula(forest: &[WorkingNode]) -> Formula {
    Formula::and_all(forest.iter().map(WorkingNode::to_formula))
}

/// `¬⁴(∃ε true ∧ ¬⁰(∃ε true ∧ p1))` with `p1` entirely at level 0.
pub fn init_working(p1: &NormalizedFormula) -> WorkingNode {
    let wrap = |level, children| WorkingNode {
        id: 0,
        parent: None,
        level,
        quant: Vec::new(),
        basic: BasicFormula::default(),
        children,
    };
    wrap(4, vec![wrap(0, vec![WorkingNode::from_normalized(p1, 0)])])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EngineLimits {
    pub max_nodes: usize,
    pub timeout_ms: u64,
}

impl Default for EngineLimits {
    fn default() -> Self {
        EngineLimits {
            max_nodes: 1_000_000,
            timeout_ms: 60_000,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct EngineOptions {
    pub limits: EngineLimits,
    /// Assert that every rule strictly decreases the measure.
    pub check_measure: bool,
    /// Assert the syntactic level conditions and discipline after every rule.
    pub check_invariants: bool,
    /// Also check the entailment condition with the oracle.
    pub check_entailment: bool,
}

impl EngineOptions {
    pub fn checked() -> Self {
        EngineOptions {
            check_measure: true,
            check_invariants: true,
            check_entailment: cfg!(debug_assertions),
            ..EngineOptions::default()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    /// Applications of rules 1 through 16, in order.
    pub rules_fired: [u64; 16],
    pub steps: u64,
    pub live_nodes: usize,
    pub peak_nodes: usize,
    pub created_nodes: usize,
    pub elapsed_ms: u64,
}

impl Stats {
    pub fn fired(&self, rule: u8) -> u64 {
        self.rules_fired[rule as usize - 1]
    }
}

/// One rule application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub step: u64,
    pub rule: u8,
    pub node: NodeId,
    pub measure: MeasureTuple,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {} rule {} node {} measure {}", self.step, self.rule, self.node, self.measure)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("node limit of {limit} exceeded after {} rule applications", stats.steps)]
    NodeLimitExceeded { limit: usize, stats: Box<Stats> },
    #[error("timeout of {limit_ms} ms exceeded after {} rule applications", stats.steps)]
    TimeoutExceeded { limit_ms: u64, stats: Box<Stats> },
    #[error("invariant violated by rule {rule} at node {node}: {detail}")]
    InvariantViolation { rule: u8, node: NodeId, detail: String },
}

impl EngineError {
    pub fn stats(&self) -> Option<&Stats> {
        match self {
            EngineError::NodeLimitExceeded { stats, .. } | EngineError::TimeoutExceeded { stats, .. } => Some(stats),
            EngineError::InvariantViolation { .. } => None,
        }
    }
}

#[derive(Clone, Debug)]
struct Slot {
    parent: Option<NodeId>,
    level: u8,
    quant: Vec<Variable>,
    basic: BasicFormula,
    children: Vec<NodeId>,
}

type Tracer<'t> = Box<dyn FnMut(&TraceEvent) + 't>;

pub struct Engine<'t> {
    slots: Vec<Option<Slot>>,
    roots: Vec<NodeId>,
    ctx: VarContext,
    ranks: HashMap<Variable, u64>,
    options: EngineOptions,
    stats: Stats,
    started: Instant,
    tracer: Option<Tracer<'t>>,
    input_free: BTreeSet<Variable>,
}

/// Final working formulas and the statistics of the run.
#[derive(Clone, Debug)]
pub struct Saturation {
    pub forest: Vec<WorkingNode>,
    pub stats: Stats,
}

/// Rewrites `init_working(p1)` to a conjunction of final working formulas.
pub fn saturate(p1: &NormalizedFormula, options: &EngineOptions) -> Result<Saturation, EngineError> {
    let mut engine = Engine::new(vec![init_working(p1)], options.clone());
    engine.run()?;
    Ok(Saturation {
        forest: engine.forest(),
        stats: engine.stats().clone(),
    })
}

impl<'t> Engine<'t> {
    /// An engine over `forest`. Roots must be at level 4 or 5.
    pub fn new(forest: Vec<WorkingNode>, options: EngineOptions) -> Self {
        let mut ctx = VarContext::new();
        let mut vars = BTreeSet::new();
        for t in &forest {
            t.visit(&mut |n| {
                vars.extend(n.quant.iter().cloned());
                vars.extend(n.basic.vars());
            });
        }
        ctx.observe_all(&vars);
        let ranks = vars.into_iter().enumerate().map(|(i, v)| (v, i as u64 + 1)).collect();
        let mut engine = Engine {
            slots: Vec::new(),
            roots: Vec::new(),
            ctx,
            ranks,
            options,
            stats: Stats::default(),
            started: Instant::now(),
            tracer: None,
            input_free: forest_formula(&forest).free_vars(),
        };
        for t in &forest {
            assert!(t.level >= 4, "roots must be at level 4 or 5");
            let id = engine.import(t, None);
            engine.roots.push(id);
        }
        engine
    }

    /// Reports every rule application to `f`. Each event carries the measure
    /// after the step, which costs a traversal of the forest.
    pub fn with_tracer(mut self, f: impl FnMut(&TraceEvent) + 't) -> Self {
        self.tracer = Some(Box::new(f));
        self
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn forest(&self) -> Vec<WorkingNode> {
        self.roots.iter().map(|&r| self.export(r)).collect()
    }

    /// The measure of the current forest, variables ranked by first
    /// appearance in key order.
    pub fn measure(&self) -> MeasureTuple {
        measure_with(&self.forest(), &|v| self.ranks.get(v).copied().unwrap_or(0))
    }

    /// Applies rules until every tree is final.
    pub fn run(&mut self) -> Result<(), EngineError> {
        self.started = Instant::now();
        let mut i = 0;
        while i < self.roots.len() {
            let r = self.roots[i];
            if self.slot(r).level == 4 {
                self.process_four(r)?;
            }
            if self.roots.get(i) == Some(&r) {
                i += 1;
            }
        }
        self.stats.elapsed_ms = self.started.elapsed().as_millis() as u64;
        Ok(())
    }

    fn slot(&self, id: NodeId) -> &Slot {
        self.slots[id].as_ref().expect("live node")
    }

    fn slot_mut(&mut self, id: NodeId) -> &mut Slot {
        self.slots[id].as_mut().expect("live node")
    }

    fn alive(&self, id: NodeId) -> bool {
        self.slots.get(id).is_some_and(Option::is_some)
    }

    fn fresh(&mut self, hint: &str) -> Variable {
        let v = self.ctx.fresh(hint);
        let rank = self.ranks.len() as u64 + 1;
        self.ranks.insert(v.clone(), rank);
        v
    }

    fn alloc(&mut self, slot: Slot) -> NodeId {
        self.slots.push(Some(slot));
        self.stats.live_nodes += 1;
        self.stats.created_nodes += 1;
        self.stats.peak_nodes = self.stats.peak_nodes.max(self.stats.live_nodes);
        self.slots.len() - 1
    }

    fn import(&mut self, t: &WorkingNode, parent: Option<NodeId>) -> NodeId {
        let id = self.alloc(Slot {
            parent,
            level: t.level,
            quant: t.quant.clone(),
            basic: t.basic.clone(),
            children: Vec::new(),
        });
        let kids = t.children.iter().map(|c| self.import(c, Some(id))).collect();
        self.slot_mut(id).children = kids;
        id
    }

    fn export(&self, id: NodeId) -> WorkingNode {
        let s = self.slot(id);
        WorkingNode {
            id,
            parent: s.parent,
            level: s.level,
            quant: s.quant.clone(),
            basic: s.basic.clone(),
            children: s.children.iter().map(|&c| self.export(c)).collect(),
        }
    }

    /// Detaches `id` from its parent (or the roots) and frees its subtree.
    fn delete(&mut self, id: NodeId) {
        match self.slot(id).parent {
            Some(p) => self.slot_mut(p).children.retain(|&c| c != id),
            None => self.roots.retain(|&r| r != id),
        }
        self.free(id);
    }

    fn free(&mut self, id: NodeId) {
        let slot = self.slots[id].take().expect("live node");
        self.stats.live_nodes -= 1;
        for c in slot.children {
            self.free(c);
        }
    }

    /// Inserts new trees right after `id` among its siblings.
    fn insert_after(&mut self, id: NodeId, trees: Vec<WorkingNode>) {
        let parent = self.slot(id).parent;
        let ids: Vec<NodeId> = trees.iter().map(|t| self.import(t, parent)).collect();
        let list = match parent {
            Some(p) => &mut self.slot_mut(p).children,
            None => &mut self.roots,
        };
        let pos = list.iter().position(|&c| c == id).expect("attached node") + 1;
        list.splice(pos..pos, ids);
    }

    fn siblings(&self, parent: Option<NodeId>) -> &[NodeId] {
        match parent {
            Some(p) => &self.slot(p).children,
            None => &self.roots,
        }
    }

    /// `node` with its ancestors' bound variables, outermost first.
    fn enclosing_quant(&self, node: NodeId) -> Vec<Variable> {
        let mut out = Vec::new();
        let mut cur = self.slot(node).parent;
        while let Some(p) = cur {
            out.extend(self.slot(p).quant.iter().cloned());
            cur = self.slot(p).parent;
        }
        out
    }

    fn shallow(&self, id: NodeId) -> WorkingNode {
        let s = self.slot(id);
        WorkingNode {
            id,
            parent: s.parent,
            level: s.level,
            quant: s.quant.clone(),
            basic: s.basic.clone(),
            children: Vec::new(),
        }
    }

    /// Applies one rule through `apply` with bookkeeping and checks.
    ///
    /// A rule only rewrites the subtree of `node` and may insert siblings
    /// right after it, so checks look at that span alone. Every measure
    /// component is a sum over nodes or, for the first, built from the span
    /// through strictly monotone maps, so comparing the span's measures
    /// decides the comparison of the whole forest's.
    fn fire(&mut self, rule: u8, node: NodeId, apply: impl FnOnce(&mut Self)) -> Result<(), EngineError> {
        let checking = self.options.check_measure || self.options.check_invariants;
        let before = checking.then(|| {
            let parent = self.slot(node).parent;
            let list = self.siblings(parent);
            let pos = list.iter().position(|&c| c == node).expect("attached node");
            (parent, pos, list.len(), self.export(node))
        });
        apply(self);
        self.stats.rules_fired[rule as usize - 1] += 1;
        self.stats.steps += 1;
        let violation = |detail: String| EngineError::InvariantViolation { rule, node, detail };
        if let Some((parent, pos, len, old)) = before {
            let list = self.siblings(parent);
            let end = pos + 1 + list.len() - len;
            let span: Vec<WorkingNode> = list[pos..end].iter().map(|&c| self.export(c)).collect();
            let old = [old];
            if self.options.check_measure {
                let rank = |v: &Variable| self.ranks.get(v).copied().unwrap_or(0);
                let (b, a) = (measure_with(&old, &rank), measure_with(&span, &rank));
                if a >= b {
                    return Err(violation(format!("measure did not decrease: {b} to {a}")));
                }
            }
            if self.options.check_invariants {
                let p = parent.map(|p| self.shallow(p));
                let enclosing = match parent {
                    Some(p) => {
                        let mut e = self.enclosing_quant(p);
                        e.extend(self.slot(p).quant.iter().cloned());
                        e
                    }
                    None => Vec::new(),
                };
                let top = self.input_free.iter().next_back();
                check_span(&span, p.as_ref(), &enclosing, top, self.options.check_entailment)
                    .map_err(violation)?;
                let fb = forest_formula(&old).free_vars();
                let fa = forest_formula(&span).free_vars();
                let outside = |v: &&Variable| !enclosing.contains(v) && !self.input_free.contains(v);
                if let Some(v) = fa.difference(&fb).find(outside) {
                    return Err(violation(format!("new free variable {v:?}")));
                }
            }
        }
        if let Some(mut t) = self.tracer.take() {
            t(&TraceEvent {
                step: self.stats.steps,
                rule,
                node,
                measure: self.measure(),
            });
            self.tracer = Some(t);
        }
        self.check_limits()
    }

    fn check_limits(&mut self) -> Result<(), EngineError> {
        let limits = self.options.limits;
        let elapsed = self.started.elapsed();
        if self.stats.live_nodes > limits.max_nodes {
            self.stats.elapsed_ms = elapsed.as_millis() as u64;
            return Err(EngineError::NodeLimitExceeded {
                limit: limits.max_nodes,
                stats: Box::new(self.stats.clone()),
            });
        }
        if elapsed > Duration::from_millis(limits.timeout_ms) {
            self.stats.elapsed_ms = elapsed.as_millis() as u64;
            return Err(EngineError::TimeoutExceeded {
                limit_ms: limits.timeout_ms,
                stats: Box::new(self.stats.clone()),
            });
        }
        Ok(())
    }
}
