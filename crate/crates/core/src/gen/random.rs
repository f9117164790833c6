//! Seeded random normalized formulas.

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::basics::{BasicFormula, FlatAtom};
use crate::normalizer::NormalizedFormula;
use crate::syntax::{is_disciplined, OrderKey, Symbol, VarContext, Variable};

/// Shape parameters of a random normalized formula.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RandomSpec {
    /// Exact nesting depth; a node without children has depth 1.
    pub depth: usize,
    pub seed: u64,
    pub n_children: RangeInclusive<usize>,
    pub atoms_per_basic: RangeInclusive<usize>,
    pub n_vars: usize,
    /// Variables bound by each node.
    pub quant_per_node: RangeInclusive<usize>,
    /// Bind every free variable at the root.
    pub closed: bool,
}

impl RandomSpec {
    pub fn new(depth: usize, seed: u64) -> Self {
        RandomSpec {
            depth,
            seed,
            n_children: 0..=4,
            atoms_per_basic: 1..=8,
            n_vars: 10,
            quant_per_node: 0..=3,
            closed: false,
        }
    }

    pub fn closed(mut self) -> Self {
        self.closed = true;
        self
    }
}

/// `f0, f1, f2, g0, g1, g2`, the index being the arity.
pub fn random_symbols() -> Vec<Symbol> {
    ["f", "g"]
        .iter()
        .flat_map(|p| (0..3).map(move |j| Symbol::new(&format!("{p}{j}"), j)))
        .collect()
}

struct Gen {
    rng: ChaCha8Rng,
    ctx: VarContext,
    scope: Vec<Variable>,
    symbols: Vec<Symbol>,
}

impl Gen {
    fn var(&mut self) -> Variable {
        self.scope.choose(&mut self.rng).unwrap().clone()
    }

    fn atom(&mut self, allow_true: bool) -> FlatAtom {
        let kinds = if allow_true { 4 } else { 3 };
        match self.rng.gen_range(0..kinds) {
            0 => FlatAtom::Finite(self.var()),
            1 => FlatAtom::EqVar(self.var(), self.var()),
            2 => {
                let f = self.symbols.choose(&mut self.rng).unwrap().clone();
                let args = (0..f.arity()).map(|_| self.var()).collect();
                FlatAtom::EqApp(self.var(), f, args)
            }
            _ => FlatAtom::True,
        }
    }

    fn node(&mut self, spec: &RandomSpec, remaining: usize) -> NormalizedFormula {
        let nq = self.rng.gen_range(spec.quant_per_node.clone()).min(self.scope.len());
        let mut slots: Vec<usize> = (0..self.scope.len()).collect();
        slots.shuffle(&mut self.rng);
        slots.truncate(nq);
        slots.sort_unstable();
        let saved = self.scope.clone();
        let quant: Vec<Variable> = slots
            .iter()
            .map(|&i| {
                let v = self.ctx.fresh(saved[i].name());
                self.scope[i] = v.clone();
                v
            })
            .collect();
        let na = self.rng.gen_range(spec.atoms_per_basic.clone());
        let mut atoms = Vec::with_capacity(na);
        for _ in 0..na {
            let allow_true = !atoms.contains(&FlatAtom::True);
            atoms.push(self.atom(allow_true));
        }
        let n = if remaining <= 1 {
            0
        } else {
            self.rng.gen_range(spec.n_children.clone())
        };
        let children = (0..n).map(|_| self.node(spec, remaining - 1)).collect();
        self.scope = saved;
        NormalizedFormula {
            quant,
            basic: BasicFormula::new(atoms),
            children,
        }
    }
}

/// A random normalized formula of depth exactly `spec.depth`, deterministic
/// in `spec.seed`. Trees falling short of the depth are redrawn.
///
/// Each bound variable is fresh and above every variable created before it,
/// so the result is disciplined without renaming.
pub fn gen_random(spec: &RandomSpec) -> NormalizedFormula {
    assert!(spec.depth >= 1, "depth must be at least 1");
    let pool: Vec<Variable> = (0..spec.n_vars)
        .map(|i| Variable::new(format!("v{i}"), OrderKey::from_int(i as i64 + 1)))
        .collect();
    let mut ctx = VarContext::new();
    ctx.observe_all(&pool);
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        ctx,
        scope: pool,
        symbols: random_symbols(),
    };
    let mut f = loop {
        let t = g.node(spec, spec.depth);
        if t.depth() == spec.depth {
            break t;
        }
    };
    if spec.closed {
        let free: Vec<Variable> = f.free_vars().into_iter().collect();
        f.quant.splice(0..0, free);
    }
    debug_assert!(is_disciplined(&f.to_formula()));
    f
}
