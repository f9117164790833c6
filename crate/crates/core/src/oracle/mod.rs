//! Independent reference procedures over rational trees.
//!
//! Nothing here uses the rewriting engine: constraints are unified with a
//! union-find over variables, finiteness is a cycle check on the solved graph
//! and entailment is decided by bisimulation.

mod game;

pub use game::{decode_position, encode_position, game_symbols, k_winning_positions, successors, Position};

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::basics::{BasicFormula, FlatAtom};
use crate::syntax::{Symbol, Term, VarContext, Variable};

/// A rational tree as a rooted graph whose nodes carry a symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalTree {
    nodes: Vec<(Symbol, Vec<usize>)>,
    root: usize,
}

impl RationalTree {
    pub fn new(nodes: Vec<(Symbol, Vec<usize>)>, root: usize) -> Self {
        assert!(root < nodes.len());
        for (f, kids) in &nodes {
            assert_eq!(f.arity(), kids.len());
            assert!(kids.iter().all(|&k| k < nodes.len()));
        }
        RationalTree { nodes, root }
    }

    /// The finite tree denoted by a ground term.
    pub fn from_term(t: &Term) -> Option<Self> {
        fn go(t: &Term, nodes: &mut Vec<(Symbol, Vec<usize>)>) -> Option<usize> {
            match t {
                Term::Var(_) => None,
                Term::App(f, args) => {
                    let kids = args.iter().map(|a| go(a, nodes)).collect::<Option<Vec<_>>>()?;
                    nodes.push((f.clone(), kids));
                    Some(nodes.len() - 1)
                }
            }
        }
        let mut nodes = Vec::new();
        let root = go(t, &mut nodes)?;
        Some(RationalTree { nodes, root })
    }

    pub fn nodes(&self) -> &[(Symbol, Vec<usize>)] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// No cycle is reachable from the root.
    pub fn is_finite(&self) -> bool {
        let mut state = vec![0u8; self.nodes.len()];
        !has_cycle_from(self.root, &|n| self.nodes[n].1.clone(), &mut state)
    }
}

impl fmt::Display for RationalTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &RationalTree, n: usize, path: &mut Vec<usize>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if let Some(back) = path.iter().position(|&p| p == n) {
                return write!(f, "@{}", path.len() - back);
            }
            let (sym, kids) = &t.nodes[n];
            write!(f, "{sym}")?;
            if kids.is_empty() {
                return Ok(());
            }
            path.push(n);
            f.write_str("(")?;
            for (i, &k) in kids.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                go(t, k, path, f)?;
            }
            path.pop();
            f.write_str(")")
        }
        go(self, self.root, &mut Vec::new(), f)
    }
}

fn has_cycle_from(start: usize, kids: &dyn Fn(usize) -> Vec<usize>, state: &mut [u8]) -> bool {
    // 0 unvisited, 1 on stack, 2 done
    let mut stack: Vec<(usize, Vec<usize>)> = Vec::new();
    if state[start] != 0 {
        return false;
    }
    state[start] = 1;
    stack.push((start, kids(start)));
    while let Some((n, pending)) = stack.last_mut() {
        match pending.pop() {
            Some(k) => match state[k] {
                1 => return true,
                0 => {
                    state[k] = 1;
                    let next = kids(k);
                    stack.push((k, next));
                }
                _ => {}
            },
            None => {
                state[*n] = 2;
                stack.pop();
            }
        }
    }
    false
}

/// Union-find over variables whose classes may carry one function node.
struct Graph {
    vars: Vec<Variable>,
    index: HashMap<Variable, usize>,
    parent: Vec<usize>,
    node: Vec<Option<(Symbol, Vec<usize>)>>,
}

#[derive(Debug)]
struct Clash;

impl Graph {
    fn new() -> Self {
        Graph {
            vars: Vec::new(),
            index: HashMap::new(),
            parent: Vec::new(),
            node: Vec::new(),
        }
    }

    fn id(&mut self, v: &Variable) -> usize {
        if let Some(&i) = self.index.get(v) {
            return i;
        }
        let i = self.vars.len();
        self.vars.push(v.clone());
        self.index.insert(v.clone(), i);
        self.parent.push(i);
        self.node.push(None);
        i
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) -> Result<(), Clash> {
        let mut work = vec![(a, b)];
        while let Some((a, b)) = work.pop() {
            let (ra, rb) = (self.find(a), self.find(b));
            if ra == rb {
                continue;
            }
            self.parent[ra] = rb;
            match (self.node[ra].take(), self.node[rb].clone()) {
                (Some((f, xs)), Some((g, ys))) => {
                    if f != g {
                        return Err(Clash);
                    }
                    work.extend(xs.into_iter().zip(ys));
                }
                (Some(n), None) => self.node[rb] = Some(n),
                _ => {}
            }
        }
        Ok(())
    }

    fn add(&mut self, atom: &FlatAtom) -> Result<(), Clash> {
        match atom {
            FlatAtom::EqVar(x, y) => {
                let (x, y) = (self.id(x), self.id(y));
                self.union(x, y)
            }
            FlatAtom::EqApp(x, f, args) => {
                let x = self.id(x);
                let args: Vec<usize> = args.iter().map(|a| self.id(a)).collect();
                let rx = self.find(x);
                match self.node[rx].clone() {
                    None => {
                        self.node[rx] = Some((f.clone(), args));
                        Ok(())
                    }
                    Some((g, ys)) => {
                        if *f != g {
                            return Err(Clash);
                        }
                        for (a, y) in args.into_iter().zip(ys) {
                            self.union(a, y)?;
                        }
                        Ok(())
                    }
                }
            }
            FlatAtom::Finite(x) => {
                self.id(x);
                Ok(())
            }
            FlatAtom::True => Ok(()),
        }
    }

    fn build(b: &BasicFormula) -> Result<Graph, Clash> {
        let mut g = Graph::new();
        for a in b.atoms() {
            g.add(a)?;
        }
        Ok(g)
    }

    fn kids(&mut self, root: usize) -> Vec<usize> {
        match self.node[root].clone() {
            Some((_, xs)) => xs.into_iter().map(|x| self.find(x)).collect(),
            None => vec![],
        }
    }

    /// Roots reachable from `start` (inclusive) through function nodes.
    fn closure(&mut self, start: impl IntoIterator<Item = usize>) -> HashSet<usize> {
        let mut seen = HashSet::new();
        let mut stack: Vec<usize> = start.into_iter().map(|s| self.find(s)).collect();
        while let Some(r) = stack.pop() {
            if seen.insert(r) {
                stack.extend(self.kids(r));
            }
        }
        seen
    }

    fn has_cycle_among(&mut self, roots: &HashSet<usize>) -> bool {
        let n = self.vars.len();
        let kids: Vec<Vec<usize>> = (0..n).map(|i| if self.find(i) == i { self.kids(i) } else { vec![] }).collect();
        let mut state = vec![0u8; n];
        roots.iter().any(|&r| has_cycle_from(r, &|i| kids[i].clone(), &mut state))
    }
}

/// Result of unifying the equations of a basic formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Unified {
    /// Solved equations: every class is named by its `≻`-least variable,
    /// other members point to it and the class node hangs off it.
    Sat(BasicFormula),
    Unsat,
}

pub fn unify(b: &BasicFormula) -> Unified {
    let mut g = match Graph::build(b) {
        Ok(g) => g,
        Err(Clash) => return Unified::Unsat,
    };
    let n = g.vars.len();
    let mut rep: HashMap<usize, usize> = HashMap::new();
    for i in 0..n {
        let r = g.find(i);
        let cur = rep.entry(r).or_insert(i);
        if g.vars[i] < g.vars[*cur] {
            *cur = i;
        }
    }
    let mut atoms = Vec::new();
    for i in 0..n {
        let r = g.find(i);
        let name = rep[&r];
        if name != i {
            atoms.push(FlatAtom::EqVar(g.vars[i].clone(), g.vars[name].clone()));
        } else if let Some((f, xs)) = g.node[r].clone() {
            let args: Vec<Variable> = xs
                .into_iter()
                .map(|x| {
                    let rx = g.find(x);
                    g.vars[rep[&rx]].clone()
                })
                .collect();
            atoms.push(FlatAtom::EqApp(g.vars[i].clone(), f, args));
        }
    }
    Unified::Sat(BasicFormula::new(atoms))
}

/// Satisfiability of `b` in rational trees, every variable existential.
/// `quant` is accepted for symmetry with the formula `∃quant b`; free
/// variables are existentially closed as well.
pub fn decide_exists(_quant: &[Variable], b: &BasicFormula) -> bool {
    let mut g = match Graph::build(b) {
        Ok(g) => g,
        Err(Clash) => return false,
    };
    let fin: Vec<usize> = b.finites().map(|a| g.index[a.finite_var().unwrap()]).collect();
    let forced = g.closure(fin);
    !g.has_cycle_among(&forced)
}

/// `T ⊨ a → a2` for basic formulas over rational trees.
pub fn entail_basic(a: &BasicFormula, a2: &BasicFormula) -> bool {
    if !decide_exists(&[], a) {
        return true;
    }
    let mut g = Graph::build(a).expect("satisfiable");
    for v in a2.vars() {
        g.id(&v);
    }
    let n = g.vars.len();
    let roots: Vec<usize> = (0..n).filter(|&i| g.find(i) == i).collect();
    let kids: HashMap<usize, Vec<usize>> = roots.iter().map(|&r| (r, g.kids(r))).collect();
    let mut block: HashMap<usize, usize> = HashMap::new();
    {
        let mut initial: HashMap<Option<Symbol>, usize> = HashMap::new();
        for &r in &roots {
            let b = match &g.node[r] {
                Some((f, _)) => {
                    let next = initial.len() + n;
                    *initial.entry(Some(f.clone())).or_insert(next)
                }
                None => r,
            };
            block.insert(r, b);
        }
    }
    loop {
        let mut sig: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let mut next = HashMap::new();
        for &r in &roots {
            let key = (block[&r], kids[&r].iter().map(|k| block[k]).collect::<Vec<_>>());
            let fresh = sig.len();
            next.insert(r, *sig.entry(key).or_insert(fresh));
        }
        let before: HashSet<usize> = block.values().copied().collect();
        let stable = sig.len() == before.len();
        block = next;
        if stable {
            break;
        }
    }
    let fin: Vec<usize> = a.finites().map(|x| g.index[x.finite_var().unwrap()]).collect();
    let forced = g.closure(fin);
    for atom in a2.atoms() {
        let ok = match atom {
            FlatAtom::True => true,
            FlatAtom::EqVar(x, y) => {
                let (rx, ry) = (g.index[x], g.index[y]);
                let (rx, ry) = (g.find(rx), g.find(ry));
                block[&rx] == block[&ry]
            }
            FlatAtom::EqApp(x, f, ys) => {
                let rx = g.index[x];
                let rx = g.find(rx);
                match g.node[rx].clone() {
                    Some((h, xs)) if h == *f => xs.iter().zip(ys).all(|(&xi, y)| {
                        let (a, b) = (g.find(xi), g.index[y]);
                        let b = g.find(b);
                        block[&a] == block[&b]
                    }),
                    _ => false,
                }
            }
            FlatAtom::Finite(u) => {
                let ru = g.index[u];
                let reach = g.closure([ru]);
                let leaves_forced = reach.iter().all(|r| g.node[*r].is_some() || forced.contains(r));
                let root = g.find(ru);
                leaves_forced && !g.has_cycle_among(&[root].into_iter().collect())
            }
        };
        if !ok {
            return false;
        }
    }
    true
}

/// Whether an assignment of rational trees to the free variables satisfies
/// `∃quant (alpha ∧ ⋀ ¬(∃ȳᵢ βᵢ))`, where `alpha` fixes `quant` uniquely.
pub fn check_solution(
    quant: &[Variable],
    alpha: &BasicFormula,
    negparts: &[(Vec<Variable>, BasicFormula)],
    assignment: &HashMap<Variable, RationalTree>,
) -> bool {
    let mut ctx = VarContext::new();
    ctx.observe_all(alpha.vars().iter());
    ctx.observe_all(quant);
    for (ys, beta) in negparts {
        ctx.observe_all(ys);
        ctx.observe_all(beta.vars().iter());
    }
    ctx.observe_all(assignment.keys());
    let mut ground = BasicFormula::default();
    let mut sorted: Vec<_> = assignment.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(b.0));
    for (x, tree) in sorted {
        let names: Vec<Variable> = (0..tree.nodes.len()).map(|_| ctx.fresh("t")).collect();
        for (i, (f, kids)) in tree.nodes.iter().enumerate() {
            ground.push(FlatAtom::EqApp(names[i].clone(), f.clone(), kids.iter().map(|&k| names[k].clone()).collect()));
        }
        ground.push(FlatAtom::EqVar(x.clone(), names[tree.root].clone()));
    }
    let with = |extra: &BasicFormula| -> BasicFormula {
        alpha.atoms().iter().chain(extra.atoms()).chain(ground.atoms()).cloned().collect()
    };
    if !decide_exists(quant, &with(&BasicFormula::default())) {
        return false;
    }
    negparts.iter().all(|(_, beta)| !decide_exists(quant, &with(beta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::OrderKey;

    fn v(name: &str, k: i64) -> Variable {
        Variable::new(name, OrderKey::from_int(k))
    }

    #[test]
    fn clash_is_unsat() {
        let x = v("x", 1);
        let b = BasicFormula::new(vec![
            FlatAtom::EqApp(x.clone(), Symbol::new("a", 0), vec![]),
            FlatAtom::EqApp(x, Symbol::new("b", 0), vec![]),
        ]);
        assert_eq!(unify(&b), Unified::Unsat);
        assert!(!decide_exists(&[], &b));
    }

    #[test]
    fn cyclic_solution_without_occurs_check() {
        let x = v("x", 1);
        let f = Symbol::new("f", 1);
        let b = BasicFormula::new(vec![FlatAtom::EqApp(x.clone(), f, vec![x.clone()])]);
        assert!(decide_exists(&[], &b));
        let mut fin = b.clone();
        fin.push(FlatAtom::Finite(x));
        assert!(!decide_exists(&[], &fin));
    }

    #[test]
    fn finiteness_propagates_down() {
        let (x, y) = (v("x", 1), v("y", 2));
        let f = Symbol::new("f", 1);
        let b = BasicFormula::new(vec![
            FlatAtom::EqApp(x.clone(), f.clone(), vec![y.clone()]),
            FlatAtom::EqApp(y.clone(), f, vec![y.clone()]),
            FlatAtom::Finite(x),
        ]);
        assert!(!decide_exists(&[], &b));
    }

    #[test]
    fn unify_names_classes_by_least_variable() {
        let (x, y, z) = (v("x", 3), v("y", 2), v("z", 1));
        let f = Symbol::new("f", 1);
        let b = BasicFormula::new(vec![
            FlatAtom::EqVar(z.clone(), x.clone()),
            FlatAtom::EqApp(x.clone(), f.clone(), vec![y.clone()]),
        ]);
        match unify(&b) {
            Unified::Sat(s) => {
                assert!(s.is_solved());
                assert!(s.contains(&FlatAtom::EqVar(x.clone(), z.clone())));
                assert!(s.contains(&FlatAtom::EqApp(z, f, vec![y])));
            }
            Unified::Unsat => panic!("satisfiable"),
        }
    }

    #[test]
    fn bisimilar_cycles_are_entailed_equal() {
        let (x, y) = (v("x", 1), v("y", 2));
        let f = Symbol::new("f", 1);
        let a = BasicFormula::new(vec![
            FlatAtom::EqApp(x.clone(), f.clone(), vec![x.clone()]),
            FlatAtom::EqApp(y.clone(), f, vec![y.clone()]),
        ]);
        assert!(entail_basic(&a, &BasicFormula::new(vec![FlatAtom::EqVar(y.clone(), x.clone())])));
        assert!(!entail_basic(&BasicFormula::default(), &BasicFormula::new(vec![FlatAtom::EqVar(y, x)])));
    }

    #[test]
    fn finite_entailment_needs_finite_leaves() {
        let (x, y) = (v("x", 1), v("y", 2));
        let f = Symbol::new("f", 1);
        let eq = FlatAtom::EqApp(x.clone(), f, vec![y.clone()]);
        let goal = BasicFormula::new(vec![FlatAtom::Finite(x.clone())]);
        assert!(!entail_basic(&BasicFormula::new(vec![eq.clone()]), &goal));
        assert!(entail_basic(&BasicFormula::new(vec![eq.clone(), FlatAtom::Finite(y.clone())]), &goal));
        let back = BasicFormula::new(vec![eq, FlatAtom::Finite(x)]);
        assert!(entail_basic(&back, &BasicFormula::new(vec![FlatAtom::Finite(y)])));
    }

    #[test]
    fn tree_finiteness() {
        let f = Symbol::new("f", 1);
        let a = Symbol::new("a", 0);
        let fin = RationalTree::new(vec![(a, vec![]), (f.clone(), vec![0])], 1);
        assert!(fin.is_finite());
        let inf = RationalTree::new(vec![(f, vec![0])], 0);
        assert!(!inf.is_finite());
        assert_eq!(inf.to_string(), "f(@1)");
    }

    #[test]
    fn solution_check_uses_unique_witness() {
        // ex u. x = f(u) & ~(u = a)
        let (x, u) = (v("x", 1), v("u", 2));
        let (f, a) = (Symbol::new("f", 1), Symbol::new("a", 0));
        let alpha = BasicFormula::new(vec![FlatAtom::EqApp(x.clone(), f.clone(), vec![u.clone()])]);
        let neg = vec![(vec![], BasicFormula::new(vec![FlatAtom::EqApp(u.clone(), a.clone(), vec![])]))];
        let tree = |t: Term| RationalTree::from_term(&t).unwrap();
        let fa = tree(Term::app(&f, vec![Term::app(&a, vec![])]));
        let ffa = tree(Term::app(&f, vec![Term::app(&f, vec![Term::app(&a, vec![])])]));
        let at = |t: RationalTree| [(x.clone(), t)].into_iter().collect::<HashMap<_, _>>();
        assert!(!check_solution(std::slice::from_ref(&u), &alpha, &neg, &at(fa)));
        assert!(check_solution(&[u], &alpha, &neg, &at(ffa)));
    }
}
