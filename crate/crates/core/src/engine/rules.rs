//! The sixteen rewriting rules and their schedule.

use std::collections::{HashMap, HashSet};

use crate::basics::{reachable_in, BasicFormula, FlatAtom};
use crate::syntax::Variable;

use super::{Engine, EngineError, NodeId, WorkingNode};

enum EqRule {
    Drop(usize),
    Flip(usize),
    Substitute { var_eq: usize, other: usize },
    Clash,
    Decompose { keep: usize, drop: usize },
}

enum FiniteRule {
    Dedup(usize),
    Cycle,
    Follow(usize, Variable),
    Push(usize, Vec<Variable>),
}

/// Rules 1 to 5, first applicable in numeric order.
fn find_eq_rule(b: &BasicFormula) -> Option<EqRule> {
    let atoms = b.atoms();
    for (i, a) in atoms.iter().enumerate() {
        if let FlatAtom::EqVar(x, y) = a {
            if x == y {
                return Some(EqRule::Drop(i));
            }
        }
    }
    for (i, a) in atoms.iter().enumerate() {
        if let FlatAtom::EqVar(x, y) = a {
            if y.succ(x) {
                return Some(EqRule::Flip(i));
            }
        }
    }
    let mut order: Vec<&Variable> = Vec::new();
    let mut groups: HashMap<&Variable, Vec<usize>> = HashMap::new();
    for (i, a) in atoms.iter().enumerate() {
        if let Some(u) = a.lhs() {
            let g = groups.entry(u).or_default();
            if g.is_empty() {
                order.push(u);
            }
            g.push(i);
        }
    }
    let shared: Vec<&Vec<usize>> = order.iter().map(|u| &groups[u]).filter(|g| g.len() > 1).collect();
    for g in &shared {
        if let Some(&v) = g.iter().find(|&&i| matches!(atoms[i], FlatAtom::EqVar(..))) {
            let other = *g.iter().find(|&&i| i != v).unwrap();
            return Some(EqRule::Substitute { var_eq: v, other });
        }
    }
    let symbol = |i: usize| match &atoms[i] {
        FlatAtom::EqApp(_, f, _) => f,
        _ => unreachable!(),
    };
    for g in &shared {
        if g.iter().any(|&i| symbol(i) != symbol(g[0])) {
            return Some(EqRule::Clash);
        }
    }
    shared.first().map(|g| EqRule::Decompose { keep: g[0], drop: g[1] })
}

/// Rules 7, 9, 8, 10 in that order.
fn find_finite_rule(b: &BasicFormula) -> Option<FiniteRule> {
    let atoms = b.atoms();
    let mut seen = HashSet::new();
    for (i, a) in atoms.iter().enumerate() {
        if let FlatAtom::Finite(u) = a {
            if !seen.insert(u) {
                return Some(FiniteRule::Dedup(i));
            }
        }
    }
    let idx = b.eq_index();
    for a in atoms {
        if let FlatAtom::Finite(u) = a {
            if idx.contains_key(u) && b.reaches(u, u) {
                return Some(FiniteRule::Cycle);
            }
        }
    }
    for (i, a) in atoms.iter().enumerate() {
        if let FlatAtom::Finite(u) = a {
            if let Some(FlatAtom::EqVar(_, v)) = idx.get(u).map(|es| es[0]) {
                return Some(FiniteRule::Follow(i, v.clone()));
            }
        }
    }
    for (i, a) in atoms.iter().enumerate() {
        if let FlatAtom::Finite(u) = a {
            if let Some(FlatAtom::EqApp(_, _, vs)) = idx.get(u).map(|es| es[0]) {
                return Some(FiniteRule::Push(i, vs.clone()));
            }
        }
    }
    None
}

fn sorted(vars: &[Variable]) -> Vec<Variable> {
    let mut v = vars.to_vec();
    v.sort();
    v
}

fn atom_reached(a: &FlatAtom, vars: &std::collections::BTreeSet<Variable>) -> bool {
    match a {
        FlatAtom::True => false,
        FlatAtom::Finite(u) => vars.contains(u),
        _ => vars.contains(a.lhs().unwrap()),
    }
}

impl Engine<'_> {
    /// Settles the children of a level-4 node, then reduces the node to
    /// level 5 or deletes it.
    pub(super) fn process_four(&mut self, n: NodeId) -> Result<(), EngineError> {
        loop {
            let kids = self.slot(n).children.clone();
            if let Some(&c) = kids.iter().find(|&&c| self.slot(c).level != 5) {
                match self.slot(c).level {
                    0 => {
                        self.fire(12, c, |e| e.propagate(n, c))?;
                        if self.bring_to_four(c)? {
                            self.process_four(c)?;
                        }
                    }
                    4 => self.process_four(c)?,
                    l => unreachable!("child at level {l} under a level-4 node"),
                }
                if self.alive(c) && self.redundant_child(n, c) {
                    return self.fire(14, n, |e| e.delete(n));
                }
                continue;
            }
            if let Some(&c) = kids.iter().find(|&&c| !self.slot(c).children.is_empty()) {
                self.fire(16, n, |e| e.distribute(n, c))?;
                if self.redundant_child(n, c) {
                    return self.fire(14, n, |e| e.delete(n));
                }
                continue;
            }
            return self.fire(15, n, |e| e.eliminate(n));
        }
    }

    fn redundant_child(&self, n: NodeId, c: NodeId) -> bool {
        let child = self.slot(c);
        child.level == 5 && child.children.is_empty() && child.basic.set_eq(&self.slot(n).basic)
    }

    /// Rules 1 to 11 and 13 on a child that rule 12 just raised to level 1.
    /// Returns false when the child was deleted.
    fn bring_to_four(&mut self, c: NodeId) -> Result<bool, EngineError> {
        while let Some(rule) = find_eq_rule(&self.slot(c).basic) {
            match rule {
                EqRule::Drop(i) => self.fire(1, c, |e| {
                    e.slot_mut(c).basic.atoms_mut().remove(i);
                })?,
                EqRule::Flip(i) => self.fire(2, c, |e| {
                    let a = &mut e.slot_mut(c).basic.atoms_mut()[i];
                    if let FlatAtom::EqVar(x, y) = a {
                        *a = FlatAtom::EqVar(y.clone(), x.clone());
                    }
                })?,
                EqRule::Substitute { var_eq, other } => self.fire(3, c, |e| {
                    let atoms = e.slot_mut(c).basic.atoms_mut();
                    let v = atoms[var_eq].rhs_vars()[0].clone();
                    atoms[other] = match &atoms[other] {
                        FlatAtom::EqVar(_, w) => FlatAtom::EqVar(v, w.clone()),
                        FlatAtom::EqApp(_, f, ws) => FlatAtom::EqApp(v, f.clone(), ws.clone()),
                        _ => unreachable!(),
                    };
                })?,
                EqRule::Clash => {
                    self.fire(4, c, |e| e.delete(c))?;
                    return Ok(false);
                }
                EqRule::Decompose { keep, drop } => self.fire(5, c, |e| {
                    let atoms = e.slot_mut(c).basic.atoms_mut();
                    let vs = atoms[keep].rhs_vars().to_vec();
                    let ws = atoms.remove(drop).rhs_vars().to_vec();
                    atoms.extend(vs.into_iter().zip(ws).map(|(v, w)| FlatAtom::EqVar(v, w)));
                })?,
            }
        }
        self.fire(6, c, |e| e.slot_mut(c).level = 2)?;
        while let Some(rule) = find_finite_rule(&self.slot(c).basic) {
            match rule {
                FiniteRule::Dedup(i) => self.fire(7, c, |e| {
                    e.slot_mut(c).basic.atoms_mut().remove(i);
                })?,
                FiniteRule::Cycle => {
                    self.fire(9, c, |e| e.delete(c))?;
                    return Ok(false);
                }
                FiniteRule::Follow(i, v) => self.fire(8, c, |e| {
                    e.slot_mut(c).basic.atoms_mut()[i] = FlatAtom::Finite(v);
                })?,
                FiniteRule::Push(i, vs) => self.fire(10, c, |e| {
                    let atoms = e.slot_mut(c).basic.atoms_mut();
                    atoms.remove(i);
                    atoms.extend(vs.into_iter().map(FlatAtom::Finite));
                })?,
            }
        }
        self.fire(11, c, |e| e.slot_mut(c).level = 3)?;
        let p = self.slot(c).parent.expect("child of a level-4 node");
        let parent_eqs: HashMap<Variable, FlatAtom> = self
            .slot(p)
            .basic
            .equations()
            .map(|a| (a.lhs().unwrap().clone(), a.clone()))
            .collect();
        let lhs = self.slot(c).basic.lhs_set();
        if let Some(u) = parent_eqs.keys().find(|u| !lhs.contains(*u)) {
            return Err(EngineError::InvariantViolation {
                rule: 13,
                node: c,
                detail: format!(
                    "parent equation on {u:?} has no counterpart in the child: parent `{}` child `{}`",
                    self.slot(p).basic,
                    self.slot(c).basic
                ),
            });
        }
        self.fire(13, c, |e| {
            let slot = e.slot_mut(c);
            for a in slot.basic.atoms_mut() {
                if let Some(pe) = a.lhs().and_then(|u| parent_eqs.get(u)) {
                    *a = pe.clone();
                }
            }
            slot.level = 4;
        })?;
        Ok(true)
    }

    /// Rule 12: the parent's atoms are copied into the child.
    fn propagate(&mut self, p: NodeId, c: NodeId) {
        let mut atoms = self.slot(p).basic.atoms().to_vec();
        let child = self.slot_mut(c);
        atoms.append(child.basic.atoms_mut());
        child.basic = BasicFormula::new(atoms);
        child.level = 1;
    }

    /// Rule 15: keeps only the reachable part of the node and of its
    /// children.
    fn eliminate(&mut self, n: NodeId) {
        let slot = self.slot(n);
        let x = slot.quant.clone();
        let a = slot.basic.clone();
        let kids = slot.children.clone();
        let reach = reachable_in(&x, &a);
        let lhs = a.lhs_set();
        let kept_quant: Vec<Variable> = x.iter().filter(|v| reach.vars.contains(*v)).cloned().collect();
        let dropped: HashSet<&Variable> = x
            .iter()
            .filter(|v| !reach.vars.contains(*v) && !lhs.contains(*v))
            .collect();
        let lifted: Vec<Variable> = x
            .iter()
            .filter(|v| !reach.vars.contains(*v) && lhs.contains(*v))
            .cloned()
            .collect();
        let kept: BasicFormula = a.atoms().iter().filter(|t| atom_reached(t, &reach.vars)).cloned().collect();
        let unreached_finites: HashSet<&FlatAtom> = a
            .finites()
            .filter(|t| !reach.vars.contains(t.finite_var().unwrap()))
            .collect();
        for k in kids {
            let child = self.slot(k);
            let b: BasicFormula = child
                .basic
                .atoms()
                .iter()
                .filter(|t| !unreached_finites.contains(t))
                .cloned()
                .collect();
            let quant: Vec<Variable> = child.quant.iter().chain(lifted.iter()).cloned().collect();
            let r = reachable_in(&quant, &b);
            let b: BasicFormula = b.atoms().iter().filter(|t| atom_reached(t, &r.vars)).cloned().collect();
            if b.vars().iter().any(|v| dropped.contains(v)) {
                self.delete(k);
                continue;
            }
            let mut quant: Vec<Variable> = quant.into_iter().filter(|v| r.vars.contains(v)).collect();
            let moved: Vec<Variable> = if quant.iter().any(|v| lifted.contains(v)) {
                sorted(&quant)
            } else {
                Vec::new()
            };
            let mut map = HashMap::new();
            for v in moved {
                let w = self.fresh(v.name());
                map.insert(v, w);
            }
            let rename = |v: &Variable| map.get(v).cloned().unwrap_or_else(|| v.clone());
            for v in quant.iter_mut() {
                *v = rename(v);
            }
            let b = b.atoms().iter().map(|t| t.rename(&rename)).collect();
            let (quant, b) = settle(quant, b);
            let child = self.slot_mut(k);
            child.quant = quant;
            child.basic = b;
        }
        let slot = self.slot_mut(n);
        slot.quant = kept_quant;
        slot.basic = kept;
        slot.level = 5;
    }

    /// Rule 16: each grandchild below `c` becomes a new level-4 sibling of
    /// `n` carrying a fresh copy of the other children at level 0.
    pub(super) fn distribute(&mut self, n: NodeId, c: NodeId) {
        let grand = std::mem::take(&mut self.slot_mut(c).children);
        let outer: Vec<Variable> = self.slot(n).quant.iter().chain(self.slot(c).quant.iter()).cloned().collect();
        let others: Vec<WorkingNode> = self
            .slot(n)
            .children
            .iter()
            .filter(|&&k| k != c)
            .map(|&k| self.export(k))
            .collect();
        let mut siblings = Vec::with_capacity(grand.len());
        for g in grand {
            let leaf = self.export(g);
            self.free(g);
            let bound: Vec<Variable> = outer.iter().chain(leaf.quant.iter()).cloned().collect();
            let mut map = HashMap::new();
            let renamed = if outer.is_empty() { Vec::new() } else { sorted(&bound) };
            for v in renamed {
                let w = self.fresh(v.name());
                map.insert(v, w);
            }
            let quant = bound.iter().map(|v| rn(&map, v)).collect();
            let basic = leaf.basic.atoms().iter().map(|t| t.rename(&|v| rn(&map, v))).collect();
            let children = others.iter().map(|o| self.reset_copy(o, &mut map)).collect();
            siblings.push(WorkingNode {
                id: 0,
                parent: None,
                level: 4,
                quant,
                basic,
                children,
            });
        }
        self.insert_after(n, siblings);
    }

    /// A level-0 copy of `t` with fresh bound variables, renamed by `map`.
    fn reset_copy(&mut self, t: &WorkingNode, map: &mut HashMap<Variable, Variable>) -> WorkingNode {
        for v in sorted(&t.quant) {
            let w = self.fresh(v.name());
            map.insert(v, w);
        }
        WorkingNode {
            id: 0,
            parent: None,
            level: 0,
            quant: t.quant.iter().map(|v| map[v].clone()).collect(),
            basic: t.basic.atoms().iter().map(|a| a.rename(&|v| rn(map, v))).collect(),
            children: t.children.iter().map(|c| self.reset_copy(c, map)).collect(),
        }
    }
}

/// Restores orientation after bound variables moved above free ones: a
/// misoriented `u = v` is flipped and a second equation on `v` is redirected
/// to `u`, then unreachable bound variables are dropped again.
fn settle(quant: Vec<Variable>, b: BasicFormula) -> (Vec<Variable>, BasicFormula) {
    let mut atoms = b.into_atoms();
    while let Some(i) = atoms.iter().position(|a| matches!(a, FlatAtom::EqVar(x, y) if y.succ(x))) {
        let (x, y) = match &atoms[i] {
            FlatAtom::EqVar(x, y) => (x.clone(), y.clone()),
            _ => unreachable!(),
        };
        atoms[i] = FlatAtom::EqVar(y.clone(), x.clone());
        if let Some(j) = (0..atoms.len()).find(|&j| j != i && atoms[j].lhs() == Some(&y)) {
            atoms[j] = match &atoms[j] {
                FlatAtom::EqVar(_, w) => FlatAtom::EqVar(x.clone(), w.clone()),
                FlatAtom::EqApp(_, f, ws) => FlatAtom::EqApp(x.clone(), f.clone(), ws.clone()),
                _ => unreachable!(),
            };
        }
        atoms.retain(|a| !matches!(a, FlatAtom::EqVar(x, y) if x == y));
    }
    let b = BasicFormula::new(atoms);
    let r = reachable_in(&quant, &b);
    let quant = quant.into_iter().filter(|v| r.vars.contains(v)).collect();
    let b = b.atoms().iter().filter(|t| atom_reached(t, &r.vars)).cloned().collect();
    (quant, b)
}

fn rn(map: &HashMap<Variable, Variable>, v: &Variable) -> Variable {
    map.get(v).cloned().unwrap_or_else(|| v.clone())
}
