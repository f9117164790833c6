//! Level conditions of working formulas.

use crate::basics::{reachable_in, FlatAtom};
use crate::oracle::entail_basic;
use crate::syntax::{is_disciplined, Variable};

use super::{forest_formula, WorkingNode};

/// Checks the conditions implied by the level of `n` against its parent.
/// With `semantic`, the entailment condition is decided by the oracle.
pub fn check_node_conditions(n: &WorkingNode, parent: Option<&WorkingNode>, semantic: bool) -> Result<(), String> {
    let k = n.level;
    if k > 5 {
        return Err(format!("node {}: level {k} out of range", n.id));
    }
    if k >= 1 && semantic {
        if let Some(p) = parent {
            if !entail_basic(&n.basic, &p.basic) {
                return Err(format!("node {}: basic formula does not entail the parent's", n.id));
            }
        }
    }
    if k >= 2 && !n.basic.eqs_distinct_and_ordered() {
        return Err(format!("node {}: equations not distinct and ordered: {}", n.id, n.basic));
    }
    if k >= 3 {
        if let Some(v) = n.basic.check_solved().first() {
            return Err(format!("node {}: not solved ({v:?}): {}", n.id, n.basic));
        }
    }
    if k >= 4 {
        if let Some(p) = parent {
            if let Some(e) = p.basic.equations().find(|e| !n.basic.contains(e)) {
                return Err(format!("node {}: parent equation {e} missing", n.id));
            }
        }
    }
    if k >= 5 {
        let r = reachable_in(&n.quant, &n.basic);
        if let Some(v) = n.quant.iter().find(|v| !r.vars.contains(*v)) {
            return Err(format!("node {}: quantified {v:?} unreachable", n.id));
        }
        if r.eqs.len() + r.finites.len() != n.basic.atoms().iter().filter(|a| **a != FlatAtom::True).count() {
            return Err(format!("node {}: unreachable atoms in {}", n.id, n.basic));
        }
        for c in &n.children {
            if c.basic.atoms().iter().all(|a| n.basic.contains(a)) {
                return Err(format!("node {}: child {} adds no atom", n.id, c.id));
            }
        }
    }
    Ok(())
}

/// Checks every node of the forest and the discipline of the whole.
pub fn check_forest(forest: &[WorkingNode], semantic: bool) -> Result<(), String> {
    fn walk(n: &WorkingNode, parent: Option<&WorkingNode>, semantic: bool) -> Result<(), String> {
        check_node_conditions(n, parent, semantic)?;
        n.children.iter().try_for_each(|c| walk(c, Some(n), semantic))
    }
    for t in forest {
        walk(t, None, semantic)?;
    }
    if !is_disciplined(&forest_formula(forest)) {
        return Err("bound variables violate the discipline".to_string());
    }
    Ok(())
}

/// Checks trees that replaced part of a larger forest: the level conditions
/// of their nodes against `parent`, their own discipline, and that their
/// bound variables lie above `floor` and avoid `enclosing`.
pub fn check_span(
    trees: &[WorkingNode],
    parent: Option<&WorkingNode>,
    enclosing: &[Variable],
    floor: Option<&Variable>,
    semantic: bool,
) -> Result<(), String> {
    fn walk(n: &WorkingNode, parent: Option<&WorkingNode>, semantic: bool) -> Result<(), String> {
        check_node_conditions(n, parent, semantic)?;
        n.children.iter().try_for_each(|c| walk(c, Some(n), semantic))
    }
    for t in trees {
        walk(t, parent, semantic)?;
        if !is_disciplined(&t.to_formula()) {
            return Err(format!("node {}: bound variables violate the discipline", t.id));
        }
        let mut bad = None;
        t.visit(&mut |n| {
            for v in &n.quant {
                if enclosing.contains(v) || floor.is_some_and(|f| !v.succ(f)) {
                    bad.get_or_insert_with(|| format!("node {}: bound {v:?} clashes with its context", n.id));
                }
            }
        });
        if let Some(b) = bad {
            return Err(b);
        }
    }
    Ok(())
}
