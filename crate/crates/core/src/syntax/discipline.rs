//! Bound-variable discipline.
//!
//! A formula is disciplined when its bound variables are pairwise distinct and
//! distinct from its free variables, and every bound variable is `≻` every
//! variable that is free in some subformula containing its binder.

use std::collections::{BTreeSet, HashSet};

use super::ast::{Formula, Term};
use super::var::{VarContext, Variable};

pub fn is_disciplined(f: &Formula) -> bool {
    let global = f.free_vars();
    let mut seen = HashSet::new();
    check(f, &global, &mut Vec::new(), &mut seen)
}

fn check(f: &Formula, global: &BTreeSet<Variable>, above: &mut Vec<Variable>, seen: &mut HashSet<Variable>) -> bool {
    match f {
        Formula::True | Formula::False | Formula::Eq(..) | Formula::Finite(_) => true,
        Formula::Not(a) => check(a, global, above, seen),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            check(a, global, above, seen) && check(b, global, above, seen)
        }
        Formula::Exists(vs, body) | Formula::Forall(vs, body) => {
            for x in vs {
                if global.contains(x) || !seen.insert(x.clone()) {
                    return false;
                }
                if global.iter().chain(above.iter()).any(|y| !x.succ(y)) {
                    return false;
                }
            }
            let inner_free = body.free_vars();
            let depth = above.len();
            above.extend(vs.iter().filter(|x| inner_free.contains(*x)).cloned());
            let ok = check(body, global, above, seen);
            above.truncate(depth);
            ok
        }
    }
}

/// Renames bound variables so the result is disciplined. A disciplined input
/// is returned unchanged; free variables are never touched.
pub fn apply_discipline(f: &Formula, ctx: &mut VarContext) -> Formula {
    if is_disciplined(f) {
        return f.clone();
    }
    ctx.observe_all(&f.all_vars());
    let global = f.free_vars();
    let mut r = Renamer {
        ctx,
        used: global.iter().cloned().collect(),
        scope: Vec::new(),
    };
    let floor = global.iter().next_back().cloned();
    r.formula(f, floor.as_ref())
}

/// [`apply_discipline`] with a private fresh-variable context.
pub fn discipline(f: &Formula) -> Formula {
    apply_discipline(f, &mut VarContext::new())
}

struct Renamer<'a> {
    ctx: &'a mut VarContext,
    used: HashSet<Variable>,
    scope: Vec<(Variable, Variable)>,
}

impl Renamer<'_> {
    fn term(&self, t: &Term) -> Term {
        t.rename(&|v| self.scope.iter().rev().find(|(old, _)| old == v).map(|(_, new)| new.clone()))
    }

    fn formula(&mut self, f: &Formula, floor: Option<&Variable>) -> Formula {
        match f {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Eq(s, t) => Formula::Eq(self.term(s), self.term(t)),
            Formula::Finite(t) => Formula::Finite(self.term(t)),
            Formula::Not(a) => Formula::not(self.formula(a, floor)),
            Formula::And(a, b) => Formula::and(self.formula(a, floor), self.formula(b, floor)),
            Formula::Or(a, b) => Formula::or(self.formula(a, floor), self.formula(b, floor)),
            Formula::Implies(a, b) => Formula::Implies(Box::new(self.formula(a, floor)), Box::new(self.formula(b, floor))),
            Formula::Iff(a, b) => Formula::Iff(Box::new(self.formula(a, floor)), Box::new(self.formula(b, floor))),
            Formula::Exists(vs, body) | Formula::Forall(vs, body) => {
                let mut fresh = Vec::with_capacity(vs.len());
                for x in vs {
                    let clash = self.used.contains(x) || floor.is_some_and(|fl| !x.succ(fl));
                    let y = if clash { self.ctx.fresh(x.name()) } else { x.clone() };
                    self.used.insert(y.clone());
                    fresh.push(y);
                }
                let new_floor = fresh.iter().max().cloned().into_iter().chain(floor.cloned()).max();
                let depth = self.scope.len();
                self.scope.extend(vs.iter().cloned().zip(fresh.iter().cloned()));
                let body = self.formula(body, new_floor.as_ref());
                self.scope.truncate(depth);
                if matches!(f, Formula::Exists(..)) {
                    Formula::Exists(fresh, Box::new(body))
                } else {
                    Formula::Forall(fresh, Box::new(body))
                }
            }
        }
    }
}
