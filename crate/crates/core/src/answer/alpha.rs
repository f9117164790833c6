//! Equality of solved forms up to renaming of bound variables and order of
//! atoms and negated parts.

use std::collections::{HashMap, HashSet};

use crate::basics::{BasicFormula, FlatAtom};
use crate::syntax::Variable;

use super::{ExplicitSolvedForm, NegPart};

struct Matcher {
    bound_a: HashSet<Variable>,
    bound_b: HashSet<Variable>,
    fwd: HashMap<Variable, Variable>,
    bwd: HashMap<Variable, Variable>,
    trail: Vec<Variable>,
}

type Cont<'k> = &'k mut dyn FnMut(&mut Matcher) -> bool;

impl Matcher {
    fn new<'a>(a: impl IntoIterator<Item = &'a Variable>, b: impl IntoIterator<Item = &'a Variable>) -> Self {
        Matcher {
            bound_a: a.into_iter().cloned().collect(),
            bound_b: b.into_iter().cloned().collect(),
            fwd: HashMap::new(),
            bwd: HashMap::new(),
            trail: Vec::new(),
        }
    }

    fn var(&mut self, x: &Variable, y: &Variable) -> bool {
        match (self.bound_a.contains(x), self.bound_b.contains(y)) {
            (false, false) => x == y,
            (true, true) => match (self.fwd.get(x), self.bwd.get(y)) {
                (Some(y2), _) => y2 == y,
                (None, Some(_)) => false,
                (None, None) => {
                    self.fwd.insert(x.clone(), y.clone());
                    self.bwd.insert(y.clone(), x.clone());
                    self.trail.push(x.clone());
                    true
                }
            },
            _ => false,
        }
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let x = self.trail.pop().unwrap();
            let y = self.fwd.remove(&x).unwrap();
            self.bwd.remove(&y);
        }
    }

    fn atom(&mut self, a: &FlatAtom, b: &FlatAtom) -> bool {
        match (a, b) {
            (FlatAtom::True, FlatAtom::True) => true,
            (FlatAtom::Finite(x), FlatAtom::Finite(y)) => self.var(x, y),
            (FlatAtom::EqVar(x1, x2), FlatAtom::EqVar(y1, y2)) => self.var(x1, y1) && self.var(x2, y2),
            (FlatAtom::EqApp(x, f, xs), FlatAtom::EqApp(y, g, ys)) => {
                f == g && self.var(x, y) && xs.iter().zip(ys).all(|(x, y)| self.var(x, y))
            }
            _ => false,
        }
    }

    fn atoms(&mut self, a: &[FlatAtom], b: &[FlatAtom], used: &mut [bool], k: Cont<'_>) -> bool {
        let Some((first, rest)) = a.split_first() else {
            return k(self);
        };
        for j in 0..b.len() {
            if used[j] {
                continue;
            }
            let mark = self.trail.len();
            if self.atom(first, &b[j]) {
                used[j] = true;
                if self.atoms(rest, b, used, k) {
                    return true;
                }
                used[j] = false;
            }
            self.undo(mark);
        }
        false
    }

    fn negparts(&mut self, a: &[NegPart], b: &[NegPart], used: &mut [bool], k: Cont<'_>) -> bool {
        let Some((first, rest)) = a.split_first() else {
            return k(self);
        };
        for j in 0..b.len() {
            let other = &b[j];
            if used[j] || other.quant.len() != first.quant.len() || other.beta.len() != first.beta.len() {
                continue;
            }
            used[j] = true;
            let mut inner = vec![false; other.beta.len()];
            let found = self.atoms(first.beta.atoms(), other.beta.atoms(), &mut inner, &mut |m: &mut Matcher| {
                let covered = first.quant.iter().all(|v| m.fwd.contains_key(v));
                covered && m.negparts(rest, b, used, k)
            });
            if found {
                return true;
            }
            used[j] = false;
        }
        false
    }
}

/// Whether two explicit solved forms differ only in bound-variable names
/// and the order of their parts.
pub fn alpha_equivalent(a: &ExplicitSolvedForm, b: &ExplicitSolvedForm) -> bool {
    if a.quant.len() != b.quant.len() || a.alpha.len() != b.alpha.len() || a.negparts.len() != b.negparts.len() {
        return false;
    }
    let bound = |e: &ExplicitSolvedForm| -> Vec<Variable> {
        e.quant.iter().chain(e.negparts.iter().flat_map(|n| n.quant.iter())).cloned().collect()
    };
    let (ba, bb) = (bound(a), bound(b));
    let mut m = Matcher::new(&ba, &bb);
    let mut used = vec![false; b.alpha.len()];
    let mut negs_used = vec![false; b.negparts.len()];
    m.atoms(a.alpha.atoms(), b.alpha.atoms(), &mut used, &mut |m: &mut Matcher| {
        a.quant.iter().all(|v| m.fwd.contains_key(v))
            && m.negparts(&a.negparts, &b.negparts, &mut negs_used, &mut |_| true)
    })
}

/// [`alpha_equivalent`] for `∃qa a` and `∃qb b`.
pub fn basic_alpha_equivalent(qa: &[Variable], a: &BasicFormula, qb: &[Variable], b: &BasicFormula) -> bool {
    let wrap = |q: &[Variable], b: &BasicFormula| ExplicitSolvedForm {
        quant: q.to_vec(),
        alpha: b.clone(),
        negparts: Vec::new(),
    };
    alpha_equivalent(&wrap(qa, a), &wrap(qb, b))
}
