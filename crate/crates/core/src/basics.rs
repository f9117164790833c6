//! Flat atoms, basic formulas, solvedness and reachability.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::syntax::{Formula, Symbol, Term, Variable};

/// `true`, `x = y`, `x = f(y1..yn)` or `finite(x)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum FlatAtom {
    True,
    EqVar(Variable, Variable),
    EqApp(Variable, Symbol, Vec<Variable>),
    Finite(Variable),
}

impl FlatAtom {
    pub fn lhs(&self) -> Option<&Variable> {
        match self {
            FlatAtom::EqVar(x, _) | FlatAtom::EqApp(x, ..) => Some(x),
            _ => None,
        }
    }

    pub fn is_equation(&self) -> bool {
        matches!(self, FlatAtom::EqVar(..) | FlatAtom::EqApp(..))
    }

    pub fn finite_var(&self) -> Option<&Variable> {
        match self {
            FlatAtom::Finite(x) => Some(x),
            _ => None,
        }
    }

    /// Variables on the right-hand side of an equation.
    pub fn rhs_vars(&self) -> &[Variable] {
        match self {
            FlatAtom::EqVar(_, y) => std::slice::from_ref(y),
            FlatAtom::EqApp(_, _, args) => args,
            _ => &[],
        }
    }

    pub fn vars(&self) -> Vec<&Variable> {
        match self {
            FlatAtom::True => vec![],
            FlatAtom::EqVar(x, y) => vec![x, y],
            FlatAtom::EqApp(x, _, args) => std::iter::once(x).chain(args.iter()).collect(),
            FlatAtom::Finite(x) => vec![x],
        }
    }

    pub fn rename(&self, map: &dyn Fn(&Variable) -> Variable) -> FlatAtom {
        match self {
            FlatAtom::True => FlatAtom::True,
            FlatAtom::EqVar(x, y) => FlatAtom::EqVar(map(x), map(y)),
            FlatAtom::EqApp(x, f, args) => FlatAtom::EqApp(map(x), f.clone(), args.iter().map(map).collect()),
            FlatAtom::Finite(x) => FlatAtom::Finite(map(x)),
        }
    }

    pub fn to_formula(&self) -> Formula {
        match self {
            FlatAtom::True => Formula::True,
            FlatAtom::EqVar(x, y) => Formula::Eq(Term::var(x), Term::var(y)),
            FlatAtom::EqApp(x, f, args) => {
                Formula::Eq(Term::var(x), Term::App(f.clone(), args.iter().map(Term::var).collect()))
            }
            FlatAtom::Finite(x) => Formula::Finite(Term::var(x)),
        }
    }

    /// Reads a flat atom back from a formula atom.
    pub fn from_formula(f: &Formula) -> Option<FlatAtom> {
        let var_args = |args: &[Term]| args.iter().map(|a| a.as_var().cloned()).collect::<Option<Vec<_>>>();
        match f {
            Formula::True => Some(FlatAtom::True),
            Formula::Finite(Term::Var(x)) => Some(FlatAtom::Finite(x.clone())),
            Formula::Eq(Term::Var(x), Term::Var(y)) => Some(FlatAtom::EqVar(x.clone(), y.clone())),
            Formula::Eq(Term::Var(x), Term::App(g, args)) => Some(FlatAtom::EqApp(x.clone(), g.clone(), var_args(args)?)),
            _ => None,
        }
    }

    fn kind(&self) -> u8 {
        match self {
            FlatAtom::EqVar(..) | FlatAtom::EqApp(..) => 0,
            FlatAtom::Finite(_) => 1,
            FlatAtom::True => 2,
        }
    }

    /// Canonical order: kind, then left-hand variable, then right-hand shape.
    pub fn canonical_cmp(&self, other: &FlatAtom) -> Ordering {
        self.kind()
            .cmp(&other.kind())
            .then_with(|| self.lhs().or(self.finite_var()).cmp(&other.lhs().or(other.finite_var())))
            .then_with(|| match (self, other) {
                (FlatAtom::EqVar(_, a), FlatAtom::EqVar(_, b)) => a.cmp(b),
                (FlatAtom::EqVar(..), FlatAtom::EqApp(..)) => Ordering::Less,
                (FlatAtom::EqApp(..), FlatAtom::EqVar(..)) => Ordering::Greater,
                (FlatAtom::EqApp(_, f, xs), FlatAtom::EqApp(_, g, ys)) => f.cmp(g).then_with(|| xs.cmp(ys)),
                _ => Ordering::Equal,
            })
    }
}

impl fmt::Display for FlatAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlatAtom::True => f.write_str("true"),
            FlatAtom::EqVar(x, y) => write!(f, "{x} = {y}"),
            FlatAtom::EqApp(x, g, args) => {
                write!(f, "{x} = {g}")?;
                if args.is_empty() {
                    return if g.prints_bare() { Ok(()) } else { f.write_str("()") };
                }
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            FlatAtom::Finite(x) => write!(f, "finite({x})"),
        }
    }
}

/// A multiset of flat atoms read as their conjunction. Empty means `true`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct BasicFormula {
    atoms: Vec<FlatAtom>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SolvedViolation {
    DuplicateLhs(Variable),
    MisorderedVarEq(Variable, Variable),
    LhsInFinite(Variable),
    DuplicateFinite(Variable),
}

impl BasicFormula {
    pub fn new(atoms: Vec<FlatAtom>) -> Self {
        BasicFormula { atoms }
    }

    pub fn atoms(&self) -> &[FlatAtom] {
        &self.atoms
    }

    pub fn atoms_mut(&mut self) -> &mut Vec<FlatAtom> {
        &mut self.atoms
    }

    pub fn into_atoms(self) -> Vec<FlatAtom> {
        self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn push(&mut self, a: FlatAtom) {
        self.atoms.push(a);
    }

    pub fn equations(&self) -> impl Iterator<Item = &FlatAtom> {
        self.atoms.iter().filter(|a| a.is_equation())
    }

    pub fn finites(&self) -> impl Iterator<Item = &FlatAtom> {
        self.atoms.iter().filter(|a| matches!(a, FlatAtom::Finite(_)))
    }

    pub fn lhs_set(&self) -> BTreeSet<Variable> {
        self.atoms.iter().filter_map(|a| a.lhs().cloned()).collect()
    }

    pub fn finite_set(&self) -> BTreeSet<Variable> {
        self.atoms.iter().filter_map(|a| a.finite_var().cloned()).collect()
    }

    pub fn vars(&self) -> BTreeSet<Variable> {
        self.atoms.iter().flat_map(|a| a.vars()).cloned().collect()
    }

    pub fn without_true(&self) -> BasicFormula {
        BasicFormula::new(self.atoms.iter().filter(|a| **a != FlatAtom::True).cloned().collect())
    }

    /// Atoms sorted canonically.
    pub fn canonical(&self) -> BasicFormula {
        let mut atoms = self.atoms.clone();
        atoms.sort_by(FlatAtom::canonical_cmp);
        BasicFormula::new(atoms)
    }

    /// Equality as sets of atoms.
    pub fn set_eq(&self, other: &BasicFormula) -> bool {
        let a: HashSet<&FlatAtom> = self.atoms.iter().collect();
        let b: HashSet<&FlatAtom> = other.atoms.iter().collect();
        a == b
    }

    pub fn contains(&self, a: &FlatAtom) -> bool {
        self.atoms.contains(a)
    }

    /// Distinct equation left-hand sides and every `x = y` with `x ≻ y`.
    pub fn eqs_distinct_and_ordered(&self) -> bool {
        let mut seen = HashSet::new();
        self.equations().all(|a| {
            seen.insert(a.lhs().unwrap())
                && match a {
                    FlatAtom::EqVar(x, y) => x.succ(y),
                    _ => true,
                }
        })
    }

    pub fn check_solved(&self) -> Vec<SolvedViolation> {
        let mut out = Vec::new();
        let mut lhs = HashSet::new();
        let mut fin = HashSet::new();
        for a in &self.atoms {
            match a {
                FlatAtom::EqVar(x, _) | FlatAtom::EqApp(x, ..) => {
                    if !lhs.insert(x.clone()) {
                        out.push(SolvedViolation::DuplicateLhs(x.clone()));
                    }
                    if let FlatAtom::EqVar(_, y) = a {
                        if !x.succ(y) {
                            out.push(SolvedViolation::MisorderedVarEq(x.clone(), y.clone()));
                        }
                    }
                }
                FlatAtom::Finite(x) => {
                    if !fin.insert(x.clone()) {
                        out.push(SolvedViolation::DuplicateFinite(x.clone()));
                    }
                }
                FlatAtom::True => {}
            }
        }
        let mut both: Vec<_> = lhs.intersection(&fin).cloned().collect();
        both.sort();
        out.extend(both.into_iter().map(SolvedViolation::LhsInFinite));
        out
    }

    pub fn is_solved(&self) -> bool {
        self.check_solved().is_empty()
    }

    /// Equations grouped by left-hand side.
    pub fn eq_index(&self) -> HashMap<&Variable, Vec<&FlatAtom>> {
        let mut m: HashMap<&Variable, Vec<&FlatAtom>> = HashMap::new();
        for a in self.equations() {
            m.entry(a.lhs().unwrap()).or_default().push(a);
        }
        m
    }

    /// Whether `to` can be reached from `from` by one or more equation steps.
    pub fn reaches(&self, from: &Variable, to: &Variable) -> bool {
        let idx = self.eq_index();
        let mut stack: Vec<&Variable> = vec![from];
        let mut seen = HashSet::new();
        while let Some(v) = stack.pop() {
            for a in idx.get(v).into_iter().flatten() {
                for w in a.rhs_vars() {
                    if w == to {
                        return true;
                    }
                    if seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
        }
        false
    }

    pub fn to_formula(&self) -> Formula {
        Formula::and_all(self.atoms.iter().map(FlatAtom::to_formula))
    }
}

impl fmt::Display for BasicFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return f.write_str("true");
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromIterator<FlatAtom> for BasicFormula {
    fn from_iter<I: IntoIterator<Item = FlatAtom>>(iter: I) -> Self {
        BasicFormula::new(iter.into_iter().collect())
    }
}

/// The reachable part of a basic formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reachability {
    pub vars: BTreeSet<Variable>,
    pub eqs: Vec<FlatAtom>,
    pub finites: Vec<FlatAtom>,
}

impl Reachability {
    pub fn atoms(&self) -> BasicFormula {
        self.eqs.iter().chain(self.finites.iter()).cloned().collect()
    }
}

/// Variables reachable from `seeds` by following equations, the equations
/// whose left-hand side is reachable, and the `finite` atoms on reachable
/// variables.
pub fn reachable(b: &BasicFormula, seeds: &BTreeSet<Variable>) -> Reachability {
    let idx = b.eq_index();
    let mut vars = seeds.clone();
    let mut stack: Vec<Variable> = seeds.iter().cloned().collect();
    while let Some(v) = stack.pop() {
        for a in idx.get(&v).into_iter().flatten() {
            for w in a.rhs_vars() {
                if vars.insert(w.clone()) {
                    stack.push(w.clone());
                }
            }
        }
    }
    let eqs = b.equations().filter(|a| vars.contains(a.lhs().unwrap())).cloned().collect();
    let finites = b
        .finites()
        .filter(|a| vars.contains(a.finite_var().unwrap()))
        .cloned()
        .collect();
    Reachability { vars, eqs, finites }
}

/// Reachability in `∃quant b`: seeds are the free variables of that formula.
pub fn reachable_in(quant: &[Variable], b: &BasicFormula) -> Reachability {
    let seeds = b.vars().into_iter().filter(|v| !quant.contains(v)).collect();
    reachable(b, &seeds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::OrderKey;

    fn v(name: &str, k: i64) -> Variable {
        Variable::new(name, OrderKey::from_int(k))
    }

    #[test]
    fn reachability_follows_equations_only() {
        let (x, z, u, vv, w) = (v("x", 1), v("z", 2), v("u", 3), v("v", 4), v("w", 5));
        let f = Symbol::new("f", 2);
        let g = Symbol::new("g", 2);
        let b = BasicFormula::new(vec![
            FlatAtom::EqApp(z.clone(), f.clone(), vec![u.clone(), vv.clone()]),
            FlatAtom::EqApp(vv.clone(), g, vec![vv.clone(), u.clone()]),
            FlatAtom::EqApp(w.clone(), f, vec![u.clone(), vv.clone()]),
            FlatAtom::Finite(u.clone()),
            FlatAtom::Finite(x.clone()),
        ]);
        let r = reachable_in(&[u.clone(), vv.clone(), w.clone()], &b);
        assert_eq!(r.vars, [x.clone(), z.clone(), u.clone(), vv.clone()].into_iter().collect());
        assert_eq!(r.eqs, vec![b.atoms()[0].clone(), b.atoms()[1].clone()]);
        assert_eq!(r.finites, vec![FlatAtom::Finite(u), FlatAtom::Finite(x)]);
    }

    #[test]
    fn reachability_of_true() {
        let seeds: BTreeSet<_> = [v("a", 1)].into_iter().collect();
        let r = reachable(&BasicFormula::default(), &seeds);
        assert_eq!(r.vars, seeds);
        assert!(r.eqs.is_empty() && r.finites.is_empty());
    }

    #[test]
    fn solved_report_lists_every_violation() {
        let (x, y) = (v("x", 2), v("y", 1));
        let a = Symbol::new("a", 0);
        let b = BasicFormula::new(vec![
            FlatAtom::EqVar(y.clone(), x.clone()),
            FlatAtom::EqApp(x.clone(), a.clone(), vec![]),
            FlatAtom::EqApp(x.clone(), a, vec![]),
            FlatAtom::Finite(x.clone()),
            FlatAtom::Finite(y.clone()),
            FlatAtom::Finite(y.clone()),
        ]);
        let rep = b.check_solved();
        assert!(rep.contains(&SolvedViolation::MisorderedVarEq(y.clone(), x.clone())));
        assert!(rep.contains(&SolvedViolation::DuplicateLhs(x.clone())));
        assert!(rep.contains(&SolvedViolation::DuplicateFinite(y.clone())));
        assert!(rep.contains(&SolvedViolation::LhsInFinite(x.clone())));
        assert!(rep.contains(&SolvedViolation::LhsInFinite(y)));
        assert!(BasicFormula::default().is_solved());
    }

    #[test]
    fn self_reachability() {
        let (x, y) = (v("x", 2), v("y", 1));
        let f = Symbol::new("f", 1);
        let b = BasicFormula::new(vec![
            FlatAtom::EqApp(x.clone(), f.clone(), vec![y.clone()]),
            FlatAtom::EqApp(y.clone(), f, vec![x.clone()]),
        ]);
        assert!(b.reaches(&x, &x));
        let c = BasicFormula::new(vec![b.atoms()[0].clone()]);
        assert!(!c.reaches(&x, &x));
    }
}
