//! Canonical compact form of explicit solved forms: bound variables defined
//! as another variable are substituted away, bound variables with the same
//! definition up to bisimulation are merged, and the remaining bound
//! variables are numbered in depth-first order from the free variables.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::basics::{BasicFormula, FlatAtom};
use crate::syntax::{OrderKey, Symbol, Variable};

use super::{ExplicitSolvedForm, NegPart};

type Subst = HashMap<Variable, Variable>;

/// A class and the classes of the arguments; unclassified arguments by name.
type Signature<'a> = (usize, Vec<Result<usize, &'a Variable>>);

fn resolve(s: &Subst, v: &Variable) -> Variable {
    let mut v = v;
    while let Some(w) = s.get(v) {
        v = w;
    }
    v.clone()
}

fn apply(s: &Subst, b: &BasicFormula) -> BasicFormula {
    let mut out: Vec<FlatAtom> = Vec::new();
    for a in b.atoms() {
        let a = a.rename(&|v| resolve(s, v));
        if matches!(&a, FlatAtom::EqVar(x, y) if x == y) || out.contains(&a) {
            continue;
        }
        out.push(a);
    }
    BasicFormula::new(out)
}

fn rename_once(s: &Subst, b: &BasicFormula) -> BasicFormula {
    b.atoms().iter().map(|a| a.rename(&|v| s.get(v).cloned().unwrap_or_else(|| v.clone()))).collect()
}

/// Removes `v = w` equations in which one side is in `bound`.
fn drop_var_eqs(bound: &HashSet<Variable>, b: &BasicFormula, s: &mut Subst) -> BasicFormula {
    let mut b = b.clone();
    loop {
        let found = b.atoms().iter().find_map(|a| match a {
            FlatAtom::EqVar(x, y) if bound.contains(x) && !s.contains_key(x) => Some((x.clone(), y.clone())),
            FlatAtom::EqVar(x, y) if bound.contains(y) && !s.contains_key(y) => Some((y.clone(), x.clone())),
            _ => None,
        });
        let Some((gone, keep)) = found else {
            return b;
        };
        s.insert(gone, keep);
        b = apply(s, &b);
    }
}

/// Merges variables of `bound` whose definitions in `b` unfold to the same
/// tree.
fn merge_bisimilar(bound: &HashSet<Variable>, b: &BasicFormula, s: &mut Subst) -> BasicFormula {
    let defs: BTreeMap<&Variable, (&Symbol, &[Variable])> = b
        .atoms()
        .iter()
        .filter_map(|a| match a {
            FlatAtom::EqApp(x, f, args) if bound.contains(x) => Some((x, (f, args.as_slice()))),
            _ => None,
        })
        .collect();
    let mut symbols: HashMap<&Symbol, usize> = HashMap::new();
    let mut class: HashMap<&Variable, usize> = HashMap::new();
    for (v, (f, _)) in &defs {
        let n = symbols.len();
        class.insert(v, *symbols.entry(f).or_insert(n));
    }
    loop {
        let mut sigs: HashMap<Signature, usize> = HashMap::new();
        let mut refined: HashMap<&Variable, usize> = HashMap::new();
        for (v, (_, args)) in &defs {
            let sig = (class[v], args.iter().map(|a| class.get(a).copied().ok_or(a)).collect());
            let n = sigs.len();
            refined.insert(v, *sigs.entry(sig).or_insert(n));
        }
        let stable = sigs.len() == class.values().collect::<BTreeSet<_>>().len();
        class = refined;
        if stable {
            break;
        }
    }
    let mut rep: HashMap<usize, &Variable> = HashMap::new();
    for v in defs.keys() {
        match rep.get(&class[v]) {
            Some(&r) => {
                s.insert((*v).clone(), r.clone());
            }
            None => {
                rep.insert(class[v], v);
            }
        }
    }
    apply(s, b)
}

/// Pre-order numbering of the variables reached from `roots` through the
/// equations of `b`.
fn visit_order(roots: &[Variable], b: &BasicFormula) -> Vec<Variable> {
    let idx = b.eq_index();
    let mut seen = HashSet::new();
    let mut order = Vec::new();
    fn go<'a>(
        v: &'a Variable,
        idx: &HashMap<&'a Variable, Vec<&'a FlatAtom>>,
        seen: &mut HashSet<&'a Variable>,
        order: &mut Vec<Variable>,
    ) {
        if !seen.insert(v) {
            return;
        }
        order.push(v.clone());
        for e in idx.get(v).into_iter().flatten() {
            for w in e.rhs_vars() {
                go(w, idx, seen, order);
            }
        }
    }
    for r in roots {
        go(r, &idx, &mut seen, &mut order);
    }
    order
}

fn ordered_atoms(order: &[Variable], b: &BasicFormula) -> BasicFormula {
    let pos: HashMap<&Variable, usize> = order.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let rank = |v: &Variable| pos.get(v).copied().unwrap_or(usize::MAX);
    let mut atoms: Vec<FlatAtom> = b.without_true().into_atoms();
    atoms.sort_by_key(|a| match a {
        FlatAtom::Finite(u) => (1, rank(u)),
        other => (0, rank(other.lhs().unwrap())),
    });
    BasicFormula::new(atoms)
}

fn renumber(
    quant: &[Variable],
    order: &[Variable],
    counter: &mut usize,
    s: &mut Subst,
) -> Vec<Variable> {
    let mut keys: Vec<OrderKey> = quant.iter().map(|v| v.key().clone()).collect();
    keys.sort();
    let bound: HashSet<&Variable> = quant.iter().collect();
    let mut seq: Vec<&Variable> = order.iter().filter(|v| bound.contains(v)).collect();
    let mut rest: Vec<&Variable> = quant.iter().filter(|v| !seq.contains(v)).collect();
    rest.sort();
    seq.extend(rest);
    seq.into_iter()
        .zip(keys)
        .map(|(v, k)| {
            *counter += 1;
            let w = Variable::new(format!("u{counter}"), k);
            s.insert(v.clone(), w.clone());
            w
        })
        .collect()
}

/// The compact canonical form of `e`; equivalent to `e` in the theory.
pub fn compact(e: &ExplicitSolvedForm) -> ExplicitSolvedForm {
    let bound: HashSet<Variable> = e.quant.iter().cloned().collect();
    let mut s = Subst::new();
    let alpha = drop_var_eqs(&bound, &e.alpha, &mut s);
    let alpha = merge_bisimilar(&bound, &alpha, &mut s);
    let quant: Vec<Variable> = e.quant.iter().filter(|v| !s.contains_key(*v)).cloned().collect();
    let negparts: Vec<NegPart> = e
        .negparts
        .iter()
        .map(|n| {
            let beta = apply(&s, &n.beta);
            let local: HashSet<Variable> = n.quant.iter().cloned().collect();
            let mut ls = Subst::new();
            let beta = drop_var_eqs(&local, &beta, &mut ls);
            let beta = merge_bisimilar(&local, &beta, &mut ls);
            let quant = n.quant.iter().filter(|v| !ls.contains_key(*v)).cloned().collect();
            let alpha_eqs: HashSet<&FlatAtom> = alpha.equations().collect();
            let beta = beta.atoms().iter().filter(|a| !alpha_eqs.contains(a)).cloned().collect();
            NegPart { quant, beta }
        })
        .collect();

    let free: Vec<Variable> = {
        let outer: HashSet<&Variable> = quant.iter().collect();
        alpha
            .vars()
            .into_iter()
            .chain(negparts.iter().flat_map(|n| n.beta.vars()))
            .filter(|v| !outer.contains(v) && !negparts.iter().any(|n| n.quant.contains(v)))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    };
    let mut counter = 0;
    let mut names = Subst::new();
    let order = visit_order(&free, &alpha);
    let alpha = ordered_atoms(&order, &alpha);
    let quant = renumber(&quant, &order, &mut counter, &mut names);
    let alpha = rename_once(&names, &alpha);
    let mut negparts: Vec<NegPart> = negparts
        .into_iter()
        .map(|n| {
            let roots: Vec<Variable> = order.iter().chain(free.iter()).cloned().collect();
            let order = visit_order(&roots, &n.beta);
            let beta = ordered_atoms(&order, &n.beta);
            let mut local = names.clone();
            let quant = renumber(&n.quant, &order, &mut counter, &mut local);
            NegPart {
                quant,
                beta: rename_once(&local, &beta),
            }
        })
        .collect();
    negparts.sort_by_cached_key(|n| {
        ExplicitSolvedForm {
            quant: Vec::new(),
            alpha: BasicFormula::default(),
            negparts: vec![n.clone()],
        }
        .to_string()
    });
    ExplicitSolvedForm { quant, alpha, negparts }
}
