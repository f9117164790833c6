//! Conversion of arbitrary formulas into normalized formulas
//! `¬(∃x̄ α ∧ ¬φ1 ∧ … ∧ ¬φn)` with `α` basic and every `φi` normalized.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::basics::{BasicFormula, FlatAtom};
use crate::syntax::{apply_discipline, Formula, Term, VarContext, Variable};

/// `¬(∃quant basic ∧ ⋀ children)`; each child is itself negated.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NormalizedFormula {
    pub quant: Vec<Variable>,
    pub basic: BasicFormula,
    pub children: Vec<NormalizedFormula>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("formula is not in the expected shape after step {step}: {detail}")]
    Shape { step: u8, detail: String },
}

impl NormalizedFormula {
    pub fn leaf(quant: Vec<Variable>, basic: BasicFormula) -> Self {
        NormalizedFormula {
            quant,
            basic,
            children: Vec::new(),
        }
    }

    /// Number of nested negations: 1 for a node without children.
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(NormalizedFormula::depth).max().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(NormalizedFormula::node_count).sum::<usize>()
    }

    pub fn to_formula(&self) -> Formula {
        let body = Formula::and_all(
            self.basic
                .atoms()
                .iter()
                .map(FlatAtom::to_formula)
                .chain(self.children.iter().map(NormalizedFormula::to_formula)),
        );
        Formula::not(Formula::exists(self.quant.clone(), body))
    }

    pub fn free_vars(&self) -> BTreeSet<Variable> {
        self.to_formula().free_vars()
    }
}

impl fmt::Display for NormalizedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

/// Step 1: every atom becomes a conjunction of flat atoms under fresh
/// existential variables placed at the atom itself.
pub fn flatten(f: &Formula, ctx: &mut VarContext) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Eq(s, t) => {
            let mut fresh = Vec::new();
            let mut out = Vec::new();
            match (s, t) {
                (Term::Var(_), Term::Var(_)) => return f.clone(),
                (Term::Var(x), Term::App(g, args)) | (Term::App(g, args), Term::Var(x)) => {
                    let names = args.iter().map(|a| name_term(a, ctx, &mut fresh, &mut out)).collect();
                    out.insert(0, FlatAtom::EqApp(x.clone(), g.clone(), names));
                }
                (Term::App(..), Term::App(..)) => {
                    let u = ctx.fresh("u");
                    fresh.push(u.clone());
                    for side in [s, t] {
                        let Term::App(g, args) = side else { unreachable!() };
                        let names = args.iter().map(|a| name_term(a, ctx, &mut fresh, &mut out)).collect();
                        out.push(FlatAtom::EqApp(u.clone(), g.clone(), names));
                    }
                }
            }
            Formula::exists(fresh, Formula::and_all(out.iter().map(FlatAtom::to_formula)))
        }
        Formula::Finite(t) => match t {
            Term::Var(_) => f.clone(),
            Term::App(..) => {
                let mut fresh = Vec::new();
                let mut out = Vec::new();
                let u = name_term(t, ctx, &mut fresh, &mut out);
                out.push(FlatAtom::Finite(u));
                Formula::exists(fresh, Formula::and_all(out.iter().map(FlatAtom::to_formula)))
            }
        },
        Formula::Not(a) => Formula::not(flatten(a, ctx)),
        Formula::And(a, b) => Formula::and(flatten(a, ctx), flatten(b, ctx)),
        Formula::Or(a, b) => Formula::or(flatten(a, ctx), flatten(b, ctx)),
        Formula::Implies(a, b) => Formula::Implies(Box::new(flatten(a, ctx)), Box::new(flatten(b, ctx))),
        Formula::Iff(a, b) => Formula::Iff(Box::new(flatten(a, ctx)), Box::new(flatten(b, ctx))),
        Formula::Exists(vs, a) => Formula::Exists(vs.clone(), Box::new(flatten(a, ctx))),
        Formula::Forall(vs, a) => Formula::Forall(vs.clone(), Box::new(flatten(a, ctx))),
    }
}

fn name_term(t: &Term, ctx: &mut VarContext, fresh: &mut Vec<Variable>, out: &mut Vec<FlatAtom>) -> Variable {
    match t {
        Term::Var(v) => v.clone(),
        Term::App(g, args) => {
            let u = ctx.fresh("u");
            fresh.push(u.clone());
            let slot = out.len();
            out.push(FlatAtom::True);
            let names = args.iter().map(|a| name_term(a, ctx, fresh, out)).collect();
            out[slot] = FlatAtom::EqApp(u.clone(), g.clone(), names);
            u
        }
    }
}

/// Step 2: only `true`, atoms, `¬`, `∧` and `∃` remain.
pub fn core_connectives(f: &Formula) -> Formula {
    let neg_and_not = |a: Formula, b: Formula| Formula::not(Formula::and(a, Formula::not(b)));
    match f {
        Formula::True | Formula::Eq(..) | Formula::Finite(_) => f.clone(),
        Formula::False => Formula::not(Formula::True),
        Formula::Not(a) => Formula::not(core_connectives(a)),
        Formula::And(a, b) => Formula::and(core_connectives(a), core_connectives(b)),
        Formula::Or(..) => {
            let mut items = Vec::new();
            disjuncts(f, &mut items);
            Formula::not(Formula::and_all(items.into_iter().map(|d| Formula::not(core_connectives(d)))))
        }
        Formula::Implies(a, b) => neg_and_not(core_connectives(a), core_connectives(b)),
        Formula::Iff(a, b) => {
            let (a, b) = (core_connectives(a), core_connectives(b));
            Formula::and(neg_and_not(a.clone(), b.clone()), neg_and_not(b, a))
        }
        Formula::Exists(vs, a) => Formula::Exists(vs.clone(), Box::new(core_connectives(a))),
        Formula::Forall(vs, a) => Formula::not(Formula::Exists(vs.clone(), Box::new(Formula::not(core_connectives(a))))),
    }
}

/// A chain of `∨` is read as one n-ary disjunction.
fn disjuncts<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::Or(a, b) => {
            disjuncts(a, out);
            disjuncts(b, out);
        }
        other => out.push(other),
    }
}

/// Step 3: a formula not starting with `¬` becomes `¬(true ∧ ¬φ)`.
pub fn wrap_negation(f: Formula) -> Formula {
    match f {
        Formula::Not(_) => f,
        other => Formula::not(Formula::and(Formula::True, Formula::not(other))),
    }
}

fn peel(f: Formula) -> (Vec<Vec<Variable>>, Formula) {
    let mut blocks = Vec::new();
    let mut cur = f;
    while let Formula::Exists(vs, body) = cur {
        blocks.push(vs);
        cur = *body;
    }
    (blocks, cur)
}

fn wrap(blocks: Vec<Vec<Variable>>, body: Formula) -> Formula {
    blocks.into_iter().rev().fold(body, |acc, vs| Formula::exists(vs, acc))
}

/// Step 5: `φ ∧ ∃x̄ ψ` becomes `∃x̄ (φ ∧ ψ)`, on both sides of every `∧`.
pub fn lift_exists(f: &Formula) -> Formula {
    match f {
        Formula::Not(a) => Formula::not(lift_exists(a)),
        Formula::Exists(vs, a) => Formula::Exists(vs.clone(), Box::new(lift_exists(a))),
        Formula::And(a, b) => {
            let (mut qa, ba) = peel(lift_exists(a));
            let (qb, bb) = peel(lift_exists(b));
            qa.extend(qb);
            wrap(qa, Formula::and(ba, bb))
        }
        other => other.clone(),
    }
}

/// Step 6: `∃x̄ ∃ȳ φ` becomes `∃x̄ȳ φ`.
pub fn group_exists(f: &Formula) -> Formula {
    match f {
        Formula::Not(a) => Formula::not(group_exists(a)),
        Formula::And(a, b) => Formula::and(group_exists(a), group_exists(b)),
        Formula::Exists(..) => {
            let (blocks, body) = peel(f.clone());
            Formula::exists(blocks.concat(), group_exists(&body))
        }
        other => other.clone(),
    }
}

/// Step 7: reads `¬(∃x̄ α ∧ ⋀¬φi)` into the tree form, inserting the empty
/// quantifier and `true` where they are implicit.
pub fn to_normalized(f: &Formula) -> Result<NormalizedFormula, NormalizeError> {
    let shape = |detail: String| NormalizeError::Shape { step: 7, detail };
    let Formula::Not(body) = f else {
        return Err(shape(format!("expected a negation, found `{f}`")));
    };
    let (blocks, inner) = peel((**body).clone());
    let mut items = Vec::new();
    conjuncts(&inner, &mut items);
    let mut out = NormalizedFormula::leaf(blocks.concat(), BasicFormula::default());
    for item in items {
        match item {
            Formula::True => {}
            Formula::Not(_) => out.children.push(to_normalized(item)?),
            atom => match FlatAtom::from_formula(atom) {
                Some(a) => out.basic.push(a),
                None => return Err(shape(format!("unexpected conjunct `{atom}`"))),
            },
        }
    }
    Ok(out)
}

fn conjuncts<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::And(a, b) => {
            conjuncts(a, out);
            conjuncts(b, out);
        }
        other => out.push(other),
    }
}

/// Steps 1 to 8. Fresh variables come from `ctx`, which must already know
/// every variable of `f`.
pub fn normalize(f: &Formula, ctx: &mut VarContext) -> Result<NormalizedFormula, NormalizeError> {
    ctx.observe_all(&f.all_vars());
    let f = flatten(f, ctx);
    let f = core_connectives(&f);
    let f = wrap_negation(f);
    let f = apply_discipline(&f, ctx);
    let f = lift_exists(&f);
    let f = group_exists(&f);
    let n = to_normalized(&f)?;
    normalized_discipline(&n, ctx)
}

/// Step 8: discipline renaming on a normalized formula.
pub fn normalized_discipline(n: &NormalizedFormula, ctx: &mut VarContext) -> Result<NormalizedFormula, NormalizeError> {
    let f = apply_discipline(&n.to_formula(), ctx);
    to_normalized(&f).map_err(|e| match e {
        NormalizeError::Shape { detail, .. } => NormalizeError::Shape { step: 8, detail },
    })
}

/// [`normalize`] with a private context.
pub fn normalize_fresh(f: &Formula) -> Result<NormalizedFormula, NormalizeError> {
    normalize(f, &mut VarContext::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{is_disciplined, parse_formula, parse_formula_with, ParseOptions};

    #[test]
    fn flattening_introduces_one_variable_per_nested_term() {
        let f = parse_formula("f(u, v) = f(w, u)").unwrap();
        let mut ctx = VarContext::new();
        ctx.observe_all(&f.all_vars());
        let g = flatten(&f, &mut ctx);
        assert_eq!(g.to_string(), "ex u1. u1 = f(u, v) & u1 = f(w, u)");
        let h = parse_formula("finite(f(x))").unwrap();
        ctx.observe_all(&h.all_vars());
        assert_eq!(flatten(&h, &mut ctx).to_string(), "ex u2. u2 = f(x) & finite(u2)");
        let deep = parse_formula("x = f(g(y), z)").unwrap();
        assert_eq!(flatten(&deep, &mut ctx).to_string(), "ex u3. x = f(u3, z) & u3 = g(y)");
    }

    #[test]
    fn true_normalizes_to_depth_two() {
        let n = normalize_fresh(&Formula::True).unwrap();
        assert_eq!(n.depth(), 2);
        assert!(n.quant.is_empty() && n.basic.is_empty());
        assert_eq!(n.children, vec![NormalizedFormula::leaf(vec![], BasicFormula::default())]);
    }

    #[test]
    fn false_is_negated_true() {
        let n = normalize_fresh(&Formula::False).unwrap();
        assert_eq!(n, NormalizedFormula::leaf(vec![], BasicFormula::default()));
        assert_eq!(n.to_string(), "~true");
    }

    #[test]
    fn worked_example_has_depth_four() {
        let opts = ParseOptions {
            free_order: vec!["v".into(), "w".into(), "u".into()],
        };
        let f = parse_formula_with("(f(u, v) = f(w, u) & ex x. u = x) | (ex u. all w. u = f(v, w))", &opts).unwrap();
        let n = normalize_fresh(&f).unwrap();
        assert_eq!(n.depth(), 4);
        assert!(n.quant.is_empty() && n.basic.is_empty());
        assert_eq!(n.children.len(), 2);
        let first = &n.children[0];
        assert_eq!(first.quant.len(), 2);
        assert_eq!(first.basic.len(), 3);
        assert!(first.children.is_empty());
        let second = &n.children[1];
        assert_eq!(second.quant.len(), 1);
        assert!(second.basic.is_empty());
        let third = &second.children[0];
        assert_eq!(third.quant.len(), 1);
        let leaf = &third.children[0];
        assert!(leaf.quant.is_empty() && leaf.children.is_empty());
        assert_eq!(leaf.basic.len(), 1);
        assert!(is_disciplined(&n.to_formula()));
    }

    #[test]
    fn intro_formula_depths() {
        let f = parse_formula("~(ex y. x = f(y) & ~(ex z, w. x = f(z) & w = f(w)))").unwrap();
        assert_eq!(normalize_fresh(&f).unwrap().depth(), 2);
        assert_eq!(normalize_fresh(&Formula::not(f)).unwrap().depth(), 3);
    }
}
