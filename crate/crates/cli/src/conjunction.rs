//! Reading `∃x̄ (a₁ ∧ … ∧ aₙ)` inputs for the oracle subcommand.

use treesolve::basics::{BasicFormula, FlatAtom};
use treesolve::syntax::VarContext;
use treesolve::{Formula, Term, Variable};

/// Splits an existentially quantified conjunction of atoms into its
/// variables and a flat basic formula. Returns `None` for other shapes.
pub fn exists_conjunction(f: &Formula) -> Option<(Vec<Variable>, BasicFormula)> {
    let mut quant = Vec::new();
    let mut body = f;
    while let Formula::Exists(vs, inner) = body {
        quant.extend(vs.iter().cloned());
        body = inner;
    }
    let mut ctx = VarContext::new();
    ctx.observe_all(&f.all_vars());
    let mut out = BasicFormula::default();
    let mut stack = vec![body];
    while let Some(g) = stack.pop() {
        match g {
            Formula::And(a, b) => {
                stack.push(b);
                stack.push(a);
            }
            Formula::True => out.push(FlatAtom::True),
            Formula::Eq(s, t) => {
                let top = match s.as_var() {
                    Some(v) => v.clone(),
                    None => {
                        let v = ctx.fresh("t");
                        quant.push(v.clone());
                        flatten(s, &v, &mut out, &mut quant, &mut ctx);
                        v
                    }
                };
                flatten(t, &top, &mut out, &mut quant, &mut ctx);
            }
            Formula::Finite(t) => {
                let v = match t.as_var() {
                    Some(v) => v.clone(),
                    None => {
                        let v = ctx.fresh("t");
                        quant.push(v.clone());
                        flatten(t, &v, &mut out, &mut quant, &mut ctx);
                        v
                    }
                };
                out.push(FlatAtom::Finite(v));
            }
            _ => return None,
        }
    }
    Some((quant, out))
}

fn flatten(t: &Term, at: &Variable, out: &mut BasicFormula, quant: &mut Vec<Variable>, ctx: &mut VarContext) {
    match t {
        Term::Var(v) => out.push(FlatAtom::EqVar(at.clone(), v.clone())),
        Term::App(f, args) => {
            let mut names = Vec::with_capacity(args.len());
            for a in args {
                match a.as_var() {
                    Some(v) => names.push(v.clone()),
                    None => {
                        let v = ctx.fresh("t");
                        quant.push(v.clone());
                        flatten(a, &v, out, quant, ctx);
                        names.push(v);
                    }
                }
            }
            out.push(FlatAtom::EqApp(at.clone(), f.clone(), names));
        }
    }
}
