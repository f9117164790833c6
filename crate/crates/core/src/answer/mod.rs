//! From final working formulas to general solved formulas and to the
//! solver's answer.

mod alpha;
mod compact;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basics::{reachable, reachable_in, BasicFormula, FlatAtom};
use crate::engine::WorkingNode;
use crate::oracle::{self, RationalTree};
use crate::syntax::{write_term, Formula, Names, Term, Variable};

pub use alpha::{alpha_equivalent, basic_alpha_equivalent};
pub use compact::compact;

/// `¬∃quant beta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NegPart {
    pub quant: Vec<Variable>,
    pub beta: BasicFormula,
}

/// `¬(∃quant alpha ∧ ⋀ ¬(∃ȳᵢ βᵢ))` satisfying the six solvedness conditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralSolvedFormula {
    pub quant: Vec<Variable>,
    pub alpha: BasicFormula,
    pub negparts: Vec<NegPart>,
}

/// `∃quant alpha ∧ ⋀ ¬(∃ȳᵢ βᵢ)`, the unnegated reading of a general solved
/// formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitSolvedForm {
    pub quant: Vec<Variable>,
    pub alpha: BasicFormula,
    pub negparts: Vec<NegPart>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Answer {
    True,
    False,
    Disjunction(Vec<ExplicitSolvedForm>),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum AnswerError {
    #[error("working formula is not final: {0}")]
    NotFinal(String),
    #[error("condition {condition} of general solved formulas fails: {detail}")]
    Condition { condition: u8, detail: String },
    #[error("closed input produced the open disjunct {0}")]
    OpenDisjunct(String),
    #[error("no value assigned to free variable {0}")]
    MissingAssignment(String),
    #[error("shape not recognized: {0}")]
    Shape(String),
}

fn fail(condition: u8, detail: String) -> AnswerError {
    AnswerError::Condition { condition, detail }
}

fn equations_of(b: &BasicFormula) -> BasicFormula {
    b.equations().cloned().collect()
}

fn join(a: &BasicFormula, b: &BasicFormula) -> BasicFormula {
    a.atoms().iter().chain(b.atoms()).cloned().collect()
}

impl GeneralSolvedFormula {
    /// Checks all six conditions, reporting the first failure.
    pub fn validate(&self) -> Result<(), AnswerError> {
        if !self.alpha.is_solved() {
            return Err(fail(1, format!("`{}` is not solved", self.alpha)));
        }
        if let Some(n) = self.negparts.iter().find(|n| !n.beta.is_solved()) {
            return Err(fail(1, format!("`{}` is not solved", n.beta)));
        }
        let alpha_eqs = equations_of(&self.alpha);
        for n in &self.negparts {
            let both = join(&alpha_eqs, &n.beta);
            if !both.is_solved() {
                return Err(fail(2, format!("`{both}` is not solved")));
            }
        }
        let r = reachable_in(&self.quant, &self.alpha);
        if let Some(v) = self.quant.iter().find(|v| !r.vars.contains(*v)) {
            return Err(fail(3, format!("{v} is not reachable")));
        }
        for n in &self.negparts {
            let r = reachable_in(&n.quant, &n.beta);
            if let Some(v) = n.quant.iter().find(|v| !r.vars.contains(*v)) {
                return Err(fail(4, format!("{v} is not reachable in `{}`", n.beta)));
            }
        }
        for u in self.alpha.finites().map(|a| a.finite_var().unwrap()) {
            for n in &self.negparts {
                let both = join(&self.alpha, &n.beta);
                let lhs = both.lhs_set();
                let below = reachable(&both, &BTreeSet::from([u.clone()])).vars;
                let ground = below.iter().all(|v| lhs.contains(v) && !both.reaches(v, v));
                let covered = ground
                    || n.beta.finites().map(|a| a.finite_var().unwrap()).any(|v| {
                        v == u || (both.reaches(u, v) && !lhs.contains(v))
                    });
                if !covered {
                    return Err(fail(5, format!("finite({u}) not carried into `{}`", n.beta)));
                }
            }
        }
        if let Some(n) = self.negparts.iter().find(|n| n.beta.atoms().iter().all(|a| self.alpha.contains(a))) {
            return Err(fail(6, format!("`{}` adds nothing to `{}`", n.beta, self.alpha)));
        }
        Ok(())
    }

    pub fn to_formula(&self) -> Formula {
        Formula::not(self.explicit().to_formula())
    }

    pub fn explicit(&self) -> ExplicitSolvedForm {
        ExplicitSolvedForm {
            quant: self.quant.clone(),
            alpha: self.alpha.clone(),
            negparts: self.negparts.clone(),
        }
    }
}

impl fmt::Display for GeneralSolvedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

/// Reads a final working formula as a general solved formula: equations of
/// the top basic formula are dropped from each nested one.
pub fn final_to_general(node: &WorkingNode) -> Result<GeneralSolvedFormula, AnswerError> {
    if node.level != 5 || node.depth() > 2 || node.children.iter().any(|c| c.level != 5) {
        return Err(AnswerError::NotFinal(node.to_string()));
    }
    let alpha_eqs = equations_of(&node.basic);
    let negparts = node
        .children
        .iter()
        .map(|c| NegPart {
            quant: c.quant.clone(),
            beta: c.basic.atoms().iter().filter(|a| !alpha_eqs.contains(a)).cloned().collect(),
        })
        .collect();
    let g = GeneralSolvedFormula {
        quant: node.quant.clone(),
        alpha: node.basic.clone(),
        negparts,
    };
    g.validate()?;
    Ok(g)
}

/// `(¬∃x̄ α) ∨ ⋁ᵢ ∃x̄ȳᵢ (α ∧ βᵢ)`.
pub fn general_to_boolean_combination(g: &GeneralSolvedFormula) -> Formula {
    let first = Formula::not(Formula::exists(g.quant.clone(), g.alpha.to_formula()));
    let rest = g.negparts.iter().map(|n| {
        let quant = g.quant.iter().chain(n.quant.iter()).cloned().collect();
        Formula::exists(quant, Formula::and(g.alpha.to_formula(), n.beta.to_formula()))
    });
    Formula::or_all(std::iter::once(first).chain(rest))
}

impl ExplicitSolvedForm {
    pub fn general(&self) -> GeneralSolvedFormula {
        GeneralSolvedFormula {
            quant: self.quant.clone(),
            alpha: self.alpha.clone(),
            negparts: self.negparts.clone(),
        }
    }

    /// `∃ε true`.
    pub fn is_trivially_true(&self) -> bool {
        self.quant.is_empty() && self.alpha.without_true().is_empty() && self.negparts.is_empty()
    }

    pub fn to_formula(&self) -> Formula {
        let negs = self
            .negparts
            .iter()
            .map(|n| Formula::not(Formula::exists(n.quant.clone(), n.beta.to_formula())));
        let body = Formula::and_all(self.alpha.atoms().iter().map(FlatAtom::to_formula).chain(negs));
        Formula::exists(self.quant.clone(), body)
    }

    pub fn free_vars(&self) -> BTreeSet<Variable> {
        self.to_formula().free_vars()
    }

    /// Reads `∃x̄ α ∧ ⋀ ¬(∃ȳᵢ βᵢ)` back from a formula of that shape.
    pub fn from_formula(f: &Formula) -> Result<Self, AnswerError> {
        let shape = || AnswerError::Shape(f.to_string());
        let (quant, body) = match f {
            Formula::Exists(vs, body) => (vs.clone(), &**body),
            other => (Vec::new(), other),
        };
        let mut items = Vec::new();
        conjuncts(body, &mut items);
        let mut out = ExplicitSolvedForm {
            quant,
            alpha: BasicFormula::default(),
            negparts: Vec::new(),
        };
        for item in items {
            match item {
                Formula::True => {}
                Formula::Not(inner) => {
                    let (quant, body) = match &**inner {
                        Formula::Exists(vs, body) => (vs.clone(), &**body),
                        other => (Vec::new(), other),
                    };
                    let mut atoms = Vec::new();
                    conjuncts(body, &mut atoms);
                    let beta = atoms
                        .into_iter()
                        .filter(|a| **a != Formula::True)
                        .map(|a| FlatAtom::from_formula(a).ok_or_else(shape))
                        .collect::<Result<_, _>>()?;
                    out.negparts.push(NegPart { quant, beta });
                }
                atom => out.alpha.push(FlatAtom::from_formula(atom).ok_or_else(shape)?),
            }
        }
        Ok(out)
    }

    /// The ground value of a free variable when this form pins it to one
    /// finite tree.
    pub fn ground_value(&self, x: &Variable) -> Option<Term> {
        if !self.negparts.is_empty() {
            return None;
        }
        let idx = self.alpha.eq_index();
        fn build(
            v: &Variable,
            idx: &HashMap<&Variable, Vec<&FlatAtom>>,
            depth: usize,
        ) -> Option<Term> {
            if depth > idx.len() {
                return None;
            }
            match idx.get(v)?.first()? {
                FlatAtom::EqVar(_, w) => build(w, idx, depth + 1),
                FlatAtom::EqApp(_, f, args) => {
                    let args = args.iter().map(|a| build(a, idx, depth + 1)).collect::<Option<Vec<_>>>()?;
                    Some(Term::app(f, args))
                }
                _ => None,
            }
        }
        build(x, &idx, 0)
    }

    /// Whether the assignment of the free variables is a solution.
    pub fn check_solution(&self, assignment: &HashMap<Variable, RationalTree>) -> Result<bool, AnswerError> {
        if let Some(v) = self.free_vars().iter().find(|v| !assignment.contains_key(*v)) {
            return Err(AnswerError::MissingAssignment(v.to_string()));
        }
        let negparts: Vec<(Vec<Variable>, BasicFormula)> =
            self.negparts.iter().map(|n| (n.quant.clone(), n.beta.clone())).collect();
        Ok(oracle::check_solution(&self.quant, &self.alpha, &negparts, assignment))
    }
}

impl fmt::Display for ExplicitSolvedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
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

/// Builds the answer from the final forest obtained for `¬p`. `closed` says
/// whether `p` had no free variables.
pub fn assemble(forest: &[WorkingNode], closed: bool) -> Result<Answer, AnswerError> {
    let all: Vec<ExplicitSolvedForm> = forest
        .iter()
        .map(|t| final_to_general(t).map(|g| g.explicit()))
        .collect::<Result<_, _>>()?;
    if all.iter().any(ExplicitSolvedForm::is_trivially_true) {
        return Ok(Answer::True);
    }
    if closed {
        if let Some(d) = all.first() {
            return Err(AnswerError::OpenDisjunct(d.to_string()));
        }
    }
    let mut disjuncts: Vec<ExplicitSolvedForm> = Vec::new();
    for d in all.iter().map(compact) {
        if !disjuncts.iter().any(|e| alpha_equivalent(e, &d)) {
            disjuncts.push(d);
        }
    }
    if disjuncts.is_empty() {
        return Ok(Answer::False);
    }
    disjuncts.sort_by_cached_key(|d| (d.quant.len() + d.alpha.len(), d.to_string()));
    Ok(Answer::Disjunction(disjuncts))
}

impl Answer {
    pub fn to_formula(&self) -> Formula {
        match self {
            Answer::True => Formula::True,
            Answer::False => Formula::False,
            Answer::Disjunction(ds) => Formula::or_all(ds.iter().map(ExplicitSolvedForm::to_formula)),
        }
    }

    pub fn disjuncts(&self) -> &[ExplicitSolvedForm] {
        match self {
            Answer::Disjunction(ds) => ds,
            _ => &[],
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Answer::True => "true",
            Answer::False => "false",
            Answer::Disjunction(_) => "disjunction",
        }
    }

    pub fn to_doc(&self) -> AnswerDoc {
        AnswerDoc {
            schema: 1,
            kind: self.kind().to_string(),
            text: self.to_string(),
            disjuncts: self.disjuncts().iter().map(DisjunctDoc::from_form).collect(),
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::True => f.write_str("true"),
            Answer::False => f.write_str("false"),
            Answer::Disjunction(ds) => {
                for (i, d) in ds.iter().enumerate() {
                    if i > 0 {
                        f.write_str("\n| ")?;
                    }
                    write!(f, "({d})")?;
                }
                Ok(())
            }
        }
    }
}

/// Machine-readable answer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerDoc {
    pub schema: u32,
    pub kind: String,
    pub text: String,
    pub disjuncts: Vec<DisjunctDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjunctDoc {
    pub quant: Vec<String>,
    pub alpha: Vec<String>,
    pub negparts: Vec<NegPartDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegPartDoc {
    pub quant: Vec<String>,
    pub beta: Vec<String>,
}

fn atom_text(a: &FlatAtom, names: &mut Names) -> String {
    let mut out = String::new();
    match a.to_formula() {
        Formula::Eq(s, t) => {
            write_term(&mut out, &s, names);
            out.push_str(" = ");
            write_term(&mut out, &t, names);
        }
        Formula::Finite(t) => {
            out.push_str("finite(");
            write_term(&mut out, &t, names);
            out.push(')');
        }
        _ => out.push_str("true"),
    }
    out
}

impl DisjunctDoc {
    fn from_form(d: &ExplicitSolvedForm) -> Self {
        let mut names = Names::for_vars(d.to_formula().all_vars().iter());
        let quant = d.quant.iter().map(|v| names.get(v)).collect();
        let alpha = d.alpha.atoms().iter().map(|a| atom_text(a, &mut names)).collect();
        let negparts = d
            .negparts
            .iter()
            .map(|n| NegPartDoc {
                quant: n.quant.iter().map(|v| names.get(v)).collect(),
                beta: n.beta.atoms().iter().map(|a| atom_text(a, &mut names)).collect(),
            })
            .collect();
        DisjunctDoc { quant, alpha, negparts }
    }
}

#[cfg(test)]
mod tests;
