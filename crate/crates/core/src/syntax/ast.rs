use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use super::var::Variable;

/// Function symbol with a fixed arity. Symbols of arity 0 are constants.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    name: Arc<str>,
    arity: usize,
}

impl Symbol {
    pub fn new(name: &str, arity: usize) -> Self {
        Symbol {
            name: Arc::from(name),
            arity,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Constants whose name starts with a digit print bare; others need `()`.
    pub fn prints_bare(&self) -> bool {
        self.arity == 0 && self.name.starts_with(|c: char| c.is_ascii_digit())
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Var(Variable),
    App(Symbol, Vec<Term>),
}

impl Term {
    pub fn var(v: &Variable) -> Term {
        Term::Var(v.clone())
    }

    pub fn app(sym: &Symbol, args: Vec<Term>) -> Term {
        assert_eq!(sym.arity(), args.len(), "arity mismatch for {sym:?}");
        Term::App(sym.clone(), args)
    }

    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            Term::Var(v) => Some(v),
            Term::App(..) => None,
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<Variable>) {
        match self {
            Term::Var(v) => out.push(v.clone()),
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn symbol_count(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::symbol_count).sum::<usize>(),
        }
    }

    pub fn rename(&self, map: &dyn Fn(&Variable) -> Option<Variable>) -> Term {
        match self {
            Term::Var(v) => Term::Var(map(v).unwrap_or_else(|| v.clone())),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.rename(map)).collect()),
        }
    }
}

/// First-order formula over `=` and `finite`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    Finite(Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(Vec<Variable>, Box<Formula>),
    Forall(Vec<Variable>, Box<Formula>),
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(vars: Vec<Variable>, body: Formula) -> Formula {
        if vars.is_empty() {
            body
        } else {
            Formula::Exists(vars, Box::new(body))
        }
    }

    pub fn forall(vars: Vec<Variable>, body: Formula) -> Formula {
        if vars.is_empty() {
            body
        } else {
            Formula::Forall(vars, Box::new(body))
        }
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn and_all(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::and).unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn or_all(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::or).unwrap_or(Formula::False)
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Free variables in increasing key order.
    pub fn free_vars(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        self.free_into(&mut bound, &mut out);
        out
    }

    fn free_into(&self, bound: &mut Vec<Variable>, out: &mut BTreeSet<Variable>) {
        let term = |t: &Term, bound: &Vec<Variable>, out: &mut BTreeSet<Variable>| {
            let mut vs = Vec::new();
            t.collect_vars(&mut vs);
            for v in vs {
                if !bound.contains(&v) {
                    out.insert(v);
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(s, t) => {
                term(s, bound, out);
                term(t, bound, out);
            }
            Formula::Finite(t) => term(t, bound, out),
            Formula::Not(a) => a.free_into(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.free_into(bound, out);
                b.free_into(bound, out);
            }
            Formula::Exists(vs, a) | Formula::Forall(vs, a) => {
                let n = bound.len();
                bound.extend(vs.iter().cloned());
                a.free_into(bound, out);
                bound.truncate(n);
            }
        }
    }

    /// Every variable occurring anywhere, bound or free.
    pub fn all_vars(&self) -> HashSet<Variable> {
        let mut out = HashSet::new();
        self.visit(&mut |f| match f {
            Formula::Eq(s, t) => {
                let mut vs = Vec::new();
                s.collect_vars(&mut vs);
                t.collect_vars(&mut vs);
                out.extend(vs);
            }
            Formula::Finite(t) => {
                let mut vs = Vec::new();
                t.collect_vars(&mut vs);
                out.extend(vs);
            }
            Formula::Exists(vs, _) | Formula::Forall(vs, _) => out.extend(vs.iter().cloned()),
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut dyn FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Not(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => a.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Number of formula nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}
