use std::collections::{HashMap, HashSet};
use std::fmt;

use super::ast::{Formula, Term};
use super::var::Variable;

/// Display names that are unique per variable within one printed object.
#[derive(Default)]
pub struct Names {
    assigned: HashMap<Variable, String>,
    taken: HashSet<String>,
    all: HashSet<String>,
}

impl Names {
    pub fn for_vars<'a>(vars: impl IntoIterator<Item = &'a Variable>) -> Self {
        let mut names = Names::default();
        let mut vars: Vec<&Variable> = vars.into_iter().collect();
        vars.sort();
        vars.dedup();
        names.all = vars.iter().map(|v| v.name().to_string()).collect();
        for v in vars {
            names.get(v);
        }
        names
    }

    pub fn get(&mut self, v: &Variable) -> String {
        if let Some(n) = self.assigned.get(v) {
            return n.clone();
        }
        let mut name = v.name().to_string();
        let mut i = 1;
        while self.taken.contains(&name) || (i > 1 && self.all.contains(&name)) {
            i += 1;
            name = format!("{}_{}", v.name(), i);
        }
        self.taken.insert(name.clone());
        self.assigned.insert(v.clone(), name.clone());
        name
    }
}

pub fn write_term(out: &mut String, t: &Term, names: &mut Names) {
    match t {
        Term::Var(v) => out.push_str(&names.get(v)),
        Term::App(f, args) => {
            out.push_str(f.name());
            if args.is_empty() {
                if !f.prints_bare() {
                    out.push_str("()");
                }
                return;
            }
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_term(out, a, names);
            }
            out.push(')');
        }
    }
}

const P_IFF: u8 = 1;
const P_IMP: u8 = 2;
const P_OR: u8 = 3;
const P_AND: u8 = 4;
const P_NOT: u8 = 5;

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Exists(..) | Formula::Forall(..) => 0,
        Formula::Iff(..) => P_IFF,
        Formula::Implies(..) => P_IMP,
        Formula::Or(..) => P_OR,
        Formula::And(..) => P_AND,
        _ => P_NOT,
    }
}

fn write_formula(out: &mut String, f: &Formula, need: u8, tail: bool, names: &mut Names) {
    let own = prec(f);
    let paren = own < need && !(own == 0 && tail);
    if paren {
        out.push('(');
    }
    let tail = tail || paren;
    let mut bin = |out: &mut String, a: &Formula, op: &str, b: &Formula, lp: u8, rp: u8| {
        write_formula(out, a, lp, false, names);
        out.push_str(op);
        write_formula(out, b, rp, tail, names);
    };
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Eq(s, t) => {
            write_term(out, s, names);
            out.push_str(" = ");
            write_term(out, t, names);
        }
        Formula::Finite(t) => {
            out.push_str("finite(");
            write_term(out, t, names);
            out.push(')');
        }
        Formula::Not(a) => {
            out.push('~');
            write_formula(out, a, P_NOT, tail, names);
        }
        Formula::And(a, b) => bin(out, a, " & ", b, P_AND, P_AND + 1),
        Formula::Or(a, b) => bin(out, a, " | ", b, P_OR, P_OR + 1),
        Formula::Implies(a, b) => bin(out, a, " -> ", b, P_IMP + 1, P_IMP),
        Formula::Iff(a, b) => bin(out, a, " <-> ", b, P_IFF + 1, P_IFF),
        Formula::Exists(vs, a) | Formula::Forall(vs, a) => {
            out.push_str(if matches!(f, Formula::Exists(..)) { "ex " } else { "all " });
            for (i, v) in vs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&names.get(v));
            }
            out.push_str(". ");
            write_formula(out, a, 0, true, names);
        }
    }
    if paren {
        out.push(')');
    }
}

/// Prints in the concrete grammar accepted by the parser.
pub fn print_formula(f: &Formula) -> String {
    let vars = f.all_vars();
    let mut names = Names::for_vars(&vars);
    let mut out = String::new();
    write_formula(&mut out, f, 0, true, &mut names);
    out
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut vs = Vec::new();
        self.collect_vars(&mut vs);
        let mut names = Names::for_vars(&vs);
        let mut out = String::new();
        write_term(&mut out, self, &mut names);
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse::parse_formula;

    fn round(src: &str) -> String {
        print_formula(&parse_formula(src).unwrap())
    }

    #[test]
    fn prints_minimal_parentheses() {
        assert_eq!(round("(x = y & y = z) | ~(z = x)"), "x = y & y = z | ~z = x");
        assert_eq!(round("x = y & (y = z | z = x)"), "x = y & (y = z | z = x)");
        assert_eq!(round("(ex y. x = y) & x = x"), "(ex y. x = y) & x = x");
        assert_eq!(round("x = x & ex y. x = y"), "x = x & ex y. x = y");
        assert_eq!(round("(a = a -> b = b) -> c = c"), "(a = a -> b = b) -> c = c");
        assert_eq!(round("x = c(0, k())"), "x = c(0, k())");
    }

    #[test]
    fn distinct_variables_with_one_name_are_separated() {
        let f = parse_formula("ex x. (x = y & ex x. x = y)").unwrap();
        let printed = print_formula(&f);
        assert_eq!(printed, "ex x. x = y & ex x_2. x_2 = y");
    }
}
