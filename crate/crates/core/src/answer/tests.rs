use super::*;
use crate::normalizer::to_normalized;
use crate::oracle::RationalTree;
use crate::syntax::{parse_formula_with, ParseOptions, Symbol};

fn opts(order: &[&str]) -> ParseOptions {
    ParseOptions {
        free_order: order.iter().map(|s| s.to_string()).collect(),
    }
}

fn final_node(src: &str, order: &[&str]) -> WorkingNode {
    let f = parse_formula_with(src, &opts(order)).unwrap();
    WorkingNode::from_normalized(&to_normalized(&f).unwrap(), 5)
}

fn form(src: &str, order: &[&str]) -> ExplicitSolvedForm {
    ExplicitSolvedForm::from_formula(&parse_formula_with(src, &opts(order)).unwrap()).unwrap()
}

const ORDER: &[&str] = &["v", "u", "u1"];

#[test]
fn final_formula_becomes_the_printed_general_formula() {
    let node = final_node(
        "~(v = u & finite(u) & ~(v = u & u = u1 & finite(u1)) & ~(ex w2. v = u & u = s(w2) & finite(w2)))",
        ORDER,
    );
    let g = final_to_general(&node).unwrap();
    let expected = parse_formula_with(
        "~(v = u & finite(u) & ~(u = u1 & finite(u1)) & ~(ex w2. u = s(w2) & finite(w2)))",
        &opts(ORDER),
    )
    .unwrap();
    assert_eq!(g.to_formula().to_string(), expected.to_string());
    let Formula::Not(inner) = &expected else { unreachable!() };
    assert!(alpha_equivalent(&g.explicit(), &ExplicitSolvedForm::from_formula(inner).unwrap()));
}

#[test]
fn vacuous_final_formula_is_negated_true() {
    let node = final_node("~true", &[]);
    let g = final_to_general(&node).unwrap();
    assert!(g.explicit().is_trivially_true());
    assert_eq!(assemble(&[node], true).unwrap(), Answer::True);
    assert_eq!(assemble(&[], true).unwrap(), Answer::False);
}

#[test]
fn each_condition_is_detected() {
    let cases = [
        ("v = u & u = v", 1),
        ("v = f(u) & ~(u = f(v) & v = g(u))", 2),
        ("ex w. v = u & finite(w)", 3),
        ("v = u & ~(ex w. u = u1 & finite(w))", 4),
        ("v = u & finite(u) & ~(u = f(u1))", 5),
        ("v = u & finite(u1) & ~(finite(u1))", 6),
    ];
    for (src, cond) in cases {
        let g = form(src, ORDER).general();
        match g.validate() {
            Err(AnswerError::Condition { condition, .. }) => assert_eq!(condition, cond, "{src}"),
            other => panic!("{src}: {other:?}"),
        }
    }
}

#[test]
fn finite_variable_pinned_to_a_ground_tree_needs_no_finite_atom() {
    assert!(form("finite(u) & ~(u = a())", ORDER).general().validate().is_ok());
    assert!(form("finite(u) & ~(u = f(u1, u1) & u1 = a())", ORDER).general().validate().is_ok());
    let cyclic = form("finite(u) & ~(u = f(u1) & u1 = f(u))", ORDER).general();
    assert!(matches!(cyclic.validate(), Err(AnswerError::Condition { condition: 5, .. })));
}

#[test]
fn boolean_combination_template() {
    let g = form("v = u & ~(ex w2. u = s(w2))", ORDER).general();
    let b = general_to_boolean_combination(&g);
    assert_eq!(b.to_string(), "~v = u | ex w2. v = u & u = s(w2)");
    let trivial = form("true", &[]).general();
    assert_eq!(general_to_boolean_combination(&trivial), Formula::not(Formula::True));
}

fn tree(t: &str, order: &[&str]) -> RationalTree {
    let f = parse_formula_with(&format!("z = {t}"), &opts(order)).unwrap();
    let Formula::Eq(_, rhs) = f else { unreachable!() };
    RationalTree::from_term(&rhs).unwrap()
}

fn infinite_f() -> RationalTree {
    RationalTree::new(vec![(Symbol::new("f", 1), vec![0])], 0)
}

#[test]
fn solutions_of_an_explicit_form() {
    let order = ["u1", "u2", "u3"];
    let phi = form(
        "ex v. u1 = f(v) & v = u2 & finite(u2) & ~(ex w. u2 = f(w) & finite(w) & finite(u3))",
        &order,
    );
    assert!(phi.general().validate().is_ok());
    let vars: HashMap<String, Variable> = phi.free_vars().into_iter().map(|v| (v.name().to_string(), v)).collect();
    let assign = |u1: RationalTree, u2: RationalTree, u3: RationalTree| {
        HashMap::from([(vars["u1"].clone(), u1), (vars["u2"].clone(), u2), (vars["u3"].clone(), u3)])
    };
    assert!(phi.check_solution(&assign(tree("f(f(0))", &[]), tree("f(0)", &[]), infinite_f())).unwrap());
    assert!(!phi.check_solution(&assign(tree("f(f(0))", &[]), tree("f(0)", &[]), tree("0", &[]))).unwrap());
    assert!(phi.check_solution(&assign(tree("f(0)", &[]), tree("0", &[]), tree("0", &[]))).unwrap());
    let mut partial = assign(tree("f(0)", &[]), tree("0", &[]), tree("0", &[]));
    partial.remove(&vars["u3"]);
    assert!(matches!(phi.check_solution(&partial), Err(AnswerError::MissingAssignment(_))));
    assert!(!phi.check_solution(&assign(infinite_f(), infinite_f(), infinite_f())).unwrap());
}

#[test]
fn alpha_equivalence_ignores_names_and_order() {
    let a = form("ex p, q. x = c(p, q) & p = g(q) & q = 0", &["x"]);
    let b = form("ex s, t. t = 0 & x = c(s, t) & s = g(t)", &["x"]);
    let c = form("ex s, t. t = 0 & x = c(t, s) & s = g(t)", &["x"]);
    assert!(alpha_equivalent(&a, &b));
    assert!(!alpha_equivalent(&a, &c));
    let d = form("x = 0 & ~(ex w. y = f(w)) & ~(y = 1)", &["x", "y"]);
    let e = form("x = 0 & ~(y = 1) & ~(ex r. y = f(r))", &["x", "y"]);
    assert!(alpha_equivalent(&d, &e));
}

#[test]
fn ground_value_of_a_pinned_variable() {
    let a = form("ex p, q. x = c(p, q) & p = g(q) & q = 0", &["x"]);
    let x = a.free_vars().into_iter().next().unwrap();
    assert_eq!(a.ground_value(&x).unwrap().to_string(), "c(g(0), 0)");
    let cyc = form("ex p. x = f(p) & p = f(x)", &["x"]);
    let y = cyc.free_vars().into_iter().next().unwrap();
    assert!(cyc.ground_value(&y).is_none());
}

#[test]
fn answer_document_lists_disjunct_parts() {
    let a = form("ex p. x = f(p) & ~(p = 0)", &["x"]);
    let doc = Answer::Disjunction(vec![a]).to_doc();
    assert_eq!(doc.schema, 1);
    assert_eq!(doc.kind, "disjunction");
    assert_eq!(doc.disjuncts[0].alpha, vec!["x = f(p)"]);
    assert_eq!(doc.disjuncts[0].negparts[0].beta, vec!["p = 0"]);
}
