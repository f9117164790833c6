//! The `winning_k(x)` family: `x` is a position from which the first player
//! wins the move game in at most `k` moves.

use crate::syntax::{parse_formula, Formula};

fn pred(a: &str, b: &str) -> String {
    format!(
        "((ex j. {a} = f(j) & ((ex k. j = g(k) & {b} = j) | (~(ex k. j = g(k)) & {b} = {a}))) \
         | (ex j. {a} = g(j) & ((ex k. j = g(k) & {b} = {a}) | (~(ex k. j = g(k)) & {b} = j))) \
         | (~(ex j. {a} = f(j)) & ~(ex j. {a} = g(j)) & ~({a} = 0) & {b} = {a}))"
    )
}

fn transition(x: &str, y: &str) -> String {
    format!(
        "(ex u1, v1, u2, v2. {x} = c(u1, v1) & {y} = c(u2, v2) & (\
         (v1 = 0 & v2 = v1 & {p}) \
         | (v1 = 1 & ((ex w. u1 = g(w) & ((u2 = f(u1) & v2 = v1) | (u2 = u1 & v2 = 0))) \
         | (~(ex w. u1 = g(w)) & u2 = g(u1) & (v2 = v1 | v2 = 0)))) \
         | (~(v1 = 0) & ~(v1 = 1) & u2 = u1 & v2 = v1)))",
        p = pred("u1", "u2")
    )
}

fn move_to(x: &str, y: &str) -> String {
    format!("({} | (~(ex u, v. {x} = c(u, v)) & {x} = {y}))", transition(x, y))
}

/// Source text of `winning_k(x)`.
pub fn winning_text(k: u32) -> String {
    if k == 0 {
        return "false".to_string();
    }
    format!(
        "ex y. {} & ~(ex x. {} & ~({}))",
        move_to("x", "y"),
        move_to("y", "x"),
        winning_text(k - 1)
    )
}

/// `winning_k(x)` with the single free variable `x`.
pub fn gen_winning(k: u32) -> Formula {
    parse_formula(&winning_text(k)).expect("generated text parses")
}
