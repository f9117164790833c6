//! The counter game: positions `(i, j)` with `i ≥ 0`, `j ∈ {0, 1}`.
//!
//! From `(i, 0)` the only move is to `(i - 1, 0)`. From `(i, 1)` with `i` odd
//! a player moves to `(i + 1, 1)` or `(i, 0)`; with `i` even to `(i + 1, 0)`
//! or `(i + 1, 1)`. A player who would have to leave `i ≥ 0` loses.

use std::collections::{BTreeSet, HashMap};

use crate::syntax::{Symbol, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub i: u32,
    pub j: u8,
}

pub fn successors(p: Position) -> Vec<Position> {
    match (p.j, p.i % 2) {
        (0, _) if p.i == 0 => vec![],
        (0, _) => vec![Position { i: p.i - 1, j: 0 }],
        (_, 1) => vec![Position { i: p.i + 1, j: 1 }, Position { i: p.i, j: 0 }],
        _ => vec![Position { i: p.i + 1, j: 0 }, Position { i: p.i + 1, j: 1 }],
    }
}

/// Positions with `i ≤ i_bound` from which the player to move wins in at
/// most `k` of their own moves. The search itself is unbounded: `k` rounds
/// raise `i` by at most `2k`, so memoized play stays finite.
pub fn k_winning_positions(k: u32, i_bound: u32) -> BTreeSet<Position> {
    fn win(p: Position, k: u32, memo: &mut HashMap<(Position, u32), bool>) -> bool {
        if k == 0 {
            return false;
        }
        if let Some(&w) = memo.get(&(p, k)) {
            return w;
        }
        let w = successors(p)
            .into_iter()
            .any(|y| successors(y).into_iter().all(|x| win(x, k - 1, memo)));
        memo.insert((p, k), w);
        w
    }
    let mut memo = HashMap::new();
    (0..=i_bound)
        .flat_map(|i| [0, 1].map(|j| Position { i, j }))
        .filter(|&p| win(p, k, &mut memo))
        .collect()
}

/// `c`, `f`, `g`, `0`, `1`.
pub fn game_symbols() -> [Symbol; 5] {
    [
        Symbol::new("c", 2),
        Symbol::new("f", 1),
        Symbol::new("g", 1),
        Symbol::new("0", 0),
        Symbol::new("1", 0),
    ]
}

fn encode_counter(i: u32) -> Term {
    let [_, f, g, zero, _] = game_symbols();
    let mut t = Term::app(&zero, vec![]);
    for n in 1..=i {
        t = if n % 2 == 1 { Term::app(&g, vec![t]) } else { Term::app(&f, vec![t]) };
    }
    t
}

/// `c(ī, j)` where `ī` alternates `g` and `f` above `0`.
pub fn encode_position(p: Position) -> Term {
    let [c, _, _, zero, one] = game_symbols();
    let j = if p.j == 0 { zero } else { one };
    Term::app(&c, vec![encode_counter(p.i), Term::app(&j, vec![])])
}

pub fn decode_position(t: &Term) -> Option<Position> {
    let Term::App(c, args) = t else { return None };
    if c.name() != "c" || args.len() != 2 {
        return None;
    }
    let j = match &args[1] {
        Term::App(s, a) if a.is_empty() && s.name() == "0" => 0,
        Term::App(s, a) if a.is_empty() && s.name() == "1" => 1,
        _ => return None,
    };
    let mut depth = 0u32;
    let mut cur = &args[0];
    let mut chain = Vec::new();
    while let Term::App(s, a) = cur {
        if a.is_empty() {
            if s.name() != "0" {
                return None;
            }
            break;
        }
        if a.len() != 1 {
            return None;
        }
        chain.push(s.name().to_string());
        depth += 1;
        cur = &a[0];
    }
    if matches!(cur, Term::Var(_)) {
        return None;
    }
    let p = Position { i: depth, j };
    (encode_position(p) == *t).then_some(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_winning_sets() {
        let w = |k, b| k_winning_positions(k, b).into_iter().map(|p| (p.i, p.j)).collect::<Vec<_>>();
        assert_eq!(w(1, 4), vec![(1, 0)]);
        assert_eq!(w(2, 6), vec![(1, 0), (3, 0)]);
        assert_eq!(w(3, 8), vec![(1, 0), (3, 0), (5, 0)]);
    }

    #[test]
    fn zero_zero_is_lost() {
        assert!(successors(Position { i: 0, j: 0 }).is_empty());
    }

    #[test]
    fn encoding_round_trips() {
        for i in 0..7 {
            for j in 0..2 {
                let p = Position { i, j };
                assert_eq!(decode_position(&encode_position(p)), Some(p));
            }
        }
        assert_eq!(encode_position(Position { i: 3, j: 0 }).to_string(), "c(g(f(g(0))), 0)");
    }
}
