//! The 10-component termination measure.
//!
//! The first component grows as a tower of exponentials, so it is kept in
//! hereditary base-2 form: a natural number is the set of exponents of its
//! binary expansion, each exponent written the same way.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::basics::{BasicFormula, FlatAtom};
use crate::syntax::Variable;

use super::WorkingNode;

/// A natural number `Σ 2^e` over a strictly decreasing list of exponents.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Tower(Vec<Tower>);

impl Tower {
    pub fn zero() -> Tower {
        Tower(Vec::new())
    }

    pub fn one() -> Tower {
        Tower(vec![Tower::zero()])
    }

    pub fn pow2(e: Tower) -> Tower {
        Tower(vec![e])
    }

    pub fn from_u64(mut n: u64) -> Tower {
        let mut t = Tower::zero();
        let mut bit = 0u64;
        while n > 0 {
            if n & 1 == 1 {
                t.add_pow2(Tower::from_u64(bit));
            }
            n >>= 1;
            bit += 1;
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add_pow2(&mut self, e: Tower) {
        match self.0.binary_search_by(|x| e.cmp(x)) {
            Ok(i) => {
                let e = self.0.remove(i);
                self.add_pow2(e.add(&Tower::one()));
            }
            Err(i) => self.0.insert(i, e),
        }
    }

    pub fn add(&self, other: &Tower) -> Tower {
        let mut out = self.clone();
        for e in &other.0 {
            out.add_pow2(e.clone());
        }
        out
    }

    pub fn to_u128(&self) -> Option<u128> {
        let mut n: u128 = 0;
        for e in &self.0 {
            let e = e.to_u128()?;
            if e >= 128 {
                return None;
            }
            n |= 1u128 << e;
        }
        Some(n)
    }
}

impl Ord for Tower {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl PartialOrd for Tower {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.to_u128() {
            return write!(f, "{n}");
        }
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            match e.to_u128() {
                Some(n) => write!(f, "2^{n}")?,
                None => write!(f, "2^({e})")?,
            }
        }
        Ok(())
    }
}

/// Lexicographically ordered measure; every rule makes it strictly smaller.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct MeasureTuple {
    /// `α`: `2^(Σ children)` per negation, summed over the forest.
    pub n1: Tower,
    /// Nodes at level 0.
    pub n2: u64,
    /// Nodes at level 1.
    pub n3: u64,
    /// Function symbols in level-1 basic formulas.
    pub n4: u64,
    /// Sum of variable ranks over occurrences in level-1 basic formulas.
    pub n5: u64,
    /// Misordered `v = u` in level-1 basic formulas.
    pub n6: u64,
    /// Nodes at level 2.
    pub n7: u64,
    /// Sum of `λ(u)` over `finite(u)` in level-2 basic formulas.
    pub n8: BigUint,
    /// Nodes at level 3.
    pub n9: u64,
    /// Nodes at level 4.
    pub n10: u64,
}

impl fmt::Display for MeasureTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {}, {}, {}, {}, {}, {}, {})",
            self.n1, self.n2, self.n3, self.n4, self.n5, self.n6, self.n7, self.n8, self.n9, self.n10
        )
    }
}

/// `λ(u, a)` for a `finite(u)` atom of `a`.
pub fn lambda(u: &Variable, a: &BasicFormula) -> BigUint {
    if !a.eqs_distinct_and_ordered() {
        return BigUint::zero();
    }
    let idx: HashMap<&Variable, &FlatAtom> = a.equations().map(|e| (e.lhs().unwrap(), e)).collect();
    let mut memo = HashMap::new();
    lambda_rec(u, a, &idx, &mut memo)
}

fn lambda_rec<'a>(
    u: &'a Variable,
    a: &BasicFormula,
    idx: &HashMap<&'a Variable, &'a FlatAtom>,
    memo: &mut HashMap<&'a Variable, BigUint>,
) -> BigUint {
    if let Some(v) = memo.get(u) {
        return v.clone();
    }
    let value = match idx.get(u) {
        None => BigUint::one(),
        Some(_) if a.reaches(u, u) => BigUint::one(),
        Some(FlatAtom::EqVar(_, v)) => BigUint::one() + lambda_rec(v, a, idx, memo),
        Some(FlatAtom::EqApp(_, _, vs)) => {
            let mut s = BigUint::from(2u8);
            for v in vs.iter() {
                s += lambda_rec(v, a, idx, memo);
            }
            s
        }
        Some(_) => unreachable!(),
    };
    memo.insert(u, value.clone());
    value
}

fn alpha(n: &WorkingNode) -> Tower {
    let inner = n.children.iter().fold(Tower::zero(), |acc, c| acc.add(&alpha(c)));
    Tower::pow2(inner)
}

/// The measure of a forest, ranking variables with `rank`.
pub fn measure_with(forest: &[WorkingNode], rank: &dyn Fn(&Variable) -> u64) -> MeasureTuple {
    let mut m = MeasureTuple {
        n1: forest.iter().fold(Tower::zero(), |acc, t| acc.add(&alpha(t))),
        n2: 0,
        n3: 0,
        n4: 0,
        n5: 0,
        n6: 0,
        n7: 0,
        n8: BigUint::zero(),
        n9: 0,
        n10: 0,
    };
    let mut stack: Vec<&WorkingNode> = forest.iter().collect();
    while let Some(n) = stack.pop() {
        stack.extend(n.children.iter());
        match n.level {
            0 => m.n2 += 1,
            1 => {
                m.n3 += 1;
                for a in n.basic.atoms() {
                    if let FlatAtom::EqApp(..) = a {
                        m.n4 += 1;
                    }
                    m.n5 += a.vars().into_iter().map(rank).sum::<u64>();
                    if let FlatAtom::EqVar(x, y) = a {
                        if y.succ(x) {
                            m.n6 += 1;
                        }
                    }
                }
            }
            2 => {
                m.n7 += 1;
                for u in n.basic.finites().map(|a| a.finite_var().unwrap()) {
                    m.n8 += lambda(u, &n.basic);
                }
            }
            3 => m.n9 += 1,
            4 => m.n10 += 1,
            _ => {}
        }
    }
    m
}

/// The measure of a forest, variables ranked by key within the forest.
pub fn measure(forest: &[WorkingNode]) -> MeasureTuple {
    let mut vars = BTreeSet::new();
    let mut stack: Vec<&WorkingNode> = forest.iter().collect();
    while let Some(n) = stack.pop() {
        stack.extend(n.children.iter());
        vars.extend(n.basic.vars());
        vars.extend(n.quant.iter().cloned());
    }
    let ranks: HashMap<Variable, u64> = vars.into_iter().enumerate().map(|(i, v)| (v, i as u64 + 1)).collect();
    measure_with(forest, &|v| ranks[v])
}
