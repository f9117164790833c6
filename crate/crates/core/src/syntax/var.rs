use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

/// Position of a variable in the dense strict order `≻`.
///
/// Keys are exact rationals, so a key can always be found strictly between
/// two others or strictly above a finite set.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct OrderKey(BigRational);

impl OrderKey {
    pub fn from_int(n: i64) -> Self {
        OrderKey(BigRational::from_integer(BigInt::from(n)))
    }

    /// The least integer key strictly above `self`.
    pub fn above(&self) -> Self {
        OrderKey(self.0.floor() + BigRational::one())
    }

    pub fn between(lo: &OrderKey, hi: &OrderKey) -> Self {
        assert!(lo < hi, "empty interval");
        OrderKey((&lo.0 + &hi.0) / BigRational::from_integer(BigInt::from(2)))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }
}

impl fmt::Display for OrderKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

struct VarInner {
    name: String,
    key: OrderKey,
    hash: u64,
}

/// A variable: a display name plus an order key. Identity is the key.
#[derive(Clone)]
pub struct Variable(Arc<VarInner>);

impl Variable {
    pub fn new(name: impl Into<String>, key: OrderKey) -> Self {
        let mut h = DefaultHasher::new();
        key.hash(&mut h);
        Variable(Arc::new(VarInner {
            name: name.into(),
            key,
            hash: h.finish(),
        }))
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn key(&self) -> &OrderKey {
        &self.0.key
    }

    /// `self ≻ other`.
    pub fn succ(&self, other: &Variable) -> bool {
        self > other
    }
}

impl PartialEq for Variable {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.hash == other.0.hash && self.0.key == other.0.key)
    }
}

impl Eq for Variable {}

impl Hash for Variable {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl PartialOrd for Variable {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Variable {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.0.key.cmp(&other.0.key)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.name)
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.0.name, self.0.key)
    }
}

/// Fresh-variable source for one solving run.
///
/// Tracks the greatest key and every name seen so far; fresh variables are
/// placed above all of them and get names that collide with nothing.
#[derive(Clone, Debug, Default)]
pub struct VarContext {
    top: Option<OrderKey>,
    names: HashSet<String>,
    counters: HashMap<String, u64>,
}

impl VarContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, v: &Variable) {
        if self.top.as_ref().is_none_or(|t| v.key() > t) {
            self.top = Some(v.key().clone());
        }
        if !self.names.contains(v.name()) {
            self.names.insert(v.name().to_string());
        }
    }

    pub fn observe_all<'a>(&mut self, vars: impl IntoIterator<Item = &'a Variable>) {
        for v in vars {
            self.observe(v);
        }
    }

    pub fn top(&self) -> Option<&OrderKey> {
        self.top.as_ref()
    }

    /// A variable strictly above every variable observed so far.
    pub fn fresh(&mut self, hint: &str) -> Variable {
        let key = match &self.top {
            Some(t) => t.above(),
            None => OrderKey::from_int(1),
        };
        let name = self.fresh_name(hint);
        let v = Variable::new(name, key);
        self.observe(&v);
        v
    }

    fn fresh_name(&mut self, hint: &str) -> String {
        let base = hint.trim_end_matches(|c: char| c.is_ascii_digit() || c == '_');
        let base = if base.is_empty() || base.starts_with(|c: char| c.is_ascii_digit()) {
            "v"
        } else {
            base
        };
        let counter = self.counters.entry(base.to_string()).or_insert(0);
        loop {
            *counter += 1;
            let candidate = format!("{base}{counter}");
            if !self.names.contains(&candidate) {
                return candidate;
            }
        }
    }
}

/// A variable whose key exceeds every key in `context`.
pub fn fresh_var_above<'a>(context: impl IntoIterator<Item = &'a Variable>, hint: &str) -> Variable {
    let mut ctx = VarContext::new();
    ctx.observe_all(context);
    ctx.fresh(hint)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(name: &str, k: i64) -> Variable {
        Variable::new(name, OrderKey::from_int(k))
    }

    #[test]
    fn identity_is_the_key() {
        assert_eq!(var("a", 3), var("b", 3));
        assert_ne!(var("a", 3), var("a", 4));
        assert!(var("x", 5).succ(&var("y", 2)));
    }

    #[test]
    fn fresh_is_above_context() {
        let ctx = [var("x", 3), var("y", 7), var("z", -2)];
        let f = fresh_var_above(&ctx, "w");
        assert!(ctx.iter().all(|v| f.succ(v)));
        assert_eq!(f.name(), "w1");
    }

    #[test]
    fn fresh_names_avoid_collisions() {
        let mut ctx = VarContext::new();
        ctx.observe(&var("u1", 1));
        ctx.observe(&var("u2", 2));
        let a = ctx.fresh("u");
        let b = ctx.fresh("u1");
        assert_eq!(a.name(), "u3");
        assert_eq!(b.name(), "u4");
        assert!(b.succ(&a));
    }

    #[test]
    fn keys_are_dense() {
        let lo = OrderKey::from_int(1);
        let hi = OrderKey::from_int(2);
        let mid = OrderKey::between(&lo, &hi);
        assert!(lo < mid && mid < hi);
        assert!(OrderKey::between(&lo, &mid) < mid);
    }
}
