//! Benchmark formula generators.

mod random;
mod winning;

pub use random::{gen_random, random_symbols, RandomSpec};
pub use winning::{gen_winning, winning_text};
