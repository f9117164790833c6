//! Workloads for the solver benchmarks in `benches/`.

pub use treesolve::{gen_random, gen_winning, solve, Formula, RandomSpec, SolveOptions};

/// `count` closed random formulas of the given depth, seeds `seed..`.
pub fn random_sentences(depth: usize, count: u64, seed: u64) -> Vec<Formula> {
    (seed..seed + count)
        .map(|s| gen_random(&RandomSpec::new(depth, s).closed()).to_formula())
        .collect()
}

/// Solves every formula with default options and returns how many completed.
pub fn solve_all(formulas: &[Formula]) -> usize {
    let opts = SolveOptions::default();
    formulas
        .iter()
        .filter(|f| solve(f, &opts).map(|r| r.answer.is_some()).unwrap_or(false))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_batch_completes() {
        let batch = random_sentences(2, 5, 0);
        assert_eq!(batch.len(), 5);
        assert!(batch.iter().all(Formula::is_closed));
        assert_eq!(solve_all(&batch), 5);
    }
}
