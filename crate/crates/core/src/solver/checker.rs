//! Stand-alone solution checkers. They share nothing with the incremental
//! models and recompute every constraint from the raw assignment.

use std::collections::HashSet;

use super::{PermutationProblem, ProblemKind};

/// True iff `values` is a permutation of the problem's domain satisfying every constraint.
pub fn is_solution(problem: &PermutationProblem, values: &[u32]) -> bool {
    if !is_permutation(problem, values) {
        return false;
    }
    match problem.kind {
        ProblemKind::MagicSquare => magic_square_ok(problem.n, values),
        ProblemKind::AllInterval => all_interval_ok(values),
        ProblemKind::Costas => costas_ok(values),
    }
}

pub fn is_permutation(problem: &PermutationProblem, values: &[u32]) -> bool {
    let mut expected = problem.identity();
    let mut got = values.to_vec();
    got.sort_unstable();
    expected.sort_unstable();
    got == expected
}

fn magic_square_ok(n: usize, values: &[u32]) -> bool {
    let target = (n * (n * n + 1) / 2) as u64;
    let at = |r: usize, c: usize| u64::from(values[r * n + c]);
    let rows = (0..n).all(|r| (0..n).map(|c| at(r, c)).sum::<u64>() == target);
    let cols = (0..n).all(|c| (0..n).map(|r| at(r, c)).sum::<u64>() == target);
    let diag = (0..n).map(|i| at(i, i)).sum::<u64>() == target;
    let anti = (0..n).map(|i| at(i, n - 1 - i)).sum::<u64>() == target;
    rows && cols && diag && anti
}

fn all_interval_ok(values: &[u32]) -> bool {
    let diffs: HashSet<u32> = values.windows(2).map(|w| w[0].abs_diff(w[1])).collect();
    let n = values.len() as u32;
    diffs.len() == values.len().saturating_sub(1) && diffs.iter().all(|&d| (1..n).contains(&d))
}

fn costas_ok(values: &[u32]) -> bool {
    // All displacement vectors between pairs of marks are distinct.
    let mut seen = HashSet::new();
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let v = (j - i, i64::from(values[j]) - i64::from(values[i]));
            if !seen.insert(v) {
                return false;
            }
        }
    }
    true
}
