//! Incremental error models for the three permutation benchmarks.
//!
//! Each model owns the current permutation and keeps the total error in sync
//! under position swaps, so evaluating a candidate swap costs O(1) (magic
//! square, all-interval) or O(N) (Costas) instead of a full recomputation.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{PermutationProblem, ProblemKind};

pub(crate) trait Model: Send {
    fn values(&self) -> &[u32];

    /// Replaces the assignment and recomputes all bookkeeping from scratch.
    fn load(&mut self, values: &[u32]);

    /// Total constraint error; zero iff the assignment is a solution.
    fn cost(&self) -> u64;

    /// Quantity the search minimizes. Zero iff `cost()` is zero.
    fn objective(&self) -> u64 {
        self.cost()
    }

    fn swap(&mut self, i: usize, j: usize);

    /// Search objective if positions `i` and `j` were exchanged.
    fn objective_after_swap(&mut self, i: usize, j: usize) -> u64 {
        self.swap(i, j);
        let c = self.objective();
        self.swap(i, j);
        c
    }

    /// Constraint errors projected onto each variable.
    fn variable_errors(&self, out: &mut [u64]);

    /// Problem-specific perturbation replacing the random partial reshuffle.
    /// Returns false when the model has none.
    fn custom_reset(&mut self, _rng: &mut ChaCha8Rng) -> bool {
        false
    }
}

pub(crate) fn build(problem: &PermutationProblem) -> Box<dyn Model> {
    match problem.kind {
        ProblemKind::MagicSquare => Box::new(MagicSquare::new(problem.n)),
        ProblemKind::AllInterval => Box::new(AllInterval::new(problem.n)),
        ProblemKind::Costas => Box::new(Costas::new(problem.n)),
    }
}

/// Rows, columns and both diagonals must sum to `N(N^2+1)/2`.
pub(crate) struct MagicSquare {
    n: usize,
    target: i64,
    values: Vec<u32>,
    // Lines: rows 0..n, columns n..2n, diagonal 2n, anti-diagonal 2n+1.
    sums: Vec<i64>,
    cost: u64,
}

impl MagicSquare {
    fn new(n: usize) -> Self {
        let n2 = (n * n) as i64;
        Self {
            n,
            target: n as i64 * (n2 + 1) / 2,
            values: (1..=n * n).map(|v| v as u32).collect(),
            sums: vec![0; 2 * n + 2],
            cost: 0,
        }
    }

    fn lines_of(&self, cell: usize) -> ([usize; 4], usize) {
        let (r, c) = (cell / self.n, cell % self.n);
        let mut lines = [r, self.n + c, 0, 0];
        let mut len = 2;
        if r == c {
            lines[len] = 2 * self.n;
            len += 1;
        }
        if r + c == self.n - 1 {
            lines[len] = 2 * self.n + 1;
            len += 1;
        }
        (lines, len)
    }

    fn line_error(&self, line: usize) -> u64 {
        (self.sums[line] - self.target).unsigned_abs()
    }
}

impl Model for MagicSquare {
    fn values(&self) -> &[u32] {
        &self.values
    }

    fn load(&mut self, values: &[u32]) {
        self.values.copy_from_slice(values);
        self.sums.iter_mut().for_each(|s| *s = 0);
        for cell in 0..self.values.len() {
            let (lines, len) = self.lines_of(cell);
            for &l in &lines[..len] {
                self.sums[l] += i64::from(self.values[cell]);
            }
        }
        self.cost = (0..self.sums.len()).map(|l| self.line_error(l)).sum();
    }

    fn cost(&self) -> u64 {
        self.cost
    }

    fn swap(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        let delta = i64::from(self.values[j]) - i64::from(self.values[i]);
        let (li, ni) = self.lines_of(i);
        let (lj, nj) = self.lines_of(j);
        // Lines shared by both cells keep their sum; touch the rest only.
        let mut touched = [0usize; 8];
        let mut change = [0i64; 8];
        let mut count = 0;
        let mut add = |line: usize, d: i64| {
            if let Some(k) = touched[..count].iter().position(|&t| t == line) {
                change[k] += d;
            } else {
                touched[count] = line;
                change[count] = d;
                count += 1;
            }
        };
        for &l in &li[..ni] {
            add(l, delta);
        }
        for &l in &lj[..nj] {
            add(l, -delta);
        }
        for k in 0..count {
            if change[k] != 0 {
                let line = touched[k];
                self.cost -= self.line_error(line);
                self.sums[line] += change[k];
                self.cost += self.line_error(line);
            }
        }
        self.values.swap(i, j);
    }

    fn variable_errors(&self, out: &mut [u64]) {
        for (cell, e) in out.iter_mut().enumerate() {
            let (lines, len) = self.lines_of(cell);
            *e = lines[..len].iter().map(|&l| self.line_error(l)).sum();
        }
    }
}

/// Consecutive absolute differences must all be distinct.
///
/// The search objective weights each missing interval by its value, which
/// steers the search toward placing the long intervals first.
pub(crate) struct AllInterval {
    values: Vec<u32>,
    // occurrences[d] for interval value d in 1..n
    occurrences: Vec<u32>,
    cost: u64,
    missing_weight: u64,
}

impl AllInterval {
    fn new(n: usize) -> Self {
        Self { values: (0..n as u32).collect(), occurrences: vec![0; n.max(1)], cost: 0, missing_weight: 0 }
    }

    fn interval(&self, k: usize) -> usize {
        self.values[k].abs_diff(self.values[k + 1]) as usize
    }

    fn remove(&mut self, d: usize) {
        if self.occurrences[d] >= 2 {
            self.cost -= 1;
        }
        self.occurrences[d] -= 1;
        if self.occurrences[d] == 0 {
            self.missing_weight += d as u64;
        }
    }

    fn insert(&mut self, d: usize) {
        if self.occurrences[d] >= 1 {
            self.cost += 1;
        } else {
            self.missing_weight -= d as u64;
        }
        self.occurrences[d] += 1;
    }

    /// Interval indices touched by swapping positions `i` and `j`.
    fn affected(&self, i: usize, j: usize) -> ([usize; 4], usize) {
        let last = self.values.len().saturating_sub(1);
        let mut out = [0; 4];
        let mut len = 0;
        for k in [i.wrapping_sub(1), i, j.wrapping_sub(1), j] {
            if k < last && !out[..len].contains(&k) {
                out[len] = k;
                len += 1;
            }
        }
        (out, len)
    }
}

impl Model for AllInterval {
    fn values(&self) -> &[u32] {
        &self.values
    }

    fn load(&mut self, values: &[u32]) {
        self.values.copy_from_slice(values);
        self.occurrences.iter_mut().for_each(|o| *o = 0);
        self.cost = 0;
        let n = self.values.len() as u64;
        self.missing_weight = n * n.saturating_sub(1) / 2;
        for k in 0..self.values.len().saturating_sub(1) {
            let d = self.interval(k);
            self.insert(d);
        }
    }

    fn cost(&self) -> u64 {
        self.cost
    }

    fn objective(&self) -> u64 {
        self.missing_weight
    }

    fn swap(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        let (ks, len) = self.affected(i, j);
        for &k in &ks[..len] {
            let d = self.interval(k);
            self.remove(d);
        }
        self.values.swap(i, j);
        for &k in &ks[..len] {
            let d = self.interval(k);
            self.insert(d);
        }
    }

    /// Reverses the segment whose reversal leaves the lowest objective.
    /// Interior intervals of a reversed segment are unchanged, so only the
    /// two boundary intervals move and the series keeps most of its structure.
    fn custom_reset(&mut self, rng: &mut ChaCha8Rng) -> bool {
        let n = self.values.len();
        if n < 3 {
            return false;
        }
        let mut best = u64::MAX;
        let mut pick = (0, 0);
        let mut ties = 0u32;
        for i in 0..n {
            for j in i + 1..n {
                // Reversing the whole series changes no interval.
                if i == 0 && j == n - 1 {
                    continue;
                }
                let mut old = [0usize; 2];
                let mut new = [0usize; 2];
                let mut m = 0;
                if i > 0 {
                    old[m] = self.interval(i - 1);
                    new[m] = self.values[i - 1].abs_diff(self.values[j]) as usize;
                    m += 1;
                }
                if j + 1 < n {
                    old[m] = self.interval(j);
                    new[m] = self.values[i].abs_diff(self.values[j + 1]) as usize;
                    m += 1;
                }
                old[..m].iter().for_each(|&d| self.remove(d));
                new[..m].iter().for_each(|&d| self.insert(d));
                let c = self.missing_weight;
                new[..m].iter().for_each(|&d| self.remove(d));
                old[..m].iter().for_each(|&d| self.insert(d));
                if c < best {
                    best = c;
                    pick = (i, j);
                    ties = 1;
                } else if c == best {
                    ties += 1;
                    if rng.gen_range(0..ties) == 0 {
                        pick = (i, j);
                    }
                }
            }
        }
        let mut values = self.values.clone();
        values[pick.0..=pick.1].reverse();
        self.load(&values);
        true
    }

    fn variable_errors(&self, out: &mut [u64]) {
        let n = self.values.len();
        let err = |k: usize| u64::from(self.occurrences[self.interval(k)] - 1);
        for (i, e) in out.iter_mut().enumerate() {
            let mut total = 0;
            if i > 0 {
                total += err(i - 1);
            }
            if i + 1 < n {
                total += err(i);
            }
            *e = total;
        }
    }
}

/// Every row of the difference triangle must hold distinct values.
pub(crate) struct Costas {
    n: usize,
    values: Vec<u32>,
    // counts[(k - 1) * width + (diff + n - 1)] for row k in 1..n
    counts: Vec<u32>,
    cost: u64,
}

impl Costas {
    fn new(n: usize) -> Self {
        let width = (2 * n).saturating_sub(1).max(1);
        Self { n, values: (1..=n as u32).collect(), counts: vec![0; n.saturating_sub(1) * width], cost: 0 }
    }

    fn width(&self) -> usize {
        2 * self.n - 1
    }

    fn slot(&self, k: usize, e: usize) -> usize {
        let diff = i64::from(self.values[e + k]) - i64::from(self.values[e]);
        (k - 1) * self.width() + (diff + self.n as i64 - 1) as usize
    }

    fn remove(&mut self, slot: usize) {
        if self.counts[slot] >= 2 {
            self.cost -= 1;
        }
        self.counts[slot] -= 1;
    }

    fn insert(&mut self, slot: usize) {
        if self.counts[slot] >= 1 {
            self.cost += 1;
        }
        self.counts[slot] += 1;
    }

    /// Start indices of row-`k` entries whose pair includes `i` or `j`.
    fn affected(&self, k: usize, i: usize, j: usize) -> ([usize; 4], usize) {
        let mut out = [0; 4];
        let mut len = 0;
        for e in [i.wrapping_sub(k), i, j.wrapping_sub(k), j] {
            if e < self.n && e + k < self.n && !out[..len].contains(&e) {
                out[len] = e;
                len += 1;
            }
        }
        (out, len)
    }
}

impl Model for Costas {
    fn values(&self) -> &[u32] {
        &self.values
    }

    fn load(&mut self, values: &[u32]) {
        self.values.copy_from_slice(values);
        self.counts.iter_mut().for_each(|c| *c = 0);
        self.cost = 0;
        for k in 1..self.n {
            for e in 0..self.n - k {
                let s = self.slot(k, e);
                self.insert(s);
            }
        }
    }

    fn cost(&self) -> u64 {
        self.cost
    }

    fn swap(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for k in 1..self.n {
            let (es, len) = self.affected(k, i, j);
            for &e in &es[..len] {
                let s = self.slot(k, e);
                self.remove(s);
            }
        }
        self.values.swap(i, j);
        for k in 1..self.n {
            let (es, len) = self.affected(k, i, j);
            for &e in &es[..len] {
                let s = self.slot(k, e);
                self.insert(s);
            }
        }
    }

    fn variable_errors(&self, out: &mut [u64]) {
        out.iter_mut().for_each(|e| *e = 0);
        for k in 1..self.n {
            for e in 0..self.n - k {
                if self.counts[self.slot(k, e)] > 1 {
                    out[e] += 1;
                    out[e + k] += 1;
                }
            }
        }
    }
}
