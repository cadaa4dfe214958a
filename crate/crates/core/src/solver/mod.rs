//! Adaptive Search: constraint-based local search over permutations.
//!
//! Each iteration projects constraint errors onto variables, picks the
//! non-tabu variable with the largest error (the culprit), and tries every
//! swap of the culprit with another position, keeping the swap that
//! minimizes the next total error. Culprits without an improving swap are
//! frozen for `tabu_tenure` iterations; once `reset_trigger` variables are
//! frozen, a `reset_fraction` share of positions is reshuffled.

mod checker;
mod models;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{EmpiricalSample, Unit};

pub use checker::{is_permutation, is_solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    MagicSquare,
    AllInterval,
    Costas,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::MagicSquare => "magic-square",
            ProblemKind::AllInterval => "all-interval",
            ProblemKind::Costas => "costas",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "magic-square" => Ok(ProblemKind::MagicSquare),
            "all-interval" => Ok(ProblemKind::AllInterval),
            "costas" => Ok(ProblemKind::Costas),
            other => Err(Error::InvalidArgument(format!(
                "unknown problem `{other}` (expected magic-square, all-interval or costas)"
            ))),
        }
    }
}

/// A benchmark instance. `n` is the square side, the number of notes, or the array size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PermutationProblem {
    pub kind: ProblemKind,
    pub n: usize,
}

impl PermutationProblem {
    pub fn new(kind: ProblemKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("problem order must be >= 1".into()));
        }
        if kind == ProblemKind::MagicSquare && n == 2 {
            return Err(Error::InvalidArgument("no magic square of order 2 exists".into()));
        }
        if n > 4096 {
            return Err(Error::InvalidArgument(format!("problem order {n} is too large")));
        }
        Ok(Self { kind, n })
    }

    pub fn num_variables(&self) -> usize {
        match self.kind {
            ProblemKind::MagicSquare => self.n * self.n,
            ProblemKind::AllInterval | ProblemKind::Costas => self.n,
        }
    }

    /// The sorted domain: `1..=N^2`, `0..N` or `1..=N`.
    pub fn identity(&self) -> Vec<u32> {
        let nv = self.num_variables() as u32;
        match self.kind {
            ProblemKind::AllInterval => (0..nv).collect(),
            ProblemKind::MagicSquare | ProblemKind::Costas => (1..=nv).collect(),
        }
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.kind, self.n)
    }
}

/// An assignment with its total error and the per-variable projection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub assignment: Vec<u32>,
    pub total_cost: u64,
    pub per_variable_error: Vec<u64>,
}

/// Full recomputation of constraint errors for one assignment.
pub fn constraint_errors(problem: &PermutationProblem, assignment: &[u32]) -> Result<Configuration> {
    if !is_permutation(problem, assignment) {
        return Err(Error::InvalidConfiguration(format!(
            "assignment is not a permutation of the {} domain",
            problem.label()
        )));
    }
    let mut model = models::build(problem);
    model.load(assignment);
    let mut per_variable_error = vec![0; assignment.len()];
    model.variable_errors(&mut per_variable_error);
    Ok(Configuration { assignment: assignment.to_vec(), total_cost: model.cost(), per_variable_error })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Iterations a culprit stays frozen.
    pub tabu_tenure: u32,
    /// Share of variables reshuffled on reset, in `(0, 1]`.
    pub reset_fraction: f64,
    /// Number of frozen variables that triggers a reset.
    pub reset_trigger: usize,
    /// Probability of taking the best non-improving move at a local minimum
    /// instead of freezing the culprit, in `[0, 1]`.
    #[serde(default)]
    pub local_min_acceptance: f64,
    /// Restart from a fresh random permutation after this many iterations.
    pub max_iterations: u64,
    pub rng_seed: u64,
}

impl SolverParams {
    pub const DEFAULT_TABU_TENURE: u32 = 10;
    pub const DEFAULT_RESET_FRACTION: f64 = 0.25;
    pub const DEFAULT_LOCAL_MIN_ACCEPTANCE: f64 = 0.3;

    /// Default tuning: tenure 10, reset a quarter of the variables once a
    /// tenth of them are frozen, escape 30% of local minima, never restart.
    pub fn defaults(problem: &PermutationProblem, seed: u64) -> Self {
        Self {
            tabu_tenure: Self::DEFAULT_TABU_TENURE,
            reset_fraction: Self::DEFAULT_RESET_FRACTION,
            reset_trigger: (problem.num_variables() / 10).max(1),
            local_min_acceptance: Self::DEFAULT_LOCAL_MIN_ACCEPTANCE,
            max_iterations: u64::MAX,
            rng_seed: seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { rng_seed: seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reset_fraction > 0.0 && self.reset_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "reset_fraction must lie in (0, 1], got {}",
                self.reset_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.local_min_acceptance) {
            return Err(Error::InvalidArgument(format!(
                "local_min_acceptance must lie in [0, 1], got {}",
                self.local_min_acceptance
            )));
        }
        if self.reset_trigger == 0 {
            return Err(Error::InvalidArgument("reset_trigger must be >= 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// One sequential execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSample {
    pub seed: u64,
    /// Iterations performed, counted across resets and restarts.
    pub iterations: u64,
    /// Wall time in seconds.
    pub wall_time: f64,
    /// Set only after the independent checker accepted `assignment`.
    pub solved: bool,
    pub problem: PermutationProblem,
    #[serde(skip)]
    pub assignment: Vec<u32>,
}

/// Polled once per iteration with the number of iterations completed so far.
pub trait StopSignal {
    fn should_stop(&self, iterations: u64) -> bool;
}

/// Run until solved.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeverStop;

impl StopSignal for NeverStop {
    fn should_stop(&self, _: u64) -> bool {
        false
    }
}

/// Global iteration budget.
#[derive(Debug, Clone, Copy)]
pub struct IterationCap(pub u64);

impl StopSignal for IterationCap {
    fn should_stop(&self, iterations: u64) -> bool {
        iterations >= self.0
    }
}

impl<F: Fn(u64) -> bool + ?Sized> StopSignal for F {
    fn should_stop(&self, iterations: u64) -> bool {
        self(iterations)
    }
}

/// Solves `problem` from a random start; may run forever on an unsatisfiable
/// instance, so pass a [`StopSignal`] through [`solve_until`] when a budget is needed.
pub fn solve(problem: &PermutationProblem, params: &SolverParams) -> Result<RunSample> {
    solve_until(problem, params, &NeverStop)
}

pub fn solve_until<S: StopSignal + ?Sized>(
    problem: &PermutationProblem,
    params: &SolverParams,
    stop: &S,
) -> Result<RunSample> {
    params.validate()?;
    let start = Instant::now();
    let mut search = Search::new(problem, params);
    let solved_at = search.run(stop);
    let assignment = search.model.values().to_vec();
    let solved = solved_at && is_solution(problem, &assignment);
    if solved_at && !solved {
        return Err(Error::InvalidConfiguration(format!(
            "solver reported a zero-cost {} configuration rejected by the checker: {assignment:?}",
            problem.label()
        )));
    }
    Ok(RunSample {
        seed: params.rng_seed,
        iterations: search.iterations,
        wall_time: start.elapsed().as_secs_f64(),
        solved,
        problem: *problem,
        assignment,
    })
}

struct Search<'a> {
    params: &'a SolverParams,
    model: Box<dyn models::Model>,
    rng: ChaCha8Rng,
    tabu_until: Vec<u64>,
    errors: Vec<u64>,
    candidates: Vec<usize>,
    iterations: u64,
    since_restart: u64,
}

impl<'a> Search<'a> {
    fn new(problem: &PermutationProblem, params: &'a SolverParams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
        let mut values = problem.identity();
        values.shuffle(&mut rng);
        let mut model = models::build(problem);
        model.load(&values);
        let nv = values.len();
        Self {
            params,
            model,
            rng,
            tabu_until: vec![0; nv],
            errors: vec![0; nv],
            candidates: Vec::with_capacity(nv),
            iterations: 0,
            since_restart: 0,
        }
    }

    /// Returns true when a zero-cost configuration was reached.
    fn run<S: StopSignal + ?Sized>(&mut self, stop: &S) -> bool {
        loop {
            if self.model.cost() == 0 {
                return true;
            }
            if stop.should_stop(self.iterations) {
                return false;
            }
            if self.since_restart >= self.params.max_iterations {
                self.restart();
            }
            self.step();
            self.iterations += 1;
            self.since_restart += 1;

            let frozen = self.tabu_until.iter().filter(|&&t| t > self.iterations).count();
            if frozen >= self.params.reset_trigger {
                self.reset();
            }
        }
    }

    fn step(&mut self) {
        let nv = self.tabu_until.len();
        if nv < 2 {
            return;
        }
        self.model.variable_errors(&mut self.errors);

        // Culprit: highest projected error among non-frozen variables.
        self.candidates.clear();
        let mut worst = 0;
        for i in 0..nv {
            if self.tabu_until[i] > self.iterations {
                continue;
            }
            let e = self.errors[i];
            if self.candidates.is_empty() || e > worst {
                worst = e;
                self.candidates.clear();
                self.candidates.push(i);
            } else if e == worst {
                self.candidates.push(i);
            }
        }
        let Some(&culprit) = self.candidates.choose(&mut self.rng) else {
            return;
        };

        // Min-conflict over swaps with the culprit; ties broken uniformly.
        let current = self.model.objective();
        let mut best_cost = u64::MAX;
        let mut best_move = culprit;
        let mut ties = 0u32;
        for j in (0..nv).filter(|&j| j != culprit) {
            let c = self.model.objective_after_swap(culprit, j);
            if c < best_cost {
                best_cost = c;
                best_move = j;
                ties = 1;
            } else if c == best_cost {
                ties += 1;
                if self.rng.gen_range(0..ties) == 0 {
                    best_move = j;
                }
            }
        }

        let escape = self.params.local_min_acceptance;
        if best_cost < current || (escape > 0.0 && self.rng.gen_bool(escape)) {
            self.model.swap(culprit, best_move);
        } else {
            if best_cost == current {
                // Plateau move; freezing the culprit stops it bouncing back.
                self.model.swap(culprit, best_move);
            }
            self.tabu_until[culprit] = self.iterations + 1 + u64::from(self.params.tabu_tenure);
        }
    }

    fn reset(&mut self) {
        let nv = self.tabu_until.len();
        if self.model.custom_reset(&mut self.rng) {
            self.tabu_until.iter_mut().for_each(|t| *t = 0);
            return;
        }
        let k = ((self.params.reset_fraction * nv as f64).ceil() as usize).clamp(1, nv);
        let positions = index::sample(&mut self.rng, nv, k).into_vec();
        let mut values = self.model.values().to_vec();
        let mut picked: Vec<u32> = positions.iter().map(|&p| values[p]).collect();
        picked.shuffle(&mut self.rng);
        for (&p, v) in positions.iter().zip(picked) {
            values[p] = v;
        }
        self.model.load(&values);
        self.tabu_until.iter_mut().for_each(|t| *t = 0);
    }

    fn restart(&mut self) {
        let mut values = self.model.values().to_vec();
        values.shuffle(&mut self.rng);
        self.model.load(&values);
        self.tabu_until.iter_mut().for_each(|t| *t = 0);
        self.since_restart = 0;
    }
}

/// Sequential benchmark runs with seeds `seed, seed+1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Collection {
    pub problem: PermutationProblem,
    pub params: SolverParams,
    pub runs: Vec<RunSample>,
}

impl Collection {
    fn solved(&self) -> impl Iterator<Item = &RunSample> {
        self.runs.iter().filter(|r| r.solved)
    }

    /// Iteration counts of solved runs.
    pub fn iterations_sample(&self) -> Result<EmpiricalSample> {
        EmpiricalSample::new(self.solved().map(|r| r.iterations as f64).collect(), Unit::Iterations, self.problem.label())
    }

    /// Wall times of solved runs.
    pub fn wall_time_sample(&self) -> Result<EmpiricalSample> {
        EmpiricalSample::new(self.solved().map(|r| r.wall_time).collect(), Unit::Seconds, self.problem.label())
    }
}

/// Runs `runs` independent solves; `jobs > 1` spreads them over threads
/// without changing any per-run result. `progress` receives the number of
/// runs finished so far.
pub fn collect(
    problem: &PermutationProblem,
    params: &SolverParams,
    runs: usize,
    jobs: usize,
    progress: &(dyn Fn(usize) + Sync),
) -> Result<Collection> {
    collect_until(problem, params, runs, jobs, &NeverStop, progress)
}

pub fn collect_until<S: StopSignal + Sync + ?Sized>(
    problem: &PermutationProblem,
    params: &SolverParams,
    runs: usize,
    jobs: usize,
    stop: &S,
    progress: &(dyn Fn(usize) + Sync),
) -> Result<Collection> {
    if runs == 0 {
        return Err(Error::InvalidArgument("runs must be >= 1".into()));
    }
    params.validate()?;
    let jobs = jobs.clamp(1, runs);
    let seed_of = |i: usize| params.rng_seed.wrapping_add(i as u64);

    let results: Vec<Result<RunSample>> = if jobs == 1 {
        (0..runs)
            .map(|i| {
                let r = solve_until(problem, &params.with_seed(seed_of(i)), stop);
                progress(i + 1);
                r
            })
            .collect()
    } else {
        let next = AtomicUsize::new(0);
        let done = AtomicUsize::new(0);
        let mut slots: Vec<Option<Result<RunSample>>> = (0..runs).map(|_| None).collect();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..jobs)
                .map(|_| {
                    scope.spawn(|| {
                        let mut mine = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            if i >= runs {
                                break mine;
                            }
                            mine.push((i, solve_until(problem, &params.with_seed(seed_of(i)), stop)));
                            progress(done.fetch_add(1, Ordering::Relaxed) + 1);
                        }
                    })
                })
                .collect();
            for h in handles {
                for (i, r) in h.join().expect("collect worker panicked") {
                    slots[i] = Some(r);
                }
            }
        });
        slots.into_iter().map(|s| s.expect("every run index is claimed")).collect()
    };

    Ok(Collection { problem: *problem, params: params.clone(), runs: results.into_iter().collect::<Result<_>>()? })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(kind: ProblemKind, n: usize) -> PermutationProblem {
        PermutationProblem::new(kind, n).unwrap()
    }

    #[test]
    fn constraint_errors_on_known_solutions() {
        let durer = [16, 3, 2, 13, 5, 10, 11, 8, 9, 6, 7, 12, 4, 15, 14, 1];
        let c = constraint_errors(&problem(ProblemKind::MagicSquare, 4), &durer).unwrap();
        assert_eq!(c.total_cost, 0);
        assert!(c.per_variable_error.iter().all(|&e| e == 0));
        let ai = constraint_errors(&problem(ProblemKind::AllInterval, 8), &[3, 6, 0, 7, 2, 4, 5, 1]).unwrap();
        assert_eq!(ai.total_cost, 0);
        let costas = constraint_errors(&problem(ProblemKind::Costas, 5), &[3, 4, 2, 1, 5]).unwrap();
        assert_eq!(costas.total_cost, 0);
    }

    #[test]
    fn constraint_errors_identity_costas() {
        // Identity: row k of the difference triangle is all k's, so N-k-1 duplicates per row.
        let c = constraint_errors(&problem(ProblemKind::Costas, 5), &[1, 2, 3, 4, 5]).unwrap();
        assert_eq!(c.total_cost, 3 + 2 + 1);
        assert!(c.total_cost > 0);
    }

    #[test]
    fn constraint_errors_magic_square_projection() {
        // 3x3 identity layout: rows 6, 15, 24; columns 12, 15, 18; diagonals 15, 15; target 15.
        let c = constraint_errors(&problem(ProblemKind::MagicSquare, 3), &[1, 2, 3, 4, 5, 6, 7, 8, 9]).unwrap();
        assert_eq!(c.total_cost, 9 + 0 + 9 + 3 + 0 + 3);
        // Corner (0,0): row 0 (9) + col 0 (3) + diagonal (0).
        assert_eq!(c.per_variable_error[0], 12);
        // Centre: row 1, col 1 and both diagonals are all exact.
        assert_eq!(c.per_variable_error[4], 0);
    }

    #[test]
    fn constraint_errors_all_interval_projection() {
        // Intervals 1,1,1: value 1 occurs 3 times -> error 2.
        let c = constraint_errors(&problem(ProblemKind::AllInterval, 4), &[0, 1, 2, 3]).unwrap();
        assert_eq!(c.total_cost, 2);
        assert_eq!(c.per_variable_error, vec![2, 4, 4, 2]);
    }

    #[test]
    fn constraint_errors_rejects_non_permutations() {
        let err = constraint_errors(&problem(ProblemKind::Costas, 3), &[1, 1, 2]).unwrap_err();
        assert!(matches!(err, Error::InvalidConfiguration(_)));
    }

    #[test]
    fn problem_validation() {
        assert!(PermutationProblem::new(ProblemKind::MagicSquare, 2).is_err());
        assert!(PermutationProblem::new(ProblemKind::Costas, 0).is_err());
        assert_eq!("all-interval".parse::<ProblemKind>().unwrap(), ProblemKind::AllInterval);
        assert!("sudoku".parse::<ProblemKind>().is_err());
    }

    #[test]
    fn params_validation() {
        let p = problem(ProblemKind::Costas, 8);
        let good = SolverParams::defaults(&p, 1);
        assert_eq!(good.reset_trigger, 1);
        assert!(good.validate().is_ok());
        assert!(SolverParams { reset_fraction: 0.0, ..good.clone() }.validate().is_err());
        assert!(SolverParams { reset_fraction: 1.5, ..good.clone() }.validate().is_err());
        assert!(SolverParams { reset_trigger: 0, ..good.clone() }.validate().is_err());
        assert!(SolverParams { local_min_acceptance: 1.5, ..good.clone() }.validate().is_err());
        assert!(SolverParams { max_iterations: 0, ..good }.validate().is_err());
    }

    #[test]
    fn solves_small_instances_deterministically() {
        for (kind, n) in [(ProblemKind::MagicSquare, 4), (ProblemKind::AllInterval, 8), (ProblemKind::Costas, 7)] {
            let p = problem(kind, n);
            let params = SolverParams::defaults(&p, 17);
            let a = solve(&p, &params).unwrap();
            let b = solve(&p, &params).unwrap();
            assert!(a.solved);
            assert!(is_solution(&p, &a.assignment));
            assert_eq!(a.iterations, b.iterations);
            assert_eq!(a.assignment, b.assignment);
        }
    }

    #[test]
    fn restarts_still_solve() {
        let p = problem(ProblemKind::Costas, 8);
        let params = SolverParams { max_iterations: 50, ..SolverParams::defaults(&p, 3) };
        let r = solve(&p, &params).unwrap();
        assert!(r.solved);
    }

    #[test]
    fn iteration_cap_stops_unsolved() {
        let p = problem(ProblemKind::Costas, 16);
        let r = solve_until(&p, &SolverParams::defaults(&p, 0), &IterationCap(5)).unwrap();
        assert!(!r.solved || r.iterations <= 5);
        assert!(r.iterations <= 5);
    }

    #[test]
    fn collect_is_order_stable_across_jobs() {
        let p = problem(ProblemKind::Costas, 8);
        let params = SolverParams::defaults(&p, 100);
        let seq = collect(&p, &params, 12, 1, &|_| {}).unwrap();
        let par = collect(&p, &params, 12, 4, &|_| {}).unwrap();
        let key = |c: &Collection| c.runs.iter().map(|r| (r.seed, r.iterations)).collect::<Vec<_>>();
        assert_eq!(key(&seq), key(&par));
        assert_eq!(seq.runs[3].seed, 103);
        assert!(collect(&p, &params, 0, 1, &|_| {}).is_err());
    }
}
