//! Independent multi-walk parallelism: bootstrap estimates of the expected
//! minimum runtime, and an actual first-solution-wins parallel solver.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{validate_cores, SpeedupCurve, SpeedupPoint};
use crate::error::{Error, Result};
use crate::fitting::{EmpiricalSample, Unit};
use crate::solver::{solve_until, PermutationProblem, RunSample, SolverParams};

/// z-value of a two-sided 95% normal interval.
const Z95: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapEstimate {
    pub n: u32,
    pub mean_min: f64,
    pub std_error: f64,
    pub resamples: usize,
}

/// Bootstrap estimate of `E[min of n draws]` from the empirical distribution.
pub fn bootstrap_min(sample: &EmpiricalSample, n: u32, resamples: usize, seed: u64) -> Result<BootstrapEstimate> {
    Ok(bootstrap_mins(sample, &[n], resamples, seed)?[0])
}

/// Bootstrap minima for several core counts at once.
///
/// Resample `r` always draws from its own ChaCha stream, and the minimum for
/// `n` is taken over the first `n` draws of that stream. Estimates for
/// different `n` therefore share draws and are nonincreasing in `n`, and the
/// value for a given `n` does not depend on which other counts were asked for.
pub fn bootstrap_mins(
    sample: &EmpiricalSample,
    cores: &[u32],
    resamples: usize,
    seed: u64,
) -> Result<Vec<BootstrapEstimate>> {
    validate_cores(cores)?;
    if resamples == 0 {
        return Err(Error::InvalidArgument("resamples must be >= 1".into()));
    }
    let values = sample.values();
    let max_n = *cores.iter().max().expect("validated nonempty");

    let mut mean = vec![0.0; cores.len()];
    let mut m2 = vec![0.0; cores.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for r in 0..resamples {
        rng.set_stream(r as u64);
        rng.set_word_pos(0);
        let mut next = 0;
        let mut current = f64::INFINITY;
        for drawn in 1..=max_n {
            current = current.min(values[rng.gen_range(0..values.len())]);
            // Core counts are strictly increasing.
            if next < cores.len() && cores[next] == drawn {
                let k = next;
                let delta = current - mean[k];
                mean[k] += delta / (r + 1) as f64;
                m2[k] += delta * (current - mean[k]);
                next += 1;
            }
        }
    }

    Ok(cores
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let variance = if resamples > 1 { m2[k] / (resamples - 1) as f64 } else { 0.0 };
            BootstrapEstimate {
                n,
                mean_min: mean[k],
                std_error: (variance / resamples as f64).sqrt(),
                resamples,
            }
        })
        .collect())
}

/// Empirical speedup curve `mean(sample) / bootstrap mean minimum`.
///
/// The standard error propagates the bootstrap error of the denominator only;
/// the sample mean is treated as fixed. No limit or origin slope is attached.
pub fn bootstrap_speedup(sample: &EmpiricalSample, cores: &[u32], resamples: usize, seed: u64) -> Result<SpeedupCurve> {
    let mean = sample.mean();
    let estimates = bootstrap_mins(sample, cores, resamples, seed)?;
    let points = estimates
        .iter()
        .map(|e| {
            if e.mean_min <= 0.0 {
                return Err(Error::DegenerateSample(format!(
                    "bootstrap mean minimum at n={} is zero; speedup undefined",
                    e.n
                )));
            }
            let speedup = mean / e.mean_min;
            Ok(SpeedupPoint { n: e.n, speedup, std_error: Some(speedup * e.std_error / e.mean_min) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpeedupCurve { points, limit: None, origin_slope: None })
}

/// Outcome of one first-solution-wins parallel execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelRunRecord {
    pub workers: usize,
    pub winner_seed: u64,
    pub winner_iterations: u64,
    /// Wall time of the whole parallel execution, in seconds.
    pub wall_time: f64,
    /// Iterations performed by all workers until they stopped.
    pub total_iterations_all_workers: u64,
    /// Messages of workers that failed or panicked.
    pub failures: Vec<String>,
    /// The winning run as the winning worker reported it.
    #[serde(skip)]
    pub winner: Option<RunSample>,
}

/// Runs `workers` independent solver walks with seeds `base, base+1, ...`
/// and stops everything once a verified solution is known.
///
/// Walks share only the smallest iteration count at which some walk has
/// solved. A walk stops as soon as its own completed iterations reach that
/// count, so the winner's iteration count is exactly the minimum over the
/// sequential runs with the same seeds. Ties go to the lowest worker index.
pub fn parallel_solve(problem: &PermutationProblem, params: &SolverParams, workers: usize) -> Result<ParallelRunRecord> {
    params.validate()?;
    race(params.rng_seed, workers, |seed, stop| solve_until(problem, &params.with_seed(seed), stop))
}

fn race<F>(base_seed: u64, workers: usize, walk: F) -> Result<ParallelRunRecord>
where
    F: Fn(u64, &(dyn Fn(u64) -> bool + Sync)) -> Result<RunSample> + Sync,
{
    if workers == 0 {
        return Err(Error::InvalidArgument("workers must be >= 1".into()));
    }
    let start = Instant::now();
    let best = AtomicU64::new(u64::MAX);
    let stop = |iterations: u64| iterations >= best.load(Ordering::Relaxed);

    let outcomes: Vec<std::result::Result<RunSample, String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|i| {
                let (walk, best, stop) = (&walk, &best, &stop);
                let seed = base_seed.wrapping_add(i as u64);
                scope.spawn(move || {
                    let run = catch_unwind(AssertUnwindSafe(|| walk(seed, stop)));
                    match run {
                        Ok(Ok(sample)) => {
                            if sample.solved {
                                best.fetch_min(sample.iterations, Ordering::Relaxed);
                            }
                            Ok(sample)
                        }
                        Ok(Err(e)) => Err(format!("worker {i} (seed {seed}): {e}")),
                        Err(panic) => Err(format!("worker {i} (seed {seed}) panicked: {}", panic_message(&*panic))),
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err("worker thread panicked".into())))
            .collect()
    });
    let wall_time = start.elapsed().as_secs_f64();

    let mut failures = Vec::new();
    let mut total = 0u64;
    let mut winner: Option<RunSample> = None;
    for outcome in outcomes {
        match outcome {
            Ok(run) => {
                total += run.iterations;
                let better = winner.as_ref().map_or(true, |w| run.iterations < w.iterations);
                if run.solved && better {
                    winner = Some(run);
                }
            }
            Err(message) => failures.push(message),
        }
    }
    let Some(winner) = winner else {
        return Err(Error::AllWorkersFailed { workers });
    };
    Ok(ParallelRunRecord {
        workers,
        winner_seed: winner.seed,
        winner_iterations: winner.iterations,
        wall_time,
        total_iterations_all_workers: total,
        failures,
        winner: Some(winner),
    })
}

fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let variance = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (variance / n).sqrt())
}

fn panic_message(panic: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = panic.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = panic.downcast_ref::<String>() {
        s.clone()
    } else {
        "unknown panic".into()
    }
}

/// Measured multi-walk speedup over repeated parallel executions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredSpeedup {
    pub workers: usize,
    pub trials: usize,
    pub baseline_mean: f64,
    pub mean_winner_iterations: f64,
    pub mean_speedup: f64,
    /// 95% normal-approximation interval; accounts for the sampling error of
    /// both the trial mean and the baseline mean.
    pub confidence_interval: (f64, f64),
    /// More workers than available hardware threads; wall times are then
    /// inflated but iteration counts are unaffected.
    pub oversubscribed: bool,
    pub records: Vec<ParallelRunRecord>,
}

/// Speedup in iterations of `workers`-walk parallel solving against a
/// sequential baseline sample. Trial `t` uses seeds starting at
/// `params.rng_seed + t * workers`, so no seed is used twice.
pub fn measure_parallel_speedup(
    problem: &PermutationProblem,
    params: &SolverParams,
    workers: usize,
    trials: usize,
    baseline: &EmpiricalSample,
) -> Result<MeasuredSpeedup> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    if baseline.unit() != Unit::Iterations {
        return Err(Error::InvalidArgument("the baseline sample must count iterations".into()));
    }
    let records = (0..trials)
        .map(|t| {
            let seed = params.rng_seed.wrapping_add((t * workers) as u64);
            parallel_solve(problem, &params.with_seed(seed), workers)
        })
        .collect::<Result<Vec<_>>>()?;
    speedup_from_records(baseline, workers, records)
}

/// Summarizes parallel records against a sequential baseline sample.
pub fn speedup_from_records(
    baseline: &EmpiricalSample,
    workers: usize,
    records: Vec<ParallelRunRecord>,
) -> Result<MeasuredSpeedup> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no parallel records".into()));
    }
    let iterations: Vec<f64> = records.iter().map(|r| r.winner_iterations as f64).collect();
    let (mean, se) = mean_and_std_error(&iterations);
    if mean <= 0.0 {
        return Err(Error::DegenerateSample("every parallel trial was solved at iteration 0".into()));
    }
    let (baseline_mean, baseline_se) = mean_and_std_error(baseline.values());
    let speedup = baseline_mean / mean;
    // Delta method for a ratio of independent means.
    let relative = ((baseline_se / baseline_mean).powi(2) + (se / mean).powi(2)).sqrt();
    let half_width = Z95 * speedup * relative;
    let hardware = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    Ok(MeasuredSpeedup {
        workers,
        trials: records.len(),
        baseline_mean,
        mean_winner_iterations: mean,
        mean_speedup: speedup,
        confidence_interval: (speedup - half_width, speedup + half_width),
        oversubscribed: workers > hardware,
        records,
    })
}
