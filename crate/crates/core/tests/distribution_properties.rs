use lasvegas::fitting::ks_test_with_threshold;
use lasvegas::{EmpiricalSample, RuntimeDistribution, Unit};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn any_distribution() -> impl Strategy<Value = RuntimeDistribution> {
    prop_oneof![
        (0.0..5_000.0f64, -9.0..0.0f64)
            .prop_map(|(x0, log_lambda)| RuntimeDistribution::shifted_exponential(x0, 10f64.powf(log_lambda)).unwrap()),
        (0.0..5_000.0f64, 0.0..12.0f64, 0.2..2.0f64)
            .prop_map(|(x0, mu, sigma)| RuntimeDistribution::shifted_lognormal(x0, mu, sigma).unwrap()),
        (0.0..1_000.0f64, -500.0..5_000.0f64, 10.0..2_000.0f64)
            .prop_map(|(x0, mu, sigma)| RuntimeDistribution::shifted_gaussian(x0, mu, sigma).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn min_expectation_decreases_and_speedup_grows(dist in any_distribution()) {
        let cores = [1u32, 2, 3, 8, 33, 128];
        let mins: Vec<f64> = cores.iter().map(|&n| dist.min_expectation(n).unwrap()).collect();
        prop_assert!((mins[0] - dist.expectation()).abs() <= 1e-6 * dist.expectation());
        for w in mins.windows(2) {
            prop_assert!(w[1] < w[0], "{:?}: {:?}", dist, mins);
        }
        let curve = dist.speedup_curve(&cores).unwrap();
        prop_assert!((curve.points[0].speedup - 1.0).abs() < 1e-6);
        for w in curve.points.windows(2) {
            prop_assert!(w[1].speedup >= w[0].speedup);
        }
    }

    #[test]
    fn exponential_speedup_stays_below_its_limit(x0 in 1.0..1e4f64, log_lambda in -7.0..-1.0f64, n in 1u32..4096) {
        let dist = RuntimeDistribution::shifted_exponential(x0, 10f64.powf(log_lambda)).unwrap();
        let limit = dist.speedup_limit().unwrap();
        let g = dist.speedup(n).unwrap();
        prop_assert!(g < limit);
        prop_assert!(g <= f64::from(n) * (1.0 + 1e-12));
    }

    #[test]
    fn cdf_is_monotone_and_zero_below_shift(dist in any_distribution(), a in 0.0..1e5f64, b in 0.0..1e5f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(dist.cdf(lo) <= dist.cdf(hi));
        prop_assert_eq!(dist.cdf(dist.x0()), 0.0);
        prop_assert!((dist.cdf(hi) + dist.survival(hi) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn samples_pass_ks_against_their_own_distribution() {
    let dists = [
        RuntimeDistribution::shifted_exponential(1217.0, 9.15956e-6).unwrap(),
        RuntimeDistribution::shifted_lognormal(6210.0, 12.0275, 1.3398).unwrap(),
        RuntimeDistribution::shifted_gaussian(0.0, 1.0e5, 4.0e4).unwrap(),
    ];
    for dist in dists {
        let mut accepted = 0;
        for seed in 0..100 {
            let draws = dist.sample(&mut ChaCha8Rng::seed_from_u64(seed), 100_000).unwrap();
            let sample = EmpiricalSample::new(draws, Unit::Seconds, "draws").unwrap();
            if ks_test_with_threshold(&sample, &dist, 0.01).unwrap().accepted() {
                accepted += 1;
            }
        }
        assert!(accepted >= 99, "{dist:?}: {accepted}/100");
    }
}

#[test]
fn batch_minima_match_min_expectation() {
    let dists = [
        RuntimeDistribution::shifted_lognormal(6210.0, 12.0275, 1.3398).unwrap(),
        RuntimeDistribution::shifted_lognormal(0.0, 5.0, 1.0).unwrap(),
        RuntimeDistribution::shifted_gaussian(0.0, 1.0e5, 4.0e4).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for dist in dists {
        for n in [2u32, 4, 8, 16] {
            let batches = 100_000;
            let draws = dist.sample(&mut rng, batches * n as usize).unwrap();
            let mean_min = draws.chunks(n as usize).map(|c| c.iter().copied().fold(f64::INFINITY, f64::min)).sum::<f64>()
                / batches as f64;
            let exact = dist.min_expectation(n).unwrap();
            assert!((mean_min - exact).abs() <= 0.02 * exact, "{dist:?} n={n}: {mean_min} vs {exact}");
        }
    }
}
