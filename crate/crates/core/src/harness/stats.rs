//! Seeded bootstrap statistics for experiment checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn resampled_means(xs: &[f64], iters: u32, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n = xs.len();
    (0..iters)
        .map(|_| {
            let mut acc = 0.0;
            for _ in 0..n {
                acc += xs[rng.random_range(0..n)];
            }
            acc / n as f64
        })
        .collect()
}

/// Bootstrap standard error of the sample mean.
pub fn bootstrap_se(xs: &[f64], iters: u32, seed: u64) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let means = resampled_means(xs, iters, seed);
    let m = mean(&means);
    let var = means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (means.len() - 1) as f64;
    var.sqrt()
}

/// Percentile bootstrap confidence interval for the mean at level
/// `1 - alpha`.
pub fn bootstrap_mean_ci(xs: &[f64], iters: u32, alpha: f64, seed: u64) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mut means = resampled_means(xs, iters, seed);
    means.sort_by(|a, b| a.total_cmp(b));
    let hi_q = 1.0 - alpha / 2.0;
    let lo_i = ((alpha / 2.0) * (means.len() - 1) as f64).round() as usize;
    let hi_i = (hi_q * (means.len() - 1) as f64).round() as usize;
    (means[lo_i], means[hi_i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples_have_zero_spread() {
        let xs = [4.0; 30];
        assert_eq!(bootstrap_se(&xs, 500, 1), 0.0);
        assert_eq!(bootstrap_mean_ci(&xs, 500, 0.05, 1), (4.0, 4.0));
    }

    #[test]
    fn interval_brackets_the_mean_of_a_spread_sample() {
        let xs: Vec<f64> = (0..100).map(|i| (i % 7) as f64).collect();
        let m = mean(&xs);
        let (lo, hi) = bootstrap_mean_ci(&xs, 2000, 0.05, 2);
        assert!(lo < m && m < hi, "{lo} {m} {hi}");
        assert!(hi - lo < 2.0, "implausibly wide: {lo}..{hi}");
    }

    #[test]
    fn se_shrinks_with_sample_size() {
        let small: Vec<f64> = (0..20).map(|i| (i % 5) as f64).collect();
        let large: Vec<f64> = (0..2000).map(|i| (i % 5) as f64).collect();
        let se_small = bootstrap_se(&small, 1000, 3);
        let se_large = bootstrap_se(&large, 1000, 3);
        assert!(se_large < se_small / 3.0, "{se_large} vs {se_small}");
    }

    #[test]
    fn bootstrap_is_seed_stable() {
        let xs: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        assert_eq!(bootstrap_se(&xs, 400, 9), bootstrap_se(&xs, 400, 9));
        assert_ne!(bootstrap_se(&xs, 400, 9), bootstrap_se(&xs, 400, 10));
    }
}
