//! Small statistical helpers: seeding, bootstrap intervals, linear fits.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 step, used to derive independent per-task streams from
/// (master seed, task index) without correlation between adjacent indices.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// A reproducible RNG for task `index` under `master` seed.
pub fn task_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(master ^ splitmix64(index)))
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean.
pub fn standard_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Bootstrap replicates of a statistic of resampled means. `reduce` maps the
/// resampled mean of `xs` to the statistic value.
pub fn bootstrap_means(xs: &[f64], replicates: usize, seed: u64) -> Vec<f64> {
    let mut rng = task_rng(seed, 0xb007);
    let n = xs.len();
    (0..replicates)
        .map(|_| {
            let mut sum = 0.0;
            for _ in 0..n {
                sum += xs[rng.gen_range(0..n)];
            }
            sum / n as f64
        })
        .collect()
}

/// 95% percentile interval from a sorted-on-demand replicate set.
pub fn percentile_interval_95(mut replicates: Vec<f64>) -> (f64, f64) {
    replicates.sort_by(f64::total_cmp);
    let n = replicates.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let lo = replicates[((0.025 * n as f64) as usize).min(n - 1)];
    let hi = replicates[((0.975 * n as f64) as usize).min(n - 1)];
    (lo, hi)
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 || n < 2.0 {
        return (0.0, my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Two-sample Kolmogorov-Smirnov statistic of `xs` against the uniform
/// distribution on [0, 1).
pub fn ks_statistic_uniform(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let lo = (x - i as f64 / n).abs();
            let hi = ((i + 1) as f64 / n - x).abs();
            lo.max(hi)
        })
        .fold(0.0f64, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_fit_recovers_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 2.0).collect();
        let (slope, intercept) = linear_fit(&x, &y);
        assert!((slope - 3.0).abs() < 1e-12);
        assert!((intercept + 2.0).abs() < 1e-12);
    }

    #[test]
    fn task_rngs_are_reproducible_and_distinct() {
        let mut a = task_rng(7, 0);
        let mut b = task_rng(7, 0);
        let mut c = task_rng(7, 1);
        let (x, y, z): (f64, f64, f64) = (a.gen(), b.gen(), c.gen());
        assert_eq!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn ks_of_equispaced_points_is_small() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_statistic_uniform(&xs) < 0.002);
    }

    #[test]
    fn bootstrap_interval_brackets_mean() {
        let xs: Vec<f64> = (0..500).map(|i| (i % 7) as f64).collect();
        let reps = bootstrap_means(&xs, 200, 42);
        let (lo, hi) = percentile_interval_95(reps);
        let m = mean(&xs);
        assert!(lo <= m && m <= hi);
    }
}
