use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::series::Marginal;

/// Asymptotic Kolmogorov survival function with the Stephens small-sample
/// correction: P(D > d) for n samples.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200 {
        let term = (-2.0 * (j as f64 * lambda).powi(2)).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov statistic against a continuous CDF.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Pearson χ² of observed counts against expected probabilities.
pub fn chi_square(observed: &[u64], probabilities: &[f64]) -> (f64, f64) {
    let total: u64 = observed.iter().sum();
    let stat: f64 = observed
        .iter()
        .zip(probabilities)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dof = (observed.len() - 1) as f64;
    let p = ChiSquared::new(dof).expect("positive dof").sf(stat);
    (stat, p)
}

/// Goodness of fit of one coordinate against its analytic marginal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisTest {
    pub label: String,
    pub samples: usize,
    pub chi_square: f64,
    pub dof: usize,
    pub chi_square_p: f64,
    pub ks_statistic: f64,
    pub ks_p: f64,
    pub observed: Vec<u64>,
    pub expected: Vec<f64>,
}

impl AxisTest {
    pub fn run(label: String, mut values: Vec<f64>, marginal: &Marginal, bins: usize) -> AxisTest {
        let side = marginal.side();
        let mut observed = vec![0u64; bins];
        for &v in &values {
            let b = (((v + 0.5 * side) / side) * bins as f64).floor() as isize;
            observed[b.clamp(0, bins as isize - 1) as usize] += 1;
        }
        let probs = marginal.bin_probabilities(bins);
        let (chi, chi_p) = chi_square(&observed, &probs);
        let n = values.len();
        let d = ks_statistic(&mut values, |x| marginal.cdf(x));
        AxisTest {
            label,
            samples: n,
            chi_square: chi,
            dof: bins - 1,
            chi_square_p: chi_p,
            ks_statistic: d,
            ks_p: ks_p_value(d, n),
            expected: probs.iter().map(|p| p * n as f64).collect(),
            observed,
        }
    }

    pub fn min_p(&self) -> f64 {
        self.chi_square_p.min(self.ks_p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ks_p_value_reference_points() {
        // λ = 1.36 is the classical 5% point, 1.63 the 1% point
        assert!((ks_p_value(1.36 / 1e3, 1_000_000) - 0.05).abs() < 2e-3);
        assert!((ks_p_value(1.63 / 1e3, 1_000_000) - 0.01).abs() < 1e-3);
        assert_eq!(ks_p_value(0.0, 100), 1.0);
    }

    #[test]
    fn uniform_samples_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut xs: Vec<f64> = (0..5000).map(|_| rng.random::<f64>()).collect();
        let d = ks_statistic(&mut xs, |x| x);
        assert!(ks_p_value(d, 5000) > 0.01);
        let mut counts = vec![0u64; 10];
        for x in &xs {
            counts[(x * 10.0) as usize] += 1;
        }
        let (_, p) = chi_square(&counts, &[0.1; 10]);
        assert!(p > 0.01);
    }

    #[test]
    fn skewed_samples_fail() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut xs: Vec<f64> = (0..5000).map(|_| rng.random::<f64>().powf(1.2)).collect();
        let d = ks_statistic(&mut xs, |x| x);
        assert!(ks_p_value(d, 5000) < 1e-6);
    }
}
