//! Summary statistics used by the verification experiments.

use alloc::vec::Vec;

use crate::math::{exp, sqrt};

/// Sample mean, unbiased variance and the derived standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Summary {
        let count = xs.len();
        if count == 0 {
            return Summary {
                count,
                mean: f64::NAN,
                variance: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / count as f64;
        let variance = if count > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        Summary {
            count,
            mean,
            variance,
        }
    }

    pub fn std_dev(&self) -> f64 {
        sqrt(self.variance)
    }

    pub fn std_error(&self) -> f64 {
        sqrt(self.variance / self.count as f64)
    }

    /// Large-sample standard error of the sample variance, `s^2 sqrt(2/(N-1))`.
    /// Exact under normality.
    pub fn variance_std_error(&self) -> f64 {
        self.variance * sqrt(2.0 / (self.count as f64 - 1.0))
    }
}

/// Jarque–Bera statistic and its asymptotic chi-square(2) p-value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JarqueBera {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn jarque_bera(xs: &[f64]) -> JarqueBera {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let skew = m3 / (m2 * sqrt(m2));
    let kurt = m4 / (m2 * m2);
    let statistic = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
    JarqueBera {
        statistic,
        // survival function of chi-square with two degrees of freedom
        p_value: exp(-0.5 * statistic),
    }
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `xs` and `cdf`.
pub fn ks_distance(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted: Vec<f64> = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let above = (i as f64 + 1.0) / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_small_set() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!(Summary::of(&[]).mean.is_nan());
    }

    #[test]
    fn slope_of_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 * x - 1.0).collect();
        assert!((slope(&xs, &ys) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_of_perfect_uniform_grid() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let d = ks_distance(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.005).abs() < 1e-12);
    }

    #[test]
    fn jarque_bera_flags_skewed_data() {
        let xs: Vec<f64> = (1..=1000).map(|i| (i as f64 / 100.0).powi(3)).collect();
        assert!(jarque_bera(&xs).p_value < 0.01);
    }
}
