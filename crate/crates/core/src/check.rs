//! Statistical assertion helpers shared by the test suites and the
//! acceptance runner: z-scores, Kolmogorov-Smirnov and chi-square tests.
//! Every check reports its statistic; nothing passes silently.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Result of a single quantitative check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    /// z-score, p-value, or relative error depending on the check.
    pub statistic: f64,
    pub pass: bool,
}

impl CheckOutcome {
    pub fn describe(&self) -> String {
        format!(
            "{}: observed {:.6}, expected {:.6}, stat {:.4} -> {}",
            self.name,
            self.observed,
            self.expected,
            self.statistic,
            if self.pass { "ok" } else { "FAIL" }
        )
    }
}

/// Sample mean, standard error of the mean, and size.
pub fn mean_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample variance (unbiased).
pub fn variance(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

/// |mean - target| <= z_max standard errors.
pub fn mean_within_se(name: &str, samples: &[f64], target: f64, z_max: f64) -> CheckOutcome {
    let (mean, se) = mean_se(samples);
    let z = (mean - target) / se;
    CheckOutcome {
        name: name.into(),
        observed: mean,
        expected: target,
        statistic: z,
        pass: z.abs() <= z_max,
    }
}

/// |observed - target| <= rel_tol * |target|.
pub fn within_relative(name: &str, observed: f64, target: f64, rel_tol: f64) -> CheckOutcome {
    let rel = (observed - target).abs() / target.abs();
    CheckOutcome {
        name: name.into(),
        observed,
        expected: target,
        statistic: rel,
        pass: rel <= rel_tol,
    }
}

/// Binomial frequency check: |freq - p| <= z_max binomial standard errors.
pub fn frequency_within(
    name: &str,
    hits: u64,
    trials: u64,
    p: f64,
    z_max: f64,
) -> CheckOutcome {
    let freq = hits as f64 / trials as f64;
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    let z = (freq - p) / se;
    CheckOutcome {
        name: name.into(),
        observed: freq,
        expected: p,
        statistic: z,
        pass: z.abs() <= z_max,
    }
}

/// Kolmogorov-Smirnov statistic of samples against a continuous cdf.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("samples must be comparable"));
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Asymptotic Kolmogorov p-value with the Stephens small-sample correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = 2.0 * (-1.0f64).powi(k + 1) * (-2.0 * kf * kf * lambda * lambda).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// One-sample KS test; passes when the p-value exceeds `p_min`.
pub fn ks_test(
    name: &str,
    samples: &mut [f64],
    cdf: impl Fn(f64) -> f64,
    p_min: f64,
) -> CheckOutcome {
    let d = ks_statistic(samples, cdf);
    let p = ks_p_value(d, samples.len());
    CheckOutcome {
        name: name.into(),
        observed: p,
        expected: p_min,
        statistic: d,
        pass: p > p_min,
    }
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

pub fn beta_cdf(a: f64, b: f64, x: f64) -> f64 {
    statrs::distribution::Beta::new(a, b)
        .expect("valid Beta shapes")
        .cdf(x)
}

/// Chi-square goodness-of-fit against given cell probabilities; cells with
/// expected count below 5 are pooled into their neighbour.
pub fn chi_square_test(
    name: &str,
    observed: &[u64],
    probs: &[f64],
    p_min: f64,
) -> CheckOutcome {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let mut cells: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * total as f64;
        match cells.last_mut() {
            Some(last) if last.1 < 5.0 => {
                last.0 += o as f64;
                last.1 += e;
            }
            _ => cells.push((o as f64, e)),
        }
    }
    if let Some(&(o, e)) = cells.last() {
        if e < 5.0 && cells.len() > 1 {
            let (po, pe) = cells[cells.len() - 2];
            cells.pop();
            *cells.last_mut().expect("non-empty") = (po + o, pe + e);
        }
    }
    let stat: f64 = cells
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let dof = cells.len().saturating_sub(1).max(1) as f64;
    let p = 1.0 - ChiSquared::new(dof).expect("dof >= 1").cdf(stat);
    CheckOutcome {
        name: name.into(),
        observed: p,
        expected: p_min,
        statistic: stat,
        pass: p > p_min,
    }
}

/// Two-sample chi-square homogeneity test over shared bins; sparse bins are
/// pooled as in [`chi_square_test`].
pub fn chi_square_two_sample(
    name: &str,
    sample_a: &[u64],
    sample_b: &[u64],
    p_min: f64,
) -> CheckOutcome {
    assert_eq!(sample_a.len(), sample_b.len());
    let total_a: u64 = sample_a.iter().sum();
    let total_b: u64 = sample_b.iter().sum();
    let ratio_ab = (total_b as f64 / total_a as f64).sqrt();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    for (&a, &b) in sample_a.iter().zip(sample_b) {
        match cells.last_mut() {
            Some(last) if last.0 + last.1 < 10.0 => {
                last.0 += a as f64;
                last.1 += b as f64;
            }
            _ => cells.push((a as f64, b as f64)),
        }
    }
    if cells.len() > 1 {
        let &(a, b) = cells.last().expect("non-empty");
        if a + b < 10.0 {
            cells.pop();
            let last = cells.last_mut().expect("non-empty");
            last.0 += a;
            last.1 += b;
        }
    }
    let mut stat = 0.0;
    let mut dof = 0usize;
    for &(a, b) in &cells {
        if a + b > 0.0 {
            let d = a * ratio_ab - b / ratio_ab;
            stat += d * d / (a + b);
            dof += 1;
        }
    }
    let dof = dof.saturating_sub(1).max(1) as f64;
    let p = 1.0 - ChiSquared::new(dof).expect("dof >= 1").cdf(stat);
    CheckOutcome {
        name: name.into(),
        observed: p,
        expected: p_min,
        statistic: stat,
        pass: p > p_min,
    }
}
