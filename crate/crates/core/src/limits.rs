//! Exact moment formulas and samplers for the limiting objects attached to
//! the rescaled degree sequence: Beta moments, Mittag-Leffler laws and Markov
//! chains, generalized Gamma processes, their intertwined products, and the
//! generic limit chain driven by a Beta coupling.
//!
//! All Gamma-ratio formulas go through log-Gamma differences.

use rand::Rng;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::rng::{beta_draw, gamma_draw};
use crate::sequences::{z_hat_tail_average, BetaCoupling, FitnessSequence, FitnessOrigin};

/// q-th moment of a Beta(a, b) variable: prod_{k<q} (a+k)/(a+b+k).
/// Beta(a, 0) is the point mass at 1, so the moment is 1.
pub fn beta_moment(a: f64, b: f64, q: u32) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::parameter("beta_moment: a must be positive"));
    }
    if !(b >= 0.0) {
        return Err(Error::parameter("beta_moment: b must be non-negative"));
    }
    if b == 0.0 || q == 0 {
        return Ok(1.0);
    }
    // exact product form; q is small in all callers
    let mut acc = 1.0;
    for k in 0..q {
        let k = k as f64;
        acc *= (a + k) / (a + b + k);
    }
    Ok(acc)
}

/// Mixed moment E[beta^p (1-beta)^q] for beta ~ Beta(a, b), via
/// B(a+p, b+q) / B(a, b) in log-Gamma form. For b = 0 the law is the point
/// mass at 1, so the value is 1 if q = 0 and 0 otherwise.
pub fn beta_mixed_moment(a: f64, b: f64, p: u32, q: u32) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::parameter("beta_mixed_moment: a must be positive"));
    }
    if !(b >= 0.0) {
        return Err(Error::parameter(
            "beta_mixed_moment: b must be non-negative",
        ));
    }
    if b == 0.0 {
        return Ok(if q == 0 { 1.0 } else { 0.0 });
    }
    if p == 0 && q == 0 {
        return Ok(1.0);
    }
    let (p, q) = (p as f64, q as f64);
    let log = ln_gamma(a + p) + ln_gamma(b + q) + ln_gamma(a + b)
        - ln_gamma(a)
        - ln_gamma(b)
        - ln_gamma(a + b + p + q);
    Ok(log.exp())
}

/// p-th moment of the generalized Mittag-Leffler law ML(alpha, theta):
/// Gamma(theta+1) Gamma(theta/alpha+p+1) / (Gamma(theta/alpha+1) Gamma(theta+p*alpha+1)).
pub fn ml_moment(alpha: f64, theta: f64, p: u32) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::parameter("ml_moment: alpha must lie in (0, 1)"));
    }
    if !(theta > -alpha) {
        return Err(Error::parameter("ml_moment: theta must exceed -alpha"));
    }
    if p == 0 {
        return Ok(1.0);
    }
    let p = p as f64;
    let log = ln_gamma(theta + 1.0) + ln_gamma(theta / alpha + p + 1.0)
        - ln_gamma(theta / alpha + 1.0)
        - ln_gamma(theta + p * alpha + 1.0);
    Ok(log.exp())
}

/// Description of the limiting chain of cumulative rescaled degrees for a
/// fitness sequence with mean fitness c.
#[derive(Debug, Clone)]
pub enum LimitChainSpec {
    /// Fitness (a, b, b, ...): the chain is the Mittag-Leffler Markov chain
    /// MLMC(1/(b+1), a/(b+1)).
    Constant { a: f64, b: f64 },
    /// Fitness (a, b_1..b_l) repeating with integer pattern: the chain is an
    /// intertwined product of generalized Gamma processes up to the scale
    /// factor returned by [`LimitChainSpec::ipggp_to_chain_scale`].
    Periodic { a: f64, pattern: Vec<u32> },
    /// Anything else satisfying A_n ~ c n; moments are estimated from
    /// extrapolated partial products.
    Generic { fitness: FitnessSequence, c: f64 },
}

impl LimitChainSpec {
    pub fn for_fitness(fitness: &FitnessSequence, c: f64) -> Self {
        match fitness.origin() {
            FitnessOrigin::Constant { a, b } if *b > 0.0 => {
                LimitChainSpec::Constant { a: *a, b: *b }
            }
            FitnessOrigin::Periodic { a, pattern }
                if pattern.iter().all(|x| x.fract() == 0.0 && *x >= 0.0) =>
            {
                LimitChainSpec::Periodic {
                    a: *a,
                    pattern: pattern.iter().map(|x| *x as u32).collect(),
                }
            }
            _ => LimitChainSpec::Generic {
                fitness: fitness.clone(),
                c,
            },
        }
    }

    pub fn mean_fitness(&self) -> f64 {
        match self {
            LimitChainSpec::Constant { b, .. } => *b,
            LimitChainSpec::Periodic { pattern, .. } => {
                pattern.iter().map(|&x| x as f64).sum::<f64>() / pattern.len() as f64
            }
            LimitChainSpec::Generic { c, .. } => *c,
        }
    }

    /// MLMC parameters (alpha, theta) when the constant closed form applies.
    pub fn mlmc_params(&self) -> Option<(f64, f64)> {
        match self {
            LimitChainSpec::Constant { a, b } => Some((1.0 / (b + 1.0), a / (b + 1.0))),
            _ => None,
        }
    }

    /// Multiply an IPGGP sample by this factor to recover the chain:
    /// M_k = (S + l) l^{-l/(S+l)} G_k.
    pub fn ipggp_to_chain_scale(&self) -> Option<f64> {
        match self {
            LimitChainSpec::Periodic { pattern, .. } => {
                let l = pattern.len() as f64;
                let s: f64 = pattern.iter().map(|&x| x as f64).sum();
                Some((s + l) * l.powf(-l / (s + l)))
            }
            _ => None,
        }
    }

    /// E[beta_k^p] for the Beta coupling this fitness induces.
    fn beta_pow_moment(&self, k: usize, p: u32) -> Result<f64> {
        match self {
            LimitChainSpec::Constant { a, b } => {
                let kf = k as f64;
                beta_moment(1.0 + a + (b + 1.0) * (kf - 1.0), *b, p)
            }
            LimitChainSpec::Periodic { a, pattern } => {
                let l = pattern.len();
                let j = (k - 1) / l;
                let r = (k - 1) % l; // beta_{j*l + r + 1}
                let b_prefix: u32 = pattern[..r].iter().sum();
                let s: u32 = pattern.iter().sum();
                let shape_a =
                    a + b_prefix as f64 + (r + 1) as f64 + j as f64 * (l as u32 + s) as f64;
                beta_moment(shape_a, pattern[r] as f64, p)
            }
            LimitChainSpec::Generic { fitness, .. } => {
                let shape_a = fitness.cum_a(k) + k as f64;
                beta_moment(shape_a, fitness.a(k + 1), p)
            }
        }
    }

    /// The constant C_p in prod_{i<n} E[beta_i^p] = C_p n^{-p + p/(c+1)} (1 + o(1)).
    fn c_p(&self, p: u32, truncation: usize) -> Result<f64> {
        let pf = p as f64;
        match self {
            LimitChainSpec::Constant { a, b } => {
                let log = -pf * (b + 1.0).ln() + ln_gamma(1.0 + a + pf)
                    + ln_gamma(1.0 + a / (b + 1.0))
                    - ln_gamma(1.0 + a)
                    - ln_gamma(1.0 + (a + pf) / (b + 1.0));
                Ok(log.exp())
            }
            LimitChainSpec::Periodic { a, pattern } => {
                let l = pattern.len() as f64;
                let s: f64 = pattern.iter().map(|&x| x as f64).sum();
                let mut log = pf * s / (l + s) * l.ln();
                for q in active_indices(pattern) {
                    let x = (a + q as f64) / (l + s);
                    log += ln_gamma(x + pf / (l + s)) - ln_gamma(x);
                }
                Ok(log.exp())
            }
            LimitChainSpec::Generic { c, .. } => {
                // C_p ~ n^{p - p/(c+1)} prod_{i<n} E[beta_i^p]; extrapolate the
                // partial products at N/4, N/2, N assuming a power-law residual
                let big_n = truncation.max(16);
                let ns = [big_n / 4, big_n / 2, big_n];
                let mut vals = [0.0f64; 3];
                for (slot, &n) in ns.iter().enumerate() {
                    let mut log_prod = 0.0;
                    for i in 1..n {
                        log_prod += self.beta_pow_moment(i, p)?.ln();
                    }
                    let rate = pf - pf / (c + 1.0);
                    vals[slot] = (log_prod + rate * (n as f64).ln()).exp();
                }
                let d1 = vals[1] - vals[0];
                let d2 = vals[2] - vals[1];
                let movement = d2.abs() / vals[2].abs().max(1e-300);
                if d2.abs() >= d1.abs() && movement > 0.01 {
                    return Err(Error::NonConvergent(format!(
                        "partial products are not contracting (still moving by {:.2}% \
                         per doubling); the sequence may not have a stable mean fitness",
                        movement * 100.0
                    )));
                }
                let extrapolated = richardson(vals[0], vals[1], vals[2]);
                let spread = (extrapolated - vals[2]).abs() / extrapolated.abs().max(1e-300);
                if spread > 0.01 {
                    return Err(Error::NonConvergent(format!(
                        "C_p estimate moved by {:.3}% between N/2 and the extrapolation; \
                         increase the truncation",
                        spread * 100.0
                    )));
                }
                Ok(extrapolated)
            }
        }
    }
}

/// Indices q in {1..S+l-1} minus the period boundaries {B_r + r}: the active
/// component labels of the intertwined product.
fn active_indices(pattern: &[u32]) -> Vec<u32> {
    let l = pattern.len() as u32;
    let s: u32 = pattern.iter().sum();
    let mut boundaries = std::collections::HashSet::new();
    let mut b = 0u32;
    for r in 1..l {
        b += pattern[(r - 1) as usize];
        boundaries.insert(b + r);
    }
    (1..s + l).filter(|q| !boundaries.contains(q)).collect()
}

/// Geometric extrapolation of f(N/4), f(N/2), f(N) to the limit, assuming a
/// power-law residual f(n) = L + k n^{-e}. Falls back to f(N) when the
/// increments do not contract.
fn richardson(f1: f64, f2: f64, f3: f64) -> f64 {
    let d1 = f2 - f1;
    let d2 = f3 - f2;
    if d2.abs() >= d1.abs() || d2 == 0.0 {
        return f3;
    }
    let ratio = d2 / d1; // = 2^{-e}
    f3 + d2 * ratio / (1.0 - ratio)
}

/// p-th moment of the chain value M_k: (c+1)^p C_p / prod_{i<k} E[beta_i^p].
///
/// Constant and integer-periodic fitnesses use the closed-form C_p; anything
/// else estimates it from partial products up to `truncation` and errors out
/// when the extrapolation has not settled to 1%.
pub fn limit_chain_moment(
    spec: &LimitChainSpec,
    k: usize,
    p: u32,
    truncation: usize,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::parameter("k must be at least 1"));
    }
    if p == 0 {
        return Ok(1.0);
    }
    let c = spec.mean_fitness();
    if !(c > 0.0) {
        return Err(Error::parameter("mean fitness must be positive"));
    }
    let c_p = spec.c_p(p, truncation)?;
    let mut denom = 1.0;
    for i in 1..k {
        denom *= spec.beta_pow_moment(i, p)?;
    }
    Ok((c + 1.0).powi(p as i32) * c_p / denom)
}

/// A sampled chain together with the Beta draws it was built from.
#[derive(Debug, Clone)]
pub struct LimitChainSample {
    /// M_1..M_k.
    pub chain: Vec<f64>,
    /// beta_1..beta_{N-1}; the chain satisfies M_k = beta_k M_{k+1} exactly.
    pub betas: Vec<f64>,
    /// Set when the truncation was too small for the tail average to settle.
    pub truncation_warning: bool,
}

/// Sample the limit chain for an arbitrary fitness with mean c by drawing the
/// Beta coupling up to `truncation` and normalizing with the tail-averaged
/// Z estimate. The truncation error decays like a small power of N, so
/// N >= 1e4 is recommended.
pub fn sample_limit_chain(
    fitness: &FitnessSequence,
    c: f64,
    k_max: usize,
    truncation: usize,
    rng: &mut impl Rng,
) -> Result<LimitChainSample> {
    if !(c > 0.0) {
        return Err(Error::parameter("c must be positive"));
    }
    if k_max == 0 || truncation <= k_max {
        return Err(Error::parameter("need truncation > k_max >= 1"));
    }
    let coupling = BetaCoupling::sample(fitness, truncation, rng)?;
    let weights = coupling.weights()?;
    let z_hat = z_hat_tail_average(&weights, c, truncation);
    // build the chain downward from its top value so that the backward
    // identity M_k = beta_k M_{k+1} holds exactly, not just up to rounding
    let m_top = ((c + 1.0) / z_hat) * weights.log_cum_w(k_max).exp();
    let mut chain = vec![0.0; k_max];
    chain[k_max - 1] = m_top;
    for k in (1..k_max).rev() {
        chain[k - 1] = coupling.beta(k) * chain[k];
    }
    Ok(LimitChainSample {
        chain,
        betas: coupling.betas().to_vec(),
        truncation_warning: truncation < 10_000,
    })
}

/// Sample a Mittag-Leffler Markov chain MLMC(alpha, theta) through its
/// fitness representation (a, b, b, ...) with b = 1/alpha - 1, a = theta/alpha,
/// normalized by the closed-form C_1 instead of a tail average. The
/// truncation error is O(N^{-1/2}).
pub fn sample_mlmc(
    alpha: f64,
    theta: f64,
    k_max: usize,
    truncation: usize,
    rng: &mut impl Rng,
) -> Result<LimitChainSample> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::parameter("alpha must lie in (0, 1)"));
    }
    if !(theta > -alpha) {
        return Err(Error::parameter("theta must exceed -alpha"));
    }
    if k_max == 0 || truncation <= k_max {
        return Err(Error::parameter("need truncation > k_max >= 1"));
    }
    let b = 1.0 / alpha - 1.0;
    let a = theta / alpha;
    let spec = LimitChainSpec::Constant { a, b };
    let c1 = spec.c_p(1, truncation)?;

    // X_N = prod beta_i / E[beta_i]; M_1 = (b+1) C_1 X_N
    let mut log_x = 0.0;
    let mut betas = Vec::with_capacity(truncation - 1);
    for k in 1..truncation {
        let shape_a = 1.0 + a + (b + 1.0) * (k as f64 - 1.0);
        let beta = beta_draw(shape_a, b, rng);
        log_x += beta.ln() - (shape_a / (shape_a + b)).ln();
        betas.push(beta);
    }
    let log_m1 = ((b + 1.0) * c1).ln() + log_x;
    let log_prefix: f64 = betas[..k_max - 1].iter().map(|b| b.ln()).sum();
    let mut chain = vec![0.0; k_max];
    chain[k_max - 1] = (log_m1 - log_prefix).exp();
    for k in (1..k_max).rev() {
        chain[k - 1] = betas[k - 1] * chain[k];
    }
    Ok(LimitChainSample {
        chain,
        betas,
        truncation_warning: truncation < 10_000,
    })
}

/// Parameters (z, r) of a generalized Gamma process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgpSpec {
    pub z: f64,
    pub r: f64,
}

/// Sample G_1..G_k of a generalized Gamma process: G_k = (Z_1 + ... + Z_k)^{1/r}
/// with Z_1 ~ Gamma(z/r) and Z_i ~ Exp(1) for i >= 2, so G_k^r ~ Gamma(k-1+z/r).
pub fn sample_ggp(spec: GgpSpec, k_max: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    if !(spec.z > 0.0 && spec.r > 0.0) {
        return Err(Error::parameter("GGP parameters must be positive"));
    }
    if k_max == 0 {
        return Err(Error::parameter("k_max must be at least 1"));
    }
    let mut out = Vec::with_capacity(k_max);
    let mut acc = gamma_draw(spec.z / spec.r, rng);
    out.push(acc.powf(1.0 / spec.r));
    for _ in 1..k_max {
        acc += gamma_draw(1.0, rng);
        out.push(acc.powf(1.0 / spec.r));
    }
    Ok(out)
}

/// Sample G_1..G_k of the intertwined product of generalized Gamma processes
/// with parameters (a, b_1..b_l): independent component processes
/// GGP(a+q, l+S) for each active index q, multiplied with a split that
/// advances one component per chain step.
pub fn sample_ipggp(
    a: f64,
    pattern: &[u32],
    k_max: usize,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    if !(a > -1.0) {
        return Err(Error::parameter("a must be greater than -1"));
    }
    if pattern.is_empty() || pattern.iter().all(|&b| b == 0) {
        return Err(Error::parameter("pattern must have a non-zero entry"));
    }
    if k_max == 0 {
        return Err(Error::parameter("k_max must be at least 1"));
    }
    let l = pattern.len();
    let s: u32 = pattern.iter().sum();
    let active = active_indices(pattern);
    assert!(!active.is_empty());
    let rounds = k_max / l + 2;
    let mut components = Vec::with_capacity(active.len());
    for &q in &active {
        components.push(sample_ggp(
            GgpSpec {
                z: a + q as f64,
                r: (l as u32 + s) as f64,
            },
            rounds + 1,
            rng,
        )?);
    }

    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let n = (k - 1) / l + 1;
        let r = (k - 1) % l + 1;
        let b_prefix: u32 = pattern[..r - 1].iter().sum();
        let split = (r as u32 - 1) + b_prefix; // components at or below this index are ahead
        let mut val = 1.0;
        for (ci, &q) in active.iter().enumerate() {
            let idx = if q <= split { n + 1 } else { n };
            val *= components[ci][idx - 1];
        }
        out.push(val);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::master_rng;

    const SQRT_PI: f64 = 1.7724538509055159;

    #[test]
    fn beta_moment_examples() {
        assert_eq!(beta_moment(1.0, 1.0, 1).unwrap(), 0.5);
        assert!((beta_moment(2.0, 3.0, 2).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(beta_moment(4.5, 0.0, 7).unwrap(), 1.0);
        assert!(beta_moment(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn beta_mixed_moment_examples() {
        assert!((beta_mixed_moment(1.0, 1.0, 1, 1).unwrap() - 1.0 / 6.0).abs() < 1e-14);
        assert!((beta_mixed_moment(2.0, 1.0, 1, 0).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        assert_eq!(beta_mixed_moment(3.0, 0.0, 5, 0).unwrap(), 1.0);
        assert_eq!(beta_mixed_moment(3.0, 0.0, 5, 2).unwrap(), 0.0);
    }

    #[test]
    fn beta_mixed_moment_reduces_to_plain_moment() {
        for &(a, b) in &[(1.0, 1.0), (2.5, 0.5), (7.0, 3.0), (0.5, 0.0)] {
            for p in 0..5u32 {
                let lhs = beta_mixed_moment(a, b, p, 0).unwrap();
                let rhs = beta_moment(a, b, p).unwrap();
                assert!((lhs - rhs).abs() < 1e-12 * rhs.max(1.0), "a={a} b={b} p={p}");
            }
        }
    }

    #[test]
    fn ml_moment_examples() {
        assert_eq!(ml_moment(0.5, 0.5, 0).unwrap(), 1.0);
        assert!((ml_moment(0.5, 0.5, 1).unwrap() - SQRT_PI).abs() < 1e-12);
        assert!((ml_moment(0.5, 0.5, 2).unwrap() - 4.0).abs() < 1e-12);
        assert!(ml_moment(1.5, 0.5, 1).is_err());
        assert!(ml_moment(0.5, -0.6, 1).is_err());
    }

    #[test]
    fn ml_moment_ratio_matches_gamma_ratio() {
        // moment(p)/moment(p-1) = Gamma-ratio identity, direct evaluation
        let (alpha, theta) = (0.37, 0.8);
        for p in 1..6u32 {
            let ratio = ml_moment(alpha, theta, p).unwrap() / ml_moment(alpha, theta, p - 1).unwrap();
            let pf = p as f64;
            let direct = (ln_gamma(theta / alpha + pf + 1.0)
                - ln_gamma(theta / alpha + pf)
                + ln_gamma(theta + (pf - 1.0) * alpha + 1.0)
                - ln_gamma(theta + pf * alpha + 1.0))
            .exp();
            assert!((ratio - direct).abs() < 1e-12 * direct, "p={p}");
        }
    }

    #[test]
    fn chain_moment_constant_fitness_matches_ml() {
        let spec = LimitChainSpec::Constant { a: 1.0, b: 1.0 };
        let m1 = limit_chain_moment(&spec, 1, 1, 0).unwrap();
        assert!((m1 - SQRT_PI).abs() < 1e-12);
        // marginal law M_k ~ ML(1/(b+1), a/(b+1) + k - 1)
        for k in 1..6usize {
            for p in 1..4u32 {
                let lhs = limit_chain_moment(&spec, k, p, 0).unwrap();
                let rhs = ml_moment(0.5, 0.5 + (k - 1) as f64, p).unwrap();
                assert!((lhs - rhs).abs() < 1e-12 * rhs, "k={k} p={p}");
            }
        }
        assert_eq!(limit_chain_moment(&spec, 3, 0, 0).unwrap(), 1.0);
    }

    #[test]
    fn chain_moment_periodic_matches_direct_product() {
        // sparse pattern (0, 1): C_p = Gamma(1 + p/3) 2^{p/3} for a = 1,
        // computed here independently by telescoping the Beta moments
        let spec = LimitChainSpec::Periodic {
            a: 1.0,
            pattern: vec![0, 1],
        };
        for p in 1..5u32 {
            let expect = (ln_gamma(1.0 + p as f64 / 3.0)).exp() * 2f64.powf(p as f64 / 3.0);
            let got = spec.c_p(p, 0).unwrap();
            assert!(
                (got - expect).abs() < 1e-12 * expect,
                "p={p}: {got} vs {expect}"
            );
        }
        let m1 = limit_chain_moment(&spec, 1, 1, 0).unwrap();
        let expect = 1.5 * 2f64.powf(1.0 / 3.0) * (ln_gamma(4.0 / 3.0)).exp();
        assert!((m1 - expect).abs() < 1e-12);
    }

    #[test]
    fn chain_moment_generic_agrees_with_closed_form() {
        let fitness = FitnessSequence::constant(1.0, 1.0, 300_000).unwrap();
        let spec = LimitChainSpec::Generic { fitness, c: 1.0 };
        let closed = LimitChainSpec::Constant { a: 1.0, b: 1.0 };
        for p in 1..3u32 {
            let got = limit_chain_moment(&spec, 1, p, 200_000).unwrap();
            let expect = limit_chain_moment(&closed, 1, p, 0).unwrap();
            assert!(
                (got - expect).abs() < 5e-3 * expect,
                "p={p}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn chain_moment_generic_recovers_closed_form_even_when_truncated() {
        // Richardson extrapolation absorbs the 1/n residual of a constant
        // fitness even at a tiny truncation
        let fitness = FitnessSequence::constant(1.0, 1.0, 200).unwrap();
        let spec = LimitChainSpec::Generic { fitness, c: 1.0 };
        let got = limit_chain_moment(&spec, 1, 3, 64).unwrap();
        let expect =
            limit_chain_moment(&LimitChainSpec::Constant { a: 1.0, b: 1.0 }, 1, 3, 0).unwrap();
        assert!((got - expect).abs() < 1e-3 * expect, "{got} vs {expect}");
    }

    #[test]
    fn chain_moment_generic_flags_non_convergence() {
        // fitness whose running mean keeps wandering: alternating blocks of
        // doubling length violate the stable-mean assumption
        let mut a = Vec::with_capacity(4096);
        a.push(1.0);
        let mut block = 1usize;
        let mut low = true;
        while a.len() < 4096 {
            let v = if low { 0.25 } else { 3.75 };
            for _ in 0..block {
                a.push(v);
            }
            block *= 2;
            low = !low;
        }
        a.truncate(4096);
        let fitness = FitnessSequence::from_values(a).unwrap();
        let spec = LimitChainSpec::Generic { fitness, c: 2.0 };
        let err = limit_chain_moment(&spec, 1, 2, 4096);
        assert!(matches!(err, Err(Error::NonConvergent(_))), "{err:?}");
    }

    #[test]
    fn ggp_partial_sums() {
        let mut rng = master_rng(30);
        let g = sample_ggp(GgpSpec { z: 1.0, r: 1.0 }, 5, &mut rng).unwrap();
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        // r = 1, z = 1: plain Gamma(k) partial sums
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            acc += sample_ggp(GgpSpec { z: 1.0, r: 1.0 }, 1, &mut rng).unwrap()[0];
        }
        let mean = acc / n as f64;
        assert!((mean - 1.0).abs() < 4.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn ggp_powered_mean() {
        // E[G_1^r] = z/r
        let mut rng = master_rng(31);
        let spec = GgpSpec { z: 3.0, r: 2.0 };
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            acc += sample_ggp(spec, 1, &mut rng).unwrap()[0].powf(spec.r);
        }
        let mean = acc / n as f64;
        let sd = (spec.z / spec.r / n as f64).sqrt();
        assert!((mean - spec.z / spec.r).abs() < 4.0 * sd, "mean {mean}");
    }

    #[test]
    fn ipggp_sparse_pattern_is_single_ggp() {
        // pattern (0, 1): the chain is constant on pairs and equals one
        // GGP(a+2, 3) component
        let mut rng = master_rng(32);
        let g = sample_ipggp(1.0, &[0, 1], 6, &mut rng).unwrap();
        assert_eq!(g[0], g[1]);
        assert_eq!(g[2], g[3]);
        assert_eq!(g[4], g[5]);
        assert!(g[0] < g[2] && g[2] < g[4]);
    }

    #[test]
    fn ipggp_single_period_is_product_of_ggps() {
        // l = 1, pattern (b): product of b independent GGP(a+q, 1+b)
        let mut rng = master_rng(33);
        let n = 200_000;
        let (a, b) = (0.5, 2u32);
        let mut acc = 0.0;
        for _ in 0..n {
            acc += sample_ipggp(a, &[b], 1, &mut rng).unwrap()[0];
        }
        let mean = acc / n as f64;
        // E[G_1] = prod_q Gamma((a+q)/(1+b) + 1/(1+b)) / Gamma((a+q)/(1+b))
        let mut expect = 1.0;
        for q in 1..=b {
            let x = (a + q as f64) / (1.0 + b as f64);
            expect *= (ln_gamma(x + 1.0 / (1.0 + b as f64)) - ln_gamma(x)).exp();
        }
        assert!((mean - expect).abs() < 0.01 * expect, "{mean} vs {expect}");
    }

    #[test]
    fn ipggp_moment_matches_chain_closed_form() {
        let spec = LimitChainSpec::Periodic {
            a: 1.0,
            pattern: vec![0, 1],
        };
        let scale = spec.ipggp_to_chain_scale().unwrap();
        assert!((scale - 3.0 * 2f64.powf(-2.0 / 3.0)).abs() < 1e-14);
        let mut rng = master_rng(34);
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            acc += scale * sample_ipggp(1.0, &[0, 1], 1, &mut rng).unwrap()[0];
        }
        let mean = acc / n as f64;
        let expect = limit_chain_moment(&spec, 1, 1, 0).unwrap();
        assert!((mean - expect).abs() < 0.02 * expect, "{mean} vs {expect}");
    }

    #[test]
    fn limit_chain_sample_backward_identity_is_exact() {
        let fitness = FitnessSequence::constant(1.0, 1.0, 2_000).unwrap();
        let mut rng = master_rng(35);
        let s = sample_limit_chain(&fitness, 1.0, 10, 2_000, &mut rng).unwrap();
        assert!(s.truncation_warning);
        for k in 1..10usize {
            // bitwise: the chain is constructed by these very products
            assert_eq!(s.chain[k - 1], s.betas[k - 1] * s.chain[k]);
        }
    }

    #[test]
    fn limit_chain_sample_mean_matches_ml() {
        let fitness = FitnessSequence::constant(1.0, 1.0, 20_000).unwrap();
        let mut rng = master_rng(37);
        let reps = 2_000;
        let mut m1 = 0.0;
        for _ in 0..reps {
            m1 += sample_limit_chain(&fitness, 1.0, 1, 20_000, &mut rng)
                .unwrap()
                .chain[0];
        }
        m1 /= reps as f64;
        assert!((m1 - SQRT_PI).abs() < 0.03 * SQRT_PI, "m1 {m1}");
    }

    #[test]
    fn mlmc_sample_moments_match() {
        let mut rng = master_rng(36);
        let (alpha, theta) = (0.5, 0.5);
        let reps = 4_000;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for _ in 0..reps {
            let s = sample_mlmc(alpha, theta, 1, 20_000, &mut rng).unwrap();
            m1 += s.chain[0];
            m2 += s.chain[0] * s.chain[0];
        }
        m1 /= reps as f64;
        m2 /= reps as f64;
        assert!((m1 - SQRT_PI).abs() < 0.03 * SQRT_PI, "m1 {m1}");
        assert!((m2 - 4.0).abs() < 0.05 * 4.0, "m2 {m2}");
    }
}
