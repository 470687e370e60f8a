//! Weight and fitness sequences: deterministic constructions, the random
//! Beta-product weights coupling a preferential-attachment tree to a weighted
//! recursive tree, and power-law diagnostics.
//!
//! Cumulative weights are kept in log-space internally so that products of
//! hundreds of thousands of Beta reciprocals (or weights like 2^n) never
//! overflow; linear-scale values are materialized on demand.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::beta_draw;

/// How a weight sequence was produced.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightOrigin {
    /// W_n = C * n^gamma exactly.
    Power { gamma: f64, c: f64 },
    /// Built from explicit per-index weights.
    Explicit,
    /// W_n = prod beta_k^{-1} for a sampled Beta coupling.
    BetaSampled { seed: Option<u64> },
}

/// A sequence of non-negative vertex weights w_n (w_1 > 0) together with the
/// cumulative sums W_n. The cumulative sequence is the primary data: w_n is
/// defined as W_n - W_{n-1}, so reconstruction round-trips exactly.
#[derive(Debug, Clone)]
pub struct WeightSequence {
    w: Vec<f64>,
    cum: Vec<f64>,
    log_cum: Vec<f64>,
    origin: WeightOrigin,
}

impl WeightSequence {
    fn from_cum(cum: Vec<f64>, log_cum: Vec<f64>, origin: WeightOrigin) -> Result<Self> {
        if cum.is_empty() {
            return Err(Error::parameter("weight sequence must be non-empty"));
        }
        if !(cum[0] > 0.0) {
            return Err(Error::parameter("w_1 must be positive"));
        }
        let mut w = Vec::with_capacity(cum.len());
        w.push(cum[0]);
        for i in 1..cum.len() {
            if cum[i] < cum[i - 1] {
                return Err(Error::parameter(format!(
                    "cumulative weights must be nondecreasing (index {})",
                    i + 1
                )));
            }
            w.push(cum[i] - cum[i - 1]);
        }
        Ok(WeightSequence {
            w,
            cum,
            log_cum,
            origin,
        })
    }

    /// W_n = C * n^gamma, so w_n = C (n^gamma - (n-1)^gamma).
    pub fn power(gamma: f64, c: f64, n_max: usize) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::parameter("gamma must be positive"));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::parameter("C must be positive"));
        }
        if n_max == 0 {
            return Err(Error::parameter("n_max must be at least 1"));
        }
        let mut cum = Vec::with_capacity(n_max);
        let mut log_cum = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            let x = n as f64;
            cum.push(c * x.powf(gamma));
            log_cum.push(c.ln() + gamma * x.ln());
        }
        Self::from_cum(cum, log_cum, WeightOrigin::Power { gamma, c })
    }

    /// Sequence with explicitly given weights. All weights must be
    /// non-negative, finite, and the cumulative sums must not overflow.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::parameter("weights must be finite and non-negative"));
        }
        let mut cum = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for &x in &weights {
            acc += x;
            cum.push(acc);
        }
        if !acc.is_finite() {
            return Err(Error::parameter(
                "cumulative weight overflow; use from_log_weights",
            ));
        }
        let log_cum = cum.iter().map(|x| x.ln()).collect();
        Self::from_cum(cum, log_cum, WeightOrigin::Explicit)
    }

    /// Sequence given by the logarithms of its weights, accumulated entirely
    /// in log-space. Linear-scale W_n saturates to infinity past f64 range.
    pub fn from_log_weights(log_weights: Vec<f64>) -> Result<Self> {
        if log_weights.is_empty() {
            return Err(Error::parameter("weight sequence must be non-empty"));
        }
        let mut log_cum = Vec::with_capacity(log_weights.len());
        let mut acc = log_weights[0];
        log_cum.push(acc);
        for &lw in &log_weights[1..] {
            // log(e^acc + e^lw) without leaving log-space
            let hi = acc.max(lw);
            let lo = acc.min(lw);
            acc = hi + (lo - hi).exp().ln_1p();
            log_cum.push(acc);
        }
        let cum: Vec<f64> = log_cum.iter().map(|x| x.exp()).collect();
        let mut w = Vec::with_capacity(log_cum.len());
        w.push(log_weights[0].exp());
        for i in 1..log_cum.len() {
            w.push(if cum[i].is_finite() {
                cum[i] - cum[i - 1]
            } else {
                log_weights[i].exp()
            });
        }
        Ok(WeightSequence {
            w,
            cum,
            log_cum,
            origin: WeightOrigin::Explicit,
        })
    }

    pub fn len(&self) -> usize {
        self.cum.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn origin(&self) -> &WeightOrigin {
        &self.origin
    }

    /// w_n (1-based). Infinite if the linear scale overflowed.
    pub fn w(&self, n: usize) -> f64 {
        self.w[n - 1]
    }

    /// W_n (1-based). Infinite if the linear scale overflowed.
    pub fn cum_w(&self, n: usize) -> f64 {
        self.cum[n - 1]
    }

    /// ln W_n (1-based), always finite.
    pub fn log_cum_w(&self, n: usize) -> f64 {
        self.log_cum[n - 1]
    }

    /// ln w_n, or -inf for zero weights.
    pub fn log_w(&self, n: usize) -> f64 {
        if n == 1 {
            return self.log_cum[0];
        }
        let lw = self.w[n - 1];
        if lw.is_finite() {
            lw.ln()
        } else {
            // recover from log-space: ln(W_n - W_{n-1})
            let a = self.log_cum[n - 1];
            let b = self.log_cum[n - 2];
            a + (-((b - a).exp())).ln_1p()
        }
    }

    /// w_n / W_n computed without overflow.
    pub fn weight_ratio(&self, n: usize) -> f64 {
        if self.w[n - 1] == 0.0 {
            return 0.0;
        }
        let r = (self.log_w(n) - self.log_cum[n - 1]).exp();
        r.min(1.0)
    }

    /// Write rows `n,w,W` (with that exact header).
    pub fn write_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "n,w,W")?;
        for n in 1..=self.len() {
            writeln!(out, "{},{},{}", n, self.w(n), self.cum_w(n))?;
        }
        Ok(())
    }
}

/// Fitness sequence a_n with a_1 > -1 and a_n >= 0 for n >= 2, together with
/// partial sums A_n (A_0 = 0).
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessSequence {
    a: Vec<f64>,
    cum: Vec<f64>,
    origin: FitnessOrigin,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FitnessOrigin {
    Constant { a: f64, b: f64 },
    Periodic { a: f64, pattern: Vec<f64> },
    Explicit,
}

impl FitnessSequence {
    pub fn from_values(a: Vec<f64>) -> Result<Self> {
        Self::with_origin(a, FitnessOrigin::Explicit)
    }

    fn with_origin(a: Vec<f64>, origin: FitnessOrigin) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::parameter("fitness sequence must be non-empty"));
        }
        if !(a[0] > -1.0) || !a[0].is_finite() {
            return Err(Error::parameter("a_1 must be greater than -1"));
        }
        if a[1..].iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::parameter("a_n must be non-negative for n >= 2"));
        }
        let mut cum = Vec::with_capacity(a.len());
        let mut acc = 0.0;
        for &x in &a {
            acc += x;
            cum.push(acc);
        }
        Ok(FitnessSequence { a, cum, origin })
    }

    /// a_1 = a and a_n = b for n >= 2.
    pub fn constant(a: f64, b: f64, n_max: usize) -> Result<Self> {
        if !(a > -1.0) {
            return Err(Error::parameter("a must be greater than -1"));
        }
        if !(b >= 0.0) {
            return Err(Error::parameter("b must be non-negative"));
        }
        if n_max == 0 {
            return Err(Error::parameter("n_max must be at least 1"));
        }
        let mut v = vec![b; n_max];
        v[0] = a;
        Self::with_origin(v, FitnessOrigin::Constant { a, b })
    }

    /// a_1 = a followed by the pattern repeated: (a, b_1..b_l, b_1..b_l, ...).
    pub fn periodic(a: f64, pattern: &[f64], n_max: usize) -> Result<Self> {
        if !(a > -1.0) {
            return Err(Error::parameter("a must be greater than -1"));
        }
        if pattern.is_empty() {
            return Err(Error::parameter("pattern must be non-empty"));
        }
        if pattern.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::parameter("pattern entries must be non-negative"));
        }
        if pattern.iter().sum::<f64>() <= 0.0 {
            return Err(Error::parameter("pattern must have a non-zero entry"));
        }
        if n_max == 0 {
            return Err(Error::parameter("n_max must be at least 1"));
        }
        let mut v = Vec::with_capacity(n_max);
        v.push(a);
        for i in 1..n_max {
            v.push(pattern[(i - 1) % pattern.len()]);
        }
        Self::with_origin(
            v,
            FitnessOrigin::Periodic {
                a,
                pattern: pattern.to_vec(),
            },
        )
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn origin(&self) -> &FitnessOrigin {
        &self.origin
    }

    /// a_n (1-based).
    pub fn a(&self, n: usize) -> f64 {
        self.a[n - 1]
    }

    /// A_n (1-based), with A_0 = 0.
    pub fn cum_a(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.cum[n - 1]
        }
    }

    /// Same parameters extended to a larger n_max. Only generated origins can
    /// be extended; explicit sequences would need the missing values.
    pub fn extended(&self, n_max: usize) -> Result<Self> {
        if n_max <= self.len() {
            return Ok(self.clone());
        }
        match &self.origin {
            FitnessOrigin::Constant { a, b } => Self::constant(*a, *b, n_max),
            FitnessOrigin::Periodic { a, pattern } => Self::periodic(*a, &pattern.clone(), n_max),
            FitnessOrigin::Explicit => Err(Error::Range(
                "explicit fitness sequence cannot be extended".into(),
            )),
        }
    }

    /// Average fitness per index if it stabilizes: A_n / n averaged over the
    /// tail, used as the estimate of the mean fitness c.
    pub fn tail_mean(&self) -> f64 {
        let n = self.len();
        let lo = (n / 2).max(1);
        let mut acc = 0.0;
        for i in lo..=n {
            acc += self.cum_a(i) / i as f64;
        }
        acc / (n - lo + 1) as f64
    }
}

/// The independent Beta variables beta_k ~ Beta(A_k + k, a_{k+1}) coupling a
/// preferential-attachment tree to a weighted recursive tree; beta_k = 1
/// exactly when a_{k+1} = 0 (the point-mass convention). The virtual beta_0
/// is 0 and is not stored: betas[k-1] holds beta_k.
#[derive(Debug, Clone)]
pub struct BetaCoupling {
    betas: Vec<f64>,
}

impl BetaCoupling {
    /// Sample the coupling supporting trees up to `n_max` vertices, i.e.
    /// beta_1..beta_{n_max-1}.
    pub fn sample(fitness: &FitnessSequence, n_max: usize, rng: &mut impl Rng) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::parameter("n_max must be at least 2"));
        }
        if fitness.len() < n_max {
            return Err(Error::Range(format!(
                "fitness sequence of length {} cannot support n_max {}",
                fitness.len(),
                n_max
            )));
        }
        let mut betas = Vec::with_capacity(n_max - 1);
        for k in 1..n_max {
            betas.push(Self::draw_one(fitness, k, rng));
        }
        Ok(BetaCoupling { betas })
    }

    fn draw_one(fitness: &FitnessSequence, k: usize, rng: &mut impl Rng) -> f64 {
        let shape_a = fitness.cum_a(k) + k as f64;
        let shape_b = fitness.a(k + 1);
        assert!(shape_a > 0.0, "A_k + k must be positive");
        beta_draw(shape_a, shape_b, rng)
    }

    pub fn from_betas(betas: Vec<f64>) -> Result<Self> {
        if betas.iter().any(|&b| !(b > 0.0 && b <= 1.0)) {
            return Err(Error::DegenerateCoupling(
                "all beta_k must lie in (0, 1]".into(),
            ));
        }
        Ok(BetaCoupling { betas })
    }

    /// Number of stored betas; supports trees of up to len()+1 vertices.
    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    /// beta_k for k in 1..=len().
    pub fn beta(&self, k: usize) -> f64 {
        self.betas[k - 1]
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// A copy of this coupling extended with fresh draws up to `n_max`
    /// vertices; existing terms are never re-sampled.
    pub fn extended(
        &self,
        fitness: &FitnessSequence,
        n_max: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if fitness.len() < n_max {
            return Err(Error::Range("fitness sequence too short".into()));
        }
        let mut betas = self.betas.clone();
        for k in (betas.len() + 1)..n_max {
            betas.push(Self::draw_one(fitness, k, rng));
        }
        Ok(BetaCoupling { betas })
    }

    /// The weights W_n = prod_{k<n} beta_k^{-1}, w_n = W_n (1 - beta_{n-1}),
    /// accumulated in log-space and exponentiated on materialization. The
    /// cumulative sums are canonical and w_n is their difference, so the
    /// reconstruction W_n - W_{n-1} = w_n is exact; beta = 1 still yields
    /// w_n = 0 exactly.
    pub fn weights(&self) -> Result<WeightSequence> {
        if self.betas.iter().any(|&b| b <= 0.0) {
            return Err(Error::DegenerateCoupling("beta_k = 0".into()));
        }
        let n = self.betas.len() + 1;
        let mut log_cum = Vec::with_capacity(n);
        let mut acc = 0.0f64;
        log_cum.push(0.0);
        for &b in &self.betas {
            acc -= b.ln();
            log_cum.push(acc);
        }
        let cum: Vec<f64> = log_cum.iter().map(|x| x.exp()).collect();
        let mut w = Vec::with_capacity(n);
        w.push(1.0);
        for i in 1..n {
            w.push(if cum[i].is_finite() {
                cum[i] - cum[i - 1]
            } else {
                // past f64 range only the log-space view stays exact
                (log_cum[i] + (1.0 - self.betas[i - 1]).ln()).exp()
            });
        }
        Ok(WeightSequence {
            w,
            cum,
            log_cum,
            origin: WeightOrigin::BetaSampled { seed: None },
        })
    }
}

/// Power-law diagnostics of a sequence: fitted exponent and constant for
/// W_n ~ C n^gamma, a point estimate of the residual decay exponent, and the
/// tail-average fitness for fitness sequences.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceProfile {
    pub gamma_hat: f64,
    pub c_hat: Option<f64>,
    pub const_hat: Option<f64>,
    pub residual_exponent: Option<f64>,
}

/// Least-squares fit of ln W_n against ln n over the upper half of the index
/// range.
pub fn estimate_weight_profile(weights: &WeightSequence) -> Result<SequenceProfile> {
    let n = weights.len();
    if n < 100 {
        return Err(Error::InsufficientData(format!(
            "need at least 100 indices, got {n}"
        )));
    }
    let lo = n / 2;
    let pts: Vec<(f64, f64)> = (lo..=n)
        .map(|i| ((i as f64).ln(), weights.log_cum_w(i)))
        .collect();
    let (slope, intercept) = least_squares(&pts);
    let gamma_hat = slope;
    let const_hat = intercept.exp();

    // Point estimate of the residual exponent: decay rate of
    // |W_n / (C n^gamma) - 1| over the fit window, when resolvable.
    let resid: Vec<(f64, f64)> = (lo..=n)
        .filter_map(|i| {
            let log_pred = intercept + slope * (i as f64).ln();
            let r = (weights.log_cum_w(i) - log_pred).exp() - 1.0;
            let a = r.abs();
            if a > 1e-13 {
                Some(((i as f64).ln(), a.ln()))
            } else {
                None
            }
        })
        .collect();
    let residual_exponent = if resid.len() >= 10 {
        let (s, _) = least_squares(&resid);
        Some(-s)
    } else {
        None
    };
    Ok(SequenceProfile {
        gamma_hat,
        c_hat: None,
        const_hat: Some(const_hat),
        residual_exponent,
    })
}

/// Tail-average estimate of the mean fitness c and the predicted exponent
/// gamma = c / (c + 1).
pub fn estimate_fitness_profile(fitness: &FitnessSequence) -> Result<SequenceProfile> {
    let n = fitness.len();
    if n < 100 {
        return Err(Error::InsufficientData(format!(
            "need at least 100 indices, got {n}"
        )));
    }
    let c_hat = fitness.tail_mean();
    Ok(SequenceProfile {
        gamma_hat: c_hat / (c_hat + 1.0),
        c_hat: Some(c_hat),
        const_hat: None,
        residual_exponent: None,
    })
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Estimate of the degree-limit normalization: Z_hat is the tail average of
/// W_n n^{-c/(c+1)} over n in [N/2, N], and the returned sequence is
/// m_hat_n = (c+1)/Z_hat * w_n. The approximation error decays like a small
/// negative power of N, so N >= 1e4 is recommended.
pub fn limit_weights(coupling: &BetaCoupling, c: f64, truncation: usize) -> Result<Vec<f64>> {
    if !(c > 0.0) {
        return Err(Error::parameter("c must be positive"));
    }
    if truncation < 2 || truncation > coupling.len() + 1 {
        return Err(Error::Range(format!(
            "truncation {} exceeds coupling support {}",
            truncation,
            coupling.len() + 1
        )));
    }
    let weights = coupling.weights()?;
    let z_hat = z_hat_tail_average(&weights, c, truncation);
    let scale = (c + 1.0) / z_hat;
    Ok((1..=truncation).map(|i| scale * weights.w(i)).collect())
}

/// Tail-averaged estimate of Z in W_n ~ Z n^{c/(c+1)}.
pub fn z_hat_tail_average(weights: &WeightSequence, c: f64, truncation: usize) -> f64 {
    let gamma = c / (c + 1.0);
    let lo = (truncation / 2).max(1);
    let mut acc = 0.0;
    for i in lo..=truncation {
        acc += (weights.log_cum_w(i) - gamma * (i as f64).ln()).exp();
    }
    acc / (truncation - lo + 1) as f64
}

/// JSON description of a sequence generator, the wire format used by the CLI
/// (`--seq`) and experiment configs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceSpec {
    Power {
        gamma: f64,
        #[serde(default = "default_one")]
        c: f64,
    },
    ConstantFitness {
        a: f64,
        b: f64,
    },
    PeriodicFitness {
        a: f64,
        pattern: Vec<f64>,
    },
    BetaSampled {
        a: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pattern: Option<Vec<f64>>,
        seed: u64,
    },
}

fn default_one() -> f64 {
    1.0
}

impl SequenceSpec {
    pub fn is_fitness(&self) -> bool {
        matches!(
            self,
            SequenceSpec::ConstantFitness { .. } | SequenceSpec::PeriodicFitness { .. }
        )
    }

    /// The exponent gamma this generator targets, when known.
    pub fn gamma(&self) -> Option<f64> {
        match self {
            SequenceSpec::Power { gamma, .. } => Some(*gamma),
            _ => self.mean_fitness().map(|c| c / (c + 1.0)),
        }
    }

    /// Mean fitness c for fitness-driven generators.
    pub fn mean_fitness(&self) -> Option<f64> {
        match self {
            SequenceSpec::Power { .. } => None,
            SequenceSpec::ConstantFitness { b, .. } => Some(*b),
            SequenceSpec::PeriodicFitness { pattern, .. } => {
                Some(pattern.iter().sum::<f64>() / pattern.len() as f64)
            }
            SequenceSpec::BetaSampled { b, pattern, .. } => match (b, pattern) {
                (Some(b), _) => Some(*b),
                (None, Some(p)) => Some(p.iter().sum::<f64>() / p.len() as f64),
                _ => None,
            },
        }
    }

    pub fn build_fitness(&self, n_max: usize) -> Result<FitnessSequence> {
        match self {
            SequenceSpec::ConstantFitness { a, b } => FitnessSequence::constant(*a, *b, n_max),
            SequenceSpec::PeriodicFitness { a, pattern } => {
                FitnessSequence::periodic(*a, pattern, n_max)
            }
            SequenceSpec::BetaSampled { a, b, pattern, .. } => match (b, pattern) {
                (Some(b), None) => FitnessSequence::constant(*a, *b, n_max),
                (None, Some(p)) => FitnessSequence::periodic(*a, p, n_max),
                _ => Err(Error::Config(
                    "beta_sampled takes exactly one of `b` or `pattern`".into(),
                )),
            },
            SequenceSpec::Power { .. } => Err(Error::Config(
                "power spec describes weights, not fitnesses".into(),
            )),
        }
    }

    pub fn build_weights(&self, n_max: usize) -> Result<WeightSequence> {
        match self {
            SequenceSpec::Power { gamma, c } => WeightSequence::power(*gamma, *c, n_max),
            SequenceSpec::BetaSampled { seed, .. } => {
                let fitness = self.build_fitness(n_max.max(2))?;
                let mut rng = crate::rng::master_rng(*seed);
                let coupling = BetaCoupling::sample(&fitness, n_max.max(2), &mut rng)?;
                let mut weights = coupling.weights()?;
                weights.w.truncate(n_max);
                weights.cum.truncate(n_max);
                weights.log_cum.truncate(n_max);
                weights.origin = WeightOrigin::BetaSampled { seed: Some(*seed) };
                Ok(weights)
            }
            _ => Err(Error::Config(
                "fitness spec describes a preferential-attachment model, not weights".into(),
            )),
        }
    }
}
