//! Tree statistics: profile and its Gaussian shape prediction, the rate
//! function driving height asymptotics, Laplace transforms of the weighted
//! and unweighted profiles, probability measures carried on the tree, the
//! measure-regime classifier, and degree-scaling diagnostics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sequences::{FitnessSequence, WeightSequence};
use crate::trees::{subtree_members, PlaneTree};

/// Number of vertices at each height; counts[k] is the occupancy of level k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileVector {
    pub counts: Vec<u64>,
}

impl ProfileVector {
    pub fn height(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Histogram of vertex heights.
pub fn profile(tree: &PlaneTree) -> ProfileVector {
    let mut counts = vec![0u64; crate::trees::height(tree) + 1];
    for i in 1..=tree.len() {
        counts[tree.height_of(i)] += 1;
    }
    ProfileVector { counts }
}

/// Rate function 1 + gamma (e^z - 1 - z e^z): positive on (z_-, z_+), equal
/// to 1 at z = 0, and decreasing on [0, inf).
pub fn f_gamma(gamma: f64, z: f64) -> f64 {
    1.0 + gamma * (z.exp() - 1.0 - z * z.exp())
}

/// phi(z) = gamma (e^z - 1), the exponent scale of the profile transform.
pub fn phi(gamma: f64, z: f64) -> f64 {
    gamma * (z.exp() - 1.0)
}

/// The positive root of f_gamma, located by bisection to 1e-12; gamma e^{z_+}
/// is the height constant.
pub fn solve_z_plus(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::parameter("gamma must be positive"));
    }
    let mut hi = 1.0f64;
    while f_gamma(gamma, hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0f64;
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f_gamma(gamma, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Lower endpoint of the valid range: log((gamma-1)/gamma) for gamma > 1,
/// negative infinity otherwise.
pub fn z_minus(gamma: f64) -> f64 {
    if gamma > 1.0 {
        ((gamma - 1.0) / gamma).ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Leading Gaussian term of the profile shape:
/// n / sqrt(2 pi log n) * exp(-((k - gamma log n)^2) / (2 gamma log n)).
/// Defined for n >= 3; smaller n return NaN.
pub fn gaussian_profile_prediction(n: usize, gamma: f64, k: usize) -> f64 {
    if n < 3 {
        return f64::NAN;
    }
    let log_n = (n as f64).ln();
    let x = (k as f64 - gamma * log_n) / (gamma * log_n).sqrt();
    n as f64 / (2.0 * std::f64::consts::PI * log_n).sqrt() * (-0.5 * x * x).exp()
}

/// log of sum over vertices of e^{z * height}, in log-sum-exp form.
fn log_laplace_profile(tree: &PlaneTree, z: f64) -> f64 {
    let prof = profile(tree);
    let mut max = f64::NEG_INFINITY;
    for (k, &c) in prof.counts.iter().enumerate() {
        if c > 0 {
            max = max.max((c as f64).ln() + z * k as f64);
        }
    }
    let mut acc = 0.0;
    for (k, &c) in prof.counts.iter().enumerate() {
        if c > 0 {
            acc += ((c as f64).ln() + z * k as f64 - max).exp();
        }
    }
    max + acc.ln()
}

/// Laplace transform of the profile: sum_k counts[k] e^{z k}.
pub fn laplace_profile(tree: &PlaneTree, z: f64) -> f64 {
    log_laplace_profile(tree, z).exp()
}

/// Rescaled transform n^{-(1+phi(z))} sum_k counts[k] e^{z k}; equal to 1 at
/// z = 0 for every tree.
pub fn normalized_profile_transform(tree: &PlaneTree, gamma: f64, z: f64) -> f64 {
    let log_n = (tree.len() as f64).ln();
    (log_laplace_profile(tree, z) - (1.0 + phi(gamma, z)) * log_n).exp()
}

/// Weighted Laplace transform sum_i (w_i / W_n) e^{z height(u_i)}.
pub fn weighted_laplace(tree: &PlaneTree, weights: &WeightSequence, z: f64) -> Result<f64> {
    let n = tree.len();
    if weights.len() < n {
        return Err(Error::Range("weight sequence too short for tree".into()));
    }
    let log_total = weights.log_cum_w(n);
    let mut max = f64::NEG_INFINITY;
    let mut terms = Vec::with_capacity(n);
    for i in 1..=n {
        if weights.w(i) > 0.0 {
            let t = weights.log_w(i) - log_total + z * tree.height_of(i) as f64;
            terms.push(t);
            max = max.max(t);
        }
    }
    let acc: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    Ok((max + acc.ln()).exp())
}

/// Normalizing product C_n(z) = prod_{i=2}^{n} (1 + (e^z - 1) w_i / W_i),
/// evaluated in log-space. The product starts at i = 2, where every factor
/// exceeds 1 - w_i/W_i > 0 for real z.
pub fn normalizing_product(weights: &WeightSequence, n: usize, z: f64) -> Result<f64> {
    if weights.len() < n {
        return Err(Error::Range("weight sequence too short".into()));
    }
    let ez = z.exp() - 1.0;
    let mut log_acc = 0.0;
    for i in 2..=n {
        let factor = 1.0 + ez * weights.weight_ratio(i);
        assert!(factor > 0.0, "normalizing factor vanished at i = {i}");
        log_acc += factor.ln();
    }
    Ok(log_acc.exp())
}

/// Martingale evaluation M_n(z) = weighted_laplace / C_n(z).
pub fn profile_martingale(tree: &PlaneTree, weights: &WeightSequence, z: f64) -> Result<f64> {
    let wl = weighted_laplace(tree, weights, z)?;
    let c = normalizing_product(weights, tree.len(), z)?;
    Ok(wl / c)
}

/// Which probability measure to place on the vertices.
pub enum MeasureKind<'a> {
    /// Atom w_k / W_n.
    Weight(&'a WeightSequence),
    /// Atom (b_k + out-degree(k)) / (B_n + n - 1).
    Degree(&'a FitnessSequence),
    /// Atom 1/n.
    Uniform,
}

/// A probability measure on the vertices of a fixed tree.
#[derive(Debug, Clone)]
pub struct TreeMeasure {
    pub atoms: Vec<f64>,
}

/// Build the requested measure; atoms are indexed by arrival order and sum
/// to 1.
pub fn tree_measure(tree: &PlaneTree, kind: MeasureKind<'_>) -> Result<TreeMeasure> {
    let n = tree.len();
    let atoms = match kind {
        MeasureKind::Weight(w) => {
            if w.len() < n {
                return Err(Error::Range("weight sequence too short".into()));
            }
            let total = w.cum_w(n);
            (1..=n).map(|i| w.w(i) / total).collect()
        }
        MeasureKind::Degree(b) => {
            if n < 2 {
                return Err(Error::parameter("degree measure needs n >= 2"));
            }
            if b.len() < n {
                return Err(Error::Range("fitness sequence too short".into()));
            }
            let total = b.cum_a(n) + (n as f64 - 1.0);
            (1..=n)
                .map(|i| (b.a(i) + tree.out_degree(i) as f64) / total)
                .collect()
        }
        MeasureKind::Uniform => vec![1.0 / n as f64; n],
    };
    Ok(TreeMeasure { atoms })
}

/// Mass the measure puts on the subtree rooted at vertex k.
pub fn subtree_mass(measure: &TreeMeasure, tree: &PlaneTree, k: usize) -> Result<f64> {
    if measure.atoms.len() != tree.len() {
        return Err(Error::parameter("measure does not match tree"));
    }
    Ok(subtree_members(tree, k)?
        .into_iter()
        .map(|i| measure.atoms[i - 1])
        .sum())
}

/// The three limit behaviours of the weight measure, plus an explicit
/// "undetermined" outcome when the finite-horizon heuristics are not
/// decisive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Total weight converges: the limit keeps atoms on the vertices.
    Atomic,
    /// Total weight diverges but sum (w_i/W_i)^2 converges: diffuse limit on
    /// the boundary.
    DiffuseBoundary,
    /// sum (w_i/W_i)^2 diverges: the limit concentrates on a single leaf.
    SingleLeaf,
    Undetermined,
}

/// Classifier output: the regime call plus the partial sums it was based on.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub horizon: usize,
    pub total_weight: f64,
    pub sum_ratio_sq: f64,
    /// Fitted decay exponent of w_n/W_n over the tail, when available.
    pub ratio_decay: Option<f64>,
}

/// Classify the measure regime from a finite prefix. The conditions are
/// about infinite sums, so this is a heuristic: it reports `Undetermined`
/// rather than guessing when the tail behaviour is ambiguous.
pub fn measure_regime(weights: &WeightSequence) -> RegimeReport {
    let n = weights.len();
    let sum_ratio_sq: f64 = (1..=n).map(|i| weights.weight_ratio(i).powi(2)).sum();
    let total_weight = weights.cum_w(n);

    // tail growth of W over the last octave, in log scale
    let w_growth = weights.log_cum_w(n) - weights.log_cum_w((n / 2).max(1));

    // fitted decay exponent of the ratio q_i = w_i/W_i over the upper half
    let pts: Vec<(f64, f64)> = ((n / 2).max(1)..=n)
        .filter_map(|i| {
            let q = weights.weight_ratio(i);
            if q > 0.0 {
                Some(((i as f64).ln(), q.ln()))
            } else {
                None
            }
        })
        .collect();
    let ratio_decay = if pts.len() >= 16 {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        Some(sxy / sxx)
    } else {
        None
    };

    let regime = if w_growth < 1e-9 {
        // cumulative weight has stopped moving: convergent total
        Regime::Atomic
    } else {
        match ratio_decay {
            // q_n ~ n^s: sum q^2 converges iff 2s < -1
            Some(s) if s < -0.55 => Regime::DiffuseBoundary,
            Some(s) if s > -0.45 => Regime::SingleLeaf,
            _ => Regime::Undetermined,
        }
    };
    RegimeReport {
        regime,
        horizon: n,
        total_weight,
        sum_ratio_sq,
        ratio_decay,
    }
}

/// Truncated-product estimate of the probability that two independent draws
/// from the limit measure have their most recent common ancestor at vertex k.
#[derive(Debug, Clone, Serialize)]
pub struct MrcaEstimate {
    pub p: f64,
    /// The neglected tail factor is at least this close to 1.
    pub tail_lower_bound: f64,
}

/// p_k = (w_k/W_k)^2 prod_{i>k} (1 - (w_i/W_i)^2), truncated at the horizon.
/// Requires the diffuse regime; the truncation error bound comes from
/// prod_{i>N} (1 - q_i^2) >= 1 - sum_{i>N} q_i^2.
pub fn mrca_law(weights: &WeightSequence, k: usize, horizon: usize) -> Result<MrcaEstimate> {
    if k == 0 || horizon < k || horizon > weights.len() {
        return Err(Error::Range(format!(
            "need 1 <= k <= horizon <= {}, got k = {k}, horizon = {horizon}",
            weights.len()
        )));
    }
    let report = measure_regime(weights);
    if report.regime != Regime::DiffuseBoundary {
        return Err(Error::Domain(format!(
            "mrca law requires the diffuse regime, classifier returned {:?}",
            report.regime
        )));
    }
    let qk = weights.weight_ratio(k);
    let mut log_prod = 0.0;
    for i in (k + 1)..=horizon {
        let q = weights.weight_ratio(i);
        log_prod += (-q * q).ln_1p();
    }
    // decay bound for the neglected factors, assuming q_i^2 keeps falling
    // like the fitted power
    let tail_sum = match report.ratio_decay {
        Some(s) if 2.0 * s < -1.0 => {
            let qn = weights.weight_ratio(horizon);
            qn * qn * horizon as f64 / (-2.0 * s - 1.0)
        }
        _ => 1.0,
    };
    Ok(MrcaEstimate {
        p: qk * qk * log_prod.exp(),
        tail_lower_bound: (1.0 - tail_sum).max(0.0),
    })
}

/// f(n) = sum_{i=2}^{n-1} w_i / W_i: the expected height of a weight-biased
/// vertex, and the height scale when weights grow super-polynomially.
pub fn expected_height_sum(weights: &WeightSequence, n: usize) -> Result<f64> {
    if n > weights.len() {
        return Err(Error::Range("n exceeds weight sequence".into()));
    }
    Ok((2..n).map(|i| weights.weight_ratio(i)).sum())
}

/// E[out-degree of u_k at time n] = sum_{i=k}^{n-1} w_k / W_i, exactly.
pub fn degree_expectation(weights: &WeightSequence, k: usize, n: usize) -> Result<f64> {
    if k == 0 || k > n || n > weights.len() {
        return Err(Error::Range("need 1 <= k <= n <= sequence length".into()));
    }
    let log_wk = weights.log_w(k);
    if log_wk == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    Ok((k..n)
        .map(|i| (log_wk - weights.log_cum_w(i)).exp())
        .sum())
}

/// Scaled-degree diagnostics over a replicate set of same-size trees grown
/// from the same weights: per-vertex ratios of the mean rescaled degree to
/// its predicted limit w_k / (C (1 - gamma)), the lp norm of the mean scaled
/// degree vector, and the scaled maximum degree.
#[derive(Debug, Clone, Serialize)]
pub struct DegreeScalingReport {
    pub n: usize,
    pub replicates: usize,
    /// mean n^{-(1-gamma)} deg(u_k) for k = 1..=k_max.
    pub scaled_mean: Vec<f64>,
    /// scaled_mean[k] * C (1 - gamma) / w_k; zero-weight vertices report the
    /// absolute scaled degree instead (which must tend to zero).
    pub ratio_to_limit: Vec<f64>,
    pub lp_exponent: f64,
    pub lp_norm: f64,
    pub scaled_max_degree: f64,
}

pub fn degree_scaling_report(
    trees: &[PlaneTree],
    weights: &WeightSequence,
    gamma: f64,
    c: f64,
    k_max: usize,
    lp_exponent: f64,
) -> Result<DegreeScalingReport> {
    if trees.is_empty() {
        return Err(Error::parameter("need at least one tree"));
    }
    let n = trees[0].len();
    if trees.iter().any(|t| t.len() != n) {
        return Err(Error::parameter("trees must share one size"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::parameter("gamma must lie in (0, 1)"));
    }
    let k_max = k_max.min(n);
    let scale = (n as f64).powf(-(1.0 - gamma));
    let mut scaled_mean = vec![0.0; k_max];
    let mut scaled_max = 0.0;
    let mut lp_acc = 0.0;
    for t in trees {
        let mut tree_max = 0usize;
        for k in 1..=n {
            let d = t.out_degree(k);
            tree_max = tree_max.max(d);
            if k <= k_max {
                scaled_mean[k - 1] += scale * d as f64;
            }
            lp_acc += (scale * d as f64).powf(lp_exponent);
        }
        scaled_max += scale * tree_max as f64;
    }
    let r = trees.len() as f64;
    for v in &mut scaled_mean {
        *v /= r;
    }
    let ratio_to_limit = scaled_mean
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let w = weights.w(i + 1);
            if w > 0.0 {
                m * c * (1.0 - gamma) / w
            } else {
                m
            }
        })
        .collect();
    Ok(DegreeScalingReport {
        n,
        replicates: trees.len(),
        scaled_mean,
        ratio_to_limit,
        lp_exponent,
        lp_norm: (lp_acc / r).powf(1.0 / lp_exponent),
        scaled_max_degree: scaled_max / r,
    })
}
