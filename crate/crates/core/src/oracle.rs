//! Exact small-instance probability oracle: enumerate every growth trace of a
//! recursive tree, evaluate the preferential-attachment probability of each
//! trace directly, evaluate the same probability under the Beta-product
//! weighted-recursive-tree mixture in closed form, and certify that the two
//! distributions coincide.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::limits::beta_mixed_moment;
use crate::sequences::{FitnessSequence, WeightSequence};
use crate::trees::GrowthTrace;

/// Hard cap for full trace enumeration: (n-1)! traces.
pub const MAX_ENUMERATION_N: usize = 8;
/// Hard cap for the certification sweep.
pub const MAX_CERTIFY_N: usize = 6;

/// All (n-1)! parent-choice sequences for trees of n vertices.
pub fn enumerate_traces(n: usize) -> Result<Vec<GrowthTrace>> {
    if n == 0 {
        return Err(Error::parameter("n must be at least 1"));
    }
    if n > MAX_ENUMERATION_N {
        return Err(Error::Refused(format!(
            "enumeration of {} traces for n = {} (cap is n <= {})",
            (1..n).product::<usize>(),
            n,
            MAX_ENUMERATION_N
        )));
    }
    let mut out = Vec::new();
    let mut choices = vec![1u32; n.saturating_sub(1)];
    loop {
        out.push(GrowthTrace::new(choices.clone())?);
        // next mixed-radix value: digit j ranges over 1..=j+1
        let mut j = choices.len();
        loop {
            if j == 0 {
                return Ok(out);
            }
            j -= 1;
            if choices[j] as usize <= j {
                choices[j] += 1;
                for c in &mut choices[j + 1..] {
                    *c = 1;
                }
                break;
            }
            choices[j] = 1;
        }
    }
}

/// Probability of a trace under the preferential-attachment dynamics: the
/// product over steps of (a_k + out-degree before the step) / (A_{m-1} + m - 2),
/// with the forced second vertex contributing factor 1.
pub fn pat_trace_probability(fitness: &FitnessSequence, trace: &GrowthTrace) -> Result<f64> {
    let n = trace.tree_len();
    if fitness.len() < n {
        return Err(Error::Range("fitness sequence too short for trace".into()));
    }
    let mut deg = vec![0u32; n + 1];
    let mut prob = 1.0;
    for m in 2..=n {
        let k = trace.choice(m);
        if m > 2 {
            let numer = fitness.a(k) + deg[k] as f64;
            let denom = fitness.cum_a(m - 1) + (m - 2) as f64;
            prob *= (numer / denom).max(0.0);
        }
        deg[k] += 1;
    }
    Ok(prob)
}

/// Probability of a trace under the weighted recursive tree with the random
/// Beta-product weights, integrated in closed form: each step factors as
/// beta_{m-2} ... beta_k (1 - beta_{k-1}) (with the convention beta_0 = 0),
/// and by independence the trace probability is the product over j of the
/// mixed moments E[beta_j^{p_j} (1 - beta_j)^{q_j}].
pub fn wrt_mixture_trace_probability(
    fitness: &FitnessSequence,
    trace: &GrowthTrace,
) -> Result<f64> {
    let n = trace.tree_len();
    if fitness.len() < n {
        return Err(Error::Range("fitness sequence too short for trace".into()));
    }
    if n < 3 {
        return Ok(1.0);
    }
    let mut pow = vec![0u32; n - 1]; // pow[j] = p_j for beta_j
    let mut com = vec![0u32; n - 1]; // com[j] = q_j for (1 - beta_j)
    for m in 2..=n {
        let k = trace.choice(m);
        if k + 2 <= m {
            for p in &mut pow[k..=m - 2] {
                *p += 1;
            }
        }
        if k >= 2 {
            com[k - 1] += 1;
        }
    }
    let mut prob = 1.0;
    for j in 1..n - 1 {
        let shape_a = fitness.cum_a(j) + j as f64;
        let shape_b = fitness.a(j + 1);
        prob *= beta_mixed_moment(shape_a, shape_b, pow[j], com[j])?;
    }
    Ok(prob)
}

/// Probability of a trace under a weighted recursive tree with deterministic
/// weights: prod_m w_{K_m} / W_{m-1}.
pub fn wrt_trace_probability(weights: &WeightSequence, trace: &GrowthTrace) -> Result<f64> {
    let n = trace.tree_len();
    if weights.len() < n.saturating_sub(1) {
        return Err(Error::Range("weight sequence too short for trace".into()));
    }
    let mut prob = 1.0;
    for m in 2..=n {
        let k = trace.choice(m);
        let denom = weights.cum_w(m - 1);
        assert!(denom > 0.0, "W_{} must be positive", m - 1);
        prob *= weights.w(k) / denom;
    }
    Ok(prob)
}

/// One trace with its probability under both dynamics.
#[derive(Debug, Clone)]
pub struct TraceProbability {
    pub trace: GrowthTrace,
    pub p_pat: f64,
    pub p_wrt_mixture: f64,
}

/// Probabilities of every trace of an n-vertex tree under both dynamics.
pub fn trace_probabilities(
    fitness: &FitnessSequence,
    n: usize,
) -> Result<Vec<TraceProbability>> {
    enumerate_traces(n)?
        .into_iter()
        .map(|trace| {
            let p_pat = pat_trace_probability(fitness, &trace)?;
            let p_wrt_mixture = wrt_mixture_trace_probability(fitness, &trace)?;
            Ok(TraceProbability {
                trace,
                p_pat,
                p_wrt_mixture,
            })
        })
        .collect()
}

/// Certification report for the representation of preferential attachment as
/// a Beta-product weighted recursive tree.
#[derive(Debug, Clone, Serialize)]
pub struct Theorem1Report {
    pub n: usize,
    pub trace_count: usize,
    pub max_abs_diff: f64,
    pub pat_total: f64,
    pub mixture_total: f64,
    pub pass: bool,
    /// The trace realizing max_abs_diff when the certificate fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_trace: Option<Vec<u32>>,
}

pub const THEOREM1_TOLERANCE: f64 = 1e-10;

/// Sweep all (n-1)! traces and check that the preferential-attachment law and
/// the Beta-product mixture coincide to within 1e-10, and that both sum to 1.
pub fn certify_theorem1(fitness: &FitnessSequence, n: usize) -> Result<Theorem1Report> {
    if n > MAX_CERTIFY_N {
        return Err(Error::Refused(format!(
            "certification sweep capped at n <= {MAX_CERTIFY_N}, requested {n}"
        )));
    }
    let rows = trace_probabilities(fitness, n)?;
    let mut max_abs_diff = 0.0;
    let mut worst: Option<Vec<u32>> = None;
    let mut pat_total = 0.0;
    let mut mixture_total = 0.0;
    for row in &rows {
        let d = (row.p_pat - row.p_wrt_mixture).abs();
        if d > max_abs_diff {
            max_abs_diff = d;
            worst = Some(row.trace.choices().to_vec());
        }
        pat_total += row.p_pat;
        mixture_total += row.p_wrt_mixture;
    }
    let pass = max_abs_diff <= THEOREM1_TOLERANCE
        && (pat_total - 1.0).abs() <= THEOREM1_TOLERANCE
        && (mixture_total - 1.0).abs() <= THEOREM1_TOLERANCE;
    Ok(Theorem1Report {
        n,
        trace_count: rows.len(),
        max_abs_diff,
        pat_total,
        mixture_total,
        pass,
        worst_trace: if pass { None } else { worst },
    })
}
