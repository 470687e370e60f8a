//! The (m, alpha) preferential-attachment multigraph: each arriving vertex
//! emits m edges whose targets are drawn proportionally to alpha plus the
//! current degree. The model is coupled to a preferential-attachment tree by
//! merging each arrival with the m-1 zero-fitness tree vertices that precede
//! it; the coupling is certified exactly at small sizes.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fenwick::Fenwick;
use crate::oracle;
use crate::rng::replicate_rng;
use crate::sequences::FitnessSequence;

/// A multigraph grown by the (m, alpha) dynamics. Seed vertices carry ids
/// 1..=k; the arrival v_i (i >= 2) carries id k + i - 1. Seed edges are not
/// materialized (only the seed degrees matter to the dynamics); `edges`
/// holds the arrival edges as (newcomer, target) pairs, parallel edges
/// included.
#[derive(Debug, Clone)]
pub struct MultiGraph {
    pub seed_count: usize,
    pub m: usize,
    pub alpha: f64,
    /// Edge-incidence counts per vertex id (seed degrees included).
    pub degree: Vec<u32>,
    pub edges: Vec<(u32, u32)>,
}

impl MultiGraph {
    /// Number of vertices (seed plus arrivals).
    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }

    /// Total degree mass of the seed vertices.
    pub fn merged_seed_degree(&self) -> u64 {
        self.degree[..self.seed_count].iter().map(|&d| d as u64).sum()
    }

    /// Per-seed-vertex share of the merged seed degree.
    pub fn seed_split(&self) -> Vec<f64> {
        let total = self.merged_seed_degree() as f64;
        self.degree[..self.seed_count]
            .iter()
            .map(|&d| d as f64 / total)
            .collect()
    }

    /// Maximum degree over the merged vertex set (seed merged into one).
    pub fn merged_max_degree(&self) -> u64 {
        let arrivals = self.degree[self.seed_count..]
            .iter()
            .map(|&d| d as u64)
            .max()
            .unwrap_or(0);
        self.merged_seed_degree().max(arrivals)
    }

    /// Write rows `u,v` (with that exact header) for the arrival edges.
    pub fn write_edge_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "u,v")?;
        for &(u, v) in &self.edges {
            writeln!(out, "{},{}", u, v)?;
        }
        Ok(())
    }
}

fn validate(seed_degrees: &[u32], m: usize, alpha: f64) -> Result<()> {
    if seed_degrees.is_empty() {
        return Err(Error::parameter("seed must have at least one vertex"));
    }
    if m < 1 {
        return Err(Error::parameter("m must be at least 1"));
    }
    if !(alpha > -(m as f64)) {
        return Err(Error::parameter("alpha must exceed -m"));
    }
    for &d in seed_degrees {
        if !(alpha + d as f64 > 0.0) {
            return Err(Error::parameter(
                "alpha plus every seed degree must be positive",
            ));
        }
    }
    Ok(())
}

/// Grow the multigraph to n vertices beyond replication of the seed: n = 1
/// returns the seed unchanged, each further arrival brings m edges whose
/// targets exclude the newcomer itself and whose degrees update after every
/// edge creation.
pub fn grow_pa_graph(
    seed_degrees: &[u32],
    m: usize,
    alpha: f64,
    n: usize,
    rng: &mut impl rand::Rng,
) -> Result<MultiGraph> {
    validate(seed_degrees, m, alpha)?;
    if n == 0 {
        return Err(Error::parameter("n must be at least 1"));
    }
    let k = seed_degrees.len();
    let mut degree: Vec<u32> = seed_degrees.to_vec();
    degree.reserve(n - 1);
    let mut masses = Fenwick::with_capacity(k + n - 1);
    for &d in seed_degrees {
        masses.push(alpha + d as f64);
    }
    let mut edges = Vec::with_capacity(m * (n - 1));
    for i in 2..=n {
        let newcomer = (k + i - 2) as u32 + 1;
        for _ in 0..m {
            let total = masses.total();
            let target = masses.search(rng.random::<f64>() * total);
            masses.add(target, 1.0);
            degree[target] += 1;
            edges.push((newcomer, target as u32 + 1));
        }
        degree.push(m as u32);
        masses.push(alpha + m as f64);
    }
    Ok(MultiGraph {
        seed_count: k,
        m,
        alpha,
        degree,
        edges,
    })
}

/// The fitness sequence whose preferential-attachment tree couples to the
/// (m, alpha) graph: (w(S), 0^{m-1}, m+alpha, 0^{m-1}, m+alpha, ...) with
/// w(S) the total seed degree plus k alpha.
pub fn pagraph_fitness(
    seed_degrees: &[u32],
    m: usize,
    alpha: f64,
    n_max: usize,
) -> Result<FitnessSequence> {
    validate(seed_degrees, m, alpha)?;
    let w_seed = seed_degrees.iter().map(|&d| d as f64).sum::<f64>()
        + seed_degrees.len() as f64 * alpha;
    if m == 1 {
        FitnessSequence::constant(w_seed, 1.0 + alpha, n_max)
    } else {
        let mut pattern = vec![0.0; m - 1];
        pattern.push(m as f64 + alpha);
        FitnessSequence::periodic(w_seed, &pattern, n_max)
    }
}

/// Degree vector of an (m, alpha) graph, stream-compatible with
/// [`grow_pa_graph`] but without materializing the edge list.
pub fn grow_pa_degrees(
    seed_degrees: &[u32],
    m: usize,
    alpha: f64,
    n: usize,
    rng: &mut impl rand::Rng,
) -> Result<Vec<u32>> {
    validate(seed_degrees, m, alpha)?;
    if n == 0 {
        return Err(Error::parameter("n must be at least 1"));
    }
    let k = seed_degrees.len();
    let mut degree: Vec<u32> = seed_degrees.to_vec();
    degree.reserve(n - 1);
    let mut masses = Fenwick::with_capacity(k + n - 1);
    for &d in seed_degrees {
        masses.push(alpha + d as f64);
    }
    for _ in 2..=n {
        for _ in 0..m {
            let total = masses.total();
            let target = masses.search(rng.random::<f64>() * total);
            masses.add(target, 1.0);
            degree[target] += 1;
        }
        degree.push(m as u32);
        masses.push(alpha + m as f64);
    }
    Ok(degree)
}

/// Scaled-degree summary of replicate (m, alpha) graphs: means of
/// n^{-1/(2+alpha/m)} (merged-seed degree, arrival degrees, max degree) and
/// the per-seed-vertex split fractions whose limit is Dirichlet(d_i + alpha).
#[derive(Debug, Clone, Serialize)]
pub struct CoupledDegreeReport {
    pub n: usize,
    pub replicates: usize,
    pub scaling_exponent: f64,
    /// Scale factor translating graph limits to tree-chain limits, from the
    /// time change n -> 1 + (n-1) m: m^{m/(2m+alpha)}.
    pub time_change_scale: f64,
    pub scaled_merged_seed_mean: f64,
    /// Mean scaled degree of arrivals v_2..v_{k_max}.
    pub scaled_arrival_mean: Vec<f64>,
    pub scaled_max_degree_mean: f64,
    pub seed_split_mean: Vec<f64>,
    pub seed_split_var: Vec<f64>,
}

pub fn coupled_degree_limits(
    seed_degrees: &[u32],
    m: usize,
    alpha: f64,
    n: usize,
    replicates: usize,
    k_max: usize,
    master_seed: u64,
) -> Result<CoupledDegreeReport> {
    validate(seed_degrees, m, alpha)?;
    if replicates == 0 || n < 2 {
        return Err(Error::parameter("need replicates >= 1 and n >= 2"));
    }
    let exponent = 1.0 / (2.0 + alpha / m as f64);
    let scale = (n as f64).powf(-exponent);
    let k_max = k_max.min(n - 1);
    let k = seed_degrees.len();
    let per_rep: Vec<(f64, Vec<f64>, f64, Vec<f64>)> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(master_seed, r);
            let degree = grow_pa_degrees(seed_degrees, m, alpha, n, &mut rng)?;
            let seed_total: u64 = degree[..k].iter().map(|&d| d as u64).sum();
            let seed_scaled = scale * seed_total as f64;
            let arrivals: Vec<f64> = (0..k_max)
                .map(|i| scale * degree[k + i] as f64)
                .collect();
            let arrival_max = degree[k..].iter().copied().max().unwrap_or(0) as u64;
            let max_scaled = scale * seed_total.max(arrival_max) as f64;
            let split = degree[..k]
                .iter()
                .map(|&d| d as f64 / seed_total as f64)
                .collect();
            Ok((seed_scaled, arrivals, max_scaled, split))
        })
        .collect::<Result<_>>()?;

    let r = replicates as f64;
    let mut report = CoupledDegreeReport {
        n,
        replicates,
        scaling_exponent: exponent,
        time_change_scale: (m as f64).powf(m as f64 / (2.0 * m as f64 + alpha)),
        scaled_merged_seed_mean: 0.0,
        scaled_arrival_mean: vec![0.0; k_max],
        scaled_max_degree_mean: 0.0,
        seed_split_mean: vec![0.0; seed_degrees.len()],
        seed_split_var: vec![0.0; seed_degrees.len()],
    };
    for (seed_scaled, arrivals, max_scaled, split) in &per_rep {
        report.scaled_merged_seed_mean += seed_scaled / r;
        for (acc, v) in report.scaled_arrival_mean.iter_mut().zip(arrivals) {
            *acc += v / r;
        }
        report.scaled_max_degree_mean += max_scaled / r;
        for (acc, v) in report.seed_split_mean.iter_mut().zip(split) {
            *acc += v / r;
        }
    }
    for (seed_scaled_idx, var) in report.seed_split_var.iter_mut().enumerate() {
        let mean = report.seed_split_mean[seed_scaled_idx];
        *var = per_rep
            .iter()
            .map(|(_, _, _, split)| (split[seed_scaled_idx] - mean).powi(2))
            .sum::<f64>()
            / r;
    }
    Ok(report)
}

/// Exact coupling certificate between the direct (m, alpha) growth and the
/// merged preferential-attachment tree.
#[derive(Debug, Clone, Serialize)]
pub struct PagraphCouplingReport {
    pub n: usize,
    pub outcome_count: usize,
    pub max_abs_diff: f64,
    pub direct_total: f64,
    pub merged_total: f64,
    pub pass: bool,
}

pub const PAGRAPH_COUPLING_TOLERANCE: f64 = 1e-10;

/// Distribution over normalized merged degree vectors
/// (added seed degree, deg(v_2) - m, ..., deg(v_n) - m) of the direct model.
fn direct_degree_distribution(
    seed_degrees: &[u32],
    m: usize,
    alpha: f64,
    n: usize,
) -> BTreeMap<Vec<u32>, f64> {
    let k = seed_degrees.len();
    let mut acc = BTreeMap::new();
    let mut degree: Vec<u32> = seed_degrees.to_vec();

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        degree: &mut Vec<u32>,
        arrival: usize,
        edge: usize,
        prob: f64,
        seed_degrees: &[u32],
        m: usize,
        alpha: f64,
        n: usize,
        acc: &mut BTreeMap<Vec<u32>, f64>,
    ) {
        let k = seed_degrees.len();
        if arrival > n {
            let seed_extra: u32 =
                degree[..k].iter().sum::<u32>() - seed_degrees.iter().sum::<u32>();
            let mut key = vec![seed_extra];
            key.extend(degree[k..].iter().map(|&d| d - m as u32));
            *acc.entry(key).or_insert(0.0) += prob;
            return;
        }
        if edge > m {
            degree.push(m as u32);
            recurse(degree, arrival + 1, 1, prob, seed_degrees, m, alpha, n, acc);
            degree.pop();
            return;
        }
        let total: f64 = degree.iter().map(|&d| alpha + d as f64).sum();
        for t in 0..degree.len() {
            let p = (alpha + degree[t] as f64) / total;
            if p <= 0.0 {
                continue;
            }
            degree[t] += 1;
            recurse(
                degree,
                arrival,
                edge + 1,
                prob * p,
                seed_degrees,
                m,
                alpha,
                n,
                acc,
            );
            degree[t] -= 1;
        }
    }

    if n >= 2 {
        recurse(
            &mut degree,
            2,
            1,
            1.0,
            seed_degrees,
            m,
            alpha,
            n,
            &mut acc,
        );
    } else {
        acc.insert(vec![0], 1.0);
    }
    let _ = k;
    acc
}

/// The same distribution computed through the coupled tree: enumerate the
/// traces of the (1 + (n-1) m)-vertex preferential-attachment tree and read
/// off (out-degree of u_1, out-degree of each fitness-carrying block head).
fn merged_pat_distribution(
    seed_degrees: &[u32],
    m: usize,
    alpha: f64,
    n: usize,
) -> Result<BTreeMap<Vec<u32>, f64>> {
    let size = 1 + (n - 1) * m;
    let fitness = pagraph_fitness(seed_degrees, m, alpha, size.max(2))?;
    let mut acc = BTreeMap::new();
    if n == 1 {
        acc.insert(vec![0], 1.0);
        return Ok(acc);
    }
    for trace in oracle::enumerate_traces(size)? {
        let p = oracle::pat_trace_probability(&fitness, &trace)?;
        if p == 0.0 {
            continue;
        }
        let tree = trace.to_tree();
        let mut key = vec![tree.out_degree(1) as u32];
        for i in 1..n {
            key.push(tree.out_degree(1 + i * m) as u32);
        }
        *acc.entry(key).or_insert(0.0) += p;
    }
    Ok(acc)
}

/// Enumerate both sides exhaustively and compare the distributions of the
/// merged degree sequence.
pub fn certify_pagraph_coupling(
    seed_degrees: &[u32],
    m: usize,
    alpha: f64,
    n: usize,
) -> Result<PagraphCouplingReport> {
    validate(seed_degrees, m, alpha)?;
    if n == 0 {
        return Err(Error::parameter("n must be at least 1"));
    }
    if n > 4 || 1 + (n - 1) * m > oracle::MAX_ENUMERATION_N {
        return Err(Error::Refused(format!(
            "coupling certificate needs n <= 4 and 1 + (n-1) m <= {}",
            oracle::MAX_ENUMERATION_N
        )));
    }
    let direct = direct_degree_distribution(seed_degrees, m, alpha, n);
    let merged = merged_pat_distribution(seed_degrees, m, alpha, n)?;
    let mut keys: Vec<&Vec<u32>> = direct.keys().chain(merged.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut max_abs_diff = 0.0f64;
    for key in keys {
        let a = direct.get(key).copied().unwrap_or(0.0);
        let b = merged.get(key).copied().unwrap_or(0.0);
        max_abs_diff = max_abs_diff.max((a - b).abs());
    }
    let direct_total: f64 = direct.values().sum();
    let merged_total: f64 = merged.values().sum();
    let pass = max_abs_diff <= PAGRAPH_COUPLING_TOLERANCE
        && (direct_total - 1.0).abs() <= PAGRAPH_COUPLING_TOLERANCE
        && (merged_total - 1.0).abs() <= PAGRAPH_COUPLING_TOLERANCE;
    Ok(PagraphCouplingReport {
        n,
        outcome_count: direct.len().max(merged.len()),
        max_abs_diff,
        direct_total,
        merged_total,
        pass,
    })
}
