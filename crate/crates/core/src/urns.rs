//! Pólya urns: the time-dependent two-colour urn, the nested-urn growth of a
//! preferential-attachment tree (exchangeable draws or de Finetti coin
//! flips), and the urn with immigration whose red count tracks the root
//! degree of a preferential-attachment tree.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{beta_draw, replicate_rng};
use crate::sequences::FitnessSequence;
use crate::trees::{GrowthTrace, PlaneTree};

/// Red mass and total mass of a two-colour urn along its evolution. Masses
/// are real numbers; integrality is never assumed.
#[derive(Debug, Clone)]
pub struct UrnTrajectory {
    pub times: Vec<u64>,
    pub red: Vec<f64>,
    pub total: Vec<f64>,
}

impl UrnTrajectory {
    pub fn final_red(&self) -> f64 {
        *self.red.last().expect("trajectory is never empty")
    }

    pub fn final_proportion(&self) -> f64 {
        self.final_red() / self.total.last().expect("trajectory is never empty")
    }

    /// Write rows `replicate,n,red,total` (with that exact header when
    /// `header` is set).
    pub fn write_csv(
        &self,
        out: &mut impl std::io::Write,
        replicate: u64,
        header: bool,
    ) -> std::io::Result<()> {
        if header {
            writeln!(out, "replicate,n,red,total")?;
        }
        for i in 0..self.times.len() {
            writeln!(
                out,
                "{},{},{},{}",
                replicate, self.times[i], self.red[i], self.total[i]
            )?;
        }
        Ok(())
    }
}

/// Run the time-dependent urn started at time `start_k` with `a` red and `b`
/// black mass: at step i the drawn colour gains mass `s[i]`. The proportion
/// of red is a bounded martingale.
pub fn run_time_dependent_urn(
    a: f64,
    b: f64,
    start_k: u64,
    s: &[f64],
    rng: &mut impl Rng,
) -> Result<UrnTrajectory> {
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::parameter("urn masses must be non-negative"));
    }
    if a + b <= 0.0 {
        return Err(Error::parameter("a + b must be positive"));
    }
    if s.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::parameter("reinforcements must be non-negative"));
    }
    let mut red = a;
    let mut total = a + b;
    let mut traj = UrnTrajectory {
        times: Vec::with_capacity(s.len() + 1),
        red: Vec::with_capacity(s.len() + 1),
        total: Vec::with_capacity(s.len() + 1),
    };
    traj.times.push(start_k);
    traj.red.push(red);
    traj.total.push(total);
    for (i, &gain) in s.iter().enumerate() {
        if rng.random::<f64>() * total < red {
            red += gain;
        }
        total += gain;
        traj.times.push(start_k + i as u64 + 1);
        traj.red.push(red);
        traj.total.push(total);
    }
    Ok(traj)
}

/// How the downward pass resolves each "attach to u_{k+1} or continue below"
/// decision when growing a preferential-attachment tree through its nested
/// urns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UrnGrowthMode {
    /// Draw from the current state of urn k.
    Exchangeable,
    /// Sample beta_k once, then flip independent coins of bias beta_k.
    DeFinetti,
}

/// Grow a preferential-attachment tree by the downward sequential procedure:
/// to place vertex m+1, first test u_m, then u_{m-1}, and so on; the decision
/// at level k+1 is driven either by urn k (whose state is the pair of
/// cumulative fitness-plus-degree masses) or by a beta_k-biased coin. Only
/// urns actually reached by a pass are materialized.
pub fn grow_pat_via_urns(
    fitness: &FitnessSequence,
    n: usize,
    rng: &mut impl Rng,
    mode: UrnGrowthMode,
) -> Result<(PlaneTree, GrowthTrace)> {
    if n == 0 {
        return Err(Error::parameter("n must be at least 1"));
    }
    if fitness.len() < n {
        return Err(Error::Range("fitness sequence too short".into()));
    }
    let mut tree = PlaneTree::root_only();
    let mut trace = GrowthTrace::empty();
    // urn k (1-based) lives at index k-1: (red, total) = (W_k, W_{k+1})
    let mut urns: Vec<(f64, f64)> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    while tree.len() < n {
        let m = tree.len();
        let parent = if m == 1 {
            1
        } else {
            let top = m - 1;
            match mode {
                UrnGrowthMode::Exchangeable => {
                    if urns.len() < top {
                        // first touch: state of urn `top` right after time top+1
                        let k = top as f64;
                        urns.push((fitness.cum_a(top) + k, fitness.cum_a(top + 1) + k));
                    }
                    let mut parent = 1;
                    for j in (1..=top).rev() {
                        let (red, total) = urns[j - 1];
                        if rng.random::<f64>() * total >= red {
                            parent = j + 1;
                            break;
                        }
                    }
                    // settle the pass into the urn states
                    for j in parent.max(2) - 1..=top {
                        if j >= parent {
                            urns[j - 1].0 += 1.0;
                            urns[j - 1].1 += 1.0;
                        } else {
                            urns[j - 1].1 += 1.0;
                        }
                    }
                    parent
                }
                UrnGrowthMode::DeFinetti => {
                    if betas.len() < top {
                        let k = top as f64;
                        betas.push(beta_draw(fitness.cum_a(top) + k, fitness.a(top + 1), rng));
                    }
                    let mut parent = 1;
                    for j in (1..=top).rev() {
                        if rng.random::<f64>() >= betas[j - 1] {
                            parent = j + 1;
                            break;
                        }
                    }
                    parent
                }
            }
        };
        tree.push_child(parent);
        trace.push(parent);
    }
    Ok((tree, trace))
}

/// Exact probability of a trace under the exchangeable nested-urn growth,
/// obtained by replaying the pass decisions against the deterministically
/// evolving urn states. Coincides with the direct preferential-attachment
/// probability by telescoping; exposed so the oracle can certify that.
pub fn exchangeable_trace_probability(
    fitness: &FitnessSequence,
    trace: &GrowthTrace,
) -> Result<f64> {
    let n = trace.tree_len();
    if fitness.len() < n {
        return Err(Error::Range("fitness sequence too short".into()));
    }
    let mut urns: Vec<(f64, f64)> = Vec::new();
    let mut prob = 1.0;
    for m in 2..=n {
        let top = m - 2;
        let parent = trace.choice(m);
        if top >= 1 {
            if urns.len() < top {
                let k = top as f64;
                urns.push((fitness.cum_a(top) + k, fitness.cum_a(top + 1) + k));
            }
            for j in (1..=top).rev() {
                let (red, total) = urns[j - 1];
                if j + 1 == parent {
                    prob *= (total - red) / total;
                    break;
                }
                prob *= red / total;
            }
            for j in parent.max(2) - 1..=top {
                if j >= parent {
                    urns[j - 1].0 += 1.0;
                    urns[j - 1].1 += 1.0;
                } else {
                    urns[j - 1].1 += 1.0;
                }
            }
        }
    }
    Ok(prob)
}

/// Urn with immigration: start with a_1 red mass; at each later time the
/// drawn colour gains one unit and a_n white mass immigrates. The red count
/// R_n is constructed as a_1 + (root out-degree of a preferential-attachment
/// tree): both processes draw "red" the same way, by testing one uniform
/// against the leading mass segment, so a shared RNG stream yields identical
/// trajectories step by step.
pub fn run_immigration_urn(
    fitness: &FitnessSequence,
    n: usize,
    rng: &mut impl Rng,
) -> Result<UrnTrajectory> {
    if n == 0 {
        return Err(Error::parameter("n must be at least 1"));
    }
    if fitness.len() < n {
        return Err(Error::Range("fitness sequence too short".into()));
    }
    let mut traj = UrnTrajectory {
        times: Vec::with_capacity(n),
        red: Vec::with_capacity(n),
        total: Vec::with_capacity(n),
    };
    let mut red = fitness.a(1);
    traj.times.push(1);
    traj.red.push(red);
    traj.total.push(red);
    for m in 2..=n {
        let total_prev = fitness.cum_a(m - 1) + (m as f64 - 2.0);
        if m == 2 {
            red += 1.0; // the first draw is red by definition
        } else if rng.random::<f64>() * total_prev < red {
            red += 1.0;
        }
        traj.times.push(m as u64);
        traj.red.push(red);
        traj.total.push(fitness.cum_a(m) + (m as f64 - 1.0));
    }
    Ok(traj)
}

/// Red counts of the immigration urn at the given strictly increasing
/// checkpoints, without materializing the full trajectory.
pub fn immigration_red_at(
    fitness: &FitnessSequence,
    checkpoints: &[usize],
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    let &last = checkpoints
        .last()
        .ok_or_else(|| Error::parameter("need at least one checkpoint"))?;
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) || checkpoints[0] == 0 {
        return Err(Error::parameter("checkpoints must be strictly increasing"));
    }
    if fitness.len() < last {
        return Err(Error::Range("fitness sequence too short".into()));
    }
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut red = fitness.a(1);
    let mut next = 0;
    if checkpoints[next] == 1 {
        out.push(red);
        next += 1;
    }
    for m in 2..=last {
        let total_prev = fitness.cum_a(m - 1) + (m as f64 - 2.0);
        if m == 2 || rng.random::<f64>() * total_prev < red {
            red += 1.0;
        }
        if next < checkpoints.len() && checkpoints[next] == m {
            out.push(red);
            next += 1;
        }
    }
    Ok(out)
}

/// Standardized fluctuations of the rescaled red count around its limit: per
/// replicate, with D_m = m^{-1/(c+1)} R_m, returns
/// n^{1/(2(c+1))} (D_far - D_n) / sqrt(D_n) where far = n * horizon_mult.
/// D_far only approximates the almost-sure limit, which biases the sample
/// variance low by about horizon_mult^{-1/(c+1)}.
pub fn immigration_fluctuation_samples(
    fitness: &FitnessSequence,
    c: f64,
    n: usize,
    horizon_mult: usize,
    replicates: usize,
    master_seed: u64,
) -> Result<Vec<f64>> {
    if !(c > 0.0) {
        return Err(Error::parameter("c must be positive"));
    }
    if horizon_mult < 10 {
        return Err(Error::parameter("horizon_mult must be at least 10"));
    }
    if n < 2 {
        return Err(Error::parameter("n must be at least 2"));
    }
    let far = n
        .checked_mul(horizon_mult)
        .ok_or_else(|| Error::parameter("horizon overflow"))?;
    if fitness.len() < far {
        return Err(Error::Range(format!(
            "fitness sequence of length {} cannot reach horizon {}",
            fitness.len(),
            far
        )));
    }
    let exponent = 1.0 / (c + 1.0);
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(master_seed, r);
            let reds = immigration_red_at(fitness, &[n, far], &mut rng)?;
            let d_n = (n as f64).powf(-exponent) * reds[0];
            let d_far = (far as f64).powf(-exponent) * reds[1];
            Ok((n as f64).powf(0.5 * exponent) * (d_far - d_n) / d_n.sqrt())
        })
        .collect()
}
