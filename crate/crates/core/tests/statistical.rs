//! Fixed-seed statistical invariants that go beyond the acceptance criteria:
//! trace-distribution equality between the growth routes, urn martingale
//! means, limit-chain sampler moments, and the Dirichlet seed split of the
//! multigraph model. Each test reports its statistic on failure.

use rayon::prelude::*;

use wrtlab::check;
use wrtlab::limits;
use wrtlab::oracle;
use wrtlab::pagraph;
use wrtlab::rng::{replicate_rng, rng_from_words};
use wrtlab::sequences::{BetaCoupling, FitnessSequence, WeightSequence};
use wrtlab::stats;
use wrtlab::trees;
use wrtlab::urns;

/// Empirical mean of each coupling Beta stays within 4 standard errors of
/// its shape-ratio mean.
#[test]
fn coupling_beta_means() {
    let replicates = 100_000u64;
    let fitness = FitnessSequence::constant(0.5, 2.0, 5).unwrap();
    let sums: Vec<[f64; 4]> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(901, r);
            let c = BetaCoupling::sample(&fitness, 5, &mut rng).unwrap();
            [c.beta(1), c.beta(2), c.beta(3), c.beta(4)]
        })
        .collect();
    for k in 1..=4usize {
        let samples: Vec<f64> = sums.iter().map(|s| s[k - 1]).collect();
        let a = fitness.cum_a(k) + k as f64;
        let b = fitness.a(k + 1);
        let out = check::mean_within_se(&format!("beta_{k}"), &samples, a / (a + b), 4.0);
        assert!(out.pass, "{}", out.describe());
    }
}

/// Log-space cumulative weights stay finite out to n = 1e6 even for fitness
/// b = 10 (the strongest growth the crate claims to support routinely).
#[test]
fn log_space_weights_to_one_million() {
    let n = 1_000_000;
    let fitness = FitnessSequence::constant(1.0, 10.0, n).unwrap();
    let mut rng = rng_from_words(&[902]);
    let coupling = BetaCoupling::sample(&fitness, n, &mut rng).unwrap();
    let weights = coupling.weights().unwrap();
    let max_log = (1..=n)
        .map(|i| weights.log_cum_w(i).abs())
        .fold(0.0f64, f64::max);
    assert!(max_log.is_finite());
    // W_n ~ Z n^{10/11}
    let profile = wrtlab::sequences::estimate_weight_profile(&weights).unwrap();
    assert!(
        (profile.gamma_hat - 10.0 / 11.0).abs() < 0.02,
        "gamma_hat {}",
        profile.gamma_hat
    );
}

/// P[J_3 = 1] = 2/3 for unit fitness, checked over 1e6 runs.
#[test]
fn pat_exchangeability_at_n3() {
    let runs = 1_000_000u64;
    let fitness = FitnessSequence::constant(1.0, 1.0, 3).unwrap();
    let hits: u64 = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(903, r);
            let (_, trace) = trees::grow_pat(&fitness, 3, &mut rng).unwrap();
            (trace.choice(3) == 1) as u64
        })
        .sum();
    let out = check::frequency_within("P[J_3 = 1]", hits, runs, 2.0 / 3.0, 4.0);
    assert!(out.pass, "{}", out.describe());
}

fn trace_index(trace: &trees::GrowthTrace, all: &[trees::GrowthTrace]) -> usize {
    all.iter()
        .position(|t| t == trace)
        .expect("trace enumerable")
}

/// The three growth routes (direct attachment, Beta-sampled weights, nested
/// urns in both modes) produce the same trace distribution at n = 5: each is
/// chi-square tested against the exact oracle probabilities, the two primary
/// routes over 1e6 runs and the urn-driven modes over a lighter 2.5e5.
#[test]
fn trace_distribution_equality_across_routes() {
    let n = 5usize;
    let fitness = FitnessSequence::constant(1.0, 1.0, n).unwrap();
    let all = oracle::enumerate_traces(n).unwrap();
    let probs: Vec<f64> = all
        .iter()
        .map(|t| oracle::pat_trace_probability(&fitness, t).unwrap())
        .collect();

    let count = |salt: u64, runs: u64, grow: &(dyn Fn(&mut wrtlab::rng::ChaCha8Rng) -> trees::GrowthTrace
                 + Sync)|
     -> Vec<u64> {
        let counts = (0..runs)
            .into_par_iter()
            .fold(
                || vec![0u64; all.len()],
                |mut acc, r| {
                    let mut rng = rng_from_words(&[904, salt, r]);
                    let trace = grow(&mut rng);
                    acc[trace_index(&trace, &all)] += 1;
                    acc
                },
            )
            .reduce(
                || vec![0u64; all.len()],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        counts
    };

    let direct = count(1, 1_000_000, &|rng| {
        trees::grow_pat(&fitness, n, rng).unwrap().1
    });
    let mixture = count(2, 1_000_000, &|rng| {
        let coupling = BetaCoupling::sample(&fitness, n, rng).unwrap();
        let weights = coupling.weights().unwrap();
        trees::grow_wrt(&weights, n, rng).unwrap().1
    });
    let exchangeable = count(3, 250_000, &|rng| {
        urns::grow_pat_via_urns(&fitness, n, rng, urns::UrnGrowthMode::Exchangeable)
            .unwrap()
            .1
    });
    let definetti = count(4, 250_000, &|rng| {
        urns::grow_pat_via_urns(&fitness, n, rng, urns::UrnGrowthMode::DeFinetti)
            .unwrap()
            .1
    });

    for (label, counts) in [
        ("direct", &direct),
        ("beta-mixture", &mixture),
        ("exchangeable urns", &exchangeable),
        ("de Finetti urns", &definetti),
    ] {
        let out = check::chi_square_test(label, counts, &probs, 0.001);
        assert!(out.pass, "{}", out.describe());
    }
}

/// Empirical trace frequencies of a deterministic-weight tree match the
/// closed-form probabilities within 4 sigma at n = 4 over 1e6 runs.
#[test]
fn wrt_trace_frequencies_match_probabilities() {
    let n = 4usize;
    let runs = 1_000_000u64;
    let weights = WeightSequence::from_weights(vec![1.0, 2.0, 0.5, 1.5]).unwrap();
    let all = oracle::enumerate_traces(n).unwrap();
    let counts: Vec<u64> = {
        let mut acc = vec![0u64; all.len()];
        let partial: Vec<Vec<u64>> = (0..runs)
            .into_par_iter()
            .fold(
                || vec![0u64; all.len()],
                |mut acc, r| {
                    let mut rng = replicate_rng(905, r);
                    let (_, trace) = trees::grow_wrt(&weights, n, &mut rng).unwrap();
                    acc[trace_index(&trace, &all)] += 1;
                    acc
                },
            )
            .collect();
        for p in partial {
            for (a, b) in acc.iter_mut().zip(p) {
                *a += b;
            }
        }
        acc
    };
    for (i, trace) in all.iter().enumerate() {
        let p = oracle::wrt_trace_probability(&weights, trace).unwrap();
        let out = check::frequency_within(&format!("trace {i}"), counts[i], runs, p, 4.0);
        assert!(out.pass, "{}", out.describe());
    }
}

/// The red proportion of the time-dependent urn is a martingale: its mean
/// stays at a/(a+b) for several (a, b, s) configurations.
#[test]
fn urn_martingale_mean_over_configurations() {
    let replicates = 100_000u64;
    for (case, (a, b, steps)) in [
        (0u64, (1.0, 1.0, vec![1.0; 200])),
        (1, (2.0, 1.0, vec![0.5; 200])),
        (2, (0.5, 3.0, (1..=200).map(|i| (i % 4) as f64).collect())),
    ]
    .into_iter()
    {
        let samples: Vec<f64> = (0..replicates)
            .into_par_iter()
            .map(|r| {
                let mut rng = rng_from_words(&[906, case, r]);
                urns::run_time_dependent_urn(a, b, 1, &steps, &mut rng)
                    .unwrap()
                    .final_proportion()
            })
            .collect();
        let out = check::mean_within_se(
            &format!("urn proportion (case {case})"),
            &samples,
            a / (a + b),
            4.0,
        );
        assert!(out.pass, "{}", out.describe());
    }
}

/// With unit reinforcements and a = b = 1 the limiting proportion is uniform
/// on (0, 1): KS at N = 1e4 over 1e4 trajectories.
#[test]
fn classical_polya_limit_is_uniform() {
    let steps = vec![1.0; 10_000];
    let mut samples: Vec<f64> = (0..10_000u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(907, r);
            urns::run_time_dependent_urn(1.0, 1.0, 1, &steps, &mut rng)
                .unwrap()
                .final_proportion()
        })
        .collect();
    let out = check::ks_test("R_inf vs U(0,1)", &mut samples, |x| x.clamp(0.0, 1.0), 0.001);
    assert!(out.pass, "{}", out.describe());
}

/// Marginal moments p = 1, 2, 3 of the sampled Mittag-Leffler chain match
/// the closed-form moments within 5%.
#[test]
fn mlmc_sampler_moments() {
    let (alpha, theta) = (0.5, 0.5);
    let replicates = 10_000u64;
    let truncation = 10_000;
    let sums: Vec<[f64; 3]> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(908, r);
            let s = limits::sample_mlmc(alpha, theta, 1, truncation, &mut rng).unwrap();
            let v = s.chain[0];
            [v, v * v, v * v * v]
        })
        .collect();
    for p in 1..=3u32 {
        let mean =
            sums.iter().map(|s| s[(p - 1) as usize]).sum::<f64>() / replicates as f64;
        let expect = limits::ml_moment(alpha, theta, p).unwrap();
        let out = check::within_relative(&format!("ML moment p={p}"), mean, expect, 0.05);
        assert!(out.pass, "{}", out.describe());
    }
}

/// Backward ratio M_k / M_{k+1} of the sampled chain follows
/// Beta((theta+k-1)/alpha + 1, 1/alpha - 1).
#[test]
fn mlmc_backward_transition_law() {
    let (alpha, theta) = (0.5, 0.5);
    let k = 2usize;
    let mut samples: Vec<f64> = (0..10_000u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(909, r);
            let s = limits::sample_mlmc(alpha, theta, k + 1, 2_000, &mut rng).unwrap();
            s.chain[k - 1] / s.chain[k]
        })
        .collect();
    let shape_a = (theta + k as f64 - 1.0) / alpha + 1.0;
    let shape_b = 1.0 / alpha - 1.0;
    let out = check::ks_test(
        "backward ratio vs Beta law",
        &mut samples,
        |x| check::beta_cdf(shape_a, shape_b, x),
        0.001,
    );
    assert!(out.pass, "{}", out.describe());
}

/// Chain samples are backwards-independent: the correlation between M_{k+1}
/// and each earlier beta stays within 4/sqrt(R).
#[test]
fn limit_chain_backward_independence() {
    let replicates = 10_000usize;
    let fitness = FitnessSequence::constant(1.0, 1.0, 4_000).unwrap();
    let draws: Vec<(f64, [f64; 3])> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(910, r);
            let s = limits::sample_limit_chain(&fitness, 1.0, 4, 4_000, &mut rng).unwrap();
            (s.chain[3], [s.betas[0], s.betas[1], s.betas[2]])
        })
        .collect();
    let mean_m = draws.iter().map(|d| d.0).sum::<f64>() / replicates as f64;
    let sd_m = (draws.iter().map(|d| (d.0 - mean_m).powi(2)).sum::<f64>()
        / replicates as f64)
        .sqrt();
    for j in 0..3 {
        let mean_b = draws.iter().map(|d| d.1[j]).sum::<f64>() / replicates as f64;
        let sd_b = (draws.iter().map(|d| (d.1[j] - mean_b).powi(2)).sum::<f64>()
            / replicates as f64)
            .sqrt();
        let cov = draws
            .iter()
            .map(|d| (d.0 - mean_m) * (d.1[j] - mean_b))
            .sum::<f64>()
            / replicates as f64;
        let rho = cov / (sd_m * sd_b);
        assert!(
            rho.abs() < 4.0 / (replicates as f64).sqrt(),
            "correlation with beta_{}: {rho}",
            j + 1
        );
    }
}

/// Doubling the truncation moves the limit-weight estimate only by its
/// stated small-power error.
#[test]
fn limit_weights_truncation_self_consistency() {
    let fitness = FitnessSequence::constant(1.0, 1.0, 100_000).unwrap();
    let reps = 40u64;
    let diffs: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(911, r);
            let coupling = BetaCoupling::sample(&fitness, 100_000, &mut rng).unwrap();
            let small = wrtlab::sequences::limit_weights(&coupling, 1.0, 10_000).unwrap();
            let large = wrtlab::sequences::limit_weights(&coupling, 1.0, 100_000).unwrap();
            (small[0] - large[0]).abs() / large[0]
        })
        .collect();
    let mean_rel = diffs.iter().sum::<f64>() / reps as f64;
    // O(N^{-1/2}) scale at N = 1e4 is about 1%
    assert!(mean_rel < 0.05, "relative drift {mean_rel}");
}

/// Mean of m_hat_1 over replicate couplings approaches the ML(1/2,1/2) mean.
#[test]
fn limit_weights_first_component_mean() {
    let fitness = FitnessSequence::constant(1.0, 1.0, 20_000).unwrap();
    let reps = 2_000u64;
    let samples: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(912, r);
            let coupling = BetaCoupling::sample(&fitness, 20_000, &mut rng).unwrap();
            wrtlab::sequences::limit_weights(&coupling, 1.0, 20_000).unwrap()[0]
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / reps as f64;
    let out = check::within_relative(
        "mean m_1 vs sqrt(pi)",
        mean,
        limits::ml_moment(0.5, 0.5, 1).unwrap(),
        0.03,
    );
    assert!(out.pass, "{}", out.describe());
}

/// Empirical root-degree means match the exact expectation sum for the first
/// ten vertices at n = 1e3 over 1e5 replicates.
#[test]
fn degree_expectation_first_ten_vertices() {
    let n = 1_000usize;
    let replicates = 100_000u64;
    let weights = WeightSequence::power(0.5, 1.0, n).unwrap();
    let sums: Vec<f64> = (0..replicates)
        .into_par_iter()
        .fold(
            || vec![0.0f64; 10],
            |mut acc, r| {
                let mut rng = replicate_rng(913, r);
                let degs = trees::grow_wrt_degrees(&weights, n, &mut rng).unwrap();
                for (k, slot) in acc.iter_mut().enumerate() {
                    *slot += degs[k] as f64;
                }
                acc
            },
        )
        .reduce(
            || vec![0.0f64; 10],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    for k in 1..=10usize {
        let mean = sums[k - 1] / replicates as f64;
        let expect = stats::degree_expectation(&weights, k, n).unwrap();
        // Bernoulli-sum variance is bounded by the expectation
        let se = (expect / replicates as f64).sqrt();
        assert!(
            (mean - expect).abs() < 4.0 * se,
            "k={k}: mean {mean} expect {expect}"
        );
    }
}

/// deg(v_2) of the (m, alpha) multigraph at n = 1e3 has the same law as the
/// coupled tree block head: two-sample chi-square over 1e6 runs per side.
#[test]
fn pagraph_coupling_statistical_at_n1000() {
    let (m, alpha) = (2usize, 0.0);
    let seed_degrees = [1u32, 1];
    let n = 1_000usize;
    let runs = 1_000_000u64;
    let bins = 64usize;

    let graph_counts: Vec<u64> = (0..runs)
        .into_par_iter()
        .fold(
            || vec![0u64; bins],
            |mut acc, r| {
                let mut rng = rng_from_words(&[914, 1, r]);
                let degs = pagraph::grow_pa_degrees(&seed_degrees, m, alpha, n, &mut rng).unwrap();
                let added = (degs[seed_degrees.len()] as usize).saturating_sub(m);
                acc[added.min(bins - 1)] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; bins],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    let size = 1 + (n - 1) * m;
    let fitness = pagraph::pagraph_fitness(&seed_degrees, m, alpha, size).unwrap();
    let tree_counts: Vec<u64> = (0..runs)
        .into_par_iter()
        .fold(
            || vec![0u64; bins],
            |mut acc, r| {
                let mut rng = rng_from_words(&[914, 2, r]);
                let degs = trees::grow_pat_degrees(&fitness, size, &mut rng).unwrap();
                acc[(degs[m] as usize).min(bins - 1)] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; bins],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    let out = check::chi_square_two_sample(
        "deg(v_2) graph vs merged tree",
        &graph_counts,
        &tree_counts,
        0.001,
    );
    assert!(out.pass, "{}", out.describe());
}

/// Seed-degree split fractions match the Dirichlet(d_i + alpha) moments.
#[test]
fn pagraph_dirichlet_split_moments() {
    let seed_degrees = [1u32, 2];
    let (m, alpha) = (2usize, 0.5);
    let n = 100_000usize;
    let replicates = 10_000usize;
    let report = pagraph::coupled_degree_limits(
        &seed_degrees,
        m,
        alpha,
        n,
        replicates,
        1,
        915,
    )
    .unwrap();
    let total: f64 = seed_degrees.iter().map(|&d| d as f64 + alpha).sum();
    for (i, &d) in seed_degrees.iter().enumerate() {
        let a_i = d as f64 + alpha;
        let mean = a_i / total;
        let var = mean * (1.0 - mean) / (total + 1.0);
        let se_mean = (var / replicates as f64).sqrt();
        assert!(
            (report.seed_split_mean[i] - mean).abs() < 4.0 * se_mean,
            "split mean {i}: {} vs {mean}",
            report.seed_split_mean[i]
        );
        // variance of the sample variance ~ 2 var^2 / R for a smooth law
        let se_var = var * (2.0 / replicates as f64).sqrt() * 2.0;
        assert!(
            (report.seed_split_var[i] - var).abs() < 4.0 * se_var,
            "split var {i}: {} vs {var}",
            report.seed_split_var[i]
        );
    }
}

/// Rescaled degrees of a power-weight tree divided by their predicted limit
/// w_k / (C (1 - gamma)) settle within 5% of 1 for the first vertices.
#[test]
fn degree_scaling_ratio_for_power_weights() {
    let (gamma, c) = (0.5f64, 1.0f64);
    let n = 10_000usize;
    let replicates = 200usize;
    let weights = WeightSequence::power(gamma, c, n).unwrap();
    let trees_grown: Vec<trees::PlaneTree> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(917, r);
            trees::grow_wrt(&weights, n, &mut rng).unwrap().0
        })
        .collect();
    let report =
        stats::degree_scaling_report(&trees_grown, &weights, gamma, c, 5, 3.0).unwrap();
    for (k, ratio) in report.ratio_to_limit.iter().enumerate() {
        let out = check::within_relative(&format!("scaled degree ratio k={}", k + 1), *ratio, 1.0, 0.05);
        assert!(out.pass, "{}", out.describe());
    }
    assert!(report.lp_norm.is_finite() && report.lp_norm > 0.0);
    assert!(report.scaled_max_degree >= report.scaled_mean[0]);
}

/// Exponential tilts of the weighted profile stay well-behaved up to z_+ at
/// large n (no overflow in the log-sum-exp path).
#[test]
fn laplace_transforms_stay_finite_near_z_plus() {
    let n = 1_000_000usize;
    let weights = WeightSequence::power(1.0, 1.0, n).unwrap();
    let mut rng = rng_from_words(&[916]);
    let (tree, _) = trees::grow_wrt(&weights, n, &mut rng).unwrap();
    let z_plus = stats::solve_z_plus(1.0).unwrap();
    for z in [0.0, 0.5, z_plus] {
        let v = stats::normalized_profile_transform(&tree, 1.0, z);
        assert!(v.is_finite() && v > 0.0, "z={z}: {v}");
        let m = stats::profile_martingale(&tree, &weights, z).unwrap();
        assert!(m.is_finite() && m > 0.0, "z={z}: martingale {m}");
    }
}
