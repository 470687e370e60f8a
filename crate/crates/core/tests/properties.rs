//! Property tests for the structural invariants: reconstruction round-trips,
//! exact power-law normalization, tree bookkeeping, probability-mass
//! conservation in the oracle, and the ultrametric inequality.

use proptest::prelude::*;

use wrtlab::limits::{beta_mixed_moment, beta_moment};
use wrtlab::oracle;
use wrtlab::sequences::{BetaCoupling, FitnessSequence, WeightSequence};
use wrtlab::stats;
use wrtlab::trees::{self, GrowthTrace};

fn arb_betas() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![3 => 1e-6f64..=1.0, 1 => Just(1.0)],
        1..60,
    )
}

fn arb_trace() -> impl Strategy<Value = Vec<u32>> {
    // choices[j] in 1..=j+1
    prop::collection::vec(0.0f64..1.0, 1..40).prop_map(|us| {
        us.iter()
            .enumerate()
            .map(|(j, u)| 1 + (u * (j + 1) as f64) as u32)
            .collect()
    })
}

proptest! {
    #[test]
    fn beta_weight_round_trip(betas in arb_betas()) {
        let coupling = BetaCoupling::from_betas(betas.clone()).unwrap();
        let weights = coupling.weights().unwrap();
        prop_assert_eq!(weights.cum_w(1), 1.0);
        for k in 1..=betas.len() {
            let recovered = (weights.log_cum_w(k) - weights.log_cum_w(k + 1)).exp();
            prop_assert!((recovered - betas[k - 1]).abs() <= 1e-12 * betas[k - 1]);
        }
        // reconstruction contract: W_n - W_{n-1} = w_n exactly (on the
        // linear scale, wherever it is representable)
        for nidx in 2..=weights.len() {
            if weights.cum_w(nidx).is_finite() {
                prop_assert_eq!(
                    weights.cum_w(nidx) - weights.cum_w(nidx - 1),
                    weights.w(nidx)
                );
            }
        }
    }

    #[test]
    fn power_weights_normalize_exactly(
        gamma in 0.05f64..3.0,
        c in 0.01f64..50.0,
        n in 1usize..300,
    ) {
        let s = WeightSequence::power(gamma, c, n).unwrap();
        for i in 1..=n {
            prop_assert_eq!(s.cum_w(i) / (c * (i as f64).powf(gamma)), 1.0);
        }
    }

    #[test]
    fn trace_tree_bookkeeping(choices in arb_trace()) {
        let trace = GrowthTrace::new(choices).unwrap();
        let tree = trace.to_tree();
        let n = tree.len();
        // handshake
        let total: u32 = trees::degrees(&tree).iter().sum();
        prop_assert_eq!(total as usize, n - 1);
        // parents precede children and heights chain
        for i in 2..=n {
            let p = tree.parent(i).unwrap().unwrap();
            prop_assert!(p < i);
            prop_assert_eq!(tree.height_of(i), tree.height_of(p) + 1);
        }
        // child lists sorted by arrival
        for i in 1..=n {
            let ch = tree.children(i).unwrap();
            prop_assert!(ch.windows(2).all(|w| w[0] < w[1]));
        }
        // profile mass
        let prof = stats::profile(&tree);
        prop_assert_eq!(prof.total() as usize, n);
        prop_assert_eq!(prof.counts[0], 1);
        prop_assert!(*prof.counts.last().unwrap() >= 1);
    }

    #[test]
    fn d_exp_is_an_ultrametric(choices in arb_trace(), picks in prop::collection::vec(0.0f64..1.0, 3)) {
        let trace = GrowthTrace::new(choices).unwrap();
        let tree = trace.to_tree();
        let n = tree.len();
        let v: Vec<usize> = picks.iter().map(|u| 1 + (u * n as f64) as usize).collect();
        let (i, j, k) = (v[0].min(n), v[1].min(n), v[2].min(n));
        let dij = trees::d_exp(&tree, i, j).unwrap();
        let dji = trees::d_exp(&tree, j, i).unwrap();
        prop_assert_eq!(dij, dji);
        prop_assert_eq!(trees::d_exp(&tree, i, i).unwrap(), 0.0);
        let dik = trees::d_exp(&tree, i, k).unwrap();
        let dkj = trees::d_exp(&tree, k, j).unwrap();
        prop_assert!(dij <= dik.max(dkj) + 1e-15);
    }

    #[test]
    fn subtree_members_partition(choices in arb_trace()) {
        let tree = GrowthTrace::new(choices).unwrap().to_tree();
        let n = tree.len();
        prop_assert_eq!(trees::subtree_members(&tree, 1).unwrap().len(), n);
        let root_children = tree.children(1).unwrap().to_vec();
        let mut covered = 1usize;
        for c in root_children {
            covered += trees::subtree_members(&tree, c as usize).unwrap().len();
        }
        prop_assert_eq!(covered, n);
    }

    #[test]
    fn mixed_moment_marginalizes(a in 0.1f64..50.0, b in 0.0f64..20.0, p in 0u32..6) {
        let lhs = beta_mixed_moment(a, b, p, 0).unwrap();
        let rhs = beta_moment(a, b, p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-30));
    }

    #[test]
    fn mixed_moment_binomial_expansion(a in 0.1f64..20.0, b in 0.1f64..20.0, p in 0u32..4) {
        // E[beta^p] = sum_q C(p, q) (-1)^q ... checked the other way:
        // E[beta^p (1-beta)] = E[beta^p] - E[beta^{p+1}]
        let lhs = beta_mixed_moment(a, b, p, 1).unwrap();
        let rhs = beta_moment(a, b, p).unwrap() - beta_moment(a, b, p + 1).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn oracle_masses_sum_to_one(
        a0 in -0.9f64..3.0,
        pattern in prop::collection::vec(0u32..4, 1..4),
        n in 2usize..6,
    ) {
        prop_assume!(pattern.iter().any(|&b| b > 0));
        let pattern: Vec<f64> = pattern.iter().map(|&b| b as f64).collect();
        let fitness = FitnessSequence::periodic(a0, &pattern, n).unwrap();
        let report = oracle::certify_theorem1(&fitness, n).unwrap();
        prop_assert!(report.pass, "{:?}", report);
    }

    #[test]
    fn rate_function_root_is_positive_zero(gamma in 0.05f64..20.0) {
        let z = stats::solve_z_plus(gamma).unwrap();
        prop_assert!(z > 0.0);
        prop_assert!(stats::f_gamma(gamma, z).abs() < 1e-9);
        prop_assert!(stats::f_gamma(gamma, z - 1e-6) > 0.0);
        if gamma > 1.0 {
            let zm = stats::z_minus(gamma);
            prop_assert!(zm < 0.0 && zm.is_finite());
            prop_assert!(stats::f_gamma(gamma, zm) > 0.0);
        }
    }

    #[test]
    fn enumeration_is_exhaustive_and_distinct(n in 1usize..7) {
        let traces = oracle::enumerate_traces(n).unwrap();
        let expect: usize = (1..n.max(1)).product();
        prop_assert_eq!(traces.len(), expect);
        let set: std::collections::HashSet<_> =
            traces.iter().map(|t| t.choices().to_vec()).collect();
        prop_assert_eq!(set.len(), traces.len());
    }
}
