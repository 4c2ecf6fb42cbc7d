//! Closed forms against independent oracles: exhaustive enumeration, path
//! enumeration, sampling statistics and Taylor expansions.

use treepin_core::closedform::{beta_c, mean_g, second_moment_hd, HomogeneousTree};
use treepin_core::disorder::{DisorderSpec, NodeAddress};
use treepin_core::math::mean_and_sd;
use treepin_core::rng::node_uniform;
use treepin_core::treesim::{
    exact_expectation_oracle, log_partition_det, ExpectationTarget, Realization,
};
use treepin_core::{DefectKind, ModelSpec};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

#[test]
fn moments_match_enumeration() {
    for bulk in [
        DisorderSpec::bernoulli(0.5, -1.0, 1.0).unwrap(),
        DisorderSpec::bernoulli(0.3, 0.0, 2.0).unwrap(),
    ] {
        let hd = ModelSpec::homogeneous(2, bulk.clone()).unwrap();
        let st =
            ModelSpec::new(2, 1, bulk.clone(), DefectKind::SubtreeConstant { u: 0.7 }).unwrap();
        for n in 1..=3 {
            for beta in [0.3, 1.0, 2.0] {
                let first = exact_expectation_oracle(&hd, beta, n, 1, ExpectationTarget::Partition)
                    .unwrap();
                let annealed = n as f64 * (bulk.log_mgf(beta) + 2f64.ln());
                assert!(rel(first, annealed) < 1e-12);
                let second =
                    exact_expectation_oracle(&hd, beta, n, 2, ExpectationTarget::Partition)
                        .unwrap();
                assert!(rel(second, second_moment_hd(&bulk, 2, beta, n).unwrap()) < 1e-12);
                for k in 0..n {
                    let g =
                        exact_expectation_oracle(&st, beta, n, 1, ExpectationTarget::ExitSum { k })
                            .unwrap();
                    assert!(rel(g, mean_g(&bulk, 2, 1, beta, k, n).unwrap()) < 1e-12);
                }
            }
        }
    }
}

#[test]
fn det_partition_matches_path_enumeration() {
    for (d, d1) in [(2, 1), (3, 1), (3, 2), (4, 3)] {
        for n in 1..=10u32 {
            if (d as u64).pow(n) > 1_000_000 {
                break;
            }
            for (beta, u) in [(0.5, -1.0), (1.3, 0.4), (2.0, 2.5)] {
                let m = ModelSpec::deterministic(d, d1, u).unwrap();
                let brute = Realization::new(m, 0, n)
                    .brute_force_log_partition(beta)
                    .unwrap();
                let closed = log_partition_det(beta, u, d, d1, n).unwrap();
                assert!((brute - closed).abs() < 1e-9, "d={d} d1={d1} n={n}");
            }
        }
    }
}

#[test]
fn gaussian_beta_c_scales_with_sigma() {
    for d in [2u32, 3, 4] {
        for sigma in [0.5, 1.0, 2.0] {
            let bulk = DisorderSpec::gaussian(0.3, sigma).unwrap();
            let bc = beta_c(&bulk, d).unwrap().beta_c.value();
            let want = (2.0 * (d as f64).ln()).sqrt() / sigma;
            assert!(
                (bc - want).abs() < 1e-8,
                "d={d} sigma={sigma}: {bc} vs {want}"
            );
        }
    }
}

#[test]
fn bounded_disorder_with_heavy_top_atom_has_no_transition() {
    // P(V = sup) = 0.4: below 1/2, at least 1/3
    let bulk = DisorderSpec::bernoulli(0.4, -1.0, 1.0).unwrap();
    assert!(beta_c(&bulk, 2).unwrap().beta_c.finite().is_some());
    assert!(beta_c(&bulk, 3).unwrap().beta_c.finite().is_none());
}

#[test]
fn phi_small_beta_expansion() {
    // phi = log d + beta mu + beta^2 sigma^2 / 2 + O(beta^3) below beta_c
    for bulk in [
        DisorderSpec::gaussian(0.2, 1.5).unwrap(),
        DisorderSpec::bernoulli(0.4, -1.0, 2.0).unwrap(),
    ] {
        let tree = HomogeneousTree::new(&bulk, 3).unwrap();
        let (mu, var) = bulk.mean_var();
        for beta in [1e-3, 1e-2] {
            let taylor = 3f64.ln() + beta * mu + 0.5 * beta * beta * var;
            assert!((tree.phi(beta) - taylor).abs() < 10.0 * beta.powi(3));
        }
    }
}

#[test]
fn node_uniforms_pass_chi_square() {
    const BINS: usize = 20;
    let mut counts = [0u64; BINS];
    let total = 200_000u64;
    for i in 0..total {
        let u = node_uniform(17, NodeAddress::new(12, i + 1));
        assert!(u > 0.0 && u < 1.0);
        counts[(u * BINS as f64) as usize] += 1;
    }
    let expect = total as f64 / BINS as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expect).powi(2) / expect)
        .sum();
    // 0.999 quantile of chi-square with 19 degrees of freedom
    assert!(chi2 < 43.82, "chi2 = {chi2}");
}

#[test]
fn sampled_moments_match_law() {
    let count = 100_000u64;
    for bulk in [
        DisorderSpec::gaussian(-0.5, 2.0).unwrap(),
        DisorderSpec::bernoulli(0.25, -1.0, 3.0).unwrap(),
    ] {
        let xs: Vec<f64> = (0..count)
            .map(|i| bulk.sample_node(99, NodeAddress::new(20, i + 1)))
            .collect();
        let (m, sd) = mean_and_sd(&xs);
        let (mu, var) = bulk.mean_var();
        assert!((m - mu).abs() < 5.0 * var.sqrt() / (count as f64).sqrt());
        assert!((sd - var.sqrt()).abs() < 0.02 * var.sqrt());
    }
}
