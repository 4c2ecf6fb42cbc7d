use proptest::prelude::*;
use treepin_core::closedform::{f_det, u_c_det, HomogeneousTree};
use treepin_core::disorder::DisorderSpec;
use treepin_core::treesim::Realization;
use treepin_core::{DefectKind, ModelSpec};

fn bulk_strategy() -> impl Strategy<Value = DisorderSpec> {
    prop_oneof![
        (-1.0..1.0f64, 0.2..2.0f64).prop_map(|(mu, s)| DisorderSpec::gaussian(mu, s).unwrap()),
        (0.05..0.95f64, -2.0..0.0f64, 0.1..2.0f64)
            .prop_map(|(p, lo, hi)| DisorderSpec::bernoulli(p, lo, hi).unwrap()),
    ]
}

/// Any valid model with `d` in {2, 3}.
fn model_strategy() -> impl Strategy<Value = ModelSpec> {
    (2u32..=3, bulk_strategy(), 0usize..4, -2.0..2.0f64).prop_flat_map(|(d, bulk, kind, u)| {
        (1..d).prop_map(move |d1| {
            let (d1, defect) = match kind {
                0 => (d1, DefectKind::None),
                1 => (1, DefectKind::BranchShift { u }),
                2 => (d1, DefectKind::SubtreeConstant { u }),
                _ => (d1, DefectKind::SubtreeShift { u }),
            };
            ModelSpec::new(d, d1, bulk.clone(), defect).unwrap()
        })
    })
}

fn defect_model_strategy() -> impl Strategy<Value = ModelSpec> {
    model_strategy().prop_filter("needs a defect", |m| m.has_defect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn recursion_matches_path_enumeration(
        model in model_strategy(), n in 1u32..=6, seed in any::<u64>(), beta in 0.0..3.0f64,
    ) {
        let real = Realization::new(model, seed, n);
        let rec = real.log_partition(beta).unwrap();
        let brute = real.brute_force_log_partition(beta).unwrap();
        prop_assert!((rec - brute).abs() < 1e-9, "{rec} vs {brute}");
    }

    #[test]
    fn decomposition_reassembles_partition(
        model in defect_model_strategy(), n in 1u32..=7, seed in any::<u64>(), beta in 0.0..3.0f64,
    ) {
        let real = Realization::new(model, seed, n);
        let dec = real.st_decomposition(beta).unwrap();
        prop_assert_eq!(dec.log_g.len(), n as usize);
        prop_assert!((dec.log_partition() - real.log_partition(beta).unwrap()).abs() < 1e-9);
        let total: f64 = dec.weights().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let frac = dec.pinned_fraction();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&frac));
        prop_assert!(dec.dominant_k() <= n);
    }

    #[test]
    fn partition_nondecreasing_in_u(
        model in defect_model_strategy(), n in 1u32..=7, seed in any::<u64>(),
        beta in 0.0..3.0f64, du in 0.0..2.0f64,
    ) {
        let lo = Realization::new(model.clone(), seed, n).log_partition(beta).unwrap();
        let hi = Realization::new(model.with_u(model.u() + du), seed, n)
            .log_partition(beta)
            .unwrap();
        prop_assert!(hi >= lo - 1e-12);
    }

    #[test]
    fn log_partition_convex_in_beta(
        model in model_strategy(), n in 1u32..=7, seed in any::<u64>(),
        b in 0.0..3.0f64, h in 0.01..0.5f64,
    ) {
        let real = Realization::new(model, seed, n);
        let f = |x: f64| real.log_partition(x).unwrap();
        prop_assert!(f(b) + f(b + 2.0 * h) - 2.0 * f(b + h) >= -1e-9);
    }

    #[test]
    fn shifting_bulk_shifts_log_partition(
        d in 2u32..=3, base in bulk_strategy(), shift in -2.0..2.0f64,
        n in 1u32..=7, seed in any::<u64>(), beta in 0.0..3.0f64,
    ) {
        let plain = ModelSpec::homogeneous(d, base.clone()).unwrap();
        let moved = ModelSpec::homogeneous(d, DisorderSpec::shifted(base, shift).unwrap()).unwrap();
        let a = Realization::new(plain, seed, n).log_partition(beta).unwrap();
        let b = Realization::new(moved, seed, n).log_partition(beta).unwrap();
        prop_assert!((b - a - n as f64 * beta * shift).abs() < 1e-9);
    }

    #[test]
    fn lambda_convex_with_consistent_derivatives(bulk in bulk_strategy(), beta in -3.0..3.0f64) {
        let h = 1e-4;
        let l = |b: f64| bulk.log_mgf(b);
        let d1 = (l(beta + h) - l(beta - h)) / (2.0 * h);
        prop_assert!((d1 - bulk.log_mgf_deriv(beta)).abs() < 1e-6);
        let d2 = (bulk.log_mgf_deriv(beta + h) - bulk.log_mgf_deriv(beta - h)) / (2.0 * h);
        prop_assert!((d2 - bulk.log_mgf_second_deriv(beta)).abs() < 1e-6);
        prop_assert!(bulk.log_mgf_second_deriv(beta) >= 0.0);
        prop_assert!(l(0.0).abs() < 1e-15);
    }

    #[test]
    fn phi_below_annealed_and_linear_above_beta_c(
        d in 2u32..=4, bulk in bulk_strategy(), beta in 0.0..6.0f64,
    ) {
        let tree = HomogeneousTree::new(&bulk, d).unwrap();
        let phi = tree.phi(beta);
        prop_assert!(phi <= tree.annealed(beta) + 1e-12);
        if let Some(bc) = tree.crit.beta_c.finite() {
            if beta > bc {
                prop_assert!((phi - beta / bc * tree.crit.phi_cap).abs() < 1e-12 * phi.abs().max(1.0));
            } else {
                prop_assert_eq!(phi, tree.annealed(beta));
            }
        }
    }

    #[test]
    fn boundary_curves_ordered_above_beta_c(
        (d, d1) in prop_oneof![Just((3u32, 2u32)), Just((4, 2)), Just((4, 3))],
        bulk in bulk_strategy(), t in 0.001..1.0f64,
    ) {
        let tree = HomogeneousTree::new(&bulk, d).unwrap();
        let Some(bc) = tree.crit.beta_c.finite() else { return Ok(()) };
        let beta = bc * (1.0 + 3.0 * t);
        let f = tree.f_line(d1, beta).unwrap();
        let j = tree.j_line(d1, beta).unwrap();
        let mid = (tree.phi(beta) - (d1 as f64).ln()) / beta;
        let fc = tree.f_at_beta_c(d1).unwrap();
        prop_assert!(fc < j && j < mid && mid < f, "{fc} {j} {mid} {f}");
    }

    #[test]
    fn det_limit_continuous_at_critical_u(
        (d, d1) in prop_oneof![Just((2u32, 1u32)), Just((3, 1)), Just((3, 2)), Just((5, 3))],
        beta in 0.05..4.0f64,
    ) {
        let uc = u_c_det(beta, d, d1).unwrap();
        let at = f_det(beta, uc, d, d1);
        prop_assert!((at - (d as f64).ln()).abs() < 1e-12);
        prop_assert!(f_det(beta, uc + 0.1, d, d1) > at);
        prop_assert!((f_det(beta, uc - 0.1, d, d1) - (d as f64).ln()).abs() < 1e-15);
    }
}
