//! Independent oracles: path enumeration and exhaustive disorder enumeration.

use alloc::vec;
use alloc::vec::Vec;

use super::{check_budget, DisorderField, Engine, Realization};
use crate::disorder::NodeAddress;
use crate::error::{Error, Result};
use crate::math::{log_sum_exp_compensated, log_sum_exp_pairwise};
use crate::model::{DefectKind, ModelSpec};

/// Cap on paths for brute force and on disorder assignments for enumeration.
pub const ENUMERATION_LIMIT: u64 = 1_000_000;

/// Enumerates all `d^n` paths. Node addresses are read off the path number
/// (`index = floor(p / d^{n-m}) + 1` at generation `m`) and defect membership
/// comes from the address digits, so nothing is shared with the recursive
/// engine except the per-node sampler.
pub(super) fn brute_force_log_partition(real: &Realization, beta: f64) -> Result<f64> {
    let model = &real.model;
    let (d, n) = (model.d as u64, real.depth);
    if n < 1 {
        return Err(Error::InvalidArgument("depth must be >= 1".into()));
    }
    check_budget(model.d, n, ENUMERATION_LIMIT)?;
    let paths = d.pow(n);
    let mut weights = Vec::with_capacity(paths as usize);
    for p in 0..paths {
        let mut energy = 0.0;
        for m in 1..=n {
            let addr = NodeAddress::new(m, p / d.pow(n - m) + 1);
            energy += real.disorder_at(addr);
        }
        weights.push(beta * energy);
    }
    Ok(log_sum_exp_pairwise(&weights))
}

/// Quantity whose moments [`exact_expectation_oracle`] computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpectationTarget {
    /// The partition function `Z_n`.
    Partition,
    /// `G_{k,n}`: contribution of paths leaving a constant defect subtree
    /// right after generation `k`.
    ExitSum { k: u32 },
}

struct AssignedField<'a> {
    d: u64,
    values: &'a [f64],
}

impl DisorderField for AssignedField<'_> {
    #[inline]
    fn bulk(&self, addr: NodeAddress) -> f64 {
        self.values[flat_index(self.d, addr)]
    }
}

/// Position of a non-root node in generation-major order.
fn flat_index(d: u64, addr: NodeAddress) -> usize {
    let before = (d.pow(addr.generation) - d) / (d - 1);
    (before + addr.index - 1) as usize
}

/// `log E[X^power]` for `X` the target at depth `n`, by summing over every
/// assignment of the finite-support bulk disorder.
///
/// Nodes whose law is a point mass, including the nodes of a constant defect
/// subtree, are not enumerated.
pub fn exact_expectation_oracle(
    model: &ModelSpec,
    beta: f64,
    n: u32,
    power: u32,
    target: ExpectationTarget,
) -> Result<f64> {
    if !(power == 1 || power == 2) {
        return Err(Error::InvalidArgument(alloc::format!(
            "power must be 1 or 2, got {power}"
        )));
    }
    if n < 1 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    if let ExpectationTarget::ExitSum { k } = target {
        if !matches!(model.defect, DefectKind::SubtreeConstant { .. }) {
            return Err(Error::WrongModelKind(
                "exit sums are enumerated for constant defect subtrees",
            ));
        }
        if k >= n {
            return Err(Error::IndexOutOfRange {
                index: k as usize,
                len: n as usize,
            });
        }
    }
    let support = model.bulk.support().ok_or(Error::ContinuousDisorder)?;
    let d = model.d as u64;
    check_budget(model.d, n, ENUMERATION_LIMIT)?;
    let total_nodes = (d.pow(n + 1) - d) / (d - 1);

    let mut values = vec![support[0].0; total_nodes as usize];
    let mut free: Vec<usize> = Vec::new();
    if support.len() > 1 {
        for gen in 1..=n {
            for index in 1..=d.pow(gen) {
                let addr = NodeAddress::new(gen, index);
                if model.defect_is_constant() && model.in_defect(addr) {
                    continue;
                }
                free.push(flat_index(d, addr));
            }
        }
    }
    let radix = support.len() as u128;
    let assignments = radix.checked_pow(free.len() as u32).unwrap_or(u128::MAX);
    if assignments > ENUMERATION_LIMIT as u128 {
        return Err(Error::SupportTooLarge {
            assignments,
            limit: ENUMERATION_LIMIT,
        });
    }
    let log_probs: Vec<f64> = support.iter().map(|&(_, q)| libm::log(q)).collect();

    let mut digits = vec![0usize; free.len()];
    let mut terms = Vec::with_capacity(assignments as usize);
    loop {
        let mut log_prob = 0.0;
        for (slot, &digit) in free.iter().zip(&digits) {
            values[*slot] = support[digit].0;
            log_prob += log_probs[digit];
        }
        let field = AssignedField { d, values: &values };
        let engine = Engine::new(model, &field, beta, n);
        let log_x = match target {
            ExpectationTarget::Partition => engine.log_partition(),
            ExpectationTarget::ExitSum { k } => engine.decompose()?.log_g[k as usize],
        };
        terms.push(log_prob + power as f64 * log_x);

        // odometer increment
        let mut i = 0;
        loop {
            if i == digits.len() {
                return Ok(log_sum_exp_compensated(&terms));
            }
            digits[i] += 1;
            if digits[i] < support.len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::{mean_g, second_moment_hd};
    use crate::disorder::DisorderSpec;

    fn fair() -> DisorderSpec {
        DisorderSpec::bernoulli(0.5, -1.0, 1.0).unwrap()
    }

    #[test]
    fn flat_indices_are_dense() {
        let d: u64 = 3;
        let mut seen = Vec::new();
        for gen in 1..=3u32 {
            for index in 1..=d.pow(gen) {
                seen.push(flat_index(d, NodeAddress::new(gen, index)));
            }
        }
        let want: Vec<usize> = (0..seen.len()).collect();
        assert_eq!(seen, want);
    }

    #[test]
    fn homogeneous_depth_one() {
        let m = ModelSpec::homogeneous(2, fair()).unwrap();
        let first = exact_expectation_oracle(&m, 1.0, 1, 1, ExpectationTarget::Partition).unwrap();
        // log(2 cosh 1)
        assert!((first - 1.126_928_011_042_972_5).abs() < 1e-14);
        let second = exact_expectation_oracle(&m, 1.0, 1, 2, ExpectationTarget::Partition).unwrap();
        assert!((second - 2.508_508_185_520_916).abs() < 1e-13);
        assert!((second - second_moment_hd(&fair(), 2, 1.0, 1).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn subtree_mean_identity_depth_two() {
        let (beta, u) = (0.8, 0.35);
        let m = ModelSpec::new(2, 1, fair(), DefectKind::SubtreeConstant { u }).unwrap();
        let n = 2;
        let ez = exact_expectation_oracle(&m, beta, n, 1, ExpectationTarget::Partition).unwrap();
        let mut terms: Vec<f64> = (0..n)
            .map(|k| beta * k as f64 * u + mean_g(&fair(), 2, 1, beta, k, n).unwrap())
            .collect();
        terms.push(n as f64 * beta * u);
        assert!((ez - log_sum_exp_compensated(&terms)).abs() < 1e-13);
    }

    #[test]
    fn exit_sum_matches_mean_g() {
        let m = ModelSpec::new(2, 1, fair(), DefectKind::SubtreeConstant { u: 0.0 }).unwrap();
        let g =
            exact_expectation_oracle(&m, 1.0, 2, 1, ExpectationTarget::ExitSum { k: 1 }).unwrap();
        assert!((g - mean_g(&fair(), 2, 1, 1.0, 1, 2).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn oracle_domain_errors() {
        let g = ModelSpec::homogeneous(2, DisorderSpec::gaussian(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(
            exact_expectation_oracle(&g, 1.0, 2, 1, ExpectationTarget::Partition),
            Err(Error::ContinuousDisorder)
        );
        let big = ModelSpec::homogeneous(2, fair()).unwrap();
        assert!(matches!(
            exact_expectation_oracle(&big, 1.0, 5, 1, ExpectationTarget::Partition),
            Err(Error::SupportTooLarge { .. })
        ));
        assert!(exact_expectation_oracle(&big, 1.0, 2, 3, ExpectationTarget::Partition).is_err());
        assert!(matches!(
            exact_expectation_oracle(&big, 1.0, 2, 1, ExpectationTarget::ExitSum { k: 0 }),
            Err(Error::WrongModelKind(_))
        ));
    }

    #[test]
    fn constant_defect_nodes_are_not_enumerated() {
        // d = 3, d1 = 2, n = 2: 12 nodes, 6 inside the defect, 2^6 assignments
        let m = ModelSpec::new(3, 2, fair(), DefectKind::SubtreeConstant { u: 1.0 }).unwrap();
        assert!(exact_expectation_oracle(&m, 0.5, 2, 2, ExpectationTarget::Partition).is_ok());
    }
}
