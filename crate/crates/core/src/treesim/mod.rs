//! Exact quenched partition functions on a materialized disordered tree.
//!
//! Disorder is never stored. Every potential is re-derived from
//! `(seed, address)` when the recursion reaches it, so memory use is `O(n d)`
//! for a depth-`n` tree regardless of the number of paths.

mod oracle;

use alloc::vec;
use alloc::vec::Vec;

use crate::disorder::NodeAddress;
use crate::error::{Error, Result};
use crate::math::{log_add_exp, log_sum_exp, log_sum_exp_compensated};
use crate::model::{DefectKind, ModelSpec};

pub use oracle::{exact_expectation_oracle, ExpectationTarget, ENUMERATION_LIMIT};

/// Default cap on `d^n`, the number of leaves visited by one evaluation.
pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

/// Source of bulk potentials, keyed by node address.
pub trait DisorderField {
    fn bulk(&self, addr: NodeAddress) -> f64;
}

/// Bulk potentials drawn from the model's law with a fixed seed.
#[derive(Debug, Clone, Copy)]
pub struct SeededField<'a> {
    pub model: &'a ModelSpec,
    pub seed: u64,
}

impl DisorderField for SeededField<'_> {
    #[inline]
    fn bulk(&self, addr: NodeAddress) -> f64 {
        self.model.bulk.sample_node(self.seed, addr)
    }
}

/// Order in which a node's children are evaluated. Their results are always
/// reduced in ascending child index, so both orders give identical bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChildOrder {
    #[default]
    Ascending,
    Descending,
}

/// One disorder realization of a model, truncated at `depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub model: ModelSpec,
    pub seed: u64,
    pub depth: u32,
    pub node_budget: u64,
}

/// Exit-generation decomposition of a defect partition function:
///
/// `Z = sum_{k<n} e^{beta k u} e^{log_g[k]} + e^{log_pinned_term}`.
///
/// `log_g[k]` collects the paths that leave the defect structure right after
/// generation `k`. For a constant defect it is `log G_{k,n}`; for shifted
/// defects it also carries the bulk part of the potential accumulated inside
/// the defect before the exit. `log_pinned_term` covers the paths that never
/// leave and includes `beta n u`.
#[derive(Debug, Clone, PartialEq)]
pub struct STDecomposition {
    pub n: u32,
    pub beta: f64,
    pub u: f64,
    pub log_g: Vec<f64>,
    pub log_pinned_term: f64,
}

impl STDecomposition {
    /// `beta k u + log_g[k]` for `k < n`, then the pinned term at index `n`.
    pub fn log_terms(&self) -> Vec<f64> {
        let mut terms: Vec<f64> = self
            .log_g
            .iter()
            .enumerate()
            .map(|(k, &g)| self.beta * k as f64 * self.u + g)
            .collect();
        terms.push(self.log_pinned_term);
        terms
    }

    /// `log Z` reassembled from the decomposition.
    pub fn log_partition(&self) -> f64 {
        log_sum_exp(&self.log_terms())
    }

    /// Gibbs weight of each exit generation `k = 0..=n`; they sum to one.
    pub fn weights(&self) -> Vec<f64> {
        let terms = self.log_terms();
        let log_z = log_sum_exp(&terms);
        terms.iter().map(|t| libm::exp(t - log_z)).collect()
    }

    /// Expected fraction of the path spent inside the defect, `(1/n) sum_k k w_k`.
    pub fn pinned_fraction(&self) -> f64 {
        let n = self.n as f64;
        self.weights()
            .iter()
            .enumerate()
            .map(|(k, w)| k as f64 * w)
            .sum::<f64>()
            / n
    }

    /// Exit generation with the largest term; ties go to the smaller `k`.
    pub fn dominant_k(&self) -> u32 {
        let terms = self.log_terms();
        let mut best = 0usize;
        for (k, &t) in terms.iter().enumerate() {
            if t > terms[best] {
                best = k;
            }
        }
        best as u32
    }
}

pub(crate) fn check_budget(d: u32, depth: u32, budget: u64) -> Result<()> {
    let leaves = (d as u128).checked_pow(depth).unwrap_or(u128::MAX);
    if leaves > budget as u128 {
        return Err(Error::DepthTooLarge {
            depth,
            leaves,
            budget,
        });
    }
    Ok(())
}

/// Recursive evaluator shared by the seeded realizations and the exact oracle.
pub(crate) struct Engine<'a, F> {
    model: &'a ModelSpec,
    field: &'a F,
    beta: f64,
    depth: u32,
    order: ChildOrder,
}

impl<'a, F: DisorderField> Engine<'a, F> {
    pub(crate) fn new(model: &'a ModelSpec, field: &'a F, beta: f64, depth: u32) -> Self {
        Engine {
            model,
            field,
            beta,
            depth,
            order: ChildOrder::Ascending,
        }
    }

    fn with_order(mut self, order: ChildOrder) -> Self {
        self.order = order;
        self
    }

    fn scratch(&self) -> Vec<f64> {
        vec![0.0; self.model.d as usize * (self.depth as usize + 1)]
    }

    #[inline]
    fn potential(&self, addr: NodeAddress, in_defect: bool) -> f64 {
        match self.model.defect {
            DefectKind::SubtreeConstant { u } if in_defect => u,
            _ => self.model.potential(self.field.bulk(addr), in_defect),
        }
    }

    /// Part of the potential at a defect node that is not the constant shift.
    #[inline]
    fn defect_offset(&self, addr: NodeAddress) -> f64 {
        match self.model.defect {
            DefectKind::SubtreeConstant { .. } => 0.0,
            _ => self.field.bulk(addr),
        }
    }

    pub(crate) fn log_partition(&self) -> f64 {
        let mut scratch = self.scratch();
        self.log_z(
            NodeAddress::ROOT,
            self.model.has_defect(),
            self.depth,
            &mut scratch,
        )
    }

    /// `log Z^{[x]}` over the `remaining` generations below `x`.
    fn log_z(&self, x: NodeAddress, x_in_defect: bool, remaining: u32, scratch: &mut [f64]) -> f64 {
        if remaining == 0 {
            return 0.0;
        }
        let d = self.model.d;
        let d1 = self.model.d1;
        let (slots, rest) = scratch.split_at_mut(d as usize);
        let mut visit = |ell: u32, rest: &mut [f64]| {
            let y = x.child(d, ell);
            let y_in_defect = x_in_defect && ell <= d1;
            slots[ell as usize - 1] = self.beta * self.potential(y, y_in_defect)
                + self.log_z(y, y_in_defect, remaining - 1, rest);
        };
        match self.order {
            ChildOrder::Ascending => (1..=d).for_each(|ell| visit(ell, rest)),
            ChildOrder::Descending => (1..=d).rev().for_each(|ell| visit(ell, rest)),
        }
        log_sum_exp(slots)
    }

    pub(crate) fn decompose(&self) -> Result<STDecomposition> {
        let u = match self.model.defect {
            DefectKind::None => {
                return Err(Error::WrongModelKind(
                    "exit decomposition needs a defect branch or subtree",
                ))
            }
            DefectKind::BranchShift { u }
            | DefectKind::SubtreeConstant { u }
            | DefectKind::SubtreeShift { u } => u,
        };
        let n = self.depth;
        let mut log_g = vec![f64::NEG_INFINITY; n as usize];
        let mut inside = f64::NEG_INFINITY;
        let mut scratch = self.scratch();
        self.walk_defect(
            NodeAddress::ROOT,
            0,
            0.0,
            &mut log_g,
            &mut inside,
            &mut scratch,
        );
        let nf = n as f64;
        let log_pinned_term = if self.model.defect_is_constant() {
            nf * libm::log(self.model.d1 as f64) + self.beta * nf * u
        } else {
            self.beta * nf * u + inside
        };
        Ok(STDecomposition {
            n,
            beta: self.beta,
            u,
            log_g,
            log_pinned_term,
        })
    }

    /// Depth-first walk over the defect nodes. `offset` is `beta` times the
    /// non-constant potential accumulated inside the defect up to `x`.
    fn walk_defect(
        &self,
        x: NodeAddress,
        k: u32,
        offset: f64,
        log_g: &mut [f64],
        inside: &mut f64,
        scratch: &mut [f64],
    ) {
        if k == self.depth {
            *inside = log_add_exp(*inside, offset);
            return;
        }
        let d = self.model.d;
        let d1 = self.model.d1;
        for ell in d1 + 1..=d {
            let y = x.child(d, ell);
            let term = offset
                + self.beta * self.field.bulk(y)
                + self.log_z(y, false, self.depth - k - 1, scratch);
            log_g[k as usize] = log_add_exp(log_g[k as usize], term);
        }
        for ell in 1..=d1 {
            let y = x.child(d, ell);
            let next = offset + self.beta * self.defect_offset(y);
            self.walk_defect(y, k + 1, next, log_g, inside, scratch);
        }
    }
}

impl Realization {
    pub fn new(model: ModelSpec, seed: u64, depth: u32) -> Self {
        Realization {
            model,
            seed,
            depth,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }

    pub fn with_node_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }

    pub fn field(&self) -> SeededField<'_> {
        SeededField {
            model: &self.model,
            seed: self.seed,
        }
    }

    /// Potential `V(x)` at a node, including the defect modification.
    pub fn disorder_at(&self, addr: NodeAddress) -> f64 {
        let in_defect = self.model.in_defect(addr);
        match self.model.defect {
            DefectKind::SubtreeConstant { u } if in_defect => u,
            _ => self
                .model
                .potential(self.model.bulk.sample_node(self.seed, addr), in_defect),
        }
    }

    fn check(&self) -> Result<()> {
        if self.depth < 1 {
            return Err(Error::InvalidArgument("depth must be >= 1".into()));
        }
        check_budget(self.model.d, self.depth, self.node_budget)
    }

    /// `log Z_n` by depth-first recursion.
    pub fn log_partition(&self, beta: f64) -> Result<f64> {
        self.log_partition_ordered(beta, ChildOrder::Ascending)
    }

    pub fn log_partition_ordered(&self, beta: f64, order: ChildOrder) -> Result<f64> {
        self.check()?;
        let field = self.field();
        Ok(Engine::new(&self.model, &field, beta, self.depth)
            .with_order(order)
            .log_partition())
    }

    /// Exit-generation decomposition; requires a defect.
    pub fn st_decomposition(&self, beta: f64) -> Result<STDecomposition> {
        self.check()?;
        let field = self.field();
        Engine::new(&self.model, &field, beta, self.depth).decompose()
    }

    pub fn gibbs_pinned_fraction(&self, beta: f64) -> Result<f64> {
        Ok(self.st_decomposition(beta)?.pinned_fraction())
    }

    pub fn dominant_k(&self, beta: f64) -> Result<u32> {
        Ok(self.st_decomposition(beta)?.dominant_k())
    }

    /// `log Z_n` by enumerating every path. Limited to `d^n <= 10^6`.
    pub fn brute_force_log_partition(&self, beta: f64) -> Result<f64> {
        oracle::brute_force_log_partition(self, beta)
    }
}

/// `log Z_n^Det` from the explicit sum over exit generations:
/// `sum_{k<n} e^{k beta u} d1^k (d - d1) d^{n-k-1} + d1^n e^{n beta u}`.
pub fn log_partition_det(beta: f64, u: f64, d: u32, d1: u32, n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    if d < 2 || d1 < 1 || d1 >= d {
        return Err(Error::InvalidArgument(alloc::format!(
            "need d >= 2 and 1 <= d1 < d, got d = {d}, d1 = {d1}"
        )));
    }
    let (log_d, log_d1, log_out) = (
        libm::log(d as f64),
        libm::log(d1 as f64),
        libm::log((d - d1) as f64),
    );
    let mut terms: Vec<f64> = (0..n)
        .map(|k| {
            let k = k as f64;
            k * (beta * u + log_d1) + log_out + (n as f64 - k - 1.0) * log_d
        })
        .collect();
    terms.push(n as f64 * (beta * u + log_d1));
    Ok(log_sum_exp_compensated(&terms))
}
