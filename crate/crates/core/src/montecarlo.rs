//! Replica estimates of finite-depth free energies and phase observables.
//!
//! Replica `r` of a run with master seed `s` uses the realization seed
//! `replica_seed(s, r)`; grid cell `c` uses `cell_seed(s, c)` as its master.
//! Work items are distributed by an [`Executor`], and every aggregate is
//! reduced in ascending replica order afterwards, so results do not depend on
//! the executor or on the number of threads behind it.

use alloc::format;
use alloc::vec::Vec;

use crate::closedform::{HomogeneousTree, PhaseLabel};
use crate::disorder::DisorderSpec;
use crate::error::{Error, Result};
use crate::math::mean_and_sd;
use crate::model::{DefectKind, ModelSpec};
use crate::rng::{cell_seed, replica_seed};
use crate::treesim::{log_partition_det, Realization, DEFAULT_NODE_BUDGET};

/// Runs independent indexed jobs and returns their results in index order.
pub trait Executor: Sync {
    fn map_indexed<T, F>(&self, len: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indexed<T, F>(&self, len: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..len).map(job).collect()
    }
}

/// Replica average of `(1/n) log Z_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FreeEnergyEstimate {
    pub n: u32,
    pub replicas: u32,
    pub mean: f64,
    pub stderr: f64,
    pub min: f64,
    pub max: f64,
}

impl FreeEnergyEstimate {
    /// Summary of per-replica values of `(1/n) log Z_n`, in replica order.
    pub fn from_samples(n: u32, samples: &[f64]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "at least 2 replicas are needed for a standard error, got {}",
                samples.len()
            )));
        }
        let (mean, sd) = mean_and_sd(samples);
        let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(FreeEnergyEstimate {
            n,
            replicas: samples.len() as u32,
            mean,
            stderr: sd / libm::sqrt(samples.len() as f64),
            // the running mean can drift by an ulp outside [min, max]
            min: f64::min(min, mean),
            max: f64::max(max, mean),
        })
    }
}

/// Which analytic statement an anchor comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum AnchorKind {
    /// Exact `(1/n) log Z_n` of a tree without randomness.
    DetExact,
    /// Limit `max{beta u + log d1, log d}` of a tree without randomness.
    FDet,
    /// Homogeneous quenched free energy `phi`.
    Phi,
    /// Defect-branch free energy `max{beta (u + mu), phi}`.
    FBr,
    /// Lower bound `max{phi, beta u + log d1}`, upper bound
    /// `max{lambda + log d, beta u + log d1}` for a constant defect subtree.
    StBounds,
    /// Restriction lower bound `max{phi, beta u + phi_{d1}}` and annealed
    /// upper bound `max{lambda + log d, beta u + lambda + log d1}` for a
    /// shifted defect subtree.
    StShiftBounds,
}

impl AnchorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnchorKind::DetExact => "det_exact",
            AnchorKind::FDet => "f_det",
            AnchorKind::Phi => "phi",
            AnchorKind::FBr => "f_br",
            AnchorKind::StBounds => "st_bounds",
            AnchorKind::StShiftBounds => "st_shift_bounds",
        }
    }
}

/// Analytic value (or band) a free-energy estimate is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Anchor {
    pub lower: f64,
    pub upper: f64,
    pub kind: AnchorKind,
}

impl Anchor {
    fn exact(value: f64, kind: AnchorKind) -> Self {
        Anchor {
            lower: value,
            upper: value,
            kind,
        }
    }

    /// Distance from `x` to the band `[lower, upper]`.
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lower {
            self.lower - x
        } else if x > self.upper {
            x - self.upper
        } else {
            0.0
        }
    }
}

/// Free energy of the homogeneous model on an `arity`-ary tree; `beta mu` for `arity = 1`.
fn phi_for_arity(bulk: &DisorderSpec, arity: u32, beta: f64) -> Result<f64> {
    if arity == 1 {
        return Ok(beta * bulk.mean());
    }
    Ok(HomogeneousTree::new(bulk, arity)?.phi(beta))
}

/// Anchor for the model at `(beta, depth)`. With `depth = None` the
/// infinite-depth anchor is returned.
pub fn anchor(model: &ModelSpec, beta: f64, depth: Option<u32>) -> Result<Anchor> {
    let (d, d1) = (model.d, model.d1);
    let log_d = libm::log(d as f64);
    let log_d1 = libm::log(d1 as f64);

    if let Some(c) = model.bulk.degenerate_value() {
        // every path collects c per step outside the defect; inside it collects
        // c + u (shift) or u (constant), i.e. c plus an effective defect potential
        let u_eff = match model.defect {
            DefectKind::None => return Ok(Anchor::exact(beta * c + log_d, AnchorKind::DetExact)),
            DefectKind::BranchShift { u } | DefectKind::SubtreeShift { u } => u,
            DefectKind::SubtreeConstant { u } => u - c,
        };
        return Ok(match depth {
            Some(n) => Anchor::exact(
                beta * c + log_partition_det(beta, u_eff, d, d1, n)? / n as f64,
                AnchorKind::DetExact,
            ),
            None => Anchor::exact(
                beta * c + f64::max(beta * u_eff + log_d1, log_d),
                AnchorKind::FDet,
            ),
        });
    }

    let tree = HomogeneousTree::new(&model.bulk, d)?;
    let phi = tree.phi(beta);
    let annealed = tree.annealed(beta);
    Ok(match model.defect {
        DefectKind::None => Anchor::exact(phi, AnchorKind::Phi),
        DefectKind::BranchShift { u } => Anchor::exact(tree.f_br(beta, u), AnchorKind::FBr),
        DefectKind::SubtreeConstant { u } => Anchor {
            lower: f64::max(phi, beta * u + log_d1),
            upper: f64::max(annealed, beta * u + log_d1),
            kind: AnchorKind::StBounds,
        },
        DefectKind::SubtreeShift { u } => Anchor {
            lower: f64::max(phi, beta * u + phi_for_arity(&model.bulk, d1, beta)?),
            upper: f64::max(annealed, beta * u + tree.lambda(beta) + log_d1),
            kind: AnchorKind::StShiftBounds,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LadderRow {
    pub estimate: FreeEnergyEstimate,
    pub anchor: Anchor,
}

/// Free-energy estimates over a ladder of depths, with their anchors.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LadderReport {
    pub model: ModelSpec,
    pub beta: f64,
    pub u: f64,
    pub master_seed: u64,
    pub rows: Vec<LadderRow>,
    /// Infinite-depth anchor.
    pub limit: Anchor,
    /// Intercept of a least-squares fit of the means against `1/n`; needs at
    /// least two depths. Informational only.
    pub extrapolated: Option<f64>,
}

/// Ordinary least-squares intercept of `y` against `1/n`.
fn intercept_in_inverse_depth(rows: &[LadderRow]) -> Option<f64> {
    if rows.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = rows.iter().map(|r| 1.0 / r.estimate.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.estimate.mean).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(my - sxy / sxx * mx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MartingalePoint {
    pub n: u32,
    pub replicas: u32,
    /// Replica mean of `log M_n = log Z_n - n (lambda + log d)`.
    pub mean_log_m: f64,
    pub stderr: f64,
}

/// Mean, standard error and a 10-bin histogram on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UnitSummary {
    pub mean: f64,
    pub stderr: f64,
    pub histogram: [u64; 10],
}

impl UnitSummary {
    fn from_samples(samples: &[f64]) -> Self {
        let (mean, sd) = mean_and_sd(samples);
        let mut histogram = [0u64; 10];
        for &x in samples {
            let bin = ((x * 10.0) as usize).min(9);
            histogram[bin] += 1;
        }
        UnitSummary {
            mean,
            stderr: sd / libm::sqrt(samples.len() as f64),
            histogram,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PinnedProfile {
    pub n: u32,
    pub replicas: u32,
    /// Gibbs expected fraction of steps inside the defect.
    pub fraction: UnitSummary,
    /// Dominant exit generation divided by `n`.
    pub dominant: UnitSummary,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConcentrationProfile {
    /// `(n, sample standard deviation of (1/n) log Z_n)`.
    pub points: Vec<(u32, f64)>,
    /// Whether the standard deviation never increases along the ladder.
    pub monotone_decreasing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhaseCell {
    pub beta: f64,
    pub u: f64,
    pub label: PhaseLabel,
    pub f_line: f64,
    /// `J(beta)`, defined only above `beta_c`.
    pub j_line: Option<f64>,
    /// `F(beta_c)`, defined when `beta_c` is finite.
    pub f_at_beta_c: Option<f64>,
    pub estimate: FreeEnergyEstimate,
    pub pinned_fraction_mean: f64,
}

/// Replica driver. Borrowing the executor keeps thread pools owned by the caller.
#[derive(Debug, Clone, Copy)]
pub struct MonteCarlo<'e, E> {
    exec: &'e E,
    node_budget: u64,
}

impl<'e, E: Executor> MonteCarlo<'e, E> {
    pub fn new(exec: &'e E) -> Self {
        MonteCarlo {
            exec,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }

    pub fn with_node_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }

    fn realization(&self, model: &ModelSpec, seed: u64, n: u32) -> Realization {
        Realization::new(model.clone(), seed, n).with_node_budget(self.node_budget)
    }

    /// `(1/n) log Z_n` for every `(n, replica)` pair, grouped by `n`.
    fn free_energy_samples(
        &self,
        model: &ModelSpec,
        beta: f64,
        n_list: &[u32],
        replicas: u32,
        master_seed: u64,
    ) -> Result<Vec<Vec<f64>>> {
        let r = replicas as usize;
        let flat = self.exec.map_indexed(n_list.len() * r, |job| {
            let n = n_list[job / r];
            let seed = replica_seed(master_seed, (job % r) as u64);
            self.realization(model, seed, n)
                .log_partition(beta)
                .map(|lz| lz / n as f64)
        });
        let flat: Vec<f64> = flat.into_iter().collect::<Result<_>>()?;
        Ok(flat.chunks(r.max(1)).map(|c| c.to_vec()).collect())
    }

    fn check_ladder(n_list: &[u32], replicas: u32) -> Result<()> {
        if replicas < 2 {
            return Err(Error::InvalidArgument(format!(
                "replicas must be >= 2, got {replicas}"
            )));
        }
        if n_list.is_empty() || n_list.contains(&0) {
            return Err(Error::InvalidArgument(
                "depth list must be non-empty with every depth >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Replica estimates of `(1/n) log Z_n` along a depth ladder.
    pub fn estimate_free_energy(
        &self,
        model: &ModelSpec,
        beta: f64,
        n_list: &[u32],
        replicas: u32,
        master_seed: u64,
    ) -> Result<LadderReport> {
        Self::check_ladder(n_list, replicas)?;
        if n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "depth ladder must be strictly increasing".into(),
            ));
        }
        let samples = self.free_energy_samples(model, beta, n_list, replicas, master_seed)?;
        let mut rows = Vec::with_capacity(n_list.len());
        for (&n, s) in n_list.iter().zip(&samples) {
            rows.push(LadderRow {
                estimate: FreeEnergyEstimate::from_samples(n, s)?,
                anchor: anchor(model, beta, Some(n))?,
            });
        }
        Ok(LadderReport {
            model: model.clone(),
            beta,
            u: model.u(),
            master_seed,
            extrapolated: intercept_in_inverse_depth(&rows),
            limit: anchor(model, beta, None)?,
            rows,
        })
    }

    /// Replica mean of `log M_n` for the homogeneous model.
    pub fn martingale_trace(
        &self,
        model: &ModelSpec,
        beta: f64,
        n_list: &[u32],
        replicas: u32,
        master_seed: u64,
    ) -> Result<Vec<MartingalePoint>> {
        if model.has_defect() {
            return Err(Error::WrongModelKind(
                "the martingale is defined for the homogeneous model",
            ));
        }
        Self::check_ladder(n_list, replicas)?;
        let annealed = model.bulk.log_mgf(beta) + libm::log(model.d as f64);
        let samples = self.free_energy_samples(model, beta, n_list, replicas, master_seed)?;
        Ok(n_list
            .iter()
            .zip(&samples)
            .map(|(&n, s)| {
                let nf = n as f64;
                let log_m: Vec<f64> = s.iter().map(|f| nf * f - nf * annealed).collect();
                let (mean, sd) = mean_and_sd(&log_m);
                MartingalePoint {
                    n,
                    replicas,
                    mean_log_m: mean,
                    stderr: sd / libm::sqrt(replicas as f64),
                }
            })
            .collect())
    }

    /// Distribution of the Gibbs pinned fraction and of `dominant_k / n`.
    pub fn empirical_pinned_profile(
        &self,
        model: &ModelSpec,
        beta: f64,
        n: u32,
        replicas: u32,
        master_seed: u64,
    ) -> Result<PinnedProfile> {
        Self::check_ladder(&[n], replicas)?;
        if !model.has_defect() {
            return Err(Error::WrongModelKind(
                "pinned observables need a defect branch or subtree",
            ));
        }
        let results = self.exec.map_indexed(replicas as usize, |r| {
            let dec = self
                .realization(model, replica_seed(master_seed, r as u64), n)
                .st_decomposition(beta)?;
            Ok((dec.pinned_fraction(), dec.dominant_k() as f64 / n as f64))
        });
        let pairs: Vec<(f64, f64)> = results.into_iter().collect::<Result<_>>()?;
        let fractions: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let dominant: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        Ok(PinnedProfile {
            n,
            replicas,
            fraction: UnitSummary::from_samples(&fractions),
            dominant: UnitSummary::from_samples(&dominant),
        })
    }

    /// Sample standard deviation of `(1/n) log Z_n` along a depth ladder.
    pub fn concentration_profile(
        &self,
        model: &ModelSpec,
        beta: f64,
        n_list: &[u32],
        replicas: u32,
        master_seed: u64,
    ) -> Result<ConcentrationProfile> {
        if replicas < 30 {
            return Err(Error::InvalidArgument(format!(
                "concentration profile needs >= 30 replicas, got {replicas}"
            )));
        }
        Self::check_ladder(n_list, replicas)?;
        let samples = self.free_energy_samples(model, beta, n_list, replicas, master_seed)?;
        let points: Vec<(u32, f64)> = n_list
            .iter()
            .zip(&samples)
            .map(|(&n, s)| (n, mean_and_sd(s).1))
            .collect();
        let monotone_decreasing = points.windows(2).all(|w| w[1].1 <= w[0].1);
        Ok(ConcentrationProfile {
            points,
            monotone_decreasing,
        })
    }

    /// Phase labels, free-energy estimates and pinned fractions on a
    /// `beta x u` grid of the constant defect-subtree model. Cells are
    /// ordered beta-major.
    #[allow(clippy::too_many_arguments)]
    pub fn phase_scan(
        &self,
        family: &ModelSpec,
        beta_grid: &[f64],
        u_grid: &[f64],
        n: u32,
        replicas: u32,
        master_seed: u64,
        tol: f64,
    ) -> Result<Vec<PhaseCell>> {
        if !matches!(family.defect, DefectKind::SubtreeConstant { .. }) {
            return Err(Error::WrongModelKind(
                "phase scans use the constant defect-subtree model",
            ));
        }
        Self::check_ladder(&[n], replicas)?;
        let tree = HomogeneousTree::new(&family.bulk, family.d)?;
        let d1 = family.d1;
        let f_c = tree
            .crit
            .beta_c
            .finite()
            .map(|bc| tree.f_line(d1, bc))
            .transpose()?;

        struct CellInfo {
            beta: f64,
            u: f64,
            label: PhaseLabel,
            f_line: f64,
            j_line: Option<f64>,
        }
        let mut cells = Vec::with_capacity(beta_grid.len() * u_grid.len());
        for &beta in beta_grid {
            let f_line = tree.f_line(d1, beta)?;
            let j_line =
                if tree.crit.beta_c.is_above(beta) || Some(beta) == tree.crit.beta_c.finite() {
                    None
                } else {
                    Some(tree.j_line(d1, beta)?)
                };
            for &u in u_grid {
                cells.push(CellInfo {
                    beta,
                    u,
                    label: tree.classify_st(d1, beta, u, tol)?,
                    f_line,
                    j_line,
                });
            }
        }

        let r = replicas as usize;
        let flat = self.exec.map_indexed(cells.len() * r, |job| {
            let (c, rep) = (job / r, job % r);
            let cell = &cells[c];
            let seed = replica_seed(cell_seed(master_seed, c as u64), rep as u64);
            let dec = self
                .realization(&family.with_u(cell.u), seed, n)
                .st_decomposition(cell.beta)?;
            Ok((dec.log_partition() / n as f64, dec.pinned_fraction()))
        });
        let flat: Vec<(f64, f64)> = flat.into_iter().collect::<Result<_>>()?;

        cells
            .iter()
            .zip(flat.chunks(r))
            .map(|(cell, chunk)| {
                let fe: Vec<f64> = chunk.iter().map(|p| p.0).collect();
                let pf: Vec<f64> = chunk.iter().map(|p| p.1).collect();
                Ok(PhaseCell {
                    beta: cell.beta,
                    u: cell.u,
                    label: cell.label,
                    f_line: cell.f_line,
                    j_line: cell.j_line,
                    f_at_beta_c: f_c,
                    estimate: FreeEnergyEstimate::from_samples(n, &fe)?,
                    pinned_fraction_mean: mean_and_sd(&pf).0,
                })
            })
            .collect()
    }
}
