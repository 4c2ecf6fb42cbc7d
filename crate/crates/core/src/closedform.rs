//! Analytic free energies, critical curves and phase boundaries.
//!
//! Notation used throughout: `lambda(b) = log E[e^{bV}]` is the cumulant
//! function of the bulk law, `d` the tree arity, `d1` the defect arity and
//! `beta_c` the critical inverse temperature of the homogeneous model.

use alloc::format;
use alloc::vec::Vec;

use crate::disorder::{DisorderSpec, UpperTail};
use crate::error::{Error, Result};
use crate::math::log_sum_exp_compensated;

/// Absolute tolerance of the `beta_c` bisection, on both `|f|` and the bracket.
pub const ROOT_TOL: f64 = 1e-12;

/// Default half-width of the boundary band in [`classify_st`].
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-9;

#[inline]
fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// Critical inverse temperature: a finite positive root, or no root at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriticalBeta {
    Finite(f64),
    Infinite,
}

impl CriticalBeta {
    /// The value, with `Infinite` mapped to `f64::INFINITY`.
    pub fn value(self) -> f64 {
        match self {
            CriticalBeta::Finite(b) => b,
            CriticalBeta::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            CriticalBeta::Finite(b) => Some(b),
            CriticalBeta::Infinite => None,
        }
    }

    /// `beta < beta_c`; always true when `beta_c` is infinite.
    pub fn is_above(self, beta: f64) -> bool {
        match self {
            CriticalBeta::Finite(b) => beta < b,
            CriticalBeta::Infinite => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalData {
    pub beta_c: CriticalBeta,
    /// `lambda(beta_c)`; infinite when `beta_c` is.
    pub lambda_at_beta_c: f64,
    /// `lambda(beta_c) + log d`; infinite when `beta_c` is.
    pub phi_cap: f64,
}

/// Phase of the defect-subtree model at `(beta, u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PhaseLabel {
    FullyPinned,
    Depinned,
    PartiallyPinned,
    /// Depinned or partially pinned; the two are not separated analytically here.
    DepinnedOrPartiallyPinned,
    /// Within the tolerance band of a phase boundary.
    Boundary,
}

impl PhaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseLabel::FullyPinned => "FullyPinned",
            PhaseLabel::Depinned => "Depinned",
            PhaseLabel::PartiallyPinned => "PartiallyPinned",
            PhaseLabel::DepinnedOrPartiallyPinned => "DepinnedOrPartiallyPinned",
            PhaseLabel::Boundary => "Boundary",
        }
    }
}

impl core::fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `f(beta) = lambda(beta) + log d - beta lambda'(beta)`.
pub fn f_gap(bulk: &DisorderSpec, d: u32, beta: f64) -> f64 {
    bulk.log_mgf(beta) + ln(d as f64) - beta * bulk.log_mgf_deriv(beta)
}

/// Positive root of [`f_gap`], or `Infinite` when the upper tail is bounded
/// with an atom of mass at least `1/d`.
///
/// The bracket is grown by doubling from `beta = 1` until `f` changes sign,
/// then bisected.
pub fn beta_c(bulk: &DisorderSpec, d: u32) -> Result<CriticalData> {
    if bulk.is_degenerate() {
        return Err(Error::DegenerateDisorder);
    }
    let has_root = match bulk.upper_tail() {
        UpperTail::Unbounded => true,
        UpperTail::Bounded { atom, .. } => atom * (d as f64) < 1.0,
    };
    if !has_root {
        return Ok(CriticalData {
            beta_c: CriticalBeta::Infinite,
            lambda_at_beta_c: f64::INFINITY,
            phi_cap: f64::INFINITY,
        });
    }
    let f = |b: f64| f_gap(bulk, d, b);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::OutOfDomain(format!(
                "no sign change of f found below beta = {hi}"
            )));
        }
    }
    let mut root = 0.5 * (lo + hi);
    for _ in 0..200 {
        root = 0.5 * (lo + hi);
        let fm = f(root);
        if fm == 0.0 || libm::fabs(fm) < ROOT_TOL || hi - lo < ROOT_TOL {
            break;
        }
        if fm > 0.0 {
            lo = root;
        } else {
            hi = root;
        }
    }
    let lambda = bulk.log_mgf(root);
    Ok(CriticalData {
        beta_c: CriticalBeta::Finite(root),
        lambda_at_beta_c: lambda,
        phi_cap: lambda + ln(d as f64),
    })
}

/// Bulk law on a `d`-ary tree with its critical data resolved once.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousTree<'a> {
    pub bulk: &'a DisorderSpec,
    pub d: u32,
    pub crit: CriticalData,
}

impl<'a> HomogeneousTree<'a> {
    pub fn new(bulk: &'a DisorderSpec, d: u32) -> Result<Self> {
        let crit = beta_c(bulk, d)?;
        Ok(HomogeneousTree { bulk, d, crit })
    }

    #[inline]
    pub fn lambda(&self, beta: f64) -> f64 {
        self.bulk.log_mgf(beta)
    }

    #[inline]
    fn log_d(&self) -> f64 {
        ln(self.d as f64)
    }

    /// Annealed free energy `lambda(beta) + log d`.
    pub fn annealed(&self, beta: f64) -> f64 {
        self.lambda(beta) + self.log_d()
    }

    /// Quenched free energy of the homogeneous model.
    pub fn phi(&self, beta: f64) -> f64 {
        match self.crit.beta_c {
            CriticalBeta::Finite(bc) if beta >= bc => beta / bc * self.crit.phi_cap,
            _ => self.annealed(beta),
        }
    }

    /// Same two-branch form as [`phi`](Self::phi) with `log d` replaced by `log d1`.
    pub fn phi_tilde(&self, d1: u32, beta: f64) -> Result<f64> {
        check_arities(self.d, d1)?;
        let log_d1 = ln(d1 as f64);
        Ok(match self.crit.beta_c {
            CriticalBeta::Finite(bc) if beta >= bc => {
                beta / bc * (self.crit.lambda_at_beta_c + log_d1)
            }
            _ => self.lambda(beta) + log_d1,
        })
    }

    pub fn f_br(&self, beta: f64, u: f64) -> f64 {
        let mu = self.bulk.mean();
        f64::max(beta * (u + mu), self.phi(beta))
    }

    pub fn u_c_br(&self, beta: f64) -> Result<f64> {
        if beta <= 0.0 {
            return Err(Error::BetaZero);
        }
        let mu = self.bulk.mean();
        Ok(match self.crit.beta_c {
            CriticalBeta::Finite(bc) if beta >= bc => self.crit.phi_cap / bc - mu,
            _ => self.annealed(beta) / beta - mu,
        })
    }

    /// `F(beta) = (lambda(beta) + log d - log d1) / beta`.
    pub fn f_line(&self, d1: u32, beta: f64) -> Result<f64> {
        check_arities(self.d, d1)?;
        if beta <= 0.0 {
            return Err(Error::BetaZero);
        }
        Ok((self.annealed(beta) - ln(d1 as f64)) / beta)
    }

    /// `F(beta_c)`, the lower edge of the fully pinned region above `beta_c`.
    pub fn f_at_beta_c(&self, d1: u32) -> Result<f64> {
        match self.crit.beta_c {
            CriticalBeta::Finite(bc) => self.f_line(d1, bc),
            CriticalBeta::Infinite => Err(Error::OutOfDomain("beta_c is infinite".into())),
        }
    }

    /// `lambda(2 beta) - 2 lambda(beta) - log d`.
    pub fn second_moment_gap(&self, beta: f64) -> f64 {
        self.lambda(2.0 * beta) - 2.0 * self.lambda(beta) - self.log_d()
    }

    fn require_strong(&self, beta: f64) -> Result<f64> {
        match self.crit.beta_c {
            CriticalBeta::Finite(bc) if beta > bc => {
                let x = self.second_moment_gap(beta);
                if x <= 0.0 {
                    Err(Error::NonpositiveDenominator { beta, value: x })
                } else {
                    Ok(x)
                }
            }
            CriticalBeta::Finite(bc) => Err(Error::OutOfDomain(format!(
                "requires beta > beta_c = {bc}, got {beta}"
            ))),
            CriticalBeta::Infinite => Err(Error::OutOfDomain(
                "requires beta > beta_c, but beta_c is infinite".into(),
            )),
        }
    }

    /// Lower edge `J(beta)` of the partially pinned region, defined for `beta > beta_c`.
    pub fn j_line(&self, d1: u32, beta: f64) -> Result<f64> {
        check_arities(self.d, d1)?;
        let x = self.require_strong(beta)?;
        let log_d1 = ln(d1 as f64);
        let phi = self.phi(beta);
        let excess = self.annealed(beta) - phi;
        Ok((phi - log_d1 - excess * log_d1 / x) / beta)
    }

    /// `log Theta = max{2 lambda(b) + 2 log d, lambda(2b) + log d}`.
    pub fn log_theta(&self, beta: f64) -> f64 {
        let log_d = self.log_d();
        f64::max(
            2.0 * self.lambda(beta) + 2.0 * log_d,
            self.lambda(2.0 * beta) + log_d,
        )
    }

    /// `t* = X / (log d1 + X)` with `X = lambda(2b) - 2 lambda(b) - log d`.
    pub fn t_star(&self, d1: u32, beta: f64) -> Result<f64> {
        check_arities(self.d, d1)?;
        let x = self.require_strong(beta)?;
        if d1 == 1 {
            return Err(Error::DegenerateDefectArity);
        }
        Ok(x / (ln(d1 as f64) + x))
    }

    /// `L(b, t) = phi(b) - ((1 - t) / t) (lambda(b) + log d - phi(b))` for `t` in (0, 1].
    pub fn l_func(&self, beta: f64, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::OutOfDomain(format!("t must lie in (0, 1], got {t}")));
        }
        let phi = self.phi(beta);
        Ok(phi - (1.0 - t) / t * (self.annealed(beta) - phi))
    }

    /// Phase label at `(beta, u)` with a boundary band of half-width `tol`.
    pub fn classify_st(&self, d1: u32, beta: f64, u: f64, tol: f64) -> Result<PhaseLabel> {
        if beta <= 0.0 {
            return Err(Error::BetaZero);
        }
        if tol.is_nan() || tol < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tol must be >= 0, got {tol}"
            )));
        }
        let f = self.f_line(d1, beta)?;
        if self.crit.beta_c.is_above(beta) || Some(beta) == self.crit.beta_c.finite() {
            return Ok(if u >= f + tol {
                PhaseLabel::FullyPinned
            } else if u <= f - tol {
                PhaseLabel::Depinned
            } else {
                PhaseLabel::Boundary
            });
        }
        let f_c = self.f_at_beta_c(d1)?;
        let j = self.j_line(d1, beta)?;
        Ok(if u >= f + tol {
            PhaseLabel::FullyPinned
        } else if u <= f_c - tol {
            PhaseLabel::Depinned
        } else if j + tol < u && u < f - tol {
            PhaseLabel::PartiallyPinned
        } else if f_c + tol < u && u <= j - tol {
            PhaseLabel::DepinnedOrPartiallyPinned
        } else {
            PhaseLabel::Boundary
        })
    }
}

fn check_arities(d: u32, d1: u32) -> Result<()> {
    if d1 < 1 || d1 >= d {
        return Err(Error::OutOfDomain(format!(
            "defect arity must satisfy 1 <= d1 < d, got d1 = {d1}, d = {d}"
        )));
    }
    Ok(())
}

/// Quenched free energy of the homogeneous model.
pub fn phi(bulk: &DisorderSpec, d: u32, beta: f64) -> Result<f64> {
    Ok(HomogeneousTree::new(bulk, d)?.phi(beta))
}

pub fn phi_tilde(bulk: &DisorderSpec, d: u32, d1: u32, beta: f64) -> Result<f64> {
    HomogeneousTree::new(bulk, d)?.phi_tilde(d1, beta)
}

/// Free energy of the non-disordered tree: `max{beta u + log d1, log d}`.
pub fn f_det(beta: f64, u: f64, d: u32, d1: u32) -> f64 {
    f64::max(beta * u + ln(d1 as f64), ln(d as f64))
}

/// `u_c^Det(beta) = log(d / d1) / beta`.
pub fn u_c_det(beta: f64, d: u32, d1: u32) -> Result<f64> {
    if beta <= 0.0 {
        return Err(Error::BetaZero);
    }
    Ok(ln(d as f64 / d1 as f64) / beta)
}

/// Defect-branch free energy `max{beta (u + mu), phi(beta)}`.
pub fn f_br(bulk: &DisorderSpec, d: u32, beta: f64, u: f64) -> Result<f64> {
    Ok(HomogeneousTree::new(bulk, d)?.f_br(beta, u))
}

pub fn u_c_br(bulk: &DisorderSpec, d: u32, beta: f64) -> Result<f64> {
    HomogeneousTree::new(bulk, d)?.u_c_br(beta)
}

pub fn f_line(bulk: &DisorderSpec, d: u32, d1: u32, beta: f64) -> Result<f64> {
    check_arities(d, d1)?;
    if beta <= 0.0 {
        return Err(Error::BetaZero);
    }
    Ok((bulk.log_mgf(beta) + ln(d as f64) - ln(d1 as f64)) / beta)
}

pub fn j_line(bulk: &DisorderSpec, d: u32, d1: u32, beta: f64) -> Result<f64> {
    HomogeneousTree::new(bulk, d)?.j_line(d1, beta)
}

/// `log Theta(beta)`; needs no critical data.
pub fn theta(bulk: &DisorderSpec, d: u32, beta: f64) -> f64 {
    let log_d = ln(d as f64);
    f64::max(
        2.0 * bulk.log_mgf(beta) + 2.0 * log_d,
        bulk.log_mgf(2.0 * beta) + log_d,
    )
}

pub fn t_star(bulk: &DisorderSpec, d: u32, d1: u32, beta: f64) -> Result<f64> {
    HomogeneousTree::new(bulk, d)?.t_star(d1, beta)
}

pub fn l_func(bulk: &DisorderSpec, d: u32, beta: f64, t: f64) -> Result<f64> {
    HomogeneousTree::new(bulk, d)?.l_func(beta, t)
}

/// `log E[(Z_n^HD)^2]` from the explicit sum over the generation at which two
/// paths split, accumulated in the log domain.
pub fn second_moment_hd(bulk: &DisorderSpec, d: u32, beta: f64, n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let log_d = ln(d as f64);
    let lam = bulk.log_mgf(beta);
    // log(d e^{lambda(2b)}) and log(d^2 e^{2 lambda(b)})
    let same = bulk.log_mgf(2.0 * beta) + log_d;
    let split = 2.0 * lam + 2.0 * log_d;
    let prefactor = log_d + ln((d - 1) as f64) + 2.0 * lam;
    let mut terms: Vec<f64> = (0..n)
        .map(|k| prefactor + k as f64 * same + (n - 1 - k) as f64 * split)
        .collect();
    terms.push(n as f64 * same);
    Ok(log_sum_exp_compensated(&terms))
}

/// `log E[G_{k,n}] = k log d1 + log(d - d1) + (n - k - 1) log d + (n - k) lambda(beta)`.
pub fn mean_g(bulk: &DisorderSpec, d: u32, d1: u32, beta: f64, k: u32, n: u32) -> Result<f64> {
    check_arities(d, d1)?;
    if k >= n {
        return Err(Error::IndexOutOfRange {
            index: k as usize,
            len: n as usize,
        });
    }
    let (k, n) = (k as f64, n as f64);
    Ok(k * ln(d1 as f64)
        + ln((d - d1) as f64)
        + (n - k - 1.0) * ln(d as f64)
        + (n - k) * bulk.log_mgf(beta))
}

pub fn classify_st(
    bulk: &DisorderSpec,
    d: u32,
    d1: u32,
    beta: f64,
    u: f64,
    tol: f64,
) -> Result<PhaseLabel> {
    HomogeneousTree::new(bulk, d)?.classify_st(d1, beta, u, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::linspace;

    const SQRT_2LN2: f64 = 1.177_410_022_515_474_7;

    fn gauss(mu: f64, sigma: f64) -> DisorderSpec {
        DisorderSpec::gaussian(mu, sigma).unwrap()
    }

    fn bern(p: f64, lo: f64, hi: f64) -> DisorderSpec {
        DisorderSpec::bernoulli(p, lo, hi).unwrap()
    }

    #[test]
    fn f_gap_examples() {
        let g = gauss(0.0, 1.0);
        assert_eq!(f_gap(&g, 2, 0.0), ln(2.0));
        assert!(f_gap(&g, 2, SQRT_2LN2).abs() < 1e-10);
        let grid = linspace(0.01, 5.0, 100);
        for spec in [g, bern(0.3, -1.0, 2.0)] {
            for w in grid.windows(2) {
                assert!(f_gap(&spec, 3, w[1]) < f_gap(&spec, 3, w[0]));
            }
        }
    }

    #[test]
    fn beta_c_examples() {
        let c = beta_c(&gauss(0.0, 1.0), 2).unwrap();
        assert!((c.beta_c.value() - SQRT_2LN2).abs() < 1e-8);
        assert!((c.phi_cap - (0.5 * SQRT_2LN2 * SQRT_2LN2 + ln(2.0))).abs() < 1e-8);

        let c = beta_c(&bern(0.6, 0.0, 1.0), 2).unwrap();
        assert_eq!(c.beta_c, CriticalBeta::Infinite);

        let a = beta_c(&gauss(5.0, 1.0), 3).unwrap().beta_c.value();
        let b = beta_c(&gauss(0.0, 1.0), 3).unwrap().beta_c.value();
        assert!((a - b).abs() < 1e-10);

        assert_eq!(
            beta_c(&DisorderSpec::constant(1.0).unwrap(), 2),
            Err(Error::DegenerateDisorder)
        );
        assert_eq!(
            beta_c(&bern(1.0, 0.0, 1.0), 2),
            Err(Error::DegenerateDisorder)
        );
    }

    #[test]
    fn bounded_disorder_root_when_atom_small() {
        // P(V = hi) = 0.2 < 1/3: root exists.
        let spec = bern(0.2, -1.0, 1.0);
        let c = beta_c(&spec, 3).unwrap();
        let bc = c.beta_c.value();
        assert!(bc.is_finite() && bc > 0.0);
        assert!(f_gap(&spec, 3, bc).abs() < 1e-9);
    }

    #[test]
    fn phi_examples() {
        let g = gauss(0.0, 1.0);
        assert_eq!(phi(&g, 2, 0.0).unwrap(), ln(2.0));
        assert!((phi(&g, 2, 2.0).unwrap() - 2.354_820_045_030_949_4).abs() < 1e-8);
        let bc = beta_c(&g, 2).unwrap().beta_c.value();
        let eps = 1e-7;
        assert!((phi(&g, 2, bc - eps).unwrap() - phi(&g, 2, bc + eps).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn phi_tilde_examples() {
        let g = gauss(0.0, 1.0);
        assert!(phi_tilde(&g, 2, 2, 0.5).is_err());
        assert_eq!(phi_tilde(&g, 3, 2, 0.0).unwrap(), ln(2.0));
        assert!((phi_tilde(&g, 4, 2, 0.5).unwrap() - (0.125 + ln(2.0))).abs() < 1e-15);
    }

    #[test]
    fn det_examples() {
        for beta in [0.1, 1.0, 7.0] {
            assert_eq!(f_det(beta, 0.0, 3, 2), ln(3.0));
        }
        assert!((u_c_det(1.0, 2, 1).unwrap() - core::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(u_c_det(0.0, 2, 1), Err(Error::BetaZero));
        let beta = 1.7;
        let u = u_c_det(beta, 5, 2).unwrap();
        assert!((beta * u + ln(2.0) - ln(5.0)).abs() < 1e-14);
        assert!((f_det(beta, u, 5, 2) - ln(5.0)).abs() < 1e-14);
    }

    #[test]
    fn branch_examples() {
        let (mu, sigma, d) = (0.4, 1.3, 3);
        let g = gauss(mu, sigma);
        let bc = beta_c(&g, d).unwrap().beta_c.value();
        for beta in [0.2, 0.5, 0.9 * bc] {
            let want = 0.5 * sigma * sigma * beta + ln(d as f64) / beta;
            assert!((u_c_br(&g, d, beta).unwrap() - want).abs() < 1e-12);
        }
        let g = gauss(0.0, 1.0);
        for beta in [SQRT_2LN2 + 1e-6, 2.0, 5.0] {
            assert!((u_c_br(&g, 2, beta).unwrap() - SQRT_2LN2).abs() < 1e-8);
        }
        assert_eq!(u_c_br(&g, 2, 0.0), Err(Error::BetaZero));
        for beta in linspace(0.05, 6.0, 60) {
            assert!(u_c_br(&g, 2, beta).unwrap() > u_c_det(beta, 2, 1).unwrap());
        }
        // the branch term wins above u_c, phi below
        let beta = 0.7;
        let uc = u_c_br(&g, 2, beta).unwrap();
        assert!((f_br(&g, 2, beta, uc + 1.0).unwrap() - beta * (uc + 1.0)).abs() < 1e-14);
        assert_eq!(
            f_br(&g, 2, beta, uc - 1.0).unwrap(),
            phi(&g, 2, beta).unwrap()
        );
    }

    #[test]
    fn f_line_examples() {
        let g = gauss(0.0, 1.0);
        assert!((f_line(&g, 3, 2, 1.0).unwrap() - 0.905_465_108_108_164_4).abs() < 1e-14);
        let beta = 0.8;
        assert!(
            (f_line(&g, 3, 1, beta).unwrap() - (g.log_mgf(beta) + ln(3.0)) / beta).abs() < 1e-15
        );
        assert_eq!(f_line(&g, 3, 2, 0.0), Err(Error::BetaZero));
    }

    #[test]
    fn j_line_examples() {
        let g = gauss(0.0, 1.0);
        let t = HomogeneousTree::new(&g, 3).unwrap();
        let bc = t.crit.beta_c.value();
        let f_c = t.f_at_beta_c(2).unwrap();
        assert!((t.j_line(2, bc * (1.0 + 1e-6)).unwrap() - f_c).abs() < 1e-3);
        for beta in linspace(1.01 * bc, 4.0 * bc, 20) {
            let j1 = t.j_line(1, beta).unwrap();
            assert!((j1 - t.phi(beta) / beta).abs() < 1e-12);
        }
        let beta = 2.0 * bc;
        let j = t.j_line(2, beta).unwrap();
        assert!(f_c < j && j < t.f_line(2, beta).unwrap());
        assert!(matches!(t.j_line(2, bc), Err(Error::OutOfDomain(_))));
        assert!(matches!(t.j_line(2, 0.5 * bc), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn theta_examples() {
        let g = gauss(0.0, 1.0);
        assert_eq!(theta(&g, 3, 0.0), 2.0 * ln(3.0));
        assert!((theta(&g, 2, 2.0) - (8.0 + ln(2.0))).abs() < 1e-15);
        let bc = beta_c(&g, 2).unwrap().beta_c.value();
        for beta in linspace(1.001 * bc, 3.0 * bc, 10) {
            assert_eq!(theta(&g, 2, beta), g.log_mgf(2.0 * beta) + ln(2.0));
        }
    }

    #[test]
    fn t_star_and_l_examples() {
        let g = gauss(0.0, 1.0);
        let t = HomogeneousTree::new(&g, 4).unwrap();
        let bc = t.crit.beta_c.value();
        for beta in linspace(1.05 * bc, 4.0 * bc, 12) {
            assert_eq!(t.l_func(beta, 1.0).unwrap(), t.phi(beta));
            for d1 in [2, 3] {
                let ts = t.t_star(d1, beta).unwrap();
                assert!(ts > 0.0 && ts < 1.0);
                let j = t.j_line(d1, beta).unwrap();
                let l = t.l_func(beta, ts).unwrap();
                assert!((j - (l - ln(d1 as f64)) / beta).abs() < 1e-10);
                // (Theta / (d^2 e^{2 lambda}))^{1 - t*} = d1^{t*}
                let lhs = (1.0 - ts) * (t.log_theta(beta) - 2.0 * t.annealed(beta));
                assert!((lhs - ts * ln(d1 as f64)).abs() < 1e-10);
            }
        }
        assert_eq!(t.t_star(1, 2.0 * bc), Err(Error::DegenerateDefectArity));
        assert!(matches!(t.t_star(2, 0.5 * bc), Err(Error::OutOfDomain(_))));
        assert!(t.l_func(1.0, 0.0).is_err());
        assert!(t.l_func(1.0, 1.5).is_err());
    }

    #[test]
    fn second_moment_examples() {
        // exact enumeration of the four assignments of two fair +-1 nodes:
        // E[(e^{V1} + e^{V2})^2] = 2 cosh 2 + 2 cosh^2 1
        let b = bern(0.5, -1.0, 1.0);
        assert!((second_moment_hd(&b, 2, 1.0, 1).unwrap() - 2.508_508_185_520_916).abs() < 1e-13);
        let c = DisorderSpec::constant(0.0).unwrap();
        for beta in [0.0, 1.0, 3.0] {
            assert!((second_moment_hd(&c, 3, beta, 1).unwrap() - ln(9.0)).abs() < 1e-14);
        }
        let g = gauss(0.0, 1.0);
        for (spec, d) in [(&b, 2), (&g, 3)] {
            for beta in [0.2, 1.0, 2.5] {
                for n in 1..8 {
                    let first = n as f64 * (spec.log_mgf(beta) + ln(d as f64));
                    let second = second_moment_hd(spec, d, beta, n).unwrap();
                    assert!(second >= 2.0 * first - 1e-12);
                }
            }
        }
    }

    #[test]
    fn mean_g_examples() {
        let g = gauss(0.0, 1.0);
        let (beta, n) = (0.7, 5);
        let want = ln(2.0) + (n - 1) as f64 * ln(3.0) + n as f64 * g.log_mgf(beta);
        assert!((mean_g(&g, 3, 1, beta, 0, n).unwrap() - want).abs() < 1e-14);
        assert!(matches!(
            mean_g(&g, 3, 1, beta, 5, 5),
            Err(Error::IndexOutOfRange { .. })
        ));
        // fair +-1, d = 2, d1 = 1, k = 1, n = 2: E e^{V} = cosh 1
        let b = bern(0.5, -1.0, 1.0);
        assert!((mean_g(&b, 2, 1, 1.0, 1, 2).unwrap() - 0.433_780_830_483_027_2).abs() < 1e-15);
    }

    #[test]
    fn classify_examples() {
        let g = gauss(0.0, 1.0);
        let t = HomogeneousTree::new(&g, 3).unwrap();
        let bc = t.crit.beta_c.value();
        let tol = DEFAULT_BOUNDARY_TOL;
        let beta = 0.5 * bc;
        let f = t.f_line(2, beta).unwrap();
        assert_eq!(
            t.classify_st(2, beta, f + 1.0, tol).unwrap(),
            PhaseLabel::FullyPinned
        );
        assert_eq!(
            t.classify_st(2, beta, f - 1.0, tol).unwrap(),
            PhaseLabel::Depinned
        );
        assert_eq!(
            t.classify_st(2, beta, f, tol).unwrap(),
            PhaseLabel::Boundary
        );

        let beta = 2.0 * bc;
        let f = t.f_line(2, beta).unwrap();
        let f_c = t.f_at_beta_c(2).unwrap();
        let j = t.j_line(2, beta).unwrap();
        assert_eq!(
            t.classify_st(2, beta, f_c - 1.0, tol).unwrap(),
            PhaseLabel::Depinned
        );
        assert_eq!(
            t.classify_st(2, beta, 0.5 * (j + f), tol).unwrap(),
            PhaseLabel::PartiallyPinned
        );
        assert_eq!(
            t.classify_st(2, beta, 0.5 * (f_c + j), tol).unwrap(),
            PhaseLabel::DepinnedOrPartiallyPinned
        );
        assert_eq!(
            t.classify_st(2, beta, f + 0.1, tol).unwrap(),
            PhaseLabel::FullyPinned
        );
        assert_eq!(
            t.classify_st(2, beta, j, tol).unwrap(),
            PhaseLabel::Boundary
        );
        assert_eq!(t.classify_st(2, 0.0, 1.0, tol), Err(Error::BetaZero));
    }

    #[test]
    fn classify_with_infinite_beta_c_uses_low_temperature_branch() {
        let b = bern(0.6, 0.0, 1.0);
        let t = HomogeneousTree::new(&b, 2).unwrap();
        let f = t.f_line(1, 10.0).unwrap();
        assert_eq!(
            t.classify_st(1, 10.0, f + 1.0, 0.0).unwrap(),
            PhaseLabel::FullyPinned
        );
        assert_eq!(
            t.classify_st(1, 10.0, f - 1.0, 0.0).unwrap(),
            PhaseLabel::Depinned
        );
        assert_eq!(t.phi(10.0), t.annealed(10.0));
    }
}
