//! Disorder laws, their cumulant functions, and per-node sampling.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::log_add_exp;
use crate::rng::node_uniform;

/// Law of the potential attached to a tree node.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum DisorderSpec {
    Gaussian {
        mu: f64,
        sigma: f64,
    },
    /// Two-point law: `P(V = hi) = p`, `P(V = lo) = 1 - p`.
    Bernoulli {
        p: f64,
        lo: f64,
        hi: f64,
    },
    Constant {
        c: f64,
    },
    /// Law of `base + shift`. The base must not itself be `Shifted`.
    Shifted {
        base: Box<DisorderSpec>,
        shift: f64,
    },
}

/// Behaviour of the upper tail, which decides whether `beta_c` is finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpperTail {
    Unbounded,
    /// Finite essential supremum `w` carrying mass `P(V = w)`.
    Bounded {
        sup: f64,
        atom: f64,
    },
}

impl DisorderSpec {
    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        let s = DisorderSpec::Gaussian { mu, sigma };
        s.validate()?;
        Ok(s)
    }

    pub fn bernoulli(p: f64, lo: f64, hi: f64) -> Result<Self> {
        let s = DisorderSpec::Bernoulli { p, lo, hi };
        s.validate()?;
        Ok(s)
    }

    pub fn constant(c: f64) -> Result<Self> {
        let s = DisorderSpec::Constant { c };
        s.validate()?;
        Ok(s)
    }

    pub fn shifted(base: DisorderSpec, shift: f64) -> Result<Self> {
        let s = DisorderSpec::Shifted {
            base: Box::new(base),
            shift,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!(
                    "{name} must be finite, got {x}"
                )))
            }
        };
        match self {
            DisorderSpec::Gaussian { mu, sigma } => {
                finite("mu", *mu)?;
                finite("sigma", *sigma)?;
                if *sigma <= 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "gaussian sigma must be > 0, got {sigma}"
                    )));
                }
            }
            DisorderSpec::Bernoulli { p, lo, hi } => {
                finite("lo", *lo)?;
                finite("hi", *hi)?;
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::InvalidSpec(format!(
                        "bernoulli p must lie in [0, 1], got {p}"
                    )));
                }
                if lo >= hi {
                    return Err(Error::InvalidSpec(format!(
                        "bernoulli requires lo < hi, got lo = {lo}, hi = {hi}"
                    )));
                }
            }
            DisorderSpec::Constant { c } => finite("c", *c)?,
            DisorderSpec::Shifted { base, shift } => {
                finite("shift", *shift)?;
                if matches!(**base, DisorderSpec::Shifted { .. }) {
                    return Err(Error::InvalidSpec(
                        "shifted base must not itself be shifted".into(),
                    ));
                }
                base.validate()?;
            }
        }
        Ok(())
    }

    /// Constant laws and two-point laws with `p` in `{0, 1}` are degenerate.
    pub fn is_degenerate(&self) -> bool {
        match self {
            DisorderSpec::Gaussian { .. } => false,
            DisorderSpec::Bernoulli { p, .. } => *p == 0.0 || *p == 1.0,
            DisorderSpec::Constant { .. } => true,
            DisorderSpec::Shifted { base, .. } => base.is_degenerate(),
        }
    }

    /// The almost-sure value of a degenerate law.
    pub fn degenerate_value(&self) -> Option<f64> {
        match self {
            DisorderSpec::Gaussian { .. } => None,
            DisorderSpec::Bernoulli { p, lo, hi } => {
                if *p == 0.0 {
                    Some(*lo)
                } else if *p == 1.0 {
                    Some(*hi)
                } else {
                    None
                }
            }
            DisorderSpec::Constant { c } => Some(*c),
            DisorderSpec::Shifted { base, shift } => base.degenerate_value().map(|v| v + shift),
        }
    }

    pub fn upper_tail(&self) -> UpperTail {
        match self {
            DisorderSpec::Gaussian { .. } => UpperTail::Unbounded,
            DisorderSpec::Bernoulli { p, lo, hi } => {
                if *p == 0.0 {
                    UpperTail::Bounded {
                        sup: *lo,
                        atom: 1.0,
                    }
                } else {
                    UpperTail::Bounded { sup: *hi, atom: *p }
                }
            }
            DisorderSpec::Constant { c } => UpperTail::Bounded { sup: *c, atom: 1.0 },
            DisorderSpec::Shifted { base, shift } => match base.upper_tail() {
                UpperTail::Unbounded => UpperTail::Unbounded,
                UpperTail::Bounded { sup, atom } => UpperTail::Bounded {
                    sup: sup + shift,
                    atom,
                },
            },
        }
    }

    /// `(value, probability)` pairs for finite-support laws, `None` otherwise.
    /// Zero-probability atoms are dropped.
    pub fn support(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            DisorderSpec::Gaussian { .. } => None,
            DisorderSpec::Bernoulli { p, lo, hi } => Some(
                [(*lo, 1.0 - p), (*hi, *p)]
                    .into_iter()
                    .filter(|&(_, q)| q > 0.0)
                    .collect(),
            ),
            DisorderSpec::Constant { c } => Some(vec![(*c, 1.0)]),
            DisorderSpec::Shifted { base, shift } => base
                .support()
                .map(|s| s.into_iter().map(|(v, q)| (v + shift, q)).collect()),
        }
    }

    /// Cumulant generating function `lambda(beta) = log E[e^{beta V}]`.
    pub fn log_mgf(&self, beta: f64) -> f64 {
        match self {
            DisorderSpec::Gaussian { mu, sigma } => mu * beta + 0.5 * sigma * sigma * beta * beta,
            DisorderSpec::Bernoulli { p, lo, hi } => {
                log_add_exp(libm::log(*p) + beta * hi, libm::log(1.0 - p) + beta * lo)
            }
            DisorderSpec::Constant { c } => c * beta,
            DisorderSpec::Shifted { base, shift } => base.log_mgf(beta) + shift * beta,
        }
    }

    /// `lambda'(beta)`, the mean of `V` under the exponential tilt `e^{beta V}`.
    pub fn log_mgf_deriv(&self, beta: f64) -> f64 {
        match self {
            DisorderSpec::Gaussian { mu, sigma } => mu + sigma * sigma * beta,
            DisorderSpec::Bernoulli { p, lo, hi } => {
                lo + (hi - lo) * tilted_hi_weight(*p, *lo, *hi, beta)
            }
            DisorderSpec::Constant { c } => *c,
            DisorderSpec::Shifted { base, shift } => base.log_mgf_deriv(beta) + shift,
        }
    }

    /// `lambda''(beta)`, the variance of `V` under the exponential tilt.
    pub fn log_mgf_second_deriv(&self, beta: f64) -> f64 {
        match self {
            DisorderSpec::Gaussian { sigma, .. } => sigma * sigma,
            DisorderSpec::Bernoulli { p, lo, hi } => {
                let w = tilted_hi_weight(*p, *lo, *hi, beta);
                (hi - lo) * (hi - lo) * w * (1.0 - w)
            }
            DisorderSpec::Constant { .. } => 0.0,
            DisorderSpec::Shifted { base, .. } => base.log_mgf_second_deriv(beta),
        }
    }

    /// `(E V, Var V)`.
    pub fn mean_var(&self) -> (f64, f64) {
        match self {
            DisorderSpec::Gaussian { mu, sigma } => (*mu, sigma * sigma),
            DisorderSpec::Bernoulli { p, lo, hi } => {
                (lo + p * (hi - lo), p * (1.0 - p) * (hi - lo) * (hi - lo))
            }
            DisorderSpec::Constant { c } => (*c, 0.0),
            DisorderSpec::Shifted { base, shift } => {
                let (m, v) = base.mean_var();
                (m + shift, v)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean_var().0
    }

    /// Inverse CDF evaluated at `q` in (0, 1).
    pub fn quantile(&self, q: f64) -> f64 {
        match self {
            DisorderSpec::Gaussian { mu, sigma } => mu + sigma * standard_normal_quantile(q),
            DisorderSpec::Bernoulli { p, lo, hi } => {
                if q <= 1.0 - p {
                    *lo
                } else {
                    *hi
                }
            }
            DisorderSpec::Constant { c } => *c,
            DisorderSpec::Shifted { base, shift } => base.quantile(q) + shift,
        }
    }

    /// Potential at `addr` under this law, a pure function of `(seed, addr)`.
    #[inline]
    pub fn sample_node(&self, seed: u64, addr: NodeAddress) -> f64 {
        match self {
            DisorderSpec::Constant { c } => *c,
            _ => self.quantile(node_uniform(seed, addr)),
        }
    }
}

/// Weight of `hi` under the tilt: `p e^{beta hi} / (p e^{beta hi} + (1-p) e^{beta lo})`.
fn tilted_hi_weight(p: f64, lo: f64, hi: f64, beta: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    let a = libm::log(p) + beta * hi;
    let b = libm::log(1.0 - p) + beta * lo;
    // logistic(a - b), evaluated on the side that cannot overflow
    let x = a - b;
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Standard normal quantile by Wichura's algorithm AS 241 (PPND16).
///
/// Rational approximations on three regions; relative accuracy about 1e-16.
pub fn standard_normal_quantile(p: f64) -> f64 {
    let q = p - 0.5;
    if libm::fabs(q) <= 0.425 {
        let r = 0.180625 - q * q;
        let num = ((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
            + 6.726_577_092_700_87e4)
            * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_5;
        let den = ((((((5.226_495_278_852_545e3 * r + 2.872_908_573_572_194_3e4) * r
            + 3.930_789_580_009_271e4)
            * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0;
        return q * num / den;
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = libm::sqrt(-libm::log(tail));
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
            + 1.519_866_656_361_645_7e-2)
            * r
            + 1.481_039_764_274_800_8e-1)
            * r
            + 6.897_673_349_851e-1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 1.487_536_129_085_061_5e-2)
            * r
            + 1.369_298_809_227_358e-1)
            * r
            + 5.998_322_065_558_88e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Node `(generation, index)` of the `d`-ary tree; the root is `(0, 1)` and
/// indices run over `1..=d^generation` from left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NodeAddress {
    pub generation: u32,
    pub index: u64,
}

impl NodeAddress {
    pub const ROOT: NodeAddress = NodeAddress {
        generation: 0,
        index: 1,
    };

    #[inline]
    pub const fn new(generation: u32, index: u64) -> Self {
        NodeAddress { generation, index }
    }

    /// Checked constructor: `index` must lie in `1..=d^generation`.
    pub fn checked(generation: u32, index: u64, d: u32) -> Result<Self> {
        let width = (d as u128).checked_pow(generation);
        match width {
            Some(w) if index >= 1 && (index as u128) <= w => Ok(NodeAddress { generation, index }),
            _ => Err(Error::InvalidArgument(format!(
                "node ({generation}, {index}) is not in the {d}-ary tree"
            ))),
        }
    }

    /// Child `ell` in `1..=d`: `(k + 1, d (j - 1) + ell)`.
    #[inline]
    pub fn child(self, d: u32, ell: u32) -> Self {
        NodeAddress {
            generation: self.generation + 1,
            index: d as u64 * (self.index - 1) + ell as u64,
        }
    }

    pub fn parent(self, d: u32) -> Option<Self> {
        if self.generation == 0 {
            return None;
        }
        Some(NodeAddress {
            generation: self.generation - 1,
            index: (self.index - 1) / d as u64 + 1,
        })
    }

    /// Whether the node lies in the leftmost `d1`-ary subtree: every digit of
    /// `index - 1`, written in base `d` with `generation` digits, is below `d1`.
    pub fn in_defect_subtree(self, d: u32, d1: u32) -> bool {
        let mut rest = self.index - 1;
        for _ in 0..self.generation {
            if (rest % d as u64) >= d1 as u64 {
                return false;
            }
            rest /= d as u64;
        }
        true
    }
}
