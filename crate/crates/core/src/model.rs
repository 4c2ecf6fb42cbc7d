//! Tree geometry and defect placement.

use alloc::format;

use crate::disorder::{DisorderSpec, NodeAddress};
use crate::error::{Error, Result};

/// How the potential is modified inside the defect structure `T~` (the
/// leftmost `d1`-ary subtree; the leftmost branch when `d1 = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum DefectKind {
    /// Homogeneous disorder: no defect.
    None,
    /// Leftmost branch carries `V + u`; requires `d1 = 1`.
    BranchShift { u: f64 },
    /// Defect subtree carries the constant potential `u`.
    SubtreeConstant { u: f64 },
    /// Defect subtree carries `V + u`.
    SubtreeShift { u: f64 },
}

impl DefectKind {
    pub fn u(&self) -> Option<f64> {
        match *self {
            DefectKind::None => None,
            DefectKind::BranchShift { u }
            | DefectKind::SubtreeConstant { u }
            | DefectKind::SubtreeShift { u } => Some(u),
        }
    }

    /// Same kind with the potential replaced.
    pub fn with_u(&self, u: f64) -> DefectKind {
        match self {
            DefectKind::None => DefectKind::None,
            DefectKind::BranchShift { .. } => DefectKind::BranchShift { u },
            DefectKind::SubtreeConstant { .. } => DefectKind::SubtreeConstant { u },
            DefectKind::SubtreeShift { .. } => DefectKind::SubtreeShift { u },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DefectKind::None => "none",
            DefectKind::BranchShift { .. } => "branch_shift",
            DefectKind::SubtreeConstant { .. } => "subtree_constant",
            DefectKind::SubtreeShift { .. } => "subtree_shift",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(deny_unknown_fields)
)]
pub struct ModelSpec {
    /// Arity of the tree.
    pub d: u32,
    /// Arity of the defect subtree, `1 <= d1 < d`.
    pub d1: u32,
    pub bulk: DisorderSpec,
    pub defect: DefectKind,
}

impl ModelSpec {
    pub fn new(d: u32, d1: u32, bulk: DisorderSpec, defect: DefectKind) -> Result<Self> {
        let m = ModelSpec {
            d,
            d1,
            bulk,
            defect,
        };
        m.validate()?;
        Ok(m)
    }

    /// Homogeneous-disorder model (`d1` is irrelevant and set to 1).
    pub fn homogeneous(d: u32, bulk: DisorderSpec) -> Result<Self> {
        Self::new(d, 1, bulk, DefectKind::None)
    }

    /// No bulk disorder, constant potential `u` on the defect subtree.
    pub fn deterministic(d: u32, d1: u32, u: f64) -> Result<Self> {
        Self::new(
            d,
            d1,
            DisorderSpec::Constant { c: 0.0 },
            DefectKind::SubtreeConstant { u },
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidSpec(format!(
                "tree arity d must be >= 2, got {}",
                self.d
            )));
        }
        if self.d1 < 1 || self.d1 >= self.d {
            return Err(Error::InvalidSpec(format!(
                "defect arity must satisfy 1 <= d1 < d, got d1 = {}, d = {}",
                self.d1, self.d
            )));
        }
        if matches!(self.defect, DefectKind::BranchShift { .. }) && self.d1 != 1 {
            return Err(Error::InvalidSpec(format!(
                "branch_shift defect requires d1 = 1, got d1 = {}",
                self.d1
            )));
        }
        if let Some(u) = self.defect.u() {
            if !u.is_finite() {
                return Err(Error::InvalidSpec(format!("u must be finite, got {u}")));
            }
        }
        self.bulk.validate()
    }

    pub fn with_u(&self, u: f64) -> ModelSpec {
        ModelSpec {
            defect: self.defect.with_u(u),
            ..self.clone()
        }
    }

    /// Potential of the defect, `0` for the homogeneous model.
    pub fn u(&self) -> f64 {
        self.defect.u().unwrap_or(0.0)
    }

    pub fn has_defect(&self) -> bool {
        !matches!(self.defect, DefectKind::None)
    }

    /// Potential at a node given its bulk draw and defect membership.
    #[inline]
    pub fn potential(&self, bulk_value: f64, in_defect: bool) -> f64 {
        if !in_defect {
            return bulk_value;
        }
        match self.defect {
            DefectKind::None => bulk_value,
            DefectKind::BranchShift { u } | DefectKind::SubtreeShift { u } => bulk_value + u,
            DefectKind::SubtreeConstant { u } => u,
        }
    }

    /// Whether the potential at a defect node ignores the bulk draw.
    pub fn defect_is_constant(&self) -> bool {
        matches!(self.defect, DefectKind::SubtreeConstant { .. })
    }

    /// Defect membership decided from the address alone.
    pub fn in_defect(&self, addr: NodeAddress) -> bool {
        self.has_defect() && addr.in_defect_subtree(self.d, self.d1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arity_constraints() {
        let g = DisorderSpec::gaussian(0.0, 1.0).unwrap();
        assert!(ModelSpec::new(3, 3, g.clone(), DefectKind::None).is_err());
        assert!(ModelSpec::new(1, 1, g.clone(), DefectKind::None).is_err());
        assert!(ModelSpec::new(3, 0, g.clone(), DefectKind::None).is_err());
        assert!(ModelSpec::new(3, 2, g.clone(), DefectKind::BranchShift { u: 1.0 }).is_err());
        assert!(ModelSpec::new(3, 1, g, DefectKind::BranchShift { u: 1.0 }).is_ok());
    }

    #[test]
    fn potentials() {
        let g = DisorderSpec::gaussian(0.0, 1.0).unwrap();
        let m = ModelSpec::new(3, 2, g.clone(), DefectKind::SubtreeConstant { u: 2.0 }).unwrap();
        assert_eq!(m.potential(0.3, true), 2.0);
        assert_eq!(m.potential(0.3, false), 0.3);
        let m = ModelSpec::new(3, 2, g, DefectKind::SubtreeShift { u: 2.0 }).unwrap();
        assert_eq!(m.potential(0.5, true), 2.5);
    }
}
