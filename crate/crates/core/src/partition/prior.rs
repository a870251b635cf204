use serde::{Deserialize, Serialize};

use super::PartitionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionKind {
    Trivial,
    Split,
}

/// Shape of the partition prior.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorKind {
    /// `p(Π₀) = 1 − g^{1+ℓ}`, `p(Π_{r,m}) = g^{1+ℓ} / (d · N_r)`.
    #[default]
    Geometric,
    /// Equal mass `1 / (1 + Σ_r N_r)` on every partition, so the modal
    /// partition is the most likely one.
    Uniform,
}

/// Prior over the partition space of a node at depth ℓ:
/// `p(Π₀) = 1 − g^{1+ℓ}` and `p(Π_{r,m}) = g^{1+ℓ} / (d · N_r)`, where `N_r`
/// is the number of candidate splits along dimension `r`. With
/// `depth_dependent = false` the exponent is fixed at 1. The uniform kind
/// ignores `g` and depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    pub g: f64,
    pub depth_dependent: bool,
    #[serde(default)]
    pub kind: PriorKind,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self { g: 0.99, depth_dependent: true, kind: PriorKind::Geometric }
    }
}

impl PriorConfig {
    pub fn new(g: f64, depth_dependent: bool) -> Result<Self, PartitionError> {
        let cfg = Self { g, depth_dependent, kind: PriorKind::Geometric };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn uniform() -> Self {
        Self { kind: PriorKind::Uniform, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), PartitionError> {
        if self.g > 0.0 && self.g < 1.0 {
            Ok(())
        } else {
            Err(PartitionError::InvalidBase(self.g))
        }
    }

    /// `ln g^{1+ℓ}`, the log mass given to splitting at depth ℓ.
    fn log_split_mass(&self, depth: usize) -> f64 {
        let exponent = if self.depth_dependent { 1.0 + depth as f64 } else { 1.0 };
        exponent * self.g.ln()
    }
}

/// Log prior of one partition. `d` is the full feature count, `n_splits`
/// the candidate count on the chosen dimension (ignored for the trivial
/// partition; must be ≥ 1 for a split) and `total_splits` the candidate count
/// over all dimensions (used by the uniform kind only).
pub fn partition_log_prior(
    kind: PartitionKind,
    depth: usize,
    d: usize,
    n_splits: usize,
    total_splits: usize,
    cfg: &PriorConfig,
) -> f64 {
    if cfg.kind == PriorKind::Uniform {
        return -((1 + total_splits) as f64).ln();
    }
    let log_split = cfg.log_split_mass(depth);
    match kind {
        // ln(1 − e^{log_split})
        PartitionKind::Trivial => (-log_split.exp_m1()).ln(),
        PartitionKind::Split => {
            debug_assert!(d >= 1 && n_splits >= 1);
            log_split - (d as f64).ln() - (n_splits as f64).ln()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn trivial_at_root() {
        let lp = partition_log_prior(PartitionKind::Trivial, 0, 3, 0, 0, &PriorConfig::default());
        assert_relative_eq!(lp, (0.01f64).ln(), max_relative = 1e-12);
    }

    #[test]
    fn split_at_root_two_dims_one_candidate() {
        let lp = partition_log_prior(PartitionKind::Split, 0, 2, 1, 0, &PriorConfig::default());
        assert_relative_eq!(lp, (0.495f64).ln(), max_relative = 1e-14);
    }

    #[test]
    fn trivial_dominates_deep_nodes() {
        let cfg = PriorConfig::default();
        let deep = partition_log_prior(PartitionKind::Trivial, 5000, 1, 1, 0, &cfg);
        assert!(deep > -1e-20 && deep <= 0.0);
        let mut prev = f64::NEG_INFINITY;
        for depth in 0..200 {
            let lp = partition_log_prior(PartitionKind::Trivial, depth, 1, 1, 0, &cfg);
            assert!(lp > prev);
            prev = lp;
        }
    }

    #[test]
    fn depth_independent_variant_fixes_exponent() {
        let cfg = PriorConfig::new(0.99, false).unwrap();
        for depth in [0, 3, 40] {
            assert_relative_eq!(
                partition_log_prior(PartitionKind::Split, depth, 2, 7, 0, &cfg),
                (0.99f64 / 14.0).ln(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn trivial_to_split_ratio_increases_with_depth() {
        let cfg = PriorConfig::default();
        let (d, n_r) = (4, 9);
        let ratio = |depth| {
            partition_log_prior(PartitionKind::Trivial, depth, d, n_r, 0, &cfg)
                - partition_log_prior(PartitionKind::Split, depth, d, n_r, 0, &cfg)
        };
        for depth in 0..100 {
            assert!(ratio(depth + 1) > ratio(depth));
        }
    }

    #[test]
    fn uniform_gives_equal_mass() {
        let cfg = PriorConfig::uniform();
        for depth in [0, 9] {
            let t = partition_log_prior(PartitionKind::Trivial, depth, 2, 0, 5, &cfg);
            let s = partition_log_prior(PartitionKind::Split, depth, 2, 3, 5, &cfg);
            assert_eq!(t, s);
            assert_relative_eq!(t, -(6f64).ln(), max_relative = 1e-15);
        }
    }

    #[test]
    fn base_must_be_in_unit_interval() {
        assert!(PriorConfig::new(1.0, true).is_err());
        assert!(PriorConfig::new(0.0, true).is_err());
        assert!(PriorConfig::new(0.5, true).is_ok());
    }
}
