use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds used by every check in the crate.
///
/// `abs_tol` bounds residuals of identities that hold exactly in exact
/// arithmetic. `rank_cutoff` decides numerical rank: an eigenvalue of a
/// positive semidefinite matrix is treated as zero when it is at most
/// `rank_cutoff` times the largest one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub abs_tol: f64,
    pub rank_cutoff: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-8, rank_cutoff: 1e-10 }
    }
}

impl ToleranceConfig {
    pub fn new(abs_tol: f64, rank_cutoff: f64) -> Result<Self> {
        let cfg = Self { abs_tol, rank_cutoff };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_abs_tol(abs_tol: f64) -> Result<Self> {
        Self::new(abs_tol, Self::default().rank_cutoff)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::Invalid(format!("abs_tol must be positive, got {}", self.abs_tol)));
        }
        if !(self.rank_cutoff > 0.0 && self.rank_cutoff.is_finite()) {
            return Err(Error::Invalid(format!(
                "rank_cutoff must be positive, got {}",
                self.rank_cutoff
            )));
        }
        Ok(())
    }

    /// Threshold for quantities obtained from a linear solve (projection
    /// defects, spectra of Radon–Nikodym derivatives).
    pub fn solved_tol(&self) -> f64 {
        100.0 * self.abs_tol
    }

    /// Gap used to separate eigenvalue clusters during joint diagonalization.
    pub fn cluster_gap(&self) -> f64 {
        self.abs_tol.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let t = ToleranceConfig::default();
        assert_eq!(t.abs_tol, 1e-8);
        assert_eq!(t.rank_cutoff, 1e-10);
        assert!(t.validate().is_ok());
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(ToleranceConfig::new(0.0, 1e-10).is_err());
        assert!(ToleranceConfig::new(1e-8, -1.0).is_err());
        assert!(ToleranceConfig::new(f64::NAN, 1e-10).is_err());
    }
}
