use serde::{Deserialize, Serialize};

use crate::error::{param_err, Result};

/// Moment-boundedness parameters of the inlier distribution.
///
/// `sos_degree` is carried for completeness. The direction oracles that drive
/// the filter never consume it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentParams {
    /// Moment order, even and at least 2.
    pub t: u32,
    /// Sparsity level.
    pub k: usize,
    /// Bound on the `t`-th moment of the inliers in `k`-sparse directions.
    pub moment_bound: f64,
    /// Inlier fraction, in `(0, 1/2)`.
    pub alpha: f64,
    pub sos_degree: u32,
}

impl MomentParams {
    pub fn new(t: u32, k: usize, moment_bound: f64, alpha: f64) -> Result<Self> {
        let params = Self {
            t,
            k,
            moment_bound,
            alpha,
            sos_degree: t,
        };
        params.validate()?;
        Ok(params)
    }

    /// Gaussian defaults: `M = t^{t/2}`.
    pub fn gaussian(t: u32, k: usize, alpha: f64) -> Result<Self> {
        Self::new(t, k, gaussian_moment_bound(t), alpha)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t < 2 || self.t % 2 != 0 {
            return param_err(format!(
                "moment order t must be even and >= 2, got {}",
                self.t
            ));
        }
        if self.k == 0 {
            return param_err("sparsity k must be >= 1");
        }
        if !(self.moment_bound > 0.0 && self.moment_bound.is_finite()) {
            return param_err(format!(
                "moment bound M must be positive, got {}",
                self.moment_bound
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return param_err(format!("alpha must lie in (0, 1/2), got {}", self.alpha));
        }
        Ok(())
    }

    /// Checks `k <= n` against a concrete ambient dimension.
    pub fn validate_for_dim(&self, n: usize) -> Result<()> {
        self.validate()?;
        if self.k > n {
            return param_err(format!("sparsity k = {} exceeds dimension n = {n}", self.k));
        }
        Ok(())
    }

    /// Default filter moment scale `2^t * 8 * M`: the empirical slack `8M` on
    /// the inliers, times the triangle factor `2^t` for pairwise differences.
    pub fn default_filter_moment(&self) -> f64 {
        2f64.powi(self.t as i32) * 8.0 * self.moment_bound
    }

    /// `ceil(24/alpha * ln 10)` independent rounds drive the chance that no
    /// round succeeds below 0.1 at a per-round success rate of `alpha/24`.
    pub fn default_rounds(&self) -> usize {
        default_rounds(self.alpha)
    }

    /// Candidates closer than `M^{1/t} alpha^{-1/t}` are merged in the list.
    pub fn merge_radius(&self) -> f64 {
        let t = self.t as f64;
        self.moment_bound.powf(1.0 / t) * self.alpha.powf(-1.0 / t)
    }

    /// Sanity ceiling on the list error, `20 (6 2^t 8 M)^{1/t} alpha^{-6/t}`.
    pub fn error_ceiling(&self) -> f64 {
        let t = self.t as f64;
        let scale = 6.0 * 2f64.powf(t) * 8.0 * self.moment_bound;
        20.0 * scale.powf(1.0 / t) * self.alpha.powf(-6.0 / t)
    }
}

pub fn gaussian_moment_bound(t: u32) -> f64 {
    (t as f64).powf(t as f64 / 2.0)
}

pub fn default_rounds(alpha: f64) -> usize {
    (24.0 / alpha * 10f64.ln()).ceil() as usize
}
