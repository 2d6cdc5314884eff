//! Corrupted-sample generators.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{param_err, Error, Result};
use crate::params::{gaussian_moment_bound, MomentParams};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adversary {
    /// All outliers at one point far away along a dense direction.
    FarCluster,
    /// `floor(1/alpha) - 1` decoy Gaussian clusters at independent sparse means.
    SparseMixture,
    /// Inlier copies reflected through `-mu`.
    MirrorShift,
    /// Entries uniform on a wide box.
    UniformNoise,
}

impl Adversary {
    pub const ALL: [Adversary; 4] = [
        Adversary::FarCluster,
        Adversary::SparseMixture,
        Adversary::MirrorShift,
        Adversary::UniformNoise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Adversary::FarCluster => "far_cluster",
            Adversary::SparseMixture => "sparse_mixture",
            Adversary::MirrorShift => "mirror_shift",
            Adversary::UniformNoise => "uniform_noise",
        }
    }
}

impl fmt::Display for Adversary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Adversary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Adversary::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| Error::Parameter(format!("unknown adversary {s:?}")))
    }
}

/// A synthetic experiment: dimensions, moment parameters, planted mean
/// norm, adversary, and trial count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub t: u32,
    pub alpha: f64,
    pub moment_bound: f64,
    pub mu_norm: f64,
    pub adversary: Adversary,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    /// n = 16, k = 3, t = 2, alpha = 0.2, m = 300, |mu| = 8, sparse mixture.
    fn default() -> Self {
        Self {
            n: 16,
            m: 300,
            k: 3,
            t: 2,
            alpha: 0.2,
            moment_bound: gaussian_moment_bound(2),
            mu_norm: 8.0,
            adversary: Adversary::SparseMixture,
            trials: 20,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn params(&self) -> Result<MomentParams> {
        let p = MomentParams::new(self.t, self.k, self.moment_bound, self.alpha)?;
        p.validate_for_dim(self.n)?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        if !(self.mu_norm >= 0.0 && self.mu_norm.is_finite()) {
            return param_err(format!(
                "mu_norm must be finite and >= 0, got {}",
                self.mu_norm
            ));
        }
        if self.inlier_count() < 2 {
            return param_err(format!(
                "floor(alpha * m) = {} inliers; need at least 2",
                self.inlier_count()
            ));
        }
        Ok(())
    }

    /// `floor(alpha * m)`, robust to representation error in `alpha * m`.
    pub fn inlier_count(&self) -> usize {
        inlier_count(self.alpha, self.m)
    }

    /// Applies `key = value` settings. Unknown keys are an error.
    pub fn apply_settings(&mut self, settings: &BTreeMap<String, String>) -> Result<()> {
        for (key, value) in settings {
            let bad = || Error::Parameter(format!("bad value {value:?} for {key}"));
            match key.as_str() {
                "n" => self.n = value.parse().map_err(|_| bad())?,
                "m" => self.m = value.parse().map_err(|_| bad())?,
                "k" => self.k = value.parse().map_err(|_| bad())?,
                "t" => {
                    self.t = value.parse().map_err(|_| bad())?;
                    if !settings.contains_key("M") && !settings.contains_key("moment_bound") {
                        self.moment_bound = gaussian_moment_bound(self.t);
                    }
                }
                "alpha" => self.alpha = value.parse().map_err(|_| bad())?,
                "M" | "moment_bound" => self.moment_bound = value.parse().map_err(|_| bad())?,
                "mu_norm" => self.mu_norm = value.parse().map_err(|_| bad())?,
                "adversary" => self.adversary = value.parse()?,
                "trials" => self.trials = value.parse().map_err(|_| bad())?,
                "seed" => self.seed = value.parse().map_err(|_| bad())?,
                _ => return param_err(format!("unknown scenario key {key:?}")),
            }
        }
        Ok(())
    }
}

pub fn inlier_count(alpha: f64, m: usize) -> usize {
    (alpha * m as f64 + 1e-9).floor() as usize
}

/// A generated dataset and the mean it was planted around.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub data: Dataset,
    pub mu_true: Vec<f64>,
}

/// k-sparse vector with `norm / sqrt(k)` entries of random sign on a random support.
fn planted_mean(rng: &mut ChaCha8Rng, n: usize, k: usize, norm: f64) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut mu = vec![0.0; n];
    let mag = norm / (k as f64).sqrt();
    for &i in &idx[..k] {
        mu[i] = if rng.random_bool(0.5) { mag } else { -mag };
    }
    mu
}

fn gaussian_around(rng: &mut ChaCha8Rng, center: &[f64]) -> Vec<f64> {
    center
        .iter()
        .map(|c| c + rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Draws `floor(alpha m)` inliers from `N(mu, I)` plus adversarial outliers.
/// Rows are shuffled; the mask records which are inliers.
pub fn gen_corrupted(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let (n, m, k) = (config.n, config.m, config.k);
    let mut rng = seed::rng(config.seed, &[0x5ce0]);
    let mu = planted_mean(&mut rng, n, k, config.mu_norm);
    let inliers: Vec<Vec<f64>> = (0..config.inlier_count())
        .map(|_| gaussian_around(&mut rng, &mu))
        .collect();
    let outlier_count = m - inliers.len();

    let outliers: Vec<Vec<f64>> = match config.adversary {
        Adversary::FarCluster => {
            let dist = 10.0 * config.mu_norm;
            let scale = dist / (n as f64).sqrt();
            let spot: Vec<f64> = mu
                .iter()
                .map(|c| c + if rng.random_bool(0.5) { scale } else { -scale })
                .collect();
            vec![spot; outlier_count]
        }
        Adversary::SparseMixture => {
            let clusters = (1.0 / config.alpha + 1e-9).floor() as usize - 1;
            let means: Vec<Vec<f64>> = (0..clusters)
                .map(|_| planted_mean(&mut rng, n, k, config.mu_norm))
                .collect();
            (0..outlier_count)
                .map(|i| gaussian_around(&mut rng, &means[i % clusters]))
                .collect()
        }
        Adversary::MirrorShift => (0..outlier_count)
            .map(|i| {
                let x = &inliers[i % inliers.len()];
                // reflection through -mu: -2 mu - x
                x.iter().zip(&mu).map(|(xi, mi)| -2.0 * mi - xi).collect()
            })
            .collect(),
        Adversary::UniformNoise => {
            let half = 10.0 * config.mu_norm.max(1.0);
            (0..outlier_count)
                .map(|_| (0..n).map(|_| rng.random_range(-half..half)).collect())
                .collect()
        }
    };

    let mut rows: Vec<(Vec<f64>, bool)> = inliers
        .into_iter()
        .map(|x| (x, true))
        .chain(outliers.into_iter().map(|x| (x, false)))
        .collect();
    rows.shuffle(&mut rng);
    let (rows, mask): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let data = Dataset::from_rows(&rows)?.with_inlier_mask(mask)?;
    Ok(Scenario { data, mu_true: mu })
}
