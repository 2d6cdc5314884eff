//! Data generation, adversaries, verifiers and experiment orchestration.

pub mod experiment;
pub mod lemmas;
pub mod scenario;
pub mod transform;

pub use experiment::{
    inlier_sparse_variance, parse_settings, run_trial, run_trials, sweep, trial_seed,
    write_sweep_csv, SweepRow, TrialResult,
};
pub use lemmas::{submartingale_check, verify_lemmas, LemmaReport, LemmaResult, SubmartingaleSpec};
pub use scenario::{gen_corrupted, inlier_count, Adversary, Scenario, ScenarioConfig};
pub use transform::{random_signed_permutation, SignedPermutation};
