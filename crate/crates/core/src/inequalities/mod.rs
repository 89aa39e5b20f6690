//! Global and lemma-level concavity inequalities as stderr-aware checks.

mod gap;
mod lemmas;
mod verdict;

use serde::Serialize;

use crate::integrals::{Method, RngSpec, DEFAULT_MC_BUDGET};

pub use gap::{
    c_of_r, default_lambda_grid, gap, gap_from_measures, profile_from_measures, profile_p_star, GapReport,
    PairMeasures, ProfileReport, DEFAULT_P_CAP, DEFAULT_P_TOL,
};
pub use lemmas::{
    check_cfm, check_dilate_local, check_est2, check_grad_laplace, check_star_moment, dilate_concavity,
    jensen_bound, jensen_lower_bound, optimal_epsilon, CheckReport, DilateReport, JensenReport, EST2_THRESHOLD,
};
pub use verdict::{Verdict, DETERMINISTIC_FLOOR, HOLDS_SIGMAS, VIOLATION_SIGMAS};

/// How measures are estimated inside a check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalConfig {
    pub method: Method,
    pub budget: u64,
    pub rng: RngSpec,
    /// Share one sample stream between all measures of a gap. The reported
    /// stderr is then the conservative sum of absolute delta-method terms.
    pub common_random_numbers: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { method: Method::Auto, budget: DEFAULT_MC_BUDGET, rng: RngSpec::new(0), common_random_numbers: false }
    }
}
