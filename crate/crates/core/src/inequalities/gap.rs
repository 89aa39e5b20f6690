use serde::Serialize;

use super::{EvalConfig, Verdict};
use crate::bodies::ConvexBody;
use crate::error::{input, GzError, Result};
use crate::integrals::{mu_of_body, Estimate, EstimateMethod};
use crate::measures::Potential;

/// `c(R) = 2 / (sqrt(R) + 1)^2`.
pub fn c_of_r(r: f64) -> Result<f64> {
    if !(r >= 1.0) || !r.is_finite() {
        return input(format!("R must be a finite number >= 1, got {r}"));
    }
    let s = r.sqrt() + 1.0;
    Ok(2.0 / (s * s))
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub p: f64,
    pub lambda: f64,
    pub gap: Estimate,
    pub verdict: Verdict,
    pub mu_k: Estimate,
    pub mu_l: Estimate,
    pub mu_m: Estimate,
    pub common_random_numbers: bool,
}

fn check_positive(name: &str, e: &Estimate) -> Result<()> {
    if !(e.value > 3.0 * e.stderr) || e.value <= 0.0 {
        return Err(GzError::Degenerate(format!(
            "{name} = {:.3e} is not positive at 3 stderr ({:.3e})",
            e.value, e.stderr
        )));
    }
    Ok(())
}

/// `mu(M)^p - lambda mu(K)^p - (1 - lambda) mu(L)^p` from the three estimates.
pub fn gap_from_measures(
    mu_k: Estimate,
    mu_l: Estimate,
    mu_m: Estimate,
    lambda: f64,
    p: f64,
    common_random_numbers: bool,
) -> GapReport {
    let pw = |e: &Estimate| e.value.powf(p);
    let value = pw(&mu_m) - lambda * pw(&mu_k) - (1.0 - lambda) * pw(&mu_l);
    let terms = [
        p * mu_m.value.powf(p - 1.0) * mu_m.stderr,
        lambda * p * mu_k.value.powf(p - 1.0) * mu_k.stderr,
        (1.0 - lambda) * p * mu_l.value.powf(p - 1.0) * mu_l.stderr,
    ];
    let stderr = if common_random_numbers {
        terms.iter().map(|t| t.abs()).sum()
    } else {
        terms.iter().map(|t| t * t).sum::<f64>().sqrt()
    };
    let deterministic = [&mu_k, &mu_l, &mu_m].iter().all(|e| e.is_deterministic());
    let gap = Estimate {
        value,
        stderr,
        budget: mu_k.budget + mu_l.budget + mu_m.budget,
        method: if deterministic { mu_m.method } else { EstimateMethod::Mc },
    };
    GapReport { p, lambda, verdict: Verdict::from_margin(&gap), gap, mu_k, mu_l, mu_m, common_random_numbers }
}

fn check_gap_inputs(p: &Potential, k: &ConvexBody, l: &ConvexBody, lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return input(format!("lambda must lie in [0, 1], got {lambda}"));
    }
    if k.dim() != l.dim() || k.dim() != p.dim() {
        return input(format!("dimension mismatch: measure {}, K {}, L {}", p.dim(), k.dim(), l.dim()));
    }
    Ok(())
}

fn measure(p: &Potential, body: &ConvexBody, cfg: &EvalConfig, stream: u64) -> Result<Estimate> {
    let rng = if cfg.common_random_numbers { cfg.rng } else { cfg.rng.substream(stream) };
    mu_of_body(p, body, cfg.method, cfg.budget, rng)
}

/// p-concavity gap of `mu` at `(K, L, lambda)`.
pub fn gap(p: &Potential, k: &ConvexBody, l: &ConvexBody, lambda: f64, exponent: f64, cfg: &EvalConfig) -> Result<GapReport> {
    check_gap_inputs(p, k, l, lambda)?;
    if !(exponent > 0.0) {
        return input(format!("p must be positive, got {exponent}"));
    }
    let mu_k = measure(p, k, cfg, 0)?;
    let mu_l = measure(p, l, cfg, 1)?;
    check_positive("mu(K)", &mu_k)?;
    check_positive("mu(L)", &mu_l)?;
    let m = k.minkowski_comb(l, lambda)?;
    let mu_m = measure(p, &m, cfg, 2)?;
    Ok(gap_from_measures(mu_k, mu_l, mu_m, lambda, exponent, cfg.common_random_numbers))
}

/// Measures of `K`, `L` and of every combination on a lambda grid. The gap
/// at any exponent is a cheap function of these.
#[derive(Debug, Clone, Serialize)]
pub struct PairMeasures {
    pub mu_k: Estimate,
    pub mu_l: Estimate,
    pub lambdas: Vec<f64>,
    pub mu_m: Vec<Estimate>,
    pub common_random_numbers: bool,
}

impl PairMeasures {
    pub fn new(p: &Potential, k: &ConvexBody, l: &ConvexBody, lambdas: &[f64], cfg: &EvalConfig) -> Result<Self> {
        for &lambda in lambdas {
            check_gap_inputs(p, k, l, lambda)?;
        }
        let mu_k = measure(p, k, cfg, 0)?;
        let mu_l = measure(p, l, cfg, 1)?;
        check_positive("mu(K)", &mu_k)?;
        check_positive("mu(L)", &mu_l)?;
        let mu_m = lambdas
            .iter()
            .enumerate()
            .map(|(i, &lambda)| measure(p, &k.minkowski_comb(l, lambda)?, cfg, 2 + i as u64))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { mu_k, mu_l, lambdas: lambdas.to_vec(), mu_m, common_random_numbers: cfg.common_random_numbers })
    }

    pub fn reports(&self, exponent: f64) -> Vec<GapReport> {
        self.lambdas
            .iter()
            .zip(&self.mu_m)
            .map(|(&lambda, m)| gap_from_measures(self.mu_k, self.mu_l, *m, lambda, exponent, self.common_random_numbers))
            .collect()
    }

    /// Worst verdict over the lambda grid, and the smallest gap.
    pub fn verdict(&self, exponent: f64) -> (Verdict, f64) {
        let reports = self.reports(exponent);
        let worst = Verdict::all(reports.iter().map(|r| r.verdict));
        let min_gap = reports.iter().map(|r| r.gap.value).fold(f64::INFINITY, f64::min);
        (worst, min_gap)
    }
}

pub const DEFAULT_P_CAP: f64 = 4.0;
pub const DEFAULT_P_TOL: f64 = 1e-3;

pub fn default_lambda_grid() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileReport {
    pub lambdas: Vec<f64>,
    pub p_star: f64,
    /// `[p_ok, p_bad]` bracket; when `flagged`, bisection stopped on an
    /// inconclusive verdict and the bracket is the result.
    pub interval: (f64, f64),
    pub flagged: bool,
    pub tolerance: f64,
    pub p_cap: f64,
    pub tightest_lambda: f64,
    pub reports: Vec<GapReport>,
    pub half_p_verdict: Verdict,
}

/// Largest exponent at which the gap holds on the whole lambda grid, by
/// bisection on `[p_lo, p_cap]`.
pub fn profile_p_star(
    p: &Potential,
    k: &ConvexBody,
    l: &ConvexBody,
    lambdas: &[f64],
    p_lo: f64,
    p_cap: f64,
    tol: f64,
    cfg: &EvalConfig,
) -> Result<ProfileReport> {
    if lambdas.is_empty() || lambdas.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
        return input("lambda grid must be a non-empty subset of (0, 1)");
    }
    if !(p_cap > 0.0 && p_cap <= 4.0) {
        return input(format!("p_cap must lie in (0, 4], got {p_cap}"));
    }
    if !(tol >= 1e-3) {
        return input(format!("bisection tolerance must be at least 1e-3, got {tol}"));
    }
    if !(p_lo >= 0.0 && p_lo < p_cap) {
        return input(format!("p_lo must lie in [0, p_cap), got {p_lo}"));
    }
    let pair = PairMeasures::new(p, k, l, lambdas, cfg)?;
    profile_from_measures(&pair, p_lo, p_cap, tol)
}

pub fn profile_from_measures(pair: &PairMeasures, p_lo: f64, p_cap: f64, tol: f64) -> Result<ProfileReport> {
    let (mut lo, mut hi) = (p_lo, p_cap);
    let mut flagged = false;
    if pair.verdict(p_cap).0 == Verdict::Holds {
        lo = p_cap;
    } else {
        if p_lo > 0.0 {
            match pair.verdict(p_lo).0 {
                Verdict::Holds => {}
                _ => {
                    flagged = true;
                    hi = p_lo;
                }
            }
        }
        while !flagged && hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            match pair.verdict(mid).0 {
                Verdict::Holds => lo = mid,
                Verdict::Violated => hi = mid,
                Verdict::Inconclusive => {
                    flagged = true;
                    hi = mid;
                }
            }
        }
    }
    let p_star = lo;
    let reports = pair.reports(p_star);
    let tightest_lambda = reports
        .iter()
        .min_by(|a, b| a.gap.value.total_cmp(&b.gap.value))
        .map(|r| r.lambda)
        .unwrap_or(f64::NAN);
    let half_p_verdict = if p_star > 0.0 { pair.verdict(p_star / 2.0).0 } else { Verdict::Holds };
    Ok(ProfileReport {
        lambdas: pair.lambdas.clone(),
        p_star,
        interval: (lo, if lo == p_cap { p_cap } else { hi }),
        flagged,
        tolerance: tol,
        p_cap,
        tightest_lambda,
        reports,
        half_p_verdict,
    })
}
