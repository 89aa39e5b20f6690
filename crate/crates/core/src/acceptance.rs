//! The acceptance suite: thirteen end-to-end checks with fixed seeds.

use std::time::Instant;

use serde::Serialize;

use crate::bodies::{boundary_curve_2d, ConvexBody, DEFAULT_RHO_MIN};
use crate::error::Result;
use crate::inequalities::{
    c_of_r, check_cfm, check_dilate_local, check_est2, check_grad_laplace, check_star_moment, default_lambda_grid,
    dilate_concavity, jensen_lower_bound, profile_p_star, CheckReport, EvalConfig, PairMeasures, Verdict,
    DEFAULT_P_CAP, DEFAULT_P_TOL,
};
use crate::integrals::{moment, whole_space_proxy, Method, RngSpec, DEFAULT_MC_BUDGET};
use crate::localform::{alpha, beta, bochner_residual_1d, first_variation_2d, sample_psi, second_variation_2d};
use crate::measures::Potential;
use crate::search::{random_pair, search_min_gap, SearchClass, SearchConfig, SearchSpace};

pub const CRITERIA: usize = 13;
const SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {} ({:.1} s): {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.seconds,
            self.detail
        )
    }
}

pub fn title(id: usize) -> &'static str {
    match id {
        1 => "constant c(R)",
        2 => "whole-plane moment of 1/(|x|^2+2)",
        3 => "Jensen bound at epsilon = 0",
        4 => "alpha suite",
        5 => "beta suite",
        6 => "one-dimensional Bochner identity",
        7 => "shape variation formulas",
        8 => "gaussian gap at p = 1/(2n)",
        9 => "gap at p = c(R)/n for R = 2.5",
        10 => "lemma suites",
        11 => "dimension-one profile",
        12 => "dilate concavity",
        13 => "search guard at p = 0.25",
        _ => "unknown",
    }
}

/// Runs criterion `id` (1-based). Errors count as failures.
pub fn run(id: usize, budget: u64) -> CriterionResult {
    let start = Instant::now();
    let outcome = match id {
        1 => c1(),
        2 => c2(budget),
        3 => c3(),
        4 => c4(),
        5 => c5(),
        6 => c6(),
        7 => c7(),
        8 => c8(budget),
        9 => c9(),
        10 => c10(budget),
        11 => c11(),
        12 => c12(),
        13 => c13(budget),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult { id, title: title(id), passed, detail, seconds: start.elapsed().as_secs_f64() }
}

pub fn run_all(budget: u64) -> Vec<CriterionResult> {
    (1..=CRITERIA).map(|id| run(id, budget)).collect()
}

type Outcome = Result<(bool, String)>;

fn cfg(method: Method, budget: u64, stream: u64) -> EvalConfig {
    EvalConfig { method, budget, rng: RngSpec::new(SEED).substream(stream), common_random_numbers: false }
}

fn c1() -> Outcome {
    let a = c_of_r(1.0)?;
    let b = c_of_r(4.0)?;
    let grid: Vec<f64> = (0..100).map(|i| c_of_r(1.0 + 24.0 * i as f64 / 99.0)).collect::<Result<_>>()?;
    let decreasing = grid.windows(2).all(|w| w[1] < w[0]);
    Ok((a == 0.5 && b == 2.0 / 9.0 && decreasing, format!("c(1) = {a}, c(4) = {b}, strictly decreasing: {decreasing}")))
}

fn proxy_moment(method: Method, budget: u64) -> Result<crate::integrals::Estimate> {
    let p = Potential::gaussian(2)?;
    let f = |x: &[f64]| 1.0 / (x[0] * x[0] + x[1] * x[1] + 2.0);
    moment(&p, &whole_space_proxy(2), &f, method, budget, RngSpec::new(SEED))
}

fn c2(budget: u64) -> Outcome {
    let q = proxy_moment(Method::Radial, budget)?;
    let mc = proxy_moment(Method::Mc, budget)?;
    let ok = q.stderr == 0.0 && (q.value - 0.298).abs() <= 0.002 && (mc.value - 0.298).abs() <= 0.003;
    Ok((ok, format!("quadrature {:.6}, Monte Carlo {:.6} +- {:.1e} (budget {budget})", q.value, mc.value, mc.stderr)))
}

fn c3() -> Outcome {
    let p = Potential::gaussian(2)?;
    let j = jensen_lower_bound(&p, &whole_space_proxy(2), 0.0, &cfg(Method::Radial, DEFAULT_MC_BUDGET, 0))?;
    let m = proxy_moment(Method::Radial, DEFAULT_MC_BUDGET)?;
    let diff = (j.lhs.value - 2.0 * m.value).abs();
    Ok((j.lhs.value >= 0.5 && diff <= 1e-6, format!("lhs {:.8}, |lhs - 2 moment| = {diff:.2e}", j.lhs.value)))
}

fn c4() -> Outcome {
    let a0 = alpha(0.0)?;
    let a50 = alpha(50.0)?;
    let grid: Vec<(f64, f64)> = (0..=60).map(|i| i as f64 / 10.0).map(|r| Ok((r, alpha(r)?))).collect::<Result<_>>()?;
    let max = grid.iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max);
    let fine: Vec<(f64, f64)> = (0..=6000).map(|i| i as f64 / 1000.0).map(|r| Ok((r, alpha(r)?))).collect::<Result<_>>()?;
    let argmin = fine.iter().min_by(|a, b| a.1.total_cmp(&b.1)).map(|g| g.0).unwrap_or(f64::NAN);
    let ok = a0.abs() <= 1e-10 && a50.abs() <= 1e-8 && max <= 1e-10 && (argmin - 3f64.sqrt()).abs() <= 0.05;
    Ok((ok, format!("alpha(0) = {a0:e}, alpha(50) = {a50:e}, max on grid {max:e}, argmin {argmin:.3}")))
}

fn c5() -> Outcome {
    let b = beta(0.01)?;
    let grid: Vec<f64> = (1..=60).map(|i| beta(i as f64 / 10.0)).collect::<Result<_>>()?;
    let increasing = grid.windows(2).all(|w| w[1] > w[0]);
    let ratio = beta(6.0)? / beta(0.5)?;
    let ok = (b - 1.0).abs() <= 1e-3 && increasing && ratio > 10.0;
    Ok((ok, format!("beta(0.01) = {b:.6}, increasing: {increasing}, beta(6)/beta(0.5) = {ratio:.3e}")))
}

fn c6() -> Outcome {
    let mut worst: f64 = 0.0;
    for r in [0.5, 1.0, 2.0, 3.0] {
        worst = worst.max(bochner_residual_1d(r)?.residual);
    }
    Ok((worst <= 1e-8, format!("largest relative residual {worst:.2e}")))
}

fn c7() -> Outcome {
    let p = Potential::gaussian(2)?;
    let mut ok = true;
    let mut closed: f64 = 0.0;
    for r in [0.5, 1.0, 2.0] {
        let c = boundary_curve_2d(&ConvexBody::ball(2, r)?, 720, DEFAULT_RHO_MIN)?;
        let one = vec![1.0; c.len()];
        let e = (-0.5 * r * r).exp();
        closed = closed.max((first_variation_2d(&p, &c, &one)?.formula - r * e).abs());
        closed = closed.max((second_variation_2d(&p, &c, &one)?.formula - (1.0 - r * r) * e).abs());
    }
    ok &= closed <= 1e-6;
    let mut fd: f64 = 0.0;
    for body in [ConvexBody::ellipsoid(&[2.0, 1.0])?, ConvexBody::smoothed_square(1.0, 0.1)?] {
        let c = boundary_curve_2d(&body, 720, DEFAULT_RHO_MIN)?;
        for psi in [vec![1.0; c.len()], sample_psi(&c, |t| (2.0 * t).cos())] {
            fd = fd.max(first_variation_2d(&p, &c, &psi)?.relative_difference());
            fd = fd.max(second_variation_2d(&p, &c, &psi)?.relative_difference());
        }
    }
    ok &= fd <= 1e-3;
    Ok((ok, format!("disc closed-form error {closed:.2e}, worst finite-difference relative error {fd:.2e}")))
}

/// Worst verdict of `count` seeded pairs; returns (violations, inconclusive, smallest gap).
fn pair_suite(p: &Potential, space: &SearchSpace, count: u64, exponent: f64, lambdas: &[f64], eval: &EvalConfig, stream: u64) -> Result<(usize, usize, f64)> {
    let (mut violated, mut inconclusive, mut min_gap) = (0, 0, f64::INFINITY);
    for i in 0..count {
        let (k, l) = random_pair(space, SEED ^ stream, i)?;
        let e = EvalConfig { rng: eval.rng.substream(stream * 1000 + i), ..*eval };
        let (v, g) = PairMeasures::new(p, &k, &l, lambdas, &e)?.verdict(exponent);
        match v {
            Verdict::Violated => violated += 1,
            Verdict::Inconclusive => inconclusive += 1,
            Verdict::Holds => {}
        }
        min_gap = min_gap.min(g);
    }
    Ok((violated, inconclusive, min_gap))
}

fn c8(budget: u64) -> Outcome {
    let lambdas = default_lambda_grid();
    let g2 = Potential::gaussian(2)?;
    let g3 = Potential::gaussian(3)?;
    let quad = cfg(Method::Auto, budget, 8);
    let mc = cfg(Method::Mc, budget, 8);
    let mut violated = 0;
    let mut parts = Vec::new();
    for (name, p, space, count, lambdas, eval, exponent) in [
        ("n=2 sym", &g2, SearchSpace::new(SearchClass::Sym, 2)?, 50, lambdas.as_slice(), &quad, 0.25),
        ("n=2 origin", &g2, SearchSpace::new(SearchClass::Origin, 2)?, 50, lambdas.as_slice(), &quad, 0.25),
        ("n=3 sym", &g3, SearchSpace::new(SearchClass::Sym, 3)?, 10, &[0.5][..], &mc, 1.0 / 6.0),
        ("n=3 origin", &g3, SearchSpace::new(SearchClass::Origin, 3)?, 10, &[0.5][..], &mc, 1.0 / 6.0),
    ] {
        let (v, inc, min_gap) = pair_suite(p, &space, count, exponent, lambdas, eval, parts.len() as u64 + 1)?;
        violated += v;
        parts.push(format!("{name}: {count} pairs, {v} violated, {inc} inconclusive, min gap {min_gap:.2e}"));
    }
    Ok((violated == 0, parts.join("; ")))
}

fn c9() -> Outcome {
    let p = Potential::diag_quadratic(&[1.0, 4.0])?;
    let exponent = c_of_r(p.ratio())? / 2.0;
    let space = SearchSpace::new(SearchClass::Sym, 2)?;
    let (v, inc, min_gap) = pair_suite(&p, &space, 30, exponent, &default_lambda_grid(), &cfg(Method::Auto, DEFAULT_MC_BUDGET, 9), 9)?;
    Ok((v == 0, format!("R = {}, p = {exponent:.6}: 30 pairs, {v} violated, {inc} inconclusive, min gap {min_gap:.2e}", p.ratio())))
}

struct Tally {
    name: &'static str,
    total: usize,
    violated: usize,
    inconclusive: usize,
    min_margin: f64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self { name, total: 0, violated: 0, inconclusive: 0, min_margin: f64::INFINITY }
    }

    fn add(&mut self, r: &CheckReport) {
        self.total += 1;
        match r.verdict {
            Verdict::Violated => self.violated += 1,
            Verdict::Inconclusive => self.inconclusive += 1,
            Verdict::Holds => {}
        }
        self.min_margin = self.min_margin.min(r.margin.value);
    }

    fn describe(&self) -> String {
        format!(
            "{}: {} bodies, {} violated, {} inconclusive, min margin {:.2e}",
            self.name, self.total, self.violated, self.inconclusive, self.min_margin
        )
    }
}

fn c10(budget: u64) -> Outcome {
    let quad = cfg(Method::Auto, budget, 10);
    let mc = |i: u64| cfg(Method::Mc, budget, 10_000 + i);
    let sym2 = SearchSpace::new(SearchClass::Sym, 2)?;
    let origin2 = SearchSpace::new(SearchClass::Origin, 2)?;
    let origin3 = SearchSpace::new(SearchClass::Origin, 3)?;
    let body = |space: &SearchSpace, stream: u64, i: u64| -> Result<ConvexBody> { Ok(random_pair(space, SEED ^ stream, i)?.0) };

    let mut star = Tally::new("star_moment");
    for i in 0..50 {
        star.add(&check_star_moment(&body(&origin2, 101, i)?, &quad)?);
        star.add(&check_star_moment(&body(&origin3, 102, i)?, &mc(i))?);
    }
    let mut grad = Tally::new("grad_laplace");
    let gauss = Potential::gaussian(2)?;
    let diag = Potential::diag_quadratic(&[1.0, 4.0])?;
    for i in 0..50 {
        let p = if i % 2 == 0 { &gauss } else { &diag };
        grad.add(&check_grad_laplace(p, &body(&sym2, 103, i)?, &quad)?);
    }
    let mut cfm = Tally::new("cfm");
    let mut dilate = Tally::new("dilate_local");
    for i in 0..50 {
        let k = body(&sym2, 104, i)?;
        cfm.add(&check_cfm(&k, &quad)?);
        dilate.add(&check_dilate_local(&k, &quad)?);
    }
    let mut est2 = Tally::new("est2");
    for i in 0..50 {
        est2.add(&check_est2(&body(&sym2, 105, i)?, &quad)?);
    }
    let all = [&star, &grad, &cfm, &dilate, &est2];
    let violated: usize = all.iter().map(|t| t.violated).sum();
    Ok((violated == 0, all.iter().map(|t| t.describe()).collect::<Vec<_>>().join("; ")))
}

fn c11() -> Outcome {
    let p = Potential::gaussian(1)?;
    let k = ConvexBody::interval(1.0, 1.0)?;
    let l = ConvexBody::interval(3.0, 3.0)?;
    let r = profile_p_star(&p, &k, &l, &default_lambda_grid(), 0.0, DEFAULT_P_CAP, DEFAULT_P_TOL, &EvalConfig::default())?;
    Ok((r.p_star >= 1.0 - 2e-3, format!("p_star = {:.4} in [{:.4}, {:.4}], flagged: {}", r.p_star, r.interval.0, r.interval.1, r.flagged)))
}

fn c12() -> Outcome {
    let p = Potential::gaussian(2)?;
    let t: Vec<f64> = (2..=30).map(|i| i as f64 / 10.0).collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, k) in [("box (1, 2)", ConvexBody::cuboid(&[1.0, 2.0])?), ("ball 1", ConvexBody::ball(2, 1.0)?)] {
        let r = dilate_concavity(&p, &k, &t, &EvalConfig::default())?;
        let worst = r.margins.iter().map(|m| m.value + 3.0 * m.stderr).fold(f64::INFINITY, f64::min);
        ok &= r.verdict == Verdict::Holds;
        parts.push(format!("{name}: verdict {}, min margin + 3 stderr {worst:.2e}", r.verdict));
    }
    Ok((ok, parts.join("; ")))
}

fn c13(budget: u64) -> Outcome {
    let p = Potential::gaussian(2)?;
    let space = SearchSpace::new(SearchClass::Origin, 2)?;
    let cfg = SearchConfig { eval: cfg(Method::Auto, budget, 13), ..SearchConfig::default() };
    let r = search_min_gap(&p, &space, 0.25, &cfg)?;
    Ok((
        !r.certified_violation,
        format!(
            "{} evaluations ({} failed), best min gap {:.3e} +- {:.1e} at lambda {}, certified violation: {}",
            r.evaluations, r.failed_evaluations, r.best.objective.value, r.best.objective.stderr, r.best.lambda, r.certified_violation
        ),
    ))
}
