//! Derivative-free search for pairs with a small concavity gap.
//!
//! A point of a [`SearchSpace`] is a box-bounded parameter vector that
//! decodes to a pair `(K, L)`. The optimizer works on the unit cube and
//! every cube point decodes to a valid body of the declared class.

mod nelder_mead;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bodies::{discrete_rho, ConvexBody, DirectionGrid, DEFAULT_CIRCLE_SIZE};
use crate::error::{input, GzError, Result};
use crate::inequalities::{profile_from_measures, EvalConfig, PairMeasures, Verdict, DEFAULT_P_CAP, DEFAULT_P_TOL};
use crate::integrals::{Estimate, RngSpec};
use crate::measures::Potential;

pub use nelder_mead::{Minimum, NelderMead, Step};

pub const DEFAULT_RESTARTS: usize = 16;
pub const DEFAULT_EVALS_PER_RESTART: usize = 400;
pub const DEFAULT_HARMONIC_ORDER: usize = 8;
pub const DEFAULT_H_MIN: f64 = 0.05;
pub const DEFAULT_RHO_MIN: f64 = 1e-3;
const A0_RANGE: (f64, f64) = (0.3, 2.5);
const COEFF_RANGE: (f64, f64) = (-0.5, 0.5);
const INTERVAL_MAX: f64 = 4.0;
const OFFSET_MAX: f64 = 2.5;
const START_STREAM: u64 = 1 << 40;
const VERIFY_STREAM: u64 = 1 << 41;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchClass {
    /// Origin-symmetric bodies.
    Sym,
    /// Bodies containing the origin.
    Origin,
}

impl FromStr for SearchClass {
    type Err = GzError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sym" => Ok(Self::Sym),
            "origin" => Ok(Self::Origin),
            _ => input(format!("unknown search class '{s}' (expected sym or origin)")),
        }
    }
}

impl fmt::Display for SearchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sym => "sym",
            Self::Origin => "origin",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Parametrization {
    /// `[-a, b]` (sym: `a = b`).
    Interval,
    /// Support function `a0 + t * sum_k (a_k cos k theta + b_k sin k theta)`
    /// on a circle grid, with `t` in `(0, 1]` the largest scale that keeps
    /// curvature radius and support values above their floors.
    Harmonic {
        orders: Vec<usize>,
        grid_size: usize,
        #[serde(skip)]
        grid: Arc<DirectionGrid>,
    },
    /// Offsets of a fixed normal fan (sym: one offset per antipodal pair).
    PolytopeFan { normals: Vec<Vec<f64>>, pairs: Vec<(usize, usize)> },
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchSpace {
    pub class: SearchClass,
    pub dim: usize,
    pub parametrization: Parametrization,
    /// Bounds of one body's coordinates; a pair uses them twice.
    pub bounds: Vec<(f64, f64)>,
    pub h_min: f64,
    pub rho_min: f64,
}

/// The 26 directions of `{-1, 0, 1}^3 \ {0}`, normalized; entry `i` and
/// `25 - i` are antipodes.
fn cube_fan() -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for x in -1i32..=1 {
        for y in -1i32..=1 {
            for z in -1i32..=1 {
                if x == 0 && y == 0 && z == 0 {
                    continue;
                }
                let n = ((x * x + y * y + z * z) as f64).sqrt();
                out.push(vec![x as f64 / n, y as f64 / n, z as f64 / n]);
            }
        }
    }
    out
}

impl SearchSpace {
    /// Default space for the dimension: intervals in 1-D, order-8 harmonic
    /// support grids in 2-D, the 26-normal cube fan in 3-D.
    pub fn new(class: SearchClass, dim: usize) -> Result<Self> {
        match dim {
            1 => Ok(Self::interval(class)),
            2 => Self::harmonic(class, DEFAULT_HARMONIC_ORDER, DEFAULT_CIRCLE_SIZE),
            3 => Self::polytope_fan(class, cube_fan()),
            _ => input(format!("search spaces are available for dimensions 1 to 3, got {dim}")),
        }
    }

    pub fn interval(class: SearchClass) -> Self {
        let bounds = match class {
            SearchClass::Sym => vec![(DEFAULT_H_MIN, INTERVAL_MAX)],
            SearchClass::Origin => vec![(DEFAULT_H_MIN, INTERVAL_MAX); 2],
        };
        Self { class, dim: 1, parametrization: Parametrization::Interval, bounds, h_min: DEFAULT_H_MIN, rho_min: 0.0 }
    }

    /// Harmonics up to `order`: even ones for `sym`, all for `origin`.
    pub fn harmonic(class: SearchClass, order: usize, grid_size: usize) -> Result<Self> {
        if order == 0 {
            return input("harmonic order must be at least 1");
        }
        if !grid_size.is_multiple_of(2) || grid_size < 4 * order + 8 {
            return input(format!("grid size must be even and at least {}, got {grid_size}", 4 * order + 8));
        }
        let orders: Vec<usize> = match class {
            SearchClass::Sym => (2..=order).step_by(2).collect(),
            SearchClass::Origin => (1..=order).collect(),
        };
        if orders.is_empty() {
            return input("symmetric harmonic spaces need order at least 2");
        }
        let mut bounds = vec![A0_RANGE];
        bounds.extend(std::iter::repeat_n(COEFF_RANGE, 2 * orders.len()));
        let grid = Arc::new(DirectionGrid::circle(grid_size)?);
        Ok(Self {
            class,
            dim: 2,
            parametrization: Parametrization::Harmonic { orders, grid_size, grid },
            bounds,
            h_min: DEFAULT_H_MIN,
            rho_min: DEFAULT_RHO_MIN,
        })
    }

    /// Offsets on a fixed fan of normals. For `sym` the fan must be closed
    /// under negation.
    pub fn polytope_fan(class: SearchClass, normals: Vec<Vec<f64>>) -> Result<Self> {
        let dim = normals.first().map(|n| n.len()).unwrap_or(0);
        if dim < 2 || normals.iter().any(|n| n.len() != dim) {
            return input("normal fan must be non-empty with a common dimension of at least 2");
        }
        let mut pairs = Vec::new();
        if class == SearchClass::Sym {
            let mut used = vec![false; normals.len()];
            for i in 0..normals.len() {
                if used[i] {
                    continue;
                }
                let j = (0..normals.len())
                    .find(|&j| !used[j] && j != i && normals[i].iter().zip(&normals[j]).all(|(a, b)| (a + b).abs() < 1e-12))
                    .ok_or_else(|| GzError::Input(format!("normal {i} has no antipode in the fan")))?;
                used[i] = true;
                used[j] = true;
                pairs.push((i, j));
            }
        }
        let count = if class == SearchClass::Sym { pairs.len() } else { normals.len() };
        let low = match class {
            SearchClass::Sym => A0_RANGE.0,
            SearchClass::Origin => DEFAULT_H_MIN,
        };
        Ok(Self {
            class,
            dim,
            parametrization: Parametrization::PolytopeFan { normals, pairs },
            bounds: vec![(low, OFFSET_MAX); count],
            h_min: DEFAULT_H_MIN,
            rho_min: 0.0,
        })
    }

    /// Same space on a finer grid (harmonic spaces only; others are
    /// returned unchanged).
    pub fn with_grid_size(&self, grid_size: usize) -> Result<Self> {
        match &self.parametrization {
            Parametrization::Harmonic { .. } => {
                let order = match &self.parametrization {
                    Parametrization::Harmonic { orders, .. } => *orders.iter().max().unwrap_or(&1),
                    _ => unreachable!(),
                };
                let mut out = Self::harmonic(self.class, order, grid_size)?;
                out.h_min = self.h_min;
                out.rho_min = self.rho_min;
                Ok(out)
            }
            _ => Ok(self.clone()),
        }
    }

    pub fn params_per_body(&self) -> usize {
        self.bounds.len()
    }

    /// Length of a pair's parameter vector.
    pub fn len(&self) -> usize {
        2 * self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }

    /// Maps a point of the unit cube (clamped) to parameter space.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(i, &v)| {
                let (lo, hi) = self.bounds[i % self.bounds.len()];
                lo + v.clamp(0.0, 1.0) * (hi - lo)
            })
            .collect()
    }

    /// Uniform random parameter vector for a pair.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let u: Vec<f64> = (0..self.len()).map(|_| rng.random::<f64>()).collect();
        self.from_unit(&u)
    }

    /// Decodes one body. Coordinates outside the bounds are clamped.
    pub fn decode_body(&self, x: &[f64]) -> Result<ConvexBody> {
        if x.len() != self.bounds.len() {
            return input(format!("expected {} parameters per body, got {}", self.bounds.len(), x.len()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return input("search parameters must be finite");
        }
        let x: Vec<f64> = x.iter().zip(&self.bounds).map(|(v, (lo, hi))| v.clamp(*lo, *hi)).collect();
        let body = match &self.parametrization {
            Parametrization::Interval => match self.class {
                SearchClass::Sym => ConvexBody::interval(x[0], x[0])?,
                SearchClass::Origin => ConvexBody::interval(x[0], x[1])?,
            },
            Parametrization::Harmonic { orders, grid, .. } => {
                ConvexBody::support_grid(grid.clone(), self.harmonic_values(orders, grid, &x))?
            }
            Parametrization::PolytopeFan { normals, pairs } => {
                let offsets = match self.class {
                    SearchClass::Origin => x,
                    SearchClass::Sym => {
                        let mut o = vec![0.0; normals.len()];
                        for (&(i, j), &v) in pairs.iter().zip(&x) {
                            o[i] = v;
                            o[j] = v;
                        }
                        o
                    }
                };
                ConvexBody::hpolytope(self.dim, normals, &offsets)?
            }
        };
        let ok = match self.class {
            SearchClass::Sym => body.is_symmetric(),
            SearchClass::Origin => body.contains_origin(),
        };
        if !ok {
            return Err(GzError::SearchDegenerate(format!("decoded body is not in class {}", self.class)));
        }
        Ok(body)
    }

    fn harmonic_values(&self, orders: &[usize], grid: &DirectionGrid, x: &[f64]) -> Vec<f64> {
        let a0 = x[0];
        let m = grid.len();
        let step = 2.0 * PI / m as f64;
        let wave: Vec<f64> = (0..m)
            .map(|j| {
                let theta = j as f64 * step;
                orders
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| {
                        let kt = k as f64 * theta;
                        x[1 + 2 * i] * kt.cos() + x[2 + 2 * i] * kt.sin()
                    })
                    .sum()
            })
            .collect();
        // Both floors are affine in t; take the largest admissible t <= 1.
        let rho0 = a0 * (2.0 - 2.0 * step.cos()) / (step.sin() * step);
        let mut t: f64 = 1.0;
        for j in 0..m {
            let rw = discrete_rho(&wave, j, step);
            if rw < 0.0 {
                t = t.min((rho0 - self.rho_min) / -rw);
            }
            if wave[j] < 0.0 {
                t = t.min((a0 - self.h_min) / -wave[j]);
            }
        }
        let t = t.max(0.0);
        wave.iter().map(|w| a0 + t * w).collect()
    }

    /// Decodes a pair from a vector of length [`Self::len`].
    pub fn decode(&self, x: &[f64]) -> Result<(ConvexBody, ConvexBody)> {
        if x.len() != self.len() {
            return input(format!("expected {} parameters, got {}", self.len(), x.len()));
        }
        let (a, b) = x.split_at(self.bounds.len());
        Ok((self.decode_body(a)?, self.decode_body(b)?))
    }
}

/// Seeded random pair `index` of the space: used for property suites.
pub fn random_pair(space: &SearchSpace, seed: u64, index: u64) -> Result<(ConvexBody, ConvexBody)> {
    let mut rng = ChaCha8Rng::from_seed(RngSpec::new(seed).substream(index).key());
    space.decode(&space.random_point(&mut rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Smallest gap over the lambda grid at a fixed exponent.
    MinGap,
    /// Empirical `p_star` of the pair.
    PStar,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub evals_per_restart: usize,
    pub lambdas: Vec<f64>,
    pub eval: EvalConfig,
    /// Bisection tolerance for `p_star` objectives.
    pub p_tol: f64,
    pub p_cap: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: DEFAULT_RESTARTS,
            evals_per_restart: DEFAULT_EVALS_PER_RESTART,
            lambdas: crate::inequalities::default_lambda_grid(),
            eval: EvalConfig::default(),
            p_tol: DEFAULT_P_TOL,
            p_cap: DEFAULT_P_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub restart: usize,
    pub evaluation: usize,
    pub value: f64,
    pub best: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub objective: Estimate,
    pub lambda: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub class: SearchClass,
    pub dim: usize,
    pub objective_kind: Objective,
    pub exponent: Option<f64>,
    pub best_params: Vec<f64>,
    pub best: Evaluation,
    pub best_restart: usize,
    pub evaluations: usize,
    pub failed_evaluations: usize,
    pub seed: u64,
    /// Re-evaluation of the best pair (10x budget for Monte Carlo, a
    /// doubled grid for quadrature), run when the best gap is not "holds".
    pub verification: Option<Evaluation>,
    pub certified_violation: bool,
    pub trajectory: Vec<TrajectoryRow>,
}

impl SearchResult {
    pub fn trajectory_csv(&self) -> String {
        let mut out = String::from("restart,evaluation,value,best\n");
        for r in &self.trajectory {
            out.push_str(&format!("{},{},{:e},{:e}\n", r.restart, r.evaluation, r.value, r.best));
        }
        out
    }
}

fn evaluate(
    p: &Potential,
    space: &SearchSpace,
    x: &[f64],
    objective: Objective,
    exponent: f64,
    cfg: &SearchConfig,
    eval: &EvalConfig,
) -> Result<Evaluation> {
    let (k, l) = space.decode(x)?;
    let pair = PairMeasures::new(p, &k, &l, &cfg.lambdas, eval)?;
    match objective {
        Objective::MinGap => {
            let reports = pair.reports(exponent);
            let worst = reports
                .iter()
                .min_by(|a, b| a.gap.value.total_cmp(&b.gap.value))
                .ok_or_else(|| GzError::Input("empty lambda grid".into()))?;
            Ok(Evaluation { objective: worst.gap, lambda: worst.lambda, verdict: Verdict::all(reports.iter().map(|r| r.verdict)) })
        }
        Objective::PStar => {
            let prof = profile_from_measures(&pair, 0.0, cfg.p_cap, cfg.p_tol)?;
            let width = prof.interval.1 - prof.interval.0;
            Ok(Evaluation {
                objective: Estimate { value: prof.p_star, stderr: width, budget: eval.budget, method: pair.mu_k.method },
                lambda: prof.tightest_lambda,
                verdict: if prof.flagged { Verdict::Inconclusive } else { Verdict::Holds },
            })
        }
    }
}

struct RestartOutcome {
    best: Option<(Vec<f64>, Evaluation)>,
    evaluations: usize,
    failed: usize,
    trace: Vec<TrajectoryRow>,
}

fn run_restart(
    p: &Potential,
    space: &SearchSpace,
    objective: Objective,
    exponent: f64,
    cfg: &SearchConfig,
    restart: usize,
) -> RestartOutcome {
    let base = cfg.eval.rng.substream(restart as u64);
    let mut start_rng = ChaCha8Rng::from_seed(cfg.eval.rng.substream(START_STREAM + restart as u64).key());
    let start: Vec<f64> = (0..space.len()).map(|_| start_rng.random::<f64>()).collect();
    let mut index = 0u64;
    let mut failed = 0usize;
    let mut best: Option<(Vec<f64>, Evaluation)> = None;
    let nm = NelderMead { max_evals: cfg.evals_per_restart, ..NelderMead::default() };
    let min = nm.minimize(&start, |u| {
        let x = space.from_unit(u);
        let eval = EvalConfig { rng: base.substream(index), ..cfg.eval };
        index += 1;
        match evaluate(p, space, &x, objective, exponent, cfg, &eval) {
            Ok(e) => {
                let v = e.objective.value;
                if best.as_ref().is_none_or(|(_, b)| v < b.objective.value) {
                    best = Some((x, e));
                }
                v
            }
            Err(_) => {
                failed += 1;
                f64::INFINITY
            }
        }
    });
    let trace = min
        .trace
        .iter()
        .map(|s| TrajectoryRow { restart, evaluation: s.evaluation, value: s.value, best: s.best })
        .collect();
    RestartOutcome { best, evaluations: min.evaluations, failed, trace }
}

fn search(p: &Potential, space: &SearchSpace, objective: Objective, exponent: f64, cfg: &SearchConfig) -> Result<SearchResult> {
    if p.dim() != space.dim {
        return input(format!("potential has dimension {}, search space {}", p.dim(), space.dim));
    }
    if cfg.restarts == 0 || cfg.evals_per_restart == 0 {
        return input("search needs at least one restart and one evaluation per restart");
    }
    if cfg.lambdas.is_empty() || cfg.lambdas.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
        return input("lambda grid must be a non-empty subset of (0, 1)");
    }
    let run = |r: usize| run_restart(p, space, objective, exponent, cfg, r);
    #[cfg(feature = "parallel")]
    let outcomes: Vec<RestartOutcome> = {
        use rayon::prelude::*;
        (0..cfg.restarts).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<RestartOutcome> = (0..cfg.restarts).map(run).collect();

    let evaluations = outcomes.iter().map(|o| o.evaluations).sum();
    let failed = outcomes.iter().map(|o| o.failed).sum();
    let trajectory: Vec<TrajectoryRow> = outcomes.iter().flat_map(|o| o.trace.iter().copied()).collect();
    let (best_restart, (best_params, best)) = outcomes
        .into_iter()
        .enumerate()
        .filter_map(|(i, o)| o.best.map(|b| (i, b)))
        .min_by(|(i, a), (j, b)| a.1.objective.value.total_cmp(&b.1.objective.value).then(i.cmp(j)))
        .ok_or_else(|| GzError::SearchDegenerate(format!("all {} restarts failed to evaluate", cfg.restarts)))?;

    let mut verification = None;
    let mut certified = false;
    if objective == Objective::MinGap && best.verdict != Verdict::Holds {
        let (check_space, eval) = if best.objective.is_deterministic() {
            let size = match &space.parametrization {
                Parametrization::Harmonic { grid_size, .. } => 2 * grid_size,
                _ => 0,
            };
            (if size > 0 { space.with_grid_size(size)? } else { space.clone() }, cfg.eval)
        } else {
            let eval = EvalConfig {
                budget: cfg.eval.budget.saturating_mul(10),
                rng: cfg.eval.rng.substream(VERIFY_STREAM),
                ..cfg.eval
            };
            (space.clone(), eval)
        };
        let v = evaluate(p, &check_space, &best_params, objective, exponent, cfg, &eval)?;
        certified = best.verdict == Verdict::Violated && v.verdict == Verdict::Violated;
        verification = Some(v);
    }

    Ok(SearchResult {
        class: space.class,
        dim: space.dim,
        objective_kind: objective,
        exponent: (objective == Objective::MinGap).then_some(exponent),
        best_params,
        best,
        best_restart,
        evaluations,
        failed_evaluations: failed,
        seed: cfg.eval.rng.seed,
        verification,
        certified_violation: certified,
        trajectory,
    })
}

/// Minimizes the smallest gap over the lambda grid at exponent `exponent`.
pub fn search_min_gap(p: &Potential, space: &SearchSpace, exponent: f64, cfg: &SearchConfig) -> Result<SearchResult> {
    if !(exponent > 0.0) || !exponent.is_finite() {
        return input(format!("exponent must be positive, got {exponent}"));
    }
    search(p, space, Objective::MinGap, exponent, cfg)
}

/// Minimizes the empirical `p_star` of the pair.
pub fn search_profile(p: &Potential, space: &SearchSpace, cfg: &SearchConfig) -> Result<SearchResult> {
    search(p, space, Objective::PStar, 0.0, cfg)
}

/// Re-evaluates the objective of `params`, as recorded in a result.
pub fn reevaluate(
    p: &Potential,
    space: &SearchSpace,
    params: &[f64],
    objective: Objective,
    exponent: f64,
    cfg: &SearchConfig,
) -> Result<Evaluation> {
    evaluate(p, space, params, objective, exponent, cfg, &cfg.eval)
}
