use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use serde_json::{json, Value};

use gz_core::bodies::spec::parse_body;
use gz_core::bodies::{boundary_curve_2d, BoundaryCurve2D, ConvexBody, DEFAULT_RHO_MIN};
use gz_core::inequalities::{
    self as ineq, default_lambda_grid, CheckReport, EvalConfig, GapReport, PairMeasures, Verdict, DEFAULT_P_CAP,
    DEFAULT_P_TOL,
};
use gz_core::integrals::{mu_of_body, RngSpec};
use gz_core::localform::{self, sample_psi};
use gz_core::measures::{parse_measure, Potential};
use gz_core::search::{self, SearchClass, SearchConfig, SearchSpace};
use gz_core::{acceptance as suite, GzError};

use crate::report::{num, Outcome, Table, EXIT_INCONCLUSIVE, EXIT_OK, EXIT_VIOLATION};
use crate::Common;

type Run = Result<(Value, Outcome), String>;
type Check<'a> = (&'static str, Box<dyn Fn() -> gz_core::Result<CheckReport> + 'a>);

fn err(e: GzError) -> String {
    e.to_string()
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results serialize")
}

fn numbers(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("cannot parse {s:?} as a number")))
        .collect()
}

/// `a:b:step` (inclusive) or a comma list.
fn grid(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let v = numbers(&parts.join(","))?;
        let (a, b, h) = (v[0], v[1], v[2]);
        if !(h > 0.0) || !(b >= a) {
            return Err(format!("grid {text:?} needs a <= b and a positive step"));
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| a + i as f64 * h).collect());
    }
    numbers(text)
}

fn exit_for(verdicts: impl IntoIterator<Item = Verdict>) -> i32 {
    match Verdict::all(verdicts) {
        Verdict::Holds => EXIT_OK,
        Verdict::Violated => EXIT_VIOLATION,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MeasureOpts {
    /// gaussian or diag_quadratic.
    #[arg(long, default_value = "gaussian")]
    pub measure: String,
    /// Dimension (inferred from --c when omitted).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Coefficients of a diag_quadratic potential, comma separated.
    #[arg(long)]
    pub c: Option<String>,
}

impl MeasureOpts {
    fn dim(&self) -> Result<usize, String> {
        if let Some(d) = self.dim {
            return Ok(d);
        }
        match &self.c {
            Some(c) => Ok(numbers(c)?.len()),
            None => Ok(2),
        }
    }

    fn build(&self) -> Result<Potential, String> {
        let c = self.c.as_deref().map(numbers).transpose()?;
        let dim = self.dim()?;
        if let Some(c) = &c {
            if c.len() != dim {
                return Err(format!("--c has {} coefficients but --dim is {dim}", c.len()));
            }
        }
        parse_measure(&self.measure, dim, c.as_deref()).map_err(err)
    }
}

fn eval_config(common: &Common, budget: u64) -> EvalConfig {
    EvalConfig { method: common.method, budget, rng: RngSpec::new(common.seed), common_random_numbers: common.crn }
}

#[derive(Args, Debug, Serialize)]
pub struct MeasureArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[command(flatten)]
    pub measure: MeasureOpts,
    /// Body: shorthand (ball:1, box:1,2, square, smoothed-square:0.1, ...) or a JSON spec file.
    #[arg(long = "K")]
    pub k: String,
}

pub fn measure(a: &MeasureArgs, budget: u64) -> Run {
    let p = a.measure.build()?;
    let k = parse_body(&a.k, p.dim()).map_err(err)?;
    let cfg = eval_config(&a.common, budget);
    let e = mu_of_body(&p, &k, cfg.method, cfg.budget, cfg.rng).map_err(err)?;
    let mut t = Table::new(&["value", "stderr", "budget", "method"]);
    t.push(vec![num(e.value), num(e.stderr), e.budget.to_string(), format!("{:?}", e.method).to_lowercase()]);
    Ok((to_value(a), Outcome { result: to_value(&e), table: t, exit: EXIT_OK }))
}

#[derive(Args, Debug, Serialize)]
pub struct GapArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[command(flatten)]
    pub measure: MeasureOpts,
    #[arg(long = "K")]
    pub k: String,
    #[arg(long = "L")]
    pub l: String,
    /// Lambda values, comma separated or a:b:step (default 0.1:0.9:0.1).
    #[arg(long)]
    pub lambda: Option<String>,
    /// Exponent of the concavity gap.
    #[arg(long)]
    pub p: f64,
}

fn gap_table(reports: &[GapReport]) -> Table {
    let mut t = Table::new(&["lambda", "p", "gap", "stderr", "verdict", "mu_k", "mu_l", "mu_m"]);
    for r in reports {
        t.push(vec![
            num(r.lambda),
            num(r.p),
            num(r.gap.value),
            num(r.gap.stderr),
            r.verdict.to_string(),
            num(r.mu_k.value),
            num(r.mu_l.value),
            num(r.mu_m.value),
        ]);
    }
    t
}

fn lambdas(text: &Option<String>) -> Result<Vec<f64>, String> {
    match text {
        Some(t) => grid(t),
        None => Ok(default_lambda_grid()),
    }
}

pub fn gap(a: &GapArgs, budget: u64) -> Run {
    let p = a.measure.build()?;
    let k = parse_body(&a.k, p.dim()).map_err(err)?;
    let l = parse_body(&a.l, p.dim()).map_err(err)?;
    if !(a.p > 0.0) {
        return Err(format!("--p must be positive, got {}", a.p));
    }
    let pair = PairMeasures::new(&p, &k, &l, &lambdas(&a.lambda)?, &eval_config(&a.common, budget)).map_err(err)?;
    let reports = pair.reports(a.p);
    let exit = exit_for(reports.iter().map(|r| r.verdict));
    let min_gap = reports.iter().map(|r| r.gap.value).fold(f64::INFINITY, f64::min);
    let result = json!({ "reports": reports, "min_gap": min_gap, "verdict": Verdict::all(reports.iter().map(|r| r.verdict)) });
    Ok((to_value(a), Outcome { result, table: gap_table(&reports), exit }))
}

#[derive(Args, Debug, Serialize)]
pub struct ProfileArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[command(flatten)]
    pub measure: MeasureOpts,
    #[arg(long = "K")]
    pub k: String,
    #[arg(long = "L")]
    pub l: String,
    #[arg(long)]
    pub lambda: Option<String>,
    /// Lower end of the bisection bracket.
    #[arg(long, default_value_t = 0.0)]
    pub p_lo: f64,
    #[arg(long, default_value_t = DEFAULT_P_CAP)]
    pub p_cap: f64,
    /// Bisection tolerance (at least 1e-3).
    #[arg(long, default_value_t = DEFAULT_P_TOL)]
    pub tol: f64,
}

pub fn profile(a: &ProfileArgs, budget: u64) -> Run {
    let p = a.measure.build()?;
    let k = parse_body(&a.k, p.dim()).map_err(err)?;
    let l = parse_body(&a.l, p.dim()).map_err(err)?;
    let cfg = eval_config(&a.common, budget);
    let r = ineq::profile_p_star(&p, &k, &l, &lambdas(&a.lambda)?, a.p_lo, a.p_cap, a.tol, &cfg).map_err(err)?;
    let mut t = Table::new(&["p_star", "p_low", "p_high", "flagged", "tightest_lambda", "half_p_verdict"]);
    t.push(vec![
        num(r.p_star),
        num(r.interval.0),
        num(r.interval.1),
        r.flagged.to_string(),
        num(r.tightest_lambda),
        r.half_p_verdict.to_string(),
    ]);
    let exit = if r.flagged { EXIT_INCONCLUSIVE } else { EXIT_OK };
    Ok((to_value(a), Outcome { result: to_value(&r), table: t, exit }))
}

#[derive(Args, Debug, Serialize)]
pub struct LemmasArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    /// Measure for the checks that take one (the others are Gaussian).
    #[command(flatten)]
    pub measure: MeasureOpts,
    #[arg(long)]
    pub body: String,
    /// Jensen epsilon (default: the optimal value for the measure's R).
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Serialize)]
struct CheckRow {
    check: String,
    status: &'static str,
    reason: Option<String>,
    report: Option<Value>,
    verdict: Option<Verdict>,
}

pub fn lemmas(a: &LemmasArgs, budget: u64) -> Run {
    let p = a.measure.build()?;
    let k = parse_body(&a.body, p.dim()).map_err(err)?;
    let cfg = eval_config(&a.common, budget);
    let eps = match a.epsilon {
        Some(e) => e,
        None => ineq::optimal_epsilon(p.ratio()).map_err(err)?,
    };
    let checks: Vec<Check<'_>> = vec![
        ("star_moment", Box::new(|| ineq::check_star_moment(&k, &cfg))),
        ("grad_laplace", Box::new(|| ineq::check_grad_laplace(&p, &k, &cfg))),
        ("cfm", Box::new(|| ineq::check_cfm(&k, &cfg))),
        ("dilate_local", Box::new(|| ineq::check_dilate_local(&k, &cfg))),
        ("est2", Box::new(|| ineq::check_est2(&k, &cfg))),
    ];
    let mut rows = Vec::new();
    let mut t = Table::new(&["check", "status", "verdict", "margin", "stderr", "reason"]);
    let skipped = |name: &str, e: GzError| CheckRow {
        check: name.to_string(),
        status: "skipped",
        reason: Some(e.to_string()),
        report: None,
        verdict: None,
    };
    for (name, f) in checks {
        rows.push(match f() {
            Ok(r) => {
                t.push(vec![name.into(), "checked".into(), r.verdict.to_string(), num(r.margin.value), num(r.margin.stderr), String::new()]);
                CheckRow { check: name.into(), status: "checked", reason: None, verdict: Some(r.verdict), report: Some(to_value(&r)) }
            }
            Err(e) => {
                t.push(vec![name.into(), "skipped".into(), String::new(), String::new(), String::new(), csv_quote(&e.to_string())]);
                skipped(name, e)
            }
        });
    }
    rows.push(match ineq::jensen_lower_bound(&p, &k, eps, &cfg) {
        Ok(r) => {
            let margin = r.lhs.value - r.bound;
            t.push(vec!["jensen".into(), "checked".into(), r.verdict.to_string(), num(margin), num(r.lhs.stderr), String::new()]);
            CheckRow { check: "jensen".into(), status: "checked", reason: None, verdict: Some(r.verdict), report: Some(to_value(&r)) }
        }
        Err(e) => {
            t.push(vec!["jensen".into(), "skipped".into(), String::new(), String::new(), String::new(), csv_quote(&e.to_string())]);
            skipped("jensen", e)
        }
    });
    if rows.iter().all(|r| r.status == "skipped") {
        return Err("no check applies to this body and measure".into());
    }
    let exit = exit_for(rows.iter().filter_map(|r| r.verdict));
    Ok((to_value(a), Outcome { result: json!({ "checks": rows }), table: t, exit }))
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

#[derive(Args, Debug, Serialize)]
pub struct GridArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    /// Points, comma separated or a:b:step.
    #[arg(long = "R", alias = "grid")]
    pub r: String,
}

fn function_table(a: &GridArgs, name: &'static str, f: fn(f64) -> gz_core::Result<f64>) -> Run {
    let mut t = Table::new(&["R", name]);
    let mut values = Vec::new();
    for r in grid(&a.r)? {
        let v = f(r).map_err(err)?;
        t.push(vec![num(r), num(v)]);
        values.push(json!({ "R": r, name: v }));
    }
    Ok((to_value(a), Outcome { result: json!({ "values": values }), table: t, exit: EXIT_OK }))
}

pub fn alpha(a: &GridArgs) -> Run {
    function_table(a, "alpha", localform::alpha)
}

pub fn beta(a: &GridArgs) -> Run {
    function_table(a, "beta", localform::beta)
}

pub fn bochner(a: &GridArgs) -> Run {
    let mut t = Table::new(&["R", "lhs", "bulk", "boundary", "residual"]);
    let mut reports = Vec::new();
    for r in grid(&a.r)? {
        let b = localform::bochner_residual_1d(r).map_err(err)?;
        t.push(vec![num(b.r), num(b.lhs), num(b.bulk), num(b.boundary), num(b.residual)]);
        reports.push(b);
    }
    Ok((to_value(a), Outcome { result: json!({ "reports": reports }), table: t, exit: EXIT_OK }))
}

#[derive(Args, Debug, Serialize)]
pub struct VariationArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[command(flatten)]
    pub measure: MeasureOpts,
    /// Planar body (shorthand or JSON spec).
    #[arg(long)]
    pub body: String,
    /// Perturbation of the support function: terms joined by '+', each a
    /// number, `[a*]cos:k` or `[a*]sin:k`; or a JSON array of node values.
    #[arg(long, default_value = "1")]
    pub psi: String,
    /// 1 or 2; both when omitted.
    #[arg(long)]
    pub order: Option<u8>,
    /// Boundary nodes for smooth bodies.
    #[arg(long, default_value_t = 720)]
    pub nodes: usize,
}

fn psi_values(text: &str, curve: &BoundaryCurve2D) -> Result<Vec<f64>, String> {
    let path = std::path::Path::new(text);
    if text.ends_with(".json") || path.is_file() {
        let content = std::fs::read_to_string(path).map_err(|e| format!("cannot read {text}: {e}"))?;
        let values: Vec<f64> = serde_json::from_str(&content)
            .map_err(|e| format!("psi file {text}, line {} column {}: {e}", e.line(), e.column()))?;
        if values.len() != curve.len() {
            return Err(format!("psi file has {} values, the boundary has {} nodes", values.len(), curve.len()));
        }
        return Ok(values);
    }
    let mut terms: Vec<(f64, u8, f64)> = Vec::new();
    for term in text.split('+') {
        let term = term.trim();
        let (amp, rest) = match term.split_once('*') {
            Some((a, r)) => (a.trim().parse::<f64>().map_err(|_| format!("bad amplitude in {term:?}"))?, r.trim()),
            None => (1.0, term),
        };
        match rest.split_once(':') {
            Some((kind @ ("cos" | "sin"), k)) => {
                let k: f64 = k.trim().parse().map_err(|_| format!("bad frequency in {term:?}"))?;
                terms.push((amp, if kind == "cos" { 1 } else { 2 }, k));
            }
            Some(_) => return Err(format!("unknown psi term {term:?}")),
            None => terms.push((amp * rest.parse::<f64>().map_err(|_| format!("unknown psi term {term:?}"))?, 0, 0.0)),
        }
    }
    Ok(sample_psi(curve, |t| {
        terms
            .iter()
            .map(|&(a, kind, k)| match kind {
                1 => a * (k * t).cos(),
                2 => a * (k * t).sin(),
                _ => a,
            })
            .sum()
    }))
}

fn planar_setup(a: &VariationArgs) -> Result<(Potential, BoundaryCurve2D, Vec<f64>), String> {
    let p = a.measure.build()?;
    if p.dim() != 2 {
        return Err("variations are computed in the plane (--dim 2)".into());
    }
    let body: ConvexBody = parse_body(&a.body, 2).map_err(err)?;
    let curve = boundary_curve_2d(&body, a.nodes, DEFAULT_RHO_MIN).map_err(err)?;
    let psi = psi_values(&a.psi, &curve)?;
    Ok((p, curve, psi))
}

pub fn variation(a: &VariationArgs) -> Run {
    let (p, curve, psi) = planar_setup(a)?;
    let orders: Vec<u8> = match a.order {
        Some(o @ (1 | 2)) => vec![o],
        Some(o) => return Err(format!("--order must be 1 or 2, got {o}")),
        None => vec![1, 2],
    };
    let mut t = Table::new(&["order", "formula", "fd", "fd_half_step", "step", "relative_difference", "geometry"]);
    let mut reports = Vec::new();
    for o in orders {
        let r = if o == 1 {
            localform::first_variation_2d(&p, &curve, &psi)
        } else {
            localform::second_variation_2d(&p, &curve, &psi)
        }
        .map_err(err)?;
        t.push(vec![
            o.to_string(),
            num(r.formula),
            num(r.fd),
            num(r.fd_half_step),
            num(r.step),
            num(r.relative_difference()),
            format!("{:?}", r.geometry).to_lowercase(),
        ]);
        let mut v = to_value(&r);
        v["relative_difference"] = json!(r.relative_difference());
        reports.push(v);
    }
    Ok((to_value(a), Outcome { result: json!({ "reports": reports }), table: t, exit: EXIT_OK }))
}

pub fn localc(a: &VariationArgs) -> Run {
    let (p, curve, psi) = planar_setup(a)?;
    match localform::local_c_estimate(&p, &curve, &psi) {
        Ok(r) => {
            let mut t = Table::new(&["mu", "first", "second", "c", "capped"]);
            t.push(vec![num(r.mu), num(r.first), num(r.second), num(r.c), r.capped.to_string()]);
            Ok((to_value(a), Outcome { result: to_value(&r), table: t, exit: EXIT_OK }))
        }
        Err(GzError::LogConcavityViolation { second }) => {
            let mut t = Table::new(&["mu", "first", "second", "c", "capped"]);
            t.push(vec![String::new(), "0".into(), num(second), String::new(), String::new()]);
            let result = json!({ "log_concavity_violation": true, "second": second });
            Ok((to_value(a), Outcome { result, table: t, exit: EXIT_VIOLATION }))
        }
        Err(e) => Err(err(e)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveArg {
    Gap,
    Pstar,
}

#[derive(Args, Debug, Serialize)]
pub struct SearchArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long, default_value = "gaussian")]
    pub measure: String,
    #[arg(long)]
    pub c: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// sym or origin.
    #[arg(long, default_value = "origin", value_parser = |s: &str| s.parse::<SearchClass>().map_err(|e| e.to_string()))]
    pub class: SearchClass,
    /// Exponent for the min-gap objective.
    #[arg(long, default_value_t = 0.25)]
    pub p: f64,
    #[arg(long, value_enum, default_value = "gap")]
    pub objective: ObjectiveArg,
    #[arg(long, default_value_t = search::DEFAULT_RESTARTS)]
    pub restarts: usize,
    /// Objective evaluations per restart.
    #[arg(long, default_value_t = search::DEFAULT_EVALS_PER_RESTART)]
    pub evals: usize,
    #[arg(long)]
    pub lambda: Option<String>,
    /// Harmonic order of planar spaces.
    #[arg(long, default_value_t = search::DEFAULT_HARMONIC_ORDER)]
    pub order: usize,
    /// Grid size of planar spaces.
    #[arg(long, default_value_t = 720)]
    pub grid_size: usize,
    /// Also write the trajectory CSV here.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

pub fn search(a: &SearchArgs, budget: u64) -> Run {
    let opts = MeasureOpts { measure: a.measure.clone(), dim: Some(a.dim), c: a.c.clone() };
    let p = opts.build()?;
    let space = if a.dim == 2 {
        SearchSpace::harmonic(a.class, a.order, a.grid_size)
    } else {
        SearchSpace::new(a.class, a.dim)
    }
    .map_err(err)?;
    let cfg = SearchConfig {
        restarts: a.restarts,
        evals_per_restart: a.evals,
        lambdas: lambdas(&a.lambda)?,
        eval: eval_config(&a.common, budget),
        ..SearchConfig::default()
    };
    let r = match a.objective {
        ObjectiveArg::Gap => search::search_min_gap(&p, &space, a.p, &cfg),
        ObjectiveArg::Pstar => search::search_profile(&p, &space, &cfg),
    }
    .map_err(err)?;
    let csv = r.trajectory_csv();
    if let Some(path) = &a.trajectory {
        std::fs::write(path, &csv).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    let mut t = Table::new(&["restart", "evaluation", "value", "best"]);
    for row in &r.trajectory {
        t.push(vec![row.restart.to_string(), row.evaluation.to_string(), num(row.value), num(row.best)]);
    }
    let exit = if r.certified_violation {
        EXIT_VIOLATION
    } else if r.objective_kind == search::Objective::MinGap && r.best.verdict != Verdict::Holds {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    };
    let mut result = to_value(&r);
    if let Some(obj) = result.as_object_mut() {
        obj.remove("trajectory");
        obj.insert("trajectory_rows".into(), json!(r.trajectory.len()));
    }
    Ok((to_value(a), Outcome { result, table: t, exit }))
}

#[derive(Args, Debug, Serialize)]
pub struct AcceptanceArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long, default_value = "primary")]
    pub suite: String,
    /// Run only these criteria (comma separated ids).
    #[arg(long)]
    pub only: Option<String>,
}

pub fn acceptance(a: &AcceptanceArgs, budget: u64) -> Run {
    if a.suite != "primary" {
        return Err(format!("unknown suite {:?}; the only suite is primary", a.suite));
    }
    let ids: Vec<usize> = match &a.only {
        Some(s) => s
            .split(',')
            .map(|x| match x.trim().parse::<usize>() {
                Ok(i) if (1..=suite::CRITERIA).contains(&i) => Ok(i),
                _ => Err(format!("criterion id must be 1 to {}, got {x:?}", suite::CRITERIA)),
            })
            .collect::<Result<_, _>>()?,
        None => (1..=suite::CRITERIA).collect(),
    };
    let mut t = Table::new(&["id", "title", "passed", "seconds", "detail"]);
    let mut results = Vec::new();
    for id in ids {
        let r = suite::run(id, budget);
        eprintln!("{}", r.line());
        t.push(vec![r.id.to_string(), csv_quote(r.title), r.passed.to_string(), format!("{:.3}", r.seconds), csv_quote(&r.detail)]);
        results.push(r);
    }
    let exit = if results.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_VIOLATION };
    Ok((to_value(a), Outcome { result: json!({ "criteria": results }), table: t, exit }))
}
