use std::collections::BTreeMap;

use serde::Serialize;

use super::{c_of_r, EvalConfig, Verdict, DETERMINISTIC_FLOOR};
use crate::bodies::ConvexBody;
use crate::error::{input, precondition, Result};
use crate::integrals::{moments, mu_of_body, Estimate, Integrand, JointEstimate};
use crate::measures::Potential;

type Scalar<'a> = Box<dyn Fn(&[f64]) -> f64 + Sync + 'a>;

/// Outcome of one inequality check. `margin` is the estimated slack of the
/// inequality written as `margin >= 0`.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub margin: Estimate,
    pub verdict: Verdict,
    pub terms: BTreeMap<String, f64>,
}

impl CheckReport {
    fn new(check: &str, margin: Estimate, terms: &[(&str, f64)]) -> Self {
        Self {
            check: check.to_string(),
            verdict: Verdict::from_margin(&margin),
            margin,
            terms: terms.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

fn combine(j: &JointEstimate, value: f64, grad: &[f64]) -> Estimate {
    Estimate { value, stderr: j.delta_stderr(grad), budget: j.budget, method: j.method }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Whether every listed moment vanishes within the stderr policy.
fn vanishes(j: &JointEstimate, indices: std::ops::Range<usize>) -> Option<(usize, f64)> {
    for i in indices {
        let slack = if j.method == crate::integrals::EstimateMethod::Mc { 0.0 } else { DETERMINISTIC_FLOOR };
        if j.values[i].abs() > 3.0 * j.stderr(i) + slack {
            return Some((i, j.values[i]));
        }
    }
    None
}

fn gaussian_for(k: &ConvexBody) -> Result<Potential> {
    Potential::gaussian(k.dim())
}

/// `n gamma(K) - int_K |x|^2 dgamma >= 0` for star-shaped `K`.
pub fn check_star_moment(k: &ConvexBody, cfg: &EvalConfig) -> Result<CheckReport> {
    if !k.contains_origin() {
        return precondition("the star-shaped moment bound needs the origin in K");
    }
    let p = gaussian_for(k)?;
    let n = k.dim() as f64;
    let fs: [Integrand<'_>; 2] = [&|_| 1.0, &|x| norm2(x)];
    let j = moments(&p, k, &fs, cfg.method, cfg.budget, cfg.rng)?;
    let value = n * j.values[0] - j.values[1];
    let margin = combine(&j, value, &[n, -1.0]);
    Ok(CheckReport::new("star_moment", margin, &[("n_gamma_k", n * j.values[0]), ("second_moment", j.values[1])]))
}

/// `int_K Lap V dmu - int_K |grad V|^2 dmu >= 0` when `int_K grad V dmu = 0`.
pub fn check_grad_laplace(p: &Potential, k: &ConvexBody, cfg: &EvalConfig) -> Result<CheckReport> {
    if p.dim() != k.dim() {
        return input("measure and body dimensions differ");
    }
    let n = k.dim();
    let grads: Vec<Scalar<'_>> =
        (0..n).map(|i| Box::new(move |x: &[f64]| p.gradient(x)[i]) as Scalar<'_>).collect();
    let lap = |x: &[f64]| p.laplacian(x);
    let g2 = |x: &[f64]| norm2(&p.gradient(x));
    let mut fs: Vec<Integrand<'_>> = grads.iter().map(|b| b.as_ref() as Integrand<'_>).collect();
    fs.push(&lap);
    fs.push(&g2);
    let j = moments(p, k, &fs, cfg.method, cfg.budget, cfg.rng)?;
    let automatic = p.is_even() && k.is_symmetric();
    if !automatic {
        if let Some((i, v)) = vanishes(&j, 0..n) {
            return precondition(format!("int_K dV/dx_{} dmu = {v:.3e} is not zero within 3 stderr", i + 1));
        }
    }
    let mut grad = vec![0.0; n + 2];
    grad[n] = 1.0;
    grad[n + 1] = -1.0;
    let margin = combine(&j, j.values[n] - j.values[n + 1], &grad);
    Ok(CheckReport::new("grad_laplace", margin, &[("laplacian", j.values[n]), ("grad_norm2", j.values[n + 1])]))
}

struct RadialMoments {
    joint: JointEstimate,
    m0: f64,
    m2: f64,
    m4: f64,
}

fn radial_moments(k: &ConvexBody, cfg: &EvalConfig, with_barycenter: bool) -> Result<RadialMoments> {
    let p = gaussian_for(k)?;
    let n = k.dim();
    let coords: Vec<Scalar<'static>> =
        (0..n).map(|i| Box::new(move |x: &[f64]| x[i]) as Scalar<'static>).collect();
    let mut fs: Vec<Integrand<'_>> = vec![&|_| 1.0, &|x| norm2(x), &|x| norm2(x) * norm2(x)];
    if with_barycenter {
        fs.extend(coords.iter().map(|b| b.as_ref() as Integrand<'_>));
    }
    let joint = moments(&p, k, &fs, cfg.method, cfg.budget, cfg.rng)?;
    if with_barycenter {
        if let Some((i, v)) = vanishes(&joint, 3..3 + n) {
            return precondition(format!("int_K x_{} dgamma = {v:.3e} is not zero within 3 stderr", i - 2));
        }
    }
    let (m0, m2, m4) = (joint.values[0], joint.values[1], joint.values[2]);
    Ok(RadialMoments { joint, m0, m2, m4 })
}

/// `int |x|^4 - (int |x|^2)^2 / gamma(K) - 2 int |x|^2 <= 0` for symmetric `K`.
pub fn check_cfm(k: &ConvexBody, cfg: &EvalConfig) -> Result<CheckReport> {
    if !k.is_symmetric() {
        return precondition("the fourth-moment inequality is checked for symmetric K only");
    }
    let RadialMoments { joint, m0, m2, m4 } = radial_moments(k, cfg, false)?;
    let lhs = m4 - m2 * m2 / m0 - 2.0 * m2;
    let grad = [-(m2 * m2) / (m0 * m0), 2.0 * m2 / m0 + 2.0, -1.0];
    let margin = combine(&joint, -lhs, &grad);
    Ok(CheckReport::new("cfm", margin, &[("gamma_k", m0), ("m2", m2), ("m4", m4), ("lhs", lhs)]))
}

/// The dilation inequality: the fourth-moment part plus
/// `-int |x|^2 + (int |x|^2)^2 / (n gamma(K))`, all `<= 0`, for centered `K`.
pub fn check_dilate_local(k: &ConvexBody, cfg: &EvalConfig) -> Result<CheckReport> {
    let RadialMoments { joint, m0, m2, m4 } = radial_moments(k, cfg, true)?;
    let n = k.dim() as f64;
    let cfm = m4 - m2 * m2 / m0 - 2.0 * m2;
    let extra = -m2 + m2 * m2 / (n * m0);
    let lhs = cfm + extra;
    let mut grad = vec![0.0; joint.len()];
    grad[0] = -(m2 * m2) / (m0 * m0) * (1.0 - 1.0 / n);
    grad[1] = -(-2.0 * m2 / m0 - 3.0 + 2.0 * m2 / (n * m0));
    grad[2] = -1.0;
    let margin = combine(&joint, -lhs, &grad);
    Ok(CheckReport::new(
        "dilate_local",
        margin,
        &[("gamma_k", m0), ("m2", m2), ("m4", m4), ("cfm_part", cfm), ("second_part", extra), ("lhs", lhs)],
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct JensenReport {
    pub epsilon: f64,
    pub ratio: f64,
    pub lhs: Estimate,
    pub bound: f64,
    pub verdict: Verdict,
    /// Present when `epsilon` is the optimal value for `ratio`.
    pub c_of_r: Option<f64>,
    pub effective_c: Option<f64>,
}

/// `(R + 1 - 2 sqrt R) / (R - 1)`, zero at `R = 1`.
pub fn optimal_epsilon(r: f64) -> Result<f64> {
    c_of_r(r)?;
    if r == 1.0 {
        return Ok(0.0);
    }
    Ok((r + 1.0 - 2.0 * r.sqrt()) / (r - 1.0))
}

/// `1 / (R / (1 + eps) + 1 / (1 - eps))`.
pub fn jensen_bound(r: f64, eps: f64) -> f64 {
    1.0 / (r / (1.0 + eps) + 1.0 / (1.0 - eps))
}

/// Normalized integral of `[|grad V|^2 / ((1 + eps) n k1) + 1 / (1 - eps)]^{-1}`
/// against its lower bound.
pub fn jensen_lower_bound(p: &Potential, k: &ConvexBody, eps: f64, cfg: &EvalConfig) -> Result<JensenReport> {
    if !(0.0..1.0).contains(&eps) {
        return input(format!("epsilon must lie in [0, 1), got {eps}"));
    }
    if p.dim() != k.dim() {
        return input("measure and body dimensions differ");
    }
    let even_symmetric = p.is_even() && k.is_symmetric();
    if eps > 0.0 && !even_symmetric {
        return precondition("epsilon > 0 needs an even potential and a symmetric body");
    }
    if p.is_gaussian() && !k.contains_origin() {
        return precondition("the Gaussian bound needs the origin in K");
    }
    let n = k.dim() as f64;
    let scale = 1.0 / ((1.0 + eps) * n * p.k1());
    let shift = 1.0 / (1.0 - eps);
    let g = |x: &[f64]| 1.0 / (norm2(&p.gradient(x)) * scale + shift);
    let fs: [Integrand<'_>; 2] = [&|_| 1.0, &g];
    let j = moments(p, k, &fs, cfg.method, cfg.budget, cfg.rng)?;
    let (m0, m1) = (j.values[0], j.values[1]);
    let lhs = combine(&j, m1 / m0, &[-m1 / (m0 * m0), 1.0 / m0]);
    let r = p.ratio();
    let bound = jensen_bound(r, eps);
    let margin = Estimate { value: lhs.value - bound, ..lhs };
    let optimal = optimal_epsilon(r).ok().filter(|o| (o - eps).abs() < 1e-12);
    Ok(JensenReport {
        epsilon: eps,
        ratio: r,
        lhs,
        bound,
        verdict: Verdict::from_margin(&margin),
        c_of_r: optimal.map(|_| c_of_r(r).expect("R >= 1")),
        effective_c: optimal.map(|_| lhs.value),
    })
}

pub const EST2_THRESHOLD: f64 = 0.298;

/// `(1 / gamma(K)) int_K (|x|^2 + 2)^{-1} dgamma >= 0.298` for symmetric planar `K`.
pub fn check_est2(k: &ConvexBody, cfg: &EvalConfig) -> Result<CheckReport> {
    if k.dim() != 2 {
        return input("this check is planar");
    }
    if !k.is_symmetric() {
        return precondition("this check needs a symmetric body");
    }
    let p = gaussian_for(k)?;
    let fs: [Integrand<'_>; 2] = [&|_| 1.0, &|x| 1.0 / (norm2(x) + 2.0)];
    let j = moments(&p, k, &fs, cfg.method, cfg.budget, cfg.rng)?;
    let (m0, m1) = (j.values[0], j.values[1]);
    let ratio = m1 / m0;
    let margin = combine(&j, ratio - EST2_THRESHOLD, &[-m1 / (m0 * m0), 1.0 / m0]);
    Ok(CheckReport::new("est2", margin, &[("normalized_integral", ratio), ("gamma_k", m0)]))
}

#[derive(Debug, Clone, Serialize)]
pub struct DilateReport {
    pub t: Vec<f64>,
    /// `mu(tK)^{1/n}` at every node.
    pub values: Vec<Estimate>,
    /// Negated second differences at interior nodes (`>= 0` when concave).
    pub margins: Vec<Estimate>,
    pub verdict: Verdict,
}

/// Concavity of `t -> mu(tK)^{1/n}` on a grid, for centered `K`.
pub fn dilate_concavity(p: &Potential, k: &ConvexBody, t: &[f64], cfg: &EvalConfig) -> Result<DilateReport> {
    if t.len() < 3 || t.windows(2).any(|w| !(w[1] > w[0])) || !(t[0] > 0.0) {
        return input("t-grid must be positive, strictly increasing and have at least 3 points");
    }
    if p.dim() != k.dim() {
        return input("measure and body dimensions differ");
    }
    let n = k.dim();
    let coords: Vec<Scalar<'static>> =
        (0..n).map(|i| Box::new(move |x: &[f64]| x[i]) as Scalar<'static>).collect();
    let fs: Vec<Integrand<'_>> = coords.iter().map(|b| b.as_ref() as Integrand<'_>).collect();
    if !(p.is_even() && k.is_symmetric()) {
        let j = moments(p, k, &fs, cfg.method, cfg.budget, cfg.rng.substream(u64::MAX))?;
        if let Some((i, v)) = vanishes(&j, 0..n) {
            return precondition(format!("int_K x_{} dmu = {v:.3e} is not zero within 3 stderr", i + 1));
        }
    }
    let inv_n = 1.0 / n as f64;
    let values = t
        .iter()
        .enumerate()
        .map(|(i, &ti)| {
            let e = mu_of_body(p, &k.dilate(ti)?, cfg.method, cfg.budget, cfg.rng.substream(i as u64))?;
            let v = e.value.max(0.0);
            let d = if v > 0.0 { inv_n * v.powf(inv_n - 1.0) } else { 0.0 };
            Ok(Estimate { value: v.powf(inv_n), stderr: d * e.stderr, ..e })
        })
        .collect::<Result<Vec<_>>>()?;
    let margins: Vec<Estimate> = (1..t.len() - 1)
        .map(|i| {
            let (h1, h2) = (t[i] - t[i - 1], t[i + 1] - t[i]);
            // slope change, scaled like a uniform-grid second difference
            let w = [h1.min(h2) / h1, -(h1.min(h2) / h1 + h1.min(h2) / h2), h1.min(h2) / h2];
            let (a, b, c) = (&values[i - 1], &values[i], &values[i + 1]);
            let second = w[0] * a.value + w[1] * b.value + w[2] * c.value;
            let var = (w[0] * a.stderr).powi(2) + (w[1] * b.stderr).powi(2) + (w[2] * c.stderr).powi(2);
            Estimate { value: -second, stderr: var.sqrt(), budget: a.budget + b.budget + c.budget, method: b.method }
        })
        .collect();
    let verdict = Verdict::all(margins.iter().map(Verdict::from_margin));
    Ok(DilateReport { t: t.to_vec(), values, margins, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::{whole_space_proxy, Method, RngSpec};

    fn radial() -> EvalConfig {
        EvalConfig { method: Method::Radial, ..EvalConfig::default() }
    }

    fn mc(seed: u64) -> EvalConfig {
        EvalConfig { method: Method::Mc, budget: 400_000, rng: RngSpec::new(seed), common_random_numbers: false }
    }

    #[test]
    fn star_moment_on_unit_disc() {
        // n gamma(B) - int |x|^2 = 2(1 - e^{-1/2}) - (2 - 3 e^{-1/2}) = e^{-1/2}
        let r = check_star_moment(&ConvexBody::ball(2, 1.0).unwrap(), &radial()).unwrap();
        assert!((r.margin.value - (-0.5f64).exp()).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Holds);
        let proxy = check_star_moment(&whole_space_proxy(2), &radial()).unwrap();
        assert!(proxy.margin.value.abs() < 1e-9);
    }

    #[test]
    fn grad_laplace_on_box_matches_product_oracle() {
        // for [-1,1]^2: margin = 2 gamma_1(I) [gamma_1(I) - int_I t^2 dgamma_1]
        let g1 = libm::erf(std::f64::consts::FRAC_1_SQRT_2);
        let t2 = g1 - 2.0 * (-0.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let oracle = 2.0 * g1 * (g1 - t2);
        let p = Potential::gaussian(2).unwrap();
        let r = check_grad_laplace(&p, &ConvexBody::cuboid(&[1.0, 1.0]).unwrap(), &radial()).unwrap();
        assert!((r.margin.value - oracle).abs() < 1e-11, "{} vs {oracle}", r.margin.value);
        let proxy = check_grad_laplace(&p, &whole_space_proxy(2), &radial()).unwrap();
        assert!(proxy.margin.value.abs() < 1e-9);
        let d = Potential::diag_quadratic(&[1.0, 4.0]).unwrap();
        let r = check_grad_laplace(&d, &ConvexBody::square(0.8).unwrap(), &radial()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
    }

    #[test]
    fn grad_laplace_refuses_off_center_bodies() {
        let p = Potential::gaussian(2).unwrap();
        let k = ConvexBody::hpolytope(
            2,
            &[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            &[2.0, 0.1, 1.0, 1.0],
        )
        .unwrap();
        assert!(matches!(check_grad_laplace(&p, &k, &radial()), Err(crate::GzError::Precondition(_))));
    }

    #[test]
    fn cfm_and_dilate_on_proxy_and_discs() {
        let proxy = whole_space_proxy(2);
        assert!(check_cfm(&proxy, &radial()).unwrap().margin.value.abs() < 1e-9);
        assert!(check_dilate_local(&proxy, &radial()).unwrap().margin.value.abs() < 1e-9);
        for r in [0.5, 1.0, 2.0] {
            let b = ConvexBody::ball(2, r).unwrap();
            let c = check_cfm(&b, &radial()).unwrap();
            assert!(c.margin.value > 1e-6);
            // independent oracle: closed-form radial moments of the disc
            let e = (-r * r / 2.0f64).exp();
            let m0 = 1.0 - e;
            let m2 = 2.0 - (r * r + 2.0) * e;
            let m4 = 8.0 - (r.powi(4) + 4.0 * r * r + 8.0) * e;
            assert!((c.terms["lhs"] - (m4 - m2 * m2 / m0 - 2.0 * m2)).abs() < 1e-11);
            assert_eq!(check_dilate_local(&b, &radial()).unwrap().verdict, Verdict::Holds);
        }
        let bx = ConvexBody::cuboid(&[2.0, 0.5]).unwrap();
        assert_eq!(check_dilate_local(&bx, &radial()).unwrap().verdict, Verdict::Holds);
        let asym = ConvexBody::interval(1.0, 2.0).unwrap();
        assert!(check_cfm(&asym, &radial()).is_err());
    }

    #[test]
    fn cfm_by_monte_carlo_on_proxy() {
        let r = check_cfm(&whole_space_proxy(2), &mc(21)).unwrap();
        assert_ne!(r.verdict, Verdict::Violated);
        assert!(r.margin.stderr > 0.0);
    }

    #[test]
    fn jensen_examples() {
        let e1 = 0.219_383_934_395_520_27_f64;
        let p = Potential::gaussian(2).unwrap();
        let r = jensen_lower_bound(&p, &whole_space_proxy(2), 0.0, &radial()).unwrap();
        assert!((r.lhs.value - std::f64::consts::E * e1).abs() < 1e-9);
        assert_eq!(r.bound, 0.5);
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.c_of_r, Some(0.5));
        assert!((optimal_epsilon(4.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((jensen_bound(4.0, 1.0 / 3.0) - 2.0 / 9.0).abs() < 1e-15);
        let asym = ConvexBody::hpolytope(
            2,
            &[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            &[2.0, 0.1, 1.0, 1.0],
        )
        .unwrap();
        assert!(jensen_lower_bound(&p, &asym, 0.2, &radial()).is_err());
        assert_eq!(jensen_lower_bound(&p, &asym, 0.0, &radial()).unwrap().verdict, Verdict::Holds);
        assert!(jensen_lower_bound(&p, &asym, 1.0, &radial()).is_err());
    }

    #[test]
    fn est2_examples() {
        let proxy = check_est2(&whole_space_proxy(2), &radial()).unwrap();
        assert!((proxy.terms["normalized_integral"] - 0.5 * std::f64::consts::E * 0.219_383_934_395_520_27).abs() < 1e-9);
        let small = check_est2(&ConvexBody::ball(2, 0.1).unwrap(), &radial()).unwrap();
        assert!((small.terms["normalized_integral"] - 0.499).abs() < 1e-3);
        assert_eq!(small.verdict, Verdict::Holds);
    }

    #[test]
    fn dilate_examples() {
        let t: Vec<f64> = (2..=30).map(|i| i as f64 / 10.0).collect();
        let p1 = Potential::gaussian(1).unwrap();
        let r = dilate_concavity(&p1, &ConvexBody::cuboid(&[1.0]).unwrap(), &t, &EvalConfig::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        let p2 = Potential::gaussian(2).unwrap();
        let r = dilate_concavity(&p2, &ConvexBody::ball(2, 1.0).unwrap(), &t, &EvalConfig::default()).unwrap();
        assert!(r.margins.iter().all(|m| m.value > 0.0));
        let r = dilate_concavity(&p2, &ConvexBody::cuboid(&[1.0, 2.0]).unwrap(), &t, &EvalConfig::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(dilate_concavity(&p2, &ConvexBody::ball(2, 1.0).unwrap(), &[1.0, 2.0], &EvalConfig::default()).is_err());
    }
}
