use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::Serialize;

use crate::error::{input, Result};
use crate::integrals::quad::integrate;

const ABS_TOL: f64 = 1e-12;
const REL_TOL: f64 = 1e-13;

/// `alpha(R) = int_0^R (t^4 - 3t^2) e^{-t^2/2} dt`.
pub fn alpha(r: f64) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return input(format!("R must be finite and >= 0, got {r}"));
    }
    let mut f = |t: f64| {
        let t2 = t * t;
        (t2 * t2 - 3.0 * t2) * (-0.5 * t2).exp()
    };
    Ok(integrate(&mut f, 0.0, r, ABS_TOL, REL_TOL).value)
}

/// `u'(t) = e^{t^2/2} int_0^t e^{-s^2/2} ds`, the Neumann solution of `Lu = 1`.
pub fn ode_u1(t: f64) -> f64 {
    (0.5 * t * t).exp() * (PI / 2.0).sqrt() * libm::erf(t * FRAC_1_SQRT_2)
}

/// `u''(t) = t u'(t) + 1`.
pub fn ode_u2(t: f64) -> f64 {
    t * ode_u1(t) + 1.0
}

/// Closed-form Neumann solution of `u'' - t u' = 1` on `[-R, R]` at grid nodes.
#[derive(Debug, Clone, Serialize)]
pub struct OdeProfile {
    pub r: f64,
    pub nodes: Vec<f64>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

impl OdeProfile {
    pub fn new(r: f64, nodes: usize) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return input(format!("R must be finite and positive, got {r}"));
        }
        if nodes < 2 {
            return input("an ODE profile needs at least two nodes");
        }
        let last = (nodes - 1) as f64;
        let t: Vec<f64> = (0..nodes).map(|i| r * (2.0 * i as f64 - last) / last).collect();
        let u1: Vec<f64> = t.iter().map(|&t| ode_u1(t)).collect();
        let u2 = t.iter().zip(&u1).map(|(t, u)| t * u + 1.0).collect();
        Ok(Self { r, nodes: t, u1, u2 })
    }

    /// Largest `|u'' - t u' - 1|` relative to `max(1, |u''|)`.
    pub fn max_residual(&self) -> f64 {
        self.nodes
            .iter()
            .zip(self.u1.iter().zip(&self.u2))
            .map(|(t, (a, b))| (b - t * a - 1.0).abs() / b.abs().max(1.0))
            .fold(0.0, f64::max)
    }
}

/// `int_{-R}^{R} e^{-t^2/2} dt`.
pub fn gaussian_mass(r: f64) -> f64 {
    (2.0 * PI).sqrt() * libm::erf(r * FRAC_1_SQRT_2)
}

/// `int_{-R}^{R} (u''^2 + u'^2) e^{-t^2/2} dt`.
pub fn energy(r: f64) -> f64 {
    let mut f = |t: f64| {
        let a = ode_u1(t);
        let b = t * a + 1.0;
        (b * b + a * a) * (-0.5 * t * t).exp()
    };
    // the integrand is even
    2.0 * integrate(&mut f, 0.0, r, ABS_TOL, REL_TOL).value
}

/// `beta(R)`: normalized energy of the Neumann solution.
pub fn beta(r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return input(format!("R must be finite and positive, got {r}"));
    }
    Ok(energy(r) / gaussian_mass(r))
}

#[derive(Debug, Clone, Serialize)]
pub struct BochnerReport {
    pub r: f64,
    /// `int (Lu)^2 dmu`.
    pub lhs: f64,
    /// `int (u''^2 + u'^2) dmu`.
    pub bulk: f64,
    /// `sum_{x = +-R} H_x u'(x)^2 e^{-x^2/2}` with `H = -R`.
    pub boundary: f64,
    pub residual: f64,
}

/// The one-dimensional integration-by-parts identity for the Neumann solution.
pub fn bochner_residual_1d(r: f64) -> Result<BochnerReport> {
    if !(r > 0.0) || !r.is_finite() {
        return input(format!("R must be finite and positive, got {r}"));
    }
    let lhs = gaussian_mass(r);
    let bulk = energy(r);
    let u1 = ode_u1(r);
    let boundary = -2.0 * r * (-0.5 * r * r).exp() * u1 * u1;
    let residual = (lhs - bulk - boundary).abs() / lhs;
    Ok(BochnerReport { r, lhs, bulk, boundary, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson rule, used as an independent quadrature.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn alpha_closed_form() {
        // the integrand is the derivative of -t^3 e^{-t^2/2}
        for r in [0.0, 0.3, 1.0, 3f64.sqrt(), 2.5, 6.0] {
            let oracle = -r * r * r * (-0.5 * r * r).exp();
            assert!((alpha(r).unwrap() - oracle).abs() < 1e-12, "R = {r}");
        }
        assert!(alpha(50.0).unwrap().abs() < 1e-8);
        assert!(alpha(-1.0).is_err());
    }

    #[test]
    fn alpha_against_simpson() {
        let f = |t: f64| (t.powi(4) - 3.0 * t * t) * (-0.5 * t * t).exp();
        assert!((alpha(1.0).unwrap() - simpson(f, 0.0, 1.0, 2000)).abs() < 1e-12);
    }

    #[test]
    fn beta_against_simpson() {
        let f = |t: f64| (ode_u2(t).powi(2) + ode_u1(t).powi(2)) * (-0.5 * t * t).exp();
        let g = |t: f64| (-0.5 * t * t).exp();
        let oracle = simpson(f, -1.0, 1.0, 4000) / simpson(g, -1.0, 1.0, 4000);
        assert!((beta(1.0).unwrap() - oracle).abs() < 1e-11);
        assert!((beta(0.01).unwrap() - 1.0).abs() < 1e-3);
        assert!(beta(3.0).unwrap() > beta(1.0).unwrap());
        assert!(beta(1.0).unwrap() > beta(0.5).unwrap());
        assert!(beta(0.5).unwrap() > 1.0);
    }

    #[test]
    fn profile_satisfies_the_ode() {
        let p = OdeProfile::new(3.0, 601).unwrap();
        assert!(p.max_residual() <= 1e-12);
        for (i, j) in (0..601).zip((0..601).rev()) {
            assert_eq!(p.u1[i], -p.u1[j]);
        }
        // finite-difference check of u'' against u'
        let h = 1e-5;
        for t in [-2.0, 0.3, 1.7] {
            let fd = (ode_u1(t + h) - ode_u1(t - h)) / (2.0 * h);
            assert!((fd - ode_u2(t)).abs() < 1e-7 * ode_u2(t).abs().max(1.0));
        }
    }

    #[test]
    fn bochner_identity_holds() {
        for r in [0.5, 1.0, 2.0, 3.0] {
            let b = bochner_residual_1d(r).unwrap();
            assert!(b.residual <= 1e-8, "R = {r}: {b:?}");
            assert!(b.boundary < 0.0);
        }
    }
}
