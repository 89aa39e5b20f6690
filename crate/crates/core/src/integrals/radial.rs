//! Radial quadrature `int_{S^{n-1}} int_0^{r(u)} f(ru) e^{-V(ru)} r^{n-1} dr du`
//! in dimensions one and two.

use std::f64::consts::PI;

use super::quad::integrate;
use super::{interval_mass, Estimate, EstimateMethod, Integrand};
use crate::bodies::ConvexBody;
use crate::error::{input, precondition, Result};
use crate::measures::Potential;

/// Absolute tolerance of each one-dimensional radial integral.
pub const RADIAL_ABS_TOL: f64 = 1e-13;
const RADIAL_REL_TOL: f64 = 1e-12;
const SMOOTH_PIECES: usize = 16;

struct Radial<'a> {
    p: &'a Potential,
    f: Option<Integrand<'a>>,
    quadratic: Option<Vec<f64>>,
    scale: f64,
    evaluations: u64,
}

impl Radial<'_> {
    /// `int_0^r f(tu) e^{-V(tu)} t^{n-1} dt`, normalized.
    fn inner(&mut self, u: &[f64], r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let n = u.len();
        if let (None, Some(c)) = (self.f, &self.quadratic) {
            self.evaluations += 1;
            let q: f64 = c.iter().zip(u).map(|(c, v)| c * v * v).sum();
            return self.scale
                * if n == 1 {
                    (PI / (2.0 * q)).sqrt() * libm::erf(r * (q / 2.0).sqrt())
                } else {
                    -(-q * r * r / 2.0).exp_m1() / q
                };
        }
        let (p, f) = (self.p, self.f);
        let mut x = vec![0.0; n];
        let mut g = |t: f64| {
            for (xi, ui) in x.iter_mut().zip(u) {
                *xi = t * ui;
            }
            let fx = f.map_or(1.0, |f| f(&x));
            if fx == 0.0 {
                return 0.0;
            }
            fx * (-p.value(&x)).exp() * t.powi(n as i32 - 1)
        };
        let q = integrate(&mut g, 0.0, r, RADIAL_ABS_TOL, RADIAL_REL_TOL);
        self.evaluations += q.evaluations as u64;
        self.scale * q.value
    }
}

/// Deterministic `int_K f dmu` (or `mu(K)` when `f` is `None`) for bodies
/// of dimension at most two that contain the origin.
pub fn radial_integral(p: &Potential, k: &ConvexBody, f: Option<Integrand<'_>>) -> Result<Estimate> {
    if p.dim() != k.dim() {
        return input(format!("measure has dimension {}, body has dimension {}", p.dim(), k.dim()));
    }
    if k.dim() > 2 {
        return input(format!("radial quadrature is implemented for n <= 2, body has n = {}", k.dim()));
    }
    if !k.contains_origin() {
        return precondition("radial quadrature needs the origin in the body");
    }
    let mut rad = Radial {
        p,
        f,
        quadratic: p.quadratic_coefficients(),
        scale: (-p.ln_normalizer().unwrap_or(0.0)).exp(),
        evaluations: 0,
    };
    let value = if k.dim() == 1 {
        let (a, b) = (k.radial_unchecked(&[-1.0]), k.radial_unchecked(&[1.0]));
        match (f, &rad.quadratic) {
            (None, Some(c)) => {
                rad.evaluations += 1;
                interval_mass(c[0], a, b)
            }
            _ => rad.inner(&[-1.0], a) + rad.inner(&[1.0], b),
        }
    } else {
        let mut total = 0.0;
        let pieces: Vec<(f64, f64, Option<crate::bodies::Edge>)> = match k.polygon() {
            Some(poly) => poly.sectors().into_iter().map(|s| (s.start, s.end, Some(s.edge))).collect(),
            None => (0..SMOOTH_PIECES)
                .map(|i| {
                    let w = 2.0 * PI / SMOOTH_PIECES as f64;
                    (i as f64 * w, (i + 1) as f64 * w, None)
                })
                .collect(),
        };
        let outer_tol = RADIAL_ABS_TOL / pieces.len().max(1) as f64;
        for (start, end, edge) in pieces {
            let mut g = |phi: f64| {
                let u = [phi.cos(), phi.sin()];
                let r = match edge {
                    Some(e) => e.offset / (e.normal[0] * u[0] + e.normal[1] * u[1]),
                    None => k.radial_unchecked(&u),
                };
                rad.inner(&u, r)
            };
            total += integrate(&mut g, start, end, outer_tol, RADIAL_REL_TOL).value;
        }
        total
    };
    Ok(Estimate::exact(value, EstimateMethod::RadialQuadrature, rad.evaluations.max(1)))
}
