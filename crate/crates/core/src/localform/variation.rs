use serde::Serialize;

use crate::bodies::{BodyFamily, BoundaryCurve2D, CurveGeometry, PeriodicSpline, DEFAULT_RHO_MIN};
use crate::error::{input, GzError, Result};
use crate::integrals::quad::integrate;
use crate::integrals::radial_integral;
use crate::measures::Potential;

pub const FIRST_STEP: f64 = 1e-4;
pub const SECOND_STEP: f64 = 1e-3;
/// Reported constant when the first variation vanishes.
pub const LOCAL_C_CAP: f64 = 1e3;
const ZERO_FIRST: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct VariationReport {
    pub order: u8,
    pub formula: f64,
    pub fd: f64,
    /// Finite difference at half the step, for the step-halving check.
    pub fd_half_step: f64,
    pub step: f64,
    pub geometry: CurveGeometry,
    /// `int |f| dmu_boundary`, the natural size of either variation.
    pub scale: f64,
}

impl VariationReport {
    /// `|formula - fd|` relative to the larger of the two, floored at
    /// `1e-3 * scale` so that variations vanishing by symmetry compare sanely.
    pub fn relative_difference(&self) -> f64 {
        let denom = self.formula.abs().max(self.fd.abs()).max(1e-3 * self.scale).max(1e-300);
        (self.formula - self.fd).abs() / denom
    }
}

fn check_psi(curve: &BoundaryCurve2D, psi: &[f64]) -> Result<()> {
    if psi.len() != curve.len() {
        return input(format!("psi has {} values, the curve has {} nodes", psi.len(), curve.len()));
    }
    if psi.iter().any(|v| !v.is_finite()) {
        return input("psi values must be finite");
    }
    Ok(())
}

fn normalizer(p: &Potential) -> f64 {
    (-p.ln_normalizer().unwrap_or(0.0)).exp()
}

/// Per-node boundary weights `e^{-V(x_j)} rho_j step`, normalized.
pub fn boundary_weights(p: &Potential, curve: &BoundaryCurve2D) -> Vec<f64> {
    let z = normalizer(p);
    curve
        .points
        .iter()
        .zip(&curve.rho)
        .map(|(x, rho)| z * (-p.value(x)).exp() * rho * curve.step)
        .collect()
}

/// Weighted mean curvature `1/rho - <grad V(x), n_x>` at every node.
pub fn mean_curvature(p: &Potential, curve: &BoundaryCurve2D) -> Vec<f64> {
    (0..curve.len())
        .map(|j| {
            let g = p.gradient(&curve.points[j]);
            let n = curve.normal(j);
            1.0 / curve.rho[j] - (g[0] * n[0] + g[1] * n[1])
        })
        .collect()
}

/// Total boundary measure.
pub fn boundary_measure(p: &Potential, curve: &BoundaryCurve2D) -> f64 {
    boundary_weights(p, curve).iter().sum()
}

/// Facet integrals `A_j = int e^{-V}` and `B_j = int <grad V, u_j> e^{-V}`.
fn facet_integrals(p: &Potential, curve: &BoundaryCurve2D) -> (Vec<f64>, Vec<f64>) {
    let z = normalizer(p);
    let m = curve.len();
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for j in 0..m {
        let (v0, v1) = curve.facet(j);
        let len = ((v1[0] - v0[0]).powi(2) + (v1[1] - v0[1]).powi(2)).sqrt();
        let u = curve.normal(j);
        let at = |t: f64| [v0[0] + t * (v1[0] - v0[0]), v0[1] + t * (v1[1] - v0[1])];
        let mut fa = |t: f64| (-p.value(&at(t))).exp();
        let mut fb = |t: f64| {
            let x = at(t);
            let g = p.gradient(&x);
            (g[0] * u[0] + g[1] * u[1]) * (-p.value(&x)).exp()
        };
        a.push(z * len * integrate(&mut fa, 0.0, 1.0, 1e-15, 1e-13).value);
        b.push(z * len * integrate(&mut fb, 0.0, 1.0, 1e-15, 1e-13).value);
    }
    (a, b)
}

fn density(p: &Potential, x: &[f64; 2]) -> f64 {
    normalizer(p) * (-p.value(x)).exp()
}

/// `d/ds mu(K_s)` at `s = 0` by the boundary formula.
pub fn first_variation_formula(p: &Potential, curve: &BoundaryCurve2D, psi: &[f64]) -> Result<f64> {
    check_psi(curve, psi)?;
    Ok(match curve.geometry {
        CurveGeometry::Smooth => boundary_weights(p, curve).iter().zip(psi).map(|(w, f)| w * f).sum(),
        CurveGeometry::Polygonal => facet_integrals(p, curve).0.iter().zip(psi).map(|(a, f)| a * f).sum(),
    })
}

/// `d^2/ds^2 mu(K_s)` at `s = 0` by the boundary formula.
///
/// Smooth curves use `sum (H f^2 - rho (f'/rho)^2) w`. On the grid polygon
/// the same quantity splits into a facet term `-f_j^2 B_j` and a corner term
/// at every vertex, which is what the smooth integrand tends to as the grid
/// is refined.
pub fn second_variation_formula(p: &Potential, curve: &BoundaryCurve2D, psi: &[f64]) -> Result<f64> {
    check_psi(curve, psi)?;
    match curve.geometry {
        CurveGeometry::Smooth => {
            let w = boundary_weights(p, curve);
            let h = mean_curvature(p, curve);
            let spline = PeriodicSpline::new(psi);
            Ok((0..curve.len())
                .map(|j| {
                    let arc = spline.node_derivative(j) / curve.rho[j];
                    (h[j] * psi[j] * psi[j] - curve.rho[j] * arc * arc) * w[j]
                })
                .sum())
        }
        CurveGeometry::Polygonal => {
            let (_, b) = facet_integrals(p, curve);
            let m = curve.len();
            let (sin, cos) = curve.step.sin_cos();
            let facets: f64 = (0..m).map(|j| -psi[j] * psi[j] * b[j]).sum();
            let corners: f64 = (0..m)
                .map(|j| {
                    let (f0, f1) = (psi[j], psi[(j + 1) % m]);
                    density(p, &curve.vertices[j]) * (2.0 * f0 * f1 - cos * (f0 * f0 + f1 * f1)) / sin
                })
                .sum();
            Ok(facets + corners)
        }
    }
}

fn family(curve: &BoundaryCurve2D, psi: &[f64], step: f64) -> Result<BodyFamily> {
    let rho_min = curve.rho.iter().copied().fold(f64::INFINITY, f64::min).min(DEFAULT_RHO_MIN);
    BodyFamily::new(curve.body.clone(), curve.grid.clone(), psi.to_vec(), (-step, step), rho_min.max(0.0))
}

fn mu_at(p: &Potential, fam: &BodyFamily, s: f64) -> Result<f64> {
    Ok(radial_integral(p, &fam.at(s)?, None)?.value)
}

fn finite_difference(p: &Potential, curve: &BoundaryCurve2D, psi: &[f64], order: u8, step: f64) -> Result<f64> {
    let fam = family(curve, psi, step)?;
    let plus = mu_at(p, &fam, step)?;
    let minus = mu_at(p, &fam, -step)?;
    Ok(match order {
        1 => (plus - minus) / (2.0 * step),
        _ => (plus - 2.0 * mu_at(p, &fam, 0.0)? + minus) / (step * step),
    })
}

fn variation(p: &Potential, curve: &BoundaryCurve2D, psi: &[f64], order: u8, step: f64) -> Result<VariationReport> {
    if p.dim() != 2 {
        return input("variation formulas are planar");
    }
    let formula = match order {
        1 => first_variation_formula(p, curve, psi)?,
        2 => second_variation_formula(p, curve, psi)?,
        _ => return input(format!("order must be 1 or 2, got {order}")),
    };
    let fd = finite_difference(p, curve, psi, order, step)?;
    let fd_half_step = finite_difference(p, curve, psi, order, step / 2.0)?;
    let abs_psi: Vec<f64> = psi.iter().map(|v| v.abs()).collect();
    let scale = first_variation_formula(p, curve, &abs_psi)?;
    Ok(VariationReport { order, formula, fd, fd_half_step, step, geometry: curve.geometry, scale })
}

/// First variation of `mu` along `h + s psi`, by formula and central difference.
pub fn first_variation_2d(p: &Potential, curve: &BoundaryCurve2D, psi: &[f64]) -> Result<VariationReport> {
    variation(p, curve, psi, 1, FIRST_STEP)
}

/// Second variation of `mu` along `h + s psi`, by formula and central difference.
pub fn second_variation_2d(p: &Potential, curve: &BoundaryCurve2D, psi: &[f64]) -> Result<VariationReport> {
    variation(p, curve, psi, 2, SECOND_STEP)
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalCReport {
    pub mu: f64,
    pub first: f64,
    pub second: f64,
    pub c: f64,
    /// The first variation vanished and `c` is the cap.
    pub capped: bool,
}

/// Largest `c` with `mu'' mu <= ((n - c)/n) mu'^2` at this configuration.
pub fn local_c_estimate(p: &Potential, curve: &BoundaryCurve2D, psi: &[f64]) -> Result<LocalCReport> {
    if p.dim() != 2 {
        return input("local constants are computed in the plane");
    }
    let mu = radial_integral(p, &curve.body, None)?.value;
    let first = first_variation_formula(p, curve, psi)?;
    let second = second_variation_formula(p, curve, psi)?;
    let n = 2.0;
    if first.abs() <= ZERO_FIRST * mu.max(1.0) {
        if second > ZERO_FIRST {
            return Err(GzError::LogConcavityViolation { second });
        }
        return Ok(LocalCReport { mu, first, second, c: LOCAL_C_CAP, capped: true });
    }
    let c = n * (1.0 - second * mu / (first * first));
    Ok(LocalCReport { mu, first, second, c: c.min(LOCAL_C_CAP), capped: c > LOCAL_C_CAP })
}

/// `psi` sampled on the curve's angles.
pub fn sample_psi(curve: &BoundaryCurve2D, f: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..curve.len()).map(|j| f(curve.angle(j))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{boundary_curve_2d, ConvexBody};

    fn gauss() -> Potential {
        Potential::gaussian(2).unwrap()
    }

    fn disc(r: f64) -> BoundaryCurve2D {
        boundary_curve_2d(&ConvexBody::ball(2, r).unwrap(), 720, DEFAULT_RHO_MIN).unwrap()
    }

    #[test]
    fn disc_closed_forms() {
        for r in [0.5, 1.0, 1.7] {
            let c = disc(r);
            let one = vec![1.0; c.len()];
            let e = (-r * r / 2.0f64).exp();
            let v1 = first_variation_2d(&gauss(), &c, &one).unwrap();
            assert!((v1.formula - r * e).abs() < 1e-12);
            assert!(v1.relative_difference() < 1e-4, "{v1:?}");
            let v2 = second_variation_2d(&gauss(), &c, &one).unwrap();
            assert!((v2.formula - (1.0 - r * r) * e).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_perturbations() {
        let c = disc(1.3);
        assert_eq!(first_variation_formula(&gauss(), &c, &vec![0.0; 720]).unwrap(), 0.0);
        let cos = sample_psi(&c, f64::cos);
        assert!(first_variation_formula(&gauss(), &c, &cos).unwrap().abs() < 1e-14);
    }

    #[test]
    fn disc_cos2_matches_finite_difference() {
        let c = disc(1.0);
        let psi = sample_psi(&c, |t| (2.0 * t).cos());
        let v = second_variation_2d(&gauss(), &c, &psi).unwrap();
        assert!(v.relative_difference() < 1e-3, "{v:?}");
    }

    #[test]
    fn polygonal_formulas_match_finite_differences() {
        let body = ConvexBody::smoothed_square(1.0, 0.1).unwrap();
        let c = boundary_curve_2d(&body, 720, DEFAULT_RHO_MIN).unwrap();
        for psi in [vec![1.0; 720], sample_psi(&c, |t| (2.0 * t).cos())] {
            let v1 = first_variation_2d(&gauss(), &c, &psi).unwrap();
            assert!(v1.relative_difference() < 1e-6, "{v1:?}");
            let v2 = second_variation_2d(&gauss(), &c, &psi).unwrap();
            assert!(v2.relative_difference() < 1e-4, "{v2:?}");
        }
    }

    #[test]
    fn polygonal_disc_converges_to_smooth_formula() {
        let grid = std::sync::Arc::new(crate::bodies::DirectionGrid::circle(720).unwrap());
        let poly = ConvexBody::ball(2, 1.4).unwrap().to_support_grid(grid).unwrap();
        let c = boundary_curve_2d(&poly, 720, DEFAULT_RHO_MIN).unwrap();
        let psi = sample_psi(&c, |t| 1.0 + 0.3 * (2.0 * t).cos());
        let smooth = disc(1.4);
        let a = second_variation_formula(&gauss(), &c, &psi).unwrap();
        let b = second_variation_formula(&gauss(), &smooth, &psi).unwrap();
        assert!((a - b).abs() < 1e-4 * b.abs(), "{a} vs {b}");
    }

    #[test]
    fn local_c_on_discs() {
        let c = disc(1.0);
        let r = local_c_estimate(&gauss(), &c, &vec![1.0; 720]).unwrap();
        assert!((r.c - 2.0).abs() < 1e-9);
        let r = 1.6f64;
        let e = (-r * r / 2.0).exp();
        let oracle = 2.0 * (1.0 - (1.0 - r * r) * (1.0 - e) / (r * r * e));
        let got = local_c_estimate(&gauss(), &disc(r), &vec![1.0; 720]).unwrap();
        assert!((got.c - oracle).abs() < 1e-9);
        let odd = sample_psi(&c, f64::cos);
        let capped = local_c_estimate(&gauss(), &c, &odd).unwrap();
        assert!(capped.capped && capped.c >= 0.0);
    }

    #[test]
    fn invalid_step_interval_names_s() {
        let body = ConvexBody::smoothed_square(1.0, 0.1).unwrap();
        let c = boundary_curve_2d(&body, 720, DEFAULT_RHO_MIN).unwrap();
        let psi = sample_psi(&c, |t| 200.0 * (2.0 * t).cos());
        match second_variation_2d(&gauss(), &c, &psi) {
            Err(GzError::InvalidFamily { s, .. }) => assert!(s.abs() > 0.0),
            other => panic!("{other:?}"),
        }
    }
}
