//! Sampled planar boundaries parametrized by the outward normal angle.

use std::sync::Arc;

use super::{discrete_rho, facet_vertex, ConvexBody, DirectionGrid, PeriodicSpline, Representation};
use crate::error::{input, GzError, Result};

pub const DEFAULT_RHO_MIN: f64 = 1e-6;

/// How boundary integrals over the curve are discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveGeometry {
    /// Analytic support function: node values of `h`, `h'` and `rho` are
    /// exact and integrals use the periodic trapezoid rule.
    Smooth,
    /// Tabulated support function: the body is the grid polygon, node `j`
    /// owns facet `j` of length `rho_j * step`.
    Polygonal,
}

/// Boundary of a planar convex body sampled at `M` equally spaced normal angles.
#[derive(Debug, Clone)]
pub struct BoundaryCurve2D {
    pub grid: Arc<DirectionGrid>,
    pub step: f64,
    pub support: Vec<f64>,
    pub support_derivative: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    pub rho: Vec<f64>,
    pub geometry: CurveGeometry,
    /// Polygon vertices `v_{j+1/2}` between facets `j` and `j+1` (polygonal only).
    pub vertices: Vec<[f64; 2]>,
    /// The body the curve bounds: the source body when smooth, the grid
    /// polygon when polygonal.
    pub body: ConvexBody,
}

impl BoundaryCurve2D {
    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn angle(&self, j: usize) -> f64 {
        self.grid.angle(j)
    }

    pub fn normal(&self, j: usize) -> [f64; 2] {
        let (s, c) = self.angle(j).sin_cos();
        [c, s]
    }

    /// Total arclength `sum rho_j * step`.
    pub fn perimeter(&self) -> f64 {
        self.rho.iter().sum::<f64>() * self.step
    }

    /// Endpoints of facet `j` (polygonal only).
    pub fn facet(&self, j: usize) -> ([f64; 2], [f64; 2]) {
        let m = self.len();
        (self.vertices[(j + m - 1) % m], self.vertices[j])
    }
}

fn smooth_curve(body: &ConvexBody, grid: Arc<DirectionGrid>, h: impl Fn(f64) -> (f64, f64, f64)) -> BoundaryCurve2D {
    let m = grid.len();
    let step = grid.step().expect("circle grid");
    let mut curve = BoundaryCurve2D {
        grid,
        step,
        support: Vec::with_capacity(m),
        support_derivative: Vec::with_capacity(m),
        points: Vec::with_capacity(m),
        rho: Vec::with_capacity(m),
        geometry: CurveGeometry::Smooth,
        vertices: Vec::new(),
        body: body.clone(),
    };
    for j in 0..m {
        let theta = curve.grid.angle(j);
        let (v, d, rho) = h(theta);
        let (s, c) = theta.sin_cos();
        curve.points.push([v * c - d * s, v * s + d * c]);
        curve.support.push(v);
        curve.support_derivative.push(d);
        curve.rho.push(rho);
    }
    curve
}

/// Samples the boundary of a planar body at `m` normal angles.
///
/// Balls and ellipses are sampled analytically. Tabulated bodies are taken
/// as the polygon of their grid (resampled through the periodic spline when
/// `m` differs from the grid size) and must have every facet of length at
/// least `rho_min * step`. Polytopes have corners and are always rejected;
/// smooth them first with a small ball.
pub fn boundary_curve_2d(body: &ConvexBody, m: usize, rho_min: f64) -> Result<BoundaryCurve2D> {
    if body.dim() != 2 {
        return input(format!("boundary curves are planar, body has dimension {}", body.dim()));
    }
    let not_c2 = |angle: f64, rho: f64| GzError::NotC2Plus { angle, rho, rho_min };
    match body.representation() {
        Representation::Ball { radius } => {
            if *radius < rho_min {
                return Err(not_c2(0.0, *radius));
            }
            let r = *radius;
            Ok(smooth_curve(body, Arc::new(DirectionGrid::circle(m)?), |_| (r, 0.0, r)))
        }
        Representation::Ellipsoid { semi_axes } => {
            let (a, b) = (semi_axes[0], semi_axes[1]);
            let rho_low = b * b / a;
            if rho_low.min(a * a / b) < rho_min {
                return Err(not_c2(0.0, rho_low.min(a * a / b)));
            }
            Ok(smooth_curve(body, Arc::new(DirectionGrid::circle(m)?), |t| {
                let (s, c) = t.sin_cos();
                let h = (a * a * c * c + b * b * s * s).sqrt();
                let d = (b * b - a * a) * s * c / h;
                (h, d, a * a * b * b / (h * h * h))
            }))
        }
        Representation::HPolytope(_) | Representation::Box { .. } => {
            let poly = body.polygon().expect("planar polytopes carry a polygon");
            let corner = poly.vertices()[0];
            Err(not_c2(corner[1].atan2(corner[0]), 0.0))
        }
        Representation::SupportGrid(g) => {
            let grid = if g.grid().len() == m {
                g.grid().clone()
            } else {
                Arc::new(DirectionGrid::circle(m)?)
            };
            let values = if Arc::ptr_eq(&grid, g.grid()) {
                g.values().to_vec()
            } else {
                body.sample_on(&grid)?
            };
            polygonal_curve(grid, values, rho_min)
        }
    }
}

/// Polygonal curve of tabulated support values on a circle grid.
pub fn polygonal_curve(grid: Arc<DirectionGrid>, values: Vec<f64>, rho_min: f64) -> Result<BoundaryCurve2D> {
    let step = grid
        .step()
        .ok_or_else(|| GzError::Input("boundary curves need a circle grid".into()))?;
    let m = values.len();
    let rho: Vec<f64> = (0..m).map(|j| discrete_rho(&values, j, step)).collect();
    if let Some((j, &r)) = rho.iter().enumerate().find(|(_, r)| **r < rho_min) {
        return Err(GzError::NotC2Plus { angle: grid.angle(j), rho: r, rho_min });
    }
    let spline = PeriodicSpline::new(&values);
    let derivative: Vec<f64> = (0..m).map(|j| spline.node_derivative(j)).collect();
    let points = (0..m)
        .map(|j| {
            let (s, c) = grid.angle(j).sin_cos();
            [values[j] * c - derivative[j] * s, values[j] * s + derivative[j] * c]
        })
        .collect();
    let vertices = (0..m)
        .map(|j| facet_vertex(grid.angle(j), values[j], values[(j + 1) % m], step))
        .collect();
    let body = ConvexBody::support_grid(grid.clone(), values.clone())?;
    Ok(BoundaryCurve2D {
        body,
        grid,
        step,
        support: values,
        support_derivative: derivative,
        points,
        rho,
        geometry: CurveGeometry::Polygonal,
        vertices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::quad::integrate;

    #[test]
    fn ball_curve_is_a_circle() {
        let c = boundary_curve_2d(&ConvexBody::ball(2, 1.5).unwrap(), 360, DEFAULT_RHO_MIN).unwrap();
        for (j, p) in c.points.iter().enumerate() {
            let n = c.normal(j);
            assert!((p[0] - 1.5 * n[0]).abs() < 1e-14 && (p[1] - 1.5 * n[1]).abs() < 1e-14);
        }
        assert!(c.rho.iter().all(|&r| r == 1.5));
    }

    #[test]
    fn ellipse_perimeter_matches_arclength_quadrature() {
        let (a, b) = (2.0f64, 1.0f64);
        let c = boundary_curve_2d(&ConvexBody::ellipsoid(&[a, b]).unwrap(), 720, DEFAULT_RHO_MIN).unwrap();
        let oracle = integrate(
            &mut |t: f64| (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt(),
            0.0,
            2.0 * std::f64::consts::PI,
            1e-13,
            1e-13,
        )
        .value;
        assert!((c.perimeter() - oracle).abs() < 1e-6, "{} vs {}", c.perimeter(), oracle);
        // boundary points lie on the ellipse
        for p in &c.points {
            assert!(((p[0] / a).powi(2) + (p[1] / b).powi(2) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn square_is_rejected_and_smoothed_square_accepted() {
        let sq = ConvexBody::square(1.0).unwrap();
        assert!(matches!(boundary_curve_2d(&sq, 720, DEFAULT_RHO_MIN), Err(GzError::NotC2Plus { .. })));
        let grid_square = sq.to_support_grid(Arc::new(DirectionGrid::circle(720).unwrap())).unwrap();
        assert!(matches!(boundary_curve_2d(&grid_square, 720, DEFAULT_RHO_MIN), Err(GzError::NotC2Plus { .. })));
        let eps = 0.05;
        let smooth = grid_square.minkowski_comb(&ConvexBody::ball(2, 1.0).unwrap(), 1.0 - eps).unwrap();
        let c = boundary_curve_2d(&smooth, 720, DEFAULT_RHO_MIN).unwrap();
        // (1 - eps) * square + eps * ball has curvature radius at least eps
        assert!(c.rho.iter().all(|&r| r >= eps * (1.0 - 1e-9)));
    }

    #[test]
    fn polygonal_perimeter_of_smoothed_square() {
        let body = ConvexBody::smoothed_square(1.0, 0.1).unwrap();
        let c = boundary_curve_2d(&body, 720, DEFAULT_RHO_MIN).unwrap();
        let exact = 8.0 + 2.0 * std::f64::consts::PI * 0.1;
        assert!((c.perimeter() - exact).abs() < 1e-4);
        let (a, b) = c.facet(3);
        let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        assert!((len - c.rho[3] * c.step).abs() < 1e-12);
    }
}
