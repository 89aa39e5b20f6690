//! Convex body representations, membership/radial queries and Minkowski
//! convex combinations through support-function linearity.

mod curve;
mod grid;
mod polygon;
mod polytope;
pub mod spec;
mod spline;

use std::f64::consts::PI;
use std::sync::Arc;

pub use curve::{boundary_curve_2d, BoundaryCurve2D, CurveGeometry, DEFAULT_RHO_MIN};
pub use grid::{DirectionGrid, GridKind, DEFAULT_CIRCLE_SIZE, DEFAULT_HIGH_DIM_SIZE, DEFAULT_SPHERE_SIZE};
pub use polygon::{Edge, Polygon2D, Sector};
pub use polytope::HPolytope;
pub use spline::PeriodicSpline;

pub(crate) use polytope::dot;

use crate::error::{input, precondition, Result};

/// Tolerance below which a discrete curvature radius counts as negative.
pub const VALIDATION_TOL: f64 = 1e-8;
const UNIT_TOL: f64 = 1e-10;

/// Support values tabulated on a direction grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportGrid {
    grid: Arc<DirectionGrid>,
    values: Vec<f64>,
    spline: Option<PeriodicSpline>,
    inradius: f64,
}

impl SupportGrid {
    fn new(grid: Arc<DirectionGrid>, values: Vec<f64>, spline: Option<PeriodicSpline>) -> Self {
        let inradius = values.iter().copied().fold(f64::INFINITY, f64::min);
        Self { grid, values, spline, inradius }
    }

    pub fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    HPolytope(HPolytope),
    SupportGrid(SupportGrid),
    Ball { radius: f64 },
    Box { half_widths: Vec<f64> },
    Ellipsoid { semi_axes: Vec<f64> },
}

/// A convex body together with its symmetry and origin flags.
///
/// Bodies are immutable once built. Planar polytopes and support grids
/// carry a precomputed [`Polygon2D`] used for fast membership and radial
/// integration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody {
    dim: usize,
    repr: Representation,
    symmetric: bool,
    contains_origin: bool,
    polygon: Option<Arc<Polygon2D>>,
}

/// Discrete curvature radius of a planar support grid at node `j`.
///
/// This is the length of facet `j` of the grid polygon divided by the
/// angular step; it agrees with `h + h''` to second order and vanishes
/// exactly on sinusoidal pieces, so polygon corners are never mistaken
/// for curvature.
pub fn discrete_rho(values: &[f64], j: usize, step: f64) -> f64 {
    let m = values.len();
    let prev = values[(j + m - 1) % m];
    let next = values[(j + 1) % m];
    (next + prev - 2.0 * values[j] * step.cos()) / (step.sin() * step)
}

fn check_unit(u: &[f64]) -> Result<()> {
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOL {
        return input(format!("direction must be a unit vector, |u| = {norm}"));
    }
    Ok(())
}

impl ConvexBody {
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 || !(radius > 0.0 && radius.is_finite()) {
            return input(format!("ball needs dim >= 1 and a positive radius, got {radius}"));
        }
        Ok(Self { dim, repr: Representation::Ball { radius }, symmetric: true, contains_origin: true, polygon: None })
    }

    /// Centered box with the given half-widths.
    pub fn cuboid(half_widths: &[f64]) -> Result<Self> {
        if half_widths.is_empty() || half_widths.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return input("box needs positive half-widths");
        }
        let dim = half_widths.len();
        let polygon = (dim == 2).then(|| {
            let [a, b] = [half_widths[0], half_widths[1]];
            Arc::new(
                Polygon2D::from_points(&[[a, b], [-a, b], [-a, -b], [a, -b]]).expect("box is a valid polygon"),
            )
        });
        Ok(Self {
            dim,
            repr: Representation::Box { half_widths: half_widths.to_vec() },
            symmetric: true,
            contains_origin: true,
            polygon,
        })
    }

    pub fn ellipsoid(semi_axes: &[f64]) -> Result<Self> {
        if semi_axes.is_empty() || semi_axes.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return input("ellipsoid needs positive semi-axes");
        }
        Ok(Self {
            dim: semi_axes.len(),
            repr: Representation::Ellipsoid { semi_axes: semi_axes.to_vec() },
            symmetric: true,
            contains_origin: true,
            polygon: None,
        })
    }

    pub fn hpolytope(dim: usize, normals: &[Vec<f64>], offsets: &[f64]) -> Result<Self> {
        Self::from_hpolytope(HPolytope::new(dim, normals, offsets)?)
    }

    pub fn from_hpolytope(poly: HPolytope) -> Result<Self> {
        let dim = poly.dim();
        let contains_origin = poly.offsets().iter().all(|&b| b >= 0.0);
        let symmetric = poly.is_symmetric();
        let polygon = if dim == 2 {
            let pts: Vec<[f64; 2]> = poly.vertices().map(|v| [v[0], v[1]]).collect();
            Some(Arc::new(Polygon2D::from_points(&pts)?))
        } else {
            None
        };
        Ok(Self { dim, repr: Representation::HPolytope(poly), symmetric, contains_origin, polygon })
    }

    /// Interval `[-left, right]` on the line.
    pub fn interval(left: f64, right: f64) -> Result<Self> {
        Self::support_grid(Arc::new(DirectionGrid::interval()), vec![left, right])
    }

    /// Body with support values `values[j]` at the grid directions.
    ///
    /// Planar grids are validated through the discrete curvature radius;
    /// in dimension three and up the grid relaxation is always a valid
    /// convex set and only finiteness is checked.
    pub fn support_grid(grid: Arc<DirectionGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return input(format!("{} support values for a grid of {} directions", values.len(), grid.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return input("support values must be finite");
        }
        let dim = grid.dim();
        let mut spline = None;
        let mut polygon = None;
        match dim {
            1 => {
                if values[0] + values[1] < 0.0 {
                    return input(format!("empty interval [{}, {}]", -values[0], values[1]));
                }
            }
            2 => {
                let step = grid.step().ok_or_else(|| crate::error::GzError::Input("planar support grids must use a circle grid".into()))?;
                for j in 0..values.len() {
                    let rho = discrete_rho(&values, j, step);
                    if rho < -VALIDATION_TOL {
                        return input(format!(
                            "support grid is not a support function: curvature radius {rho:.3e} at angle {:.6}",
                            grid.angle(j)
                        ));
                    }
                }
                spline = Some(PeriodicSpline::new(&values));
                polygon = Some(Arc::new(grid_polygon(&grid, &values)?));
            }
            _ => {}
        }
        let contains_origin = values.iter().all(|&h| h >= 0.0);
        let symmetric = (0..values.len()).all(|j| match grid.antipode(j) {
            Some(k) => (values[j] - values[k]).abs() <= 1e-10,
            None => false,
        });
        Ok(Self {
            dim,
            repr: Representation::SupportGrid(SupportGrid::new(grid, values, spline)),
            symmetric,
            contains_origin,
            polygon,
        })
    }

    /// Tabulates an arbitrary support function on `grid`.
    pub fn from_support_fn(grid: Arc<DirectionGrid>, h: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = grid.directions().map(&h).collect();
        Self::support_grid(grid, values)
    }

    /// Square `|x|_inf <= half_width` as an H-polytope.
    pub fn square(half_width: f64) -> Result<Self> {
        Self::hpolytope(
            2,
            &[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]],
            &[half_width; 4],
        )
    }

    /// `square ⊕ eps·Ball` tabulated on the default circle grid.
    pub fn smoothed_square(half_width: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return input("smoothing radius must be positive");
        }
        let grid = Arc::new(DirectionGrid::default_for(2)?);
        Self::from_support_fn(grid, |u| half_width * (u[0].abs() + u[1].abs()) + eps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn contains_origin(&self) -> bool {
        self.contains_origin
    }

    pub fn polygon(&self) -> Option<&Polygon2D> {
        self.polygon.as_deref()
    }

    /// Support grid backing this body, if it is one.
    pub fn as_support_grid(&self) -> Option<&SupportGrid> {
        match &self.repr {
            Representation::SupportGrid(g) => Some(g),
            _ => None,
        }
    }

    pub fn support(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim {
            return input(format!("direction has length {}, body dimension is {}", u.len(), self.dim));
        }
        check_unit(u)?;
        Ok(self.support_unchecked(u))
    }

    pub(crate) fn support_unchecked(&self, u: &[f64]) -> f64 {
        match &self.repr {
            Representation::Ball { radius } => *radius,
            Representation::Box { half_widths } => half_widths.iter().zip(u).map(|(w, x)| w * x.abs()).sum(),
            Representation::Ellipsoid { semi_axes } => {
                semi_axes.iter().zip(u).map(|(a, x)| a * a * x * x).sum::<f64>().sqrt()
            }
            Representation::HPolytope(p) => p.support(u),
            Representation::SupportGrid(g) => grid_support(g, u),
        }
    }

    /// Closed-set membership. Support grids use the grid relaxation
    /// `<x, u_j> <= h_j` for all grid directions, a superset of the body
    /// that shrinks as the grid is refined.
    pub fn contains(&self, x: &[f64]) -> bool {
        if let Some(p) = &self.polygon {
            return p.contains(x);
        }
        match &self.repr {
            Representation::Ball { radius } => x.iter().map(|v| v * v).sum::<f64>() <= radius * radius * (1.0 + 1e-12),
            Representation::Box { half_widths } => x.iter().zip(half_widths).all(|(v, w)| v.abs() <= *w),
            Representation::Ellipsoid { semi_axes } => {
                x.iter().zip(semi_axes).map(|(v, a)| (v / a) * (v / a)).sum::<f64>() <= 1.0 + 1e-12
            }
            Representation::HPolytope(p) => p.contains(x),
            Representation::SupportGrid(g) => {
                if g.grid.dim() == 1 {
                    return -g.values[0] <= x[0] && x[0] <= g.values[1];
                }
                if g.inradius > 0.0 && dot(x, x) <= g.inradius * g.inradius * (1.0 - 1e-12) {
                    return true;
                }
                g.grid
                    .directions()
                    .zip(&g.values)
                    .all(|(u, &h)| dot(u, x) <= h + 1e-12 * h.abs().max(1.0))
            }
        }
    }

    /// `sup { t >= 0 : t u in K }`, requiring the origin in K.
    pub fn radial(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim {
            return input(format!("direction has length {}, body dimension is {}", u.len(), self.dim));
        }
        check_unit(u)?;
        if !self.contains_origin {
            return precondition("radial function needs the origin in the body");
        }
        Ok(self.radial_unchecked(u))
    }

    pub(crate) fn radial_unchecked(&self, u: &[f64]) -> f64 {
        if let Some(p) = &self.polygon {
            return p.radial(u);
        }
        match &self.repr {
            Representation::Ball { radius } => *radius,
            Representation::Box { half_widths } => half_widths
                .iter()
                .zip(u)
                .filter(|(_, x)| x.abs() > 0.0)
                .map(|(w, x)| w / x.abs())
                .fold(f64::INFINITY, f64::min),
            Representation::Ellipsoid { semi_axes } => {
                1.0 / semi_axes.iter().zip(u).map(|(a, x)| (x / a) * (x / a)).sum::<f64>().sqrt()
            }
            Representation::HPolytope(p) => p.radial(u),
            Representation::SupportGrid(g) => g
                .grid
                .directions()
                .zip(&g.values)
                .filter_map(|(v, &h)| {
                    let d = dot(v, u);
                    (d > 0.0).then(|| h / d)
                })
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// `t K`, flags preserved.
    pub fn dilate(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return input(format!("dilation factor must be positive, got {t}"));
        }
        if t == 1.0 {
            return Ok(self.clone());
        }
        let scale = |v: &[f64]| v.iter().map(|x| x * t).collect::<Vec<_>>();
        let repr = match &self.repr {
            Representation::Ball { radius } => Representation::Ball { radius: radius * t },
            Representation::Box { half_widths } => Representation::Box { half_widths: scale(half_widths) },
            Representation::Ellipsoid { semi_axes } => Representation::Ellipsoid { semi_axes: scale(semi_axes) },
            Representation::HPolytope(p) => Representation::HPolytope(p.scaled(t)),
            Representation::SupportGrid(g) => {
                let values = scale(&g.values);
                let spline = g.spline.as_ref().map(|_| PeriodicSpline::new(&values));
                Representation::SupportGrid(SupportGrid::new(g.grid.clone(), values, spline))
            }
        };
        let polygon = self.polygon.as_ref().map(|p| {
            let pts: Vec<[f64; 2]> = p.vertices().iter().map(|v| [v[0] * t, v[1] * t]).collect();
            Arc::new(Polygon2D::from_points(&pts).expect("scaled polygon stays valid"))
        });
        Ok(Self { dim: self.dim, repr, symmetric: self.symmetric, contains_origin: self.contains_origin, polygon })
    }

    /// Support values of this body on `grid`.
    pub fn sample_on(&self, grid: &DirectionGrid) -> Result<Vec<f64>> {
        if grid.dim() != self.dim {
            return input(format!("grid dimension {} does not match body dimension {}", grid.dim(), self.dim));
        }
        if let Representation::SupportGrid(g) = &self.repr {
            if *g.grid == *grid {
                return Ok(g.values.clone());
            }
        }
        Ok(grid.directions().map(|u| self.support_unchecked(u)).collect())
    }

    /// Re-expresses this body as a support grid on `grid`.
    pub fn to_support_grid(&self, grid: Arc<DirectionGrid>) -> Result<Self> {
        let values = self.sample_on(&grid)?;
        Self::support_grid(grid, values)
    }

    /// Minkowski convex combination `lambda K + (1 - lambda) L`.
    ///
    /// Two balls, two boxes and intervals combine exactly; everything else
    /// is tabulated on a shared grid (the grid of an input support grid if
    /// there is one, else the default grid for the dimension).
    pub fn minkowski_comb(&self, other: &Self, lambda: f64) -> Result<Self> {
        if self.dim != other.dim {
            return input(format!("dimension mismatch: {} vs {}", self.dim, other.dim));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return input(format!("lambda must lie in [0, 1], got {lambda}"));
        }
        if lambda == 1.0 {
            return Ok(self.clone());
        }
        if lambda == 0.0 {
            return Ok(other.clone());
        }
        let mu = 1.0 - lambda;
        match (&self.repr, &other.repr) {
            (Representation::Ball { radius: a }, Representation::Ball { radius: b }) => {
                return Self::ball(self.dim, lambda * a + mu * b);
            }
            (Representation::Box { half_widths: a }, Representation::Box { half_widths: b }) => {
                let w: Vec<f64> = a.iter().zip(b).map(|(x, y)| lambda * x + mu * y).collect();
                return Self::cuboid(&w);
            }
            _ => {}
        }
        let grid = match (&self.repr, &other.repr) {
            (Representation::SupportGrid(g), _) => g.grid.clone(),
            (_, Representation::SupportGrid(g)) => g.grid.clone(),
            _ => Arc::new(DirectionGrid::default_for(self.dim)?),
        };
        let hk = self.sample_on(&grid)?;
        let hl = other.sample_on(&grid)?;
        let values = hk.iter().zip(&hl).map(|(a, b)| lambda * a + mu * b).collect();
        let mut out = Self::support_grid(grid, values)?;
        out.symmetric = self.symmetric && other.symmetric;
        out.contains_origin = self.contains_origin && other.contains_origin;
        Ok(out)
    }

    /// Radius of a ball centered at the origin that contains the body.
    pub fn bounding_radius(&self) -> f64 {
        match &self.repr {
            Representation::Ball { radius } => *radius,
            Representation::Box { half_widths } => half_widths.iter().map(|w| w * w).sum::<f64>().sqrt(),
            Representation::Ellipsoid { semi_axes } => semi_axes.iter().copied().fold(0.0, f64::max),
            Representation::HPolytope(p) => p
                .vertices()
                .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
                .fold(0.0, f64::max),
            Representation::SupportGrid(g) => match &self.polygon {
                Some(p) => p.vertices().iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max),
                None => {
                    // sqrt(n) * max h bounds the relaxation when the grid covers every orthant direction
                    let hmax = g.values.iter().copied().fold(0.0, f64::max);
                    hmax * (self.dim as f64).sqrt() * 2.0
                }
            },
        }
    }
}

/// Support of a tabulated body off the grid.
fn grid_support(g: &SupportGrid, u: &[f64]) -> f64 {
    match g.grid.dim() {
        1 => {
            if u[0] >= 0.0 {
                g.values[1] * u[0]
            } else {
                -g.values[0] * u[0]
            }
        }
        2 => {
            let theta = u[1].atan2(u[0]);
            g.spline.as_ref().expect("planar grids carry a spline").eval(theta)
        }
        _ => {
            // exact on grid directions, otherwise a local linear fit of the
            // 1-homogeneous extension through the nearest directions
            let mut scored: Vec<(f64, usize)> =
                g.grid.directions().enumerate().map(|(j, v)| (dot(v, u), j)).collect();
            scored.sort_by(|a, b| b.0.total_cmp(&a.0));
            if scored[0].0 >= 1.0 - 1e-12 {
                return g.values[scored[0].1];
            }
            let n = g.grid.dim();
            let k = (2 * n).min(scored.len());
            let a = nalgebra::DMatrix::from_fn(k, n, |r, c| g.grid.direction(scored[r].1)[c]);
            let b = nalgebra::DVector::from_fn(k, |r, _| g.values[scored[r].1]);
            match a.clone().svd(true, true).solve(&b, 1e-12) {
                Ok(x) => x.iter().zip(u).map(|(p, q)| p * q).sum(),
                Err(_) => g.values[scored[0].1],
            }
        }
    }
}

/// Polygon `{<u_j, x> <= h_j}` of a planar support grid.
fn grid_polygon(grid: &DirectionGrid, values: &[f64]) -> Result<Polygon2D> {
    let normals: Vec<[f64; 2]> = grid.directions().map(|u| [u[0], u[1]]).collect();
    if values.iter().all(|&h| h > 0.0) {
        return Polygon2D::from_sorted_halfplanes(&normals, values);
    }
    // origin on the boundary or outside: consecutive facet lines meet at the vertices
    let m = values.len();
    let step = 2.0 * PI / m as f64;
    let pts: Vec<[f64; 2]> = (0..m)
        .map(|j| facet_vertex(grid.angle(j), values[j], values[(j + 1) % m], step))
        .collect();
    Polygon2D::from_points(&pts)
}

/// Intersection of the lines `<u(theta), x> = h0` and `<u(theta + step), x> = h1`.
pub(crate) fn facet_vertex(theta: f64, h0: f64, h1: f64, step: f64) -> [f64; 2] {
    let (s0, c0) = theta.sin_cos();
    let (s1, c1) = (theta + step).sin_cos();
    let det = step.sin();
    [(h0 * s1 - h1 * s0) / det, (c0 * h1 - c1 * h0) / det]
}

/// One-parameter family `h + s psi`, `s` in `[s_min, s_max]`.
#[derive(Debug, Clone)]
pub struct BodyFamily {
    base: ConvexBody,
    grid: Arc<DirectionGrid>,
    base_values: Vec<f64>,
    perturbation: Vec<f64>,
    interval: (f64, f64),
}

impl BodyFamily {
    /// Builds the family and checks that every member is a valid body with
    /// discrete curvature radius at least `rho_min` (planar case). The radius
    /// is affine in `s`, so checking the endpoints covers the interval.
    pub fn new(
        base: ConvexBody,
        grid: Arc<DirectionGrid>,
        perturbation: Vec<f64>,
        interval: (f64, f64),
        rho_min: f64,
    ) -> Result<Self> {
        if perturbation.len() != grid.len() {
            return input(format!("perturbation has {} values for {} directions", perturbation.len(), grid.len()));
        }
        if !(interval.0 <= interval.1) {
            return input("family interval must satisfy s_min <= s_max");
        }
        let base_values = base.sample_on(&grid)?;
        let family = Self { base, grid, base_values, perturbation, interval };
        family.validate(rho_min)?;
        Ok(family)
    }

    fn validate(&self, rho_min: f64) -> Result<()> {
        for s in [self.interval.0, self.interval.1] {
            let values = self.values_at(s);
            if let Some(step) = self.grid.step() {
                for j in 0..values.len() {
                    let rho = discrete_rho(&values, j, step);
                    if rho < rho_min {
                        return Err(crate::error::GzError::InvalidFamily {
                            s,
                            reason: format!(
                                "curvature radius {rho:.3e} < {rho_min:.1e} at angle {:.6}",
                                self.grid.angle(j)
                            ),
                        });
                    }
                }
            }
            if let Err(e) = ConvexBody::support_grid(self.grid.clone(), values) {
                return Err(crate::error::GzError::InvalidFamily { s, reason: e.to_string() });
            }
        }
        Ok(())
    }

    pub fn base(&self) -> &ConvexBody {
        &self.base
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn perturbation(&self) -> &[f64] {
        &self.perturbation
    }

    fn values_at(&self, s: f64) -> Vec<f64> {
        self.base_values.iter().zip(&self.perturbation).map(|(h, p)| h + s * p).collect()
    }

    /// Member `K_s`.
    pub fn at(&self, s: f64) -> Result<ConvexBody> {
        if s < self.interval.0 - 1e-15 || s > self.interval.1 + 1e-15 {
            return input(format!("s = {s} lies outside the family interval {:?}", self.interval));
        }
        ConvexBody::support_grid(self.grid.clone(), self.values_at(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn circle() -> Arc<DirectionGrid> {
        Arc::new(DirectionGrid::circle(720).unwrap())
    }

    #[test]
    fn support_examples() {
        let b = ConvexBody::ball(3, 1.0).unwrap();
        assert_eq!(b.support(&[0.0, 0.6, 0.8]).unwrap(), 1.0);
        let bx = ConvexBody::cuboid(&[1.0, 2.0]).unwrap();
        assert_eq!(bx.support(&[1.0, 0.0]).unwrap(), 1.0);
        let e = ConvexBody::ellipsoid(&[3.0, 2.0]).unwrap();
        let t: f64 = 0.7;
        let expected = (9.0 * t.cos().powi(2) + 4.0 * t.sin().powi(2)).sqrt();
        assert!((e.support(&[t.cos(), t.sin()]).unwrap() - expected).abs() < 1e-15);
        assert!(b.support(&[1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn minkowski_examples() {
        let k = ConvexBody::ball(2, 1.0).unwrap();
        let l = ConvexBody::ball(2, 3.0).unwrap();
        assert_eq!(k.minkowski_comb(&l, 1.0).unwrap(), k);
        assert_eq!(k.minkowski_comb(&l, 0.5).unwrap(), ConvexBody::ball(2, 2.0).unwrap());
        let a = ConvexBody::cuboid(&[1.0, 1.0]).unwrap();
        let b = ConvexBody::cuboid(&[3.0, 1.0]).unwrap();
        assert_eq!(a.minkowski_comb(&b, 0.5).unwrap(), ConvexBody::cuboid(&[2.0, 1.0]).unwrap());
        assert!(k.minkowski_comb(&ConvexBody::ball(3, 1.0).unwrap(), 0.5).is_err());
    }

    #[test]
    fn membership_examples() {
        assert!(ConvexBody::ball(2, 1.0).unwrap().contains(&[0.0, 0.0]));
        assert!(!ConvexBody::cuboid(&[1.0, 1.0]).unwrap().contains(&[1.5, 0.0]));
        assert!(ConvexBody::square(1.0).unwrap().contains(&[1.0, 1.0]));
    }

    #[test]
    fn radial_examples() {
        assert_eq!(ConvexBody::ball(2, 2.0).unwrap().radial(&[0.6, 0.8]).unwrap(), 2.0);
        assert_eq!(ConvexBody::cuboid(&[1.0, 2.0]).unwrap().radial(&[0.0, 1.0]).unwrap(), 2.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = ConvexBody::square(1.0).unwrap().radial(&[s, s]).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        let shifted = ConvexBody::hpolytope(
            2,
            &[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            &[3.0, -1.0, 1.0, 1.0],
        )
        .unwrap();
        assert!(!shifted.contains_origin());
        assert!(matches!(shifted.radial(&[1.0, 0.0]), Err(crate::GzError::Precondition(_))));
    }

    #[test]
    fn dilate_examples() {
        let b = ConvexBody::ball(2, 1.0).unwrap();
        assert_eq!(b.dilate(2.0).unwrap(), ConvexBody::ball(2, 2.0).unwrap());
        assert_eq!(b.dilate(1.0).unwrap(), b);
        assert!(b.dilate(0.0).is_err());
        let sq = ConvexBody::square(1.0).unwrap();
        let u = [0.6, 0.8];
        assert!((sq.dilate(2.5).unwrap().support(&u).unwrap() - 2.5 * sq.support(&u).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn support_grid_rejects_non_support_functions() {
        let g = circle();
        let bumpy: Vec<f64> = (0..720).map(|j| 1.0 + 0.2 * (6.0 * g.angle(j)).cos()).collect();
        assert!(ConvexBody::support_grid(g.clone(), bumpy).is_err());
        let ok: Vec<f64> = (0..720).map(|j| 1.0 + 0.02 * (6.0 * g.angle(j)).cos()).collect();
        let body = ConvexBody::support_grid(g, ok).unwrap();
        assert!(body.is_symmetric());
        assert!(body.contains_origin());
    }

    #[test]
    fn translated_disc_grid_is_not_symmetric() {
        let g = circle();
        let body = ConvexBody::from_support_fn(g, |u| 1.0 + 0.3 * u[0]).unwrap();
        assert!(!body.is_symmetric());
        assert!(body.contains(&[1.25, 0.0]));
        assert!(!body.contains(&[-0.75, 0.0]));
    }

    #[test]
    fn degenerate_grid_with_origin_on_boundary() {
        // disc of radius 1 centred at (1, 0): h(u) = 1 + u_x, zero at angle pi
        let body = ConvexBody::from_support_fn(circle(), |u| 1.0 + u[0]).unwrap();
        assert!(body.contains_origin());
        assert!(body.contains(&[0.0, 0.0]));
        assert!((body.radial(&[1.0, 0.0]).unwrap() - 2.0).abs() < 1e-4);
    }

    #[test]
    fn interval_bodies() {
        let k = ConvexBody::interval(1.0, 2.0).unwrap();
        assert!(k.contains(&[-1.0]) && k.contains(&[2.0]) && !k.contains(&[2.1]));
        assert_eq!(k.support(&[-1.0]).unwrap(), 1.0);
        assert_eq!(k.radial(&[1.0]).unwrap(), 2.0);
        assert!(!k.is_symmetric());
        assert!(ConvexBody::interval(1.0, 1.0).unwrap().is_symmetric());
    }

    #[test]
    fn smoothed_square_grid() {
        let body = ConvexBody::smoothed_square(1.0, 0.1).unwrap();
        assert!(body.is_symmetric());
        assert!(body.contains(&[1.0, 1.0]));
        assert!(!body.contains(&[1.1, 1.1]));
        assert!(body.contains(&[1.1, 0.0]));
    }

    #[test]
    fn family_validation_names_failing_s() {
        let g = circle();
        let base = ConvexBody::ball(2, 1.0).unwrap();
        let psi: Vec<f64> = (0..720).map(|j| (4.0 * g.angle(j)).cos()).collect();
        let fam = BodyFamily::new(base.clone(), g.clone(), psi.clone(), (-0.01, 0.01), 1e-6).unwrap();
        assert!(fam.at(0.005).is_ok());
        assert!(fam.at(0.5).is_err());
        match BodyFamily::new(base, g, psi, (-0.01, 0.2), 1e-6) {
            Err(crate::GzError::InvalidFamily { s, .. }) => assert_eq!(s, 0.2),
            other => panic!("expected invalid family, got {other:?}"),
        }
    }

    fn harmonic(g: &DirectionGrid, coeffs: &[f64]) -> Vec<f64> {
        (0..g.len())
            .map(|j| {
                let t = g.angle(j);
                1.0 + coeffs.iter().enumerate().map(|(k, c)| c * ((k + 2) as f64 * t).cos()).sum::<f64>()
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn support_is_linear_under_combination(
            a in proptest::collection::vec(-0.04f64..0.04, 3),
            b in proptest::collection::vec(-0.04f64..0.04, 3),
            lambda in 0.0f64..1.0,
        ) {
            let g = circle();
            let k = ConvexBody::support_grid(g.clone(), harmonic(&g, &a)).unwrap();
            let l = ConvexBody::support_grid(g.clone(), harmonic(&g, &b)).unwrap();
            let m = k.minkowski_comb(&l, lambda).unwrap();
            let (hk, hl, hm) = (k.sample_on(&g).unwrap(), l.sample_on(&g).unwrap(), m.sample_on(&g).unwrap());
            for j in 0..g.len() {
                prop_assert!((hm[j] - (lambda * hk[j] + (1.0 - lambda) * hl[j])).abs() < 1e-10);
            }
            let kk = k.minkowski_comb(&k, lambda).unwrap();
            for (x, y) in kk.sample_on(&g).unwrap().iter().zip(&hk) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }

        #[test]
        fn polygon_membership_matches_relaxation(
            a in proptest::collection::vec(-0.04f64..0.04, 3),
            x in -1.2f64..1.2,
            y in -1.2f64..1.2,
        ) {
            let g = circle();
            let values = harmonic(&g, &a);
            let k = ConvexBody::support_grid(g.clone(), values.clone()).unwrap();
            let brute = g.directions().zip(&values).all(|(u, h)| u[0] * x + u[1] * y <= h + 1e-12);
            prop_assert_eq!(k.contains(&[x, y]), brute);
        }

        #[test]
        fn ball_radial_equals_support(r in 0.1f64..5.0, t in 0.0f64..std::f64::consts::TAU) {
            let b = ConvexBody::ball(2, r).unwrap();
            let u = [t.cos(), t.sin()];
            prop_assert!((b.radial(&u).unwrap() - b.support(&u).unwrap()).abs() < 1e-12);
        }
    }
}
