use std::f64::consts::PI;

use crate::error::{input, Result};

/// Edge of a convex polygon, `<normal, x> = offset` between two consecutive vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub normal: [f64; 2],
    pub offset: f64,
}

/// Angular sector seen from the origin, bounded by one polygon edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub start: f64,
    pub end: f64,
    pub edge: Edge,
}

impl Sector {
    /// Distance from the origin to the edge along angle `phi`.
    pub fn radius(&self, phi: f64) -> f64 {
        let d = self.edge.normal[0] * phi.cos() + self.edge.normal[1] * phi.sin();
        self.edge.offset / d
    }
}

/// Convex polygon with counter-clockwise vertices.
///
/// When the origin is interior the vertex angles are stored unwrapped so that
/// membership and radial queries are a binary search.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon2D {
    vertices: Vec<[f64; 2]>,
    edges: Vec<Edge>,
    angles: Option<Vec<f64>>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl Polygon2D {
    /// Convex hull of a point set (Andrew's monotone chain).
    pub fn from_points(points: &[[f64; 2]]) -> Result<Self> {
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-13 && (a[1] - b[1]).abs() < 1e-13);
        if pts.len() < 3 {
            return input("polygon needs at least three distinct vertices");
        }
        let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
                if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
            for &p in iter {
                while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 1e-15 {
                    hull.pop();
                }
                hull.push(p);
            }
            hull.pop();
        }
        if hull.len() < 3 {
            return input("polygon is degenerate (collinear vertices)");
        }
        Ok(Self::from_ccw(hull))
    }

    /// Polygon `{x : <n_i, x> <= b_i}` for unit normals sorted by angle and
    /// strictly positive offsets. Redundant constraints are dropped by a
    /// Graham scan over the dual points `n_i / b_i`.
    pub fn from_sorted_halfplanes(normals: &[[f64; 2]], offsets: &[f64]) -> Result<Self> {
        let m = normals.len();
        if m < 3 || offsets.iter().any(|&b| b <= 0.0) {
            return input("halfplane polygon needs >= 3 constraints with positive offsets");
        }
        let dual: Vec<[f64; 2]> = normals
            .iter()
            .zip(offsets)
            .map(|(n, b)| [n[0] / b, n[1] / b])
            .collect();
        let norm2 = |p: [f64; 2]| p[0] * p[0] + p[1] * p[1];
        let first = (0..m)
            .max_by(|&i, &j| norm2(dual[i]).total_cmp(&norm2(dual[j])))
            .expect("non-empty");
        let mut stack: Vec<usize> = Vec::with_capacity(m + 1);
        for step in 0..=m {
            let i = (first + step) % m;
            while stack.len() >= 2
                && cross(dual[stack[stack.len() - 2]], dual[stack[stack.len() - 1]], dual[i]) <= 0.0
            {
                stack.pop();
            }
            stack.push(i);
        }
        stack.pop();
        if stack.len() < 3 {
            return input("halfplane polygon is unbounded");
        }
        let k = stack.len();
        let mut vertices = Vec::with_capacity(k);
        for s in 0..k {
            let (i, j) = (stack[s], stack[(s + 1) % k]);
            let (a, b) = (normals[i], normals[j]);
            let det = a[0] * b[1] - a[1] * b[0];
            if det <= 1e-15 {
                return input("halfplane polygon is unbounded (angular gap of pi or more)");
            }
            vertices.push([
                (offsets[i] * b[1] - offsets[j] * a[1]) / det,
                (a[0] * offsets[j] - b[0] * offsets[i]) / det,
            ]);
        }
        Ok(Self::from_ccw(vertices))
    }

    fn from_ccw(vertices: Vec<[f64; 2]>) -> Self {
        let k = vertices.len();
        let mut edges = Vec::with_capacity(k);
        let mut kept = Vec::with_capacity(k);
        for i in 0..k {
            let (p, q) = (vertices[i], vertices[(i + 1) % k]);
            let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
            let len = dx.hypot(dy);
            if len < 1e-14 {
                continue;
            }
            let normal = [dy / len, -dx / len];
            edges.push(Edge { normal, offset: normal[0] * p[0] + normal[1] * p[1] });
            kept.push(p);
        }
        let interior = edges.iter().all(|e| e.offset > 1e-14);
        let angles = interior.then(|| {
            let mut out = Vec::with_capacity(kept.len());
            let base = kept[0][1].atan2(kept[0][0]);
            let mut prev = base;
            out.push(base);
            for v in &kept[1..] {
                let mut a = v[1].atan2(v[0]);
                while a <= prev {
                    a += 2.0 * PI;
                }
                out.push(a);
                prev = a;
            }
            out
        });
        Self { vertices: kept, edges, angles }
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn origin_is_interior(&self) -> bool {
        self.angles.is_some()
    }

    pub fn contains_origin(&self) -> bool {
        self.edges.iter().all(|e| e.offset >= -1e-14)
    }

    fn sector_index(&self, phi: f64) -> Option<usize> {
        let angles = self.angles.as_ref()?;
        let base = angles[0];
        let phi = base + (phi - base).rem_euclid(2.0 * PI);
        let k = angles.partition_point(|&a| a <= phi);
        Some(k.saturating_sub(1))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let tol = |b: f64| 1e-12 * b.abs().max(1.0);
        match self.sector_index(x[1].atan2(x[0])) {
            Some(k) => {
                let e = &self.edges[k];
                e.normal[0] * x[0] + e.normal[1] * x[1] <= e.offset + tol(e.offset)
            }
            None => self
                .edges
                .iter()
                .all(|e| e.normal[0] * x[0] + e.normal[1] * x[1] <= e.offset + tol(e.offset)),
        }
    }

    /// Radial function; `+inf` when no edge faces `u`.
    pub fn radial(&self, u: &[f64]) -> f64 {
        if let Some(k) = self.sector_index(u[1].atan2(u[0])) {
            let e = &self.edges[k];
            return e.offset / (e.normal[0] * u[0] + e.normal[1] * u[1]);
        }
        self.edges
            .iter()
            .filter_map(|e| {
                let d = e.normal[0] * u[0] + e.normal[1] * u[1];
                (d > 0.0).then(|| e.offset / d)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn support(&self, u: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| v[0] * u[0] + v[1] * u[1])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Angular sectors from the origin, one per edge not passing through it.
    /// Requires the origin to lie in the closed polygon.
    pub fn sectors(&self) -> Vec<Sector> {
        let k = self.vertices.len();
        let mut out = Vec::with_capacity(k);
        for (i, e) in self.edges.iter().enumerate() {
            if e.offset <= 1e-14 {
                continue;
            }
            let (p, q) = (self.vertices[i], self.vertices[(i + 1) % k]);
            let start = p[1].atan2(p[0]);
            let width = (p[0] * q[1] - p[1] * q[0]).atan2(p[0] * q[0] + p[1] * q[1]);
            out.push(Sector { start, end: start + width, edge: *e });
        }
        out
    }

    pub fn area(&self) -> f64 {
        let k = self.vertices.len();
        0.5 * (0..k)
            .map(|i| {
                let (p, q) = (self.vertices[i], self.vertices[(i + 1) % k]);
                p[0] * q[1] - p[1] * q[0]
            })
            .sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_halfplanes() -> Polygon2D {
        let normals = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        Polygon2D::from_sorted_halfplanes(&normals, &[1.0, 2.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn rectangle_from_halfplanes() {
        let p = square_halfplanes();
        assert_eq!(p.vertices().len(), 4);
        assert!((p.area() - 6.0).abs() < 1e-12);
        assert!(p.contains(&[1.0, 2.0]));
        assert!(!p.contains(&[1.01, 0.0]));
        assert!((p.radial(&[0.0, 1.0]) - 2.0).abs() < 1e-12);
        let total: f64 = p.sectors().iter().map(|s| s.end - s.start).sum();
        assert!((total - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn redundant_constraints_are_dropped() {
        let normals: Vec<[f64; 2]> = (0..8)
            .map(|j| {
                let t = j as f64 * PI / 4.0;
                [t.cos(), t.sin()]
            })
            .collect();
        // diagonal constraints at distance 5 never bind on the unit square
        let offsets = [1.0, 5.0, 1.0, 5.0, 1.0, 5.0, 1.0, 5.0];
        let p = Polygon2D::from_sorted_halfplanes(&normals, &offsets).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert!((p.area() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn hull_with_origin_on_boundary() {
        let p = Polygon2D::from_points(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]]).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert!(!p.origin_is_interior());
        assert!(p.contains_origin());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((p.radial(&[s, s]) - 2f64.sqrt()).abs() < 1e-12);
        let total: f64 = p.sectors().iter().map(|s| s.end - s.start).sum();
        assert!((total - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_halfplanes_error() {
        let normals = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]];
        assert!(Polygon2D::from_sorted_halfplanes(&normals, &[1.0, 1.0, 1.0]).is_err());
    }
}
