use nalgebra::{DMatrix, DVector};

use crate::error::{input, Result};

const FEAS_TOL: f64 = 1e-9;
const MAX_COMBINATIONS: usize = 2_000_000;

/// Intersection of half-spaces `<a_i, x> <= b_i` with unit normals.
///
/// Vertices are enumerated once at construction by brute force over
/// `dim`-subsets of facets; the polytope must be bounded and non-empty.
#[derive(Debug, Clone, PartialEq)]
pub struct HPolytope {
    dim: usize,
    normals: Vec<f64>,
    offsets: Vec<f64>,
    vertices: Vec<f64>,
}

impl HPolytope {
    /// Normalizes each normal to unit length (rescaling its offset).
    pub fn new(dim: usize, normals: &[Vec<f64>], offsets: &[f64]) -> Result<Self> {
        if dim == 0 {
            return input("polytope dimension must be at least 1");
        }
        if normals.len() != offsets.len() {
            return input(format!(
                "{} normals but {} offsets",
                normals.len(),
                offsets.len()
            ));
        }
        let mut flat = Vec::with_capacity(dim * normals.len());
        let mut scaled = Vec::with_capacity(offsets.len());
        for (i, (a, &b)) in normals.iter().zip(offsets).enumerate() {
            if a.len() != dim {
                return input(format!("normal {i} has length {}, expected {dim}", a.len()));
            }
            let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !norm.is_finite() || norm < 1e-14 || !b.is_finite() {
                return input(format!("facet {i} has a zero or non-finite normal/offset"));
            }
            flat.extend(a.iter().map(|x| x / norm));
            scaled.push(b / norm);
        }
        let mut poly = Self { dim, normals: flat, offsets: scaled, vertices: Vec::new() };
        if let Some(d) = poly.recession_direction() {
            return input(format!("polytope is unbounded along {d:?}"));
        }
        poly.vertices = poly.enumerate_vertices()?;
        if poly.vertices.is_empty() {
            return input("polytope is empty");
        }
        Ok(poly)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facet_count(&self) -> usize {
        self.offsets.len()
    }

    pub fn normal(&self, i: usize) -> &[f64] {
        &self.normals[i * self.dim..(i + 1) * self.dim]
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> {
        self.vertices.chunks_exact(self.dim)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len() / self.dim
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.normals
            .chunks_exact(self.dim)
            .zip(&self.offsets)
            .all(|(a, &b)| dot(a, x) <= b + 1e-12 * b.abs().max(1.0))
    }

    pub fn support(&self, u: &[f64]) -> f64 {
        self.vertices()
            .map(|v| dot(v, u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn radial(&self, u: &[f64]) -> f64 {
        self.normals
            .chunks_exact(self.dim)
            .zip(&self.offsets)
            .filter_map(|(a, &b)| {
                let d = dot(a, u);
                (d > 0.0).then(|| b / d)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            dim: self.dim,
            normals: self.normals.clone(),
            offsets: self.offsets.iter().map(|b| b * t).collect(),
            vertices: self.vertices.iter().map(|v| v * t).collect(),
        }
    }

    /// Symmetric when every facet `(a, b)` has a partner `(-a, b)`.
    pub fn is_symmetric(&self) -> bool {
        let m = self.facet_count();
        (0..m).all(|i| {
            let a = self.normal(i);
            (0..m).any(|k| {
                (self.offsets[i] - self.offsets[k]).abs() <= 1e-10
                    && a.iter().zip(self.normal(k)).all(|(x, y)| (x + y).abs() <= 1e-10)
            })
        })
    }

    /// A nonzero `d` with `<a_i, d> <= 0` for all facets, if one exists.
    ///
    /// With full-rank normals the recession cone is pointed, so any nonzero
    /// cone has an extreme ray cut out by `dim - 1` tight facets.
    fn recession_direction(&self) -> Option<Vec<f64>> {
        let n = self.dim;
        let m = self.facet_count();
        let a = DMatrix::from_row_slice(m, n, &self.normals);
        if a.rank(1e-10) < n {
            let svd = a.svd(false, true);
            let vt = svd.v_t.expect("requested V^T");
            let k = svd
                .singular_values
                .iter()
                .enumerate()
                .min_by(|x, y| x.1.total_cmp(y.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            return Some(vt.row(k).iter().copied().collect());
        }
        if n == 1 {
            return None;
        }
        let is_recession = |d: &[f64]| {
            self.normals
                .chunks_exact(n)
                .all(|ai| dot(ai, d) <= 1e-12)
        };
        let mut found = None;
        for_each_combination(m, n - 1, |subset| {
            let d = null_direction(n, subset.iter().map(|&i| self.normal(i)));
            if let Some(d) = d {
                let neg: Vec<f64> = d.iter().map(|x| -x).collect();
                if is_recession(&d) {
                    found = Some(d);
                    return false;
                }
                if is_recession(&neg) {
                    found = Some(neg);
                    return false;
                }
            }
            true
        });
        found
    }

    fn enumerate_vertices(&self) -> Result<Vec<f64>> {
        let n = self.dim;
        let m = self.facet_count();
        if binomial(m, n) > MAX_COMBINATIONS {
            return input(format!("too many facets ({m}) for vertex enumeration in dimension {n}"));
        }
        let mut out: Vec<f64> = Vec::new();
        for_each_combination(m, n, |subset| {
            let mut mat = DMatrix::zeros(n, n);
            let mut rhs = DVector::zeros(n);
            for (r, &i) in subset.iter().enumerate() {
                for c in 0..n {
                    mat[(r, c)] = self.normal(i)[c];
                }
                rhs[r] = self.offsets[i];
            }
            let Some(x) = mat.lu().solve(&rhs) else { return true };
            let x: Vec<f64> = x.iter().copied().collect();
            if x.iter().any(|v| !v.is_finite()) {
                return true;
            }
            let feasible = self
                .normals
                .chunks_exact(n)
                .zip(&self.offsets)
                .all(|(a, &b)| dot(a, &x) <= b + FEAS_TOL * b.abs().max(1.0));
            let duplicate = out
                .chunks_exact(n)
                .any(|v| v.iter().zip(&x).all(|(p, q)| (p - q).abs() <= 1e-9));
            if feasible && !duplicate {
                out.extend_from_slice(&x);
            }
            true
        });
        Ok(out)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn binomial(m: usize, k: usize) -> usize {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.saturating_mul(m - i) / (i + 1);
    }
    acc
}

/// Visits every `k`-subset of `0..m` in lexicographic order until `visit` returns false.
fn for_each_combination(m: usize, k: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !visit(&idx) {
            return;
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] < i + m - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Unit vector orthogonal to `n - 1` given rows, if they are independent.
fn null_direction<'a>(n: usize, rows: impl Iterator<Item = &'a [f64]>) -> Option<Vec<f64>> {
    let rows: Vec<&[f64]> = rows.collect();
    let d = match n {
        2 => vec![-rows[0][1], rows[0][0]],
        3 => {
            let (a, b) = (rows[0], rows[1]);
            vec![
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ]
        }
        _ => {
            let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
            let mat = DMatrix::from_row_slice(n - 1, n, &flat);
            let full = DMatrix::from_fn(n, n, |r, c| if r < n - 1 { mat[(r, c)] } else { 0.0 });
            let svd = full.svd(false, true);
            let vt = svd.v_t?;
            let k = svd
                .singular_values
                .iter()
                .enumerate()
                .min_by(|x, y| x.1.total_cmp(y.1))
                .map(|(i, _)| i)?;
            let second_smallest = svd
                .singular_values
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != k)
                .map(|(_, s)| *s)
                .fold(f64::INFINITY, f64::min);
            if second_smallest < 1e-10 {
                return None;
            }
            vt.row(k).iter().copied().collect()
        }
    };
    let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 1e-10).then(|| d.iter().map(|x| x / norm).collect())
}
