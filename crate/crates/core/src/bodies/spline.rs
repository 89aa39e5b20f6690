//! Periodic cubic interpolation on a uniform angular grid.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSpline {
    values: Vec<f64>,
    curvature: Vec<f64>,
    step: f64,
}

impl PeriodicSpline {
    /// Interpolates `values[j]` at angles `2 pi j / m`. Requires `m >= 3`.
    pub fn new(values: &[f64]) -> Self {
        let m = values.len();
        assert!(m >= 3, "periodic spline needs at least three nodes");
        let step = 2.0 * PI / m as f64;
        let rhs: Vec<f64> = (0..m)
            .map(|j| {
                let prev = values[(j + m - 1) % m];
                let next = values[(j + 1) % m];
                6.0 * (next - 2.0 * values[j] + prev) / (step * step)
            })
            .collect();
        let curvature = solve_cyclic_141(&rhs);
        Self { values: values.to_vec(), curvature, step }
    }

    fn locate(&self, theta: f64) -> (usize, usize, f64) {
        let m = self.values.len();
        let t = theta.rem_euclid(2.0 * PI) / self.step;
        let j = (t.floor() as usize).min(m - 1);
        let local = (t - j as f64) * self.step;
        (j, (j + 1) % m, local)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let (j, k, t) = self.locate(theta);
        let h = self.step;
        let (mj, mk) = (self.curvature[j], self.curvature[k]);
        let s = h - t;
        mj * s * s * s / (6.0 * h)
            + mk * t * t * t / (6.0 * h)
            + (self.values[j] / h - mj * h / 6.0) * s
            + (self.values[k] / h - mk * h / 6.0) * t
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        let (j, k, t) = self.locate(theta);
        let h = self.step;
        let (mj, mk) = (self.curvature[j], self.curvature[k]);
        let s = h - t;
        -mj * s * s / (2.0 * h) + mk * t * t / (2.0 * h) - (self.values[j] / h - mj * h / 6.0)
            + (self.values[k] / h - mk * h / 6.0)
    }

    pub fn second_derivative(&self, theta: f64) -> f64 {
        let (j, k, t) = self.locate(theta);
        let h = self.step;
        (self.curvature[j] * (h - t) + self.curvature[k] * t) / h
    }

    /// First derivative at node `j`.
    pub fn node_derivative(&self, j: usize) -> f64 {
        let m = self.values.len();
        let k = (j + 1) % m;
        let h = self.step;
        (self.values[k] - self.values[j]) / h - h * (2.0 * self.curvature[j] + self.curvature[k]) / 6.0
    }
}

/// Solves the circulant system `x[j-1] + 4 x[j] + x[j+1] = r[j]` (indices mod m)
/// by the Sherman-Morrison correction of a tridiagonal solve.
fn solve_cyclic_141(rhs: &[f64]) -> Vec<f64> {
    let m = rhs.len();
    let gamma = -4.0;
    let mut diag = vec![4.0; m];
    diag[0] -= gamma;
    diag[m - 1] -= 1.0 / gamma;
    let x = solve_tridiagonal(&diag, rhs);
    let mut u = vec![0.0; m];
    u[0] = gamma;
    u[m - 1] = 1.0;
    let z = solve_tridiagonal(&diag, &u);
    let fact = (x[0] + x[m - 1] / gamma) / (1.0 + z[0] + z[m - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

/// Thomas algorithm with unit off-diagonals.
fn solve_tridiagonal(diag: &[f64], rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    c[0] = 1.0 / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..m {
        let denom = diag[i] - c[i - 1];
        c[i] = 1.0 / denom;
        d[i] = (rhs[i] - d[i - 1]) / denom;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(m: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..m).map(|j| f(2.0 * PI * j as f64 / m as f64)).collect()
    }

    #[test]
    fn interpolates_nodes_and_trig_functions() {
        let m = 180;
        let s = PeriodicSpline::new(&sample(m, |t| (2.0 * t).cos() + 0.3 * t.sin()));
        for j in 0..m {
            let t = 2.0 * PI * j as f64 / m as f64;
            assert!((s.eval(t) - ((2.0 * t).cos() + 0.3 * t.sin())).abs() < 1e-12);
        }
        for k in 0..97 {
            let t = 0.0123 + k as f64 * 0.0647;
            let exact = (2.0 * t).cos() + 0.3 * t.sin();
            let exact_d = -2.0 * (2.0 * t).sin() + 0.3 * t.cos();
            assert!((s.eval(t) - exact).abs() < 1e-7);
            assert!((s.derivative(t) - exact_d).abs() < 1e-5);
            assert!((s.second_derivative(t) + 4.0 * (2.0 * t).cos() + 0.3 * t.sin()).abs() < 1e-2);
        }
    }

    #[test]
    fn node_derivative_matches_derivative() {
        let s = PeriodicSpline::new(&sample(64, |t| (3.0 * t).sin()));
        for j in 0..64 {
            let t = 2.0 * PI * j as f64 / 64.0;
            assert!((s.node_derivative(j) - s.derivative(t)).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_is_reproduced() {
        let s = PeriodicSpline::new(&[2.5; 16]);
        assert!((s.eval(1.234) - 2.5).abs() < 1e-14);
        assert!(s.derivative(4.0).abs() < 1e-13);
    }
}
