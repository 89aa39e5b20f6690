//! Log-concave measures `e^{-V} dx` given through potential oracles.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{input, GzError, Result};

/// User-supplied potential. All three oracles are required.
pub trait PotentialOracle: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], out: &mut [f64]);
    /// Row-major `n x n` Hessian.
    fn hessian(&self, x: &[f64], out: &mut [f64]);
}

#[derive(Clone)]
pub enum PotentialKind {
    Gaussian,
    DiagQuadratic(Vec<f64>),
    Custom(Arc<dyn PotentialOracle>),
}

impl fmt::Debug for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian => write!(f, "Gaussian"),
            Self::DiagQuadratic(c) => f.debug_tuple("DiagQuadratic").field(c).finish(),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Convex potential `V` with declared bounds `Hess V >= k1 Id`, `Lap V <= k2 n`.
#[derive(Debug, Clone)]
pub struct Potential {
    dim: usize,
    kind: PotentialKind,
    k1: f64,
    k2: f64,
    is_even: bool,
    ln_normalizer: Option<f64>,
}

impl Potential {
    /// Standard Gaussian, normalized to a probability measure.
    pub fn gaussian(dim: usize) -> Result<Self> {
        if dim == 0 {
            return input("dimension must be at least 1");
        }
        Ok(Self {
            dim,
            kind: PotentialKind::Gaussian,
            k1: 1.0,
            k2: 1.0,
            is_even: true,
            ln_normalizer: Some(0.5 * dim as f64 * (2.0 * PI).ln()),
        })
    }

    /// `V(x) = sum c_i x_i^2 / 2`, normalized to a probability measure.
    pub fn diag_quadratic(c: &[f64]) -> Result<Self> {
        if c.is_empty() {
            return input("diag_quadratic needs at least one coefficient");
        }
        if let Some(bad) = c.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return input(format!("diag_quadratic coefficients must be positive, got {bad}"));
        }
        let k1 = c.iter().copied().fold(f64::INFINITY, f64::min);
        let k2 = c.iter().sum::<f64>() / c.len() as f64;
        let ln_z = c.iter().map(|ci| 0.5 * (2.0 * PI / ci).ln()).sum();
        Ok(Self {
            dim: c.len(),
            kind: PotentialKind::DiagQuadratic(c.to_vec()),
            k1,
            k2,
            is_even: true,
            ln_normalizer: Some(ln_z),
        })
    }

    /// Custom oracle with declared bounds. Without `ln_normalizer` only
    /// ratios of measures are meaningful.
    pub fn custom(
        dim: usize,
        oracle: Arc<dyn PotentialOracle>,
        k1: f64,
        k2: f64,
        is_even: bool,
        ln_normalizer: Option<f64>,
    ) -> Result<Self> {
        if dim == 0 {
            return input("dimension must be at least 1");
        }
        if !(k1 > 0.0) || !(k2 >= k1) {
            return input(format!("declared bounds need 0 < k1 <= k2, got k1 = {k1}, k2 = {k2}"));
        }
        Ok(Self { dim, kind: PotentialKind::Custom(oracle), k1, k2, is_even, ln_normalizer })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    /// `R = k2 / k1`.
    pub fn ratio(&self) -> f64 {
        self.k2 / self.k1
    }

    pub fn is_even(&self) -> bool {
        self.is_even
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.kind, PotentialKind::Gaussian)
    }

    /// `ln Z` with `Z = int e^{-V}`, when known.
    pub fn ln_normalizer(&self) -> Option<f64> {
        self.ln_normalizer
    }

    /// Diagonal coefficients for the quadratic kinds.
    pub fn quadratic_coefficients(&self) -> Option<Vec<f64>> {
        match &self.kind {
            PotentialKind::Gaussian => Some(vec![1.0; self.dim]),
            PotentialKind::DiagQuadratic(c) => Some(c.clone()),
            PotentialKind::Custom(_) => None,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.kind {
            PotentialKind::Gaussian => 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
            PotentialKind::DiagQuadratic(c) => 0.5 * x.iter().zip(c).map(|(v, c)| c * v * v).sum::<f64>(),
            PotentialKind::Custom(o) => o.value(x),
        }
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.kind {
            PotentialKind::Gaussian => out.copy_from_slice(x),
            PotentialKind::DiagQuadratic(c) => {
                for ((o, v), c) in out.iter_mut().zip(x).zip(c) {
                    *o = c * v;
                }
            }
            PotentialKind::Custom(o) => o.gradient(x, out),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        self.gradient_into(x, &mut g);
        g
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim;
        match &self.kind {
            PotentialKind::Gaussian => DMatrix::identity(n, n),
            PotentialKind::DiagQuadratic(c) => DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(c)),
            PotentialKind::Custom(o) => {
                let mut buf = vec![0.0; n * n];
                o.hessian(x, &mut buf);
                DMatrix::from_row_slice(n, n, &buf)
            }
        }
    }

    /// `Lap V(x)`.
    pub fn laplacian(&self, x: &[f64]) -> f64 {
        match &self.kind {
            PotentialKind::Gaussian => self.dim as f64,
            PotentialKind::DiagQuadratic(c) => c.iter().sum(),
            PotentialKind::Custom(_) => self.hessian(x).trace(),
        }
    }

    /// Density of the normalized measure, `e^{-V(x) - ln Z}`; unnormalized
    /// when the normalizer is unknown.
    pub fn density(&self, x: &[f64]) -> f64 {
        (-self.value(x) - self.ln_normalizer.unwrap_or(0.0)).exp()
    }

    /// Spot-checks the declared curvature bounds at `points`.
    pub fn check_bounds(&self, points: &[Vec<f64>]) -> BoundsReport {
        let mut report = BoundsReport {
            min_eigenvalue: f64::INFINITY,
            max_trace_over_n: f64::NEG_INFINITY,
            k1: self.k1,
            k2: self.k2,
            pass: true,
            worst_point: None,
            points: points.len(),
        };
        let mut worst_excess = 0.0;
        for x in points {
            let h = self.hessian(x);
            let tr = h.trace() / self.dim as f64;
            let eig = SymmetricEigen::new(h).eigenvalues.min();
            report.min_eigenvalue = report.min_eigenvalue.min(eig);
            report.max_trace_over_n = report.max_trace_over_n.max(tr);
            let excess = (self.k1 - eig).max(tr - self.k2);
            if excess > BOUNDS_TOL && excess > worst_excess {
                worst_excess = excess;
                report.worst_point = Some(x.clone());
                report.pass = false;
            }
        }
        report
    }
}

const BOUNDS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub min_eigenvalue: f64,
    pub max_trace_over_n: f64,
    pub k1: f64,
    pub k2: f64,
    pub pass: bool,
    pub worst_point: Option<Vec<f64>>,
    pub points: usize,
}

impl BoundsReport {
    pub fn into_result(self) -> Result<Self> {
        match &self.worst_point {
            Some(p) if !self.pass => Err(GzError::BoundViolation {
                point: p.clone(),
                detail: format!(
                    "min Hessian eigenvalue {:.6} vs k1 = {}, max trace/n {:.6} vs k2 = {}",
                    self.min_eigenvalue, self.k1, self.max_trace_over_n, self.k2
                ),
            }),
            _ => Ok(self),
        }
    }
}

/// JSON measure description.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MeasureSpec {
    pub kind: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
}

impl MeasureSpec {
    pub fn build(&self) -> Result<Potential> {
        match (self.kind.as_str(), &self.c) {
            ("gaussian", None) => Potential::gaussian(self.dim),
            ("gaussian", Some(_)) => input("gaussian measures take no coefficients"),
            ("diag_quadratic", Some(c)) => {
                if c.len() != self.dim {
                    return input(format!("c has length {}, expected dim = {}", c.len(), self.dim));
                }
                Potential::diag_quadratic(c)
            }
            ("diag_quadratic", None) => input("diag_quadratic needs coefficients \"c\""),
            (k, _) => input(format!("unknown measure kind {k:?}; expected gaussian or diag_quadratic")),
        }
    }
}

/// Parses `gaussian` or `diag_quadratic` (with `c`) for the given dimension.
pub fn parse_measure(kind: &str, dim: usize, c: Option<&[f64]>) -> Result<Potential> {
    MeasureSpec { kind: kind.replace('-', "_"), dim, c: c.map(<[f64]>::to_vec) }.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    struct QuarticPlusGaussian;

    impl PotentialOracle for QuarticPlusGaussian {
        fn value(&self, x: &[f64]) -> f64 {
            x.iter().map(|v| 0.5 * v * v + 0.25 * v.powi(4)).sum()
        }
        fn gradient(&self, x: &[f64], out: &mut [f64]) {
            for (o, v) in out.iter_mut().zip(x) {
                *o = v + v.powi(3);
            }
        }
        fn hessian(&self, x: &[f64], out: &mut [f64]) {
            let n = x.len();
            out.fill(0.0);
            for i in 0..n {
                out[i * n + i] = 1.0 + 3.0 * x[i] * x[i];
            }
        }
    }

    fn sample_points(n: usize, count: usize) -> Vec<Vec<f64>> {
        (0..count)
            .map(|i| (0..n).map(|k| ((i * 7 + k * 13) as f64 * 0.37).sin() * 3.0).collect())
            .collect()
    }

    #[test]
    fn gaussian_examples() {
        let p = Potential::gaussian(2).unwrap();
        assert_eq!(p.value(&[3.0, 4.0]), 12.5);
        assert_eq!(p.gradient(&[3.0, -4.0]), vec![3.0, -4.0]);
        assert_eq!(p.ratio(), 1.0);
        assert!((p.density(&[0.0, 0.0]) - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn diag_quadratic_examples() {
        let p = Potential::diag_quadratic(&[1.0, 4.0]).unwrap();
        assert_eq!((p.k1(), p.k2(), p.ratio()), (1.0, 2.5, 2.5));
        let q = Potential::diag_quadratic(&[1.0, 1.0]).unwrap();
        let g = Potential::gaussian(2).unwrap();
        for x in sample_points(2, 10) {
            assert_eq!(q.value(&x), g.value(&x));
            assert_eq!(q.density(&x), g.density(&x));
        }
        assert_eq!(Potential::diag_quadratic(&[2.0, 2.0]).unwrap().ratio(), 1.0);
        assert!(Potential::diag_quadratic(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn bounds_reports() {
        let pts = sample_points(2, 50);
        let g = Potential::gaussian(2).unwrap().check_bounds(&pts);
        assert!(g.pass && g.min_eigenvalue == 1.0 && g.max_trace_over_n == 1.0);
        let d = Potential::diag_quadratic(&[1.0, 4.0]).unwrap().check_bounds(&pts);
        assert!(d.pass && d.min_eigenvalue == 1.0 && d.max_trace_over_n == 2.5);
        let lying = Potential::custom(2, Arc::new(QuarticPlusGaussian), 2.0, 2.0, true, None).unwrap();
        let r = lying.check_bounds(&[vec![0.0, 0.0]]);
        assert!(!r.pass);
        assert!(matches!(r.into_result(), Err(GzError::BoundViolation { .. })));
    }

    #[test]
    fn measure_spec_json() {
        let spec: MeasureSpec = serde_json::from_str(r#"{"kind": "diag_quadratic", "dim": 2, "c": [1, 4]}"#).unwrap();
        assert_eq!(spec.build().unwrap().k2(), 2.5);
        assert!(parse_measure("gaussian", 3, None).unwrap().is_gaussian());
        assert!(parse_measure("diag_quadratic", 3, Some(&[1.0, 2.0])).is_err());
        assert!(parse_measure("cauchy", 1, None).is_err());
    }

    fn potentials() -> Vec<Potential> {
        vec![
            Potential::gaussian(3).unwrap(),
            Potential::diag_quadratic(&[0.5, 2.0, 3.0]).unwrap(),
            Potential::custom(3, Arc::new(QuarticPlusGaussian), 1.0, 100.0, true, None).unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn gradient_matches_finite_differences(x in proptest::collection::vec(-2.0f64..2.0, 3)) {
            let h = 1e-5;
            for p in potentials() {
                let g = p.gradient(&x);
                let hess = p.hessian(&x);
                for i in 0..3 {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    let fd = (p.value(&xp) - p.value(&xm)) / (2.0 * h);
                    prop_assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1.0));
                    let (gp, gm) = (p.gradient(&xp), p.gradient(&xm));
                    for k in 0..3 {
                        let fd2 = (gp[k] - gm[k]) / (2.0 * h);
                        prop_assert!((fd2 - hess[(k, i)]).abs() <= 1e-6 * hess[(k, i)].abs().max(1.0));
                    }
                }
            }
        }

        #[test]
        fn even_potentials_are_even(x in proptest::collection::vec(-3.0f64..3.0, 3)) {
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            for p in potentials().into_iter().filter(Potential::is_even) {
                prop_assert!((p.value(&x) - p.value(&neg)).abs() < 1e-10);
                for (a, b) in p.gradient(&x).iter().zip(p.gradient(&neg)) {
                    prop_assert!((a + b).abs() < 1e-10);
                }
            }
        }
    }
}
