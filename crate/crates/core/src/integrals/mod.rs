//! Measures of convex bodies and moment integrals: seeded Monte Carlo,
//! radial quadrature in dimensions one and two, and closed forms.

mod mc;
pub mod quad;
mod radial;

use serde::{Deserialize, Serialize};
use libm::erf;
use std::f64::consts::SQRT_2;

use crate::bodies::{ConvexBody, Representation};
use crate::error::{input, Result};
use crate::measures::{Potential, PotentialKind};

pub use mc::{mc_moments, CHUNK_SIZE};
pub use radial::{radial_integral, RADIAL_ABS_TOL};

pub const DEFAULT_MC_BUDGET: u64 = 2_000_000;
pub const MIN_BUDGET: u64 = 100;

/// Integrand `x -> f(x)`.
pub type Integrand<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    Mc,
    RadialQuadrature,
    ClosedForm,
}

/// Requested integration method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mc,
    Radial,
    #[default]
    Auto,
}

impl std::str::FromStr for Method {
    type Err = crate::GzError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mc" => Ok(Self::Mc),
            "radial" => Ok(Self::Radial),
            "auto" => Ok(Self::Auto),
            _ => input(format!("unknown method {s:?}; expected mc, radial or auto")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub budget: u64,
    pub method: EstimateMethod,
}

impl Estimate {
    pub fn exact(value: f64, method: EstimateMethod, budget: u64) -> Self {
        Self { value, stderr: 0.0, budget, method }
    }

    pub fn is_deterministic(&self) -> bool {
        self.method != EstimateMethod::Mc
    }
}

/// Several integrals over the same body with the covariance of their estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointEstimate {
    pub values: Vec<f64>,
    /// Row-major covariance of the estimated values.
    pub covariance: Vec<f64>,
    pub budget: u64,
    pub method: EstimateMethod,
}

impl JointEstimate {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn stderr(&self, i: usize) -> f64 {
        self.covariance[i * self.len() + i].max(0.0).sqrt()
    }

    pub fn get(&self, i: usize) -> Estimate {
        Estimate { value: self.values[i], stderr: self.stderr(i), budget: self.budget, method: self.method }
    }

    /// Standard error of `g(values)` by the delta method with gradient `grad`.
    pub fn delta_stderr(&self, grad: &[f64]) -> f64 {
        let k = self.len();
        let mut var = 0.0;
        for i in 0..k {
            for j in 0..k {
                var += grad[i] * grad[j] * self.covariance[i * k + j];
            }
        }
        var.max(0.0).sqrt()
    }
}

/// Seed and stream of a counter-based generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngSpec {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    /// Independent child stream `k`.
    pub fn substream(&self, k: u64) -> Self {
        Self { seed: self.seed, stream: splitmix64(self.stream ^ splitmix64(k.wrapping_add(1))) }
    }

    pub(crate) fn key(&self) -> [u8; 32] {
        let mut key = [0u8; 32];
        let mut state = self.seed ^ splitmix64(self.stream);
        for chunk in key.chunks_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        key
    }
}

/// Ball standing in for the whole space: radius `max(12, 6 sqrt(n))`.
pub fn whole_space_proxy(dim: usize) -> ConvexBody {
    ConvexBody::ball(dim, whole_space_radius(dim)).expect("proxy radius is positive")
}

pub fn whole_space_radius(dim: usize) -> f64 {
    (6.0 * (dim as f64).sqrt()).max(12.0)
}

fn check_inputs(p: &Potential, k: &ConvexBody, budget: u64) -> Result<()> {
    if p.dim() != k.dim() {
        return input(format!("measure has dimension {}, body has dimension {}", p.dim(), k.dim()));
    }
    if budget < MIN_BUDGET {
        return input(format!("budget must be at least {MIN_BUDGET}, got {budget}"));
    }
    Ok(())
}

/// Gaussian mass of `[-a, b]` under the coefficient `c`.
fn interval_mass(c: f64, a: f64, b: f64) -> f64 {
    let s = c.sqrt() / SQRT_2;
    0.5 * (erf(b * s) + erf(a * s))
}

/// Closed form of `mu(K)` where one is implemented.
pub fn closed_form_mu(p: &Potential, k: &ConvexBody) -> Option<Estimate> {
    if p.dim() != k.dim() {
        return None;
    }
    let c = p.quadratic_coefficients()?;
    let value = match k.representation() {
        Representation::Box { half_widths } => {
            half_widths.iter().zip(&c).map(|(w, ci)| interval_mass(*ci, *w, *w)).product()
        }
        Representation::Ball { radius } if matches!(p.kind(), PotentialKind::Gaussian) => match k.dim() {
            1 => erf(radius / SQRT_2),
            2 => -(-radius * radius / 2.0).exp_m1(),
            _ => return None,
        },
        Representation::SupportGrid(g) if k.dim() == 1 => {
            let (a, b) = (g.values()[0], g.values()[1]);
            interval_mass(c[0], a, b)
        }
        Representation::HPolytope(h) if k.dim() == 1 => {
            let (lo, hi) = h.vertices().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v[0]), hi.max(v[0]))
            });
            interval_mass(c[0], -lo, hi)
        }
        _ => return None,
    };
    Some(Estimate::exact(value, EstimateMethod::ClosedForm, 1))
}

/// Whether radial quadrature applies to `K`.
pub fn radial_applicable(k: &ConvexBody) -> bool {
    k.dim() <= 2 && k.contains_origin()
}

/// `mu(K)`.
pub fn mu_of_body(p: &Potential, k: &ConvexBody, method: Method, budget: u64, rng: RngSpec) -> Result<Estimate> {
    check_inputs(p, k, budget)?;
    match method {
        Method::Auto => {
            if let Some(e) = closed_form_mu(p, k) {
                return Ok(e);
            }
            if radial_applicable(k) {
                return radial_integral(p, k, None);
            }
            Ok(mc_moments(p, k, &[&|_: &[f64]| 1.0], budget, rng)?.get(0))
        }
        Method::Radial => radial_integral(p, k, None),
        Method::Mc => Ok(mc_moments(p, k, &[&|_: &[f64]| 1.0], budget, rng)?.get(0)),
    }
}

/// `int_K f dmu`.
pub fn moment(
    p: &Potential,
    k: &ConvexBody,
    f: Integrand<'_>,
    method: Method,
    budget: u64,
    rng: RngSpec,
) -> Result<Estimate> {
    check_inputs(p, k, budget)?;
    match method {
        Method::Radial => radial_integral(p, k, Some(f)),
        Method::Auto if radial_applicable(k) => radial_integral(p, k, Some(f)),
        _ => Ok(mc_moments(p, k, &[f], budget, rng)?.get(0)),
    }
}

/// Several moments over one body. Monte Carlo shares samples so the
/// covariance is available; quadrature integrates each independently.
pub fn moments(
    p: &Potential,
    k: &ConvexBody,
    fs: &[Integrand<'_>],
    method: Method,
    budget: u64,
    rng: RngSpec,
) -> Result<JointEstimate> {
    check_inputs(p, k, budget)?;
    let use_radial = match method {
        Method::Radial => true,
        Method::Auto => radial_applicable(k),
        Method::Mc => false,
    };
    if !use_radial {
        return mc_moments(p, k, fs, budget, rng);
    }
    let mut values = Vec::with_capacity(fs.len());
    let mut evals = 0;
    for f in fs {
        let e = radial_integral(p, k, Some(*f))?;
        evals += e.budget;
        values.push(e.value);
    }
    let n = fs.len();
    Ok(JointEstimate { values, covariance: vec![0.0; n * n], budget: evals, method: EstimateMethod::RadialQuadrature })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::DirectionGrid;
    use std::sync::Arc;

    fn gauss(n: usize) -> Potential {
        Potential::gaussian(n).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let e = closed_form_mu(&gauss(2), &ConvexBody::ball(2, 1.0).unwrap()).unwrap();
        assert!((e.value - 0.393469).abs() < 5e-7);
        let e = closed_form_mu(&gauss(2), &ConvexBody::ball(2, 2.0).unwrap()).unwrap();
        assert!((e.value - 0.864665).abs() < 5e-7);
        let e = closed_form_mu(&gauss(1), &ConvexBody::ball(1, 1.0).unwrap()).unwrap();
        assert!((e.value - 0.682689).abs() < 5e-7);
        let e = closed_form_mu(&gauss(3), &ConvexBody::cuboid(&[1.0; 3]).unwrap()).unwrap();
        assert!((e.value - erf(1.0 / SQRT_2).powi(3)).abs() < 1e-15);
        assert!(closed_form_mu(&gauss(3), &ConvexBody::ball(3, 1.0).unwrap()).is_none());
        let i = ConvexBody::interval(1.0, 1.0).unwrap();
        assert!((closed_form_mu(&gauss(1), &i).unwrap().value - 0.682689).abs() < 5e-7);
    }

    #[test]
    fn radial_agrees_with_closed_forms() {
        let cases: Vec<(Potential, ConvexBody)> = vec![
            (gauss(2), ConvexBody::ball(2, 1.3).unwrap()),
            (gauss(2), ConvexBody::cuboid(&[0.7, 1.9]).unwrap()),
            (Potential::diag_quadratic(&[1.0, 4.0]).unwrap(), ConvexBody::cuboid(&[1.0, 0.5]).unwrap()),
            (gauss(1), ConvexBody::interval(0.5, 2.0).unwrap()),
            (Potential::diag_quadratic(&[3.0]).unwrap(), ConvexBody::cuboid(&[0.8]).unwrap()),
        ];
        for (p, k) in cases {
            let exact = closed_form_mu(&p, &k).unwrap().value;
            let rad = mu_of_body(&p, &k, Method::Radial, 720, RngSpec::new(0)).unwrap();
            assert_eq!(rad.stderr, 0.0);
            assert!((rad.value - exact).abs() < 1e-8, "{k:?}: {} vs {exact}", rad.value);
            let f = |_: &[f64]| 1.0;
            let generic = moment(&p, &k, &f, Method::Radial, 720, RngSpec::new(0)).unwrap();
            assert!((generic.value - exact).abs() < 1e-8);
        }
    }

    #[test]
    fn mc_agrees_with_closed_forms() {
        let cases: Vec<(Potential, ConvexBody)> = vec![
            (gauss(2), ConvexBody::ball(2, 1.0).unwrap()),
            (gauss(3), ConvexBody::cuboid(&[1.0, 0.5, 2.0]).unwrap()),
            (Potential::diag_quadratic(&[1.0, 4.0]).unwrap(), ConvexBody::cuboid(&[1.0, 0.5]).unwrap()),
        ];
        for (i, (p, k)) in cases.into_iter().enumerate() {
            let exact = closed_form_mu(&p, &k).unwrap().value;
            let e = mu_of_body(&p, &k, Method::Mc, 200_000, RngSpec::new(11 + i as u64)).unwrap();
            assert!(e.stderr > 0.0);
            assert!((e.value - exact).abs() < 4.0 * e.stderr, "{k:?}: {e:?} vs {exact}");
        }
    }

    #[test]
    fn gaussian_moments_on_proxy() {
        let p = gauss(2);
        let proxy = whole_space_proxy(2);
        let r2 = |x: &[f64]| x[0] * x[0] + x[1] * x[1];
        let r4 = |x: &[f64]| (x[0] * x[0] + x[1] * x[1]).powi(2);
        let e2 = moment(&p, &proxy, &r2, Method::Mc, 400_000, RngSpec::new(1)).unwrap();
        assert!((e2.value - 2.0).abs() < 3.0 * e2.stderr);
        let e4 = moment(&p, &proxy, &r4, Method::Mc, 400_000, RngSpec::new(2)).unwrap();
        assert!((e4.value - 8.0).abs() < 3.0 * e4.stderr);
        let q4 = moment(&p, &proxy, &r4, Method::Radial, 720, RngSpec::new(0)).unwrap();
        assert!((q4.value - 8.0).abs() < 1e-9);
    }

    #[test]
    fn estimates_are_bit_reproducible() {
        let p = gauss(2);
        let k = ConvexBody::square(1.0).unwrap();
        let a = mu_of_body(&p, &k, Method::Mc, 10_000, RngSpec::new(5)).unwrap();
        let b = mu_of_body(&p, &k, Method::Mc, 10_000, RngSpec::new(5)).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
        let c = mu_of_body(&p, &k, Method::Mc, 10_000, RngSpec::new(5).substream(1)).unwrap();
        assert_ne!(a.value, c.value);
    }

    #[test]
    fn input_errors() {
        let p = gauss(2);
        let k = ConvexBody::ball(2, 1.0).unwrap();
        assert!(mu_of_body(&p, &k, Method::Mc, 99, RngSpec::new(0)).is_err());
        assert!(mu_of_body(&gauss(3), &k, Method::Mc, 1000, RngSpec::new(0)).is_err());
        let shifted = ConvexBody::from_support_fn(Arc::new(DirectionGrid::circle(360).unwrap()), |u| 0.5 + 1.0 * u[0]).unwrap();
        assert!(matches!(
            mu_of_body(&p, &shifted, Method::Radial, 720, RngSpec::new(0)),
            Err(crate::GzError::Precondition(_))
        ));
        assert!(matches!(
            mu_of_body(&gauss(3), &ConvexBody::ball(3, 1.0).unwrap(), Method::Radial, 720, RngSpec::new(0)),
            Err(crate::GzError::Input(_))
        ));
    }

    #[test]
    fn substreams_differ() {
        let r = RngSpec::new(3);
        let s: std::collections::BTreeSet<u64> = (0..100).map(|k| r.substream(k).stream).collect();
        assert_eq!(s.len(), 100);
        assert_ne!(r.key(), r.substream(0).key());
    }
}
