//! Seeded Monte Carlo over standard Gaussian samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use super::{EstimateMethod, Integrand, JointEstimate, RngSpec};
use crate::bodies::ConvexBody;
use crate::error::{input, Result};
use crate::measures::{Potential, PotentialKind};

/// Samples per chunk. Chunk `i` draws from stream `i` of the generator
/// keyed by the [`RngSpec`], and chunk sums are reduced in index order,
/// so results do not depend on the number of worker threads.
pub const CHUNK_SIZE: u64 = 4096;

enum Sampler {
    /// `x = z`, weight one.
    Gaussian,
    /// `x = z / sqrt(c)`: exact draws from the normalized measure.
    Scaled(Vec<f64>),
    /// `x = z`, weight `e^{-V(z) + |z|^2/2} (2 pi)^{n/2} / Z`.
    Importance(f64),
}

impl Sampler {
    fn new(p: &Potential) -> Self {
        match p.kind() {
            PotentialKind::Gaussian => Self::Gaussian,
            PotentialKind::DiagQuadratic(c) => Self::Scaled(c.iter().map(|v| 1.0 / v.sqrt()).collect()),
            PotentialKind::Custom(_) => {
                Self::Importance(0.5 * p.dim() as f64 * (2.0 * PI).ln() - p.ln_normalizer().unwrap_or(0.0))
            }
        }
    }

    /// Maps `z` to `x` in place and returns the weight.
    fn map(&self, p: &Potential, z: &mut [f64]) -> f64 {
        match self {
            Self::Gaussian => 1.0,
            Self::Scaled(s) => {
                for (v, s) in z.iter_mut().zip(s) {
                    *v *= s;
                }
                1.0
            }
            Self::Importance(shift) => {
                let half_norm2 = 0.5 * z.iter().map(|v| v * v).sum::<f64>();
                (-p.value(z) + half_norm2 + shift).exp()
            }
        }
    }
}

fn chunk_sums(
    p: &Potential,
    body: &ConvexBody,
    fs: &[Integrand<'_>],
    sampler: &Sampler,
    rng: &RngSpec,
    chunk: u64,
    count: u64,
) -> Vec<f64> {
    let k = fs.len();
    let mut gen = ChaCha8Rng::from_seed(rng.key());
    gen.set_stream(chunk);
    let mut sums = vec![0.0; k + k * k];
    let mut x = vec![0.0; p.dim()];
    let mut y = vec![0.0; k];
    for _ in 0..count {
        for v in x.iter_mut() {
            *v = gen.sample(StandardNormal);
        }
        let w = sampler.map(p, &mut x);
        if w == 0.0 || !body.contains(&x) {
            continue;
        }
        for (yi, f) in y.iter_mut().zip(fs) {
            *yi = w * f(&x);
        }
        for i in 0..k {
            sums[i] += y[i];
            for j in i..k {
                sums[k + i * k + j] += y[i] * y[j];
            }
        }
    }
    sums
}

/// Estimates `int_K f_i dmu` for every integrand from one sample set.
pub fn mc_moments(
    p: &Potential,
    body: &ConvexBody,
    fs: &[Integrand<'_>],
    budget: u64,
    rng: RngSpec,
) -> Result<JointEstimate> {
    if budget < super::MIN_BUDGET {
        return input(format!("budget must be at least {}, got {budget}", super::MIN_BUDGET));
    }
    let k = fs.len();
    let sampler = Sampler::new(p);
    let chunks = budget.div_ceil(CHUNK_SIZE);
    let count = |c: u64| CHUNK_SIZE.min(budget - c * CHUNK_SIZE);
    let run = |c: u64| chunk_sums(p, body, fs, &sampler, &rng, c, count(c));

    #[cfg(feature = "parallel")]
    let partial: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partial: Vec<Vec<f64>> = (0..chunks).map(run).collect();

    let mut total = vec![0.0; k + k * k];
    for s in &partial {
        for (t, v) in total.iter_mut().zip(s) {
            *t += v;
        }
    }
    let n = budget as f64;
    let values: Vec<f64> = total[..k].iter().map(|s| s / n).collect();
    let mut covariance = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let c = (total[k + i * k + j] - n * values[i] * values[j]) / (n - 1.0) / n;
            covariance[i * k + j] = c;
            covariance[j * k + i] = c;
        }
    }
    Ok(JointEstimate { values, covariance, budget, method: EstimateMethod::Mc })
}
