use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

/// Default number of angles on the circle.
pub const DEFAULT_CIRCLE_SIZE: usize = 720;
/// Default number of quasi-uniform directions on the 2-sphere.
pub const DEFAULT_SPHERE_SIZE: usize = 2048;
/// Default number of random directions in dimension four and up.
pub const DEFAULT_HIGH_DIM_SIZE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// The two directions of the real line.
    Interval,
    /// Uniformly spaced angles `2 pi j / m`.
    Circle,
    /// Antipodal Fibonacci lattice on the 2-sphere.
    Fibonacci,
    /// Seeded Gaussian directions, closed under negation.
    Random { seed: u64 },
}

/// A finite set of unit directions on which support functions are tabulated.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionGrid {
    dim: usize,
    kind: GridKind,
    dirs: Vec<f64>,
    antipode: Option<Vec<usize>>,
}

impl DirectionGrid {
    /// `{-1, +1}`, in that order.
    pub fn interval() -> Self {
        Self {
            dim: 1,
            kind: GridKind::Interval,
            dirs: vec![-1.0, 1.0],
            antipode: Some(vec![1, 0]),
        }
    }

    pub fn circle(m: usize) -> Result<Self> {
        if m < 8 {
            return input(format!("circle grid needs at least 8 angles, got {m}"));
        }
        let step = 2.0 * PI / m as f64;
        let dirs = (0..m)
            .flat_map(|j| {
                let t = j as f64 * step;
                [t.cos(), t.sin()]
            })
            .collect();
        let antipode = m.is_multiple_of(2).then(|| (0..m).map(|j| (j + m / 2) % m).collect());
        Ok(Self { dim: 2, kind: GridKind::Circle, dirs, antipode })
    }

    /// Antipodally symmetric Fibonacci lattice: `m / 2` points on the upper
    /// hemisphere followed by their negatives.
    pub fn fibonacci_sphere(m: usize) -> Result<Self> {
        if m < 8 || !m.is_multiple_of(2) {
            return input(format!("sphere grid needs an even size >= 8, got {m}"));
        }
        let half = m / 2;
        let golden = PI * (3.0 - 5f64.sqrt());
        let mut dirs = Vec::with_capacity(3 * m);
        for i in 0..half {
            let z = 1.0 - (i as f64 + 0.5) / half as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = i as f64 * golden;
            dirs.extend_from_slice(&[r * phi.cos(), r * phi.sin(), z]);
        }
        let upper = dirs.clone();
        dirs.extend(upper.iter().map(|v| -v));
        let antipode = (0..m).map(|j| (j + half) % m).collect();
        Ok(Self { dim: 3, kind: GridKind::Fibonacci, dirs, antipode: Some(antipode) })
    }

    /// Seeded random directions (half drawn, half negated).
    pub fn random(dim: usize, m: usize, seed: u64) -> Result<Self> {
        if dim == 0 || m < 2 || !m.is_multiple_of(2) {
            return input(format!("random grid needs dim >= 1 and an even size, got dim {dim}, size {m}"));
        }
        let half = m / 2;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dirs = Vec::with_capacity(dim * m);
        while dirs.len() < dim * half {
            let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-8 {
                dirs.extend(v.iter().map(|x| x / norm));
            }
        }
        let upper = dirs.clone();
        dirs.extend(upper.iter().map(|v| -v));
        let antipode = (0..m).map(|j| (j + half) % m).collect();
        Ok(Self { dim, kind: GridKind::Random { seed }, dirs, antipode: Some(antipode) })
    }

    /// Grid used when a body has to be tabulated and nothing else is prescribed.
    pub fn default_for(dim: usize) -> Result<Self> {
        match dim {
            0 => input("dimension must be at least 1"),
            1 => Ok(Self::interval()),
            2 => Self::circle(DEFAULT_CIRCLE_SIZE),
            3 => Self::fibonacci_sphere(DEFAULT_SPHERE_SIZE),
            n => Self::random(n, DEFAULT_HIGH_DIM_SIZE, 0),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.dirs.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn direction(&self, j: usize) -> &[f64] {
        &self.dirs[j * self.dim..(j + 1) * self.dim]
    }

    pub fn directions(&self) -> impl Iterator<Item = &[f64]> {
        self.dirs.chunks_exact(self.dim)
    }

    /// Index of `-u_j`, when the grid is closed under negation.
    pub fn antipode(&self, j: usize) -> Option<usize> {
        self.antipode.as_ref().map(|a| a[j])
    }

    pub fn is_symmetric(&self) -> bool {
        self.antipode.is_some()
    }

    /// Angular step of a circle grid.
    pub fn step(&self) -> Option<f64> {
        (self.kind == GridKind::Circle).then(|| 2.0 * PI / self.len() as f64)
    }

    /// Angle of node `j` on a circle grid.
    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_unit_and_antipodal(g: &DirectionGrid) {
        for (j, u) in g.directions().enumerate() {
            let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12, "direction {j} has norm {norm}");
            let k = g.antipode(j).unwrap();
            for (a, b) in u.iter().zip(g.direction(k)) {
                assert!((a + b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grids_are_unit_and_closed_under_negation() {
        check_unit_and_antipodal(&DirectionGrid::interval());
        check_unit_and_antipodal(&DirectionGrid::circle(720).unwrap());
        check_unit_and_antipodal(&DirectionGrid::fibonacci_sphere(2048).unwrap());
        check_unit_and_antipodal(&DirectionGrid::random(5, 64, 3).unwrap());
    }

    #[test]
    fn odd_circle_has_no_antipodes() {
        let g = DirectionGrid::circle(9).unwrap();
        assert!(!g.is_symmetric());
    }

    #[test]
    fn random_grid_is_reproducible() {
        assert_eq!(DirectionGrid::random(4, 32, 9).unwrap(), DirectionGrid::random(4, 32, 9).unwrap());
        assert_ne!(DirectionGrid::random(4, 32, 9).unwrap(), DirectionGrid::random(4, 32, 10).unwrap());
    }
}
