//! Bounded Nelder-Mead on the unit cube.

/// Trace entry for one objective evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub evaluation: usize,
    pub value: f64,
    pub best: f64,
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub trace: Vec<Step>,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub max_evals: usize,
    pub initial_step: f64,
    pub f_tol: f64,
    pub x_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { max_evals: 300, initial_step: 0.15, f_tol: 1e-12, x_tol: 1e-9 }
    }
}

fn clamp01(x: &mut [f64]) {
    for v in x {
        *v = v.clamp(0.0, 1.0);
    }
}

impl NelderMead {
    /// Minimizes `f` over `[0, 1]^d` from `start`. Trial points are clamped
    /// into the cube; non-finite values count as `+inf`.
    pub fn minimize(&self, start: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> Minimum {
        let d = start.len();
        let mut trace = Vec::new();
        let mut best = f64::INFINITY;
        let mut evals = 0usize;
        let mut eval = |x: &[f64], trace: &mut Vec<Step>| {
            let v = f(x);
            let v = if v.is_finite() { v } else { f64::INFINITY };
            evals += 1;
            best = best.min(v);
            trace.push(Step { evaluation: evals, value: v, best });
            v
        };

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
        let mut x0 = start.to_vec();
        clamp01(&mut x0);
        simplex.push(x0.clone());
        for i in 0..d {
            let mut x = x0.clone();
            x[i] += if x[i] + self.initial_step <= 1.0 { self.initial_step } else { -self.initial_step };
            simplex.push(x);
        }
        let mut values: Vec<f64> = Vec::with_capacity(d + 1);
        for x in &simplex {
            if values.len() >= self.max_evals.max(1) {
                values.push(f64::INFINITY);
                continue;
            }
            values.push(eval(x, &mut trace));
        }

        while trace.len() < self.max_evals {
            let mut order: Vec<usize> = (0..=d).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let spread = values[d] - values[0];
            let size = simplex[1..]
                .iter()
                .map(|x| x.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if (spread.is_finite() && spread <= self.f_tol) || size <= self.x_tol {
                break;
            }

            let centroid: Vec<f64> =
                (0..d).map(|k| simplex[..d].iter().map(|x| x[k]).sum::<f64>() / d as f64).collect();
            let along = |t: f64| {
                let mut x: Vec<f64> = centroid.iter().zip(&simplex[d]).map(|(c, w)| c + t * (c - w)).collect();
                clamp01(&mut x);
                x
            };

            let xr = along(1.0);
            let fr = eval(&xr, &mut trace);
            if fr < values[0] {
                let xe = along(2.0);
                let fe = if trace.len() < self.max_evals { eval(&xe, &mut trace) } else { f64::INFINITY };
                if fe < fr {
                    simplex[d] = xe;
                    values[d] = fe;
                } else {
                    simplex[d] = xr;
                    values[d] = fr;
                }
                continue;
            }
            if fr < values[d - 1] {
                simplex[d] = xr;
                values[d] = fr;
                continue;
            }
            if trace.len() >= self.max_evals {
                break;
            }
            let (xc, fc) = if fr < values[d] {
                let xc = along(0.5);
                let fc = eval(&xc, &mut trace);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = eval(&xc, &mut trace);
                (xc, fc)
            };
            if fc < values[d].min(fr) {
                simplex[d] = xc;
                values[d] = fc;
                continue;
            }
            // shrink towards the best vertex
            for i in 1..=d {
                if trace.len() >= self.max_evals {
                    break;
                }
                let x: Vec<f64> = simplex[0].iter().zip(&simplex[i]).map(|(b, v)| b + 0.5 * (v - b)).collect();
                values[i] = eval(&x, &mut trace);
                simplex[i] = x;
            }
        }

        let i = (0..values.len()).min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b))).unwrap_or(0);
        Minimum { x: simplex[i].clone(), value: values[i], evaluations: trace.len(), trace }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_minimum() {
        let nm = NelderMead { max_evals: 2000, ..Default::default() };
        let m = nm.minimize(&[0.9, 0.1, 0.5], |x| {
            (x[0] - 0.3).powi(2) + 10.0 * (x[1] - 0.7).powi(2) + (x[2] - 0.5).powi(4)
        });
        assert!((m.x[0] - 0.3).abs() < 1e-4 && (m.x[1] - 0.7).abs() < 1e-4, "{:?}", m.x);
        assert!(m.evaluations <= 2000);
    }

    #[test]
    fn respects_bounds_and_budget() {
        let nm = NelderMead { max_evals: 50, ..Default::default() };
        let m = nm.minimize(&[0.5, 0.5], |x| {
            assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
            -x[0] - x[1]
        });
        assert!(m.evaluations <= 50);
        assert!(m.value <= -1.5);
        assert_eq!(m.trace.len(), m.evaluations);
    }

    #[test]
    fn tolerates_infinite_values() {
        let nm = NelderMead { max_evals: 300, ..Default::default() };
        let m = nm.minimize(&[0.2], |x| if x[0] > 0.6 { f64::NAN } else { (x[0] - 0.5).powi(2) });
        assert!((m.x[0] - 0.5).abs() < 1e-3);
    }
}
