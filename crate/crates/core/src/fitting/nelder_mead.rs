//! Bounded Nelder–Mead simplex minimization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Box constraints; infinite entries are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(invalid("bounds", "lower and upper lengths differ"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u) || l.is_nan() || u.is_nan()) {
            return Err(invalid("bounds", "every lower bound must be <= its upper bound"));
        }
        Ok(Self { lower, upper })
    }

    pub fn unbounded(n: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    pub fn clip(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }

    /// Characteristic length per coordinate: the box width when finite.
    fn scale(&self, x0: &[f64]) -> Vec<f64> {
        x0.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(x, (l, u))| {
                let w = u - l;
                if w.is_finite() && w > 0.0 {
                    w
                } else {
                    x.abs().max(1.0)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub max_iterations: usize,
    /// Stop when the simplex diameter (in box-scaled units) falls below this.
    pub x_tol: f64,
    /// Stop when the spread of simplex values is below `f_tol_rel·|f| + f_tol_abs`.
    pub f_tol_rel: f64,
    pub f_tol_abs: f64,
    /// Initial simplex edge as a fraction of the coordinate scale.
    pub initial_step: f64,
    /// Seed for the perturbed restart simplex.
    pub seed: u64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            x_tol: 1e-10,
            f_tol_rel: 1e-15,
            f_tol_abs: 0.0,
            initial_step: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub f_initial: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// The best value never improved on the starting point.
    pub no_progress: bool,
    pub restarted: bool,
}

struct Run {
    x: Vec<f64>,
    f: f64,
    iterations: usize,
    evaluations: usize,
    converged: bool,
}

fn simplex_search<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    start: Vec<Vec<f64>>,
    bounds: &Bounds,
    scale: &[f64],
    opts: &MinimizeOptions,
    budget: usize,
) -> Run {
    let n = bounds.dim();
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut pts = start;
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evaluations)).collect();
    let mut iterations = 0;
    let mut converged = false;
    let mut order: Vec<usize> = (0..=n).collect();

    loop {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let best = order[0];
        let worst = order[n];
        let spread = vals[worst] - vals[best];
        let diameter = order[1..]
            .iter()
            .map(|&k| {
                pts[k]
                    .iter()
                    .zip(&pts[best])
                    .zip(scale)
                    .map(|((a, b), s)| ((a - b) / s).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= opts.f_tol_rel * vals[best].abs() + opts.f_tol_abs || diameter <= opts.x_tol {
            converged = true;
            break;
        }
        if iterations >= budget {
            break;
        }
        iterations += 1;

        let second_worst = order[n - 1];
        let mut centroid = vec![0.0; n];
        for &k in &order[..n] {
            for (c, v) in centroid.iter_mut().zip(&pts[k]) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&pts[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect();
            bounds.clip(&mut p);
            p
        };
        let xr = along(1.0);
        let fr = eval(&xr, &mut evaluations);
        if fr < vals[best] {
            let xe = along(2.0);
            let fe = eval(&xe, &mut evaluations);
            if fe < fr {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if fr < vals[second_worst] {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[worst] {
            let x = along(0.5);
            let v = eval(&x, &mut evaluations);
            (x, v)
        } else {
            let x = along(-0.5);
            let v = eval(&x, &mut evaluations);
            (x, v)
        };
        if fc < vals[worst].min(fr) {
            pts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        // Shrink towards the best vertex.
        let anchor = pts[best].clone();
        for &k in &order[1..] {
            for (v, a) in pts[k].iter_mut().zip(&anchor) {
                *v = a + 0.5 * (*v - a);
            }
            vals[k] = eval(&pts[k], &mut evaluations);
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    Run {
        x: pts[best].clone(),
        f: vals[best],
        iterations,
        evaluations,
        converged,
    }
}

fn initial_simplex(x0: &[f64], bounds: &Bounds, steps: &[f64]) -> Vec<Vec<f64>> {
    let mut pts = vec![x0.to_vec()];
    for (i, &step) in steps.iter().enumerate() {
        let mut p = x0.to_vec();
        p[i] += step;
        if p[i] > bounds.upper[i] {
            p[i] = x0[i] - step;
        }
        bounds.clip(&mut p);
        if p[i] == x0[i] {
            // Degenerate box: nudge inside whichever side has room.
            p[i] = if bounds.upper[i] > x0[i] {
                x0[i] + (bounds.upper[i] - x0[i]).min(step)
            } else {
                x0[i] - (x0[i] - bounds.lower[i]).min(step)
            };
        }
        pts.push(p);
    }
    pts
}

/// Minimize `objective` over the box starting at `x0`.
///
/// Trial points are clipped onto the box. When the first search stops,
/// a single restart from a randomly perturbed simplex around the best point
/// guards against premature collapse. The outcome is deterministic for a
/// given seed.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut objective: F,
    x0: &[f64],
    bounds: &Bounds,
    opts: &MinimizeOptions,
) -> Result<MinimizeOutcome> {
    let n = x0.len();
    if n == 0 {
        return Err(invalid("x0", "at least one free parameter is required"));
    }
    if bounds.dim() != n {
        return Err(invalid("bounds", format!("expected {n} entries, found {}", bounds.dim())));
    }
    if !bounds.contains(x0) {
        return Err(invalid("x0", "starting point lies outside the bounds"));
    }
    let scale = bounds.scale(x0);
    let f_initial = {
        let v = objective(x0);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let steps: Vec<f64> = scale.iter().map(|s| s * opts.initial_step).collect();
    let first = simplex_search(
        &mut objective,
        initial_simplex(x0, bounds, &steps),
        bounds,
        &scale,
        opts,
        opts.max_iterations,
    );
    let mut best = first;
    let mut restarted = false;
    let remaining = opts.max_iterations.saturating_sub(best.iterations);
    if remaining > 0 && best.f < f_initial {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let steps: Vec<f64> = scale
            .iter()
            .map(|s| s * opts.initial_step * 0.5 * rng.random_range(0.5..1.5))
            .collect();
        let second = simplex_search(
            &mut objective,
            initial_simplex(&best.x, bounds, &steps),
            bounds,
            &scale,
            opts,
            remaining,
        );
        restarted = true;
        let iterations = best.iterations + second.iterations;
        let evaluations = best.evaluations + second.evaluations;
        if second.f <= best.f {
            best = second;
        } else {
            best.converged = best.converged && second.converged;
        }
        best.iterations = iterations;
        best.evaluations = evaluations;
    }
    let (x, f) = if best.f <= f_initial {
        (best.x, best.f)
    } else {
        (x0.to_vec(), f_initial)
    };
    Ok(MinimizeOutcome {
        no_progress: !(f < f_initial),
        x,
        f,
        f_initial,
        iterations: best.iterations,
        evaluations: best.evaluations + 1,
        converged: best.converged,
        restarted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn rosenbrock_from_standard_start() {
        let b = Bounds::new(vec![-5.0, -5.0], vec![5.0, 5.0]).unwrap();
        let out = minimize(rosenbrock, &[-1.2, 1.0], &b, &MinimizeOptions::default()).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-4 && (out.x[1] - 1.0).abs() < 1e-4, "{:?}", out.x);
    }

    #[test]
    fn constant_objective_stops_immediately() {
        let b = Bounds::new(vec![0.0; 3], vec![1.0; 3]).unwrap();
        let out = minimize(|_| 4.0, &[0.5, 0.5, 0.5], &b, &MinimizeOptions::default()).unwrap();
        assert!(out.converged && out.no_progress);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.x, vec![0.5, 0.5, 0.5]);
    }

    #[test]
    fn respects_bounds() {
        let b = Bounds::new(vec![2.0, -1.0], vec![3.0, 1.0]).unwrap();
        let out = minimize(|x| x[0] * x[0] + x[1] * x[1], &[2.5, 0.5], &b, &MinimizeOptions::default()).unwrap();
        assert!(b.contains(&out.x));
        assert!((out.x[0] - 2.0).abs() < 1e-8 && out.x[1].abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_setup() {
        let b = Bounds::new(vec![0.0], vec![1.0]).unwrap();
        assert!(minimize(|x| x[0], &[2.0], &b, &MinimizeOptions::default()).is_err());
        assert!(minimize(|x| x[0], &[], &Bounds::unbounded(0), &MinimizeOptions::default()).is_err());
        assert!(Bounds::new(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn deterministic() {
        let b = Bounds::new(vec![-5.0, -5.0], vec![5.0, 5.0]).unwrap();
        let a = minimize(rosenbrock, &[-1.2, 1.0], &b, &MinimizeOptions::default()).unwrap();
        let c = minimize(rosenbrock, &[-1.2, 1.0], &b, &MinimizeOptions::default()).unwrap();
        assert_eq!(a, c);
    }

    proptest! {
        #[test]
        fn quadratic_bowl(x0 in -4.0..4.0f64, y0 in -4.0..4.0f64, cx in -2.0..2.0f64, cy in -2.0..2.0f64) {
            let b = Bounds::new(vec![-5.0, -5.0], vec![5.0, 5.0]).unwrap();
            let f = |x: &[f64]| (x[0] - cx).powi(2) + 3.0 * (x[1] - cy).powi(2);
            let out = minimize(f, &[x0, y0], &b, &MinimizeOptions::default()).unwrap();
            prop_assert!((out.x[0] - cx).abs() < 1e-8 && (out.x[1] - cy).abs() < 1e-8, "{:?}", out.x);
            prop_assert!(out.f <= out.f_initial);
        }
    }
}
