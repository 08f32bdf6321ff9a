//! L2-regularized linear SVM with squared hinge loss.
//!
//! The objective
//!
//! ```text
//! J(w, b) = lambda/2 |w|^2 + 1/n sum_i max(0, 1 - y_i (w.x_i + b))^2
//! ```
//!
//! is convex and piecewise quadratic. It is minimized with generalized
//! Newton steps (Hessian restricted to margin-violating samples) and an
//! Armijo backtracking line search, so `J` never increases between
//! iterations. The bias is not regularized.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub lambda: f64,
    /// Maximum number of optimizer iterations.
    pub epochs: usize,
    /// Stop once the gradient norm falls below this.
    pub tolerance: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            lambda: 1e-3,
            epochs: 200,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmFit {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Objective value before the first step and after every iteration.
    pub objective: Vec<f64>,
    pub accuracy: f64,
}

fn objective(x: &[Vec<f64>], y: &[f64], w: &DVector<f64>, b: f64, lambda: f64) -> f64 {
    let n = x.len() as f64;
    let loss: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, &yi)| {
            let m = 1.0 - yi * (dot(xi, w) + b);
            if m > 0.0 {
                m * m
            } else {
                0.0
            }
        })
        .sum();
    0.5 * lambda * w.norm_squared() + loss / n
}

fn dot(x: &[f64], w: &DVector<f64>) -> f64 {
    x.iter().zip(w.iter()).map(|(a, b)| a * b).sum()
}

/// Fits on rows `x` with labels `y` in {-1, +1}.
pub fn fit(x: &[Vec<f64>], y: &[f64], cfg: &SvmConfig) -> Result<SvmFit> {
    if x.len() < 2 {
        return Err(invalid_arg!("need at least 2 samples, got {}", x.len()));
    }
    if !(cfg.lambda > 0.0) {
        return Err(invalid_arg!("lambda must be positive"));
    }
    let d = x[0].len();
    if x.iter().any(|r| r.len() != d) || y.len() != x.len() {
        return Err(invalid_arg!("ragged training matrix"));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(invalid_arg!("non-finite feature value in training samples"));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(invalid_arg!("labels must be +1 or -1"));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(invalid_arg!("training samples contain a single class"));
    }

    let n = x.len() as f64;
    let mut w = DVector::<f64>::zeros(d);
    let mut b = 0.0;
    let mut obj = objective(x, y, &w, b, cfg.lambda);
    let mut history = vec![obj];

    for _ in 0..cfg.epochs {
        // gradient and generalized Hessian over violators, bias last
        let mut g = DVector::<f64>::zeros(d + 1);
        let mut hess = DMatrix::<f64>::zeros(d + 1, d + 1);
        for (xi, &yi) in x.iter().zip(y) {
            let m = 1.0 - yi * (dot(xi, &w) + b);
            if m <= 0.0 {
                continue;
            }
            for j in 0..d {
                g[j] -= 2.0 * m * yi * xi[j] / n;
            }
            g[d] -= 2.0 * m * yi / n;
            for j in 0..=d {
                let xj = if j < d { xi[j] } else { 1.0 };
                for k in j..=d {
                    let xk = if k < d { xi[k] } else { 1.0 };
                    hess[(j, k)] += 2.0 * xj * xk / n;
                }
            }
        }
        for j in 0..d {
            g[j] += cfg.lambda * w[j];
            hess[(j, j)] += cfg.lambda;
        }
        hess[(d, d)] += 1e-12;
        for j in 0..=d {
            for k in 0..j {
                hess[(j, k)] = hess[(k, j)];
            }
        }
        if g.norm() < cfg.tolerance {
            break;
        }
        let step = match hess.clone().cholesky() {
            Some(c) => -c.solve(&g),
            None => -g.clone(),
        };
        let slope = g.dot(&step);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..50 {
            let w_new = &w + step.rows(0, d) * t;
            let b_new = b + step[d] * t;
            let o = objective(x, y, &w_new, b_new, cfg.lambda);
            if o <= obj + 1e-4 * t * slope {
                w = w_new;
                b = b_new;
                obj = o;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        history.push(obj);
        if !accepted {
            break;
        }
    }

    let correct = x
        .iter()
        .zip(y)
        .filter(|(xi, &yi)| (dot(xi, &w) + b) * yi > 0.0)
        .count();
    Ok(SvmFit {
        weights: w.iter().copied().collect(),
        bias: b,
        objective: history,
        accuracy: correct as f64 / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng;

    // Box-Muller
    fn normal(rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
        let v: f64 = rng.random();
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    }

    #[test]
    fn separable_points_are_all_classified() {
        let mut rng = seed::rng_from(3);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..200 {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            let s = a + 2.0 * b - 0.3;
            if s.abs() < 0.05 {
                continue;
            }
            x.push(vec![a, b]);
            y.push(s.signum());
        }
        let fit = fit(&x, &y, &SvmConfig::default()).unwrap();
        assert!(fit.accuracy >= 0.99, "{}", fit.accuracy);
    }

    #[test]
    fn planted_direction_is_recovered() {
        let mut rng = seed::rng_from(8);
        let d = 6;
        let w_star: Vec<f64> = (0..d).map(|_| normal(&mut rng)).collect();
        let x: Vec<Vec<f64>> = (0..600).map(|_| (0..d).map(|_| normal(&mut rng)).collect()).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|r| if r.iter().zip(&w_star).map(|(a, b)| a * b).sum::<f64>() >= 0.0 { 1.0 } else { -1.0 })
            .collect();
        let fit = fit(&x, &y, &SvmConfig::default()).unwrap();
        let dotp: f64 = fit.weights.iter().zip(&w_star).map(|(a, b)| a * b).sum();
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let cos = dotp / (norm(&fit.weights) * norm(&w_star));
        assert!(cos >= 0.95, "cosine {cos}");
    }

    #[test]
    fn objective_never_increases() {
        let mut rng = seed::rng_from(21);
        let x: Vec<Vec<f64>> = (0..300).map(|_| (0..4).map(|_| normal(&mut rng)).collect()).collect();
        // noisy labels so many samples stay inside the margin
        let y: Vec<f64> = x
            .iter()
            .map(|r| if r[0] - r[2] + 0.8 * normal(&mut rng) > 0.0 { 1.0 } else { -1.0 })
            .collect();
        let fit = fit(&x, &y, &SvmConfig::default()).unwrap();
        assert!(fit.objective.len() >= 2);
        for p in fit.objective.windows(2) {
            assert!(p[1] <= p[0], "{} -> {}", p[0], p[1]);
        }
    }

    #[test]
    fn duplicating_the_data_keeps_the_solution() {
        let mut rng = seed::rng_from(5);
        let x: Vec<Vec<f64>> = (0..120).map(|_| (0..3).map(|_| normal(&mut rng)).collect()).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|r| if r[1] + 0.5 * normal(&mut rng) > 0.0 { 1.0 } else { -1.0 })
            .collect();
        let a = fit(&x, &y, &SvmConfig::default()).unwrap();
        let x2: Vec<Vec<f64>> = x.iter().flat_map(|r| [r.clone(), r.clone()]).collect();
        let y2: Vec<f64> = y.iter().flat_map(|&v| [v, v]).collect();
        let b = fit(&x2, &y2, &SvmConfig::default()).unwrap();
        for r in &x {
            let f = |m: &SvmFit| r.iter().zip(&m.weights).map(|(p, q)| p * q).sum::<f64>() + m.bias;
            assert!((f(&a) - f(&b)).abs() < 1e-6);
        }
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let cfg = SvmConfig::default();
        assert!(fit(&[vec![1.0], vec![2.0]], &[1.0, 1.0], &cfg).is_err());
        assert!(fit(&[vec![1.0]], &[1.0], &cfg).is_err());
        assert!(fit(&[vec![f64::NAN], vec![2.0]], &[1.0, -1.0], &cfg).is_err());
        assert!(fit(&[vec![1.0], vec![2.0]], &[1.0, 0.0], &cfg).is_err());
    }
}
