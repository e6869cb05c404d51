//! L2-regularized multinomial logistic regression.
//!
//! Minimizes `mean cross-entropy + |W|^2 / (2 C n)` by gradient descent with
//! Armijo backtracking. Features are standardized with the training split's
//! mean and standard deviation; the intercepts are not penalized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::log_sum_exp;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    /// Inverse regularization strength.
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            c: 1.0,
            tol: 1e-6,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub num_classes: usize,
    pub dim: usize,
    mean: Vec<f64>,
    scale: Vec<f64>,
    /// `num_classes × dim`, then `num_classes` intercepts.
    params: Vec<f64>,
    pub iterations: usize,
}

struct Problem<'a> {
    x: &'a [f64],
    y: &'a [usize],
    n: usize,
    dim: usize,
    classes: usize,
    l2: f64,
}

impl Problem<'_> {
    fn logits(&self, params: &[f64], row: &[f64], out: &mut [f64]) {
        let (w, b) = params.split_at(self.classes * self.dim);
        for c in 0..self.classes {
            let wc = &w[c * self.dim..(c + 1) * self.dim];
            out[c] = b[c] + wc.iter().zip(row).map(|(a, x)| a * x).sum::<f64>();
        }
    }

    fn objective(&self, params: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let (d, k) = (self.dim, self.classes);
        let mut logits = vec![0.0; k];
        let mut loss = 0.0;
        let mut grad = grad;
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|x| *x = 0.0);
        }
        for i in 0..self.n {
            let row = &self.x[i * d..(i + 1) * d];
            self.logits(params, row, &mut logits);
            let lse = log_sum_exp(logits.iter().copied());
            loss += lse - logits[self.y[i]];
            if let Some(g) = grad.as_deref_mut() {
                for c in 0..k {
                    let r = (logits[c] - lse).exp() - if c == self.y[i] { 1.0 } else { 0.0 };
                    let gc = &mut g[c * d..(c + 1) * d];
                    for (gj, xj) in gc.iter_mut().zip(row) {
                        *gj += r * xj;
                    }
                    g[k * d + c] += r;
                }
            }
        }
        let inv_n = 1.0 / self.n as f64;
        let w = &params[..k * d];
        let penalty = 0.5 * self.l2 * w.iter().map(|x| x * x).sum::<f64>();
        if let Some(g) = grad {
            for (j, gj) in g.iter_mut().enumerate() {
                *gj *= inv_n;
                if j < k * d {
                    *gj += self.l2 * params[j];
                }
            }
        }
        loss * inv_n + penalty
    }
}

impl LogisticModel {
    /// Fits on row-major `x` (`y.len()` rows of `dim` features).
    pub fn fit(
        x: &[f64],
        dim: usize,
        y: &[usize],
        num_classes: usize,
        cfg: &LogisticConfig,
    ) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        assert_eq!(x.len(), n * dim, "feature matrix shape");
        if !(cfg.c > 0.0) {
            return Err(Error::Config("regularization C must be positive".into()));
        }
        if y.iter().any(|&c| c >= num_classes) {
            return Err(Error::Invalid("class id out of range".into()));
        }
        let mut mean = vec![0.0; dim];
        for row in x.chunks_exact(dim.max(1)).take(n) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut scale = vec![0.0; dim];
        for row in x.chunks_exact(dim.max(1)).take(n) {
            for ((s, v), m) in scale.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut scale {
            let sd = (*s / n as f64).sqrt();
            *s = if sd > 1e-12 { 1.0 / sd } else { 1.0 };
        }
        let xs: Vec<f64> = x
            .chunks_exact(dim.max(1))
            .take(n)
            .flat_map(|row| {
                row.iter()
                    .zip(&mean)
                    .zip(&scale)
                    .map(|((v, m), s)| (v - m) * s)
            })
            .collect();
        let problem = Problem {
            x: &xs,
            y,
            n,
            dim,
            classes: num_classes,
            l2: 1.0 / (cfg.c * n as f64),
        };

        let len = num_classes * dim + num_classes;
        let mut params = vec![0.0; len];
        let mut grad = vec![0.0; len];
        let mut trial = vec![0.0; len];
        let mut f = problem.objective(&params, Some(&mut grad));
        let mut step = 1.0;
        let mut iterations = 0;
        for it in 0..cfg.max_iter {
            iterations = it + 1;
            let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
            if gnorm2.sqrt() < cfg.tol {
                break;
            }
            let f_new = loop {
                for ((t, p), g) in trial.iter_mut().zip(&params).zip(&grad) {
                    *t = p - step * g;
                }
                let f_t = problem.objective(&trial, None);
                if f_t <= f - 0.5 * step * gnorm2 || step < 1e-12 {
                    break f_t;
                }
                step *= 0.5;
            };
            std::mem::swap(&mut params, &mut trial);
            let converged = (f - f_new).abs() <= cfg.tol * f.abs().max(1.0);
            f = problem.objective(&params, Some(&mut grad));
            step *= 2.0;
            if converged {
                break;
            }
        }
        Ok(LogisticModel {
            num_classes,
            dim,
            mean,
            scale,
            params,
            iterations,
        })
    }

    /// Class probabilities for one raw feature row.
    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        assert_eq!(row.len(), self.dim);
        let xs: Vec<f64> = row
            .iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) * s)
            .collect();
        let (w, b) = self.params.split_at(self.num_classes * self.dim);
        let logits: Vec<f64> = (0..self.num_classes)
            .map(|c| {
                b[c] + w[c * self.dim..(c + 1) * self.dim]
                    .iter()
                    .zip(&xs)
                    .map(|(a, x)| a * x)
                    .sum::<f64>()
            })
            .collect();
        let lse = log_sum_exp(logits.iter().copied());
        logits.iter().map(|l| (l - lse).exp()).collect()
    }

    /// Argmax class; ties go to the lower index.
    pub fn predict(&self, row: &[f64]) -> usize {
        let p = self.predict_proba(row);
        (0..p.len()).fold(0, |best, c| if p[c] > p[best] { c } else { best })
    }
}
