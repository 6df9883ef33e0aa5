//! Damped least-squares fit of the logistic density
//!
//! ```text
//! P(s) = (A1 - A2) / (1 + (s / S0)^p) + A2
//! ```
//!
//! to histogram bin centers. The reduced form pins `A2 = 0`. `S0` and `p` are
//! optimized in log space, which keeps them positive without constraints.

use serde::{Deserialize, Serialize};

use super::Histogram;
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "A2")]
    pub a2: f64,
    #[serde(rename = "S0")]
    pub s0: f64,
    pub p: f64,
    pub r_squared: f64,
    pub chi_squared: f64,
    pub iterations: usize,
    pub full_form: bool,
}

impl LogisticFit {
    /// Amplitude of the reduced form, `A / (1 + (s/S0)^p)`.
    pub fn amplitude(&self) -> f64 {
        self.a1 - self.a2
    }

    pub fn eval(&self, s: f64) -> f64 {
        logistic(self.a1, self.a2, self.s0, self.p, s)
    }
}

pub fn logistic(a1: f64, a2: f64, s0: f64, p: f64, s: f64) -> f64 {
    let q = (s.max(0.0) / s0).powf(p);
    (a1 - a2) / (1.0 + q) + a2
}

struct Problem<'a> {
    x: &'a [f64],
    y: &'a [f64],
    full: bool,
}

impl Problem<'_> {
    fn dim(&self) -> usize {
        if self.full {
            4
        } else {
            3
        }
    }

    /// `(a1, a2, s0, p)` from the optimization vector.
    fn unpack(&self, theta: &[f64]) -> (f64, f64, f64, f64) {
        if self.full {
            (theta[0], theta[1], theta[2].exp(), theta[3].exp())
        } else {
            (theta[0], 0.0, theta[1].exp(), theta[2].exp())
        }
    }

    fn ssr(&self, theta: &[f64]) -> f64 {
        let (a1, a2, s0, p) = self.unpack(theta);
        self.x
            .iter()
            .zip(self.y)
            .map(|(&x, &y)| {
                let r = y - logistic(a1, a2, s0, p, x);
                r * r
            })
            .sum()
    }

    /// Residuals and Jacobian rows of the model with respect to `theta`.
    fn linearize(&self, theta: &[f64], residuals: &mut Vec<f64>, jac: &mut Vec<[f64; 4]>) {
        let (a1, a2, s0, p) = self.unpack(theta);
        residuals.clear();
        jac.clear();
        for (&x, &y) in self.x.iter().zip(self.y) {
            let x = x.max(0.0);
            let q = (x / s0).powf(p);
            let inv = 1.0 / (1.0 + q);
            let f = (a1 - a2) * inv + a2;
            residuals.push(y - f);
            let df_dq = -(a1 - a2) * inv * inv;
            let d_log_s0 = df_dq * (-p * q);
            let d_log_p = if x > 0.0 {
                df_dq * q * p * (x / s0).ln()
            } else {
                0.0
            };
            jac.push(if self.full {
                [inv, 1.0 - inv, d_log_s0, d_log_p]
            } else {
                [inv, d_log_s0, d_log_p, 0.0]
            });
        }
    }
}

/// Solves the small dense system `a · x = b` by Gaussian elimination with
/// partial pivoting. Returns `None` when singular.
fn solve(mut a: [[f64; 4]; 4], mut b: [f64; 4], n: usize) -> Option<[f64; 4]> {
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

/// Fits the logistic density to `(x, y)` samples.
pub fn fit_logistic_points(x: &[f64], y: &[f64], full_form: bool) -> Result<LogisticFit> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let required = if full_form { 4 } else { 3 };
    let populated = y.iter().filter(|&&v| v > 0.0).count();
    if populated < required {
        return Err(Error::InsufficientBins {
            populated,
            required,
        });
    }

    let problem = Problem {
        x,
        y,
        full: full_form,
    };
    let n = problem.dim();
    let y_max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let y_min = y.iter().copied().fold(f64::INFINITY, f64::min);
    let s0_guess = median(x).max(f64::MIN_POSITIVE);
    let mut theta = if full_form {
        vec![y_max, y_min, s0_guess.ln(), 0.0]
    } else {
        vec![y_max, s0_guess.ln(), 0.0]
    };

    let mut ssr = problem.ssr(&theta);
    let mut lambda = 1e-3;
    let mut residuals = Vec::with_capacity(x.len());
    let mut jac = Vec::with_capacity(x.len());
    let mut converged = ssr == 0.0;
    let mut iterations = 0;

    while !converged && iterations < MAX_ITERATIONS {
        iterations += 1;
        problem.linearize(&theta, &mut residuals, &mut jac);
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        for (row, &r) in jac.iter().zip(&residuals) {
            for i in 0..n {
                jtr[i] += row[i] * r;
                for j in 0..n {
                    jtj[i][j] += row[i] * row[j];
                }
            }
        }
        let gradient_norm = jtr[..n].iter().map(|g| g.abs()).fold(0.0, f64::max);
        if gradient_norm < 1e-300 {
            converged = true;
            break;
        }

        // Raise damping until a step lowers the residual or damping saturates.
        loop {
            let mut damped = jtj;
            for i in 0..n {
                damped[i][i] += lambda * jtj[i][i].max(1e-12);
            }
            let step = solve(damped, jtr, n);
            if let Some(step) = step {
                let candidate: Vec<f64> = theta.iter().zip(&step).map(|(t, d)| t + d).collect();
                let new_ssr = problem.ssr(&candidate);
                if new_ssr.is_finite() && new_ssr <= ssr {
                    let small_step = step[..n]
                        .iter()
                        .zip(&theta)
                        .all(|(d, t)| d.abs() <= 1e-12 * (t.abs() + 1e-12));
                    let small_gain = ssr - new_ssr <= 1e-15 * ssr;
                    theta = candidate;
                    ssr = new_ssr;
                    lambda = (lambda / 10.0).max(1e-15);
                    converged = small_step || small_gain || ssr == 0.0;
                    break;
                }
            }
            lambda *= 10.0;
            if lambda > 1e16 {
                // No descent direction left: a stationary point.
                converged = true;
                break;
            }
        }
    }

    let (a1, a2, s0, p) = problem.unpack(&theta);
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ssr / ss_tot
    } else {
        0.0
    };
    let chi_squared = x
        .iter()
        .zip(y)
        .filter_map(|(&x, &y)| {
            let m = logistic(a1, a2, s0, p, x);
            (m > 0.0).then(|| (y - m) * (y - m) / m)
        })
        .sum();
    let fit = LogisticFit {
        a1,
        a2,
        s0,
        p,
        r_squared,
        chi_squared,
        iterations,
        full_form,
    };
    if converged {
        Ok(fit)
    } else {
        Err(Error::NonConvergence {
            iterations,
            best: Box::new(fit),
        })
    }
}

/// Fits bin-center densities. Requires at least 4 populated bins for the full
/// form and 3 for the reduced form.
pub fn fit_logistic(hist: &Histogram, full_form: bool) -> Result<LogisticFit> {
    fit_logistic_points(&hist.bin_centers(), &hist.densities, full_form)
}
