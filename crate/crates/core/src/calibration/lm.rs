//! Box-constrained Levenberg-Marquardt least squares.
//!
//! Bounds are enforced by the transform `x = lo + (hi - lo)(1 + sin u)/2`,
//! so every evaluated point lies in the box. The Jacobian is taken by
//! forward differences in the external variables.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmSettings {
    pub max_iterations: usize,
    /// Relative step-size tolerance in the internal variables.
    pub xtol: f64,
    /// Relative reduction tolerance on the sum of squares.
    pub ftol: f64,
    /// Tolerance on the cosine between residuals and Jacobian columns.
    pub gtol: f64,
    pub fd_rel_step: f64,
    pub fd_abs_step: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        Self {
            max_iterations: 400,
            xtol: 1e-10,
            ftol: 1e-10,
            gtol: 1e-10,
            fd_rel_step: 1e-6,
            fd_abs_step: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ZeroResidual,
    Gradient,
    StepSize,
    Reduction,
    MaxIterations,
}

impl StopReason {
    pub fn converged(self) -> bool {
        !matches!(self, StopReason::MaxIterations)
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub x: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Sum of squared residuals.
    pub cost: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub reason: StopReason,
    /// Sum of squares after each accepted iteration, starting at `x0`.
    pub trace: Vec<f64>,
}

/// Keeps the starting point off the bound so the transform has a usable slope.
const EDGE: f64 = 1e-9;

struct BoxMap<'a> {
    bounds: &'a [(f64, f64)],
}

impl BoxMap<'_> {
    fn to_internal(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.bounds)
            .map(|(&xi, &(lo, hi))| {
                let t = (2.0 * (xi - lo) / (hi - lo) - 1.0).clamp(-1.0 + EDGE, 1.0 - EDGE);
                t.asin()
            })
            .collect()
    }

    fn to_external(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.bounds)
            .map(|(&ui, &(lo, hi))| (lo + 0.5 * (hi - lo) * (1.0 + ui.sin())).clamp(lo, hi))
            .collect()
    }

    fn slope(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.bounds)
            .map(|(&ui, &(lo, hi))| 0.5 * (hi - lo) * ui.cos())
            .collect()
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Minimises `sum r_i(x)^2` over the box `bounds`.
///
/// Never returns a point worse than `x0`. Residual failures at trial points
/// count as rejected steps; failures at `x0` or in the Jacobian propagate.
pub fn minimize<F>(f: F, x0: &[f64], bounds: &[(f64, f64)], s: &LmSettings) -> Result<LmOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x0.len();
    if bounds.len() != n {
        return Err(Error::InvalidParameter("bounds length mismatch".into()));
    }
    for (i, (&x, &(lo, hi))) in x0.iter().zip(bounds).enumerate() {
        if !(lo < hi) || !(x >= lo && x <= hi) {
            return Err(Error::InvalidParameter(format!(
                "component {i}: start {x} outside [{lo}, {hi}]"
            )));
        }
    }
    let map = BoxMap { bounds };
    let mut evaluations = 0;
    let eval = |x: &[f64], count: &mut usize| {
        *count += 1;
        f(x)
    };

    let r_start = eval(x0, &mut evaluations)?;
    let cost_start = sum_sq(&r_start);

    let mut u = map.to_internal(x0);
    let mut x = map.to_external(&u);
    let mut r = if x == x0 {
        r_start.clone()
    } else {
        eval(&x, &mut evaluations)?
    };
    let mut cost = sum_sq(&r);
    let mut trace = vec![cost_start];
    let mut mu: Option<f64> = None;
    let mut nu = 2.0;
    let mut iterations = 0;
    let m = r.len();

    let reason = 'outer: loop {
        if cost == 0.0 {
            break StopReason::ZeroResidual;
        }
        if iterations >= s.max_iterations {
            break StopReason::MaxIterations;
        }
        iterations += 1;

        // Forward-difference Jacobian in x, chained to u.
        let slope = map.slope(&u);
        let mut jac = DMatrix::<f64>::zeros(m, n);
        for k in 0..n {
            let (lo, hi) = bounds[k];
            let mut h = (s.fd_rel_step * x[k].abs()).max(s.fd_abs_step);
            if x[k] + h > hi {
                h = -h;
            }
            if x[k] + h < lo {
                h = 0.5 * (hi - lo).min(h.abs());
            }
            let mut xp = x.clone();
            xp[k] += h;
            let h = xp[k] - x[k];
            let rp = eval(&xp, &mut evaluations)?;
            for i in 0..m {
                jac[(i, k)] = (rp[i] - r[i]) / h * slope[k];
            }
        }
        let rv = DVector::from_column_slice(&r);
        let g = jac.transpose() * &rv;
        let a = jac.transpose() * &jac;

        let rnorm = cost.sqrt();
        let gcos = (0..n)
            .map(|k| {
                let cn = jac.column(k).norm();
                if cn == 0.0 {
                    0.0
                } else {
                    g[k].abs() / (cn * rnorm)
                }
            })
            .fold(0.0, f64::max);
        if gcos <= s.gtol {
            break StopReason::Gradient;
        }

        let diag: Vec<f64> = (0..n).map(|k| a[(k, k)].max(1e-12)).collect();
        let mut damping = *mu.get_or_insert(1e-3);
        let unorm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        loop {
            let mut lhs = a.clone();
            for k in 0..n {
                lhs[(k, k)] += damping * diag[k];
            }
            let Some(chol) = lhs.cholesky() else {
                damping *= nu;
                nu *= 2.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let snorm = step.norm();
            if snorm <= s.xtol * (unorm + s.xtol) {
                break 'outer StopReason::StepSize;
            }
            let u_new: Vec<f64> = u.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let x_new = map.to_external(&u_new);
            let trial = eval(&x_new, &mut evaluations);
            let cost_new = trial.as_ref().map_or(f64::INFINITY, |rn| sum_sq(rn));
            if cost_new < cost {
                // Gain ratio against the local quadratic model of sum r^2.
                let predicted = -(2.0 * g.dot(&step) + (step.transpose() * &a * &step)[(0, 0)]);
                let rho = (cost - cost_new) / predicted.max(f64::MIN_POSITIVE);
                damping *= (1.0 - (2.0 * rho - 1.0).powi(3)).max(1.0 / 3.0);
                nu = 2.0;
                mu = Some(damping);
                let reduction = (cost - cost_new) / cost;
                u = u_new;
                x = x_new;
                r = trial.expect("accepted trial has residuals");
                cost = cost_new;
                trace.push(cost);
                if reduction <= s.ftol && predicted / cost <= s.ftol {
                    break 'outer StopReason::Reduction;
                }
                break;
            }
            damping *= nu;
            nu *= 2.0;
        }
    };

    if cost > cost_start {
        return Ok(LmOutcome {
            x: x0.to_vec(),
            residuals: r_start,
            cost: cost_start,
            iterations,
            evaluations,
            reason,
            trace,
        });
    }
    Ok(LmOutcome {
        x,
        residuals: r,
        cost,
        iterations,
        evaluations,
        reason,
        trace,
    })
}
