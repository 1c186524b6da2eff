//! Numerical integration of the Riccati system behind the Heston exponents.
//!
//! With `f = exp(C + D v + i phi x)` the pricing equation reduces to
//! `D' = sigma^2 D^2 / 2 + (rho sigma phi i - b) D + alpha phi i - phi^2 / 2`
//! and `C' = kappa theta D` (rate terms excluded), both zero at `tau = 0`.

use ode_solvers::{Dopri5, OutputType, System, Vector4};

use crate::error::{Error, Result};
use crate::model::HestonParams;
use crate::pricing::{Prob, C64};

/// Local relative and absolute tolerance of the integrator.
pub const ODE_TOL: f64 = 1e-12;

struct Riccati {
    half_s2: f64,
    lin: C64,
    constant: C64,
    kappa_theta: f64,
}

impl System<f64, Vector4<f64>> for Riccati {
    fn system(&self, _t: f64, y: &Vector4<f64>, dy: &mut Vector4<f64>) {
        let d = C64::new(y[2], y[3]);
        let dd = self.half_s2 * d * d + self.lin * d + self.constant;
        let dc = self.kappa_theta * d;
        dy[0] = dc.re;
        dy[1] = dc.im;
        dy[2] = dd.re;
        dy[3] = dd.im;
    }
}

/// `(A'_1, A_2)` from an adaptive Dormand-Prince integration.
pub fn riccati_numeric(j: Prob, phi: f64, tau: f64, p: &HestonParams) -> Result<(C64, C64)> {
    p.validate()?;
    if !(tau >= 0.0 && tau.is_finite()) || !phi.is_finite() {
        return Err(Error::NumericalDomain(format!(
            "riccati_numeric needs finite phi and tau >= 0, got phi = {phi}, tau = {tau}"
        )));
    }
    let zero = C64::new(0.0, 0.0);
    if tau == 0.0 {
        return Ok((zero, zero));
    }
    let sys = Riccati {
        half_s2: 0.5 * p.sigma * p.sigma,
        lin: C64::new(-j.b(p), p.rho * p.sigma * phi),
        constant: C64::new(-0.5 * phi * phi, j.alpha() * phi),
        kappa_theta: p.kappa * p.theta,
    };
    // Sparse output records the state at every accepted step; the last one
    // sits exactly at tau.
    let mut solver = Dopri5::from_param(
        sys,
        0.0,
        tau,
        tau,
        Vector4::zeros(),
        ODE_TOL,
        ODE_TOL,
        0.9,
        0.04,
        0.2,
        10.0,
        tau,
        0.0,
        1_000_000,
        1000,
        OutputType::Sparse,
    );
    solver
        .integrate()
        .map_err(|e| Error::OdeFailure(e.to_string()))?;
    let (Some(&t_end), Some(y)) = (solver.x_out().last(), solver.y_out().last()) else {
        return Err(Error::OdeFailure("no output".into()));
    };
    if (t_end - tau).abs() > 1e-12 * tau {
        return Err(Error::OdeFailure(format!(
            "stopped at {t_end} before {tau}"
        )));
    }
    if y.iter().any(|x| !x.is_finite()) {
        return Err(Error::OdeFailure(format!(
            "solution not finite at phi = {phi}"
        )));
    }
    Ok((C64::new(y[0], y[1]), C64::new(y[2], y[3])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_horizon() {
        let p = HestonParams::new(2.0, 0.04, 0.3, -0.7, 0.04).unwrap();
        let (a, b) = riccati_numeric(Prob::One, 1.0, 0.0, &p).unwrap();
        assert_eq!((a, b), (C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
    }

    #[test]
    fn frozen_variance_limit() {
        // With sigma -> 0 the system is linear: D = c (1 - e^{-b t}) / b.
        let p = HestonParams::new(2.0, 0.04, 1e-7, 0.0, 0.04).unwrap();
        let (phi, tau) = (0.8, 0.5);
        let (_, d) = riccati_numeric(Prob::Two, phi, tau, &p).unwrap();
        let c = C64::new(-0.5 * phi * phi, -0.5 * phi);
        let expect = c * (1.0 - (-2.0f64 * tau).exp()) / 2.0;
        assert!((d - expect).norm() < 1e-9, "{d} vs {expect}");
    }
}
