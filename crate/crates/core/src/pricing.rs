//! Semi-closed-form European call prices for the Heston model and its
//! log-uniform jump-diffusion extension, via characteristic functions and
//! Fourier inversion of the two exercise probabilities.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{HestonParams, OptionContract, SvjParams};
use crate::quadrature::{integrate_gk, QuadratureConfig};

pub type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

/// Index `j` of the exercise probability `P_j`: `One` is the stock-numeraire
/// measure, `Two` the money-market measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Prob {
    One,
    Two,
}

impl Prob {
    pub const BOTH: [Prob; 2] = [Prob::One, Prob::Two];

    pub fn alpha(self) -> f64 {
        match self {
            Prob::One => 0.5,
            Prob::Two => -0.5,
        }
    }

    /// Drift coefficient `b_j`.
    pub fn b(self, p: &HestonParams) -> f64 {
        match self {
            Prob::One => p.kappa - p.rho * p.sigma,
            Prob::Two => p.kappa,
        }
    }

    fn delta1(self) -> f64 {
        match self {
            Prob::One => 1.0,
            Prob::Two => 0.0,
        }
    }

    fn delta2(self) -> f64 {
        match self {
            Prob::One => 0.0,
            Prob::Two => 1.0,
        }
    }
}

/// Mean jump amplitude `E[J] = (e^n - e^m) / (n - m) - 1` for log marks
/// uniform on `[m, n]`.
pub fn mean_jump(m: f64, n: f64) -> Result<f64> {
    if !(m < n) {
        return Err(Error::InvalidParameter(format!(
            "jump mark density needs m < n, got m = {m}, n = {n}"
        )));
    }
    Ok(uniform_mgf_minus_one(C64::new(1.0, 0.0), m, n).re)
}

/// `E[e^{wU}] - 1` for `U ~ Uniform[m, n]`, written around the midpoint so it
/// stays accurate as `n - m` shrinks.
pub(crate) fn uniform_mgf_minus_one(w: C64, m: f64, n: f64) -> C64 {
    let mid = 0.5 * (m + n);
    let half = 0.5 * (n - m);
    let z = w * half;
    let s_minus_one = sinhc_minus_one(z);
    expm1c(w * mid) * (s_minus_one + 1.0) + s_minus_one
}

/// `sinh(z)/z - 1`.
fn sinhc_minus_one(z: C64) -> C64 {
    if z.norm() < 0.1 {
        let z2 = z * z;
        z2 * (1.0 / 6.0 + z2 * (1.0 / 120.0 + z2 * (1.0 / 5040.0 + z2 / 362_880.0)))
    } else {
        z.sinh() / z - 1.0
    }
}

/// `e^z - 1`.
fn expm1c(z: C64) -> C64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    C64::new(z.re.exp_m1() * c - 2.0 * half * half, z.re.exp() * s)
}

/// Per-frequency pieces of the Heston exponents that do not depend on the
/// horizon. Written with `G = 1/g` so that `e^{-d t}` (with `Re d >= 0`)
/// replaces `e^{d t}`; nothing here can overflow for long horizons.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    pub sigma2: f64,
    pub kappa_theta: f64,
    pub alpha: f64,
    pub b: f64,
    pub phi: f64,
    /// `b_j - rho sigma phi i`
    pub beta: C64,
    pub d: C64,
    /// `(beta - d) / (beta + d)`
    pub big_g: C64,
    /// Whether the principal logarithm is already continuous (`|G| < 1`).
    pub principal_ok: bool,
}

impl Kernel {
    pub fn new(j: Prob, phi: f64, p: &HestonParams) -> Self {
        let alpha = j.alpha();
        let b = j.b(p);
        let rs = p.rho * p.sigma;
        let sigma2 = p.sigma * p.sigma;
        let beta = C64::new(b, -rs * phi);
        let rsi_minus_b = C64::new(-b, rs * phi);
        let disc = rsi_minus_b * rsi_minus_b - sigma2 * C64::new(-phi * phi, 2.0 * alpha * phi);
        let d = disc.sqrt();
        let big_g = (beta - d) / (beta + d);
        Self {
            sigma2,
            kappa_theta: p.kappa * p.theta,
            alpha,
            b,
            phi,
            beta,
            d,
            big_g,
            principal_ok: big_g.norm() < 1.0,
        }
    }

    pub fn exp_neg_d(&self, t: f64) -> C64 {
        (-self.d * t).exp()
    }

    /// `A_2(t)`.
    pub fn a2(&self, t: f64) -> C64 {
        let e = self.exp_neg_d(t);
        (self.beta - self.d) / self.sigma2 * (1.0 - e) / (1.0 - self.big_g * e)
    }

    /// `ln(1 - G e^{-d t})` continued from `t = 0` along the horizon.
    pub fn log_one_minus_ge(&self, t: f64) -> C64 {
        if self.principal_ok {
            return (1.0 - self.big_g * self.exp_neg_d(t)).ln();
        }
        // Rotation counting: unwrap the argument along [0, t].
        let steps = ((self.d.norm() * t * 16.0).ceil() as usize).clamp(64, 1 << 20);
        let mut w = 1.0 - self.big_g;
        let mut arg = w.arg();
        for k in 1..=steps {
            let next = 1.0 - self.big_g * self.exp_neg_d(t * k as f64 / steps as f64);
            let mut delta = next.arg() - w.arg();
            if delta > PI {
                delta -= 2.0 * PI;
            } else if delta < -PI {
                delta += 2.0 * PI;
            }
            arg += delta;
            w = next;
        }
        C64::new(w.norm().ln(), arg)
    }

    /// `A'_1(t)`.
    pub fn a1prime(&self, t: f64) -> C64 {
        // (beta + d) t - 2 ln(...) with the d t term of the log folded in.
        let l = self.log_one_minus_ge(t) - self.log_one_minus_ge(0.0);
        self.kappa_theta / self.sigma2 * ((self.beta - self.d) * t - 2.0 * l)
    }
}

/// Intermediate quantities of the characteristic function for one index `j`.
#[derive(Debug, Clone, Copy)]
pub struct CfTerms {
    pub alpha: f64,
    pub b: f64,
    pub d: C64,
    pub g: C64,
    pub a2: C64,
    pub a1prime: C64,
    /// `r tau` for `j = 2`, zero otherwise.
    pub beta: f64,
}

fn check_finite(name: &str, z: C64) -> Result<C64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NumericalDomain(format!(
            "{name} is not finite ({z})"
        )))
    }
}

pub fn cf_terms(j: Prob, phi: f64, tau: f64, rate: f64, p: &HestonParams) -> Result<CfTerms> {
    if !(tau > 0.0) || !(phi > 0.0) {
        return Err(Error::NumericalDomain(format!(
            "cf_terms needs tau > 0 and phi > 0, got tau = {tau}, phi = {phi}"
        )));
    }
    let k = Kernel::new(j, phi, p);
    Ok(CfTerms {
        alpha: k.alpha,
        b: k.b,
        d: check_finite("d", k.d)?,
        g: 1.0 / k.big_g,
        a2: check_finite("A2", k.a2(tau))?,
        a1prime: check_finite("A1'", k.a1prime(tau))?,
        beta: rate * tau * j.delta2(),
    })
}

/// Log characteristic function `ln f_j` at frequency `phi`.
fn svj_log_cf(j: Prob, phi: f64, s: f64, tau: f64, rate: f64, p: &SvjParams) -> C64 {
    let h = &p.heston;
    let k = Kernel::new(j, phi, h);
    let (d1, d2) = (j.delta1(), j.delta2());
    let mut a1 = I * (rate * phi * tau) - C64::new(rate * d2, 0.0) * tau + k.a1prime(tau);
    if p.lambda != 0.0 {
        let jbar = uniform_mgf_minus_one(C64::new(1.0, 0.0), p.m, p.n).re;
        let w = C64::new(d1, phi);
        a1 += -(C64::new(p.lambda * jbar * d1, p.lambda * jbar * phi)) * tau
            + p.lambda * tau * uniform_mgf_minus_one(w, p.m, p.n);
    }
    a1 + k.a2(tau) * h.v0 + I * (phi * s) + rate * tau * d2
}

/// Characteristic function `f_j(s, v, tau; phi)` of the jump-diffusion model.
pub fn svj_cf(
    j: Prob,
    phi: f64,
    s: f64,
    v: f64,
    tau: f64,
    rate: f64,
    p: &SvjParams,
) -> Result<C64> {
    if !(tau > 0.0) || !(phi > 0.0) || !(v >= 0.0) {
        return Err(Error::NumericalDomain(format!(
            "svj_cf needs tau > 0, phi > 0, v >= 0 (tau = {tau}, phi = {phi}, v = {v})"
        )));
    }
    let mut q = *p;
    q.heston.v0 = v;
    check_finite("f_j", svj_log_cf(j, phi, s, tau, rate, &q).exp())
}

/// Fourier inversion shared by the exercise probabilities and the
/// multiscale correction terms.
///
/// For every log-strike returns `(1/pi) int_0^inf Re[e^{-i phi ln K} cf_j / (i phi)] dphi`
/// for `j = 1, 2`, with `cf` supplying `ln`-free values of both
/// characteristic functions at a frequency. Every component is resolved to
/// `abs_tol` (in units of the returned value).
pub(crate) fn invert<const N: usize, F>(
    cf: F,
    log_strikes: &[f64],
    q: &QuadratureConfig,
    parallel: bool,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64) -> Result<[C64; N]> + Sync,
{
    q.validate()?;
    let nk = log_strikes.len();
    let dim = N * nk;
    let fill = |phi: f64, vals: [C64; N], out: &mut [f64]| {
        for (k, &lk) in log_strikes.iter().enumerate() {
            let rot = C64::from_polar(1.0 / phi, -phi * lk);
            for (o, v) in out[N * k..N * (k + 1)].iter_mut().zip(vals) {
                *o = (v * rot).im;
            }
        }
    };
    let integrand = |nodes: &[f64], out: &mut [f64]| -> Result<()> {
        let vals: Vec<Result<[C64; N]>> = if parallel {
            nodes.par_iter().map(|&phi| cf(phi)).collect()
        } else {
            nodes.iter().map(|&phi| cf(phi)).collect()
        };
        for ((&phi, v), chunk) in nodes.iter().zip(vals).zip(out.chunks_mut(dim)) {
            fill(phi, v?, chunk);
        }
        Ok(())
    };

    // The probability error equals the integral error divided by pi.
    let tol = PI * q.abs_tol;
    let main = integrate_gk(integrand, &q.breakpoints(), dim, tol, q.max_subdivisions)?;
    let mut totals = main.values;

    // [0, phi_min]: the integrand has a finite limit at zero.
    let mut low = vec![0.0; dim];
    fill(q.phi_min, cf(q.phi_min)?, &mut low);
    for (t, l) in totals.iter_mut().zip(&low) {
        *t += q.phi_min * l;
    }

    // Tail: extend the range until the characteristic function is negligible.
    let mut hi = q.phi_max;
    let mut extensions = 0;
    loop {
        let vals = cf(hi)?;
        let modulus = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if modulus < q.abs_tol {
            break;
        }
        if extensions == MAX_TAIL_EXTENSIONS {
            return Err(Error::TruncationTail { phi: hi, modulus });
        }
        let ext = integrate_gk(integrand, &[hi, 2.0 * hi], dim, tol, q.max_subdivisions)?;
        for (t, e) in totals.iter_mut().zip(&ext.values) {
            *t += e;
        }
        hi *= 2.0;
        extensions += 1;
    }

    Ok(totals
        .chunks(N)
        .map(|c| std::array::from_fn(|i| c[i] / PI))
        .collect())
}

const MAX_TAIL_EXTENSIONS: usize = 4;

/// Exercise probabilities `(P_1, P_2)` for each strike of one maturity slice.
pub fn probabilities_slice(
    spot: f64,
    rate: f64,
    tau: f64,
    strikes: &[f64],
    p: &SvjParams,
    q: &QuadratureConfig,
) -> Result<Vec<[f64; 2]>> {
    p.validate()?;
    for &k in strikes {
        OptionContract::call(spot, k, tau, rate)?;
    }
    let s = spot.ln();
    let log_strikes: Vec<f64> = strikes.iter().map(|k| k.ln()).collect();
    let cf = |phi: f64| -> Result<[C64; 2]> {
        Ok([
            check_finite("f_1", svj_log_cf(Prob::One, phi, s, tau, rate, p).exp())?,
            check_finite("f_2", svj_log_cf(Prob::Two, phi, s, tau, rate, p).exp())?,
        ])
    };
    let integrals = invert(cf, &log_strikes, q, false)?;
    Ok(integrals
        .into_iter()
        .map(|[i1, i2]| [0.5 + i1, 0.5 + i2])
        .collect())
}

/// Exercise probability `P_j` for one contract.
pub fn prob_pj(j: Prob, c: &OptionContract, p: &SvjParams, q: &QuadratureConfig) -> Result<f64> {
    c.validate()?;
    let ps = probabilities_slice(c.spot, c.rate, c.tau, &[c.strike], p, q)?;
    Ok(match j {
        Prob::One => ps[0][0],
        Prob::Two => ps[0][1],
    })
}

/// Call values `S P_1 - K e^{-r tau} P_2` for every strike of a slice.
pub fn call_prices_svj(
    spot: f64,
    rate: f64,
    tau: f64,
    strikes: &[f64],
    p: &SvjParams,
    q: &QuadratureConfig,
) -> Result<Vec<f64>> {
    let ps = probabilities_slice(spot, rate, tau, strikes, p, q)?;
    let disc = (-rate * tau).exp();
    Ok(strikes
        .iter()
        .zip(ps)
        .map(|(&k, [p1, p2])| spot * p1 - k * disc * p2)
        .collect())
}

/// Jump-diffusion price of a European option; puts follow from parity.
pub fn price_svj(c: &OptionContract, p: &SvjParams, q: &QuadratureConfig) -> Result<f64> {
    c.validate()?;
    let call = call_prices_svj(c.spot, c.rate, c.tau, &[c.strike], p, q)?[0];
    Ok(c.from_call_value(call))
}

/// Heston price: the jump-diffusion price with zero jump intensity.
pub fn price_heston(c: &OptionContract, p: &HestonParams, q: &QuadratureConfig) -> Result<f64> {
    price_svj(c, &SvjParams::without_jumps(*p), q)
}
