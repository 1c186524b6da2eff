//! First-order multiscale correction to the Heston price.
//!
//! The corrected price is `C0 + C1`, where `C0` is the Heston price and `C1`
//! is obtained by inverting the correction characteristic functions
//! `q_j = (kappa theta q0 + v q1) exp(A'_1 + A_2 v + i phi s)`. The small
//! parameter of the expansion is absorbed into the four coefficients `V_k`.
//! `C1` keeps only the integral part of the inversion so that it vanishes
//! with the coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SvjParams;
use crate::model::{HestonParams, MsvParams, OptionContract};
use crate::pricing::{call_prices_svj, invert, Kernel, Prob, C64};
use crate::quadrature::{GaussLegendre, QuadratureConfig};

const I: C64 = C64::new(0.0, 1.0);

/// Node counts for the nested time integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestedQuadConfig {
    pub inner_nodes: usize,
    pub outer_nodes: usize,
    /// Node multiplier used by the refinement checks.
    pub refinement_factor: usize,
}

impl Default for NestedQuadConfig {
    fn default() -> Self {
        Self {
            inner_nodes: 48,
            outer_nodes: 32,
            refinement_factor: 2,
        }
    }
}

impl NestedQuadConfig {
    pub fn validate(&self) -> Result<()> {
        if self.inner_nodes < 8 || self.outer_nodes < 8 {
            return Err(Error::InvalidParameter(format!(
                "nested quadrature needs at least 8 nodes, got inner = {}, outer = {}",
                self.inner_nodes, self.outer_nodes
            )));
        }
        if self.refinement_factor < 2 {
            return Err(Error::InvalidParameter(
                "refinement_factor must be >= 2".into(),
            ));
        }
        Ok(())
    }

    pub fn refined(&self) -> Self {
        Self {
            inner_nodes: self.inner_nodes * self.refinement_factor,
            outer_nodes: self.outer_nodes * self.refinement_factor,
            refinement_factor: self.refinement_factor,
        }
    }
}

/// `A_3(tau, phi, z)`, with the logarithm continued along the inner time.
pub fn a3(j: Prob, phi: f64, tau: f64, z: f64, p: &HestonParams) -> Result<C64> {
    if !(phi > 0.0) || !(0.0 <= z && z <= tau) {
        return Err(Error::NumericalDomain(format!(
            "a3 needs phi > 0 and 0 <= z <= tau, got phi = {phi}, z = {z}, tau = {tau}"
        )));
    }
    let k = Kernel::new(j, phi, p);
    let denom = 1.0 - k.big_g * k.exp_neg_d(z);
    if denom.norm() < f64::EPSILON {
        return Err(Error::NumericalDomain(format!(
            "g e^(d z) = 1 at z = {z}, phi = {phi}"
        )));
    }
    // (b - rho sigma phi i + d)(1 - g)/(d g), written with G = 1/g.
    let prefactor = (k.beta + k.d) * (k.big_g - 1.0) / k.d;
    let log = k.d * (tau - z) + k.log_one_minus_ge(tau) - k.log_one_minus_ge(z);
    Ok(prefactor * log)
}

fn b_from_a2(alpha: f64, phi: f64, a2: C64, v: &[f64; 4]) -> C64 {
    let phi2 = phi * phi;
    let t1 = a2 * C64::new(-phi2, 2.0 * alpha * phi);
    let t2 = a2 * a2 * C64::new(0.0, phi);
    let t3 = C64::new(phi2, 2.0 * alpha * phi2 * phi);
    let t4 = a2 * (-phi2);
    -(v[0] * t1 + v[1] * t2 + v[2] * t3 + v[3] * t4)
}

/// The coefficient `B(tau, phi)`, linear in `(V_1, .., V_4)`.
pub fn b_coef(j: Prob, phi: f64, tau: f64, p: &MsvParams) -> Result<C64> {
    if !(phi > 0.0) || !(tau >= 0.0) {
        return Err(Error::NumericalDomain(format!(
            "b_coef needs phi > 0 and tau >= 0, got phi = {phi}, tau = {tau}"
        )));
    }
    let k = Kernel::new(j, phi, &p.heston);
    Ok(b_from_a2(k.alpha, phi, k.a2(tau), &p.v))
}

/// Evaluates the nested integrals for one frequency, reusing the
/// horizon-independent kernel across every node.
struct NestedEval<'a> {
    k: Kernel,
    v: &'a [f64; 4],
    inner: &'a GaussLegendre,
}

/// `Re d * t` above which `e^{-d z}` ratios are formed directly.
const RATIO_LIMIT: f64 = 300.0;

impl NestedEval<'_> {
    /// `q1(t) = int_0^t B(z) e^{A_3(t, z)} dz`.
    ///
    /// The prefactor of `A_3` reduces identically to `-2`, so
    /// `e^{A_3(t, z)} = e^{-2 d (t - z)} ((1 - G e^{-d z}) / (1 - G e^{-d t}))^2`;
    /// this needs no logarithm and one exponential per node.
    fn q1(&self, t: f64) -> C64 {
        let (alpha, phi, v) = (self.k.alpha, self.k.phi, self.v);
        self.q1_with(t, |a2| [b_from_a2(alpha, phi, a2, v)])[0]
    }

    /// `q1` for several coefficient functions of `A_2` sharing the kernel.
    fn q1_with<const N: usize>(&self, t: f64, b: impl Fn(C64) -> [C64; N]) -> [C64; N] {
        let mut acc = [C64::new(0.0, 0.0); N];
        if t == 0.0 {
            return acc;
        }
        let k = &self.k;
        let ut = k.exp_neg_d(t);
        let wt = 1.0 - k.big_g * ut;
        let coef = (k.beta - k.d) / k.sigma2;
        let direct = k.d.re * t > RATIO_LIMIT;
        for (z, w) in self.inner.on_interval(t) {
            let uz = k.exp_neg_d(z);
            let wz = 1.0 - k.big_g * uz;
            let a2 = coef * (1.0 - uz) / wz;
            let shift = if direct {
                (-2.0 * k.d * (t - z)).exp()
            } else {
                let r = ut / uz;
                r * r
            };
            let ratio = wz / wt;
            let weight = w * shift * ratio * ratio;
            for (a, bk) in acc.iter_mut().zip(b(a2)) {
                *a += weight * bk;
            }
        }
        acc
    }

    /// `(q0(tau), q1(tau))`.
    fn q0_q1(&self, tau: f64, outer: &GaussLegendre) -> (C64, C64) {
        let q0 = outer
            .on_interval(tau)
            .map(|(t, w)| w * self.q1(t))
            .fold(C64::new(0.0, 0.0), |a, b| a + b);
        (q0, self.q1(tau))
    }

    /// `(q0, q1)` for each unit coefficient vector `e_1, .., e_4`.
    fn q0_q1_basis(&self, tau: f64, outer: &GaussLegendre) -> ([C64; 4], [C64; 4]) {
        let (alpha, phi) = (self.k.alpha, self.k.phi);
        let basis = |a2: C64| -> [C64; 4] {
            std::array::from_fn(|i| {
                let mut e = [0.0; 4];
                e[i] = 1.0;
                b_from_a2(alpha, phi, a2, &e)
            })
        };
        let mut q0 = [C64::new(0.0, 0.0); 4];
        for (t, w) in outer.on_interval(tau) {
            for (a, x) in q0.iter_mut().zip(self.q1_with(t, basis)) {
                *a += w * x;
            }
        }
        (q0, self.q1_with(tau, basis))
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::NumericalDomain(format!(
            "tau must be > 0, got {tau}"
        )))
    }
}

/// `q1(tau, phi)` by Gauss-Legendre with `inner_nodes` nodes.
pub fn qhat1(j: Prob, phi: f64, tau: f64, p: &MsvParams, nq: &NestedQuadConfig) -> Result<C64> {
    check_tau(tau)?;
    nq.validate()?;
    let inner = GaussLegendre::new(nq.inner_nodes);
    let ev = NestedEval {
        k: Kernel::new(j, phi, &p.heston),
        v: &p.v,
        inner: &inner,
    };
    Ok(ev.q1(tau))
}

/// `q0(tau, phi) = int_0^tau q1(z, phi) dz` with `outer_nodes` outer nodes.
pub fn qhat0(j: Prob, phi: f64, tau: f64, p: &MsvParams, nq: &NestedQuadConfig) -> Result<C64> {
    check_tau(tau)?;
    nq.validate()?;
    let inner = GaussLegendre::new(nq.inner_nodes);
    let outer = GaussLegendre::new(nq.outer_nodes);
    let ev = NestedEval {
        k: Kernel::new(j, phi, &p.heston),
        v: &p.v,
        inner: &inner,
    };
    Ok(ev.q0_q1(tau, &outer).0)
}

fn relative_change(a: C64, b: C64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// `q1` at the configured node count, rejected if refining the rule moves it
/// by more than `rel_tol`.
pub fn qhat1_checked(
    j: Prob,
    phi: f64,
    tau: f64,
    p: &MsvParams,
    nq: &NestedQuadConfig,
    rel_tol: f64,
) -> Result<C64> {
    let coarse = qhat1(j, phi, tau, p, nq)?;
    let fine = qhat1(j, phi, tau, p, &nq.refined())?;
    let change = relative_change(coarse, fine);
    if change > rel_tol {
        return Err(Error::NestedRefinement(change));
    }
    Ok(coarse)
}

/// `q0` at the configured node counts, rejected if refining both rules moves
/// it by more than `rel_tol`.
pub fn qhat0_checked(
    j: Prob,
    phi: f64,
    tau: f64,
    p: &MsvParams,
    nq: &NestedQuadConfig,
    rel_tol: f64,
) -> Result<C64> {
    let coarse = qhat0(j, phi, tau, p, nq)?;
    let fine = qhat0(j, phi, tau, p, &nq.refined())?;
    let change = relative_change(coarse, fine);
    if change > rel_tol {
        return Err(Error::NestedRefinement(change));
    }
    Ok(coarse)
}

/// Shared evaluation of `q_j` at one frequency.
struct CorrectionCf<'a> {
    p: &'a MsvParams,
    s: f64,
    tau: f64,
    inner: GaussLegendre,
    outer: GaussLegendre,
}

impl CorrectionCf<'_> {
    fn eval(&self, j: Prob, phi: f64) -> Result<C64> {
        let h = &self.p.heston;
        let ev = NestedEval {
            k: Kernel::new(j, phi, h),
            v: &self.p.v,
            inner: &self.inner,
        };
        let (q0, q1) = ev.q0_q1(self.tau, &self.outer);
        let expo = ev.k.a1prime(self.tau) + ev.k.a2(self.tau) * h.v0 + I * (phi * self.s);
        let val = (h.kappa * h.theta * q0 + h.v0 * q1) * expo.exp();
        if val.re.is_finite() && val.im.is_finite() {
            Ok(val)
        } else {
            Err(Error::NumericalDomain(format!(
                "q_j not finite at phi = {phi}"
            )))
        }
    }
}

/// Correction characteristic function `q_j(s, v, tau; phi)`.
pub fn msv_cf(
    j: Prob,
    phi: f64,
    s: f64,
    v: f64,
    tau: f64,
    p: &MsvParams,
    nq: &NestedQuadConfig,
) -> Result<C64> {
    check_tau(tau)?;
    nq.validate()?;
    if !(phi > 0.0) || !(v >= 0.0) {
        return Err(Error::NumericalDomain(format!(
            "msv_cf needs phi > 0 and v >= 0, got phi = {phi}, v = {v}"
        )));
    }
    let mut q = *p;
    q.heston.v0 = v;
    let cf = CorrectionCf {
        p: &q,
        s,
        tau,
        inner: GaussLegendre::new(nq.inner_nodes),
        outer: GaussLegendre::new(nq.outer_nodes),
    };
    cf.eval(j, phi)
}

/// First-order corrections `C1` for every strike of one maturity slice.
/// The correction is the same for calls and puts.
///
/// Computed as `sum_i V_i C1(e_i)` from [`correction_basis_slice`], so the
/// adaptive frequency partition does not depend on `V` and the result is
/// linear in `V` up to rounding.
pub fn correction_slice(
    spot: f64,
    rate: f64,
    tau: f64,
    strikes: &[f64],
    p: &MsvParams,
    q: &QuadratureConfig,
    nq: &NestedQuadConfig,
) -> Result<Vec<f64>> {
    p.validate()?;
    nq.validate()?;
    for &k in strikes {
        OptionContract::call(spot, k, tau, rate)?;
    }
    if p.v.iter().all(|&x| x == 0.0) {
        return Ok(vec![0.0; strikes.len()]);
    }
    let basis = correction_basis_slice(spot, rate, tau, strikes, &p.heston, q, nq)?;
    Ok(basis.iter().map(|b| combine(b, &p.v)).collect())
}

/// `sum_i v_i basis_i`
pub(crate) fn combine(basis: &[f64; 4], v: &[f64; 4]) -> f64 {
    basis.iter().zip(v).map(|(x, y)| x * y).sum()
}

/// Single adaptive pass with the full coefficient vector. Agrees with
/// [`correction_slice`] to the quadrature tolerance.
#[cfg(test)]
fn correction_slice_direct(
    spot: f64,
    rate: f64,
    tau: f64,
    strikes: &[f64],
    p: &MsvParams,
    q: &QuadratureConfig,
    nq: &NestedQuadConfig,
) -> Result<Vec<f64>> {
    p.validate()?;
    nq.validate()?;
    for &k in strikes {
        OptionContract::call(spot, k, tau, rate)?;
    }
    if p.v.iter().all(|&x| x == 0.0) {
        return Ok(vec![0.0; strikes.len()]);
    }
    let cf = CorrectionCf {
        p,
        s: spot.ln(),
        tau,
        inner: GaussLegendre::new(nq.inner_nodes),
        outer: GaussLegendre::new(nq.outer_nodes),
    };
    let log_strikes: Vec<f64> = strikes.iter().map(|k| k.ln()).collect();
    let integrals = invert(
        |phi| Ok([cf.eval(Prob::One, phi)?, cf.eval(Prob::Two, phi)?]),
        &log_strikes,
        q,
        true,
    )?;
    let disc = (-rate * tau).exp();
    Ok(strikes
        .iter()
        .zip(integrals)
        .map(|(&k, [i1, i2])| spot * i1 - k * disc * i2)
        .collect())
}

/// Corrections for unit coefficient vectors: entry `[k][i]` is `C1` at strike
/// `k` with `V = e_i`. Since `C1` is linear in `V`, any correction follows as
/// `sum_i V_i basis[k][i]`, which lets the MSV calibration reuse one nested
/// evaluation for every coefficient vector sharing the Heston part.
pub fn correction_basis_slice(
    spot: f64,
    rate: f64,
    tau: f64,
    strikes: &[f64],
    h: &HestonParams,
    q: &QuadratureConfig,
    nq: &NestedQuadConfig,
) -> Result<Vec<[f64; 4]>> {
    h.validate()?;
    nq.validate()?;
    for &k in strikes {
        OptionContract::call(spot, k, tau, rate)?;
    }
    let inner = GaussLegendre::new(nq.inner_nodes);
    let outer = GaussLegendre::new(nq.outer_nodes);
    let s = spot.ln();
    let zero = [0.0; 4];
    let cf = |phi: f64| -> Result<[C64; 8]> {
        let mut out = [C64::new(0.0, 0.0); 8];
        for (jdx, j) in Prob::BOTH.into_iter().enumerate() {
            let ev = NestedEval {
                k: Kernel::new(j, phi, h),
                v: &zero,
                inner: &inner,
            };
            let (q0, q1) = ev.q0_q1_basis(tau, &outer);
            let expo = (ev.k.a1prime(tau) + ev.k.a2(tau) * h.v0 + I * (phi * s)).exp();
            for i in 0..4 {
                let val = (h.kappa * h.theta * q0[i] + h.v0 * q1[i]) * expo;
                if !(val.re.is_finite() && val.im.is_finite()) {
                    return Err(Error::NumericalDomain(format!(
                        "q_j not finite at phi = {phi}"
                    )));
                }
                out[4 * jdx + i] = val;
            }
        }
        Ok(out)
    };
    let log_strikes: Vec<f64> = strikes.iter().map(|k| k.ln()).collect();
    let integrals = invert(cf, &log_strikes, q, true)?;
    let disc = (-rate * tau).exp();
    Ok(strikes
        .iter()
        .zip(integrals)
        .map(|(&k, c)| std::array::from_fn(|i| spot * c[i] - k * disc * c[4 + i]))
        .collect())
}

/// `C0 + C1` clamped to the no-arbitrage band of a call.
pub(crate) fn corrected_call(
    spot: f64,
    strike: f64,
    disc: f64,
    tau: f64,
    c0: f64,
    c1: f64,
) -> MsvPrice {
    let raw = c0 + c1;
    let lo = (spot - strike * disc).max(0.0);
    let price = raw.clamp(lo, spot);
    let clamped = price != raw;
    if clamped {
        log::warn!("corrected price {raw} for K = {strike}, tau = {tau} clamped to [{lo}, {spot}]");
    }
    MsvPrice {
        price,
        heston: c0,
        correction: c1,
        clamped,
    }
}

/// `C1` for one contract.
pub fn correction_c1(
    c: &OptionContract,
    p: &MsvParams,
    q: &QuadratureConfig,
    nq: &NestedQuadConfig,
) -> Result<f64> {
    c.validate()?;
    Ok(correction_slice(c.spot, c.rate, c.tau, &[c.strike], p, q, nq)?[0])
}

/// Corrected price together with its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MsvPrice {
    pub price: f64,
    /// Heston price `C0`.
    pub heston: f64,
    /// First-order correction `C1`.
    pub correction: f64,
    /// Set when `C0 + C1` fell outside the no-arbitrage band and was clamped.
    pub clamped: bool,
}

/// Corrected call values for every strike of one maturity slice.
pub fn call_prices_msv(
    spot: f64,
    rate: f64,
    tau: f64,
    strikes: &[f64],
    p: &MsvParams,
    q: &QuadratureConfig,
    nq: &NestedQuadConfig,
) -> Result<Vec<MsvPrice>> {
    let base = call_prices_svj(
        spot,
        rate,
        tau,
        strikes,
        &SvjParams::without_jumps(p.heston),
        q,
    )?;
    let corr = correction_slice(spot, rate, tau, strikes, p, q, nq)?;
    let disc = (-rate * tau).exp();
    Ok(strikes
        .iter()
        .zip(base.into_iter().zip(corr))
        .map(|(&k, (c0, c1))| corrected_call(spot, k, disc, tau, c0, c1))
        .collect())
}

/// Corrected price `C0 + C1` of a European option; puts follow from parity.
pub fn price_msv(
    c: &OptionContract,
    p: &MsvParams,
    q: &QuadratureConfig,
    nq: &NestedQuadConfig,
) -> Result<MsvPrice> {
    c.validate()?;
    let call = call_prices_msv(c.spot, c.rate, c.tau, &[c.strike], p, q, nq)?[0];
    Ok(MsvPrice {
        price: c.from_call_value(call.price),
        heston: c.from_call_value(call.heston),
        ..call
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heston() -> HestonParams {
        HestonParams::new(2.0, 0.04, 0.3, -0.7, 0.04).unwrap()
    }

    fn msv(v: [f64; 4]) -> MsvParams {
        MsvParams::new(heston(), v).unwrap()
    }

    #[test]
    fn a3_vanishes_on_the_diagonal() {
        for j in Prob::BOTH {
            for phi in [1e-3, 0.7, 12.0, 150.0] {
                for tau in [0.05, 0.5, 3.0] {
                    assert_eq!(a3(j, phi, tau, tau, &heston()).unwrap(), C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn a3_prefactor_is_minus_two() {
        let k = Kernel::new(Prob::One, 1.3, &heston());
        let pre = (k.beta + k.d) * (k.big_g - 1.0) / k.d;
        assert!((pre + 2.0).norm() < 1e-13, "{pre}");
    }

    #[test]
    fn kernel_matches_exp_of_a3() {
        let p = msv([0.0, 0.0, 0.01, 0.0]);
        let inner = GaussLegendre::new(8);
        for j in Prob::BOTH {
            for phi in [0.4, 5.0, 60.0] {
                let ev = NestedEval {
                    k: Kernel::new(j, phi, &p.heston),
                    v: &p.v,
                    inner: &inner,
                };
                let t = 0.5;
                let direct: C64 = inner
                    .on_interval(t)
                    .map(|(z, w)| {
                        w * b_coef(j, phi, z, &p).unwrap()
                            * a3(j, phi, t, z, &p.heston).unwrap().exp()
                    })
                    .sum();
                let got = ev.q1(t);
                assert!(
                    (got - direct).norm() <= 1e-12 * direct.norm().max(1e-300),
                    "j={j:?} phi={phi}: {got} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn b_coef_single_term_by_hand() {
        let b = b_coef(Prob::Two, 1.0, 0.5, &msv([0.0, 0.0, 0.01, 0.0])).unwrap();
        let expect = C64::new(-0.01, 0.01);
        assert!((b - expect).norm() < 1e-17, "{b}");
    }

    #[test]
    fn b_coef_zero_and_linear() {
        assert_eq!(
            b_coef(Prob::One, 2.0, 0.3, &msv([0.0; 4])).unwrap(),
            C64::new(0.0, 0.0)
        );
        let v = [0.01, -0.02, 0.005, 0.03];
        let b = b_coef(Prob::One, 2.0, 0.3, &msv(v)).unwrap();
        let b2 = b_coef(Prob::One, 2.0, 0.3, &msv(v).scaled(-2.5)).unwrap();
        assert!((b2 + 2.5 * b).norm() < 1e-15);
    }

    #[test]
    fn qhat_zero_coefficients() {
        let p = msv([0.0; 4]);
        let nq = NestedQuadConfig::default();
        assert_eq!(
            qhat1(Prob::One, 1.0, 0.5, &p, &nq).unwrap(),
            C64::new(0.0, 0.0)
        );
        assert_eq!(
            qhat0(Prob::Two, 1.0, 0.5, &p, &nq).unwrap(),
            C64::new(0.0, 0.0)
        );
        assert_eq!(
            msv_cf(Prob::One, 1.0, 4.6, 0.04, 0.5, &p, &nq).unwrap(),
            C64::new(0.0, 0.0)
        );
    }

    #[test]
    fn qhat_refinement_contracts() {
        let p = msv([0.01, 0.0, 0.0, 0.0]);
        let nq = NestedQuadConfig::default();
        for j in Prob::BOTH {
            qhat1_checked(j, 1.0, 0.5, &p, &nq, 1e-9).unwrap();
            qhat0_checked(j, 1.0, 0.5, &p, &nq, 1e-8).unwrap();
        }
    }

    #[test]
    fn msv_cf_without_variance() {
        let p = msv([0.0, 0.01, 0.0, 0.0]);
        let nq = NestedQuadConfig::default();
        let (phi, s, tau) = (1.5, 4.6, 0.5);
        let got = msv_cf(Prob::One, phi, s, 0.0, tau, &p, &nq).unwrap();
        let k = Kernel::new(Prob::One, phi, &p.heston);
        let expect = p.heston.kappa
            * p.heston.theta
            * qhat0(Prob::One, phi, tau, &p, &nq).unwrap()
            * (k.a1prime(tau) + I * (phi * s)).exp();
        assert!((got - expect).norm() < 1e-15 * expect.norm().max(1e-300));
    }

    #[test]
    fn basis_combination_matches_direct_correction() {
        let v = [0.01, -0.02, 0.005, 0.03];
        let p = msv(v);
        let (q, nq) = (QuadratureConfig::default(), NestedQuadConfig::default());
        let strikes = [85.0, 100.0, 120.0];
        let direct = correction_slice_direct(100.0, 0.02, 0.3, &strikes, &p, &q, &nq).unwrap();
        let combined = correction_slice(100.0, 0.02, 0.3, &strikes, &p, &q, &nq).unwrap();
        for (d, c) in direct.iter().zip(&combined) {
            assert!((d - c).abs() < 1e-8, "{d} vs {c}");
        }
    }

    #[test]
    fn config_validation() {
        let bad = NestedQuadConfig {
            inner_nodes: 4,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(a3(Prob::One, 1.0, 0.5, 0.6, &heston()).is_err());
    }
}
