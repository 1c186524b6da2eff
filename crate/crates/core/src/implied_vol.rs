//! Black-Scholes prices, implied-volatility inversion, and smile extraction
//! against log-moneyness.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::market_data::{OptionChain, OptionQuote};
use crate::model::{OptionContract, OptionKind};

/// Bracket searched by the root finder.
pub const VOL_MIN: f64 = 1e-4;
pub const VOL_MAX: f64 = 5.0;

/// Price residual target, relative to spot.
const PRICE_TOL: f64 = 1e-10;

fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn d1_d2(c: &OptionContract, vol: f64) -> (f64, f64) {
    let sd = vol * c.tau.sqrt();
    let d1 = ((c.spot / c.strike).ln() + (c.rate + 0.5 * vol * vol) * c.tau) / sd;
    (d1, d1 - sd)
}

/// Black-Scholes value of a European call or put.
pub fn bs_price(c: &OptionContract, vol: f64) -> f64 {
    let (d1, d2) = d1_d2(c, vol);
    let dk = c.discounted_strike();
    match c.kind {
        OptionKind::Call => c.spot * norm_cdf(d1) - dk * norm_cdf(d2),
        OptionKind::Put => dk * norm_cdf(-d2) - c.spot * norm_cdf(-d1),
    }
}

/// Sensitivity of [`bs_price`] to volatility.
pub fn bs_vega(c: &OptionContract, vol: f64) -> f64 {
    let (d1, _) = d1_d2(c, vol);
    c.spot * norm_pdf(d1) * c.tau.sqrt()
}

/// Volatility reproducing `price` under Black-Scholes.
///
/// Safeguarded Newton iteration inside a shrinking bisection bracket on
/// `[VOL_MIN, VOL_MAX]`.
pub fn implied_vol(c: &OptionContract, price: f64) -> Result<f64> {
    c.validate()?;
    if !price.is_finite() {
        return Err(Error::NoSolution(format!("price {price} is not finite")));
    }
    // Bounds expressed on the call value so puts share them.
    let call = c.to_call_value(price);
    let lower = c.call_lower_bound();
    if call <= lower {
        return Err(Error::NoSolution(format!(
            "price {price} at or below the intrinsic lower bound {}",
            c.from_call_value(lower)
        )));
    }
    if call >= c.spot {
        return Err(Error::NoSolution(format!(
            "price {price} at or above the upper bound {}",
            c.from_call_value(c.spot)
        )));
    }
    let tol = PRICE_TOL * c.spot;
    let f = |v: f64| bs_price(c, v) - price;
    let (mut lo, mut hi) = (VOL_MIN, VOL_MAX);
    let (f_lo, f_hi) = (f(lo), f(hi));
    if f_lo > 0.0 {
        return Err(Error::NoSolution(format!(
            "price {price} below the value at the minimum volatility {VOL_MIN}"
        )));
    }
    if f_hi < 0.0 {
        return Err(Error::NoSolution(format!(
            "price {price} above the value at the maximum volatility {VOL_MAX}"
        )));
    }

    // Start from the Brenner-Subrahmanyam ATM approximation.
    let mut vol = ((2.0 * std::f64::consts::PI / c.tau).sqrt() * call / c.spot).clamp(0.05, 1.5);
    let mut best = (f64::INFINITY, vol);
    for _ in 0..200 {
        let r = f(vol);
        if r.abs() < best.0 {
            best = (r.abs(), vol);
        }
        if r == 0.0 {
            break;
        }
        if r > 0.0 {
            hi = vol;
        } else {
            lo = vol;
        }
        let vega = bs_vega(c, vol);
        let newton = vol - r / vega;
        let next = if vega > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - vol).abs();
        vol = next;
        if step <= 1e-15 * vol.max(1.0) || hi - lo <= 1e-15 * hi {
            let r = f(vol);
            if r.abs() < best.0 {
                best = (r.abs(), vol);
            }
            break;
        }
    }
    if best.0 <= tol {
        Ok(best.1)
    } else {
        Err(Error::NoSolution(format!(
            "price residual {:e} above tolerance {tol:e}",
            best.0
        )))
    }
}

/// One point of an implied-volatility smile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmilePoint {
    /// `ln(K / S)`
    pub log_moneyness: f64,
    pub implied_vol: f64,
    /// `"market"` or a model name.
    pub source: String,
}

/// Market and model smile points for a chain, plus per-quote failures.
#[derive(Debug, Clone, Default)]
pub struct SmileCurve {
    /// `(quote index, market point, model point)`
    pub pairs: Vec<(usize, SmilePoint, SmilePoint)>,
    /// `(quote index, reason)` for quotes that could not be inverted.
    pub failures: Vec<(usize, String)>,
}

/// Inverts market and model prices for every quote of a chain.
///
/// `model_prices[i]` is the model value of `chain.quotes[i]`. Quotes whose
/// market or model price violates the no-arbitrage band are reported in
/// `failures` and left out of the curve.
pub fn smile_curve(
    chain: &OptionChain,
    model_prices: &[Result<f64>],
    model_name: &str,
) -> SmileCurve {
    let mut out = SmileCurve::default();
    for (i, (quote, model)) in chain.quotes.iter().zip(model_prices).enumerate() {
        match smile_pair(quote, model, model_name) {
            Ok((mkt, mdl)) => out.pairs.push((i, mkt, mdl)),
            Err(e) => {
                log::info!("quote {i} left out of the smile: {e}");
                out.failures.push((i, e.to_string()));
            }
        }
    }
    out
}

fn smile_pair(
    quote: &OptionQuote,
    model: &Result<f64>,
    model_name: &str,
) -> Result<(SmilePoint, SmilePoint)> {
    let c = quote.contract()?;
    let model = match model {
        Ok(p) => *p,
        Err(e) => return Err(Error::NoSolution(format!("model price unavailable: {e}"))),
    };
    let mkt_iv =
        implied_vol(&c, quote.mid_price).map_err(|e| Error::NoSolution(format!("market: {e}")))?;
    let mdl_iv = implied_vol(&c, model).map_err(|e| Error::NoSolution(format!("model: {e}")))?;
    let x = c.log_moneyness();
    Ok((
        SmilePoint {
            log_moneyness: x,
            implied_vol: mkt_iv,
            source: "market".into(),
        },
        SmilePoint {
            log_moneyness: x,
            implied_vol: mdl_iv,
            source: model_name.into(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn call(k: f64, tau: f64) -> OptionContract {
        OptionContract::call(100.0, k, tau, 0.05).unwrap()
    }

    #[test]
    fn reference_value() {
        assert_relative_eq!(bs_price(&call(100.0, 1.0), 0.2), 10.450_584, epsilon = 5e-7);
    }

    #[test]
    fn limits() {
        let c = call(90.0, 1.0);
        let intrinsic = 100.0 - 90.0 * (-0.05f64).exp();
        assert_relative_eq!(bs_price(&c, 1e-8), intrinsic, epsilon = 1e-10);
        assert_relative_eq!(bs_price(&c, 50.0), 100.0, epsilon = 1e-6);
    }

    #[test]
    fn put_call_parity() {
        let c = call(110.0, 0.7);
        let p = OptionContract {
            kind: OptionKind::Put,
            ..c
        };
        let lhs = bs_price(&c, 0.3) - bs_price(&p, 0.3);
        assert_relative_eq!(lhs, 100.0 - c.discounted_strike(), epsilon = 1e-12);
    }

    #[test]
    fn round_trip_including_puts() {
        for kind in [OptionKind::Call, OptionKind::Put] {
            let c = OptionContract {
                kind,
                ..call(95.0, 0.5)
            };
            for vol in [0.05, 0.2, 1.0, 3.0] {
                let iv = implied_vol(&c, bs_price(&c, vol)).unwrap();
                assert!((iv - vol).abs() < 1e-8, "{kind:?} {vol} -> {iv}");
            }
        }
    }

    #[test]
    fn boundary_prices_have_no_solution() {
        let c = call(90.0, 1.0);
        let intrinsic = c.call_lower_bound();
        let err = implied_vol(&c, intrinsic).unwrap_err();
        assert!(err.to_string().contains("lower bound"), "{err}");
        let err = implied_vol(&c, 100.0).unwrap_err();
        assert!(err.to_string().contains("upper bound"), "{err}");
        assert!(implied_vol(&c, -1.0).is_err());
    }
}
