//! Contracts and model parameter records.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Call or put.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OptionKind {
    Call,
    Put,
}

impl OptionKind {
    pub fn code(self) -> &'static str {
        match self {
            OptionKind::Call => "C",
            OptionKind::Put => "P",
        }
    }
}

impl FromStr for OptionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "C" | "c" | "call" | "Call" => Ok(OptionKind::Call),
            "P" | "p" | "put" | "Put" => Ok(OptionKind::Put),
            other => Err(Error::Parse(format!("unknown option kind `{other}`"))),
        }
    }
}

/// A European option on a non-dividend-paying underlying.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionContract {
    pub spot: f64,
    pub strike: f64,
    /// Time to expiry in years.
    pub tau: f64,
    /// Continuously compounded risk-free rate.
    pub rate: f64,
    pub kind: OptionKind,
}

impl OptionContract {
    pub fn new(spot: f64, strike: f64, tau: f64, rate: f64, kind: OptionKind) -> Result<Self> {
        let c = Self {
            spot,
            strike,
            tau,
            rate,
            kind,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn call(spot: f64, strike: f64, tau: f64, rate: f64) -> Result<Self> {
        Self::new(spot, strike, tau, rate, OptionKind::Call)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.spot) {
            return Err(Error::InvalidContract(format!(
                "spot must be > 0, got {}",
                self.spot
            )));
        }
        if !ok(self.strike) {
            return Err(Error::InvalidContract(format!(
                "strike must be > 0, got {}",
                self.strike
            )));
        }
        if !ok(self.tau) {
            return Err(Error::InvalidContract(format!(
                "tau must be > 0, got {}",
                self.tau
            )));
        }
        if !self.rate.is_finite() {
            return Err(Error::InvalidContract("rate must be finite".into()));
        }
        Ok(())
    }

    /// Discounted strike `K e^{-r tau}`.
    pub fn discounted_strike(&self) -> f64 {
        self.strike * (-self.rate * self.tau).exp()
    }

    /// Lower no-arbitrage bound for the call.
    pub fn call_lower_bound(&self) -> f64 {
        (self.spot - self.discounted_strike()).max(0.0)
    }

    /// Converts a call value into the value of this contract via put-call parity.
    pub fn from_call_value(&self, call: f64) -> f64 {
        match self.kind {
            OptionKind::Call => call,
            OptionKind::Put => call - self.spot + self.discounted_strike(),
        }
    }

    /// Converts a value of this contract into the corresponding call value.
    pub fn to_call_value(&self, value: f64) -> f64 {
        match self.kind {
            OptionKind::Call => value,
            OptionKind::Put => value + self.spot - self.discounted_strike(),
        }
    }

    pub fn log_moneyness(&self) -> f64 {
        (self.strike / self.spot).ln()
    }
}

/// Heston square-root variance dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HestonParams {
    /// Mean-reversion rate of the variance.
    pub kappa: f64,
    /// Long-run variance.
    pub theta: f64,
    /// Volatility of variance.
    pub sigma: f64,
    /// Correlation between the price and variance drivers.
    pub rho: f64,
    /// Current (initial) variance.
    pub v0: f64,
}

/// Relative slack allowed when testing `2 kappa theta >= sigma^2`, which is
/// attained with equality when the calibration sits on the boundary.
const FELLER_SLACK: f64 = 1e-12;

impl HestonParams {
    pub fn new(kappa: f64, theta: f64, sigma: f64, rho: f64, v0: f64) -> Result<Self> {
        let p = Self {
            kappa,
            theta,
            sigma,
            rho,
            v0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("kappa", self.kappa),
            ("theta", self.theta),
            ("sigma", self.sigma),
            ("v0", self.v0),
        ] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be > 0, got {x}"
                )));
            }
        }
        if !(self.rho > -1.0 && self.rho < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rho must lie in (-1, 1), got {}",
                self.rho
            )));
        }
        if !self.feller_holds() {
            return Err(Error::InvalidParameter(format!(
                "Feller condition violated: 2*kappa*theta = {} < sigma^2 = {}",
                2.0 * self.kappa * self.theta,
                self.sigma * self.sigma
            )));
        }
        Ok(())
    }

    pub fn feller_holds(&self) -> bool {
        let s2 = self.sigma * self.sigma;
        2.0 * self.kappa * self.theta >= s2 * (1.0 - FELLER_SLACK)
    }
}

/// Heston variance plus compound Poisson jumps with log-uniform amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvjParams {
    pub heston: HestonParams,
    /// Jump intensity per year.
    pub lambda: f64,
    /// Lower bound of the log jump mark.
    pub m: f64,
    /// Upper bound of the log jump mark.
    pub n: f64,
}

impl SvjParams {
    pub fn new(heston: HestonParams, lambda: f64, m: f64, n: f64) -> Result<Self> {
        let p = Self {
            heston,
            lambda,
            m,
            n,
        };
        p.validate()?;
        Ok(p)
    }

    /// Jump-free parameters, equivalent to the plain Heston model.
    pub fn without_jumps(heston: HestonParams) -> Self {
        Self {
            heston,
            lambda: 0.0,
            m: 0.0,
            n: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.heston.validate()?;
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.m.is_finite() && self.n.is_finite()) {
            return Err(Error::InvalidParameter("jump bounds must be finite".into()));
        }
        // m == n is the point-mass limit of the mark density.
        if self.lambda > 0.0 && self.m > self.n {
            return Err(Error::InvalidParameter(format!(
                "jump bounds need m <= n when lambda > 0, got m = {}, n = {}",
                self.m, self.n
            )));
        }
        Ok(())
    }
}

/// Heston parameters plus the four first-order multiscale correction groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MsvParams {
    pub heston: HestonParams,
    pub v: [f64; 4],
}

impl MsvParams {
    pub fn new(heston: HestonParams, v: [f64; 4]) -> Result<Self> {
        let p = Self { heston, v };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.heston.validate()?;
        if self.v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "correction coefficients must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Same Heston part with every correction coefficient multiplied by `a`.
    pub fn scaled(&self, a: f64) -> Self {
        Self {
            heston: self.heston,
            v: self.v.map(|x| a * x),
        }
    }
}

/// Which of the three model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Heston,
    Svj,
    Msv,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Heston, ModelKind::Svj, ModelKind::Msv];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Heston => "heston",
            ModelKind::Svj => "svj",
            ModelKind::Msv => "msv",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "heston" => Ok(ModelKind::Heston),
            "svj" => Ok(ModelKind::Svj),
            "msv" => Ok(ModelKind::Msv),
            other => Err(Error::Parse(format!("unknown model `{other}`"))),
        }
    }
}

/// Parameters of any one of the supported models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelParams {
    Heston(HestonParams),
    Svj(SvjParams),
    Msv(MsvParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Heston(_) => ModelKind::Heston,
            ModelParams::Svj(_) => ModelKind::Svj,
            ModelParams::Msv(_) => ModelKind::Msv,
        }
    }

    pub fn heston(&self) -> &HestonParams {
        match self {
            ModelParams::Heston(h) => h,
            ModelParams::Svj(p) => &p.heston,
            ModelParams::Msv(p) => &p.heston,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Heston(p) => p.validate(),
            ModelParams::Svj(p) => p.validate(),
            ModelParams::Msv(p) => p.validate(),
        }
    }
}
