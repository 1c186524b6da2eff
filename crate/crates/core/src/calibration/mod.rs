//! Least-squares calibration of the three models to an option chain.
//!
//! The Heston part is parameterised by `zeta = kappa - sigma^2 / (2 theta)`,
//! so the box `zeta >= 0` keeps every evaluated point inside the Feller
//! region. Calibration is staged: Heston first, then SVJ and MSV started
//! from the Heston optimum.

pub mod lm;
pub mod mre;
pub mod report;

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::OptionChain;
use crate::model::{HestonParams, ModelKind, ModelParams, MsvParams, OptionContract, SvjParams};
use crate::pricer::{MsvBasis, Pricer};

pub use lm::{LmSettings, StopReason};
pub use mre::{mre, mre_by_bucket, BucketMre, MreReport};
pub use report::CalibrationReport;

/// `kappa = zeta + sigma^2 / (2 theta)`.
pub fn zeta_to_kappa(zeta: f64, sigma: f64, theta: f64) -> Result<f64> {
    if !(zeta >= 0.0 && zeta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "zeta must be >= 0, got {zeta}"
        )));
    }
    if !(sigma > 0.0 && theta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma and theta must be > 0, got sigma = {sigma}, theta = {theta}"
        )));
    }
    Ok(zeta + sigma * sigma / (2.0 * theta))
}

/// `zeta = kappa - sigma^2 / (2 theta)`; negative when Feller fails.
pub fn kappa_to_zeta(kappa: f64, sigma: f64, theta: f64) -> f64 {
    kappa - sigma * sigma / (2.0 * theta)
}

const HESTON_NAMES: [&str; 5] = ["zeta", "rho", "sigma", "theta", "v"];
const SVJ_NAMES: [&str; 3] = ["lambda", "m", "n"];
const MSV_NAMES: [&str; 4] = ["v1", "v2", "v3", "v4"];

const HESTON_INIT: [f64; 5] = [1.0, -0.5, 0.3, 0.04, 0.04];
const HESTON_BOUNDS: [(f64, f64); 5] = [
    (0.0, 20.0),
    (-0.999, 0.999),
    (0.001, 2.0),
    (1e-4, 1.0),
    (1e-4, 1.0),
];
const SVJ_INIT: [f64; 3] = [50.0, -0.01, 0.01];
const SVJ_BOUNDS: [(f64, f64); 3] = [(1.0, 100.0), (-1.0, 0.0), (0.0, 1.0)];
const MSV_INIT: [f64; 4] = [1e-4, 0.0, 0.0, 0.0];
const MSV_BOUND: f64 = 0.05;

/// Calibration coordinates of one model together with their box.
///
/// Heston: `(zeta, rho, sigma, theta, v)`; SVJ appends `(lambda, m, n)`;
/// MSV appends `(v1, v2, v3, v4)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub model: ModelKind,
    pub values: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
}

impl ParamVector {
    pub fn names(model: ModelKind) -> Vec<&'static str> {
        let mut names = HESTON_NAMES.to_vec();
        match model {
            ModelKind::Heston => {}
            ModelKind::Svj => names.extend(SVJ_NAMES),
            ModelKind::Msv => names.extend(MSV_NAMES),
        }
        names
    }

    /// Default Heston starting point and box.
    pub fn heston_default() -> Self {
        Self {
            model: ModelKind::Heston,
            values: HESTON_INIT.to_vec(),
            bounds: HESTON_BOUNDS.to_vec(),
        }
    }

    /// Heston coordinates of `h` with the default box. Fails if `h` lies
    /// outside it.
    pub fn heston_from(h: &HestonParams) -> Result<Self> {
        let p = Self {
            model: ModelKind::Heston,
            values: vec![
                kappa_to_zeta(h.kappa, h.sigma, h.theta),
                h.rho,
                h.sigma,
                h.theta,
                h.v0,
            ],
            bounds: HESTON_BOUNDS.to_vec(),
        };
        p.check_bounds()?;
        Ok(p)
    }

    fn extend(heston: &ParamVector, model: ModelKind, init: &[f64], bounds: &[(f64, f64)]) -> Self {
        let mut values = heston.values[..5].to_vec();
        let mut b = heston.bounds[..5].to_vec();
        values.extend_from_slice(init);
        b.extend_from_slice(bounds);
        Self {
            model,
            values,
            bounds: b,
        }
    }

    /// SVJ start `(M1*, 50, -0.01, 0.01)` with jump box `(1, -1, 0)`..`(100, 0, 1)`.
    pub fn svj_from_heston(heston: &ParamVector) -> Self {
        Self::extend(heston, ModelKind::Svj, &SVJ_INIT, &SVJ_BOUNDS)
    }

    /// MSV start `(M1*, 1e-4, 0, 0, 0)` with every coefficient in `[-0.05, 0.05]`.
    pub fn msv_from_heston(heston: &ParamVector) -> Self {
        Self::extend(
            heston,
            ModelKind::Msv,
            &MSV_INIT,
            &[(-MSV_BOUND, MSV_BOUND); 4],
        )
    }

    pub fn check_bounds(&self) -> Result<()> {
        let expected = Self::names(self.model).len();
        if self.values.len() != expected || self.bounds.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "{} needs {expected} values and bounds, got {} and {}",
                self.model,
                self.values.len(),
                self.bounds.len()
            )));
        }
        for ((name, &x), &(lo, hi)) in Self::names(self.model)
            .into_iter()
            .zip(&self.values)
            .zip(&self.bounds)
        {
            if !(x >= lo && x <= hi) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {x} outside [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    pub fn kappa(&self) -> Result<f64> {
        zeta_to_kappa(self.values[0], self.values[2], self.values[3])
    }

    fn heston_at(values: &[f64]) -> Result<HestonParams> {
        let kappa = zeta_to_kappa(values[0], values[2], values[3])?;
        HestonParams::new(kappa, values[3], values[2], values[1], values[4])
    }

    /// Model parameters at `values` (same layout as `self.values`).
    fn params_at(&self, values: &[f64]) -> Result<ModelParams> {
        let h = Self::heston_at(values)?;
        Ok(match self.model {
            ModelKind::Heston => ModelParams::Heston(h),
            ModelKind::Svj => ModelParams::Svj(SvjParams::new(h, values[5], values[6], values[7])?),
            ModelKind::Msv => ModelParams::Msv(MsvParams::new(
                h,
                [values[5], values[6], values[7], values[8]],
            )?),
        })
    }

    pub fn to_params(&self) -> Result<ModelParams> {
        self.params_at(&self.values)
    }

    /// `(name, value)` pairs.
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        Self::names(self.model)
            .into_iter()
            .zip(self.values.iter().copied())
            .collect()
    }
}

/// Sum of squared price residuals and the residuals `C_mkt - C_model`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub value: f64,
    pub residuals: Vec<f64>,
}

fn chain_contracts(chain: &OptionChain) -> Result<Vec<OptionContract>> {
    if chain.is_empty() {
        return Err(Error::EmptyChain(
            "calibration needs at least one quote".into(),
        ));
    }
    chain
        .quotes
        .iter()
        .enumerate()
        .map(|(index, q)| {
            q.contract().map_err(|e| Error::QuotePricing {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Model prices of a fixed contract list, with a small cache of MSV bases
/// keyed by the Heston coordinates so that moving only the correction
/// coefficients needs no new quadrature.
struct Evaluator<'a> {
    model: ModelKind,
    contracts: Vec<OptionContract>,
    pricer: &'a Pricer,
    cache: RefCell<Vec<([u64; 5], MsvBasis)>>,
}

const BASIS_CACHE: usize = 8;

impl<'a> Evaluator<'a> {
    fn new(model: ModelKind, chain: &OptionChain, pricer: &'a Pricer) -> Result<Self> {
        Ok(Self {
            model,
            contracts: chain_contracts(chain)?,
            pricer,
            cache: RefCell::new(Vec::new()),
        })
    }

    fn prices(&self, pv: &ParamVector, values: &[f64]) -> Result<Vec<f64>> {
        let params = pv.params_at(values)?;
        match params {
            ModelParams::Msv(p) => {
                let key: [u64; 5] = std::array::from_fn(|i| values[i].to_bits());
                if let Some((_, b)) = self.cache.borrow().iter().find(|(k, _)| *k == key) {
                    return Ok(b.prices(&p.v));
                }
                let basis = self.pricer.msv_basis(&p.heston, &self.contracts)?;
                let out = basis.prices(&p.v);
                let mut cache = self.cache.borrow_mut();
                if cache.len() == BASIS_CACHE {
                    cache.remove(0);
                }
                cache.push((key, basis));
                Ok(out)
            }
            _ => self.pricer.price_contracts(&params, &self.contracts),
        }
    }

    fn residuals(&self, chain: &OptionChain, pv: &ParamVector, values: &[f64]) -> Result<Vec<f64>> {
        debug_assert_eq!(self.model, pv.model);
        Ok(chain
            .quotes
            .iter()
            .zip(self.prices(pv, values)?)
            .map(|(q, m)| q.mid_price - m)
            .collect())
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Pooled squared-error objective over every quote of the chain.
pub fn objective(params: &ParamVector, chain: &OptionChain, pricer: &Pricer) -> Result<Objective> {
    params.check_bounds()?;
    let ev = Evaluator::new(params.model, chain, pricer)?;
    let residuals = ev.residuals(chain, params, &params.values)?;
    Ok(Objective {
        value: sum_sq(&residuals),
        residuals,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub params: ParamVector,
    /// Sum of squared price residuals.
    pub objective: f64,
    pub init_objective: f64,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// `zeta + sigma^2 / (2 theta)` at the optimum.
    pub kappa: f64,
    /// Objective after each accepted step.
    pub trace: Vec<f64>,
}

impl CalibrationResult {
    pub fn model_params(&self) -> Result<ModelParams> {
        self.params.to_params()
    }
}

/// Minimises the pooled objective from `init` inside its box.
pub fn calibrate(
    chain: &OptionChain,
    init: &ParamVector,
    pricer: &Pricer,
    settings: &LmSettings,
) -> Result<CalibrationResult> {
    init.check_bounds()?;
    let ev = Evaluator::new(init.model, chain, pricer)?;
    let f = |x: &[f64]| ev.residuals(chain, init, x);
    let out = lm::minimize(f, &init.values, &init.bounds, settings)?;
    let params = ParamVector {
        values: out.x,
        ..init.clone()
    };
    let kappa = params.kappa()?;
    log::info!(
        "{} calibration: objective {:e} -> {:e} in {} iterations ({:?})",
        init.model,
        out.trace[0],
        out.cost,
        out.iterations,
        out.reason
    );
    Ok(CalibrationResult {
        params,
        objective: out.cost,
        init_objective: out.trace[0],
        residuals: out.residuals,
        iterations: out.iterations,
        evaluations: out.evaluations,
        converged: out.reason.converged(),
        stop_reason: out.reason,
        kappa,
        trace: out.trace,
    })
}

/// Results of the three calibration stages.
#[derive(Debug)]
pub struct StagedCalibration {
    pub heston: CalibrationResult,
    pub svj: Result<CalibrationResult>,
    pub msv: Result<CalibrationResult>,
}

/// Heston first, then SVJ and MSV from the Heston optimum (best-so-far when
/// the Heston stage did not converge).
pub fn staged_calibrate(
    chain: &OptionChain,
    pricer: &Pricer,
    settings: &LmSettings,
) -> Result<StagedCalibration> {
    staged_calibrate_from(chain, &ParamVector::heston_default(), pricer, settings)
}

/// [`staged_calibrate`] with a custom Heston starting point.
pub fn staged_calibrate_from(
    chain: &OptionChain,
    heston_init: &ParamVector,
    pricer: &Pricer,
    settings: &LmSettings,
) -> Result<StagedCalibration> {
    if heston_init.model != ModelKind::Heston {
        return Err(Error::InvalidParameter(
            "staged calibration starts from Heston".into(),
        ));
    }
    log::info!("stage 1: heston");
    let heston = calibrate(chain, heston_init, pricer, settings)?;
    if !heston.converged {
        log::warn!("heston stage did not converge; later stages start from its best point");
    }
    log::info!("stage 2: svj and msv from the heston optimum");
    let (svj, msv) = rayon::join(
        || {
            calibrate(
                chain,
                &ParamVector::svj_from_heston(&heston.params),
                pricer,
                settings,
            )
        },
        || {
            calibrate(
                chain,
                &ParamVector::msv_from_heston(&heston.params),
                pricer,
                settings,
            )
        },
    );
    if let Err(e) = &svj {
        log::error!("svj stage failed: {e}");
    }
    if let Err(e) = &msv {
        log::error!("msv stage failed: {e}");
    }
    Ok(StagedCalibration { heston, svj, msv })
}
