//! Oracle grids behind the `validate` command: Riccati equivalence, Monte
//! Carlo consistency and the model reductions.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{HestonParams, ModelParams, MsvParams, OptionContract, OptionKind, SvjParams};
use crate::oracle::{riccati_numeric, simulate_svj_grid, McConfig};
use crate::pricer::Pricer;
use crate::pricing::{cf_terms, Prob};

/// Outcome of one check. `measured` is compared against `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seconds: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &str, measured: f64, tolerance: f64, start: Instant, detail: String) -> Self {
        Self {
            name: name.to_string(),
            measured,
            tolerance,
            passed: measured <= tolerance,
            seconds: start.elapsed().as_secs_f64(),
            detail,
        }
    }

    fn errored(name: &str, start: Instant, e: impl ToString) -> Self {
        Self {
            name: name.to_string(),
            measured: f64::NAN,
            tolerance: f64::NAN,
            passed: false,
            seconds: start.elapsed().as_secs_f64(),
            detail: e.to_string(),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: measured {:.3e} tolerance {:.3e} ({:.1} s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance,
            self.seconds,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub mc: McConfig,
    pub pricer: Pricer,
    /// Multiplies every tolerance. Values below one tighten the checks.
    pub tolerance_scale: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            mc: McConfig::default(),
            pricer: Pricer::default(),
            tolerance_scale: 1.0,
        }
    }
}

pub const RICCATI_TOL: f64 = 1e-8;
pub const MC_Z_MAX: f64 = 3.0;
pub const REDUCTION_TOL: f64 = 1e-10;

/// `(params, tau)` sets of the Riccati grid.
pub fn riccati_sets() -> Vec<(HestonParams, f64)> {
    vec![
        (
            HestonParams::new(2.0, 0.04, 0.3, -0.7, 0.04).expect("valid"),
            0.5,
        ),
        (
            HestonParams::new(1.5, 0.09, 0.5, -0.9, 0.09).expect("valid"),
            1.0,
        ),
        (
            HestonParams::new(5.0, 0.02, 0.4, 0.3, 0.02).expect("valid"),
            5.0,
        ),
    ]
}

/// 50 log-spaced frequencies on `[0.01, 100]`.
pub fn riccati_phis() -> Vec<f64> {
    (0..50)
        .map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / 49.0))
        .collect()
}

/// Largest absolute gap between closed-form and integrated exponents.
pub fn riccati_grid(cfg: &ValidationConfig) -> Check {
    let start = Instant::now();
    let run = || -> Result<(f64, String)> {
        let mut worst = (0.0, String::new());
        for (set, (p, tau)) in riccati_sets().iter().enumerate() {
            for &phi in &riccati_phis() {
                for j in Prob::BOTH {
                    let t = cf_terms(j, phi, *tau, 0.0, p)?;
                    let (a1, a2) = riccati_numeric(j, phi, *tau, p)?;
                    let err = [
                        (t.a1prime - a1).re.abs(),
                        (t.a1prime - a1).im.abs(),
                        (t.a2 - a2).re.abs(),
                        (t.a2 - a2).im.abs(),
                    ]
                    .into_iter()
                    .fold(0.0, f64::max);
                    if err > worst.0 || err.is_nan() {
                        worst = (err, format!("worst at set {} phi {phi:.4} {j:?}", set + 1));
                    }
                }
            }
        }
        Ok(worst)
    };
    match run() {
        Ok((err, detail)) => Check::new(
            "riccati equivalence",
            err,
            RICCATI_TOL * cfg.tolerance_scale,
            start,
            detail,
        ),
        Err(e) => Check::errored("riccati equivalence", start, e),
    }
}

pub const MC_STRIKES: [f64; 5] = [80.0, 90.0, 100.0, 110.0, 120.0];
pub const MC_DAYS: [f64; 3] = [30.0, 90.0, 180.0];

/// Largest `|z|` between Fourier and simulated prices on the 5 x 3 grid
/// for a jump-free and a jump parameter set.
pub fn mc_consistency(cfg: &ValidationConfig) -> Check {
    let start = Instant::now();
    let run = || -> Result<(f64, String)> {
        let h = HestonParams::new(2.0, 0.04, 0.3, -0.7, 0.04)?;
        let sets = [
            SvjParams::without_jumps(h),
            SvjParams::new(h, 20.0, -0.05, 0.05)?,
        ];
        let taus: Vec<f64> = MC_DAYS.iter().map(|d| d / 365.0).collect();
        let mut worst = (0.0, String::new());
        let (mut used, mut skipped) = (0usize, 0usize);
        for p in &sets {
            let grid = simulate_svj_grid(100.0, 0.03, &taus, &MC_STRIKES, p, &cfg.mc)?;
            let model = if p.lambda == 0.0 {
                ModelParams::Heston(p.heston)
            } else {
                ModelParams::Svj(*p)
            };
            for (i, &tau) in taus.iter().enumerate() {
                let fourier = cfg
                    .pricer
                    .call_slice(&model, 100.0, 0.03, tau, &MC_STRIKES)?;
                for (k, f) in fourier.iter().enumerate() {
                    // With too few paths no path may reach a far strike; a
                    // constant sample says nothing about the price.
                    if grid.calls[i][k].std_error == 0.0 {
                        skipped += 1;
                        continue;
                    }
                    used += 1;
                    let z = grid.calls[i][k].z_score(*f);
                    if z > worst.0 || z.is_nan() {
                        worst = (
                            z,
                            format!(
                                "worst at lambda {} tau {:.0}d K {}",
                                p.lambda, MC_DAYS[i], MC_STRIKES[k]
                            ),
                        );
                    }
                }
            }
        }
        if used == 0 {
            return Ok((
                f64::INFINITY,
                "no grid point had a nonzero standard error".into(),
            ));
        }
        if skipped > 0 {
            worst.1 += &format!(", {skipped} unresolved points skipped");
        }
        Ok(worst)
    };
    match run() {
        Ok((z, detail)) => Check::new(
            "monte carlo consistency",
            z,
            MC_Z_MAX * cfg.tolerance_scale,
            start,
            format!("{detail}, {} paths", cfg.mc.paths),
        ),
        Err(e) => Check::errored("monte carlo consistency", start, e),
    }
}

/// 20 contracts: 5 strikes x 4 maturities, calls and puts alternating.
pub fn reduction_contracts() -> Vec<OptionContract> {
    let mut out = Vec::new();
    for (i, &days) in [30.0, 90.0, 180.0, 365.0].iter().enumerate() {
        for (k, &strike) in MC_STRIKES.iter().enumerate() {
            let kind = if (i + k) % 2 == 0 {
                OptionKind::Call
            } else {
                OptionKind::Put
            };
            out.push(
                OptionContract::new(100.0, strike, days / 365.0, 0.03, kind)
                    .expect("valid contract"),
            );
        }
    }
    out
}

/// Largest gap of the jump-free and zero-correction models against Heston.
pub fn reductions(cfg: &ValidationConfig) -> Check {
    let start = Instant::now();
    let run = || -> Result<f64> {
        let h = HestonParams::new(2.0, 0.04, 0.3, -0.7, 0.04)?;
        let contracts = reduction_contracts();
        let heston = cfg
            .pricer
            .price_contracts(&ModelParams::Heston(h), &contracts)?;
        let svj = cfg.pricer.price_contracts(
            &ModelParams::Svj(SvjParams::new(h, 0.0, -0.05, 0.05)?),
            &contracts,
        )?;
        let msv = cfg
            .pricer
            .price_contracts(&ModelParams::Msv(MsvParams::new(h, [0.0; 4])?), &contracts)?;
        Ok(heston
            .iter()
            .zip(svj.iter().zip(&msv))
            .map(|(a, (b, c))| (a - b).abs().max((a - c).abs()))
            .fold(0.0, f64::max))
    };
    match run() {
        Ok(err) => Check::new(
            "model reductions",
            err,
            REDUCTION_TOL * cfg.tolerance_scale,
            start,
            "svj(lambda = 0) and msv(V = 0) against heston on 20 contracts".into(),
        ),
        Err(e) => Check::errored("model reductions", start, e),
    }
}

/// Every check, cheapest first.
pub fn run_all(cfg: &ValidationConfig) -> Vec<Check> {
    let mut out = Vec::new();
    for check in [riccati_grid, reductions, mc_consistency] {
        let c = check(cfg);
        log::info!("{}", c.line());
        out.push(c);
    }
    out
}
