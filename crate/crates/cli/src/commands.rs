use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use svcal_core::calibration::{mre_by_bucket, CalibrationReport, MreReport};
use svcal_core::market_data::{
    filter_chain, load_chain, save_chain, synth_chain, ChainFilter, SynthSpec,
};
use svcal_core::model::{
    HestonParams, ModelKind, ModelParams, MsvParams, OptionContract, OptionKind, SvjParams,
};
use svcal_core::validation::{run_all, ValidationConfig};
use svcal_core::{
    calibrate, format_params, implied_vol, load_params, smile_curve, LmSettings, McConfig,
    NestedQuadConfig, OptionChain, ParamVector, Pricer, QuadratureConfig,
};

use crate::exit::{config, ChecksFailed};
use crate::{CalibrateArgs, Cli, Command, Common, FilterArgs, GridArgs, SynthArgs, ValidateArgs};

pub fn run(cli: &Cli) -> Result<()> {
    let c = &cli.common;
    fs::create_dir_all(&c.output_dir)
        .with_context(|| format!("creating {}", c.output_dir.display()))?;
    match &cli.command {
        Command::Price(g) => price(c, g),
        Command::Calibrate(a) => calibrate_cmd(c, a),
        Command::Smile(a) => smile(c, a),
        Command::Mre(a) => mre(c, a),
        Command::Validate(a) => validate(c, a),
        Command::Synth(a) => synth(c, a),
    }
}

fn pricer(c: &Common) -> Result<Pricer> {
    let mut quad = QuadratureConfig::default();
    if let Some(x) = c.phi_max {
        quad.phi_max = x;
    }
    if let Some(x) = c.abs_tol {
        quad.abs_tol = x;
    }
    let mut nested = NestedQuadConfig::default();
    if let Some(n) = c.inner_nodes {
        nested.inner_nodes = n;
    }
    if let Some(n) = c.outer_nodes {
        nested.outer_nodes = n;
    }
    quad.validate()?;
    nested.validate()?;
    Ok(Pricer::new(quad, nested))
}

fn mc_config(c: &Common) -> McConfig {
    let mut mc = McConfig::default();
    if let Some(p) = c.paths {
        mc.paths = p;
    }
    if let Some(s) = c.steps_per_year {
        mc.steps_per_year = s;
    }
    if let Some(s) = c.seed {
        mc.seed = s;
    }
    mc
}

fn out_path(c: &Common, name: &str) -> PathBuf {
    c.output_dir.join(name)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn standard_heston() -> HestonParams {
    HestonParams::new(2.0, 0.04, 0.3, -0.7, 0.04).expect("valid defaults")
}

fn load_param_files(c: &Common) -> Result<Vec<ModelParams>> {
    c.params
        .iter()
        .map(|p| load_params(p).with_context(|| format!("parameter file {}", p.display())))
        .collect()
}

/// Parameters for `kind`: the file of that model when given, otherwise the
/// first file widened with zero jumps or a zero correction, or narrowed to
/// its Heston part.
fn params_for(kind: ModelKind, files: &[ModelParams]) -> Result<ModelParams> {
    if let Some(p) = files.iter().find(|p| p.kind() == kind) {
        return Ok(*p);
    }
    let base = files
        .first()
        .ok_or_else(|| config(format!("no parameters for {kind}; pass --params")))?;
    let h = *base.heston();
    log::info!("{kind} parameters taken from the {} file", base.kind());
    Ok(match kind {
        ModelKind::Heston => ModelParams::Heston(h),
        ModelKind::Svj => ModelParams::Svj(SvjParams::without_jumps(h)),
        ModelKind::Msv => ModelParams::Msv(MsvParams::new(h, [0.0; 4])?),
    })
}

fn contract_grid(g: &GridArgs, rate: f64) -> Result<Vec<OptionContract>> {
    if g.strikes.is_empty() || g.maturities.is_empty() {
        return Err(config("empty strike or maturity grid"));
    }
    let mut out = Vec::new();
    for &days in &g.maturities {
        for &k in &g.strikes {
            let c = OptionContract::new(g.spot, k, days as f64 / 365.0, rate, OptionKind::Call)
                .map_err(|e| config(format!("grid point K = {k}, {days} days: {e}")))?;
            out.push(c);
        }
    }
    Ok(out)
}

fn read_chain_file(c: &Common) -> Result<OptionChain> {
    let path = c
        .input
        .as_ref()
        .ok_or_else(|| config("--input is required"))?;
    let loaded = load_chain(path, c.rate.unwrap_or(f64::NAN))
        .with_context(|| format!("loading {}", path.display()))?;
    for d in &loaded.diagnostics {
        log::warn!("{}:{}: {}", path.display(), d.line, d.reason);
    }
    if !loaded.chain.rate_column && c.rate.is_none() {
        return Err(config("chain has no rate column; pass --rate"));
    }
    Ok(loaded.chain)
}

fn filtered_chain(c: &Common, f: &FilterArgs) -> Result<OptionChain> {
    let chain = read_chain_file(c)?;
    let filter = ChainFilter {
        moneyness_lo: f.moneyness_lo,
        moneyness_hi: f.moneyness_hi,
        tau_lo_days: f.tau_lo,
        tau_hi_days: f.tau_hi,
    };
    let kept = filter_chain(&chain, &filter)?;
    log::info!("{} of {} quotes inside the window", kept.len(), chain.len());
    if kept.is_empty() {
        return Err(config("no quotes left after filtering"));
    }
    Ok(kept)
}

fn price(c: &Common, g: &GridArgs) -> Result<()> {
    let pricer = pricer(c)?;
    let files = load_param_files(c)?;
    let contracts = match &c.input {
        Some(_) => read_chain_file(c)?
            .quotes
            .iter()
            .map(|q| q.contract())
            .collect::<svcal_core::Result<Vec<_>>>()?,
        None => contract_grid(g, c.rate.unwrap_or(0.0))?,
    };
    let mut csv = String::from("strike,tau,kind,model,price\n");
    for kind in c.kinds() {
        let params = params_for(kind, &files)?;
        let prices = pricer
            .price_contracts(&params, &contracts)
            .with_context(|| format!("{kind} pricing"))?;
        for (k, p) in contracts.iter().zip(prices) {
            csv += &format!("{},{},{},{kind},{p}\n", k.strike, k.tau, k.kind.code());
        }
    }
    write(&out_path(c, "prices.csv"), &csv)
}

fn lm_settings(a: &CalibrateArgs) -> LmSettings {
    LmSettings {
        max_iterations: a.max_iter,
        ..LmSettings::default()
    }
}

/// Calibrated parameters of each selected model. The Heston stage always
/// runs; its failure is fatal, later stage failures are returned.
fn calibrated(
    c: &Common,
    a: &CalibrateArgs,
    chain: &OptionChain,
    pricer: &Pricer,
) -> Result<Vec<(ModelKind, svcal_core::Result<svcal_core::CalibrationResult>)>> {
    let settings = lm_settings(a);
    let files = load_param_files(c)?;
    let init = match files.first() {
        Some(p) => ParamVector::heston_from(p.heston())?,
        None => ParamVector::heston_default(),
    };
    log::info!("stage 1: heston");
    let heston = calibrate(chain, &init, pricer, &settings).context("heston stage")?;
    let mut out = Vec::new();
    for kind in c.kinds() {
        let r = match kind {
            ModelKind::Heston => Ok(heston.clone()),
            ModelKind::Svj => {
                log::info!("stage 2: svj");
                calibrate(
                    chain,
                    &ParamVector::svj_from_heston(&heston.params),
                    pricer,
                    &settings,
                )
            }
            ModelKind::Msv => {
                log::info!("stage 2: msv");
                calibrate(
                    chain,
                    &ParamVector::msv_from_heston(&heston.params),
                    pricer,
                    &settings,
                )
            }
        };
        if let Err(e) = &r {
            log::error!("{kind} stage failed: {e}");
        }
        out.push((kind, r));
    }
    Ok(out)
}

fn calibrate_cmd(c: &Common, a: &CalibrateArgs) -> Result<()> {
    let pricer = pricer(c)?;
    let chain = filtered_chain(c, &a.filter)?;
    let results = calibrated(c, a, &chain, &pricer)?;
    let mut summary = Vec::new();
    for (kind, r) in &results {
        let report = match r {
            Ok(r) => {
                let params = r.model_params()?;
                let prices = pricer.price_chain(&params, &chain)?;
                write(
                    &out_path(c, &format!("{kind}.params")),
                    &format_params(&params),
                )?;
                CalibrationReport::from_result(r, mre_by_bucket(&chain, &prices)?)
            }
            Err(e) => CalibrationReport::failed(*kind, e),
        };
        write(
            &out_path(c, &format!("{kind}_report.txt")),
            &report.to_key_value(),
        )?;
        summary.push(report);
    }
    write(
        &out_path(c, "calibration.json"),
        &serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(())
}

/// Parameter files when given, otherwise a fresh calibration.
fn model_params(
    c: &Common,
    a: &CalibrateArgs,
    chain: &OptionChain,
    pricer: &Pricer,
) -> Result<Vec<(ModelKind, ModelParams)>> {
    if !c.params.is_empty() {
        let files = load_param_files(c)?;
        return c
            .kinds()
            .into_iter()
            .map(|k| Ok((k, params_for(k, &files)?)))
            .collect();
    }
    log::info!("no --params given; calibrating first");
    let mut out = Vec::new();
    for (kind, r) in calibrated(c, a, chain, pricer)? {
        match r {
            Ok(r) => out.push((kind, r.model_params()?)),
            Err(e) => log::warn!("{kind} left out: {e}"),
        }
    }
    Ok(out)
}

fn smile(c: &Common, a: &CalibrateArgs) -> Result<()> {
    let pricer = pricer(c)?;
    let chain = filtered_chain(c, &a.filter)?;
    let models = model_params(c, a, &chain, &pricer)?;
    // Per model, quote index -> implied vol.
    let mut columns: Vec<(ModelKind, BTreeMap<usize, f64>)> = Vec::new();
    for (kind, params) in &models {
        let prices: Vec<svcal_core::Result<f64>> = match pricer.price_chain(params, &chain) {
            Ok(p) => p.into_iter().map(Ok).collect(),
            Err(_) => chain
                .quotes
                .iter()
                .map(|q| q.contract().and_then(|k| pricer.price(params, &k)))
                .collect(),
        };
        let curve = smile_curve(&chain, &prices, kind.name());
        for (i, why) in &curve.failures {
            log::warn!("{kind}: quote {i} has no implied vol: {why}");
        }
        let ivs = curve
            .pairs
            .iter()
            .map(|(i, _, m)| (*i, m.implied_vol))
            .collect();
        columns.push((*kind, ivs));
    }

    let mut by_days: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, q) in chain.quotes.iter().enumerate() {
        by_days.entry(q.days_to_expiry()).or_default().push(i);
    }
    for (days, idx) in by_days {
        let mut csv = String::from("strike,log_moneyness,market_iv");
        for (kind, _) in &columns {
            csv += &format!(",{kind}_iv");
        }
        csv.push('\n');
        for i in idx {
            let q = &chain.quotes[i];
            let k = q.contract()?;
            let market = match implied_vol(&k, q.mid_price) {
                Ok(v) => v,
                Err(e) => {
                    log::warn!("quote {i} market price has no implied vol: {e}");
                    continue;
                }
            };
            csv += &format!("{},{},{market}", q.strike, k.log_moneyness());
            for (_, ivs) in &columns {
                match ivs.get(&i) {
                    Some(v) => csv += &format!(",{v}"),
                    None => csv.push(','),
                }
            }
            csv.push('\n');
        }
        write(&out_path(c, &format!("smile_{days}d.csv")), &csv)?;
    }
    Ok(())
}

fn mre(c: &Common, a: &CalibrateArgs) -> Result<()> {
    let pricer = pricer(c)?;
    let chain = filtered_chain(c, &a.filter)?;
    let mut cols = Vec::new();
    for (kind, params) in model_params(c, a, &chain, &pricer)? {
        let prices = pricer
            .price_chain(&params, &chain)
            .with_context(|| format!("{kind} pricing"))?;
        cols.push((kind.name().to_string(), prices));
    }
    let report = MreReport::new(&chain, &cols)?;
    write(&out_path(c, "mre.csv"), &report.to_csv())?;
    write(&out_path(c, "mre.txt"), &report.to_table())
}

fn validate(c: &Common, a: &ValidateArgs) -> Result<()> {
    if !(a.tolerance_scale >= 0.0) {
        return Err(config("tolerance scale must be >= 0"));
    }
    let cfg = ValidationConfig {
        mc: mc_config(c),
        pricer: pricer(c)?,
        tolerance_scale: a.tolerance_scale,
    };
    let checks = run_all(&cfg);
    let text: String = checks.iter().map(|k| k.line() + "\n").collect();
    write(&out_path(c, "validation.txt"), &text)?;
    write(
        &out_path(c, "validation.json"),
        &serde_json::to_string_pretty(&checks)?,
    )?;
    let failed: Vec<String> = checks
        .iter()
        .filter(|k| !k.passed)
        .map(|k| k.name.clone())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(ChecksFailed(failed).into())
    }
}

fn synth(c: &Common, a: &SynthArgs) -> Result<()> {
    let kinds = c.model.unwrap_or(crate::ModelSel::Heston).kinds();
    let [kind] = kinds.as_slice() else {
        return Err(config("synth needs a single --model"));
    };
    let params = if c.params.is_empty() {
        if *kind != ModelKind::Heston {
            return Err(config(format!("synth --model {kind} needs --params")));
        }
        ModelParams::Heston(standard_heston())
    } else {
        params_for(*kind, &load_param_files(c)?)?
    };
    let mut spec = SynthSpec::new(
        a.grid.spot,
        c.rate.unwrap_or(0.03),
        a.grid.strikes.clone(),
        a.grid.maturities.clone(),
    );
    spec.noise_sd = a.noise_sd;
    spec.seed = c.seed.unwrap_or(0);
    let chain = synth_chain(&params, &spec, &pricer(c)?)?;
    let path = out_path(c, &a.output);
    save_chain(&chain, &path).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {} quotes to {}", chain.len(), path.display());
    Ok(())
}
