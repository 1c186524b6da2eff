mod common;

use common::standard_heston;
use svcal_core::market_data::{synth_chain, SynthSpec};
use svcal_core::{
    bs_price, implied_vol, price_heston, smile_curve, ModelParams, OptionContract, Pricer,
    QuadratureConfig,
};

fn chain(strikes: Vec<f64>, days: Vec<i64>) -> svcal_core::OptionChain {
    let spec = SynthSpec::new(100.0, 0.03, strikes, days);
    synth_chain(
        &ModelParams::Heston(standard_heston()),
        &spec,
        &Pricer::default(),
    )
    .unwrap()
}

#[test]
fn same_model_gives_identical_curves() {
    let chain = chain(vec![85.0, 95.0, 100.0, 105.0, 115.0], vec![30, 90, 180]);
    let prices = Pricer::default()
        .price_chain(&ModelParams::Heston(standard_heston()), &chain)
        .unwrap();
    let curve = smile_curve(
        &chain,
        &prices.into_iter().map(Ok).collect::<Vec<_>>(),
        "heston",
    );
    assert!(curve.failures.is_empty(), "{:?}", curve.failures);
    assert_eq!(curve.pairs.len(), chain.len());
    for (_, mkt, mdl) in &curve.pairs {
        assert!((mkt.implied_vol - mdl.implied_vol).abs() < 1e-6);
        assert_eq!(mdl.source, "heston");
    }
}

#[test]
fn negative_correlation_skews_left() {
    let h = standard_heston();
    let q = QuadratureConfig::default();
    let iv = |k: f64| {
        let c = OptionContract::call(100.0, k, 0.25, 0.03).unwrap();
        implied_vol(&c, price_heston(&c, &h, &q).unwrap()).unwrap()
    };
    let vols: Vec<f64> = [80.0, 90.0, 100.0, 110.0, 120.0]
        .into_iter()
        .map(iv)
        .collect();
    assert!(vols[0] > vols[4], "{vols:?}");
    assert!(vols.windows(2).all(|w| w[1] < w[0]), "{vols:?}");
}

#[test]
fn at_the_money_vol_is_plausible_and_reprices() {
    let h = standard_heston();
    let c = OptionContract::call(100.0, 100.0, 0.5, 0.03).unwrap();
    let p = price_heston(&c, &h, &QuadratureConfig::default()).unwrap();
    let iv = implied_vol(&c, p).unwrap();
    let root = h.theta.sqrt();
    assert!(iv > 0.5 * root && iv < 2.0 * root, "{iv}");
    assert!((bs_price(&c, iv) - p).abs() < 1e-8);
}

#[test]
fn single_quote_gives_single_pair() {
    let chain = chain(vec![100.0], vec![60]);
    let curve = smile_curve(&chain, &[Ok(chain.quotes[0].mid_price)], "heston");
    assert_eq!(curve.pairs.len(), 1);
    let bad = smile_curve(&chain, &[Ok(0.0)], "heston");
    assert!(bad.pairs.is_empty() && bad.failures.len() == 1);
}
