use chrono::NaiveDate;
use proptest::prelude::*;
use svcal_core::calibration::{kappa_to_zeta, mre, zeta_to_kappa};
use svcal_core::market_data::{filter_chain, ChainFilter, Provenance};
use svcal_core::model::OptionKind;
use svcal_core::{bs_price, implied_vol, OptionChain, OptionContract, OptionQuote};

fn quote(strike: f64, days: i64) -> OptionQuote {
    let quote_date = NaiveDate::from_ymd_opt(2024, 1, 2).unwrap();
    OptionQuote {
        quote_date,
        expiry_date: quote_date + chrono::Duration::days(days),
        tau: days as f64 / 365.0,
        strike,
        spot: 100.0,
        mid_price: 1.0,
        kind: OptionKind::Call,
        rate: 0.03,
    }
}

proptest! {
    #[test]
    fn implied_vol_round_trips(
        sigma in 0.05f64..1.0,
        strike in 70.0f64..130.0,
        tau in 0.05f64..2.0,
        put in any::<bool>(),
    ) {
        let kind = if put { OptionKind::Put } else { OptionKind::Call };
        let c = OptionContract::new(100.0, strike, tau, 0.03, kind).unwrap();
        let price = bs_price(&c, sigma);
        // Deep out-of-the-money prices carry too little vega to invert.
        let vega_floor = 100.0 * tau.sqrt() * 1e-4;
        prop_assume!(price > vega_floor);
        let iv = implied_vol(&c, price).unwrap();
        prop_assert!((bs_price(&c, iv) - price).abs() < 1e-8 * price.max(1.0));
    }

    #[test]
    fn filtering_twice_changes_nothing(
        rows in prop::collection::vec((50.0f64..150.0, 1i64..400), 0..40),
        lo in 0.6f64..1.0,
        width in 0.0f64..0.6,
        d_lo in 1i64..100,
        d_width in 0i64..200,
    ) {
        let chain = OptionChain::new(
            rows.iter().map(|&(k, d)| quote(k, d)).collect(),
            Provenance::Synthetic,
        );
        let f = ChainFilter {
            moneyness_lo: lo,
            moneyness_hi: lo + width,
            tau_lo_days: d_lo,
            tau_hi_days: d_lo + d_width,
        };
        let once = filter_chain(&chain, &f).unwrap();
        prop_assert_eq!(&filter_chain(&once, &f).unwrap(), &once);
        prop_assert!(once.len() <= chain.len());
    }

    #[test]
    fn mre_ignores_order_and_common_scale(
        pairs in prop::collection::vec((0.01f64..100.0, 0.01f64..100.0), 1..30),
        scale in 0.1f64..10.0,
        rotate in 0usize..30,
    ) {
        let (market, model): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        let base = mre(&market, &model).unwrap();
        let r = rotate % pairs.len();
        let mut rot = pairs.clone();
        rot.rotate_left(r);
        let (m2, p2): (Vec<f64>, Vec<f64>) = rot.into_iter().unzip();
        prop_assert!((mre(&m2, &p2).unwrap() - base).abs() <= 1e-12 * base.max(1.0));
        let ms: Vec<f64> = market.iter().map(|x| x * scale).collect();
        let ps: Vec<f64> = model.iter().map(|x| x * scale).collect();
        prop_assert!((mre(&ms, &ps).unwrap() - base).abs() <= 1e-12 * base.max(1.0));
        prop_assert!(mre(&market, &market).unwrap() == 0.0);
    }

    #[test]
    fn zeta_and_kappa_round_trip(
        zeta in 0.0f64..20.0,
        sigma in 0.001f64..2.0,
        theta in 1e-4f64..1.0,
    ) {
        let kappa = zeta_to_kappa(zeta, sigma, theta).unwrap();
        prop_assert!(kappa >= zeta);
        let back = kappa_to_zeta(kappa, sigma, theta);
        prop_assert!((back - zeta).abs() <= 1e-12 * kappa.max(1.0));
    }
}
