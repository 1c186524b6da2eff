//! European option pricing and calibration under three stochastic volatility
//! models: Heston, Heston with log-uniform price jumps (SVJ), and a
//! first-order multiscale correction of Heston (MSV).

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod error;
pub mod implied_vol;
pub mod market_data;
pub mod model;
pub mod msv;
pub mod oracle;
pub mod params_io;
pub mod pricer;
pub mod pricing;
pub mod quadrature;
pub mod validation;

pub use calibration::{
    calibrate, objective, staged_calibrate, CalibrationResult, LmSettings, MreReport, ParamVector,
    StagedCalibration,
};
pub use error::{Error, Result};
pub use implied_vol::{bs_price, implied_vol, smile_curve, SmileCurve, SmilePoint};
pub use market_data::{OptionChain, OptionQuote};
pub use model::{
    HestonParams, ModelKind, ModelParams, MsvParams, OptionContract, OptionKind, SvjParams,
};
pub use msv::{price_msv, MsvPrice, NestedQuadConfig};
pub use oracle::{riccati_numeric, simulate_svj, McConfig, McEstimate};
pub use params_io::{format_params, load_params, parse_params};
pub use pricer::{MsvBasis, Pricer};
pub use pricing::{price_heston, price_svj, Prob};
pub use quadrature::QuadratureConfig;
