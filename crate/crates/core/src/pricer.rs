//! Model-agnostic pricing of contracts and whole chains.
//!
//! Quotes sharing spot, rate and maturity are priced together so that each
//! characteristic-function evaluation serves every strike of the slice.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::OptionChain;
use crate::model::{HestonParams, ModelParams, OptionContract, SvjParams};
use crate::msv::{
    call_prices_msv, combine, corrected_call, correction_basis_slice, NestedQuadConfig,
};
use crate::pricing::call_prices_svj;
use crate::quadrature::QuadratureConfig;

/// Quadrature settings shared by every model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Pricer {
    pub quad: QuadratureConfig,
    pub nested: NestedQuadConfig,
}

/// Heston calls and unit corrections of one slice.
type SliceBasis = (Vec<f64>, Vec<[f64; 4]>);

/// Contracts sharing everything but the strike.
#[derive(Debug, Clone)]
struct Slice {
    spot: f64,
    rate: f64,
    tau: f64,
    members: Vec<usize>,
}

fn slices(contracts: &[OptionContract]) -> Vec<Slice> {
    let mut map: BTreeMap<(u64, u64, u64), Slice> = BTreeMap::new();
    for (i, c) in contracts.iter().enumerate() {
        map.entry((c.spot.to_bits(), c.rate.to_bits(), c.tau.to_bits()))
            .or_insert_with(|| Slice {
                spot: c.spot,
                rate: c.rate,
                tau: c.tau,
                members: Vec::new(),
            })
            .members
            .push(i);
    }
    map.into_values().collect()
}

impl Pricer {
    pub fn new(quad: QuadratureConfig, nested: NestedQuadConfig) -> Self {
        Self { quad, nested }
    }

    /// Call values for one slice.
    pub fn call_slice(
        &self,
        params: &ModelParams,
        spot: f64,
        rate: f64,
        tau: f64,
        strikes: &[f64],
    ) -> Result<Vec<f64>> {
        match params {
            ModelParams::Heston(h) => call_prices_svj(
                spot,
                rate,
                tau,
                strikes,
                &SvjParams::without_jumps(*h),
                &self.quad,
            ),
            ModelParams::Svj(p) => call_prices_svj(spot, rate, tau, strikes, p, &self.quad),
            ModelParams::Msv(p) => {
                Ok(
                    call_prices_msv(spot, rate, tau, strikes, p, &self.quad, &self.nested)?
                        .into_iter()
                        .map(|m| m.price)
                        .collect(),
                )
            }
        }
    }

    pub fn price(&self, params: &ModelParams, c: &OptionContract) -> Result<f64> {
        c.validate()?;
        let call = self.call_slice(params, c.spot, c.rate, c.tau, &[c.strike])?[0];
        Ok(c.from_call_value(call))
    }

    /// Prices a list of contracts; errors name the first failing contract.
    pub fn price_contracts(
        &self,
        params: &ModelParams,
        contracts: &[OptionContract],
    ) -> Result<Vec<f64>> {
        params.validate()?;
        for (index, c) in contracts.iter().enumerate() {
            c.validate().map_err(|e| Error::QuotePricing {
                index,
                source: Box::new(e),
            })?;
        }
        let groups = slices(contracts);
        let results: Vec<Result<Vec<f64>>> = groups
            .par_iter()
            .map(|s| {
                let strikes: Vec<f64> = s.members.iter().map(|&i| contracts[i].strike).collect();
                self.call_slice(params, s.spot, s.rate, s.tau, &strikes)
            })
            .collect();
        let mut out = vec![0.0; contracts.len()];
        for (s, r) in groups.iter().zip(results) {
            let calls = r.map_err(|e| Error::QuotePricing {
                index: s.members[0],
                source: Box::new(e),
            })?;
            for (&i, call) in s.members.iter().zip(calls) {
                out[i] = contracts[i].from_call_value(call);
            }
        }
        Ok(out)
    }

    /// Heston prices and unit-coefficient corrections of `contracts`, from
    /// which MSV values follow for any correction coefficients.
    pub fn msv_basis(&self, h: &HestonParams, contracts: &[OptionContract]) -> Result<MsvBasis> {
        h.validate()?;
        let groups = slices(contracts);
        let results: Vec<Result<SliceBasis>> = groups
            .par_iter()
            .map(|s| {
                let strikes: Vec<f64> = s.members.iter().map(|&i| contracts[i].strike).collect();
                let base = SvjParams::without_jumps(*h);
                let c0 = call_prices_svj(s.spot, s.rate, s.tau, &strikes, &base, &self.quad)?;
                let basis = correction_basis_slice(
                    s.spot,
                    s.rate,
                    s.tau,
                    &strikes,
                    h,
                    &self.quad,
                    &self.nested,
                )?;
                Ok((c0, basis))
            })
            .collect();
        let mut c0 = vec![0.0; contracts.len()];
        let mut basis = vec![[0.0; 4]; contracts.len()];
        for (s, r) in groups.iter().zip(results) {
            let (calls, b) = r.map_err(|e| Error::QuotePricing {
                index: s.members[0],
                source: Box::new(e),
            })?;
            for (k, &i) in s.members.iter().enumerate() {
                c0[i] = calls[k];
                basis[i] = b[k];
            }
        }
        Ok(MsvBasis {
            contracts: contracts.to_vec(),
            c0,
            basis,
        })
    }

    /// Model values of every quote in a chain.
    pub fn price_chain(&self, params: &ModelParams, chain: &OptionChain) -> Result<Vec<f64>> {
        let contracts = chain
            .quotes
            .iter()
            .enumerate()
            .map(|(index, q)| {
                q.contract().map_err(|e| Error::QuotePricing {
                    index,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        self.price_contracts(params, &contracts)
    }
}

/// Heston call values and correction basis for a fixed set of contracts.
#[derive(Debug, Clone)]
pub struct MsvBasis {
    contracts: Vec<OptionContract>,
    c0: Vec<f64>,
    basis: Vec<[f64; 4]>,
}

impl MsvBasis {
    /// Corrected values of the contracts for coefficients `v`.
    pub fn prices(&self, v: &[f64; 4]) -> Vec<f64> {
        self.contracts
            .iter()
            .zip(self.c0.iter().zip(&self.basis))
            .map(|(c, (&c0, b))| {
                let c1 = combine(b, v);
                let disc = (-c.rate * c.tau).exp();
                c.from_call_value(corrected_call(c.spot, c.strike, disc, c.tau, c0, c1).price)
            })
            .collect()
    }
}
