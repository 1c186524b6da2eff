//! Mean relative pricing error per expiry bucket.

use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::OptionChain;

/// `(1/N) sum |model - market| / market` over quotes with a positive market
/// price, and the number of quotes used. Other quotes are skipped with a
/// warning.
fn mre_counted(market: &[f64], model: &[f64]) -> Result<(f64, usize)> {
    if market.len() != model.len() {
        return Err(Error::InvalidParameter(format!(
            "{} market prices but {} model prices",
            market.len(),
            model.len()
        )));
    }
    let mut sum = 0.0;
    let mut n = 0;
    for (i, (&c_mkt, &c_mod)) in market.iter().zip(model).enumerate() {
        if !(c_mkt > 0.0) || !c_mod.is_finite() {
            log::warn!("quote {i} left out of the MRE: market {c_mkt}, model {c_mod}");
            continue;
        }
        sum += (c_mod - c_mkt).abs() / c_mkt;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyChain(
            "no quote with a positive market price".into(),
        ));
    }
    Ok((sum / n as f64, n))
}

/// Mean relative error of `model` against `market`.
pub fn mre(market: &[f64], model: &[f64]) -> Result<f64> {
    mre_counted(market, model).map(|(v, _)| v)
}

/// MRE of one expiry bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketMre {
    pub expiry: NaiveDate,
    pub days: i64,
    pub mre: f64,
    /// Quotes that entered the mean.
    pub count: usize,
}

/// MRE of every expiry bucket of `chain`; `model_prices[i]` prices
/// `chain.quotes[i]`. Buckets without a usable quote are skipped.
pub fn mre_by_bucket(chain: &OptionChain, model_prices: &[f64]) -> Result<Vec<BucketMre>> {
    if model_prices.len() != chain.len() {
        return Err(Error::InvalidParameter(format!(
            "{} model prices for {} quotes",
            model_prices.len(),
            chain.len()
        )));
    }
    let mut out = Vec::new();
    for (expiry, idx) in chain.buckets() {
        let market: Vec<f64> = idx.iter().map(|&i| chain.quotes[i].mid_price).collect();
        let model: Vec<f64> = idx.iter().map(|&i| model_prices[i]).collect();
        match mre_counted(&market, &model) {
            Ok((mre, count)) => out.push(BucketMre {
                expiry,
                days: chain.quotes[idx[0]].days_to_expiry(),
                mre,
                count,
            }),
            Err(e) => log::warn!("bucket {expiry} skipped: {e}"),
        }
    }
    Ok(out)
}

/// Expiry rows by model columns.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MreReport {
    pub models: Vec<String>,
    pub rows: Vec<MreRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MreRow {
    pub expiry: NaiveDate,
    pub days: i64,
    /// One entry per model; `None` when the bucket had no usable quote.
    pub mre: Vec<Option<f64>>,
    pub counts: Vec<usize>,
}

impl MreRow {
    pub fn label(&self) -> String {
        format!("{} days", self.days)
    }
}

impl MreReport {
    /// Builds the table from `(model name, model prices)` columns.
    pub fn new(chain: &OptionChain, columns: &[(String, Vec<f64>)]) -> Result<Self> {
        let mut report = MreReport {
            models: columns.iter().map(|(name, _)| name.clone()).collect(),
            rows: Vec::new(),
        };
        for (col, (_, prices)) in columns.iter().enumerate() {
            for b in mre_by_bucket(chain, prices)? {
                let pos = match report.rows.iter().position(|r| r.expiry == b.expiry) {
                    Some(p) => p,
                    None => {
                        report.rows.push(MreRow {
                            expiry: b.expiry,
                            days: b.days,
                            mre: vec![None; columns.len()],
                            counts: vec![0; columns.len()],
                        });
                        report.rows.len() - 1
                    }
                };
                report.rows[pos].mre[col] = Some(b.mre);
                report.rows[pos].counts[col] = b.count;
            }
        }
        report.rows.sort_by_key(|r| r.expiry);
        Ok(report)
    }

    /// CSV with a `maturity` column, one column per model and a quote count.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("maturity,expiry");
        for m in &self.models {
            write!(s, ",{m}").unwrap();
        }
        s.push_str(",quotes\n");
        for r in &self.rows {
            write!(s, "{},{}", r.label(), r.expiry).unwrap();
            for v in &r.mre {
                match v {
                    Some(x) => write!(s, ",{x:.6}").unwrap(),
                    None => s.push(','),
                }
            }
            writeln!(s, ",{}", r.counts.iter().copied().max().unwrap_or(0)).unwrap();
        }
        s
    }

    /// Fixed-width text table.
    pub fn to_table(&self) -> String {
        let mut s = format!("{:<12}", "Maturity");
        for m in &self.models {
            write!(s, " {:>9}", m.to_uppercase()).unwrap();
        }
        s.push('\n');
        for r in &self.rows {
            write!(s, "{:<12}", r.label()).unwrap();
            for v in &r.mre {
                match v {
                    Some(x) => write!(s, " {x:>9.4}").unwrap(),
                    None => write!(s, " {:>9}", "-").unwrap(),
                }
            }
            s.push('\n');
        }
        s
    }
}
