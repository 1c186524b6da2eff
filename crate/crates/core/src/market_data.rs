//! Option-chain ingestion, window filtering and synthetic chain generation.
//!
//! Chain files are comma-separated with a header row:
//!
//! ```text
//! quote_date,expiry_date,spot,strike,kind,mid_price[,rate]
//! 2024-01-02,2024-02-01,4700.5,4500,C,231.25,0.052
//! ```
//!
//! Dates are ISO-8601; `kind` is `C` or `P`. The `rate` column is optional;
//! when absent every quote uses the flat rate supplied to [`load_chain`].
//! Year fractions use ACT/365.

use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, OptionContract, OptionKind};
use crate::pricer::Pricer;

pub const DAYS_PER_YEAR: f64 = 365.0;

const REQUIRED: [&str; 6] = [
    "quote_date",
    "expiry_date",
    "spot",
    "strike",
    "kind",
    "mid_price",
];

/// One quoted option.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionQuote {
    pub quote_date: NaiveDate,
    pub expiry_date: NaiveDate,
    /// ACT/365 year fraction between quote and expiry.
    pub tau: f64,
    pub strike: f64,
    pub spot: f64,
    pub mid_price: f64,
    pub kind: OptionKind,
    pub rate: f64,
}

impl OptionQuote {
    pub fn days_to_expiry(&self) -> i64 {
        (self.expiry_date - self.quote_date).num_days()
    }

    pub fn contract(&self) -> Result<OptionContract> {
        OptionContract::new(self.spot, self.strike, self.tau, self.rate, self.kind)
    }

    pub fn moneyness(&self) -> f64 {
        self.strike / self.spot
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Market,
    Synthetic,
}

/// An ordered collection of quotes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionChain {
    pub quotes: Vec<OptionQuote>,
    pub provenance: Provenance,
    /// Whether per-quote rates are written back out.
    pub rate_column: bool,
    /// Seed of the noise generator for synthetic chains.
    pub seed: Option<u64>,
}

impl OptionChain {
    pub fn new(quotes: Vec<OptionQuote>, provenance: Provenance) -> Self {
        Self {
            quotes,
            provenance,
            rate_column: true,
            seed: None,
        }
    }

    pub fn len(&self) -> usize {
        self.quotes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotes.is_empty()
    }

    /// Distinct expiry dates in ascending order.
    pub fn expiries(&self) -> Vec<NaiveDate> {
        let mut e: Vec<NaiveDate> = self.quotes.iter().map(|q| q.expiry_date).collect();
        e.sort();
        e.dedup();
        e
    }

    /// Indices of quotes grouped by expiry date, in ascending expiry order.
    pub fn buckets(&self) -> Vec<(NaiveDate, Vec<usize>)> {
        self.expiries()
            .into_iter()
            .map(|d| {
                let idx = (0..self.quotes.len())
                    .filter(|&i| self.quotes[i].expiry_date == d)
                    .collect();
                (d, idx)
            })
            .collect()
    }
}

/// A row that could not be turned into a quote.
#[derive(Debug, Clone, PartialEq)]
pub struct RowDiagnostic {
    /// 1-based line number in the file, header being line 1.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct LoadedChain {
    pub chain: OptionChain,
    pub diagnostics: Vec<RowDiagnostic>,
}

/// Parses a chain from CSV text. Malformed rows are collected as
/// diagnostics; the load fails only when no row survives or a required
/// column is missing.
pub fn read_chain<R: Read>(reader: R, default_rate: f64) -> Result<LoadedChain> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let mut idx = [0usize; 6];
    for (slot, name) in idx.iter_mut().zip(REQUIRED) {
        *slot = col(name).ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }
    let rate_idx = col("rate");

    let mut quotes = Vec::new();
    let mut diagnostics = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let line = record
            .as_ref()
            .ok()
            .and_then(|r| r.position())
            .map_or(row as u64 + 2, |p| p.line());
        let parsed = record
            .map_err(Error::from)
            .and_then(|r| parse_row(&r, &idx, rate_idx, default_rate));
        match parsed {
            Ok(q) => quotes.push(q),
            Err(e) => {
                log::warn!("line {line}: {e}");
                diagnostics.push(RowDiagnostic {
                    line,
                    reason: e.to_string(),
                });
            }
        }
    }
    if quotes.is_empty() {
        return Err(Error::EmptyChain(format!(
            "no usable rows ({} rejected)",
            diagnostics.len()
        )));
    }
    let mut chain = OptionChain::new(quotes, Provenance::Market);
    chain.rate_column = rate_idx.is_some();
    Ok(LoadedChain { chain, diagnostics })
}

fn parse_row(
    r: &csv::StringRecord,
    idx: &[usize; 6],
    rate_idx: Option<usize>,
    default_rate: f64,
) -> Result<OptionQuote> {
    let field = |i: usize, name: &str| {
        r.get(i)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::Parse(format!("empty `{name}`")))
    };
    let date = |i: usize, name: &str| -> Result<NaiveDate> {
        let s = field(i, name)?;
        NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .map_err(|e| Error::Parse(format!("`{name}` = {s:?}: {e}")))
    };
    let num = |i: usize, name: &str| -> Result<f64> {
        let s = field(i, name)?;
        s.parse::<f64>()
            .map_err(|e| Error::Parse(format!("`{name}` = {s:?}: {e}")))
    };
    let positive = |i: usize, name: &str| -> Result<f64> {
        let x = num(i, name)?;
        if x > 0.0 && x.is_finite() {
            Ok(x)
        } else {
            Err(Error::Parse(format!("`{name}` must be positive, got {x}")))
        }
    };
    let quote_date = date(idx[0], REQUIRED[0])?;
    let expiry_date = date(idx[1], REQUIRED[1])?;
    let spot = positive(idx[2], REQUIRED[2])?;
    let strike = positive(idx[3], REQUIRED[3])?;
    let kind: OptionKind = field(idx[4], REQUIRED[4])?.parse()?;
    let mid_price = positive(idx[5], REQUIRED[5])?;
    let rate = match rate_idx {
        Some(i) if r.get(i).is_some_and(|s| !s.is_empty()) => num(i, "rate")?,
        _ => default_rate,
    };
    let days = (expiry_date - quote_date).num_days();
    if days <= 0 {
        return Err(Error::Parse(format!(
            "expiry {expiry_date} is not after quote date {quote_date}"
        )));
    }
    Ok(OptionQuote {
        quote_date,
        expiry_date,
        tau: days as f64 / DAYS_PER_YEAR,
        strike,
        spot,
        mid_price,
        kind,
        rate,
    })
}

/// Loads a chain file.
pub fn load_chain(path: impl AsRef<Path>, default_rate: f64) -> Result<LoadedChain> {
    let file = std::fs::File::open(path.as_ref())?;
    read_chain(std::io::BufReader::new(file), default_rate)
}

/// Writes a chain in the file schema. Numbers use the shortest
/// representation that parses back to the same value.
pub fn write_chain<W: Write>(chain: &OptionChain, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = REQUIRED.to_vec();
    if chain.rate_column {
        header.push("rate");
    }
    w.write_record(&header)?;
    for q in &chain.quotes {
        let mut rec = vec![
            q.quote_date.format("%Y-%m-%d").to_string(),
            q.expiry_date.format("%Y-%m-%d").to_string(),
            q.spot.to_string(),
            q.strike.to_string(),
            q.kind.code().to_string(),
            q.mid_price.to_string(),
        ];
        if chain.rate_column {
            rec.push(q.rate.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_chain(chain: &OptionChain, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path.as_ref())?;
    write_chain(chain, std::io::BufWriter::new(file))
}

/// Moneyness and maturity window; both ends inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainFilter {
    pub moneyness_lo: f64,
    pub moneyness_hi: f64,
    pub tau_lo_days: i64,
    pub tau_hi_days: i64,
}

impl Default for ChainFilter {
    fn default() -> Self {
        Self {
            moneyness_lo: 0.75,
            moneyness_hi: 1.25,
            tau_lo_days: 30,
            tau_hi_days: 180,
        }
    }
}

/// Keeps quotes whose strike/spot and days to expiry lie in the window.
pub fn filter_chain(chain: &OptionChain, f: &ChainFilter) -> Result<OptionChain> {
    if f.moneyness_lo > f.moneyness_hi || f.tau_lo_days > f.tau_hi_days {
        return Err(Error::InvalidParameter(format!(
            "filter bounds out of order: {f:?}"
        )));
    }
    let quotes: Vec<OptionQuote> = chain
        .quotes
        .iter()
        .filter(|q| {
            let m = q.moneyness();
            let d = q.days_to_expiry();
            m >= f.moneyness_lo && m <= f.moneyness_hi && d >= f.tau_lo_days && d <= f.tau_hi_days
        })
        .cloned()
        .collect();
    if quotes.is_empty() {
        log::warn!("filter left no quotes");
    }
    Ok(OptionChain {
        quotes,
        ..chain.clone()
    })
}

/// Grid and noise settings for a synthetic chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub spot: f64,
    pub rate: f64,
    pub strikes: Vec<f64>,
    pub maturities_days: Vec<i64>,
    /// Standard deviation of additive Gaussian price noise.
    pub noise_sd: f64,
    pub seed: u64,
    pub quote_date: NaiveDate,
}

impl SynthSpec {
    pub fn new(spot: f64, rate: f64, strikes: Vec<f64>, maturities_days: Vec<i64>) -> Self {
        Self {
            spot,
            rate,
            strikes,
            maturities_days,
            noise_sd: 0.0,
            seed: 0,
            quote_date: NaiveDate::from_ymd_opt(2024, 1, 2).expect("valid date"),
        }
    }
}

/// Smallest price kept after noise is added.
const MIN_SYNTH_PRICE: f64 = 1e-8;

/// Call quotes priced by a model on a strike x maturity grid, ordered by
/// maturity then strike.
pub fn synth_chain(params: &ModelParams, spec: &SynthSpec, pricer: &Pricer) -> Result<OptionChain> {
    if !(spec.noise_sd >= 0.0) {
        return Err(Error::InvalidParameter("noise_sd must be >= 0".into()));
    }
    if spec.strikes.is_empty() || spec.maturities_days.is_empty() {
        return Err(Error::InvalidParameter("synthetic grid is empty".into()));
    }
    let mut quotes = Vec::with_capacity(spec.strikes.len() * spec.maturities_days.len());
    for &days in &spec.maturities_days {
        if days <= 0 {
            return Err(Error::InvalidParameter(format!(
                "maturity {days} days must be > 0"
            )));
        }
        let expiry_date = spec.quote_date + chrono::Duration::days(days);
        for &strike in &spec.strikes {
            quotes.push(OptionQuote {
                quote_date: spec.quote_date,
                expiry_date,
                tau: days as f64 / DAYS_PER_YEAR,
                strike,
                spot: spec.spot,
                mid_price: f64::NAN,
                kind: OptionKind::Call,
                rate: spec.rate,
            });
        }
    }
    let mut chain = OptionChain::new(quotes, Provenance::Synthetic);
    let prices = pricer.price_chain(params, &chain)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sd.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    for (q, p) in chain.quotes.iter_mut().zip(prices) {
        let eps = if spec.noise_sd > 0.0 {
            noise.sample(&mut rng)
        } else {
            0.0
        };
        q.mid_price = (p + eps).max(MIN_SYNTH_PRICE);
    }
    chain.seed = Some(spec.seed);
    Ok(chain)
}
