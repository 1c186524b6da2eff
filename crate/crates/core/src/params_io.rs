//! Flat `key = value` parameter files.
//!
//! ```text
//! model = svj
//! zeta = 0.875     # or kappa; zeta wins when both are given
//! theta = 0.04
//! sigma = 0.3
//! rho = -0.7
//! v0 = 0.04
//! lambda = 20
//! m = -0.05
//! n = 0.05
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use crate::calibration::{kappa_to_zeta, zeta_to_kappa};
use crate::error::{Error, Result};
use crate::model::{HestonParams, ModelKind, ModelParams, MsvParams, SvjParams};

const KNOWN: [&str; 14] = [
    "model", "kappa", "zeta", "theta", "sigma", "rho", "v0", "lambda", "m", "n", "v1", "v2", "v3",
    "v4",
];

fn entries(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", no + 1)))?;
        let key = k.trim().to_ascii_lowercase();
        if !KNOWN.contains(&key.as_str()) {
            return Err(Error::Parse(format!(
                "line {}: unknown key `{key}`",
                no + 1
            )));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Parse(format!(
                "line {}: duplicate key `{key}`",
                no + 1
            )));
        }
    }
    Ok(map)
}

fn number(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>> {
    map.get(key)
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| Error::Parse(format!("`{key}`: `{v}` is not a number")))
        })
        .transpose()
}

fn required(map: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    number(map, key)?.ok_or_else(|| Error::Parse(format!("missing key `{key}`")))
}

/// Parses a parameter file body.
pub fn parse_params(text: &str) -> Result<ModelParams> {
    let map = entries(text)?;
    let model: ModelKind = map
        .get("model")
        .ok_or_else(|| Error::Parse("missing key `model`".into()))?
        .parse()?;
    let theta = required(&map, "theta")?;
    let sigma = required(&map, "sigma")?;
    let kappa = match (number(&map, "zeta")?, number(&map, "kappa")?) {
        (Some(z), k) => {
            let from_zeta = zeta_to_kappa(z, sigma, theta)?;
            if let Some(k) = k {
                if (k - from_zeta).abs() > 1e-12 * k.abs().max(1.0) {
                    log::warn!("kappa = {k} ignored; zeta = {z} gives kappa = {from_zeta}");
                }
            }
            from_zeta
        }
        (None, Some(k)) => k,
        (None, None) => return Err(Error::Parse("need `zeta` or `kappa`".into())),
    };
    let h = HestonParams::new(
        kappa,
        theta,
        sigma,
        required(&map, "rho")?,
        required(&map, "v0")?,
    )?;
    Ok(match model {
        ModelKind::Heston => ModelParams::Heston(h),
        ModelKind::Svj => ModelParams::Svj(SvjParams::new(
            h,
            required(&map, "lambda")?,
            required(&map, "m")?,
            required(&map, "n")?,
        )?),
        ModelKind::Msv => ModelParams::Msv(MsvParams::new(
            h,
            [
                required(&map, "v1")?,
                required(&map, "v2")?,
                required(&map, "v3")?,
                required(&map, "v4")?,
            ],
        )?),
    })
}

pub fn load_params(path: impl AsRef<Path>) -> Result<ModelParams> {
    parse_params(&std::fs::read_to_string(path)?)
}

/// Writes both `kappa` and `zeta`; values use shortest round-trip formatting.
pub fn format_params(p: &ModelParams) -> String {
    let h = p.heston();
    let mut s = format!("model = {}\n", p.kind());
    s += &format!(
        "zeta = {}\n",
        kappa_to_zeta(h.kappa, h.sigma, h.theta).max(0.0)
    );
    s += &format!("kappa = {}\n", h.kappa);
    s += &format!(
        "theta = {}\nsigma = {}\nrho = {}\nv0 = {}\n",
        h.theta, h.sigma, h.rho, h.v0
    );
    match p {
        ModelParams::Heston(_) => {}
        ModelParams::Svj(j) => s += &format!("lambda = {}\nm = {}\nn = {}\n", j.lambda, j.m, j.n),
        ModelParams::Msv(m) => {
            for (i, v) in m.v.iter().enumerate() {
                s += &format!("v{} = {v}\n", i + 1);
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_takes_precedence() {
        let p = parse_params(
            "model = heston\nkappa = 5\nzeta = 0\ntheta = 0.04\nsigma = 0.4\nrho = -0.5\nv0 = 0.04\n",
        )
        .unwrap();
        assert!((p.heston().kappa - 2.0).abs() < 1e-14);
    }

    #[test]
    fn round_trip_every_model() {
        let h = HestonParams::new(2.0, 0.04, 0.3, -0.7, 0.04).unwrap();
        for p in [
            ModelParams::Heston(h),
            ModelParams::Svj(SvjParams::new(h, 20.0, -0.05, 0.05).unwrap()),
            ModelParams::Msv(MsvParams::new(h, [0.01, -0.02, 0.0, 0.003]).unwrap()),
        ] {
            let back = parse_params(&format_params(&p)).unwrap();
            assert_eq!(back.kind(), p.kind());
            assert!((back.heston().kappa - 2.0).abs() < 1e-14);
            assert_eq!(format_params(&back), format_params(&p));
        }
    }

    #[test]
    fn errors_name_the_problem() {
        let e =
            parse_params("model = svj\nkappa = 2\ntheta = 0.04\nsigma = 0.3\nrho = 0\nv0 = 0.04")
                .unwrap_err();
        assert!(e.to_string().contains("lambda"), "{e}");
        let e = parse_params("model = heston\nfoo = 1").unwrap_err();
        assert!(e.to_string().contains("foo"), "{e}");
        assert!(parse_params(
            "model = heston\nzeta = -1\ntheta = 0.04\nsigma = 0.3\nrho = 0\nv0 = 0.04"
        )
        .is_err());
    }
}
