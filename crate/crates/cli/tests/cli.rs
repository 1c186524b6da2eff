use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use svcal_core::model::{HestonParams, OptionContract};
use svcal_core::{price_heston, QuadratureConfig};

const HESTON: &str =
    "model = heston\nkappa = 2\ntheta = 0.04\nsigma = 0.3\nrho = -0.7\nv0 = 0.04\n";
const SVJ_NO_JUMPS: &str =
    "model = svj\nkappa = 2\ntheta = 0.04\nsigma = 0.3\nrho = -0.7\nv0 = 0.04\nlambda = 0\nm = -0.05\nn = 0.05\n";

fn svcal(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svcal"))
        .current_dir(dir)
        .arg("--output-dir")
        .arg(dir)
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty(), "data belongs in files");
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("h.params"), HESTON).unwrap();
    fs::write(dir.path().join("svj0.params"), SVJ_NO_JUMPS).unwrap();
    dir
}

fn synth(dir: &Path) {
    ok(&svcal(
        dir,
        &[
            "synth",
            "--strikes",
            "85,90,95,100,105,110,115",
            "--maturities",
            "30,90,180",
        ],
    ));
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn price_single_contract_matches_library() {
    let dir = setup();
    let d = dir.path();
    ok(&svcal(
        d,
        &[
            "price",
            "--model",
            "heston",
            "--params",
            "h.params",
            "--strikes",
            "100",
            "--maturities",
            "182",
            "--rate",
            "0.03",
        ],
    ));
    let r = rows(&d.join("prices.csv"));
    assert_eq!(r.len(), 1);
    let c = OptionContract::call(100.0, 100.0, 182.0 / 365.0, 0.03).unwrap();
    let h = HestonParams::new(2.0, 0.04, 0.3, -0.7, 0.04).unwrap();
    let expected = price_heston(&c, &h, &QuadratureConfig::default()).unwrap();
    assert_eq!(r[0][3], "heston");
    assert!((r[0][4].parse::<f64>().unwrap() - expected).abs() < 1e-12);
}

#[test]
fn price_all_models_and_zero_jump_reduction() {
    let dir = setup();
    let d = dir.path();
    ok(&svcal(
        d,
        &[
            "price",
            "--params",
            "h.params",
            "--params",
            "svj0.params",
            "--strikes",
            "90,110",
            "--maturities",
            "60",
        ],
    ));
    let r = rows(&d.join("prices.csv"));
    assert_eq!(r.len(), 6);
    let price = |model: &str, k: &str| -> f64 {
        r.iter().find(|x| x[3] == model && x[0] == k).unwrap()[4]
            .parse()
            .unwrap()
    };
    for k in ["90", "110"] {
        assert!((price("svj", k) - price("heston", k)).abs() < 1e-10);
    }
}

#[test]
fn calibrate_recovers_synthetic_heston() {
    let dir = setup();
    let d = dir.path();
    synth(d);
    ok(&svcal(d, &["calibrate", "--input", "chain.csv"]));
    for m in ["heston", "svj", "msv"] {
        let kv = fs::read_to_string(d.join(format!("{m}_report.txt"))).unwrap();
        assert!(kv.contains("status = ok"), "{kv}");
        assert!(d.join(format!("{m}.params")).exists());
    }
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("calibration.json")).unwrap()).unwrap();
    let reports = json.as_array().unwrap();
    assert_eq!(reports.len(), 3);
    assert!(reports[0]["objective"].as_f64().unwrap() < 1e-12);
    // The fitted parameter file feeds back into pricing.
    ok(&svcal(
        d,
        &[
            "price",
            "--model",
            "heston",
            "--params",
            "heston.params",
            "--strikes",
            "100",
            "--maturities",
            "90",
        ],
    ));
}

#[test]
fn calibrate_single_model() {
    let dir = setup();
    let d = dir.path();
    synth(d);
    ok(&svcal(
        d,
        &["calibrate", "--input", "chain.csv", "--model", "heston"],
    ));
    assert!(d.join("heston_report.txt").exists());
    assert!(!d.join("svj_report.txt").exists());
}

#[test]
fn malformed_chain_is_a_config_error() {
    let dir = setup();
    let d = dir.path();
    fs::write(
        d.join("bad.csv"),
        "quote_date,spot,kind\n2024-01-02,100,C\n",
    )
    .unwrap();
    let out = svcal(d, &["calibrate", "--input", "bad.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("expiry_date"));
    let out = svcal(
        d,
        &["mre", "--input", "missing.csv", "--params", "h.params"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn smile_files_per_maturity() {
    let dir = setup();
    let d = dir.path();
    synth(d);
    ok(&svcal(
        d,
        &[
            "smile",
            "--input",
            "chain.csv",
            "--params",
            "h.params",
            "--model",
            "heston",
        ],
    ));
    for days in [30, 90, 180] {
        let r = rows(&d.join(format!("smile_{days}d.csv")));
        assert_eq!(r.len(), 7);
        let ivs: Vec<(f64, f64)> = r
            .iter()
            .map(|x| (x[2].parse().unwrap(), x[3].parse().unwrap()))
            .collect();
        for (mkt, mdl) in &ivs {
            assert!((mkt - mdl).abs() < 1e-6);
        }
        assert!(
            ivs.windows(2).all(|w| w[1].1 < w[0].1),
            "{days}d not downward: {ivs:?}"
        );
    }
}

#[test]
fn mre_table_layout() {
    let dir = setup();
    let d = dir.path();
    synth(d);
    ok(&svcal(
        d,
        &["mre", "--input", "chain.csv", "--params", "h.params"],
    ));
    let text = fs::read_to_string(d.join("mre.csv")).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(
        header,
        ["maturity", "expiry", "heston", "svj", "msv", "quotes"]
    );
    let r = rows(&d.join("mre.csv"));
    assert_eq!(r.len(), 3);
    assert!(r
        .iter()
        .all(|x| x[2..5].iter().all(|v| v.parse::<f64>().unwrap() == 0.0)));

    ok(&svcal(
        d,
        &[
            "mre",
            "--input",
            "chain.csv",
            "--params",
            "h.params",
            "--model",
            "svj",
        ],
    ));
    let text = fs::read_to_string(d.join("mre.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "maturity,expiry,svj,quotes");
}

#[test]
fn synth_is_deterministic_given_the_seed() {
    let dir = setup();
    let d = dir.path();
    let args = [
        "synth",
        "--noise-sd",
        "0.05",
        "--seed",
        "11",
        "--strikes",
        "90,100,110",
        "--maturities",
        "30,60",
    ];
    ok(&svcal(d, &[&args[..], &["--output", "a.csv"]].concat()));
    ok(&svcal(d, &[&args[..], &["--output", "b.csv"]].concat()));
    ok(&svcal(
        d,
        &[
            "synth",
            "--noise-sd",
            "0.05",
            "--seed",
            "12",
            "--strikes",
            "90,100,110",
            "--maturities",
            "30,60",
            "--output",
            "c.csv",
        ],
    ));
    let a = fs::read(d.join("a.csv")).unwrap();
    assert_eq!(a, fs::read(d.join("b.csv")).unwrap());
    assert_ne!(a, fs::read(d.join("c.csv")).unwrap());
    let out = svcal(d, &["synth", "--model", "svj"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_with_few_paths_still_passes() {
    let dir = setup();
    let d = dir.path();
    ok(&svcal(d, &["validate", "--paths", "1000"]));
    let text = fs::read_to_string(d.join("validation.txt")).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}

#[test]
fn injected_tolerance_failure_names_the_check() {
    let dir = setup();
    let d = dir.path();
    let out = svcal(
        d,
        &["validate", "--paths", "1000", "--tolerance-scale", "0"],
    );
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("riccati equivalence"), "{err}");
    let text = fs::read_to_string(d.join("validation.txt")).unwrap();
    assert!(text.contains("FAIL riccati equivalence"));
}
