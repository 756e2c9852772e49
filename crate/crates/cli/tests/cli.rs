use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;

fn pqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqc"))
        .args(args)
        .env_remove("PQC_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn grover_notation_example() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("g.json");
    let o = pqc(&[
        "grover",
        "--n1",
        "2",
        "--n2",
        "2",
        "--marked",
        "6",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let down: Vec<&str> = text.lines().filter(|l| l.contains(" down ")).collect();
    assert_eq!(down.len(), 1);
    // |0110>: freq/pi = 15 - 2*6
    assert!(down[0].contains("|0110>") && down[0].contains("freq/pi        3"));
    let v = json(&report);
    assert_eq!(v["marked"], 6);
    assert_eq!(v["queries"], 3);
    assert!(v["p_success"].as_f64().unwrap() > 1.0 - 1e-9);
}

#[test]
fn grover_single_query_when_fully_mixed() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("g.json");
    let o = pqc(&[
        "grover",
        "--n1",
        "4",
        "--n2",
        "0",
        "--marked",
        "9",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&report)["queries"], 1);
}

#[test]
fn grover_budget_and_validation_codes() {
    assert_eq!(
        pqc(&["grover", "--n1", "80", "--n2", "2", "--marked", "0"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        pqc(&["grover", "--n1", "2", "--n2", "2", "--marked", "16"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        pqc(&["grover", "--n1", "0", "--n2", "0", "--marked", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        pqc(&[
            "grover",
            "--n1",
            "11",
            "--n2",
            "2",
            "--marked",
            "0",
            "--budget-molecules",
            "1000"
        ])
        .status
        .code(),
        Some(3)
    );
    assert_eq!(pqc(&["grover", "--n1", "2"]).status.code(), Some(2));
    assert_eq!(
        pqc(&[
            "grover",
            "--n1",
            "1",
            "--n2",
            "1",
            "--marked",
            "0",
            "--workers",
            "0"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn grover_custom_couplings() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("c.json");
    std::fs::write(&good, r#"{"omega0": 0.0, "J": [5.0, 3.0, 1.0]}"#).unwrap();
    let o = pqc(&[
        "grover",
        "--n1",
        "1",
        "--n2",
        "2",
        "--marked",
        "5",
        "--couplings",
        good.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    // 101 -> -5 + 3 - 1
    assert!(stdout(&o)
        .lines()
        .any(|l| l.contains(" down ") && l.contains("freq/pi       -3")));
    let clash = dir.path().join("bad.json");
    std::fs::write(&clash, r#"{"omega0": 0.0, "J": [1.0, 1.0, 1.0]}"#).unwrap();
    let o = pqc(&[
        "grover",
        "--n1",
        "1",
        "--n2",
        "2",
        "--marked",
        "5",
        "--couplings",
        clash.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let short = dir.path().join("short.json");
    std::fs::write(&short, r#"{"omega0": 0.0, "J": [2.0, 1.0]}"#).unwrap();
    let o = pqc(&[
        "grover",
        "--n1",
        "1",
        "--n2",
        "2",
        "--marked",
        "5",
        "--couplings",
        short.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn shor_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("s.json");
    let o = pqc(&[
        "shor",
        "--nb",
        "15",
        "--a",
        "7",
        "--n1",
        "2",
        "--n2",
        "6",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&report);
    assert_eq!(v["Nb"], 15);
    assert_eq!(v["r"], 4);
    assert_eq!(v["factors"], serde_json::json!([3, 5]));
    assert_eq!(v["transitions"], 16);
    assert_eq!(v["peaks"], serde_json::json!([0, 16, 32, 48]));
    assert_eq!(v["method"], "gcd");
}

#[test]
fn shor_minus_one_fails() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("s.json");
    let o = pqc(&[
        "shor",
        "--nb",
        "15",
        "--a",
        "14",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&report);
    assert_eq!(v["r"], 2);
    assert!(v["factors"].is_null());
    assert!(stdout(&o).contains("MinusOne"));
}

#[test]
fn shor_continued_fractions() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("s.json");
    let o = pqc(&[
        "shor",
        "--nb",
        "21",
        "--a",
        "2",
        "--n2",
        "7",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&report);
    assert_eq!(v["r"], 6);
    assert_eq!(v["factors"], serde_json::json!([3, 7]));
    assert_eq!(v["method"], "cf");
}

#[test]
fn shor_validation() {
    assert_eq!(
        pqc(&["shor", "--nb", "15", "--a", "5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        pqc(&["shor", "--nb", "15", "--a", "7", "--n1", "3", "--n2", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        pqc(&["shor", "--nb", "2", "--a", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        pqc(&["shor", "--nb", "1000003", "--a", "2"]).status.code(),
        Some(2)
    );
    // n = 40 does not fit in memory limits
    assert_eq!(
        pqc(&["shor", "--nb", "999983", "--a", "2"]).status.code(),
        Some(2)
    );
}

#[test]
fn sweep_asymptotic_constant() {
    let o = pqc(&["sweep", "--n", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n1,N1,Nq_asym,Nq_real,product"));
    let target = std::f64::consts::PI.powi(2) * 1024.0 / 16.0;
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 11);
    for row in rows {
        let product: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!((product - target).abs() < 1e-9 * target, "{row}");
    }
}

#[test]
fn sweep_realized_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let o = pqc(&[
        "sweep",
        "--n",
        "8",
        "--realized",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let products: Vec<f64> = reader
        .records()
        .map(|r| r.unwrap()[4].parse().unwrap())
        .collect();
    assert_eq!(products.len(), 9);
    // (J+1)^2 * N1 with J from the iteration formula
    assert_eq!(
        products,
        vec![196.0, 200.0, 196.0, 200.0, 256.0, 288.0, 576.0, 512.0, 256.0]
    );
}

#[test]
fn sweep_rejects_zero() {
    assert_eq!(pqc(&["sweep", "--n", "0"]).status.code(), Some(2));
    assert_eq!(pqc(&["sweep", "--n", "63"]).status.code(), Some(2));
}

#[test]
fn rpa_examples() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = pqc(&[
        "rpa",
        "--n",
        "6",
        "--k",
        "100000",
        "--seed",
        "7",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&path);
    assert!((v["p_marked"].as_f64().unwrap() - 0.134826660156250).abs() < 1e-12);
    assert!((v["marked_frequency"].as_f64().unwrap() - 0.134827).abs() < 0.01);

    let o = pqc(&[
        "rpa",
        "--n",
        "2",
        "--k",
        "10",
        "--trials",
        "20",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&path);
    assert_eq!(v["winner"], 3);
    assert_eq!(v["success_rate"], 1.0);

    let o = pqc(&[
        "rpa",
        "--n",
        "6",
        "--k",
        "2130",
        "--trials",
        "200",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&path)["success_rate"].as_f64().unwrap() >= 0.95);
}

#[test]
fn rpa_validation() {
    assert_eq!(pqc(&["rpa", "--n", "1"]).status.code(), Some(2));
    assert_eq!(pqc(&["rpa", "--n", "4", "--k", "0"]).status.code(), Some(2));
    assert_eq!(pqc(&["rpa", "--n", "40"]).status.code(), Some(2));
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_pqc"));
        c.args(["rpa", "--n", "4", "--k", "50"]);
        if let Some(s) = flag {
            c.args(["--seed", s]);
        }
        match env {
            Some(s) => c.env("PQC_SEED", s),
            None => c.env_remove("PQC_SEED"),
        };
        stdout(&c.output().unwrap())
    };
    assert_eq!(run(Some("12"), None), run(None, Some("12")));
    assert_eq!(run(Some("5"), Some("12")), run(None, Some("12")));
}

#[test]
fn spectrum_renders_saved_ensemble() {
    let dir = tempfile::tempdir().unwrap();
    let ens = dir.path().join("e.json");
    let o = pqc(&[
        "grover",
        "--n1",
        "1",
        "--n2",
        "3",
        "--marked",
        "11",
        "--ensemble-out",
        ens.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let grover_lines: Vec<String> = stdout(&o)
        .lines()
        .filter(|l| l.starts_with("freq/pi"))
        .map(String::from)
        .collect();
    let o = pqc(&["spectrum", "--input", ens.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines, grover_lines);

    let out = dir.path().join("s.json");
    let o = pqc(&[
        "spectrum",
        "--input",
        ens.to_str().unwrap(),
        "--mode",
        "sampled",
        "--samples",
        "100",
        "--seed",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["mode"], "sampled");
    assert_eq!(v["seed"], 4);
    let total: u64 = v["peaks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["count"].as_u64().unwrap())
        .sum();
    assert_eq!(total, 200);

    assert_eq!(
        pqc(&[
            "spectrum",
            "--input",
            dir.path().join("missing.json").to_str().unwrap()
        ])
        .status
        .code(),
        Some(2)
    );
    std::fs::write(&out, "{\"n1\": 1}").unwrap();
    assert_eq!(
        pqc(&["spectrum", "--input", out.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn expected_mode_ignores_seed() {
    let a = pqc(&["shor", "--nb", "15", "--a", "2", "--seed", "1"]);
    let b = pqc(&["shor", "--nb", "15", "--a", "2", "--seed", "99"]);
    assert_eq!(a.stdout, b.stdout);
}

fn arg_value() -> impl Strategy<Value = String> {
    prop_oneof![
        (0u64..20).prop_map(|v| v.to_string()),
        (0u64..100_000).prop_map(|v| v.to_string()),
        Just("-1".to_string()),
        Just("abc".to_string()),
        Just("18446744073709551616".to_string()),
        Just(String::new()),
    ]
}

fn fuzz_args() -> impl Strategy<Value = Vec<String>> {
    let grover = (arg_value(), arg_value(), arg_value(), prop::bool::ANY).prop_map(
        |(n1, n2, m, sampled)| {
            let mut v = ["grover", "--n1", &n1, "--n2", &n2, "--marked", &m]
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>();
            if sampled {
                v.extend(["--mode", "sampled", "--samples", "10"].map(String::from));
            }
            v
        },
    );
    let shor = (arg_value(), arg_value(), prop::option::of(arg_value())).prop_map(|(nb, a, n2)| {
        let mut v = vec!["shor".to_string(), "--nb".into(), nb, "--a".into(), a];
        if let Some(n2) = n2 {
            v.extend(["--n2".to_string(), n2]);
        }
        v
    });
    let sweep = arg_value().prop_map(|n| vec!["sweep".to_string(), "--n".into(), n]);
    let rpa = (arg_value(), arg_value())
        .prop_map(|(n, k)| vec!["rpa".to_string(), "--n".into(), n, "--k".into(), k]);
    prop_oneof![grover, shor, sweep, rpa]
}

/// Small grids that are valid and cheap enough to run in full.
fn cheap(args: &[String]) -> bool {
    let num = |flag: &str| {
        args.iter()
            .position(|a| a == flag)
            .and_then(|i| args.get(i + 1))
            .and_then(|v| v.parse::<u64>().ok())
    };
    match args[0].as_str() {
        "grover" => {
            num("--n1").unwrap_or(0) + num("--n2").unwrap_or(0) <= 16
                || num("--n1").unwrap_or(0) > 79
        }
        "shor" => num("--nb").is_none_or(|nb| nb <= 40 || nb > 1_000_000),
        "rpa" => {
            num("--n").is_none_or(|n| n <= 12 || n > 20) && num("--k").is_none_or(|k| k <= 20_000)
        }
        _ => true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Arbitrary configurations end in a documented exit code, never a
    /// panic; rejected ones use only 2 or 3.
    #[test]
    fn fuzzed_configs_never_crash(args in fuzz_args().prop_filter("cheap", |a| cheap(a))) {
        let argv: Vec<String> = std::iter::once("pqc".to_string()).chain(args.iter().cloned()).collect();
        let mut out = Vec::new();
        let mut err = Vec::new();
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
            pqc_cli::run(argv.clone(), &mut out, &mut err)
        }));
        prop_assert!(result.is_ok(), "panic on {:?}", argv);
        let code = result.unwrap();
        prop_assert!((0..=3).contains(&code), "{:?} -> {}", argv, code);
        if !err.is_empty() {
            prop_assert!(code == 2 || code == 3, "{:?} -> {} with {}", argv, code, String::from_utf8_lossy(&err));
        }
    }
}
