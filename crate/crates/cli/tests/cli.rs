use std::process::{Command, Output};

use serde_json::Value;

fn ptspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptspec"))
        .args(args)
        .env_remove("PTSPEC_DIMS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn without_timestamp(mut v: Value) -> Value {
    v["provenance"]["timestamp"] = Value::Null;
    v
}

#[test]
fn harmonic_spectrum() {
    let out = ptspec(&["spectrum", "--k", "3", "--g", "0", "--levels", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let levels = r["results"]["levels"].as_array().unwrap();
    let values: Vec<f64> = levels.iter().map(|l| l["value"]["re"].as_f64().unwrap()).collect();
    assert_eq!(values, vec![1.0, 3.0, 5.0]);
    assert_eq!(r["results"]["max_imag"].as_f64(), Some(0.0));
    assert_eq!(r["checks"][0]["status"], "pass");
    assert_eq!(r["config"]["k"], 3);
    assert!(r["provenance"]["timestamp"].is_string());
    assert_eq!(r["provenance"]["traces"].as_array().unwrap().len(), 3);
}

#[test]
fn linear_sweep_csv() {
    let out = ptspec(&["sweep", "--k", "1", "--g-grid", "0.5,1.0", "--levels", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let ground: Vec<(f64, f64)> = reader
        .records()
        .map(|r| r.unwrap())
        .filter(|r| &r[col("level")] == "0")
        .map(|r| (r[col("g")].parse().unwrap(), r[col("energy_re")].parse().unwrap()))
        .collect();
    assert_eq!(ground.len(), 2);
    for ((g, e), want) in ground.into_iter().zip([1.0625, 1.25]) {
        assert!((e - want).abs() < 1e-9, "g={g}: {e}");
    }
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let args = ["sweep", "--k-grid", "1,3", "--g-grid", "0.1,0.4,0.8", "--levels", "3", "--dims", "32,48,64"];
    let one = without_timestamp(json(&ptspec(&[&args[..], &["--jobs", "1"]].concat())));
    let four = without_timestamp(json(&ptspec(&[&args[..], &["--jobs", "4"]].concat())));
    assert_eq!(one, four);
    let points = one["results"]["points"].as_array().unwrap();
    let order: Vec<(u64, f64)> = points
        .iter()
        .map(|p| (p["k"].as_u64().unwrap(), p["g"].as_f64().unwrap()))
        .collect();
    assert_eq!(order, vec![(1, 0.1), (1, 0.4), (1, 0.8), (3, 0.1), (3, 0.4), (3, 0.8)]);
}

#[test]
fn repeated_runs_match_byte_for_byte_except_timestamp() {
    let args = ["norms", "--k", "3", "--g", "0.3", "--levels", "4", "--dims", "48,64,96"];
    let a = String::from_utf8(ptspec(&args).stdout).unwrap();
    let b = String::from_utf8(ptspec(&args).stdout).unwrap();
    let strip = |s: &str| -> String { s.lines().filter(|l| !l.contains("\"timestamp\"")).collect() };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn floats_round_trip_through_report() {
    let out = ptspec(&["perturb", "--k", "3", "--g", "0.1", "--order", "6", "--levels", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("-1.8164062500000000e0"), "E4 = -465/256 written exactly");
    let r: Value = serde_json::from_str(&text).unwrap();
    let level = &r["results"]["levels"][0];
    assert_eq!(level["energy_coeffs_exact"][2], "11/16");
    assert_eq!(level["norm_series"]["coeffs_exact"][2], "-29/96");
}

#[test]
fn exit_codes() {
    assert_eq!(ptspec(&["--help"]).status.code(), Some(0));
    assert_eq!(ptspec(&["--version"]).status.code(), Some(0));
    assert!(String::from_utf8(ptspec(&["--version"]).stdout).unwrap().starts_with("ptspec "));

    for bad in [
        &["spectrum", "--k", "0"][..],
        &["spectrum", "--omega", "-1"],
        &["spectrum", "--format", "csv"],
        &["sweep"],
        &["nonsense"],
    ] {
        let out = ptspec(bad);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }

    // one dimension cannot demonstrate convergence
    let out = ptspec(&["spectrum", "--k", "3", "--g", "1", "--levels", "4", "--dims", "32"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["checks"][0]["status"], "fail");
}

#[test]
fn computational_failure_is_reported() {
    // levels beyond N/3 of the largest dimension
    let out = ptspec(&["norms", "--k", "3", "--g", "0.1", "--levels", "20", "--dims", "24,32"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert!(r["results"]["error"]["message"].is_string());
}

#[test]
fn dims_from_environment_and_out_file() {
    let dir = std::env::temp_dir().join(format!("ptspec-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = Command::new(env!("CARGO_BIN_EXE_ptspec"))
        .args(["spectrum", "--k", "1", "--g", "0.2", "--levels", "2", "--out"])
        .arg(&path)
        .env("PTSPEC_DIMS", "24,40")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["config"]["dims"], serde_json::json!([24, 40]));
    assert_eq!(r["results"]["final_dim"], 40);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn algebra_report() {
    let r = json(&ptspec(&["algebra", "--k", "3"]));
    let comps = r["results"]["frequency_decomposition"]["components"].as_array().unwrap();
    let degrees: Vec<i64> = comps.iter().map(|c| c["net_degree"].as_i64().unwrap()).collect();
    assert_eq!(degrees, vec![3, 1, -1, -3]);
    assert_eq!(r["results"]["commutators"]["[a, a†]"], "1");
    assert_eq!(r["results"]["normal_ordered"]["x^2 + p^2"], "2·ca + 1");
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
}
