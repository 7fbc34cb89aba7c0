use std::path::Path;
use std::process::{Command, Output};

fn paa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paa")).args(args).output().expect("spawn paa")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn paa_solve_two_constants() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.csv", "a,b,demand\n5,10,8\n5,10,8\n5,10,8\n5,10,8\n");
    let text = stdout(&paa(&["paa-solve", &m, "--overage", "1", "--underage", "1", "--lower", "0", "--upper", "1"]));
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# paa "));
    assert_eq!(lines.next(), Some("candidate,weight,cv_cost"));
    let w: Vec<f64> = lines.take(2).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    // Grid over the simplex: the cost |5w + 10(1−w) − 8| vanishes only at w = 0.4.
    let best = (0..=1000).map(|k| k as f64 / 1000.0).min_by(|a, b| {
        let f = |w: f64| (5.0 * w + 10.0 * (1.0 - w) - 8.0f64).abs();
        f(*a).total_cmp(&f(*b))
    });
    assert!((w[0] - best.unwrap()).abs() < 1e-9 && (w[1] - 0.6).abs() < 1e-9, "{w:?}");
}

#[test]
fn analytics_perfect_correlation_has_no_gain() {
    let text = stdout(&paa(&["analytics", "--rho", "1"]));
    let row = text.lines().nth(2).unwrap();
    let gain: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(gain, 0.0);
    let curve = stdout(&paa(&["analytics", "--points", "5"]));
    assert_eq!(curve.lines().count(), 2 + 5);
}

#[test]
fn simulate_iid_smoke() {
    let text = stdout(&paa(&["simulate-iid", "--replications", "1", "--t", "20"]));
    let mut lines = text.lines();
    let manifest = lines.next().unwrap();
    assert!(manifest.contains("subcommand=simulate-iid") && manifest.contains("seed=2024") && manifest.contains("config_hash="));
    assert_eq!(lines.next(), Some("t,policy,mean_q,ci_half,oos_mean_cost,oos_q25,oos_q75"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn worker_count_does_not_change_bytes() {
    let run = |w: &str| stdout(&paa(&["--workers", w, "--seed", "11", "simulate-iid", "--replications", "3", "--t", "20,40"]));
    assert_eq!(run("1"), run("3"));
}

#[test]
fn seed_and_config_enter_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[analytics]\npolicy_var = 16.0\n");
    let a = stdout(&paa(&["analytics", "--points", "3"]));
    let b = stdout(&paa(&["--config", &cfg, "analytics", "--points", "3"]));
    assert_ne!(a.lines().next(), b.lines().next());
    assert!(b.lines().last().unwrap().ends_with(",16.0"));
}

#[test]
fn failures_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = paa(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));

    let bad_key = write(dir.path(), "k.toml", "[simulate_iid]\nreplicationz = 3\n");
    let o = paa(&["--config", &bad_key, "simulate-iid"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("simulate_iid"));

    let bad_section = write(dir.path(), "s.toml", "[simulate]\n");
    assert_eq!(paa(&["--config", &bad_section, "analytics"]).status.code(), Some(3));
    assert_eq!(paa(&["--config", "/nonexistent/c.toml", "analytics"]).status.code(), Some(3));

    let o = paa(&["paa-solve", "/nonexistent/m.csv"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot open"));

    let garbled = write(dir.path(), "g.csv", "a,b\n1,2\n");
    assert_eq!(paa(&["paa-solve", &garbled]).status.code(), Some(4));
    assert_eq!(paa(&["empirical"]).status.code(), Some(3));
}

#[test]
fn empirical_from_file_writes_csv_and_audit_json() {
    let dir = tempfile::tempdir().unwrap();
    let mut series = String::from("date,occupancy\n");
    let start = chrono_free_date(2020, 4, 1);
    for i in 0..63 {
        let occ = 300.0 + 20.0 * ((i % 7) as f64) + ((i * 37) % 11) as f64;
        series.push_str(&format!("{},{occ}\n", start(i)));
    }
    let input = write(dir.path(), "occ.csv", &series);
    let cfg = write(
        dir.path(),
        "e.toml",
        "[empirical]\nsubsets = [[0, 3], [3]]\n[empirical.run]\ncandidates = [{ kind = \"eto_regression\", poly_order = 1, linear_sd = false }, { kind = \"saa\" }, { kind = \"quantile_regression\", poly_order = 1 }, { kind = \"constant\", value = 100.0 }]\n",
    );
    let out = dir.path().join("out");
    let o = paa(&["--config", &cfg, "--out", out.to_str().unwrap(), "empirical", "--input", &input]);
    stdout(&o);
    let csv = std::fs::read_to_string(out.join("empirical.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().contains("subcommand=empirical"));
    assert_eq!(lines.next(), Some("policy,p25,median,p75,mean,mapd"));
    assert_eq!(lines.clone().count(), 5);
    assert!(csv.contains("\npaa,"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("empirical.json")).unwrap()).unwrap();
    assert_eq!(json["report"]["weights"].as_array().unwrap().len(), 4);
    assert!(json["manifest"].as_str().unwrap().starts_with("paa "));
    let subsets = std::fs::read_to_string(out.join("empirical_subsets.csv")).unwrap();
    assert!(subsets.contains("\nQ1+Q4,") && subsets.contains("\nQ4,"));
}

/// ISO dates counted from a start day, for months of 30/31 days around April.
fn chrono_free_date(y: i32, m: u32, d: u32) -> impl Fn(u32) -> String {
    move |offset| {
        let lengths = [30, 31, 30, 31, 31, 30];
        let (mut month, mut day) = (m, d + offset);
        while day > lengths[(month - 4) as usize] {
            day -= lengths[(month - 4) as usize];
            month += 1;
        }
        format!("{y}-{month:02}-{day:02}")
    }
}

#[test]
fn empirical_gap_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "gap.csv", "date,occupancy\n2020-04-01,300\n2020-04-03,310\n");
    let o = paa(&["empirical", "--input", &input]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing day"));
}
