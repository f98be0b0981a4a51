use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gausslink"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gausslink-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_config(name: &str, json: &str) -> PathBuf {
    let p = scratch(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Header names and data rows of a CSV with `#` comment lines.
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let head = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (head, rows)
}

fn column(head: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = head.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn help_prints_db_conventions() {
    let o = run(&["--help"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("10*log10(e^(2r))"));
    assert!(text.contains("-10*log10(tau)"));
}

#[test]
fn config_errors_exit_with_two() {
    assert_eq!(run(&["device-run", "--preset", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["device-run", "--config", "/nonexistent/gausslink.json"]).status.code(), Some(2));
    let bad = write_config("bad.json", "{not json");
    assert_eq!(run(&["device-run", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    let unknown = write_config("unknown.json", r#"{"d_c": 3}"#);
    assert_eq!(run(&["device-run", "--config", unknown.to_str().unwrap()]).status.code(), Some(2));
    let negative = write_config("neg.json", r#"{"tau_a": 1.5}"#);
    assert_eq!(run(&["threshold-vs-da", "--config", negative.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn threshold_vs_da_small_grid() {
    let cfg = write_config("da.json", r#"{"points": 4, "d_a_min": 0.1, "d_a_max": 1000, "d_b_values": [0.01, 100]}"#);
    let cfg = cfg.to_str().unwrap();
    let a = run(&["threshold-vs-da", "--config", cfg, "--seed", "5"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = run(&["threshold-vs-da", "--config", cfg, "--seed", "5", "--jobs", "2"]);
    assert_eq!(a.stdout, b.stdout, "output depends on the thread count");

    let text = stdout(&a);
    for key in ["version=", "d_a=", "d_b=", "tau_a=", "tau_b=", "n_th=", "kappa_a=", "kappa_b=", "gamma_m=", " r=", "seed=5"] {
        assert!(text.lines().take_while(|l| l.starts_with('#')).any(|l| l.contains(key)), "header lacks {key}");
    }
    let (head, rows) = parse_csv(&text);
    assert_eq!(rows.len(), 8);
    let d_a = column(&head, &rows, "d_a");
    let d_b = column(&head, &rows, "d_b");
    let r = 5.0 * 10f64.ln() / 20.0;
    for (i, eo) in column(&head, &rows, "EO-down").iter().enumerate() {
        let closed = d_a[i] * (1.0 - (-2.0 * r).exp()) / 2.0;
        assert!((eo - closed).abs() <= 1e-6 * closed);
    }
    for t in ["EO-down", "EO-swap", "EM-down", "EM-swap", "IO-down", "IO-swap", "IM-down", "IM-swap"] {
        let vals = column(&head, &rows, t);
        let ok = column(&head, &rows, &format!("{t} ok"));
        for i in 0..rows.len() {
            assert!(vals[i] >= 0.0 && vals[i] <= d_a[i] * (1.0 + 1e-9), "{t} row {i}");
            assert_eq!(ok[i] == 1.0, vals[i] > 0.0, "{t} row {i}");
        }
    }
    let em_swap = column(&head, &rows, "EM-swap");
    assert!((0..rows.len()).filter(|&i| d_b[i] == 0.01).all(|i| em_swap[i] == 0.0));
}

#[test]
fn threshold_vs_loss_reports_slopes() {
    let cfg = write_config("loss.json", r#"{"loss_db_min": 20, "loss_db_max": 30, "loss_db_step": 5}"#);
    let out = scratch("loss.csv");
    let o = run(&["threshold-vs-loss", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let slope = |t: &str| -> String {
        let key = format!(" {t}=");
        let line = text.lines().find(|l| l.starts_with("# slope") && l.contains(&key)).unwrap();
        line.split(&key).nth(1).unwrap().split(' ').next().unwrap().to_string()
    };
    assert!((slope("EO-down").parse::<f64>().unwrap() - 1.0).abs() < 0.1);
    assert!((slope("IM-down").parse::<f64>().unwrap() - 2.0).abs() < 0.1);
    assert_eq!(slope("IM-swap"), "none");
    let (_, rows) = parse_csv(&text);
    assert_eq!(rows.len(), 3);
}

#[test]
fn device_run_small_window() {
    let cfg = write_config("dev.json", r#"{"loss_db_max": 1.0, "loss_db_step": 0.5}"#);
    let cfg = cfg.to_str().unwrap();
    let a = run(&["device-run", "--config", cfg]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, run(&["device-run", "--config", cfg]).stdout);
    let text = stdout(&a);
    assert!(text.contains("# preset=brubaker2022"));
    let (head, rows) = parse_csv(&text);
    assert_eq!(rows.len(), 3);
    for t in ["EO-down", "EO-swap"] {
        let lo = column(&head, &rows, &format!("{t}@3dB"));
        let hi = column(&head, &rows, &format!("{t}@10dB"));
        for i in 0..rows.len() {
            assert!(hi[i] >= lo[i], "{t} row {i}");
        }
    }
    for name in head.iter().filter(|h| !h.contains(' ') && h.as_str() != "loss_db" && h.as_str() != "tau_e") {
        let v = column(&head, &rows, name);
        assert!(v.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{name} grows with loss");
    }
}

#[test]
fn ebit_rate_reports() {
    let value = |o: &Output| -> serde_json::Value { serde_json::from_slice(&o.stdout).unwrap() };
    let base = value(&run(&["ebit-rate"]));
    let rate = base["ebits_per_second"].as_f64().unwrap();
    assert!(rate > 0.0);
    assert!((base["tau_e"].as_f64().unwrap() - 10f64.powf(-0.036)).abs() < 1e-12);
    let zero = write_config("zero.json", r#"{"fiber_km": 0}"#);
    let near = value(&run(&["ebit-rate", "--config", zero.to_str().unwrap()]));
    let near_rate = near["ebits_per_second"].as_f64().unwrap();
    assert!(near_rate > rate);
    assert!((near_rate - 2000.0 * near["log_negativity"].as_f64().unwrap()).abs() < 1e-12);
    let no_bw = write_config("nobw.json", r#"{"bandwidth_hz": 0}"#);
    assert_eq!(value(&run(&["ebit-rate", "--config", no_bw.to_str().unwrap()]))["ebits_per_second"], 0.0);
}

#[test]
fn validate_small_scale_passes_and_replays() {
    let cfg = write_config("val.json", r#"{"validation_scale": 0.002}"#);
    let cfg = cfg.to_str().unwrap();
    let a = run(&["validate", "--config", cfg, "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["seed"], 11);
    assert_eq!(report["passed"], true);
    assert_eq!(a.stdout, run(&["validate", "--config", cfg, "--seed", "11"]).stdout);
    assert_ne!(a.stdout, run(&["validate", "--config", cfg, "--seed", "12"]).stdout);
}
