use std::path::PathBuf;
use std::process::{Command, Output};

fn celldim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_celldim")).args(args).env_remove("CELLDIM_SEED").output().expect("spawn celldim")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn unknown_flag_is_usage_error() {
    let o = celldim(&["dimension", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_is_usage_error() {
    let cfg = scratch("bad.toml");
    std::fs::write(&cfg, "[scenario]\nisd = 8000\nbogus = 1\n").unwrap();
    let o = celldim(&["dimension", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("bogus"), "{err}");

    std::fs::write(&cfg, "[scenario]\nt_cp = 500.0\n").unwrap();
    let o = celldim(&["dimension", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_sweep_preset_is_usage_error() {
    assert_eq!(celldim(&["sweep", "--preset", "fig42"]).status.code(), Some(2));
}

#[test]
fn dimension_writes_csv_and_manifest() {
    let out = scratch("rural.csv");
    let o = celldim(&[
        "dimension",
        "--preset",
        "rural",
        "--mode",
        "broadcast",
        "--samples",
        "3000",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("series,axis,axis_value,mode,bw_national_mhz"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "4x1");
    assert_eq!(row[3], "broadcast");
    assert_eq!(row.last(), Some(&"ok"));
    let required: f64 = row[7].parse().unwrap();
    let saving: f64 = row[8].parse().unwrap();
    assert!((required + saving - 320.0).abs() < 1e-5);

    let manifest = std::fs::read_to_string(scratch("rural.csv.manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(m["seed"], 5);
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(m["points"].as_array().unwrap().len(), 1);
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_celldim"));
        c.args(["dump", "sinr", "--samples", "500"]).env_remove("CELLDIM_SEED");
        if let Some(e) = env {
            c.env("CELLDIM_SEED", e);
        }
        if let Some(f) = flag {
            c.args(["--seed", f]);
        }
        stdout(&c.output().unwrap())
    };
    assert_eq!(run(Some("9"), None), run(None, Some("9")));
    assert_ne!(run(Some("9"), None), run(None, None));
}

#[test]
fn dump_layout_lists_sites() {
    let o = celldim(&["dump", "layout", "--preset", "urban"]);
    assert!(o.status.success());
    let text = stdout(&o);
    // 4 rings of sites plus the header
    assert_eq!(text.lines().count(), 1 + 61);
}

#[test]
fn strict_flags_band_overrun() {
    let cfg = scratch("wide.toml");
    std::fs::write(&cfg, "preset = \"rural\"\n[scenario]\nisd = 16000\n").unwrap();
    let args = ["dimension", "--config", cfg.to_str().unwrap(), "--mode", "broadcast", "--samples", "3000"];
    assert_eq!(celldim(&args).status.code(), Some(0));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(celldim(&strict).status.code(), Some(1));
}

#[test]
fn validate_passes() {
    let o = celldim(&["validate"]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 8);
    assert!(!text.contains("FAIL "));
}
