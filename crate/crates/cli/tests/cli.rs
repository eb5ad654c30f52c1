use std::path::{Path, PathBuf};
use std::process::Command;

use irs_cli::{parse_str, run_experiment, ResultTable};
use irs_core::parallel::Execution;

const SMALL_SECURE: &str = r#"{
    "scenario": "secure",
    "geometry": {
        "tx": {"position": [0, 0, 10], "antennas": 3},
        "irs_sites": [{"position": [30, 20, 10]}],
        "receivers": [
            {"role": "user", "count": 2, "direct_blocked": true,
             "region": {"kind": "disc", "center": [40, 0], "radius": 20, "height": 1.5}},
            {"role": "eavesdropper", "antennas": 2,
             "region": {"kind": "disc", "center": [40, 0], "radius": 20, "height": 1.5}}
        ]
    },
    "irs": {"elements": [4]},
    "sweep": {"parameter": "secure.power_dbm", "values": [20, 25, 30]},
    "mc": {"trials": 2, "master_seed": 3}
}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_irs-sim"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn rows_follow_sweep_and_trial_order() {
    let spec = parse_str(SMALL_SECURE).unwrap();
    let t = run_experiment(&spec, Execution::Auto).unwrap();
    assert_eq!(t.rows.len(), 6);
    let order: Vec<(String, usize)> = t.rows.iter().map(|r| (r.sweep_value.clone(), r.trial)).collect();
    assert_eq!(order[1], ("2.0000000000000000e1".to_string(), 1));
    assert_eq!(order[2].1, 0);
    assert!(t
        .rows
        .iter()
        .all(|r| r.sweep_param == "secure.power_dbm" && r.model == "ids" && r.method == "ao"));
    assert!(t
        .rows
        .iter()
        .all(|r| r.feasible && r.objective > 0.0 && r.runtime_ms == 0.0));
    // Sweep points get distinct seeds, trials too.
    assert_ne!(t.rows[0].seed, t.rows[1].seed);
    assert_ne!(t.rows[0].seed, t.rows[2].seed);
}

#[test]
fn variants_share_the_trial_seed() {
    let text = SMALL_SECURE.replace(
        r#""mc":"#,
        r#""variants": [{"name": "a", "set": {}}, {"name": "b", "set": {"irs.model": "none"}}], "mc":"#,
    );
    let spec = parse_str(&text).unwrap();
    let t = run_experiment(&spec, Execution::Sequential).unwrap();
    assert_eq!(t.rows.len(), 12);
    for pair in t.rows.chunks(2) {
        assert_eq!((pair[0].model.as_str(), pair[1].model.as_str()), ("a", "b"));
        assert_eq!(pair[0].seed, pair[1].seed);
        assert_eq!(pair[1].objective, 0.0);
    }
}

#[test]
fn csv_round_trips_and_is_deterministic() {
    let spec = parse_str(SMALL_SECURE).unwrap();
    let a = run_experiment(&spec, Execution::Auto).unwrap();
    let b = run_experiment(&spec, Execution::Sequential).unwrap();
    let bytes = a.to_bytes().unwrap();
    assert_eq!(bytes, b.to_bytes().unwrap());
    let text = String::from_utf8(bytes.clone()).unwrap();
    assert!(text.starts_with(
        "scenario,model,method,sweep_param,sweep_value,trial,objective,feasible,iterations,runtime_ms,seed\n"
    ));
    assert!(!text.contains('\r'));
    assert_eq!(ResultTable::read(bytes.as_slice()).unwrap(), a);
}

#[test]
fn run_writes_csv_and_honours_the_seed_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL_SECURE);
    let out = dir.path().join("r.csv");
    let status = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--threads", "2"])
        .status()
        .unwrap();
    assert!(status.success());
    let t = ResultTable::read_csv(&out).unwrap();
    assert_eq!(t.rows.len(), 6);

    let out2 = dir.path().join("s.csv");
    let status = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(&out2)
        .args(["--seed", "4"])
        .status()
        .unwrap();
    assert!(status.success());
    assert_ne!(ResultTable::read_csv(&out2).unwrap().rows[0].seed, t.rows[0].seed);
}

#[test]
fn exit_codes_distinguish_config_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        &SMALL_SECURE.replace(r#""irs": {"#, r#""irs": {"foo": 1, "#),
    );
    let o = bin().arg("run").arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("irs.foo"));

    let o = bin().arg("run").arg(dir.path().join("missing.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    let good = write(dir.path(), "c.json", SMALL_SECURE);
    let o = bin()
        .arg("run")
        .arg(&good)
        .arg("--out")
        .arg(dir.path().join("no/such/dir/r.csv"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));

    let o = bin().arg("oracle-check").arg(&good).output().unwrap();
    assert_eq!(o.status.code(), Some(1), "oracle-check needs a swipt config");
}

#[test]
fn oracle_check_passes_on_a_small_swipt_config() {
    let text = r#"{
        "scenario": "swipt",
        "geometry": {
            "tx": {"position": [0, 0, 10], "antennas": 3},
            "irs_sites": [{"position": [20, 5, 5], "rows": 4}],
            "receivers": [
                {"role": "info", "count": 2,
                 "region": {"kind": "sector", "origin": [20, 5], "height": 1.5, "min_distance": 15,
                            "max_distance": 25, "min_angle_deg": -60, "max_angle_deg": 0}},
                {"role": "energy",
                 "region": {"kind": "sector", "origin": [20, 5], "height": 1.5, "min_distance": 4,
                            "max_distance": 6, "min_angle_deg": -60, "max_angle_deg": 0}}
            ]
        },
        "noise_dbm": -70,
        "irs": {"elements": [32]},
        "codebook": {"tiles": 2, "modes": 3},
        "swipt": {"gamma_db": 5},
        "mc": {"trials": 3}
    }"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "o.json", text);
    let o = bin().arg("oracle-check").arg(&cfg).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("all 3 instances agree"));

    let out = dir.path().join("r.csv");
    assert!(bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let t = ResultTable::read_csv(&out).unwrap();
    assert!(t
        .rows
        .iter()
        .all(|r| r.model == "phy-n2-m3" && r.method == "bnb" && r.feasible));
}

#[test]
fn shipped_configs_parse() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        let spec = irs_cli::parse_config(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert!(!spec.resolve().unwrap().is_empty());
        n += 1;
    }
    assert!(n >= 4);
}
