use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mmwave_relay::sweep::{read_csv, write_csv};

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmwave-relay")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_reports_admissibility() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(&["validate", repo().join("configs/default.toml").to_str().unwrap()], dir.path());
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(stdout(&ok).contains("admissible"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[street]\ncow_antenna_height = 1.6\n").unwrap();
    let out = run(&["validate", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("h_C < h_U"));

    let out = run(&["validate", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["validate", bad.to_str().unwrap(), "--set", "street.cow_antenna_height=1.2"], dir.path());
    assert!(out.status.success());
}

#[test]
fn oracle_compares_analytic_and_simulated() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("oracle.csv");
    let out = run(
        &[
            "oracle",
            "p_joint",
            "75",
            "--drops",
            "20000",
            "--seed",
            "3",
            "--mode",
            "analytic",
            "--out",
            csv.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("p_joint@75: analytic"));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("quantity,mode,analytic,sim_mean,half_width_95,n_drops,within_tolerance"));

    assert_eq!(run(&["oracle", "p_joint"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["oracle", "nonsense", "1"], dir.path()).status.code(), Some(2));
    let neg = run(&["oracle", "p_ue_cow", "-10", "--drops", "2000", "--mode", "relaxed"], dir.path());
    assert!(neg.status.success(), "{}", String::from_utf8_lossy(&neg.stderr));
}

#[test]
fn sweep_writes_deterministic_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("small.toml");
    std::fs::write(
        &spec,
        r#"
parameter = "relay_fraction"
grid = [0.2, 0.8]
engines = ["analytic", "sim_analytic_mode"]
strategies = ["baseline", "aggressive"]
template = "fig8"
[config.traffic]
pedestrian_density = 1.0
"#,
    )
    .unwrap();
    let go = |name: &str| {
        let out = run(&["sweep", "small.toml", "--drops", "5000", "--seed", "9", "--out", name], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(dir.path().join(name)).unwrap()
    };
    let a = go("a.csv");
    let b = go("b.csv");
    assert_eq!(a, b);
    let script = std::fs::read_to_string(dir.path().join("a.gp")).unwrap();
    assert!(script.contains("'a.csv'"));

    let rows = read_csv(a.as_slice()).unwrap();
    assert_eq!(rows.len(), 8);
    let mut again = Vec::new();
    write_csv(&rows, &mut again).unwrap();
    assert_eq!(again, a);

    std::fs::write(&spec, "parameter = \"relay_fraction\"\ngrid = [0.2]\nstrategies = []\n").unwrap();
    assert_eq!(run(&["sweep", "small.toml"], dir.path()).status.code(), Some(2));
}
