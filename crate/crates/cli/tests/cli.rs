use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_coarse-grain");

const DEPHASING: &str = "\
system.n = 1
system.gamma = 0.5
system.field.1.z = -0.5
system.coupling = 0 0 0 0 1 0
bath.model = ohmic
bath.s = 1
bath.omega_ph = 1
bath.omega_ct = 5
bath.lambda = 0.1
generator.kind = cg-adaptive
grid.t_max = 4
grid.points = 5
output.elements = 0 1
";

const BM_HOT: &str = "\
system.n = 1
system.gamma = 0.5
system.field.1.z = -0.5
system.coupling = 1 0 0 0 0 0
bath.model = ohmic
bath.s = 2
bath.omega_ph = 1
bath.omega_ct = 5
bath.lambda = 0.3
generator.kind = bm
grid.t_max = 100
grid.points = 101
";

fn coarse_grain(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN).args(args).current_dir(dir).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

#[test]
fn run_writes_the_documented_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "deph.conf", DEPHASING);
    let out = coarse_grain(&["run", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("deph.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "time,eig_1,eig_2,trace_err,min_eig,abs_rho_0_1");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[0][5], 0.5);
    for w in rows.windows(2) {
        assert!(w[1][5] < w[0][5]);
    }
}

#[test]
fn runs_are_bitwise_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "deph.conf", DEPHASING);
    for (i, method) in ["rk4", "expm"].iter().enumerate() {
        let a = format!("a{i}.csv");
        let b = format!("b{i}.csv");
        assert!(coarse_grain(&["--method", method, "run", &cfg, "--out", &a], dir.path()).status.success());
        assert!(coarse_grain(&["run", &cfg, "--out", &b, "--method", method], dir.path()).status.success());
        let read = |p: &str| std::fs::read(dir.path().join(p)).unwrap();
        assert_eq!(read(&a), read(&b));
    }
}

#[test]
fn state_dump_holds_every_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "deph.conf", DEPHASING);
    let out = coarse_grain(&["run", &cfg, "--json", "states.json"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("states.json")).unwrap()).unwrap();
    assert_eq!(v["times"].as_array().unwrap().len(), 5);
    assert_eq!(v["states"][0].as_array().unwrap().len(), 4);
    assert_eq!(v["basis"], "computational");
}

#[test]
fn spectrum_reports_degeneracy_classes() {
    let dir = tempfile::tempdir().unwrap();
    let text = "\
system.n = 2
system.gamma = 1
system.field.1.z = -0.5
system.field.2.z = -0.5
system.coupling = 1 0 0 0 0 0
bath.model = drude
bath.tau_b = 1
generator.kind = bms
grid.t_max = 1
grid.points = 2
";
    let cfg = write_config(dir.path(), "pair.conf", text);
    let out = coarse_grain(&["spectrum", &cfg], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let sizes: Vec<usize> =
        v["classes"].as_array().unwrap().iter().map(|c| c["members"].as_array().unwrap().len()).collect();
    assert_eq!(sizes, [1, 2, 1]);
    assert_eq!(v["classes"][0]["dominant"][0], "00");
}

#[test]
fn liouvillian_prints_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "deph.conf", DEPHASING);
    let out = coarse_grain(&["liouvillian", &cfg, "--tau", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.is_object());
}

#[test]
fn bad_configs_fail_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.conf", &format!("{DEPHASING}grid.t_max = 5\n"));
    let out = coarse_grain(&["run", &cfg], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.t_max"));
    assert!(!coarse_grain(&["run", "missing.conf"], dir.path()).status.success());
}

#[test]
fn abort_flag_stops_an_unphysical_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bm.conf", BM_HOT);
    assert!(coarse_grain(&["run", &cfg], dir.path()).status.success());
    let out = coarse_grain(&["--abort-on-unphysical", "run", &cfg, "--out", "aborted.csv"], dir.path());
    assert!(!out.status.success());
    assert!(!dir.path().join("aborted.csv").exists());
}

#[test]
fn figures_write_their_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = coarse_grain(&["figures", "fig5", "--out-dir", "."], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("fig5_summary.json").exists());
    let out = coarse_grain(&["run", "fig5_n1_lambda0.3.conf", "--out", "again.csv"], dir.path());
    assert!(out.status.success());
    let read = |p: &str| std::fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("again.csv"), read("fig5_n1_lambda0.3.csv"));
    assert!(!coarse_grain(&["figures", "fig9"], dir.path()).status.success());
}
