use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rd-angular"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn vortex_toml(out: &str, extra_time: &str) -> String {
    format!(
        r#"
[case]
name = "isentropic_vortex"
[mesh]
generator = "tri_grid"
cells = [8, 8]
x_range = [-5.0, 5.0]
y_range = [-5.0, 5.0]
periodic = true
[scheme]
name = "galerkin_cip"
correction = "second_order"
[time]
final_time = 0.2
{extra_time}
[output]
dir = "{out}"
snapshots = 1
"#
    )
}

#[test]
fn run_succeeds_and_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("v.toml"), vortex_toml("res", "")).unwrap();
    let out = bin(&["run", "v.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("isentropic_vortex galerkin_cip degree 1 correction second_order"), "{stdout}");
    let res = tmp.path().join("res");
    let ledger = fs::read_to_string(res.join("ledger.csv")).unwrap();
    assert_eq!(ledger.lines().next(), Some("t,mass,mx,my,E,J,dJ"));
    let vtk = fs::read_to_string(res.join("snapshot_0001.vtk")).unwrap();
    assert!(vtk.contains("POINT_DATA 81"));
    assert!(fs::read_to_string(res.join("summary.toml")).unwrap().contains("completed = true"));
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad_scheme = vortex_toml("res", "").replace("galerkin_cip", "lax_wendroff");
    fs::write(tmp.path().join("a.toml"), bad_scheme).unwrap();
    let out = bin(&["run", "a.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown scheme"));

    fs::write(tmp.path().join("b.toml"), vortex_toml("res", "colour = 3")).unwrap();
    assert_eq!(bin(&["run", "b.toml"], tmp.path()).status.code(), Some(2));
    assert_eq!(bin(&["run", "missing.toml"], tmp.path()).status.code(), Some(2));
}

#[test]
fn mesh_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("broken.msh"), "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n1\n1 0 0\n").unwrap();
    let cfg = "[case]\nname = \"sod\"\n[mesh]\nfile = \"broken.msh\"\n";
    fs::write(tmp.path().join("m.toml"), cfg).unwrap();
    let out = bin(&["run", "m.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mesh format error"));
}

#[test]
fn blow_up_exits_4_with_last_valid_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("v.toml"), vortex_toml("res", "cfl = 50.0").replace("final_time = 0.2", "final_time = 1.0")).unwrap();
    let out = bin(&["run", "v.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("blow-up after t ="));
    assert!(tmp.path().join("res/last_valid.vtk").exists());
    let summary = fs::read_to_string(tmp.path().join("res/summary.toml")).unwrap();
    assert!(summary.contains("completed = false") && summary.contains("blow_up_time"));
}

#[test]
fn study_prints_table_and_csv() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("v.toml"), vortex_toml("res", "")).unwrap();
    let out = bin(&["study", "v.toml", "--meshes", "8,16"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().count(), 3, "{stdout}");
    let csv = fs::read_to_string(tmp.path().join("res/study.csv")).unwrap();
    assert!(csv.starts_with("cells,h,l2_rho"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn kernels_selftest_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin(&["kernels-selftest", "--samples", "200"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 5, "{stdout}");
}
