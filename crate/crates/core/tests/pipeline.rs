//! End-to-end runs through the library API.

use std::path::PathBuf;

use rd_angular::config::RunConfig;
use rd_angular::driver::{self, Simulation};

fn repo_config(name: &str) -> RunConfig {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name].iter().collect();
    RunConfig::load(&path).unwrap()
}

#[test]
fn every_shipped_config_parses_and_builds() {
    let dir: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs"].iter().collect();
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            let mesh = cfg.build_mesh().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.build_case(&mesh).unwrap();
            n += 1;
        }
    }
    assert!(n >= 10);
}

#[test]
fn ledger_csv_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = repo_config("sod_gmsh.toml");
    cfg.output.dir = tmp.path().to_path_buf();
    let rep = driver::run(&cfg).unwrap();
    let text = std::fs::read_to_string(tmp.path().join("ledger.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), rep.simulation.ledger.rows.len());
    let j0 = rows[0][5];
    for (r, mem) in rows.iter().zip(&rep.simulation.ledger.rows) {
        assert_eq!(r.len(), 7);
        assert_eq!(r[0], mem.t);
        assert_eq!(r[1], mem.mass);
        assert_eq!(r[6], (r[5] - j0).abs());
    }
    assert!(rep.summary.completed);
}

#[test]
fn vtk_snapshot_lists_every_field() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = repo_config("gresho.toml");
    cfg.mesh.rings = Some(4);
    cfg.time.final_time = Some(0.02);
    cfg.output.dir = tmp.path().to_path_buf();
    cfg.output.snapshots = 1;
    driver::run(&cfg).unwrap();
    let text = std::fs::read_to_string(tmp.path().join("snapshot_0001.vtk")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# vtk DataFile Version 3.0"));
    let points: usize = text
        .lines()
        .find_map(|l| l.strip_prefix("POINTS "))
        .and_then(|l| l.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(text.contains(&format!("POINT_DATA {points}")));
    for field in ["SCALARS rho double 1", "VECTORS v double", "SCALARS p double 1", "SCALARS J double 1"] {
        assert!(text.contains(field), "{field}");
    }
    assert!(text.lines().any(|l| l == "22"));
}

#[test]
fn corrected_vortex_keeps_angular_momentum_on_a_small_box() {
    // regular mesh on a box large enough that the vortex stays clear of
    // the periodic seam
    let mut cfg = repo_config("vortex.toml");
    cfg.mesh.cells = Some([24, 24]);
    cfg.mesh.jitter = 0.0;
    cfg.time.final_time = Some(0.3);
    let mut sim = Simulation::new(&cfg).unwrap();
    assert!(sim.run().unwrap().is_none());
    assert!(sim.ledger.max_relative_dj() < 1e-10, "{}", sim.ledger.max_relative_dj());
    let first = &sim.ledger.rows[0];
    let last = sim.ledger.rows.last().unwrap();
    assert!((last.mass - first.mass).abs() < 1e-10 * first.mass);
    assert!((last.energy - first.energy).abs() < 1e-10 * first.energy);
}
