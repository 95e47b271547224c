//! Time loop, run artifacts and convergence studies.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::cases::{self, Case};
use crate::config::RunConfig;
use crate::correction::CorrectionMode;
use crate::dec::{compute_dt, DecSolver};
use crate::diagnostics::{self, ConservationLedger};
use crate::error::{Error, Result};
use crate::euler::State;
use crate::residual::Discretization;
use crate::vtk::Snapshot;

/// Where and why a run stopped early.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowUp {
    /// Time of the last admissible state.
    pub time: f64,
    pub step: usize,
    pub reason: String,
}

/// A configured problem together with its current state.
pub struct Simulation {
    pub case: Case,
    pub solver: DecSolver,
    pub correction: CorrectionMode,
    pub final_time: f64,
    pub cfl: f64,
    pub dt_max: f64,
    pub max_steps: Option<usize>,
    pub u: Vec<State>,
    pub t: f64,
    pub steps: usize,
    pub ledger: ConservationLedger,
    /// DeC defect norms of the last step.
    pub last_defects: Vec<f64>,
}

impl Simulation {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let mesh = cfg.build_mesh()?;
        let case = cfg.build_case(&mesh)?;
        let bcs = cfg.boundary_conditions(&mesh, &case)?;
        let disc = Discretization::new(&mesh, cfg.mesh.degree, &bcs, cfg.gas()?, cfg.scheme_config()?)?;
        let mut sim = Self::from_discretization(case.clone(), disc, cfg.correction()?, cfg.final_time(&case)?, cfg.cfl(&case)?)?;
        if let Some(d) = cfg.time.dt_max {
            if !(d > 0.0) {
                return Err(Error::Config(format!("time.dt_max must be > 0, got {d}")));
            }
            sim.dt_max = d;
        }
        sim.max_steps = cfg.time.max_steps;
        Ok(sim)
    }

    /// Start from the case's initial data on an existing discretization.
    pub fn from_discretization(case: Case, disc: Discretization, correction: CorrectionMode, final_time: f64, cfl: f64) -> Result<Self> {
        let u = cases::interpolate(&disc, |x| case.initial(x));
        for (s, us) in u.iter().enumerate() {
            disc.gas.pressure(us).map_err(|e| Error::Config(format!("initial state at DOF {s}: {e}")))?;
        }
        let solver = DecSolver::new(disc, correction)?;
        let mut ledger = ConservationLedger::new();
        ledger.record(&solver.disc, &u, correction, 0.0);
        Ok(Simulation {
            case,
            solver,
            correction,
            final_time,
            cfl,
            dt_max: f64::INFINITY,
            max_steps: None,
            u,
            t: 0.0,
            steps: 0,
            ledger,
            last_defects: Vec::new(),
        })
    }

    pub fn disc(&self) -> &Discretization {
        &self.solver.disc
    }

    pub fn finished(&self) -> bool {
        self.t >= self.final_time || self.max_steps.is_some_and(|m| self.steps >= m)
    }

    /// Advance one step (clipped to land on the final time) and append a
    /// ledger row. On failure the state is left untouched.
    pub fn step(&mut self) -> Result<f64> {
        let remaining = self.final_time - self.t;
        let dt = compute_dt(&self.solver.disc, &self.u, self.cfl, self.dt_max.min(remaining))?;
        let out = self.solver.step(&self.u, dt)?;
        self.u = out.u;
        self.last_defects = out.defects;
        self.steps += 1;
        // snap to the end to avoid a sliver step from round-off
        self.t = if remaining - dt <= 1e-12 * self.final_time.max(1.0) { self.final_time } else { self.t + dt };
        self.ledger.record(&self.solver.disc, &self.u, self.correction, self.t);
        Ok(dt)
    }

    /// Step to the end. `observer` sees every accepted state, including
    /// the initial one. A loss of admissibility ends the run with a
    /// [`BlowUp`]; other errors propagate.
    pub fn run_with<F: FnMut(&Simulation) -> Result<()>>(&mut self, mut observer: F) -> Result<Option<BlowUp>> {
        observer(self)?;
        while !self.finished() {
            match self.step() {
                Ok(_) => observer(self)?,
                Err(e @ (Error::StepFailure { .. } | Error::State(_))) => {
                    return Ok(Some(BlowUp {
                        time: self.t,
                        step: self.steps,
                        reason: e.to_string(),
                    }))
                }
                Err(e) => return Err(e),
            }
        }
        Ok(None)
    }

    pub fn run(&mut self) -> Result<Option<BlowUp>> {
        self.run_with(|_| Ok(()))
    }

    pub fn summary(&self, blow_up: Option<&BlowUp>, wall_seconds: f64) -> RunSummary {
        let disc = self.disc();
        let gas = &disc.gas;
        let mut rho = [f64::INFINITY, f64::NEG_INFINITY];
        let mut p_min = f64::INFINITY;
        let mut speed = 0.0f64;
        for u in &self.u {
            rho = [rho[0].min(u[0]), rho[1].max(u[0])];
            p_min = p_min.min(gas.pressure(u).unwrap_or(f64::NAN));
            speed = speed.max(u[1].hypot(u[2]) / u[0]);
        }
        let first = &self.ledger.rows[0];
        let last = self.ledger.rows.last().unwrap_or(first);
        let l2 = self
            .case
            .exact([0.0, 0.0], self.t)
            .map(|_| diagnostics::quadrature_l2(disc, gas, &self.u, |x| self.case.exact(x, self.t).unwrap_or_default()));
        RunSummary {
            case: self.case.name().into(),
            scheme: disc.config.scheme.name().into(),
            correction: self.correction.to_string(),
            degree: disc.degree(),
            elements: disc.n_elements(),
            dofs: disc.n_dofs(),
            steps: self.steps,
            time: self.t,
            final_time: self.final_time,
            completed: blow_up.is_none() && self.t >= self.final_time,
            blow_up_time: blow_up.map(|b| b.time),
            blow_up_reason: blow_up.map(|b| b.reason.clone()),
            wall_seconds,
            max_dj: self.ledger.max_dj(),
            max_relative_dj: self.ledger.max_relative_dj(),
            mass_drift: last.mass - first.mass,
            energy_drift: last.energy - first.energy,
            rho_min: rho[0],
            rho_max: rho[1],
            p_min,
            speed_max: speed,
            l2_error: l2,
        }
    }
}

/// Run-summary file contents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub case: String,
    pub scheme: String,
    pub correction: String,
    pub degree: u32,
    pub elements: usize,
    pub dofs: usize,
    pub steps: usize,
    pub time: f64,
    pub final_time: f64,
    pub completed: bool,
    pub blow_up_time: Option<f64>,
    pub blow_up_reason: Option<String>,
    pub wall_seconds: f64,
    pub max_dj: f64,
    pub max_relative_dj: f64,
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub p_min: f64,
    pub speed_max: f64,
    /// Quadrature `L2` error per conserved variable, when an exact
    /// solution is known.
    pub l2_error: Option<[f64; 4]>,
}

impl RunSummary {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("summary serializes")
    }
}

pub struct RunReport {
    pub summary: RunSummary,
    pub simulation: Simulation,
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Run a configuration and write its artifacts into `cfg.output.dir`:
/// `ledger.csv`, `snapshot_NNNN.vtk` files, `summary.toml`, and on blow-up
/// `last_valid.vtk`.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    in_pool(cfg.output.threads, || run_inner(cfg))?
}

fn run_inner(cfg: &RunConfig) -> Result<RunReport> {
    let start = Instant::now();
    let mut sim = Simulation::new(cfg)?;
    let dir = cfg.output.dir.as_path();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let gamma = sim.disc().gas.gamma;
    let n_snap = cfg.output.snapshots;
    let mut next = 0usize;
    let blow_up = sim.run_with(|s| {
        if n_snap == 0 {
            return Ok(());
        }
        let due = s.final_time * next as f64 / n_snap as f64;
        if next <= n_snap && (s.t >= due || s.t >= s.final_time) {
            let path = dir.join(format!("snapshot_{next:04}.vtk"));
            Snapshot::new(s.disc(), &s.u).write_file(&path, gamma, &format!("{} t={}", s.case.name(), s.t))?;
            while next <= n_snap && s.final_time * next as f64 / n_snap as f64 <= s.t {
                next += 1;
            }
        }
        Ok(())
    })?;
    if let Some(b) = &blow_up {
        Snapshot::new(sim.disc(), &sim.u).write_file(&dir.join("last_valid.vtk"), gamma, &format!("{} t={} last valid", sim.case.name(), b.time))?;
    }
    sim.ledger.write_csv(&dir.join("ledger.csv"))?;
    let summary = sim.summary(blow_up.as_ref(), start.elapsed().as_secs_f64());
    let path = dir.join("summary.toml");
    fs::write(&path, summary.to_toml()).map_err(|e| Error::io(&path, e))?;
    Ok(RunReport { summary, simulation: sim })
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub cells: usize,
    pub h: f64,
    pub l2: [f64; 4],
    /// Observed order against the previous row.
    pub order: Option<[f64; 4]>,
}

/// Run `cfg` on a sequence of grid resolutions (cells per direction for
/// grids, rings for discs) and compare with the exact solution at the
/// final time. No files are written.
pub fn convergence_study(cfg: &RunConfig, meshes: &[usize]) -> Result<Vec<StudyRow>> {
    if meshes.len() < 2 {
        return Err(Error::Config("a study needs at least two meshes".into()));
    }
    let mut rows: Vec<StudyRow> = Vec::with_capacity(meshes.len());
    for &n in meshes {
        let mut c = cfg.clone();
        let h = match c.mesh.generator.as_deref() {
            Some("tri_grid" | "quad_grid") => {
                c.mesh.cells = Some([n, n]);
                let xr = c.mesh.x_range.unwrap_or([0.0, 1.0]);
                (xr[1] - xr[0]) / n as f64
            }
            Some("disc") => {
                c.mesh.rings = Some(n);
                c.mesh.radius.unwrap_or(1.0) / n as f64
            }
            _ => return Err(Error::Config("a study needs a mesh generator".into())),
        };
        let mut sim = in_pool(cfg.output.threads, || Simulation::new(&c))??;
        if sim.case.exact([0.0, 0.0], sim.final_time).is_none() {
            return Err(Error::Config(format!("case '{}' has no exact solution for a study", sim.case.name())));
        }
        if let Some(b) = in_pool(cfg.output.threads, || sim.run())?? {
            return Err(Error::Config(format!("study run on {n} cells blew up at t = {}: {}", b.time, b.reason)));
        }
        let t = sim.t;
        let case = &sim.case;
        let l2 = diagnostics::quadrature_l2(sim.disc(), &sim.disc().gas, &sim.u, |x| case.exact(x, t).unwrap_or_default());
        let order = rows.last().map(|p| std::array::from_fn(|i| (p.l2[i] / l2[i]).ln() / (p.h / h).ln()));
        rows.push(StudyRow { cells: n, h, l2, order });
    }
    Ok(rows)
}

/// Write a study table as CSV.
pub fn write_study<W: Write>(rows: &[StudyRow], w: &mut W) -> std::io::Result<()> {
    writeln!(w, "cells,h,l2_rho,l2_mx,l2_my,l2_E,order_rho,order_mx,order_my,order_E")?;
    for r in rows {
        write!(w, "{},{:.6e}", r.cells, r.h)?;
        for v in r.l2 {
            write!(w, ",{v:.6e}")?;
        }
        for i in 0..4 {
            match r.order {
                Some(o) => write!(w, ",{:.4}", o[i])?,
                None => write!(w, ",")?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_study_file(rows: &[StudyRow], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_study(rows, &mut buf).map_err(|e| Error::io(path, e))?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vortex_cfg(dir: &Path, degree: u32, final_time: f64) -> RunConfig {
        RunConfig::from_toml(&format!(
            r#"
[case]
name = "isentropic_vortex"
[mesh]
generator = "tri_grid"
cells = [8, 8]
x_range = [-5.0, 5.0]
y_range = [-5.0, 5.0]
periodic = true
degree = {degree}
[scheme]
name = "galerkin_cip"
correction = "high_order"
[time]
final_time = {final_time}
[output]
dir = "{}"
snapshots = 2
"#,
            dir.display()
        ))
        .unwrap()
    }

    #[test]
    fn run_writes_artifacts() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = vortex_cfg(tmp.path(), 1, 0.3);
        let rep = run(&cfg).unwrap();
        assert!(rep.summary.completed);
        assert_eq!(rep.simulation.t, 0.3);
        for f in ["ledger.csv", "summary.toml", "snapshot_0000.vtk", "snapshot_0001.vtk", "snapshot_0002.vtk"] {
            assert!(tmp.path().join(f).exists(), "{f}");
        }
        let ledger = fs::read_to_string(tmp.path().join("ledger.csv")).unwrap();
        assert_eq!(ledger.lines().count(), rep.simulation.steps + 2);
        let summary: toml::Value = toml::from_str(&fs::read_to_string(tmp.path().join("summary.toml")).unwrap()).unwrap();
        assert_eq!(summary["case"].as_str(), Some("isentropic_vortex"));
        assert!(summary.get("blow_up_time").is_none());
    }

    #[test]
    fn ledger_time_is_monotone() {
        let tmp = tempfile::tempdir().unwrap();
        let rep = run(&vortex_cfg(tmp.path(), 2, 0.2)).unwrap();
        let rows = &rep.simulation.ledger.rows;
        assert!(rows.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(rows.last().unwrap().t, 0.2);
    }

    #[test]
    fn steady_study_has_interpolation_order() {
        // zero final time: the error is the interpolation error
        let tmp = tempfile::tempdir().unwrap();
        for (deg, lo) in [(1, 1.8), (2, 2.6)] {
            let cfg = vortex_cfg(tmp.path(), deg, 0.0);
            let rows = convergence_study(&cfg, &[16, 32]).unwrap();
            let order = rows[1].order.unwrap()[0];
            assert!(order > lo, "degree {deg}: order {order}");
            let mut buf = Vec::new();
            write_study(&rows, &mut buf).unwrap();
            assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = vortex_cfg(tmp.path(), 1, 1.0);
        // an absurd CFL number makes the explicit scheme fail quickly
        cfg.time.cfl = Some(50.0);
        let rep = run(&cfg).unwrap();
        assert!(!rep.summary.completed);
        let b = rep.summary.blow_up_time.unwrap();
        assert!(b < 1.0);
        assert!(tmp.path().join("last_valid.vtk").exists());
    }
}
