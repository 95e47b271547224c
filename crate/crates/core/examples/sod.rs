//! Cylindrical Sod problem on a quad grid and on its triangle split, both
//! with the PSI-CiP scheme. Prints the density range at the final time.
//!
//! cargo run --release --example sod

use rd_angular::config::RunConfig;
use rd_angular::driver::Simulation;

fn main() -> rd_angular::Result<()> {
    for name in ["sod_quad.toml", "sod_tri.toml"] {
        let path = format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"));
        let mut cfg = RunConfig::load(path.as_ref())?;
        cfg.mesh.cells = Some([50, 50]);
        let mut sim = Simulation::new(&cfg)?;
        let blow_up = sim.run()?;
        let lo = sim.u.iter().map(|u| u[0]).fold(f64::INFINITY, f64::min);
        let hi = sim.u.iter().map(|u| u[0]).fold(f64::NEG_INFINITY, f64::max);
        println!(
            "{name}: {} elements, t = {}, rho in [{lo:.4}, {hi:.4}], completed = {}",
            sim.disc().n_elements(),
            sim.t,
            blow_up.is_none()
        );
    }
    Ok(())
}
