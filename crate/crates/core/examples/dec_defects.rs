//! DeC iterations contract: print the defect norm of every iteration for a
//! few steps of the vortex, and the effect of extra iterations.
//!
//! cargo run --release --example dec_defects

use rd_angular::config::RunConfig;
use rd_angular::dec::compute_dt;
use rd_angular::driver::Simulation;

fn main() -> rd_angular::Result<()> {
    for file in ["convergence_b1.toml", "convergence_b2.toml"] {
        let path = format!("{}/../../configs/{file}", env!("CARGO_MANIFEST_DIR"));
        let mut sim = Simulation::new(&RunConfig::load(path.as_ref())?)?;
        let dt = compute_dt(sim.disc(), &sim.u, 0.5, f64::INFINITY)?;
        sim.solver.n_iter = 6;
        let out = sim.solver.step(&sim.u, dt)?;
        let shown: Vec<String> = out.defects.iter().map(|d| format!("{d:.2e}")).collect();
        println!("B{} (M = {}), dt = {dt:.4}: {}", sim.disc().degree(), sim.solver.m(), shown.join(" > "));
    }
    Ok(())
}
