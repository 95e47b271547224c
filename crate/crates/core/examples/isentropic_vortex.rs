//! Periodic isentropic vortex with and without the angular momentum
//! correction; prints the worst relative deviation of the global J.
//!
//! cargo run --release --example isentropic_vortex [-- degree]

use rd_angular::config::RunConfig;
use rd_angular::driver::Simulation;

fn main() -> rd_angular::Result<()> {
    let degree: u32 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1);
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/vortex.toml");
    let mut cfg = RunConfig::load(path.as_ref())?;
    cfg.mesh.degree = degree;
    cfg.mesh.cells = Some([32, 32]);
    for correction in ["off", if degree == 1 { "second_order" } else { "high_order" }] {
        cfg.scheme.correction = correction.into();
        let mut sim = Simulation::new(&cfg)?;
        if let Some(b) = sim.run()? {
            println!("{correction}: blow-up at t = {}: {}", b.time, b.reason);
            continue;
        }
        let l2 = sim.summary(None, 0.0).l2_error.map_or(f64::NAN, |e| e[0]);
        println!(
            "B{degree} {correction:>12}: {} steps, max |J - J0| / max(|J0|, 1) = {:.3e}, L2(rho) = {l2:.3e}",
            sim.steps,
            sim.ledger.max_relative_dj()
        );
    }
    Ok(())
}
