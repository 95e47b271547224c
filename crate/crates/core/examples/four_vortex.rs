//! Four interacting vortices with Galerkin-CiP: the unlimited scheme blows
//! up; compare the blow-up time with and without the correction.
//!
//! cargo run --release --example four_vortex

use rd_angular::config::RunConfig;
use rd_angular::driver::Simulation;

fn main() -> rd_angular::Result<()> {
    for (name, corrected) in [("four_vortex.toml", "second_order"), ("four_vortex_b2.toml", "high_order")] {
        let path = format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"));
        let mut cfg = RunConfig::load(path.as_ref())?;
        for correction in ["off", corrected] {
            cfg.scheme.correction = correction.into();
            let mut sim = Simulation::new(&cfg)?;
            match sim.run()? {
                Some(b) => println!("B{} {correction:>12}: blow-up after t = {:.4} (step {})", cfg.mesh.degree, b.time, b.step),
                None => println!("B{} {correction:>12}: reached t = {}", cfg.mesh.degree, sim.t),
            }
        }
    }
    Ok(())
}
