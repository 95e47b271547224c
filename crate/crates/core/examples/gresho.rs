//! Gresho vortex on a disc with B2 and the PSI-CiP scheme. Writes the run
//! artifacts to `out/example_gresho` and prints the summary.
//!
//! cargo run --release --example gresho

use rd_angular::config::RunConfig;
use rd_angular::driver;

fn main() -> rd_angular::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/gresho.toml");
    let mut cfg = RunConfig::load(path.as_ref())?;
    cfg.mesh.rings = Some(10);
    cfg.output.dir = "out/example_gresho".into();
    let rep = driver::run(&cfg)?;
    print!("{}", rep.summary.to_toml());
    Ok(())
}
