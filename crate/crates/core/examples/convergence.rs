//! Convergence table for the periodic isentropic vortex.
//!
//! cargo run --release --example convergence [-- degree]

use rd_angular::config::RunConfig;
use rd_angular::driver::convergence_study;

fn main() -> rd_angular::Result<()> {
    let degree: u32 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1);
    let (file, meshes) = if degree == 1 { ("convergence_b1.toml", [8, 16, 32]) } else { ("convergence_b2.toml", [6, 12, 24]) };
    let path = format!("{}/../../configs/{file}", env!("CARGO_MANIFEST_DIR"));
    let cfg = RunConfig::load(path.as_ref())?;
    let rows = convergence_study(&cfg, &meshes)?;
    println!("{:>6} {:>10} {:>11} {:>6}", "cells", "h", "L2(rho)", "order");
    for r in rows {
        let order = r.order.map_or("-".into(), |o| format!("{:.2}", o[0]));
        println!("{:>6} {:>10.4} {:>11.4e} {:>6}", r.cells, r.h, r.l2[0], order);
    }
    Ok(())
}
