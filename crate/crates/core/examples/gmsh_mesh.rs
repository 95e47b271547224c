//! Load a gmsh 2.2 mesh, build B1 and B2 discretizations on it and run the
//! Sod problem with per-tag boundary conditions.
//!
//! cargo run --release --example gmsh_mesh

use rd_angular::config::RunConfig;
use rd_angular::driver::Simulation;
use rd_angular::mesh::{build_dofmap, Mesh};

fn main() -> rd_angular::Result<()> {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    let mesh = Mesh::load_gmsh(format!("{root}/meshes/box10.msh"))?;
    println!(
        "{} vertices, {} triangles, {} boundary faces, tags {:?}, area {}",
        mesh.vertices.len(),
        mesh.n_elements(),
        mesh.boundary_faces.len(),
        mesh.tags,
        mesh.total_area()
    );
    for degree in [1, 2] {
        println!("B{degree}: {} DOFs", build_dofmap(&mesh, degree)?.n_dofs);
    }
    let cfg = RunConfig::load(format!("{root}/sod_gmsh.toml").as_ref())?;
    let mut sim = Simulation::new(&cfg)?;
    sim.run()?;
    let last = sim.ledger.rows.last().expect("ledger row");
    println!("sod on the gmsh box: t = {}, mass = {:.6}, |dJ| = {:.2e}", last.t, last.mass, last.dj);
    Ok(())
}
