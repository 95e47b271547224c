//! Write legacy VTK snapshots of the Gresho initial data with B1 and B2
//! (quadratic triangles) to `out/example_vtk`.
//!
//! cargo run --example vtk_snapshot

use std::collections::HashMap;

use rd_angular::cases::{self, Case};
use rd_angular::euler::{BoundaryKind, GasModel};
use rd_angular::mesh::Mesh;
use rd_angular::residual::{Discretization, Scheme, SchemeConfig};
use rd_angular::vtk::Snapshot;

fn main() -> rd_angular::Result<()> {
    let dir = std::path::Path::new("out/example_vtk");
    std::fs::create_dir_all(dir).map_err(|e| rd_angular::Error::Config(format!("{}: {e}", dir.display())))?;
    let mesh = Mesh::disc([0.0, 0.0], 2.0, 8)?;
    let bcs: HashMap<String, BoundaryKind> = mesh.tags.iter().map(|t| (t.clone(), BoundaryKind::GradientFree)).collect();
    let case = Case::Gresho { center: [0.0, 0.0] };
    for degree in [1, 2] {
        let disc = Discretization::new(&mesh, degree, &bcs, GasModel::default(), SchemeConfig::new(Scheme::PsiCip))?;
        let u = cases::interpolate(&disc, |x| case.initial(x));
        let snap = Snapshot::new(&disc, &u);
        let path = dir.join(format!("gresho_b{degree}.vtk"));
        snap.write_file(&path, disc.gas.gamma, "gresho initial data")?;
        println!("{}: {} points, {} cells of VTK type {}", path.display(), snap.points.len(), snap.cells.len(), snap.cell_type);
    }
    Ok(())
}
