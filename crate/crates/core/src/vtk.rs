//! Legacy ASCII VTK snapshots of the solution.
//!
//! Points are the mesh vertices (for B2 also one point per edge midpoint);
//! cells are linear or quadratic triangles and quads. Point data: `rho`,
//! `v` (3 components, `z = 0`), `p` and the angular momentum density `J`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::bezier::{ElementKind, Vec2};
use crate::error::{Error, Result};
use crate::euler::State;
use crate::residual::Discretization;

const VTK_TRIANGLE: u8 = 5;
const VTK_QUAD: u8 = 9;
const VTK_QUADRATIC_TRIANGLE: u8 = 22;

/// Points, cells and point values of a snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub points: Vec<Vec2>,
    pub cells: Vec<Vec<usize>>,
    pub cell_type: u8,
    pub values: Vec<State>,
}

impl Snapshot {
    pub fn new(disc: &Discretization, u: &[State]) -> Self {
        let mesh = &disc.mesh;
        let table = &disc.table;
        let nv = table.n_vertices();
        let mut points = mesh.vertices.clone();
        let mut values = vec![[0.0; 4]; points.len()];
        let mut cells = Vec::with_capacity(mesh.n_elements());
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        for k in 0..mesh.n_elements() {
            let verts = &mesh.elements[k];
            let dofs = disc.dofmap.element_dofs(k);
            // vertex coefficients are point values
            for i in 0..nv {
                values[verts[i]] = u[dofs[i]];
            }
            let mut cell = verts.clone();
            if table.degree == 2 {
                for e in 0..table.n_edges() {
                    let (a, b) = mesh.edge_vertices(k, e);
                    let key = (a.min(b), a.max(b));
                    let id = *midpoints.entry(key).or_insert_with(|| {
                        let pa = mesh.vertices[a];
                        let pb = mesh.vertices[b];
                        points.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                        values.push(disc.eval_at(k, u, table.edge_point(e, 0.5)));
                        points.len() - 1
                    });
                    cell.push(id);
                }
            }
            cells.push(cell);
        }
        let cell_type = match (mesh.kind, table.degree) {
            (ElementKind::Quadrilateral, _) => VTK_QUAD,
            (ElementKind::Triangle, 2) => VTK_QUADRATIC_TRIANGLE,
            (ElementKind::Triangle, _) => VTK_TRIANGLE,
        };
        Snapshot {
            points,
            cells,
            cell_type,
            values,
        }
    }

    pub fn write<W: Write>(&self, w: &mut W, gamma: f64, title: &str) -> std::io::Result<()> {
        writeln!(w, "# vtk DataFile Version 3.0")?;
        writeln!(w, "{}", title.lines().next().unwrap_or(""))?;
        writeln!(w, "ASCII")?;
        writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(w, "POINTS {} double", self.points.len())?;
        for p in &self.points {
            writeln!(w, "{:.17e} {:.17e} 0", p[0], p[1])?;
        }
        let size: usize = self.cells.iter().map(|c| c.len() + 1).sum();
        writeln!(w, "CELLS {} {}", self.cells.len(), size)?;
        for c in &self.cells {
            write!(w, "{}", c.len())?;
            for id in c {
                write!(w, " {id}")?;
            }
            writeln!(w)?;
        }
        writeln!(w, "CELL_TYPES {}", self.cells.len())?;
        for _ in &self.cells {
            writeln!(w, "{}", self.cell_type)?;
        }
        writeln!(w, "POINT_DATA {}", self.points.len())?;
        let prim: Vec<[f64; 4]> = self
            .values
            .iter()
            .map(|u| {
                let (vx, vy) = (u[1] / u[0], u[2] / u[0]);
                [u[0], vx, vy, (gamma - 1.0) * (u[3] - 0.5 * (u[1] * vx + u[2] * vy))]
            })
            .collect();
        writeln!(w, "SCALARS rho double 1\nLOOKUP_TABLE default")?;
        for q in &prim {
            writeln!(w, "{:.17e}", q[0])?;
        }
        writeln!(w, "VECTORS v double")?;
        for q in &prim {
            writeln!(w, "{:.17e} {:.17e} 0", q[1], q[2])?;
        }
        writeln!(w, "SCALARS p double 1\nLOOKUP_TABLE default")?;
        for q in &prim {
            writeln!(w, "{:.17e}", q[3])?;
        }
        writeln!(w, "SCALARS J double 1\nLOOKUP_TABLE default")?;
        for (x, u) in self.points.iter().zip(&self.values) {
            writeln!(w, "{:.17e}", x[0] * u[2] - x[1] * u[1])?;
        }
        Ok(())
    }

    pub fn write_file(&self, path: &Path, gamma: f64, title: &str) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write(&mut w, gamma, title).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::euler::{BoundaryKind, GasModel};
    use crate::mesh::Mesh;
    use crate::residual::{Scheme, SchemeConfig};

    fn disc(mesh: &Mesh, degree: u32) -> Discretization {
        let bcs: HashMap<String, BoundaryKind> = mesh.tags.iter().map(|t| (t.clone(), BoundaryKind::Wall)).collect();
        Discretization::new(mesh, degree, &bcs, GasModel::default(), SchemeConfig::new(Scheme::Rusanov)).unwrap()
    }

    #[test]
    fn b1_triangle_snapshot_layout() {
        let m = Mesh::tri_grid(2, 1, [0.0, 2.0], [0.0, 1.0]).unwrap();
        let d = disc(&m, 1);
        let gas = GasModel::default();
        let u: Vec<State> = d.dofmap.dof_position.iter().map(|x| gas.to_conservative(&[1.0 + x[0], 0.5, 0.0, 1.0])).collect();
        let s = Snapshot::new(&d, &u);
        assert_eq!(s.points.len(), 6);
        assert_eq!(s.cells.len(), 4);
        let mut buf = Vec::new();
        s.write(&mut buf, 1.4, "test").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0\ntest\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS 6 double"));
        assert!(text.contains("CELLS 4 16\n"));
        assert!(text.contains("CELL_TYPES 4\n5\n"));
        for name in ["SCALARS rho", "VECTORS v", "SCALARS p", "SCALARS J"] {
            assert!(text.contains(name), "{name}");
        }
        // density at the vertex (2, 1) is 3
        let rho_at = s.points.iter().position(|p| *p == [2.0, 1.0]).unwrap();
        assert!((s.values[rho_at][0] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn b2_midpoints_hold_field_values() {
        let m = Mesh::tri_grid(2, 2, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let d = disc(&m, 2);
        let gas = GasModel::default();
        let f = |x: Vec2| gas.to_conservative(&[1.0 + x[0] * x[1], 0.0, 0.0, 1.0]);
        let u = crate::cases::interpolate(&d, |x| [1.0 + x[0] * x[1], 0.0, 0.0, 1.0]);
        let s = Snapshot::new(&d, &u);
        // 9 vertices + 16 edges
        assert_eq!(s.points.len(), 25);
        assert_eq!(s.cell_type, VTK_QUADRATIC_TRIANGLE);
        assert!(s.cells.iter().all(|c| c.len() == 6));
        for (x, v) in s.points.iter().zip(&s.values) {
            assert!((v[0] - f(*x)[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn quad_cells() {
        let m = Mesh::quad_grid(3, 2, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let d = disc(&m, 1);
        let u = vec![[1.0, 0.0, 0.0, 2.5]; d.n_dofs()];
        let s = Snapshot::new(&d, &u);
        assert_eq!(s.cell_type, VTK_QUAD);
        assert_eq!(s.points.len(), 12);
    }
}
