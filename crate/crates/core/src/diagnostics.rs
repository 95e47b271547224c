//! Conservation bookkeeping and error norms.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::bezier::{cross, Vec2};
use crate::correction::CorrectionMode;
use crate::dec::correction_geometry;
use crate::error::{Error, Result};
use crate::euler::{GasModel, Primitive, State};
use crate::residual::Discretization;

/// Lumped totals `sum_sigma |C_sigma| u_sigma` of the conserved variables.
pub fn totals(disc: &Discretization, u: &[State]) -> State {
    let mut t = [0.0; 4];
    for (c, us) in disc.measures.c_sigma.iter().zip(u) {
        for i in 0..4 {
            t[i] += c * us[i];
        }
    }
    t
}

/// Form of the discrete angular momentum that a run conserves. With the
/// correction off the degree's natural form is used.
pub fn j_form(degree: u32, mode: CorrectionMode) -> CorrectionMode {
    match mode {
        CorrectionMode::Off if degree == 1 => CorrectionMode::SecondOrder,
        CorrectionMode::Off => CorrectionMode::HighOrder,
        m => m,
    }
}

/// Global discrete angular momentum `sum_K sum_sigma c^K_sigma ^ m_sigma`.
/// For the high-order form this is `sum_sigma |C_sigma| y_sigma ^ m_sigma`;
/// for the second-order form the anchors are the DOF positions.
pub fn total_j(disc: &Discretization, u: &[State], mode: CorrectionMode) -> f64 {
    let form = j_form(disc.degree(), mode);
    let nd = disc.dofs_per_element();
    let mut j = 0.0;
    for k in 0..disc.n_elements() {
        let (_, c) = correction_geometry(disc, k, form);
        let el = &disc.elements[k];
        for s in 0..nd {
            let us = &u[el.dofs[s]];
            j += cross(c[s], [us[1], us[2]]);
        }
    }
    j
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    pub t: f64,
    pub mass: f64,
    pub mx: f64,
    pub my: f64,
    pub energy: f64,
    pub j: f64,
    pub dj: f64,
}

/// Time series of global totals. `dj` is the absolute deviation from the
/// first row.
#[derive(Debug, Clone, Default)]
pub struct ConservationLedger {
    pub rows: Vec<LedgerRow>,
}

impl ConservationLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, disc: &Discretization, u: &[State], mode: CorrectionMode, t: f64) -> LedgerRow {
        let tot = totals(disc, u);
        let j = total_j(disc, u, mode);
        let j0 = self.rows.first().map_or(j, |r| r.j);
        debug_assert!(self.rows.last().is_none_or(|r| r.t <= t));
        let row = LedgerRow {
            t,
            mass: tot[0],
            mx: tot[1],
            my: tot[2],
            energy: tot[3],
            j,
            dj: (j - j0).abs(),
        };
        self.rows.push(row);
        row
    }

    pub fn max_dj(&self) -> f64 {
        self.rows.iter().map(|r| r.dj).fold(0.0, f64::max)
    }

    /// `max |J(t) - J(0)| / max(|J(0)|, 1)`.
    pub fn max_relative_dj(&self) -> f64 {
        let j0 = self.rows.first().map_or(0.0, |r| r.j.abs());
        self.max_dj() / j0.max(1.0)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        self.write_to(&mut w).map_err(io)?;
        w.flush().map_err(io)
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "t,mass,mx,my,E,J,dJ")?;
        for r in &self.rows {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                r.t, r.mass, r.mx, r.my, r.energy, r.j, r.dj
            )?;
        }
        Ok(())
    }
}

/// Per-variable norms over the conserved variables.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorNorms {
    pub l1: [f64; 4],
    pub l2: [f64; 4],
    pub linf: [f64; 4],
}

/// DOF-weighted norms of `u - reference(x_sigma)` with weights `|C_sigma|`.
/// The reference returns primitive states.
pub fn error_norms<F: Fn(Vec2) -> Primitive>(disc: &Discretization, gas: &GasModel, u: &[State], reference: F) -> ErrorNorms {
    let mut n = ErrorNorms::default();
    for (s, us) in u.iter().enumerate() {
        let r = gas.to_conservative(&reference(disc.dofmap.dof_position[s]));
        let c = disc.measures.c_sigma[s];
        for i in 0..4 {
            let d = (us[i] - r[i]).abs();
            n.l1[i] += c * d;
            n.l2[i] += c * d * d;
            n.linf[i] = n.linf[i].max(d);
        }
    }
    n.l2.iter_mut().for_each(|v| *v = v.sqrt());
    n
}

/// `L2` error of the finite element field against a primitive reference,
/// by volume quadrature, per conserved variable.
pub fn quadrature_l2<F: Fn(Vec2) -> Primitive>(disc: &Discretization, gas: &GasModel, u: &[State], reference: F) -> [f64; 4] {
    let mut e = [0.0; 4];
    for k in 0..disc.n_elements() {
        for (i, ei) in e.iter_mut().enumerate() {
            *ei += disc.integrate(k, u, |x, uh| {
                let r = gas.to_conservative(&reference(x));
                (uh[i] - r[i]).powi(2)
            });
        }
    }
    e.map(f64::sqrt)
}
