//! Spatial residuals `Phi_{sigma,x}` for the Galerkin/CiP, SUPG, Rusanov and
//! PSI schemes, together with the precomputed element geometry they share.

use std::collections::HashMap;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bezier::{
    self, cross, element_area, jacobian, map_point, BasisTable, ElementKind, LumpedMeasures, Vec2,
};
use crate::euler::{BoundaryKind, GasModel, State};
use crate::error::{Error, Result, StateError};
use crate::mesh::{build_dofmap, DofMap, Mesh};
use crate::quadrature;

/// Largest number of DOFs per element (B2 triangle).
pub const MAX_DOFS: usize = 6;
/// Largest number of DOFs per face (B2 edge).
pub const MAX_FACE_DOFS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    GalerkinCip,
    Supg,
    Rusanov,
    PsiCip,
}

impl Scheme {
    pub fn uses_jump(self) -> bool {
        matches!(self, Scheme::GalerkinCip | Scheme::PsiCip)
    }

    /// Lumped (diagonal) time term instead of the Galerkin mass matrix.
    pub fn lumped_time(self) -> bool {
        matches!(self, Scheme::Rusanov | Scheme::PsiCip)
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::GalerkinCip => "galerkin_cip",
            Scheme::Supg => "supg",
            Scheme::Rusanov => "rusanov",
            Scheme::PsiCip => "psi_cip",
        }
    }

    pub const ALL: [Scheme; 4] = [Scheme::GalerkinCip, Scheme::Supg, Scheme::Rusanov, Scheme::PsiCip];
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "galerkin_cip" => Ok(Scheme::GalerkinCip),
            "supg" => Ok(Scheme::Supg),
            "rusanov" => Ok(Scheme::Rusanov),
            "psi_cip" | "psi" => Ok(Scheme::PsiCip),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    /// Jump coefficient `theta` (dimensionless).
    pub theta_cip: f64,
    /// SUPG scale; `tau = tau_supg / lambda_K`.
    pub tau_supg: f64,
    /// Below this speed the PSI direction falls back to `(1, 0)`.
    pub velocity_floor: f64,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme) -> Self {
        SchemeConfig {
            scheme,
            theta_cip: 0.1,
            tau_supg: 0.5,
            velocity_floor: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scheme.uses_jump() && !(self.theta_cip > 0.0) {
            return Err(Error::Config(format!(
                "theta_cip must be positive for {}, got {}",
                self.scheme.name(),
                self.theta_cip
            )));
        }
        if self.scheme == Scheme::Supg && !(self.tau_supg > 0.0) {
            return Err(Error::Config(format!("tau_supg must be positive, got {}", self.tau_supg)));
        }
        if !(self.velocity_floor >= 0.0) {
            return Err(Error::Config("velocity_floor must be non-negative".into()));
        }
        Ok(())
    }
}

/// Per-element constants.
#[derive(Debug, Clone)]
pub struct ElementData {
    pub dofs: [usize; MAX_DOFS],
    /// DOF positions `x_sigma` in the element's own frame.
    pub x: [Vec2; MAX_DOFS],
    /// Moment points `y_sigma` in the element's own frame.
    pub y: [Vec2; MAX_DOFS],
    /// `|K| z_sigma^K = int_K x phi_sigma`.
    pub z_area: [Vec2; MAX_DOFS],
    /// `int_K phi_sigma`.
    pub w: [f64; MAX_DOFS],
    pub mass: [[f64; MAX_DOFS]; MAX_DOFS],
    pub area: f64,
    pub h: f64,
    /// `max_{sigma, sigma'} | int_K phi_sigma grad phi_sigma' |`
    pub alpha_geom: f64,
}

#[derive(Debug, Clone, Copy)]
struct VolPoint {
    w: f64,
    phi: [f64; MAX_DOFS],
    grad: [Vec2; MAX_DOFS],
}

#[derive(Debug, Clone, Copy)]
struct EdgePoint {
    w: f64,
    x: Vec2,
    phi: [f64; MAX_DOFS],
    grad: [Vec2; MAX_DOFS],
}

/// How one local edge of an element is shared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EdgeRole {
    Left(usize),
    Right(usize),
    Boundary(usize),
}

#[derive(Debug, Clone)]
struct InteriorData {
    left: usize,
    left_edge: usize,
    right: usize,
    right_edge: usize,
    /// `x_right = x_left + shift` for points on the edge.
    shift: Vec2,
    h: f64,
}

#[derive(Debug, Clone)]
pub struct FaceData {
    pub element: usize,
    pub local_edge: usize,
    /// Local (element) indices of the face DOFs.
    pub local_dofs: [usize; MAX_FACE_DOFS],
    pub n_dofs: usize,
    pub bc: BoundaryKind,
}

/// Spatial residuals of one state, split by origin.
#[derive(Debug, Clone, Default)]
pub struct SpatialResidual {
    /// Element residuals without jump terms, `n_elements * nd`.
    pub elem: Vec<State>,
    /// CiP jump contributions, `n_elements * nd` (empty without jumps).
    pub jump: Vec<State>,
    /// Boundary residuals, `n_faces * MAX_FACE_DOFS`.
    pub face: Vec<State>,
    /// `oint_{dK} G . n` per element, in the element frame.
    pub elem_jflux: Vec<f64>,
    /// `int_Gamma x ^ (F_m - f_m . n)` per boundary face.
    pub face_jflux: Vec<f64>,
    // per local edge: int x ^ f_m.n and int f_m.n (element frame)
    edge_j: Vec<(f64, Vec2)>,
}

/// Mesh, basis and precomputed quadrature data for one discretization.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub table: BasisTable,
    pub dofmap: DofMap,
    pub measures: LumpedMeasures,
    pub gas: GasModel,
    pub config: SchemeConfig,
    pub elements: Vec<ElementData>,
    pub faces: Vec<FaceData>,
    nd: usize,
    nq: usize,
    ne: usize,
    n_edges: usize,
    vol: Vec<VolPoint>,
    edge_pts: Vec<EdgePoint>,
    edge_normal: Vec<Vec2>,
    edge_role: Vec<EdgeRole>,
    interior: Vec<InteriorData>,
}

impl Discretization {
    /// `bcs` maps boundary tag names to their condition; every tag that owns
    /// a boundary face must be present.
    pub fn new(
        mesh: &Mesh,
        degree: u32,
        bcs: &HashMap<String, BoundaryKind>,
        gas: GasModel,
        config: SchemeConfig,
    ) -> Result<Self> {
        let table = BasisTable::new(mesh.kind, degree)?;
        let dofmap = build_dofmap(mesh, degree)?;
        let measures = bezier::assemble_lumped(mesh, &dofmap)?;
        let nd = table.n_dofs();
        let n_edges = table.n_edges();
        let rule = table.volume_rule();
        let nq = rule.len();
        let erule = quadrature::gauss_legendre(table.edge_points());
        let ne = erule.len();

        let mut elements = Vec::with_capacity(mesh.n_elements());
        let mut vol = Vec::with_capacity(mesh.n_elements() * nq);
        let mut edge_pts = Vec::with_capacity(mesh.n_elements() * n_edges * ne);
        let mut edge_normal = Vec::with_capacity(mesh.n_elements() * n_edges);
        let mut phi = [0.0; MAX_DOFS];
        let mut rgrad = [[0.0; 2]; MAX_DOFS];

        for k in 0..mesh.n_elements() {
            let verts = mesh.element_vertices(k);
            let area = element_area(mesh.kind, &verts);
            if !(area > 0.0) {
                return Err(Error::DegenerateElement {
                    element: k,
                    reason: format!("area {area}"),
                });
            }
            let mut e = ElementData {
                dofs: [0; MAX_DOFS],
                x: [[0.0; 2]; MAX_DOFS],
                y: [[0.0; 2]; MAX_DOFS],
                z_area: [[0.0; 2]; MAX_DOFS],
                w: [0.0; MAX_DOFS],
                mass: [[0.0; MAX_DOFS]; MAX_DOFS],
                area,
                h: element_size(mesh.kind, &verts, area),
                alpha_geom: 0.0,
            };
            for (s, &g) in dofmap.element_dofs(k).iter().enumerate() {
                e.dofs[s] = g;
                e.x[s] = dofmap.local_position(k, s);
                let sh = dofmap.image_shift(k, s);
                e.y[s] = [measures.y_sigma[g][0] + sh[0], measures.y_sigma[g][1] + sh[1]];
                let z = bezier::moment_vector_z(&table, s, &verts)?;
                e.z_area[s] = [area * z[0], area * z[1]];
            }
            let mut pgrad_int = [[[0.0; 2]; MAX_DOFS]; MAX_DOFS];
            for (p, wq) in rule.points.iter().zip(&rule.weights) {
                table.values(*p, &mut phi);
                table.ref_grads(*p, &mut rgrad);
                let (det, grad) = physical_grads(&table, &verts, *p, &rgrad, nd);
                if !(det > 0.0) {
                    return Err(Error::DegenerateElement {
                        element: k,
                        reason: format!("non-positive Jacobian {det}"),
                    });
                }
                // reference triangle has area 1/2
                let w = wq * det * if mesh.kind == ElementKind::Triangle { 0.5 } else { 1.0 };
                for s in 0..nd {
                    e.w[s] += w * phi[s];
                    for t in 0..nd {
                        e.mass[s][t] += w * phi[s] * phi[t];
                        pgrad_int[s][t][0] += w * phi[s] * grad[t][0];
                        pgrad_int[s][t][1] += w * phi[s] * grad[t][1];
                    }
                }
                vol.push(VolPoint { w, phi, grad });
            }
            e.alpha_geom = pgrad_int[..nd]
                .iter()
                .flat_map(|row| row[..nd].iter())
                .map(|g| g[0].hypot(g[1]))
                .fold(0.0, f64::max);

            for le in 0..n_edges {
                let a = verts[le];
                let b = verts[(le + 1) % verts.len()];
                let t = [b[0] - a[0], b[1] - a[1]];
                let len = t[0].hypot(t[1]);
                if !(len > 0.0) {
                    return Err(Error::DegenerateFace(format!("edge {le} of element {k} has zero length")));
                }
                edge_normal.push([t[1] / len, -t[0] / len]);
                for (s, ws) in erule.points.iter().zip(&erule.weights) {
                    let xi = table.edge_point(le, *s);
                    table.values(xi, &mut phi);
                    table.ref_grads(xi, &mut rgrad);
                    let (_, grad) = physical_grads(&table, &verts, xi, &rgrad, nd);
                    edge_pts.push(EdgePoint {
                        w: ws * len,
                        x: map_point(&table, &verts, xi),
                        phi,
                        grad,
                    });
                }
            }
            elements.push(e);
        }

        let mut edge_role = vec![EdgeRole::Boundary(usize::MAX); mesh.n_elements() * n_edges];
        let mut interior = Vec::with_capacity(mesh.interior_edges.len());
        for (i, ie) in mesh.interior_edges.iter().enumerate() {
            edge_role[ie.left * n_edges + ie.left_edge] = EdgeRole::Left(i);
            edge_role[ie.right * n_edges + ie.right_edge] = EdgeRole::Right(i);
            let lv = mesh.element_vertices(ie.left);
            let rv = mesh.element_vertices(ie.right);
            let la = lv[ie.left_edge];
            // the right element traverses the edge in the opposite direction
            let ra = rv[(ie.right_edge + 1) % rv.len()];
            let lb = lv[(ie.left_edge + 1) % lv.len()];
            interior.push(InteriorData {
                left: ie.left,
                left_edge: ie.left_edge,
                right: ie.right,
                right_edge: ie.right_edge,
                shift: [ra[0] - la[0], ra[1] - la[1]],
                h: (lb[0] - la[0]).hypot(lb[1] - la[1]),
            });
        }

        let mut faces = Vec::with_capacity(mesh.boundary_faces.len());
        for (f, bf) in mesh.boundary_faces.iter().enumerate() {
            edge_role[bf.element * n_edges + bf.local_edge] = EdgeRole::Boundary(f);
            let tag = &mesh.tags[bf.tag];
            let bc = bcs
                .get(tag)
                .cloned()
                .ok_or_else(|| Error::Config(format!("no boundary condition for tag '{tag}'")))?;
            let ed = table.edge_dofs(bf.local_edge);
            let mut local_dofs = [0; MAX_FACE_DOFS];
            local_dofs[..ed.len()].copy_from_slice(ed);
            faces.push(FaceData {
                element: bf.element,
                local_edge: bf.local_edge,
                local_dofs,
                n_dofs: ed.len(),
                bc,
            });
        }

        Ok(Discretization {
            mesh: mesh.clone(),
            table,
            dofmap,
            measures,
            gas,
            config,
            elements,
            faces,
            nd,
            nq,
            ne,
            n_edges,
            vol,
            edge_pts,
            edge_normal,
            edge_role,
            interior,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.dofmap.n_dofs
    }

    pub fn dofs_per_element(&self) -> usize {
        self.nd
    }

    pub fn degree(&self) -> u32 {
        self.table.degree
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn new_residual(&self) -> SpatialResidual {
        let n_el = self.elements.len();
        SpatialResidual {
            elem: vec![[0.0; 4]; n_el * self.nd],
            jump: if self.config.scheme.uses_jump() {
                vec![[0.0; 4]; n_el * self.nd]
            } else {
                Vec::new()
            },
            face: vec![[0.0; 4]; self.faces.len() * MAX_FACE_DOFS],
            elem_jflux: vec![0.0; n_el],
            face_jflux: vec![0.0; self.faces.len()],
            edge_j: vec![(0.0, [0.0; 2]); n_el * self.n_edges],
        }
    }

    /// Local DOF states of element `k`.
    pub fn gather(&self, k: usize, u: &[State]) -> [State; MAX_DOFS] {
        let mut out = [[0.0; 4]; MAX_DOFS];
        for s in 0..self.nd {
            out[s] = u[self.elements[k].dofs[s]];
        }
        out
    }

    /// Evaluate the discrete field of element `k` at reference point `xi`.
    pub fn eval_at(&self, k: usize, u: &[State], xi: Vec2) -> State {
        let mut phi = [0.0; MAX_DOFS];
        self.table.values(xi, &mut phi);
        let us = self.gather(k, u);
        interp(&phi, &us, self.nd)
    }

    /// Largest wave speed over the DOFs of element `k`.
    pub fn element_wavespeed(&self, k: usize, u: &[State]) -> Result<f64, StateError> {
        let mut lam: f64 = 0.0;
        for s in 0..self.nd {
            let us = u[self.elements[k].dofs[s]];
            lam = lam.max(self.gas.spectral_radius(&us).map_err(|e| e.in_element(k))?);
        }
        Ok(lam)
    }

    /// All spatial residuals of state `u`.
    pub fn spatial_residual(&self, u: &[State], out: &mut SpatialResidual) -> Result<()> {
        let nd = self.nd;
        let ned = self.n_edges;
        // element pass
        out.elem
            .par_chunks_mut(nd)
            .zip(out.edge_j.par_chunks_mut(ned))
            .enumerate()
            .try_for_each(|(k, (res, ej))| self.element_residual(k, u, res, ej))?;

        // jump pass: edge-parallel, then scattered in edge order
        if self.config.scheme.uses_jump() {
            let contrib: Vec<([State; MAX_DOFS], [State; MAX_DOFS])> = self
                .interior
                .par_iter()
                .map(|ie| self.jump_terms(ie, u))
                .collect::<Result<_>>()?;
            out.jump.iter_mut().for_each(|v| *v = [0.0; 4]);
            for (ie, (jl, jr)) in self.interior.iter().zip(&contrib) {
                for s in 0..nd {
                    add4(&mut out.jump[ie.left * nd + s], &jl[s]);
                    add4(&mut out.jump[ie.right * nd + s], &jr[s]);
                }
            }
        }

        // boundary faces
        let gas = &self.gas;
        out.face
            .par_chunks_mut(MAX_FACE_DOFS)
            .zip(out.face_jflux.par_iter_mut())
            .enumerate()
            .try_for_each(|(f, (res, jf))| -> Result<()> {
                let fd = &self.faces[f];
                let k = fd.element;
                let us = self.gather(k, u);
                let n = self.edge_normal[k * ned + fd.local_edge];
                res.iter_mut().for_each(|v| *v = [0.0; 4]);
                *jf = 0.0;
                let base = (k * ned + fd.local_edge) * self.ne;
                for p in &self.edge_pts[base..base + self.ne] {
                    let uq = interp(&p.phi, &us, nd);
                    let fin = gas.normal_flux(&uq, n).map_err(|e| e.in_element(k))?;
                    let fnum = gas.boundary_numflux(&uq, n, &fd.bc).map_err(|e| e.in_element(k))?;
                    let d = sub4(&fnum, &fin);
                    for (i, &s) in fd.local_dofs[..fd.n_dofs].iter().enumerate() {
                        axpy4(&mut res[i], p.w * p.phi[s], &d);
                    }
                    *jf += p.w * cross(p.x, [d[1], d[2]]);
                }
                Ok(())
            })?;

        // angular momentum flux per element from the shared edge integrals
        let ej = &out.edge_j;
        out.elem_jflux.par_iter_mut().enumerate().for_each(|(k, jf)| {
            let mut s = 0.0;
            for le in 0..ned {
                s += match self.edge_role[k * ned + le] {
                    EdgeRole::Left(_) | EdgeRole::Boundary(_) => ej[k * ned + le].0,
                    EdgeRole::Right(i) => {
                        let ie = &self.interior[i];
                        let (g, f) = ej[ie.left * ned + ie.left_edge];
                        -(g + cross(ie.shift, f))
                    }
                };
            }
            *jf = s;
        });
        Ok(())
    }

    fn element_residual(&self, k: usize, u: &[State], res: &mut [State], ej: &mut [(f64, Vec2)]) -> Result<()> {
        let nd = self.nd;
        let gas = &self.gas;
        let us = self.gather(k, u);
        res.iter_mut().for_each(|v| *v = [0.0; 4]);
        let scheme = self.config.scheme;
        let el = &self.elements[k];
        let lam = if matches!(scheme, Scheme::Supg | Scheme::Rusanov | Scheme::PsiCip) {
            self.element_wavespeed(k, u)?
        } else {
            0.0
        };

        for p in &self.vol[k * self.nq..(k + 1) * self.nq] {
            let uq = interp(&p.phi, &us, nd);
            let [f1, f2] = gas.flux(&uq).map_err(|e| e.in_element(k))?;
            for s in 0..nd {
                let g = p.grad[s];
                for i in 0..4 {
                    res[s][i] -= p.w * (g[0] * f1[i] + g[1] * f2[i]);
                }
            }
            if scheme == Scheme::Supg {
                let tau = self.config.tau_supg / lam * el.h;
                let (a, b) = gas.jacobians(&uq).map_err(|e| e.in_element(k))?;
                let mut ux = [0.0; 4];
                let mut uy = [0.0; 4];
                for s in 0..nd {
                    for i in 0..4 {
                        ux[i] += us[s][i] * p.grad[s][0];
                        uy[i] += us[s][i] * p.grad[s][1];
                    }
                }
                let mut r = [0.0; 4];
                for i in 0..4 {
                    for j in 0..4 {
                        r[i] += a[i][j] * ux[j] + b[i][j] * uy[j];
                    }
                }
                for s in 0..nd {
                    let g = p.grad[s];
                    // (A g_x + B g_y)^T r
                    for j in 0..4 {
                        let mut t = 0.0;
                        for i in 0..4 {
                            t += (a[i][j] * g[0] + b[i][j] * g[1]) * r[i];
                        }
                        res[s][j] += p.w * tau * t;
                    }
                }
            }
        }

        for le in 0..self.n_edges {
            let n = self.edge_normal[k * self.n_edges + le];
            let ed = self.table.edge_dofs(le);
            let base = (k * self.n_edges + le) * self.ne;
            let mut jg = 0.0;
            let mut jf = [0.0; 2];
            for p in &self.edge_pts[base..base + self.ne] {
                let uq = interp(&p.phi, &us, nd);
                let f = gas.normal_flux(&uq, n).map_err(|e| e.in_element(k))?;
                for &s in ed {
                    axpy4(&mut res[s], p.w * p.phi[s], &f);
                }
                jg += p.w * cross(p.x, [f[1], f[2]]);
                jf[0] += p.w * f[1];
                jf[1] += p.w * f[2];
            }
            ej[le] = (jg, jf);
        }

        if matches!(scheme, Scheme::Rusanov | Scheme::PsiCip) {
            let alpha = lam * el.alpha_geom;
            let mut mean = [0.0; 4];
            for s in 0..nd {
                add4(&mut mean, &us[s]);
            }
            let inv = 1.0 / nd as f64;
            for s in 0..nd {
                for i in 0..4 {
                    res[s][i] += alpha * inv * (us[s][i] - inv * mean[i]);
                }
            }
        }
        Ok(())
    }

    fn jump_terms(&self, ie: &InteriorData, u: &[State]) -> Result<([State; MAX_DOFS], [State; MAX_DOFS])> {
        let nd = self.nd;
        let ul = self.gather(ie.left, u);
        let ur = self.gather(ie.right, u);
        let lb = (ie.left * self.n_edges + ie.left_edge) * self.ne;
        let rb = (ie.right * self.n_edges + ie.right_edge) * self.ne;
        let lpts = &self.edge_pts[lb..lb + self.ne];
        let rpts = &self.edge_pts[rb..rb + self.ne];
        let mut lam: f64 = 0.0;
        for p in lpts {
            let uq = interp(&p.phi, &ul, nd);
            lam = lam.max(self.gas.spectral_radius(&uq).map_err(|e| e.in_element(ie.left))?);
        }
        let c = self.config.theta_cip * ie.h * ie.h * lam;
        let mut jl = [[0.0; 4]; MAX_DOFS];
        let mut jr = [[0.0; 4]; MAX_DOFS];
        for (q, pl) in lpts.iter().enumerate() {
            let pr = &rpts[self.ne - 1 - q];
            let gl = grad_state(&pl.grad, &ul, nd);
            let gr = grad_state(&pr.grad, &ur, nd);
            let mut jump = [[0.0; 2]; 4];
            for i in 0..4 {
                jump[i] = [gl[i][0] - gr[i][0], gl[i][1] - gr[i][1]];
            }
            let cw = c * pl.w;
            for s in 0..nd {
                for i in 0..4 {
                    jl[s][i] += cw * (jump[i][0] * pl.grad[s][0] + jump[i][1] * pl.grad[s][1]);
                    jr[s][i] -= cw * (jump[i][0] * pr.grad[s][0] + jump[i][1] * pr.grad[s][1]);
                }
            }
        }
        Ok((jl, jr))
    }

    /// `oint_{dK} f(u) . n` of element `k` with the residual edge quadrature.
    pub fn element_flux_balance(&self, k: usize, u: &[State]) -> Result<State> {
        let us = self.gather(k, u);
        let mut tot = [0.0; 4];
        for le in 0..self.n_edges {
            let n = self.edge_normal[k * self.n_edges + le];
            let base = (k * self.n_edges + le) * self.ne;
            for p in &self.edge_pts[base..base + self.ne] {
                let f = self.gas.normal_flux(&interp(&p.phi, &us, self.nd), n)?;
                axpy4(&mut tot, p.w, &f);
            }
        }
        Ok(tot)
    }

    /// `int_K g(x, u_h(x))` with the volume rule of element `k`.
    pub fn integrate<F: FnMut(Vec2, &State) -> f64>(&self, k: usize, u: &[State], mut g: F) -> f64 {
        let us = self.gather(k, u);
        let verts = self.mesh.element_vertices(k);
        let rule = self.table.volume_rule();
        let mut s = 0.0;
        for (q, p) in self.vol[k * self.nq..(k + 1) * self.nq].iter().enumerate() {
            let x = map_point(&self.table, &verts, rule.points[q]);
            s += p.w * g(x, &interp(&p.phi, &us, self.nd));
        }
        s
    }
}

fn element_size(kind: ElementKind, verts: &[Vec2], area: f64) -> f64 {
    let n = verts.len();
    let lens = (0..n).map(|i| {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        (b[0] - a[0]).hypot(b[1] - a[1])
    });
    match kind {
        ElementKind::Triangle => 2.0 * area / lens.sum::<f64>(),
        ElementKind::Quadrilateral => lens.fold(f64::INFINITY, f64::min),
    }
}

fn physical_grads(
    table: &BasisTable,
    verts: &[Vec2],
    xi: Vec2,
    rgrad: &[Vec2; MAX_DOFS],
    nd: usize,
) -> (f64, [Vec2; MAX_DOFS]) {
    let j = jacobian(table, verts, xi);
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    // grad = J^{-T} rgrad
    let inv = [[j[1][1] / det, -j[1][0] / det], [-j[0][1] / det, j[0][0] / det]];
    let mut g = [[0.0; 2]; MAX_DOFS];
    for s in 0..nd {
        let r = rgrad[s];
        g[s] = [
            inv[0][0] * r[0] + inv[0][1] * r[1],
            inv[1][0] * r[0] + inv[1][1] * r[1],
        ];
    }
    (det, g)
}

#[inline]
pub(crate) fn interp(phi: &[f64; MAX_DOFS], us: &[State; MAX_DOFS], nd: usize) -> State {
    let mut u = [0.0; 4];
    for s in 0..nd {
        axpy4(&mut u, phi[s], &us[s]);
    }
    u
}

#[inline]
fn grad_state(grad: &[Vec2; MAX_DOFS], us: &[State; MAX_DOFS], nd: usize) -> [Vec2; 4] {
    let mut g = [[0.0; 2]; 4];
    for s in 0..nd {
        for i in 0..4 {
            g[i][0] += us[s][i] * grad[s][0];
            g[i][1] += us[s][i] * grad[s][1];
        }
    }
    g
}

#[inline]
pub(crate) fn add4(a: &mut State, b: &State) {
    for i in 0..4 {
        a[i] += b[i];
    }
}

#[inline]
pub(crate) fn axpy4(a: &mut State, s: f64, b: &State) {
    for i in 0..4 {
        a[i] += s * b[i];
    }
}

#[inline]
fn sub4(a: &State, b: &State) -> State {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

/// PSI limiting of the element residuals `phi` in the characteristic
/// variables of `T_d = A d_x + B d_y` at `mean`, `d = v / |v|`.
///
/// The element total is preserved; a wave family whose total vanishes is
/// passed through unchanged.
pub fn psi_limit(gas: &GasModel, phi: &mut [State], mean: &State, velocity_floor: f64) -> Result<(), StateError> {
    let vx = mean[1] / mean[0];
    let vy = mean[2] / mean[0];
    let speed = vx.hypot(vy);
    let d = if speed > velocity_floor && speed > 0.0 {
        [vx / speed, vy / speed]
    } else {
        [1.0, 0.0]
    };
    let (r, l) = gas.eigenvectors(mean, d)?;
    let n = phi.len();
    let mut psi = [[0.0; 4]; MAX_DOFS];
    let mut total = [0.0; 4];
    for s in 0..n {
        for i in 0..4 {
            let v = l[i][0] * phi[s][0] + l[i][1] * phi[s][1] + l[i][2] * phi[s][2] + l[i][3] * phi[s][3];
            psi[s][i] = v;
            total[i] += v;
        }
    }
    for i in 0..4 {
        if total[i] == 0.0 {
            continue;
        }
        let mut den = 0.0;
        for s in 0..n {
            den += (psi[s][i] / total[i]).max(0.0);
        }
        for s in 0..n {
            psi[s][i] = (psi[s][i] / total[i]).max(0.0) / den * total[i];
        }
    }
    for s in 0..n {
        let mut v = [0.0; 4];
        for i in 0..4 {
            axpy4(&mut v, psi[s][i], &r[i]);
        }
        phi[s] = v;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gas() -> GasModel {
        GasModel::default()
    }

    fn all_walls(mesh: &Mesh, bc: BoundaryKind) -> HashMap<String, BoundaryKind> {
        mesh.tags.iter().map(|t| (t.clone(), bc.clone())).collect()
    }

    fn smooth(x: Vec2) -> State {
        gas().to_conservative(&[
            1.0 + 0.2 * (x[0] + 0.3 * x[1]).sin(),
            0.5 + 0.3 * x[1].cos(),
            -0.2 + 0.1 * x[0],
            1.0 + 0.1 * (x[0] * x[1]).cos(),
        ])
    }

    fn nodal_field(d: &Discretization) -> Vec<State> {
        d.dofmap.dof_position.iter().map(|x| smooth(*x)).collect()
    }

    #[test]
    fn constant_state_gives_zero_residual() {
        let mesh = Mesh::tri_grid(3, 3, [0.0, 1.0], [0.0, 1.0]).unwrap();
        for degree in [1, 2] {
            for scheme in Scheme::ALL {
                let d = Discretization::new(
                    &mesh,
                    degree,
                    &all_walls(&mesh, BoundaryKind::GradientFree),
                    gas(),
                    SchemeConfig::new(scheme),
                )
                .unwrap();
                let u = vec![gas().to_conservative(&[1.2, 0.3, -0.4, 0.9]); d.n_dofs()];
                let mut r = d.new_residual();
                d.spatial_residual(&u, &mut r).unwrap();
                let worst = r.elem.iter().chain(&r.jump).chain(&r.face).flatten().fold(0.0f64, |m, v| m.max(v.abs()));
                assert!(worst < 1e-13, "{scheme:?} B{degree}: {worst}");
            }
        }
    }

    #[test]
    fn element_sums_match_flux_balance() {
        let mesh = Mesh::tri_grid(2, 2, [0.0, 1.0], [0.0, 1.5]).unwrap();
        for scheme in Scheme::ALL {
            let d = Discretization::new(&mesh, 2, &all_walls(&mesh, BoundaryKind::Wall), gas(), SchemeConfig::new(scheme)).unwrap();
            let u = nodal_field(&d);
            let mut r = d.new_residual();
            d.spatial_residual(&u, &mut r).unwrap();
            let nd = d.dofs_per_element();
            for k in 0..d.n_elements() {
                let bal = d.element_flux_balance(k, &u).unwrap();
                let mut s = [0.0; 4];
                for i in 0..nd {
                    add4(&mut s, &r.elem[k * nd + i]);
                    if !r.jump.is_empty() {
                        add4(&mut s, &r.jump[k * nd + i]);
                    }
                }
                for i in 0..4 {
                    assert!((s[i] - bal[i]).abs() < 1e-12, "{scheme:?} elem {k}");
                }
            }
        }
    }

    #[test]
    fn theta_zero_is_galerkin() {
        let mesh = Mesh::tri_grid(2, 2, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let bcs = all_walls(&mesh, BoundaryKind::Wall);
        let mut cfg = SchemeConfig::new(Scheme::GalerkinCip);
        cfg.theta_cip = 0.0;
        let d = Discretization::new(&mesh, 1, &bcs, gas(), cfg).unwrap();
        let u = nodal_field(&d);
        let mut r = d.new_residual();
        d.spatial_residual(&u, &mut r).unwrap();
        assert!(r.jump.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn supg_tau_zero_is_galerkin() {
        let mesh = Mesh::quad_grid(2, 2, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let bcs = all_walls(&mesh, BoundaryKind::Wall);
        let mut cfg = SchemeConfig::new(Scheme::Supg);
        cfg.tau_supg = 0.0;
        let d = Discretization::new(&mesh, 1, &bcs, gas(), cfg).unwrap();
        let mut cfg_g = SchemeConfig::new(Scheme::GalerkinCip);
        cfg_g.theta_cip = 0.0;
        let g = Discretization::new(&mesh, 1, &bcs, gas(), cfg_g).unwrap();
        let u = nodal_field(&d);
        let mut r1 = d.new_residual();
        let mut r2 = g.new_residual();
        d.spatial_residual(&u, &mut r1).unwrap();
        g.spatial_residual(&u, &mut r2).unwrap();
        assert_eq!(r1.elem, r2.elem);
    }

    #[test]
    fn mass_matrix_rows_sum_to_lumped_weights() {
        for (mesh, deg) in [
            (Mesh::tri_grid(2, 2, [0.0, 1.0], [0.0, 1.0]).unwrap(), 2),
            (Mesh::quad_grid(2, 2, [0.0, 1.0], [0.0, 1.0]).unwrap(), 1),
        ] {
            let d = Discretization::new(&mesh, deg, &all_walls(&mesh, BoundaryKind::Wall), gas(), SchemeConfig::new(Scheme::GalerkinCip)).unwrap();
            let nd = d.dofs_per_element();
            for e in &d.elements {
                let ib = bezier::basis_integral(deg);
                for s in 0..nd {
                    let row: f64 = e.mass[s][..nd].iter().sum();
                    assert!((row - e.w[s]).abs() < 1e-14);
                    if mesh.kind == ElementKind::Triangle {
                        assert!((e.w[s] - e.area * ib).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn psi_preserves_total_and_bounds_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = gas();
        for _ in 0..200 {
            let mean = g.to_conservative(&[rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0)]);
            let n = if rng.gen_bool(0.5) { 3 } else { 6 };
            let mut phi: Vec<State> = (0..n).map(|_| [0; 4].map(|_| rng.gen_range(-1.0..1.0))).collect();
            let before: State = phi.iter().fold([0.0; 4], |mut a, b| {
                add4(&mut a, b);
                a
            });
            psi_limit(&g, &mut phi, &mean, 1e-8).unwrap();
            let after: State = phi.iter().fold([0.0; 4], |mut a, b| {
                add4(&mut a, b);
                a
            });
            for i in 0..4 {
                assert!((before[i] - after[i]).abs() < 1e-12 * (1.0 + before[i].abs()));
            }
        }
    }

    #[test]
    fn psi_is_identity_when_signs_agree() {
        let g = gas();
        let mean = g.to_conservative(&[1.0, 0.5, 0.2, 1.0]);
        let (_, l) = g.eigenvectors(&mean, [0.5 / 0.29f64.sqrt(), 0.2 / 0.29f64.sqrt()]).unwrap();
        // residuals whose characteristic components are all positive
        let (r, _) = g.eigenvectors(&mean, [0.5 / 0.29f64.sqrt(), 0.2 / 0.29f64.sqrt()]).unwrap();
        let coef = [[1.0, 2.0, 0.5, 0.1], [0.3, 0.2, 0.1, 0.7], [0.2, 0.9, 0.4, 0.3]];
        let mut phi: Vec<State> = coef
            .iter()
            .map(|c| {
                let mut v = [0.0; 4];
                for i in 0..4 {
                    axpy4(&mut v, c[i], &r[i]);
                }
                v
            })
            .collect();
        let orig = phi.clone();
        psi_limit(&g, &mut phi, &mean, 1e-8).unwrap();
        for (a, b) in phi.iter().zip(&orig) {
            for i in 0..4 {
                assert!((a[i] - b[i]).abs() < 1e-12);
            }
        }
        let _ = l;
    }

    #[test]
    fn psi_single_contributor_takes_all() {
        let g = gas();
        let mean = g.to_conservative(&[1.0, 0.0, 0.0, 1.0]);
        let (r, _) = g.eigenvectors(&mean, [1.0, 0.0]).unwrap();
        let mut phi = vec![r[0], [0.0; 4], [0.0; 4]];
        psi_limit(&g, &mut phi, &mean, 1e-8).unwrap();
        for i in 0..4 {
            assert!((phi[0][i] - r[0][i]).abs() < 1e-13);
            assert!(phi[1][i].abs() < 1e-13 && phi[2][i].abs() < 1e-13);
        }
    }

    #[test]
    fn rusanov_alpha_grows_with_speed() {
        let mesh = Mesh::tri_grid(1, 1, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let d = Discretization::new(&mesh, 1, &all_walls(&mesh, BoundaryKind::Wall), gas(), SchemeConfig::new(Scheme::Rusanov)).unwrap();
        let slow = vec![gas().to_conservative(&[1.0, 0.5, 0.1, 1.0]); d.n_dofs()];
        let fast = vec![gas().to_conservative(&[1.0, 1.0, 0.2, 1.0]); d.n_dofs()];
        assert!(d.element_wavespeed(0, &fast).unwrap() >= d.element_wavespeed(0, &slow).unwrap());
    }

    #[test]
    fn gradient_free_boundary_residual_vanishes() {
        let mesh = Mesh::tri_grid(2, 2, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let d = Discretization::new(&mesh, 2, &all_walls(&mesh, BoundaryKind::GradientFree), gas(), SchemeConfig::new(Scheme::GalerkinCip)).unwrap();
        let u = nodal_field(&d);
        let mut r = d.new_residual();
        d.spatial_residual(&u, &mut r).unwrap();
        assert!(r.face.iter().flatten().all(|v| *v == 0.0));
        assert!(r.face_jflux.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn wall_with_tangential_flow_has_no_mass_residual() {
        let mesh = Mesh::quad_grid(2, 2, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let bcs: HashMap<String, BoundaryKind> = mesh.tags.iter().map(|t| (t.clone(), BoundaryKind::Wall)).collect();
        let d = Discretization::new(&mesh, 1, &bcs, gas(), SchemeConfig::new(Scheme::GalerkinCip)).unwrap();
        // v = 0 everywhere gives v.n = 0 on every wall
        let u: Vec<State> = d.dofmap.dof_position.iter().map(|x| gas().to_conservative(&[1.0 + 0.1 * x[0], 0.0, 0.0, 1.0 + x[1]])).collect();
        let mut r = d.new_residual();
        d.spatial_residual(&u, &mut r).unwrap();
        for v in &r.face {
            assert!(v[0].abs() < 1e-15 && v[3].abs() < 1e-15);
        }
    }

    #[test]
    fn missing_boundary_condition_is_config_error() {
        let mesh = Mesh::quad_grid(1, 1, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let err = Discretization::new(&mesh, 1, &HashMap::new(), gas(), SchemeConfig::new(Scheme::Rusanov)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
