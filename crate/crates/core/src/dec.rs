//! Explicit deferred correction (DeC) time stepping.
//!
//! Each step subdivides `[t_n, t_n + dt]` into `M` equal sub-intervals and
//! iterates
//!
//! ```text
//! |C_s| (u_l^{p+1} - u_l^p) = - sum_K R^K_{s,l} - sum_Gamma R^Gamma_{s,l}
//! R^K_{s,l} = (time part of u_l - u_0) + sum_k theta_k^l Phi^K_s(u_k)
//! ```
//!
//! with the angular momentum correction applied to the momentum block of
//! every `R` before the scatter.

use rayon::prelude::*;

use crate::bezier::{ElementKind, Vec2};
use crate::correction::{self, CorrectionMode};
use crate::error::{Error, Result};
use crate::euler::State;
use crate::residual::{add4, axpy4, psi_limit, Discretization, Scheme, SpatialResidual, MAX_DOFS, MAX_FACE_DOFS};

/// `theta[l][k]`: weight of sub-step `k` in the integral from `t_0` to
/// `t_l`, as a fraction of `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaTable {
    pub m: usize,
    pub theta: Vec<Vec<f64>>,
}

impl ThetaTable {
    pub fn new(m: usize) -> Result<Self> {
        let theta = match m {
            1 => vec![vec![0.0, 0.0], vec![0.5, 0.5]],
            2 => vec![
                vec![0.0, 0.0, 0.0],
                vec![5.0 / 24.0, 8.0 / 24.0, -1.0 / 24.0],
                vec![1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0],
            ],
            _ => return Err(Error::Config(format!("DeC with M = {m} sub-intervals is not supported"))),
        };
        Ok(ThetaTable { m, theta })
    }

    /// Sub-time `t_l - t_0` as a fraction of `dt`.
    pub fn sub_time(&self, l: usize) -> f64 {
        l as f64 / self.m as f64
    }
}

/// Sub-step snapshots `u_(0), ..., u_(M)` of one time step.
#[derive(Debug, Clone)]
pub struct SubstepStack {
    pub u: Vec<Vec<State>>,
}

impl SubstepStack {
    pub fn constant(u_n: &[State], m: usize) -> Self {
        SubstepStack {
            u: vec![u_n.to_vec(); m + 1],
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub u: Vec<State>,
    /// `|| L2(U^(p)) ||` for each iteration `p`.
    pub defects: Vec<f64>,
}

/// DeC integrator owning its discretization and work buffers.
#[derive(Debug)]
pub struct DecSolver {
    pub disc: Discretization,
    pub theta: ThetaTable,
    pub n_iter: usize,
    pub correction: CorrectionMode,
    res: Vec<SpatialResidual>,
    elem_buf: Vec<State>,
    face_buf: Vec<State>,
    /// Defect `Psi^K` of the last assembled sub-step.
    pub psi_elem: Vec<f64>,
    /// Correction vectors of the last assembled sub-step, per element.
    pub r_elem: Vec<[Vec2; MAX_DOFS]>,
    pub psi_face: Vec<f64>,
    pub r_face: Vec<[Vec2; MAX_FACE_DOFS]>,
    acc: Vec<State>,
}

/// Sub-interval count paired with each basis degree.
pub fn default_m(degree: u32) -> usize {
    if degree >= 2 {
        2
    } else {
        1
    }
}

impl DecSolver {
    pub fn new(disc: Discretization, correction: CorrectionMode) -> Result<Self> {
        let m = default_m(disc.degree());
        let theta = ThetaTable::new(m)?;
        let res = (0..=m).map(|_| disc.new_residual()).collect();
        let n_el = disc.n_elements();
        let nd = disc.dofs_per_element();
        let nf = disc.faces.len();
        Ok(DecSolver {
            theta,
            n_iter: m + 1,
            correction,
            res,
            elem_buf: vec![[0.0; 4]; n_el * nd],
            face_buf: vec![[0.0; 4]; nf * MAX_FACE_DOFS],
            psi_elem: vec![0.0; n_el],
            r_elem: vec![[[0.0; 2]; MAX_DOFS]; n_el],
            psi_face: vec![0.0; nf],
            r_face: vec![[[0.0; 2]; MAX_FACE_DOFS]; nf],
            acc: vec![[0.0; 4]; disc.n_dofs()],
            disc,
        })
    }

    pub fn m(&self) -> usize {
        self.theta.m
    }

    /// Spatial residuals of every sub-step of `stack`.
    pub fn compute_residuals(&mut self, stack: &SubstepStack) -> Result<()> {
        for (k, u) in stack.u.iter().enumerate() {
            self.disc.spatial_residual(u, &mut self.res[k])?;
        }
        Ok(())
    }

    /// One full time step from `u_n`.
    pub fn step(&mut self, u_n: &[State], dt: f64) -> Result<StepOutcome> {
        let m = self.m();
        let mut stack = SubstepStack::constant(u_n, m);
        self.disc.spatial_residual(u_n, &mut self.res[0])?;
        let mut defects = Vec::with_capacity(self.n_iter);
        for p in 0..self.n_iter {
            if p == 0 {
                // every sub-step still equals u_n
                let (first, rest) = self.res.split_at_mut(1);
                for r in rest {
                    r.clone_from(&first[0]);
                }
            } else {
                for k in 1..=m {
                    self.disc.spatial_residual(&stack.u[k], &mut self.res[k])?;
                }
            }
            let mut next = stack.clone();
            let mut defect = 0.0;
            for l in 1..=m {
                self.assemble_substep(l, &stack, dt)?;
                let c = &self.disc.measures.c_sigma;
                for (s, (un, a)) in next.u[l].iter_mut().zip(&self.acc).enumerate() {
                    axpy4(un, -1.0 / c[s], a);
                    defect += a.iter().map(|v| v * v).sum::<f64>();
                    if let Err(e) = self.disc.gas.pressure(un) {
                        return Err(Error::StepFailure {
                            iteration: p,
                            dof: s,
                            source: e,
                        });
                    }
                }
            }
            defects.push(defect.sqrt());
            stack = next;
        }
        Ok(StepOutcome {
            u: stack.u.swap_remove(m),
            defects,
        })
    }

    /// Assemble `L2(U)` for sub-step `l` (with corrections) into the global
    /// accumulator, using the residuals already stored for `stack`.
    pub fn assemble_substep(&mut self, l: usize, stack: &SubstepStack, dt: f64) -> Result<&[State]> {
        let nd = self.disc.dofs_per_element();
        let disc = &self.disc;
        let theta: Vec<f64> = self.theta.theta[l].iter().map(|t| t * dt).collect();
        let res = &self.res;
        let mode = self.correction;

        self.elem_buf
            .par_chunks_mut(nd)
            .zip(self.psi_elem.par_iter_mut())
            .zip(self.r_elem.par_iter_mut())
            .enumerate()
            .try_for_each(|(k, ((out, psi), r))| {
                element_total(disc, res, &theta, mode, k, &stack.u[l], &stack.u[0], out, psi, r)
            })?;

        self.face_buf
            .par_chunks_mut(MAX_FACE_DOFS)
            .zip(self.psi_face.par_iter_mut())
            .zip(self.r_face.par_iter_mut())
            .enumerate()
            .try_for_each(|(f, ((out, psi), r))| face_total(disc, res, &theta, mode, f, out, psi, r))?;

        // deterministic scatter: elements, then faces, in index order
        self.acc.iter_mut().for_each(|v| *v = [0.0; 4]);
        for (k, el) in disc.elements.iter().enumerate() {
            for s in 0..nd {
                add4(&mut self.acc[el.dofs[s]], &self.elem_buf[k * nd + s]);
            }
        }
        for (f, fd) in disc.faces.iter().enumerate() {
            let el = &disc.elements[fd.element];
            for i in 0..fd.n_dofs {
                add4(&mut self.acc[el.dofs[fd.local_dofs[i]]], &self.face_buf[f * MAX_FACE_DOFS + i]);
            }
        }
        Ok(&self.acc)
    }

    /// Corrected element residuals of the last assembled sub-step.
    pub fn element_residuals(&self) -> &[State] {
        &self.elem_buf
    }

    pub fn face_residuals(&self) -> &[State] {
        &self.face_buf
    }

    pub fn residuals(&self) -> &[SpatialResidual] {
        &self.res
    }
}

/// Anchors and volume moment vectors used by the correction of element `k`.
pub fn correction_geometry(disc: &Discretization, k: usize, mode: CorrectionMode) -> ([Vec2; MAX_DOFS], [Vec2; MAX_DOFS]) {
    let el = &disc.elements[k];
    let mut c = [[0.0; 2]; MAX_DOFS];
    match mode {
        CorrectionMode::HighOrder => (el.y, el.z_area),
        _ => {
            for s in 0..disc.dofs_per_element() {
                c[s] = [el.w[s] * el.x[s][0], el.w[s] * el.x[s][1]];
            }
            (el.x, c)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn element_total(
    disc: &Discretization,
    res: &[SpatialResidual],
    theta: &[f64],
    mode: CorrectionMode,
    k: usize,
    ul: &[State],
    u0: &[State],
    out: &mut [State],
    psi_out: &mut f64,
    r_out: &mut [Vec2; MAX_DOFS],
) -> Result<()> {
    let nd = out.len();
    let el = &disc.elements[k];
    let scheme = disc.config.scheme;
    let a = disc.gather(k, ul);
    let b = disc.gather(k, u0);
    let mut du = [[0.0; 4]; MAX_DOFS];
    for s in 0..nd {
        for i in 0..4 {
            du[s][i] = a[s][i] - b[s][i];
        }
    }
    for s in 0..nd {
        out[s] = [0.0; 4];
        if scheme.lumped_time() {
            axpy4(&mut out[s], el.w[s], &du[s]);
        } else {
            for t in 0..nd {
                axpy4(&mut out[s], el.mass[s][t], &du[t]);
            }
        }
        for (r, th) in res.iter().zip(theta) {
            if *th != 0.0 {
                axpy4(&mut out[s], *th, &r.elem[k * nd + s]);
            }
        }
    }
    if scheme == Scheme::PsiCip {
        let mut mean = [0.0; 4];
        for s in 0..nd {
            axpy4(&mut mean, 1.0 / nd as f64, &a[s]);
        }
        psi_limit(&disc.gas, out, &mean, disc.config.velocity_floor).map_err(|e| e.in_element(k))?;
    }
    if scheme.uses_jump() {
        for s in 0..nd {
            for (r, th) in res.iter().zip(theta) {
                if *th != 0.0 {
                    axpy4(&mut out[s], *th, &r.jump[k * nd + s]);
                }
            }
        }
    }
    *psi_out = 0.0;
    *r_out = [[0.0; 2]; MAX_DOFS];
    if mode == CorrectionMode::Off {
        return Ok(());
    }
    let jflux: f64 = res.iter().zip(theta).map(|(r, th)| th * r.elem_jflux[k]).sum();
    let (anchors, c) = correction_geometry(disc, k, mode);
    let mut dm = [[0.0; 2]; MAX_DOFS];
    let mut rm = [[0.0; 2]; MAX_DOFS];
    for s in 0..nd {
        dm[s] = [du[s][1], du[s][2]];
        rm[s] = [out[s][1], out[s][2]];
    }
    let psi = correction::target_psi(&c[..nd], &dm[..nd], jflux, &anchors[..nd], &rm[..nd]);
    *psi_out = psi;
    let degenerate = |reason: String| Error::DegenerateElement { element: k, reason };
    if mode == CorrectionMode::SecondOrder && disc.mesh.kind == ElementKind::Triangle && nd == 3 {
        let r = correction::triangle_correction(psi, [anchors[0], anchors[1], anchors[2]])
            .map_err(|e| degenerate(e.to_string()))?;
        r_out[..3].copy_from_slice(&r);
    } else {
        correction::ho_correction_into(psi, &anchors[..nd], &mut r_out[..nd])
            .map_err(|spread| degenerate(format!("anchor spread {spread} below floor")))?;
    }
    for s in 0..nd {
        out[s][1] += r_out[s][0];
        out[s][2] += r_out[s][1];
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn face_total(
    disc: &Discretization,
    res: &[SpatialResidual],
    theta: &[f64],
    mode: CorrectionMode,
    f: usize,
    out: &mut [State],
    psi_out: &mut f64,
    r_out: &mut [Vec2; MAX_FACE_DOFS],
) -> Result<()> {
    let fd = &disc.faces[f];
    let n = fd.n_dofs;
    for i in 0..MAX_FACE_DOFS {
        out[i] = [0.0; 4];
        for (r, th) in res.iter().zip(theta) {
            if *th != 0.0 {
                axpy4(&mut out[i], *th, &r.face[f * MAX_FACE_DOFS + i]);
            }
        }
    }
    *psi_out = 0.0;
    *r_out = [[0.0; 2]; MAX_FACE_DOFS];
    if mode == CorrectionMode::Off {
        return Ok(());
    }
    let (anchors_el, _) = correction_geometry(disc, fd.element, mode);
    let mut anchors = [[0.0; 2]; MAX_FACE_DOFS];
    let mut rm = [[0.0; 2]; MAX_FACE_DOFS];
    for i in 0..n {
        anchors[i] = anchors_el[fd.local_dofs[i]];
        rm[i] = [out[i][1], out[i][2]];
    }
    let jflux: f64 = res.iter().zip(theta).map(|(r, th)| th * r.face_jflux[f]).sum();
    let psi = correction::target_psi(&[], &[], jflux, &anchors[..n], &rm[..n]);
    *psi_out = psi;
    correction::ho_correction_into(psi, &anchors[..n], &mut r_out[..n])
        .map_err(|spread| Error::DegenerateFace(format!("face {f}: anchor spread {spread} below floor")))?;
    for i in 0..n {
        out[i][1] += r_out[i][0];
        out[i][2] += r_out[i][1];
    }
    Ok(())
}

/// `dt = cfl * min_K h_K / lambda_K / (2 degree - 1)`; falls back to
/// `dt_max` when no wave moves.
pub fn compute_dt(disc: &Discretization, u: &[State], cfl: f64, dt_max: f64) -> Result<f64> {
    let ratio = (0..disc.n_elements())
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let lam = disc.element_wavespeed(k, u)?;
            Ok(if lam > 0.0 { disc.elements[k].h / lam } else { f64::INFINITY })
        })
        .try_reduce(|| f64::INFINITY, |a, b| Ok(a.min(b)))?;
    let deg = f64::from(disc.degree());
    let dt = cfl * ratio / (2.0 * deg - 1.0);
    Ok(if dt.is_finite() { dt.min(dt_max) } else { dt_max })
}
