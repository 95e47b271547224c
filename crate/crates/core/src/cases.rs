//! Initial data and reference fields for the benchmark problems. All
//! initializers return primitive states `(rho, v_x, v_y, p)`.

use std::f64::consts::PI;

use crate::bezier::Vec2;
use crate::error::{Error, Result};
use crate::euler::{BoundaryKind, Primitive, State};
use crate::residual::Discretization;

/// Isentropic vortex of strength `beta` advected by a free stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexParams {
    pub beta: f64,
    pub center: Vec2,
    pub free_stream: Vec2,
    pub gamma: f64,
}

impl Default for VortexParams {
    fn default() -> Self {
        VortexParams {
            beta: 5.0,
            center: [0.0, 0.0],
            free_stream: [1.0, 0.0],
            gamma: 1.4,
        }
    }
}

impl VortexParams {
    /// Rejects strengths for which the core density is not positive.
    pub fn validate(&self) -> Result<()> {
        let rho_c = 1.0 - (self.gamma - 1.0) * self.beta * self.beta / (8.0 * self.gamma * PI * PI) * 1f64.exp();
        if rho_c > 0.0 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "vortex strength beta = {} gives non-positive core density",
                self.beta
            )))
        }
    }
}

fn vortex_core(beta: f64, gamma: f64, r2: f64) -> (f64, f64, f64) {
    let rho = (1.0 - (gamma - 1.0) * beta * beta / (8.0 * gamma * PI * PI) * (1.0 - r2).exp()).powf(1.0 / (gamma - 1.0));
    let k = beta / (2.0 * PI) * (0.5 * (1.0 - r2)).exp();
    (rho, k, rho.powf(gamma))
}

pub fn isentropic_vortex(x: Vec2, p: &VortexParams) -> Primitive {
    let dx = x[0] - p.center[0];
    let dy = x[1] - p.center[1];
    let (rho, k, pr) = vortex_core(p.beta, p.gamma, dx * dx + dy * dy);
    [rho, p.free_stream[0] - k * dy, p.free_stream[1] + k * dx, pr]
}

/// Vortex advected for time `t` on a periodic box `[lo, lo + period]`;
/// the centre is wrapped back into the box and the nearest image used.
pub fn vortex_exact(x: Vec2, t: f64, p: &VortexParams, lo: Vec2, period: Vec2) -> Primitive {
    let mut c = [0.0; 2];
    let mut d = [0.0; 2];
    for i in 0..2 {
        c[i] = p.center[i] + p.free_stream[i] * t;
        c[i] = lo[i] + (c[i] - lo[i]).rem_euclid(period[i]);
        let mut di = x[i] - c[i];
        di -= period[i] * (di / period[i]).round();
        d[i] = di;
    }
    let (rho, k, pr) = vortex_core(p.beta, p.gamma, d[0] * d[0] + d[1] * d[1]);
    [rho, p.free_stream[0] - k * d[1], p.free_stream[1] + k * d[0], pr]
}

pub const FOUR_VORTEX_CENTERS: [Vec2; 4] = [[2.5, 2.5], [-2.5, 2.5], [-2.5, -2.5], [2.5, -2.5]];

/// Four co-located vortices, one per quadrant, rotating in alternating
/// directions. Offsets are taken from the active centre.
pub fn four_vortex(x: Vec2, beta: f64, gamma: f64) -> Primitive {
    let c = match (x[0] >= 0.0, x[1] >= 0.0) {
        (true, true) => FOUR_VORTEX_CENTERS[0],
        (false, true) => FOUR_VORTEX_CENTERS[1],
        (false, false) => FOUR_VORTEX_CENTERS[2],
        (true, false) => FOUR_VORTEX_CENTERS[3],
    };
    let dx = x[0] - c[0];
    let dy = x[1] - c[1];
    let (rho, k, p) = vortex_core(beta, gamma, dx * dx + dy * dy);
    if x[0] * x[1] >= 0.0 {
        [rho, -k * dy, k * dx, p]
    } else {
        [rho, k * dy, -k * dx, p]
    }
}

pub fn gresho_vphi(r: f64) -> f64 {
    if r < 0.2 {
        5.0 * r
    } else if r < 0.4 {
        2.0 - 5.0 * r
    } else {
        0.0
    }
}

pub fn gresho_pressure(r: f64) -> f64 {
    if r < 0.2 {
        5.0 + 12.5 * r * r
    } else if r < 0.4 {
        9.0 - 4.0 * 0.2f64.ln() + 12.5 * r * r - 20.0 * r + 4.0 * r.ln()
    } else {
        3.0 + 4.0 * 2f64.ln()
    }
}

/// Angular momentum density `rho r v_phi` of the Gresho vortex.
pub fn gresho_j(r: f64) -> f64 {
    if r < 0.2 {
        5.0 * r * r
    } else if r < 0.4 {
        2.0 * r - 5.0 * r * r
    } else {
        0.0
    }
}

pub fn gresho(x: Vec2, center: Vec2) -> Primitive {
    let dx = x[0] - center[0];
    let dy = x[1] - center[1];
    let r = dx.hypot(dy);
    let p = gresho_pressure(r);
    if r == 0.0 {
        return [1.0, 0.0, 0.0, p];
    }
    let v = gresho_vphi(r);
    [1.0, -v * dy / r, v * dx / r, p]
}

pub fn sod2d(x: Vec2) -> Primitive {
    if x[0].hypot(x[1]) <= 0.5 {
        [1.0, 0.0, 0.0, 1.0]
    } else {
        [0.125, 0.0, 0.0, 0.1]
    }
}

/// A benchmark problem: initial data, default boundary condition and
/// default run parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Case {
    /// Vortex advected by the free stream; `period` (lower corner and box
    /// lengths) is set on doubly periodic domains and enables the exact
    /// solution.
    IsentropicVortex { params: VortexParams, period: Option<(Vec2, Vec2)> },
    FourVortex { beta: f64, gamma: f64 },
    Gresho { center: Vec2 },
    Sod,
}

impl Case {
    pub fn name(&self) -> &'static str {
        match self {
            Case::IsentropicVortex { .. } => "isentropic_vortex",
            Case::FourVortex { .. } => "four_vortex",
            Case::Gresho { .. } => "gresho",
            Case::Sod => "sod",
        }
    }

    pub fn initial(&self, x: Vec2) -> Primitive {
        match self {
            Case::IsentropicVortex { params, period: Some((lo, per)) } => vortex_exact(x, 0.0, params, *lo, *per),
            Case::IsentropicVortex { params, period: None } => isentropic_vortex(x, params),
            Case::FourVortex { beta, gamma } => four_vortex(x, *beta, *gamma),
            Case::Gresho { center } => gresho(x, *center),
            Case::Sod => sod2d(x),
        }
    }

    /// Exact solution at time `t`, when one is known.
    pub fn exact(&self, x: Vec2, t: f64) -> Option<Primitive> {
        match self {
            Case::IsentropicVortex { params, period: Some((lo, per)) } => Some(vortex_exact(x, t, params, *lo, *per)),
            Case::IsentropicVortex { params, period: None } if t == 0.0 => Some(isentropic_vortex(x, params)),
            Case::Gresho { center } => Some(gresho(x, *center)),
            _ => None,
        }
    }

    pub fn default_bc(&self) -> BoundaryKind {
        match self {
            Case::IsentropicVortex { params, .. } => {
                // far-field free stream, conservative
                let [u, v] = params.free_stream;
                let e = 1.0 / (params.gamma - 1.0) + 0.5 * (u * u + v * v);
                BoundaryKind::Dirichlet([1.0, u, v, e])
            }
            Case::FourVortex { .. } | Case::Sod => BoundaryKind::Wall,
            Case::Gresho { .. } => BoundaryKind::GradientFree,
        }
    }

    pub fn default_final_time(&self) -> f64 {
        match self {
            Case::IsentropicVortex { .. } | Case::FourVortex { .. } => 1.0,
            Case::Gresho { .. } | Case::Sod => 0.16,
        }
    }

    pub fn default_cfl(&self) -> f64 {
        match self {
            Case::Gresho { .. } => 0.25,
            Case::Sod => 0.3,
            _ => 0.5,
        }
    }
}

/// Bernstein coefficients interpolating `f` (primitive) at the Greville
/// points: vertex coefficients take the point value, the edge coefficient of
/// `B_110` is `2 u(mid) - (u_a + u_b) / 2`. Positions are taken in each
/// element's own frame, so `f` must be periodic on periodic meshes.
pub fn interpolate<F: Fn(Vec2) -> Primitive>(disc: &Discretization, f: F) -> Vec<State> {
    let gas = &disc.gas;
    let table = &disc.table;
    let deg = table.degree;
    let mut u = vec![[0.0; 4]; disc.n_dofs()];
    let mut done = vec![false; disc.n_dofs()];
    for k in 0..disc.n_elements() {
        let dofs = disc.dofmap.element_dofs(k);
        let vertex_of = |i: usize| {
            (0..dofs.len())
                .find(|&s| table.dof_multiindices[s].components()[i] == deg)
                .expect("vertex DOF")
        };
        for (s, &g) in dofs.iter().enumerate() {
            if done[g] {
                continue;
            }
            let x = disc.dofmap.local_position(k, s);
            let mi = table.dof_multiindices[s].components();
            let value = gas.to_conservative(&f(x));
            u[g] = if mi.contains(&deg) {
                value
            } else {
                let ends: Vec<usize> = (0..mi.len()).filter(|&i| mi[i] > 0).collect();
                let a = gas.to_conservative(&f(disc.dofmap.local_position(k, vertex_of(ends[0]))));
                let b = gas.to_conservative(&f(disc.dofmap.local_position(k, vertex_of(ends[1]))));
                std::array::from_fn(|i| 2.0 * value[i] - 0.5 * (a[i] + b[i]))
            };
            done[g] = true;
        }
    }
    u
}
