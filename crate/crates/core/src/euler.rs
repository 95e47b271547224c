//! Ideal-gas Euler physics in conservative variables `(rho, m_x, m_y, E)`.

use std::str::FromStr;

use crate::bezier::Vec2;
use crate::error::{Error, Result, StateError};

/// Conservative state `(rho, m_x, m_y, E)`.
pub type ConsState = [f64; 4];
pub type State = ConsState;
/// Primitive state `(rho, v_x, v_y, p)`.
pub type Primitive = [f64; 4];
pub type Mat4 = [[f64; 4]; 4];

fn state_error(u: &State) -> StateError {
    StateError {
        rho: u[0],
        mx: u[1],
        my: u[2],
        energy: u[3],
        element: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel {
    pub gamma: f64,
}

impl Default for GasModel {
    fn default() -> Self {
        GasModel { gamma: 1.4 }
    }
}

impl GasModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) {
            return Err(Error::Config(format!("gamma must exceed 1, got {gamma}")));
        }
        Ok(GasModel { gamma })
    }

    /// Pressure of an admissible state.
    #[inline]
    pub fn pressure(&self, u: &State) -> Result<f64, StateError> {
        let rho = u[0];
        if !(rho > 0.0) || !u.iter().all(|c| c.is_finite()) {
            return Err(state_error(u));
        }
        let p = (self.gamma - 1.0) * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / rho);
        if p > 0.0 {
            Ok(p)
        } else {
            Err(state_error(u))
        }
    }

    pub fn is_admissible(&self, u: &State) -> bool {
        self.pressure(u).is_ok()
    }

    pub fn sound_speed(&self, u: &State) -> Result<f64, StateError> {
        let p = self.pressure(u)?;
        Ok((self.gamma * p / u[0]).sqrt())
    }

    pub fn to_conservative(&self, w: &Primitive) -> State {
        let [rho, vx, vy, p] = *w;
        [
            rho,
            rho * vx,
            rho * vy,
            p / (self.gamma - 1.0) + 0.5 * rho * (vx * vx + vy * vy),
        ]
    }

    pub fn to_primitive(&self, u: &State) -> Result<Primitive, StateError> {
        let p = self.pressure(u)?;
        Ok([u[0], u[1] / u[0], u[2] / u[0], p])
    }

    /// Both flux columns `(f_1, f_2)`.
    #[inline]
    pub fn flux(&self, u: &State) -> Result<[State; 2], StateError> {
        let p = self.pressure(u)?;
        let (vx, vy) = (u[1] / u[0], u[2] / u[0]);
        let h = u[3] + p;
        let mxy = u[1] * u[2] / u[0];
        Ok([
            [u[1], u[1] * vx + p, mxy, h * vx],
            [u[2], mxy, u[2] * vy + p, h * vy],
        ])
    }

    /// Normal flux `f(u) . n`.
    #[inline]
    pub fn normal_flux(&self, u: &State, n: Vec2) -> Result<State, StateError> {
        let p = self.pressure(u)?;
        let vn = (u[1] * n[0] + u[2] * n[1]) / u[0];
        Ok([
            u[0] * vn,
            u[1] * vn + p * n[0],
            u[2] * vn + p * n[1],
            (u[3] + p) * vn,
        ])
    }

    /// Angular momentum flux `G_i = x ^ (momentum column of f_i)`.
    pub fn angular_flux(&self, u: &State, x: Vec2) -> Result<Vec2, StateError> {
        let [f1, f2] = self.flux(u)?;
        Ok([x[0] * f1[2] - x[1] * f1[1], x[0] * f2[2] - x[1] * f2[1]])
    }

    /// `|v . n| + c`
    #[inline]
    pub fn max_wavespeed(&self, u: &State, n: Vec2) -> Result<f64, StateError> {
        let c = self.sound_speed(u)?;
        Ok(((u[1] * n[0] + u[2] * n[1]) / u[0]).abs() + c)
    }

    /// `|v| + c`, the bound over all directions.
    #[inline]
    pub fn spectral_radius(&self, u: &State) -> Result<f64, StateError> {
        let c = self.sound_speed(u)?;
        Ok((u[1] * u[1] + u[2] * u[2]).sqrt() / u[0] + c)
    }

    /// Two-state Rusanov flux across unit normal `n` (from `a` towards `b`).
    pub fn rusanov_flux(&self, a: &State, b: &State, n: Vec2) -> Result<State, StateError> {
        let fa = self.normal_flux(a, n)?;
        let fb = self.normal_flux(b, n)?;
        let lam = self.max_wavespeed(a, n)?.max(self.max_wavespeed(b, n)?);
        let mut f = [0.0; 4];
        for i in 0..4 {
            f[i] = 0.5 * (fa[i] + fb[i]) - 0.5 * lam * (b[i] - a[i]);
        }
        Ok(f)
    }

    /// Boundary numerical flux `F_n(u, g)`.
    pub fn boundary_numflux(&self, u: &State, n: Vec2, bc: &BoundaryKind) -> Result<State, StateError> {
        match bc {
            BoundaryKind::Wall => {
                let mn = u[1] * n[0] + u[2] * n[1];
                let mirror = [u[0], u[1] - 2.0 * mn * n[0], u[2] - 2.0 * mn * n[1], u[3]];
                self.rusanov_flux(u, &mirror, n)
            }
            BoundaryKind::Dirichlet(g) => self.rusanov_flux(u, g, n),
            BoundaryKind::GradientFree => self.normal_flux(u, n),
        }
    }

    /// Flux Jacobians `A = df_1/du`, `B = df_2/du`.
    pub fn jacobians(&self, u: &State) -> Result<(Mat4, Mat4), StateError> {
        let p = self.pressure(u)?;
        let g = self.gamma;
        let g1 = g - 1.0;
        let (vx, vy) = (u[1] / u[0], u[2] / u[0]);
        let q2 = 0.5 * (vx * vx + vy * vy);
        let h = (u[3] + p) / u[0];
        let a = [
            [0.0, 1.0, 0.0, 0.0],
            [g1 * q2 - vx * vx, (3.0 - g) * vx, -g1 * vy, g1],
            [-vx * vy, vy, vx, 0.0],
            [vx * (g1 * q2 - h), h - g1 * vx * vx, -g1 * vx * vy, g * vx],
        ];
        let b = [
            [0.0, 0.0, 1.0, 0.0],
            [-vx * vy, vy, vx, 0.0],
            [g1 * q2 - vy * vy, -g1 * vx, (3.0 - g) * vy, g1],
            [vy * (g1 * q2 - h), -g1 * vx * vy, h - g1 * vy * vy, g * vy],
        ];
        Ok((a, b))
    }

    /// Right (columns of the returned `r[i]`) and left (rows `l[i]`)
    /// eigenvectors of `A n_x + B n_y`, ordered by eigenvalue
    /// `v.n - c, v.n, v.n, v.n + c`.
    pub fn eigenvectors(&self, u: &State, n: Vec2) -> Result<(Mat4, Mat4), StateError> {
        let p = self.pressure(u)?;
        let (vx, vy) = (u[1] / u[0], u[2] / u[0]);
        let c = (self.gamma * p / u[0]).sqrt();
        let h = (u[3] + p) / u[0];
        let (nx, ny) = (n[0], n[1]);
        let vn = vx * nx + vy * ny;
        let vt = -vx * ny + vy * nx;
        let q2 = 0.5 * (vx * vx + vy * vy);
        let b1 = (self.gamma - 1.0) / (c * c);
        let b2 = b1 * q2;
        let r = [
            [1.0, vx - c * nx, vy - c * ny, h - c * vn],
            [1.0, vx, vy, q2],
            [0.0, -ny, nx, vt],
            [1.0, vx + c * nx, vy + c * ny, h + c * vn],
        ];
        let l = [
            [
                0.5 * (b2 + vn / c),
                0.5 * (-b1 * vx - nx / c),
                0.5 * (-b1 * vy - ny / c),
                0.5 * b1,
            ],
            [1.0 - b2, b1 * vx, b1 * vy, -b1],
            [-vt, -ny, nx, 0.0],
            [
                0.5 * (b2 - vn / c),
                0.5 * (-b1 * vx + nx / c),
                0.5 * (-b1 * vy + ny / c),
                0.5 * b1,
            ],
        ];
        Ok((r, l))
    }
}

/// Pointwise 3D angular momentum flux for state `(rho, m_1, m_2, m_3, E)`:
/// row `i` is `x x (m v_i + p e_i)`.
pub fn angular_flux_3d(gas: &GasModel, u: &[f64; 5], x: [f64; 3]) -> Result<[[f64; 3]; 3], StateError> {
    let rho = u[0];
    let m = [u[1], u[2], u[3]];
    let p = (gas.gamma - 1.0) * (u[4] - 0.5 * (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) / rho);
    if !(rho > 0.0 && p > 0.0) {
        return Err(StateError {
            rho,
            mx: m[0],
            my: m[1],
            energy: u[4],
            element: None,
        });
    }
    let mut g = [[0.0; 3]; 3];
    for (i, gi) in g.iter_mut().enumerate() {
        let mut fm = [m[0] * m[i] / rho, m[1] * m[i] / rho, m[2] * m[i] / rho];
        fm[i] += p;
        *gi = [
            x[1] * fm[2] - x[2] * fm[1],
            x[2] * fm[0] - x[0] * fm[2],
            x[0] * fm[1] - x[1] * fm[0],
        ];
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryKind {
    Wall,
    Dirichlet(State),
    GradientFree,
}

impl FromStr for BoundaryKind {
    type Err = Error;

    /// Parses `wall` and `gradient_free`. Dirichlet data depend on the
    /// problem and are built by the caller.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wall" => Ok(BoundaryKind::Wall),
            "gradient_free" | "gradient-free" => Ok(BoundaryKind::GradientFree),
            other => Err(Error::Config(format!("unknown boundary kind '{other}'"))),
        }
    }
}
