//! Angular momentum correction: the per-element (and per-boundary-face)
//! defect `Psi` and the zero-sum momentum perturbations `r_sigma` that absorb
//! it.
//!
//! Every kernel returns vectors with `sum r = 0` and
//! `sum anchor ^ r = Psi`, so momentum conservation is untouched while the
//! angular momentum balance of the element becomes exact.

use std::str::FromStr;

use crate::bezier::{cross, Vec2};
use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

/// Which anchors and moment vectors the correction uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrectionMode {
    #[default]
    Off,
    /// Anchors at the DOF positions `x_sigma`, lumped `int_K J` quadrature.
    SecondOrder,
    /// Anchors at the moment points `y_sigma`, moment-vector `int_K J`.
    HighOrder,
}

impl FromStr for CorrectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" | "none" => Ok(CorrectionMode::Off),
            "second_order" => Ok(CorrectionMode::SecondOrder),
            "high_order" => Ok(CorrectionMode::HighOrder),
            other => Err(Error::Config(format!("unknown correction mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for CorrectionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CorrectionMode::Off => "off",
            CorrectionMode::SecondOrder => "second_order",
            CorrectionMode::HighOrder => "high_order",
        })
    }
}

#[inline]
pub fn perp(a: Vec2) -> Vec2 {
    [-a[1], a[0]]
}

fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Closed-form triangle solution: `r = Psi / (4|T|)`,
/// `r_1 = r (x_2 - x_3)`, `r_2 = r (x_3 - x_1)`, `r_3 = r (x_1 - x_2)`.
pub fn triangle_correction(psi: f64, x: [Vec2; 3]) -> Result<[Vec2; 3]> {
    let e1 = [x[1][0] - x[2][0], x[1][1] - x[2][1]];
    let e2 = [x[2][0] - x[0][0], x[2][1] - x[0][1]];
    // e3 = -(e1 + e2) makes the sum vanish exactly
    let e3 = [-(e1[0] + e2[0]), -(e1[1] + e2[1])];
    let area2 = cross(e1, e2);
    let scale = e1[0].abs().max(e1[1].abs()).max(e2[0].abs()).max(e2[1].abs());
    if !(area2.abs() > 1e-14 * scale * scale) {
        return Err(Error::DegenerateElement {
            element: usize::MAX,
            reason: format!("triangle area {} below floor", 0.5 * area2),
        });
    }
    let r = psi / (2.0 * area2);
    Ok([
        [r * e1[0], r * e1[1]],
        [r * e2[0], r * e2[1]],
        [r * e3[0], r * e3[1]],
    ])
}

/// Tetrahedron solution with `V = det(x_21, x_31, x_41) / 6` and
/// `x_ij = x_i - x_j`:
///
/// ```text
/// r_1 = Psi x (x_32 x x_34) / (12 V)     r_2 = Psi x (x_14 x x_31) / (12 V)
/// r_3 = Psi x (x_21 x x_14) / (12 V)     r_4 = Psi x (x_31 x x_12) / (12 V)
/// ```
pub fn tet_correction(psi: Vec3, x: [Vec3; 4]) -> Result<[Vec3; 4]> {
    let x21 = sub3(x[1], x[0]);
    let x31 = sub3(x[2], x[0]);
    let x41 = sub3(x[3], x[0]);
    let vol6 = dot3(x21, cross3(x31, x41));
    let scale = [x21, x31, x41]
        .iter()
        .flat_map(|v| v.iter())
        .fold(0.0f64, |m, c| m.max(c.abs()));
    if !(vol6.abs() > 1e-14 * scale.powi(3)) {
        return Err(Error::DegenerateElement {
            element: usize::MAX,
            reason: format!("tetrahedron volume {} below floor", vol6 / 6.0),
        });
    }
    let x32 = sub3(x[2], x[1]);
    let x34 = sub3(x[2], x[3]);
    let x14 = sub3(x[0], x[3]);
    let k = 1.0 / (2.0 * vol6);
    let mk = |b: Vec3| {
        let c = cross3(psi, b);
        [k * c[0], k * c[1], k * c[2]]
    };
    let r1 = mk(cross3(x32, x34));
    let r2 = mk(cross3(x14, x31));
    let r3 = mk(cross3(x21, x14));
    // close the sum exactly; the formula gives the same vector analytically
    let r4 = [
        -(r1[0] + r2[0] + r3[0]),
        -(r1[1] + r2[1] + r3[1]),
        -(r1[2] + r2[2] + r3[2]),
    ];
    Ok([r1, r2, r3, r4])
}

/// Mean-centred perpendicular construction
/// `r_sigma = alpha (a_sigma - a_bar)^perp`, `alpha = Psi / sum |a - a_bar|^2`.
pub fn ho_correction(psi: f64, anchors: &[Vec2]) -> Result<Vec<Vec2>> {
    let mut out = vec![[0.0; 2]; anchors.len()];
    ho_correction_into(psi, anchors, &mut out).map_err(|spread| Error::DegenerateElement {
        element: usize::MAX,
        reason: format!("anchor spread {spread} below floor"),
    })?;
    Ok(out)
}

/// Boundary version of [`ho_correction`] restricted to the face DOFs.
pub fn boundary_correction(psi: f64, anchors: &[Vec2]) -> Result<Vec<Vec2>> {
    let mut out = vec![[0.0; 2]; anchors.len()];
    ho_correction_into(psi, anchors, &mut out)
        .map_err(|spread| Error::DegenerateFace(format!("anchor spread {spread} below floor")))?;
    Ok(out)
}

/// Allocation-free kernel; on failure returns the offending spread.
pub(crate) fn ho_correction_into(psi: f64, anchors: &[Vec2], out: &mut [Vec2]) -> Result<(), f64> {
    let n = anchors.len() as f64;
    let mut d: [Vec2; 8] = [[0.0; 2]; 8];
    let d = &mut d[..anchors.len()];
    let mut mean = [0.0; 2];
    let mut amax: f64 = 0.0;
    for a in anchors {
        amax = amax.max(a[0].abs()).max(a[1].abs());
        mean[0] += a[0];
        mean[1] += a[1];
    }
    mean = [mean[0] / n, mean[1] / n];
    for (di, a) in d.iter_mut().zip(anchors) {
        *di = [a[0] - mean[0], a[1] - mean[1]];
    }
    // second centring pass removes the round-off left by the first
    let mut m2 = [0.0; 2];
    for di in d.iter() {
        m2[0] += di[0];
        m2[1] += di[1];
    }
    let mut spread = 0.0;
    for di in d.iter_mut() {
        di[0] -= m2[0] / n;
        di[1] -= m2[1] / n;
        spread += di[0] * di[0] + di[1] * di[1];
    }
    if !(spread > 1e-14 * amax * amax) || spread == 0.0 {
        return Err(spread);
    }
    let alpha = psi / spread;
    for (o, di) in out.iter_mut().zip(d.iter()) {
        let p = perp(*di);
        *o = [alpha * p[0], alpha * p[1]];
    }
    Ok(())
}

/// Defect of one element (or face):
/// `Psi = sum c_sigma ^ dm_sigma + jflux - sum anchor_sigma ^ res_sigma`,
/// where `c_sigma ^ dm_sigma` is the volume term `int_K (J^(l) - J^(0))`,
/// `jflux` the time-integrated angular momentum flux through the boundary
/// and `res_sigma` the momentum block of the element residuals.
pub fn target_psi(c: &[Vec2], dm: &[Vec2], jflux: f64, anchors: &[Vec2], res: &[Vec2]) -> f64 {
    let mut psi = jflux;
    for (ci, di) in c.iter().zip(dm) {
        psi += cross(*ci, *di);
    }
    for (a, r) in anchors.iter().zip(res) {
        psi -= cross(*a, *r);
    }
    psi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wedge_sum(a: &[Vec2], r: &[Vec2]) -> f64 {
        a.iter().zip(r).map(|(a, r)| cross(*a, *r)).sum()
    }

    #[test]
    fn triangle_example() {
        let x = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let r = triangle_correction(2.0, x).unwrap();
        assert_eq!(r, [[1.0, -1.0], [0.0, 1.0], [-1.0, 0.0]]);
        assert!((wedge_sum(&x, &r) - 2.0).abs() < 1e-15);
        assert_eq!(triangle_correction(0.0, x).unwrap(), [[0.0; 2]; 3]);
    }

    #[test]
    fn triangle_scaling() {
        let x = [[0.1, 0.2], [1.3, 0.1], [0.4, 1.1]];
        let r = triangle_correction(0.7, x).unwrap();
        let s = 3.0;
        let xs = x.map(|v| [s * v[0], s * v[1]]);
        let rs = triangle_correction(0.7, xs).unwrap();
        for i in 0..3 {
            for c in 0..2 {
                assert!((rs[i][c] - r[i][c] / s).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn degenerate_triangle() {
        let x = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(matches!(
            triangle_correction(1.0, x),
            Err(Error::DegenerateElement { .. })
        ));
    }

    #[test]
    fn tet_reference() {
        let x = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let psi = [0.0, 0.0, 1.0];
        let r = tet_correction(psi, x).unwrap();
        let mut sum = [0.0; 3];
        let mut w = [0.0; 3];
        for i in 0..4 {
            for c in 0..3 {
                sum[c] += r[i][c];
            }
            let t = cross3(sub3(x[i], x[0]), r[i]);
            for c in 0..3 {
                w[c] += t[c];
            }
        }
        for c in 0..3 {
            assert!(sum[c].abs() < 1e-14);
            assert!((w[c] - psi[c]).abs() < 1e-14);
        }
        assert_eq!(tet_correction([0.0; 3], x).unwrap(), [[0.0; 3]; 4]);
    }

    #[test]
    fn ho_four_points() {
        let y = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        let r = ho_correction(1.5, &y).unwrap();
        let s: Vec2 = r.iter().fold([0.0, 0.0], |a, b| [a[0] + b[0], a[1] + b[1]]);
        assert!(s[0].abs() < 1e-15 && s[1].abs() < 1e-15);
        assert!((wedge_sum(&y, &r) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn boundary_two_dofs() {
        let a = [[0.0, 0.0], [1.0, 0.0]];
        let r = boundary_correction(1.0, &a).unwrap();
        // alpha = 1 / (2 * 1/4) = 2, r_1 = 2 (-1/2, 0)^perp = (0, -1)
        assert_eq!(r, vec![[0.0, -1.0], [0.0, 1.0]]);
        assert!((wedge_sum(&a, &r) - 1.0).abs() < 1e-15);
        assert!(matches!(
            boundary_correction(1.0, &[[1.0, 1.0], [1.0, 1.0]]),
            Err(Error::DegenerateFace(_))
        ));
    }

    #[test]
    fn target_psi_terms() {
        let c = [[1.0, 0.0], [0.0, 2.0]];
        let dm = [[0.0, 1.0], [3.0, 0.0]];
        let a = [[1.0, 1.0], [2.0, -1.0]];
        let res = [[0.5, 0.0], [0.0, 0.25]];
        // 1 - 6 + 0.25 - (-0.5 + 0.5)
        let psi = target_psi(&c, &dm, 0.25, &a, &res);
        assert!((psi - (1.0 - 6.0 + 0.25 - (-0.5 + 0.5))).abs() < 1e-15);
    }
}
