//! Randomized property checks of the correction kernels, shared by the
//! `kernels-selftest` command and the test suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bezier::{cross, Vec2};
use crate::correction::{self, Vec3};

pub const SUM_TOL: f64 = 1e-14;
pub const WEDGE_TOL: f64 = 1e-12;
pub const TRANSLATION_TOL: f64 = 1e-11;

/// Worst errors of one kernel over all samples, already scaled.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelReport {
    pub kernel: &'static str,
    pub samples: usize,
    /// `|sum r| / sum |r|`.
    pub sum_error: f64,
    /// `|sum x ^ r - Psi| / max(|Psi|, sum |x ^ r|)`.
    pub wedge_error: f64,
    pub tolerance: (f64, f64),
}

impl KernelReport {
    pub fn passed(&self) -> bool {
        self.sum_error <= self.tolerance.0 && self.wedge_error <= self.tolerance.1
    }
}

impl std::fmt::Display for KernelReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:<22} samples={} sum_err={:.2e} (tol {:.0e}) wedge_err={:.2e} (tol {:.0e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.kernel,
            self.samples,
            self.sum_error,
            self.tolerance.0,
            self.wedge_error,
            self.tolerance.1
        )
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Random well-shaped polygon-ish point cloud: `n` points around a random
/// centre with a random size, rejecting near-collinear triangles.
fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec2> {
    loop {
        let c = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
        let h = 10f64.powf(rng.gen_range(-2.0..1.0));
        let p: Vec<Vec2> = (0..n)
            .map(|_| [c[0] + h * rng.gen_range(-1.0..1.0), c[1] + h * rng.gen_range(-1.0..1.0)])
            .collect();
        let ok = n != 3 || {
            let a = cross([p[1][0] - p[0][0], p[1][1] - p[0][1]], [p[2][0] - p[0][0], p[2][1] - p[0][1]]);
            a.abs() > 0.05 * h * h
        };
        if ok {
            return p;
        }
    }
}

fn report_2d(kernel: &'static str, cases: impl Iterator<Item = (f64, Vec<Vec2>, Vec<Vec2>)>) -> KernelReport {
    let mut rep = KernelReport {
        kernel,
        samples: 0,
        sum_error: 0.0,
        wedge_error: 0.0,
        tolerance: (SUM_TOL, WEDGE_TOL),
    };
    for (psi, x, r) in cases {
        rep.samples += 1;
        let mut s = [0.0; 2];
        let mut mag = 0.0;
        let mut w = 0.0;
        let mut wmag = 0.0;
        for (xi, ri) in x.iter().zip(&r) {
            s[0] += ri[0];
            s[1] += ri[1];
            mag += norm(ri);
            let c = cross(*xi, *ri);
            w += c;
            wmag += c.abs();
        }
        rep.sum_error = rep.sum_error.max(norm(&s) / mag.max(f64::MIN_POSITIVE));
        rep.wedge_error = rep.wedge_error.max((w - psi).abs() / psi.abs().max(wmag));
    }
    rep
}

pub fn triangle_suite(samples: usize, seed: u64) -> KernelReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases = (0..samples).map(move |_| {
        let x = random_points(&mut rng, 3);
        let psi = rng.gen_range(-1.0..1.0);
        let r = correction::triangle_correction(psi, [x[0], x[1], x[2]]).expect("well-shaped triangle");
        (psi, x, r.to_vec())
    });
    report_2d("triangle_correction", cases)
}

pub fn ho_suite(samples: usize, seed: u64) -> KernelReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases = (0..samples).map(move |_| {
        let n = [3, 4, 6][rng.gen_range(0..3)];
        let x = random_points(&mut rng, n);
        let psi = rng.gen_range(-1.0..1.0);
        let r = correction::ho_correction(psi, &x).expect("spread anchors");
        (psi, x, r)
    });
    report_2d("ho_correction", cases)
}

pub fn boundary_suite(samples: usize, seed: u64) -> KernelReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases = (0..samples).map(move |_| {
        // two or three anchors along a segment, as on a face
        let ends = random_points(&mut rng, 2);
        let n = rng.gen_range(2..=3);
        let x: Vec<Vec2> = (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                [ends[0][0] + s * (ends[1][0] - ends[0][0]), ends[0][1] + s * (ends[1][1] - ends[0][1])]
            })
            .collect();
        let psi = rng.gen_range(-1.0..1.0);
        let r = correction::boundary_correction(psi, &x).expect("distinct face anchors");
        (psi, x, r)
    });
    report_2d("boundary_correction", cases)
}

pub fn tet_suite(samples: usize, seed: u64) -> KernelReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = KernelReport {
        kernel: "tet_correction",
        samples: 0,
        sum_error: 0.0,
        wedge_error: 0.0,
        tolerance: (SUM_TOL, WEDGE_TOL),
    };
    let cross3 = |a: Vec3, b: Vec3| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    while rep.samples < samples {
        let c: Vec3 = std::array::from_fn(|_| rng.gen_range(-10.0..10.0));
        let h = 10f64.powf(rng.gen_range(-2.0..1.0));
        let x: [Vec3; 4] = std::array::from_fn(|_| std::array::from_fn(|i| c[i] + h * rng.gen_range(-1.0..1.0)));
        let d = |a: Vec3, b: Vec3| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
        let t = cross3(d(x[2], x[0]), d(x[3], x[0]));
        let vol6 = (0..3).map(|i| d(x[1], x[0])[i] * t[i]).sum::<f64>();
        if vol6.abs() < 0.05 * h.powi(3) {
            continue;
        }
        let psi: Vec3 = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let r = correction::tet_correction(psi, x).expect("well-shaped tetrahedron");
        rep.samples += 1;
        let mut s = [0.0; 3];
        let mut w = [0.0; 3];
        let mut mag = 0.0;
        let mut wmag = 0.0;
        for (xi, ri) in x.iter().zip(&r) {
            let c = cross3(*xi, *ri);
            for i in 0..3 {
                s[i] += ri[i];
                w[i] += c[i];
            }
            mag += norm(ri);
            wmag += norm(&c);
        }
        let err = norm(&d(w, psi));
        rep.sum_error = rep.sum_error.max(norm(&s) / mag);
        rep.wedge_error = rep.wedge_error.max(err / norm(&psi).max(wmag));
    }
    rep
}

/// Correction vectors computed in two frames related by a random
/// translation, with momentum residuals that satisfy the element momentum
/// balance `sum_sigma R_sigma = sum_sigma w_sigma dm_sigma + F`. Returns
/// the worst relative difference for the triangle and high-order kernels.
pub fn translation_suite(samples: usize, seed: u64) -> [f64; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 2];
    for _ in 0..samples {
        let n = [3, 6][rng.gen_range(0..2)];
        let x = random_points(&mut rng, n);
        let a = [rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0)];
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let c: Vec<Vec2> = x.iter().zip(&w).map(|(xi, wi)| [wi * xi[0], wi * xi[1]]).collect();
        let dm: Vec<Vec2> = (0..n).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let flux = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let jflux = rng.gen_range(-1.0..1.0);
        let mut res: Vec<Vec2> = (0..n).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        // enforce the momentum balance on the last residual
        let mut target = flux;
        for (wi, d) in w.iter().zip(&dm) {
            target[0] += wi * d[0];
            target[1] += wi * d[1];
        }
        let partial = res[..n - 1].iter().fold([0.0, 0.0], |s, r| [s[0] + r[0], s[1] + r[1]]);
        res[n - 1] = [target[0] - partial[0], target[1] - partial[1]];

        let shift = |v: &[Vec2], by: &[f64]| -> Vec<Vec2> { v.iter().zip(by).map(|(p, s)| [p[0] + s * a[0], p[1] + s * a[1]]).collect() };
        let ones = vec![1.0; n];
        let x2 = shift(&x, &ones);
        let c2 = shift(&c, &w);
        let jflux2 = jflux + cross(a, flux);
        let psi1 = correction::target_psi(&c, &dm, jflux, &x, &res);
        let psi2 = correction::target_psi(&c2, &dm, jflux2, &x2, &res);
        let rel = |r1: &[Vec2], r2: &[Vec2]| {
            let scale = r1.iter().map(|v| norm(v)).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            r1.iter().zip(r2).map(|(p, q)| norm(&[p[0] - q[0], p[1] - q[1]])).fold(0.0, f64::max) / scale
        };
        if n == 3 {
            let r1 = correction::triangle_correction(psi1, [x[0], x[1], x[2]]).expect("triangle");
            let r2 = correction::triangle_correction(psi2, [x2[0], x2[1], x2[2]]).expect("triangle");
            worst[0] = worst[0].max(rel(&r1, &r2));
        }
        let r1 = correction::ho_correction(psi1, &x).expect("anchors");
        let r2 = correction::ho_correction(psi2, &x2).expect("anchors");
        worst[1] = worst[1].max(rel(&r1, &r2));
    }
    worst
}

/// All four kernel suites with `samples` samples each.
pub fn run_all(samples: usize, seed: u64) -> Vec<KernelReport> {
    vec![
        triangle_suite(samples, seed),
        tet_suite(samples, seed.wrapping_add(1)),
        ho_suite(samples, seed.wrapping_add(2)),
        boundary_suite(samples, seed.wrapping_add(3)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        for rep in run_all(50, 3) {
            assert!(rep.passed(), "{rep}");
            assert_eq!(rep.samples, 50);
        }
        let t = translation_suite(50, 4);
        assert!(t[0] <= TRANSLATION_TOL && t[1] <= TRANSLATION_TOL, "{t:?}");
    }

    #[test]
    fn report_flags_failures() {
        let mut rep = triangle_suite(5, 1);
        rep.wedge_error = 1.0;
        assert!(!rep.passed());
        assert!(rep.to_string().starts_with("FAIL"));
    }
}
