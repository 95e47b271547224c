//! Quadrature rules on the reference segment, triangle and square.
//!
//! Reference triangle is `{(xi, eta) : xi, eta >= 0, xi + eta <= 1}` with
//! barycentric coordinates `(1 - xi - eta, xi, eta)`. Reference square is
//! `[0, 1]^2`. Weights are normalised so that they sum to one: multiply by
//! the element measure to integrate.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct Rule2d {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule1d {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl Rule2d {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Legendre rule with `n` points mapped to `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Rule1d {
    assert!(n >= 1, "gauss_legendre needs at least one point");
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = ((i as f64 + 0.75) / (nf + 0.5) * PI).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1], ascending order
        points[i] = 0.5 * (1.0 - x);
        points[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    Rule1d { points, weights }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Symmetric triangle rule exact for polynomials of total degree `degree`.
///
/// Degrees up to 4 use the 6-point rule, 5 and 6 the 12-point rule; higher
/// degrees fall back to a collapsed Gauss product rule.
pub fn triangle_rule(degree: usize) -> Rule2d {
    match degree {
        0..=4 => dunavant_6(),
        5 | 6 => dunavant_12(),
        d => collapsed_triangle(d / 2 + 1),
    }
}

fn push_orbit3(rule: &mut Rule2d, a: f64, b: f64, w: f64) {
    // barycentric (a, b, b) and its rotations
    for bary in [[a, b, b], [b, a, b], [b, b, a]] {
        rule.points.push([bary[1], bary[2]]);
        rule.weights.push(w);
    }
}

fn push_orbit6(rule: &mut Rule2d, a: f64, b: f64, c: f64, w: f64) {
    for bary in [
        [a, b, c],
        [a, c, b],
        [b, a, c],
        [b, c, a],
        [c, a, b],
        [c, b, a],
    ] {
        rule.points.push([bary[1], bary[2]]);
        rule.weights.push(w);
    }
}

fn dunavant_6() -> Rule2d {
    let mut rule = Rule2d {
        points: Vec::with_capacity(6),
        weights: Vec::with_capacity(6),
    };
    push_orbit3(
        &mut rule,
        0.108_103_018_168_070,
        0.445_948_490_915_965,
        0.223_381_589_678_011,
    );
    push_orbit3(
        &mut rule,
        0.816_847_572_980_459,
        0.091_576_213_509_771,
        0.109_951_743_655_322,
    );
    normalise(rule)
}

fn dunavant_12() -> Rule2d {
    let mut rule = Rule2d {
        points: Vec::with_capacity(12),
        weights: Vec::with_capacity(12),
    };
    push_orbit3(
        &mut rule,
        0.501_426_509_658_179,
        0.249_286_745_170_910,
        0.116_786_275_726_379,
    );
    push_orbit3(
        &mut rule,
        0.873_821_971_016_996,
        0.063_089_014_491_502,
        0.050_844_906_370_207,
    );
    push_orbit6(
        &mut rule,
        0.053_145_049_844_817,
        0.310_352_451_033_784,
        0.636_502_499_121_399,
        0.082_851_075_618_374,
    );
    normalise(rule)
}

// Tabulated weights carry 15 digits; rescale so they sum to one exactly
// in floating point, which keeps constant-state residuals at round-off.
fn normalise(mut rule: Rule2d) -> Rule2d {
    let s: f64 = rule.weights.iter().sum();
    for w in &mut rule.weights {
        *w /= s;
    }
    rule
}

/// Collapsed (Duffy) Gauss product rule on the reference triangle with
/// `n` points per direction; exact for total degree `2n - 2`.
pub fn collapsed_triangle(n: usize) -> Rule2d {
    let g = gauss_legendre(n);
    // Gauss-Jacobi would be optimal in the collapsed direction; plain
    // Gauss with one extra point covers the Jacobian factor.
    let g2 = gauss_legendre(n + 1);
    let mut points = Vec::with_capacity(n * (n + 1));
    let mut weights = Vec::with_capacity(n * (n + 1));
    for (&s, &ws) in g2.points.iter().zip(&g2.weights) {
        for (&t, &wt) in g.points.iter().zip(&g.weights) {
            let xi = s;
            let eta = (1.0 - s) * t;
            points.push([xi, eta]);
            // reference area is 1/2; normalise to weights summing to one
            weights.push(2.0 * ws * wt * (1.0 - s));
        }
    }
    Rule2d { points, weights }
}

/// Tensor Gauss rule on the unit square with `n` points per direction.
pub fn square_rule(n: usize) -> Rule2d {
    let g = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (&y, &wy) in g.points.iter().zip(&g.weights) {
        for (&x, &wx) in g.points.iter().zip(&g.weights) {
            points.push([x, y]);
            weights.push(wx * wy);
        }
    }
    Rule2d { points, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomial_triangle(a: u32, b: u32) -> f64 {
        // int_T xi^a eta^b = a! b! / (a + b + 2)!, normalised by area 1/2
        let f = |n: u32| (1..=n).map(f64::from).product::<f64>();
        2.0 * f(a) * f(b) / f(a + b + 2)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..8 {
            let g = gauss_legendre(n);
            for p in 0..(2 * n) as i32 {
                let q: f64 = g
                    .points
                    .iter()
                    .zip(&g.weights)
                    .map(|(x, w)| w * x.powi(p))
                    .sum();
                assert!((q - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn triangle_rules_reach_their_degree() {
        for (deg, rule) in [(4, triangle_rule(4)), (6, triangle_rule(6)), (10, triangle_rule(10))] {
            for a in 0..=deg {
                for b in 0..=(deg - a) {
                    let q: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| w * p[0].powi(a) * p[1].powi(b))
                        .sum();
                    let exact = monomial_triangle(a as u32, b as u32);
                    assert!((q - exact).abs() < 1e-13, "deg={deg} a={a} b={b}: {q} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn weights_sum_to_one() {
        for r in [triangle_rule(4), triangle_rule(6), square_rule(3)] {
            let s: f64 = r.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-15);
        }
    }
}
