//! Bernstein (Bezier) bases on triangles, the bilinear basis on
//! quadrilaterals, and the first moments used by the angular momentum
//! correction.
//!
//! Local DOF ordering is vertices first, then the remaining multi-indices in
//! descending lexicographic order. For quadratic triangles this gives
//! `[200, 020, 002, 110, 101, 011]`.

use crate::error::{Error, Result};
use crate::mesh::{DofMap, Mesh};
use crate::quadrature::{self, Rule2d};

pub type Vec2 = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    Triangle,
    Quadrilateral,
}

impl ElementKind {
    pub fn n_vertices(self) -> usize {
        match self {
            ElementKind::Triangle => 3,
            ElementKind::Quadrilateral => 4,
        }
    }
}

/// Exponents `(k_1, ..., k_{d+1})` labelling a Bernstein polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(components: &[u32]) -> Self {
        MultiIndex(components.to_vec())
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `n! / (k_1! ... k_{d+1}!)`
fn multinomial(mi: &MultiIndex) -> f64 {
    let den: f64 = mi.0.iter().map(|&k| factorial(k)).product();
    factorial(mi.degree()) / den
}

/// Bernstein polynomial `B_mi` at barycentric point `bary`.
pub fn bernstein(mi: &MultiIndex, bary: &[f64]) -> Result<f64> {
    if mi.0.len() != bary.len() {
        return Err(Error::InvalidArgument(format!(
            "multi-index has {} components, barycentric point has {}",
            mi.0.len(),
            bary.len()
        )));
    }
    let mut v = multinomial(mi);
    for (&k, &l) in mi.0.iter().zip(bary) {
        v *= l.powi(k as i32);
    }
    Ok(v)
}

/// Fraction of `|K|` carried by any degree-`n` Bernstein polynomial on a
/// triangle: `2 / ((n + 1)(n + 2))`.
pub fn basis_integral(degree: u32) -> f64 {
    let n = f64::from(degree);
    2.0 / ((n + 1.0) * (n + 2.0))
}

/// Barycentric coordinates `k_i / n` of the Greville point of `mi`.
pub fn greville_point(mi: &MultiIndex) -> Vec<f64> {
    let n = f64::from(mi.degree());
    mi.0.iter().map(|&k| f64::from(k) / n).collect()
}

fn triangle_indices(degree: u32) -> Vec<MultiIndex> {
    let n = degree;
    let mut out = vec![
        MultiIndex(vec![n, 0, 0]),
        MultiIndex(vec![0, n, 0]),
        MultiIndex(vec![0, 0, n]),
    ];
    let mut rest = Vec::new();
    for k1 in (0..=n).rev() {
        for k2 in (0..=(n - k1)).rev() {
            let k3 = n - k1 - k2;
            let mi = MultiIndex(vec![k1, k2, k3]);
            if !out.contains(&mi) {
                rest.push(mi);
            }
        }
    }
    out.extend(rest);
    out
}

/// Reference basis of one (kind, degree) pair together with its tabulated
/// integrals and moment weights.
#[derive(Debug, Clone)]
pub struct BasisTable {
    pub degree: u32,
    pub element_kind: ElementKind,
    pub dof_multiindices: Vec<MultiIndex>,
    /// Barycentric (triangle) or bilinear-vertex (quad) weights of each DOF.
    pub greville: Vec<Vec<f64>>,
    /// `(1/|K|) int_K B_sigma`
    pub basis_integral: Vec<f64>,
    /// Row `sigma` holds the vertex weights with
    /// `(1/|K|) int_K x B_sigma = sum_i w_i x_i` on affine elements.
    pub moment_weights: Vec<Vec<f64>>,
    edge_dofs: Vec<Vec<usize>>,
}

impl BasisTable {
    pub fn new(kind: ElementKind, degree: u32) -> Result<Self> {
        match (kind, degree) {
            (ElementKind::Triangle, 1) | (ElementKind::Triangle, 2) => {
                let dof_multiindices = triangle_indices(degree);
                let greville = dof_multiindices.iter().map(greville_point).collect();
                let nd = dof_multiindices.len();
                let basis_integral = vec![basis_integral(degree); nd];
                let moment_weights = dof_multiindices
                    .iter()
                    .map(triangle_moment_row)
                    .collect();
                // local edge e joins vertices e and e+1
                let edge_dofs = if degree == 1 {
                    vec![vec![0, 1], vec![1, 2], vec![2, 0]]
                } else {
                    vec![vec![0, 1, 3], vec![1, 2, 5], vec![2, 0, 4]]
                };
                Ok(BasisTable {
                    degree,
                    element_kind: kind,
                    dof_multiindices,
                    greville,
                    basis_integral,
                    moment_weights,
                    edge_dofs,
                })
            }
            (ElementKind::Quadrilateral, 1) => {
                let dof_multiindices = vec![
                    MultiIndex(vec![1, 0, 0, 0]),
                    MultiIndex(vec![0, 1, 0, 0]),
                    MultiIndex(vec![0, 0, 1, 0]),
                    MultiIndex(vec![0, 0, 0, 1]),
                ];
                let greville = dof_multiindices
                    .iter()
                    .map(|mi| mi.0.iter().map(|&k| f64::from(k)).collect())
                    .collect();
                let (a, b, c) = (1.0 / 9.0, 1.0 / 18.0, 1.0 / 36.0);
                let moment_weights = vec![
                    vec![a, b, c, b],
                    vec![b, a, b, c],
                    vec![c, b, a, b],
                    vec![b, c, b, a],
                ];
                Ok(BasisTable {
                    degree,
                    element_kind: kind,
                    dof_multiindices,
                    greville,
                    basis_integral: vec![0.25; 4],
                    moment_weights,
                    edge_dofs: vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]],
                })
            }
            _ => Err(Error::UnsupportedElement(format!(
                "{kind:?} of degree {degree}"
            ))),
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_multiindices.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.element_kind.n_vertices()
    }

    pub fn n_edges(&self) -> usize {
        self.element_kind.n_vertices()
    }

    /// Local DOFs lying on local edge `edge`, endpoints first.
    pub fn edge_dofs(&self, edge: usize) -> &[usize] {
        &self.edge_dofs[edge]
    }

    /// Reference coordinates of the point at parameter `s` along local edge
    /// `edge` (from vertex `edge` to vertex `edge + 1`).
    pub fn edge_point(&self, edge: usize, s: f64) -> Vec2 {
        let verts = self.reference_vertices();
        let a = verts[edge];
        let b = verts[(edge + 1) % verts.len()];
        [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
    }

    pub fn reference_vertices(&self) -> &'static [Vec2] {
        match self.element_kind {
            ElementKind::Triangle => &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            ElementKind::Quadrilateral => &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        }
    }

    /// Evaluate `B_mi` at a barycentric point, checking the degree.
    pub fn eval_basis(&self, mi: &MultiIndex, bary: &[f64]) -> Result<f64> {
        if mi.degree() != self.degree || self.element_kind != ElementKind::Triangle {
            return Err(Error::InvalidArgument(format!(
                "multi-index {:?} does not belong to a degree {} {:?} basis",
                mi.0, self.degree, self.element_kind
            )));
        }
        bernstein(mi, bary)
    }

    /// Vertex shape weights at reference coordinates: barycentric
    /// coordinates on triangles, bilinear hat functions on quads.
    pub fn vertex_weights(&self, xi: Vec2) -> [f64; 4] {
        match self.element_kind {
            ElementKind::Triangle => [1.0 - xi[0] - xi[1], xi[0], xi[1], 0.0],
            ElementKind::Quadrilateral => {
                let (x, y) = (xi[0], xi[1]);
                [(1.0 - x) * (1.0 - y), x * (1.0 - y), x * y, (1.0 - x) * y]
            }
        }
    }

    /// Basis values at reference coordinates `xi`.
    pub fn values(&self, xi: Vec2, out: &mut [f64]) {
        match self.element_kind {
            ElementKind::Triangle => {
                let l = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
                if self.degree == 1 {
                    out[..3].copy_from_slice(&l);
                } else {
                    out[0] = l[0] * l[0];
                    out[1] = l[1] * l[1];
                    out[2] = l[2] * l[2];
                    out[3] = 2.0 * l[0] * l[1];
                    out[4] = 2.0 * l[0] * l[2];
                    out[5] = 2.0 * l[1] * l[2];
                }
            }
            ElementKind::Quadrilateral => {
                let w = self.vertex_weights(xi);
                out[..4].copy_from_slice(&w);
            }
        }
    }

    /// Basis derivatives with respect to the reference coordinates.
    pub fn ref_grads(&self, xi: Vec2, out: &mut [Vec2]) {
        match self.element_kind {
            ElementKind::Triangle => {
                // d lambda / d(xi, eta)
                const DL: [Vec2; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
                if self.degree == 1 {
                    out[..3].copy_from_slice(&DL);
                } else {
                    let l = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
                    let sq = |i: usize| [2.0 * l[i] * DL[i][0], 2.0 * l[i] * DL[i][1]];
                    let pr = |i: usize, j: usize| {
                        [
                            2.0 * (DL[i][0] * l[j] + l[i] * DL[j][0]),
                            2.0 * (DL[i][1] * l[j] + l[i] * DL[j][1]),
                        ]
                    };
                    out[0] = sq(0);
                    out[1] = sq(1);
                    out[2] = sq(2);
                    out[3] = pr(0, 1);
                    out[4] = pr(0, 2);
                    out[5] = pr(1, 2);
                }
            }
            ElementKind::Quadrilateral => {
                let (x, y) = (xi[0], xi[1]);
                out[0] = [-(1.0 - y), -(1.0 - x)];
                out[1] = [1.0 - y, -x];
                out[2] = [y, x];
                out[3] = [-y, 1.0 - x];
            }
        }
    }

    /// Volume rule used for nonlinear flux integrands.
    pub fn volume_rule(&self) -> Rule2d {
        match (self.element_kind, self.degree) {
            (ElementKind::Triangle, 1) => quadrature::triangle_rule(4),
            (ElementKind::Triangle, _) => quadrature::triangle_rule(6),
            (ElementKind::Quadrilateral, _) => quadrature::square_rule(3),
        }
    }

    /// Number of Gauss points used along each edge.
    pub fn edge_points(&self) -> usize {
        if self.degree == 1 {
            3
        } else {
            4
        }
    }
}

fn triangle_moment_row(mi: &MultiIndex) -> Vec<f64> {
    // int_K lambda_i B_k = (k_i + 1) / (n + 1) * int_K B_{k + e_i}
    //                    = (k_i + 1) / (n + 1) * 2 / ((n + 2)(n + 3)) |K|
    let n = f64::from(mi.degree());
    mi.0.iter()
        .map(|&k| (f64::from(k) + 1.0) / (n + 1.0) * 2.0 / ((n + 2.0) * (n + 3.0)))
        .collect()
}

/// Physical position of reference point `xi` in an element with the given
/// vertices.
pub fn map_point(table: &BasisTable, vertices: &[Vec2], xi: Vec2) -> Vec2 {
    let w = table.vertex_weights(xi);
    let mut x = [0.0; 2];
    for (v, wi) in vertices.iter().zip(w) {
        x[0] += wi * v[0];
        x[1] += wi * v[1];
    }
    x
}

/// Jacobian `d x / d xi` (columns are the reference directions).
pub fn jacobian(table: &BasisTable, vertices: &[Vec2], xi: Vec2) -> [[f64; 2]; 2] {
    match table.element_kind {
        ElementKind::Triangle => [
            [vertices[1][0] - vertices[0][0], vertices[2][0] - vertices[0][0]],
            [vertices[1][1] - vertices[0][1], vertices[2][1] - vertices[0][1]],
        ],
        ElementKind::Quadrilateral => {
            let (x, y) = (xi[0], xi[1]);
            let dxi = [-(1.0 - y), 1.0 - y, y, -y];
            let deta = [-(1.0 - x), -x, x, 1.0 - x];
            let mut j = [[0.0; 2]; 2];
            for i in 0..4 {
                for c in 0..2 {
                    j[c][0] += dxi[i] * vertices[i][c];
                    j[c][1] += deta[i] * vertices[i][c];
                }
            }
            j
        }
    }
}

/// Element measure `|K|`; triangles use the signed-area formula, quads a
/// 2x2 Gauss rule on the bilinear Jacobian (exact).
pub fn element_area(kind: ElementKind, vertices: &[Vec2]) -> f64 {
    match kind {
        ElementKind::Triangle => 0.5 * cross(sub(vertices[1], vertices[0]), sub(vertices[2], vertices[0])),
        ElementKind::Quadrilateral => {
            // shoelace is exact for straight-sided quads
            let mut a = 0.0;
            for i in 0..4 {
                let p = vertices[i];
                let q = vertices[(i + 1) % 4];
                a += p[0] * q[1] - q[0] * p[1];
            }
            0.5 * a
        }
    }
}

/// `(1/|K|) int_K x B_sigma dx` for local DOF `sigma` of element `vertices`.
///
/// Triangles use the closed-form vertex weights; quadrilaterals integrate
/// with a tensor Gauss rule (the weights of the tabulated Q1 row are only
/// exact for parallelograms).
pub fn moment_vector_z(table: &BasisTable, sigma: usize, vertices: &[Vec2]) -> Result<Vec2> {
    if sigma >= table.n_dofs() || vertices.len() != table.n_vertices() {
        return Err(Error::InvalidArgument(format!(
            "dof {sigma} / {} vertices for a {:?} element",
            vertices.len(),
            table.element_kind
        )));
    }
    match table.element_kind {
        ElementKind::Triangle => {
            let w = &table.moment_weights[sigma];
            let mut z = [0.0; 2];
            for (v, wi) in vertices.iter().zip(w) {
                z[0] += wi * v[0];
                z[1] += wi * v[1];
            }
            Ok(z)
        }
        ElementKind::Quadrilateral => {
            let rule = quadrature::square_rule(3);
            let area = element_area(table.element_kind, vertices);
            let mut phi = [0.0; 4];
            let mut z = [0.0; 2];
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                table.values(*p, &mut phi);
                let j = jacobian(table, vertices, *p);
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                let x = map_point(table, vertices, *p);
                z[0] += w * det * phi[sigma] * x[0];
                z[1] += w * det * phi[sigma] * x[1];
            }
            Ok([z[0] / area, z[1] / area])
        }
    }
}

/// Per-DOF lumped measures `|C_sigma|` and global moment points `y_sigma`.
#[derive(Debug, Clone)]
pub struct LumpedMeasures {
    pub c_sigma: Vec<f64>,
    pub y_sigma: Vec<Vec2>,
}

/// Assemble `|C_sigma| = sum_K int_K B_sigma` and
/// `y_sigma = (1/|C_sigma|) sum_K |K| z_sigma^K`.
///
/// Periodic DOFs see several images of their position; each element's
/// contribution is shifted back to the DOF's canonical position first.
pub fn assemble_lumped(mesh: &Mesh, dofmap: &DofMap) -> Result<LumpedMeasures> {
    let table = BasisTable::new(mesh.kind, dofmap.degree)?;
    let mut c_sigma = vec![0.0; dofmap.n_dofs];
    let mut ysum = vec![[0.0; 2]; dofmap.n_dofs];
    let mut verts = Vec::with_capacity(4);
    for (k, elem) in mesh.elements.iter().enumerate() {
        verts.clear();
        verts.extend(elem.iter().map(|&v| mesh.vertices[v]));
        let area = element_area(mesh.kind, &verts);
        if area <= 0.0 {
            return Err(Error::DegenerateMesh(format!(
                "element {k} has non-positive area {area}"
            )));
        }
        let w = element_lumped_weights(&table, &verts);
        for (s, &g) in dofmap.element_dofs(k).iter().enumerate() {
            let z = moment_vector_z(&table, s, &verts)?;
            let shift = dofmap.image_shift(k, s);
            c_sigma[g] += w[s];
            ysum[g][0] += area * z[0] - w[s] * shift[0];
            ysum[g][1] += area * z[1] - w[s] * shift[1];
        }
    }
    let y_sigma = ysum
        .iter()
        .zip(&c_sigma)
        .map(|(y, c)| [y[0] / c, y[1] / c])
        .collect();
    Ok(LumpedMeasures { c_sigma, y_sigma })
}

/// `int_K B_sigma dx` for every local DOF.
pub fn element_lumped_weights(table: &BasisTable, vertices: &[Vec2]) -> Vec<f64> {
    let area = element_area(table.element_kind, vertices);
    match table.element_kind {
        ElementKind::Triangle => table.basis_integral.iter().map(|b| b * area).collect(),
        ElementKind::Quadrilateral => {
            let rule = quadrature::square_rule(3);
            let mut phi = [0.0; 4];
            let mut w = vec![0.0; 4];
            for (p, wq) in rule.points.iter().zip(&rule.weights) {
                table.values(*p, &mut phi);
                let j = jacobian(table, vertices, *p);
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                for s in 0..4 {
                    w[s] += wq * det * phi[s];
                }
            }
            w
        }
    }
}

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

/// 2D wedge product `a ^ b = a_x b_y - a_y b_x`.
#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRI: [Vec2; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    #[test]
    fn bernstein_values() {
        assert_eq!(bernstein(&MultiIndex::new(&[2, 0, 0]), &[1.0, 0.0, 0.0]).unwrap(), 1.0);
        let b110 = bernstein(&MultiIndex::new(&[1, 1, 0]), &[0.5, 0.5, 0.0]).unwrap();
        assert!((b110 - 0.5).abs() < 1e-15);
        let t = 1.0 / 3.0;
        let b111 = bernstein(&MultiIndex::new(&[1, 1, 1]), &[t, t, t]).unwrap();
        assert!((b111 - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn eval_basis_rejects_degree_mismatch() {
        let table = BasisTable::new(ElementKind::Triangle, 2).unwrap();
        let err = table.eval_basis(&MultiIndex::new(&[1, 0, 0]), &[1.0, 0.0, 0.0]);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn integrals_and_greville() {
        assert!((basis_integral(1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((basis_integral(2) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(basis_integral(0), 1.0);
        assert_eq!(greville_point(&MultiIndex::new(&[1, 0, 0])), vec![1.0, 0.0, 0.0]);
        assert_eq!(greville_point(&MultiIndex::new(&[1, 1, 0])), vec![0.5, 0.5, 0.0]);
        assert_eq!(greville_point(&MultiIndex::new(&[0, 0, 2])), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn dof_ordering_is_vertices_first() {
        let t = BasisTable::new(ElementKind::Triangle, 2).unwrap();
        let got: Vec<Vec<u32>> = t.dof_multiindices.iter().map(|m| m.0.clone()).collect();
        assert_eq!(
            got,
            vec![
                vec![2, 0, 0],
                vec![0, 2, 0],
                vec![0, 0, 2],
                vec![1, 1, 0],
                vec![1, 0, 1],
                vec![0, 1, 1]
            ]
        );
    }

    #[test]
    fn tabulated_moment_rows() {
        let p1 = BasisTable::new(ElementKind::Triangle, 1).unwrap();
        assert_eq!(p1.moment_weights[0], vec![1.0 / 6.0, 1.0 / 12.0, 1.0 / 12.0]);
        let p2 = BasisTable::new(ElementKind::Triangle, 2).unwrap();
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15);
        assert!(close(&p2.moment_weights[0], &[0.1, 1.0 / 30.0, 1.0 / 30.0]));
        assert!(close(&p2.moment_weights[3], &[1.0 / 15.0, 1.0 / 15.0, 1.0 / 30.0]));
        // each row sums to the basis integral
        for t in [&p1, &p2] {
            for (row, b) in t.moment_weights.iter().zip(&t.basis_integral) {
                assert!((row.iter().sum::<f64>() - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn moment_vector_examples() {
        let p1 = BasisTable::new(ElementKind::Triangle, 1).unwrap();
        let z = moment_vector_z(&p1, 0, &TRI).unwrap();
        assert!((z[0] - 1.0 / 12.0).abs() < 1e-15 && (z[1] - 1.0 / 12.0).abs() < 1e-15);
        let p2 = BasisTable::new(ElementKind::Triangle, 2).unwrap();
        let z = moment_vector_z(&p2, 3, &TRI).unwrap();
        assert!((z[0] - 1.0 / 15.0).abs() < 1e-15 && (z[1] - 1.0 / 30.0).abs() < 1e-15);
        let q1 = BasisTable::new(ElementKind::Quadrilateral, 1).unwrap();
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let z = moment_vector_z(&q1, 0, &sq).unwrap();
        assert!((z[0] - 1.0 / 12.0).abs() < 1e-15 && (z[1] - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn q1_quadrature_matches_table_on_parallelograms() {
        let q1 = BasisTable::new(ElementKind::Quadrilateral, 1).unwrap();
        let v = [[0.3, -0.2], [2.1, 0.4], [2.6, 1.9], [0.8, 1.3]];
        for s in 0..4 {
            let z = moment_vector_z(&q1, s, &v).unwrap();
            let mut t = [0.0; 2];
            for i in 0..4 {
                t[0] += q1.moment_weights[s][i] * v[i][0];
                t[1] += q1.moment_weights[s][i] * v[i][1];
            }
            assert!((z[0] - t[0]).abs() < 1e-13 && (z[1] - t[1]).abs() < 1e-13);
        }
    }

    #[test]
    fn unsupported_pairs() {
        assert!(matches!(
            BasisTable::new(ElementKind::Quadrilateral, 2),
            Err(Error::UnsupportedElement(_))
        ));
        assert!(BasisTable::new(ElementKind::Triangle, 3).is_err());
    }

    #[test]
    fn analytic_values_agree_with_bernstein() {
        let p2 = BasisTable::new(ElementKind::Triangle, 2).unwrap();
        let xi = [0.21, 0.37];
        let bary = [1.0 - 0.21 - 0.37, 0.21, 0.37];
        let mut v = [0.0; 6];
        p2.values(xi, &mut v);
        for (s, mi) in p2.dof_multiindices.iter().enumerate() {
            assert!((v[s] - bernstein(mi, &bary).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        for (kind, deg) in [
            (ElementKind::Triangle, 1),
            (ElementKind::Triangle, 2),
            (ElementKind::Quadrilateral, 1),
        ] {
            let t = BasisTable::new(kind, deg).unwrap();
            let n = t.n_dofs();
            let xi = [0.23, 0.31];
            let h = 1e-6;
            let mut g = vec![[0.0; 2]; n];
            t.ref_grads(xi, &mut g);
            let mut vp = vec![0.0; n];
            let mut vm = vec![0.0; n];
            for d in 0..2 {
                let mut p = xi;
                let mut m = xi;
                p[d] += h;
                m[d] -= h;
                t.values(p, &mut vp);
                t.values(m, &mut vm);
                for s in 0..n {
                    let fd = (vp[s] - vm[s]) / (2.0 * h);
                    assert!((fd - g[s][d]).abs() < 1e-8);
                }
            }
        }
    }
}
