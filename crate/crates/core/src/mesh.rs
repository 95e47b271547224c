//! Conformal 2D meshes, boundary tags, periodic identification and global
//! DOF numbering.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bezier::{element_area, sub, ElementKind, Vec2};
use crate::error::{Error, Result};

/// Interior edge shared by elements `left` and `right`.
///
/// `left_edge`/`right_edge` are local edge numbers (edge `e` joins local
/// vertices `e` and `e + 1`). Periodic edges join two boundary faces
/// identified by a translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorEdge {
    pub left: usize,
    pub left_edge: usize,
    pub right: usize,
    pub right_edge: usize,
    pub periodic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFace {
    pub element: usize,
    pub local_edge: usize,
    pub tag: usize,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub kind: ElementKind,
    pub vertices: Vec<Vec2>,
    /// Counter-clockwise vertex indices per element.
    pub elements: Vec<Vec<usize>>,
    pub interior_edges: Vec<InteriorEdge>,
    pub boundary_faces: Vec<BoundaryFace>,
    pub tags: Vec<String>,
    /// Canonical representative of each vertex after periodic merging.
    pub vertex_canon: Vec<usize>,
}

type EdgeKey = (usize, usize);

fn key(a: usize, b: usize) -> EdgeKey {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Build connectivity from raw elements. Clockwise elements are
    /// reoriented; boundary edges take their tag from `edge_tags` (keyed
    /// by sorted vertex pair) or fall back to `"boundary"`.
    pub fn from_elements(
        kind: ElementKind,
        vertices: Vec<Vec2>,
        mut elements: Vec<Vec<usize>>,
        edge_tags: &HashMap<EdgeKey, String>,
    ) -> Result<Mesh> {
        let nv = kind.n_vertices();
        for (k, elem) in elements.iter_mut().enumerate() {
            if elem.len() != nv {
                return Err(Error::UnsupportedElement(format!(
                    "element {k} has {} vertices in a {kind:?} mesh",
                    elem.len()
                )));
            }
            if let Some(&v) = elem.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::DegenerateMesh(format!(
                    "element {k} references missing vertex {v}"
                )));
            }
            let pts: Vec<Vec2> = elem.iter().map(|&v| vertices[v]).collect();
            let a = element_area(kind, &pts);
            if a < 0.0 {
                elem.reverse();
            }
            let scale = pts
                .iter()
                .map(|p| p[0].abs().max(p[1].abs()))
                .fold(1e-300, f64::max);
            if a.abs() <= 1e-14 * scale * scale {
                return Err(Error::DegenerateMesh(format!(
                    "element {k} has zero area"
                )));
            }
        }

        let mut edges: BTreeMap<EdgeKey, Vec<(usize, usize)>> = BTreeMap::new();
        for (k, elem) in elements.iter().enumerate() {
            for e in 0..nv {
                let a = elem[e];
                let b = elem[(e + 1) % nv];
                edges.entry(key(a, b)).or_default().push((k, e));
            }
        }

        let mut tags: Vec<String> = Vec::new();
        let tag_index = |name: &str, tags: &mut Vec<String>| -> usize {
            if let Some(i) = tags.iter().position(|t| t == name) {
                i
            } else {
                tags.push(name.to_string());
                tags.len() - 1
            }
        };
        let mut interior_edges = Vec::new();
        let mut boundary_faces = Vec::new();
        for (k, owners) in &edges {
            match owners.as_slice() {
                [(el, le)] => {
                    let name = edge_tags.get(k).map(String::as_str).unwrap_or("boundary");
                    let tag = tag_index(name, &mut tags);
                    boundary_faces.push(BoundaryFace {
                        element: *el,
                        local_edge: *le,
                        tag,
                    });
                }
                [(l, le), (r, re)] => {
                    // both elements are counter-clockwise, so they must traverse
                    // the shared edge in opposite directions
                    let la = elements[*l][*le];
                    let ra = elements[*r][*re];
                    if la == ra {
                        return Err(Error::Conformality(format!(
                            "elements {l} and {r} overlap along edge {k:?}"
                        )));
                    }
                    interior_edges.push(InteriorEdge {
                        left: *l,
                        left_edge: *le,
                        right: *r,
                        right_edge: *re,
                        periodic: false,
                    });
                }
                more => {
                    return Err(Error::Conformality(format!(
                        "edge {k:?} shared by {} elements",
                        more.len()
                    )))
                }
            }
        }
        boundary_faces.sort_by_key(|f| (f.element, f.local_edge));
        interior_edges.sort_by_key(|e| (e.left.min(e.right), e.left.max(e.right)));

        let vertex_canon = (0..vertices.len()).collect();
        Ok(Mesh {
            kind,
            vertices,
            elements,
            interior_edges,
            boundary_faces,
            tags,
            vertex_canon,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn tag_id(&self, name: &str) -> Option<usize> {
        self.tags.iter().position(|t| t == name)
    }

    pub fn element_vertices(&self, k: usize) -> Vec<Vec2> {
        self.elements[k].iter().map(|&v| self.vertices[v]).collect()
    }

    /// Endpoints `(a, b)` of local edge `e` of element `k`.
    pub fn edge_vertices(&self, k: usize, e: usize) -> (usize, usize) {
        let elem = &self.elements[k];
        (elem[e], elem[(e + 1) % elem.len()])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_elements())
            .map(|k| element_area(self.kind, &self.element_vertices(k)))
            .sum()
    }

    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for c in 0..2 {
                lo[c] = lo[c].min(v[c]);
                hi[c] = hi[c].max(v[c]);
            }
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt()
    }

    /// Structured `nx` x `ny` grid of quadrilaterals on `[x0, x1] x [y0, y1]`
    /// with boundary tags `bottom`, `right`, `top`, `left`.
    pub fn quad_grid(nx: usize, ny: usize, xr: Vec2, yr: Vec2) -> Result<Mesh> {
        let (vertices, tags) = grid_vertices(nx, ny, xr, yr)?;
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut elements = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                elements.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Mesh::from_elements(ElementKind::Quadrilateral, vertices, elements, &tags)
    }

    /// The quad grid with every cell cut into two triangles along the
    /// diagonal from its lower-left to its upper-right corner.
    pub fn tri_grid(nx: usize, ny: usize, xr: Vec2, yr: Vec2) -> Result<Mesh> {
        let (vertices, tags) = grid_vertices(nx, ny, xr, yr)?;
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut elements = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                elements.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                elements.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Mesh::from_elements(ElementKind::Triangle, vertices, elements, &tags)
    }

    /// Polygonal disc of the given radius made of `rings` concentric rings;
    /// ring `i` carries `6 i` vertices, giving `6 rings^2` triangles.
    /// The outer boundary is tagged `outer`.
    pub fn disc(center: Vec2, radius: f64, rings: usize) -> Result<Mesh> {
        if rings == 0 || radius <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "disc needs rings >= 1 and radius > 0 (got {rings}, {radius})"
            )));
        }
        let mut vertices = vec![center];
        let mut ring_start = vec![0usize];
        for i in 1..=rings {
            ring_start.push(vertices.len());
            let n = 6 * i;
            let r = radius * i as f64 / rings as f64;
            // stagger alternate rings to avoid aligned spokes
            let offset = if i % 2 == 0 { PI / n as f64 } else { 0.0 };
            for j in 0..n {
                let a = offset + 2.0 * PI * j as f64 / n as f64;
                vertices.push([center[0] + r * a.cos(), center[1] + r * a.sin()]);
            }
        }
        let angle = |v: Vec2| {
            let a = (v[1] - center[1]).atan2(v[0] - center[0]);
            if a < 0.0 {
                a + 2.0 * PI
            } else {
                a
            }
        };
        let mut elements = Vec::with_capacity(6 * rings * rings);
        for j in 0..6 {
            elements.push(vec![0, 1 + j, 1 + (j + 1) % 6]);
        }
        for i in 2..=rings {
            let inner: Vec<usize> = (0..6 * (i - 1)).map(|j| ring_start[i - 1] + j).collect();
            let outer: Vec<usize> = (0..6 * i).map(|j| ring_start[i] + j).collect();
            // unwrap angles so that both sequences increase from a common start
            let unwrap = |ids: &[usize]| -> Vec<f64> {
                let base = angle(vertices[ids[0]]);
                ids.iter()
                    .map(|&v| {
                        let mut a = angle(vertices[v]) - base;
                        if a < -1e-12 {
                            a += 2.0 * PI;
                        }
                        a + base
                    })
                    .collect()
            };
            let ai = unwrap(&inner);
            let ao = unwrap(&outer);
            let (ni, no) = (inner.len(), outer.len());
            let (mut a, mut b) = (0usize, 0usize);
            while a < ni || b < no {
                let next_i = if a < ni {
                    ai[(a + 1) % ni] + if a + 1 == ni { 2.0 * PI } else { 0.0 }
                } else {
                    f64::INFINITY
                };
                let next_o = if b < no {
                    ao[(b + 1) % no] + if b + 1 == no { 2.0 * PI } else { 0.0 }
                } else {
                    f64::INFINITY
                };
                if next_o <= next_i {
                    elements.push(vec![inner[a % ni], outer[b % no], outer[(b + 1) % no]]);
                    b += 1;
                } else {
                    elements.push(vec![inner[a % ni], outer[b % no], inner[(a + 1) % ni]]);
                    a += 1;
                }
            }
        }
        let mut tags = HashMap::new();
        let last = ring_start[rings];
        let n = 6 * rings;
        for j in 0..n {
            tags.insert(key(last + j, last + (j + 1) % n), "outer".to_string());
        }
        Mesh::from_elements(ElementKind::Triangle, vertices, elements, &tags)
    }

    /// Read an ASCII gmsh 2.2 file. Line elements carry the boundary tags
    /// (physical names when present, otherwise `physical_<id>`).
    pub fn load_gmsh(path: impl AsRef<Path>) -> Result<Mesh> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_gmsh(&text)
    }

    /// Identify boundary faces tagged `tag_a` with faces tagged `tag_b`
    /// under `x_b = x_a + translation`.
    pub fn make_periodic(&self, tag_a: &str, tag_b: &str, translation: Vec2) -> Result<Mesh> {
        let ta = self
            .tag_id(tag_a)
            .ok_or_else(|| Error::PeriodicityMismatch(format!("no boundary tag {tag_a}")))?;
        let tb = self
            .tag_id(tag_b)
            .ok_or_else(|| Error::PeriodicityMismatch(format!("no boundary tag {tag_b}")))?;
        let tol = 1e-9 * self.diameter();
        let faces_a: Vec<usize> = (0..self.boundary_faces.len())
            .filter(|&i| self.boundary_faces[i].tag == ta)
            .collect();
        let faces_b: Vec<usize> = (0..self.boundary_faces.len())
            .filter(|&i| self.boundary_faces[i].tag == tb)
            .collect();
        if faces_a.len() != faces_b.len() {
            return Err(Error::PeriodicityMismatch(format!(
                "{tag_a} has {} faces, {tag_b} has {}",
                faces_a.len(),
                faces_b.len()
            )));
        }
        let close = |p: Vec2, q: Vec2| (p[0] - q[0]).abs() <= tol && (p[1] - q[1]).abs() <= tol;
        let mut out = self.clone();
        let mut used = vec![false; faces_b.len()];
        let mut removed = vec![false; self.boundary_faces.len()];
        let mut new_edges = Vec::new();
        for &fa in &faces_a {
            let f = self.boundary_faces[fa];
            let (a0, a1) = self.edge_vertices(f.element, f.local_edge);
            let p0 = self.vertices[a0];
            let p1 = self.vertices[a1];
            let t0 = [p0[0] + translation[0], p0[1] + translation[1]];
            let t1 = [p1[0] + translation[0], p1[1] + translation[1]];
            let mut found = None;
            for (j, &fb) in faces_b.iter().enumerate() {
                if used[j] {
                    continue;
                }
                let g = self.boundary_faces[fb];
                let (b0, b1) = self.edge_vertices(g.element, g.local_edge);
                let q0 = self.vertices[b0];
                let q1 = self.vertices[b1];
                // opposite traversal direction on the partner face
                if close(t0, q1) && close(t1, q0) {
                    found = Some((j, b1, b0));
                    break;
                }
            }
            let (j, b0, b1) = found.ok_or_else(|| {
                Error::PeriodicityMismatch(format!(
                    "face {p0:?}-{p1:?} under {tag_a} has no partner under {tag_b}"
                ))
            })?;
            used[j] = true;
            let fb = faces_b[j];
            removed[fa] = true;
            removed[fb] = true;
            union(&mut out.vertex_canon, a0, b0);
            union(&mut out.vertex_canon, a1, b1);
            let g = self.boundary_faces[fb];
            new_edges.push(InteriorEdge {
                left: f.element,
                left_edge: f.local_edge,
                right: g.element,
                right_edge: g.local_edge,
                periodic: true,
            });
        }
        for v in 0..out.vertex_canon.len() {
            let r = find(&mut out.vertex_canon, v);
            out.vertex_canon[v] = r;
        }
        out.boundary_faces = self
            .boundary_faces
            .iter()
            .enumerate()
            .filter(|(i, _)| !removed[*i])
            .map(|(_, f)| *f)
            .collect();
        out.interior_edges.extend(new_edges);
        Ok(out)
    }

    pub fn is_periodic(&self) -> bool {
        self.vertex_canon.iter().enumerate().any(|(i, &c)| i != c)
    }

    /// Move every vertex not on the boundary by an independent uniform
    /// offset in `[-amplitude, amplitude]^2`. Must be applied before
    /// periodic identification.
    pub fn jitter(&self, amplitude: f64, seed: u64) -> Result<Mesh> {
        if self.is_periodic() {
            return Err(Error::InvalidArgument("jitter must precede periodic identification".into()));
        }
        let mut on_boundary = vec![false; self.vertices.len()];
        for f in &self.boundary_faces {
            let (a, b) = self.edge_vertices(f.element, f.local_edge);
            on_boundary[a] = true;
            on_boundary[b] = true;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.clone();
        for (v, fixed) in out.vertices.iter_mut().zip(on_boundary) {
            let d: [f64; 2] = [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)];
            if !fixed {
                v[0] += amplitude * d[0];
                v[1] += amplitude * d[1];
            }
        }
        for k in 0..out.n_elements() {
            let area = element_area(out.kind, &out.element_vertices(k));
            if !(area > 0.0) {
                return Err(Error::DegenerateElement {
                    element: k,
                    reason: format!("jitter amplitude {amplitude} inverts the element"),
                });
            }
        }
        Ok(out)
    }
}

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let ra = find(parent, a);
    let rb = find(parent, b);
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
    }
}

fn grid_vertices(
    nx: usize,
    ny: usize,
    xr: Vec2,
    yr: Vec2,
) -> Result<(Vec<Vec2>, HashMap<EdgeKey, String>)> {
    if nx == 0 || ny == 0 || xr[1] <= xr[0] || yr[1] <= yr[0] {
        return Err(Error::InvalidArgument(format!(
            "grid {nx}x{ny} on {xr:?} x {yr:?}"
        )));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = yr[0] + (yr[1] - yr[0]) * j as f64 / ny as f64;
        for i in 0..=nx {
            let x = xr[0] + (xr[1] - xr[0]) * i as f64 / nx as f64;
            vertices.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut tags = HashMap::new();
    for i in 0..nx {
        tags.insert(key(id(i, 0), id(i + 1, 0)), "bottom".to_string());
        tags.insert(key(id(i, ny), id(i + 1, ny)), "top".to_string());
    }
    for j in 0..ny {
        tags.insert(key(id(0, j), id(0, j + 1)), "left".to_string());
        tags.insert(key(id(nx, j), id(nx, j + 1)), "right".to_string());
    }
    Ok((vertices, tags))
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self, what: &str) -> Result<&'a str> {
        loop {
            match self.inner.next() {
                Some((i, l)) => {
                    self.last = i + 1;
                    let t = l.trim();
                    if !t.is_empty() {
                        return Ok(t);
                    }
                }
                None => {
                    return Err(Error::Format {
                        line: self.last + 1,
                        message: format!("unexpected end of file, expected {what}"),
                    })
                }
            }
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Format {
            line: self.last,
            message: message.into(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(lines: &Lines, tok: Option<&str>, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| lines.err(format!("expected {what}")))
}

/// Parse gmsh 2.2 ASCII text.
pub fn parse_gmsh(text: &str) -> Result<Mesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let mut names: HashMap<i64, String> = HashMap::new();
    let mut node_ids: HashMap<i64, usize> = HashMap::new();
    let mut vertices: Vec<Vec2> = Vec::new();
    let mut cells: Vec<(ElementKind, Vec<i64>)> = Vec::new();
    let mut lines_tagged: Vec<(i64, [i64; 2])> = Vec::new();
    let mut seen_format = false;
    let mut seen_nodes = false;
    let mut seen_elements = false;

    while let Some((i, raw)) = lines.inner.next() {
        lines.last = i + 1;
        let l = raw.trim();
        match l {
            "" => continue,
            "$MeshFormat" => {
                let v = lines.next_line("format version")?;
                let ver = v.split_whitespace().next().unwrap_or("");
                if !ver.starts_with('2') {
                    return Err(lines.err(format!("unsupported gmsh version {ver}")));
                }
                let ftype: i32 = parse_num(&lines, v.split_whitespace().nth(1), "file type")?;
                if ftype != 0 {
                    return Err(lines.err("binary gmsh files are not supported"));
                }
                expect(&mut lines, "$EndMeshFormat")?;
                seen_format = true;
            }
            "$PhysicalNames" => {
                let n: usize = {
                    let l = lines.next_line("physical name count")?;
                    parse_num(&lines, Some(l), "physical name count")?
                };
                for _ in 0..n {
                    let l = lines.next_line("physical name")?;
                    let mut it = l.split_whitespace();
                    let _dim: i32 = parse_num(&lines, it.next(), "dimension")?;
                    let tag: i64 = parse_num(&lines, it.next(), "physical tag")?;
                    let name = l
                        .split_once('"')
                        .and_then(|(_, r)| r.rsplit_once('"'))
                        .map(|(n, _)| n.to_string())
                        .ok_or_else(|| lines.err("expected quoted physical name"))?;
                    names.insert(tag, name);
                }
                expect(&mut lines, "$EndPhysicalNames")?;
            }
            "$Nodes" => {
                let n: usize = {
                    let l = lines.next_line("node count")?;
                    parse_num(&lines, Some(l), "node count")?
                };
                for _ in 0..n {
                    let l = lines.next_line("node")?;
                    let mut it = l.split_whitespace();
                    let id: i64 = parse_num(&lines, it.next(), "node id")?;
                    let x: f64 = parse_num(&lines, it.next(), "x coordinate")?;
                    let y: f64 = parse_num(&lines, it.next(), "y coordinate")?;
                    node_ids.insert(id, vertices.len());
                    vertices.push([x, y]);
                }
                expect(&mut lines, "$EndNodes")?;
                seen_nodes = true;
            }
            "$Elements" => {
                let n: usize = {
                    let l = lines.next_line("element count")?;
                    parse_num(&lines, Some(l), "element count")?
                };
                for _ in 0..n {
                    let l = lines.next_line("element")?;
                    let toks: Vec<&str> = l.split_whitespace().collect();
                    let ety: i32 = parse_num(&lines, toks.get(1).copied(), "element type")?;
                    let ntags: usize = parse_num(&lines, toks.get(2).copied(), "tag count")?;
                    let phys: i64 = if ntags > 0 {
                        parse_num(&lines, toks.get(3).copied(), "physical tag")?
                    } else {
                        0
                    };
                    let nodes: Vec<i64> = toks
                        .iter()
                        .skip(3 + ntags)
                        .map(|t| parse_num(&lines, Some(t), "node id"))
                        .collect::<Result<_>>()?;
                    let want = match ety {
                        1 => 2,
                        2 => 3,
                        3 => 4,
                        15 => 1,
                        other => {
                            return Err(lines.err(format!("unsupported element type {other}")))
                        }
                    };
                    if nodes.len() != want {
                        return Err(lines.err(format!(
                            "element type {ety} needs {want} nodes, got {}",
                            nodes.len()
                        )));
                    }
                    match ety {
                        1 => lines_tagged.push((phys, [nodes[0], nodes[1]])),
                        2 => cells.push((ElementKind::Triangle, nodes)),
                        3 => cells.push((ElementKind::Quadrilateral, nodes)),
                        _ => {}
                    }
                }
                expect(&mut lines, "$EndElements")?;
                seen_elements = true;
            }
            other if other.starts_with("$") => {
                // skip unknown sections
                let end = format!("$End{}", &other[1..]);
                loop {
                    if lines.next_line(&end)? == end {
                        break;
                    }
                }
            }
            other => return Err(lines.err(format!("unexpected content '{other}'"))),
        }
    }
    if !(seen_format && seen_nodes && seen_elements) {
        return Err(Error::Format {
            line: lines.last,
            message: "missing $MeshFormat, $Nodes or $Elements section".into(),
        });
    }
    let kind = match cells.first() {
        Some((k, _)) => *k,
        None => {
            return Err(Error::Format {
                line: lines.last,
                message: "no 2D elements".into(),
            })
        }
    };
    let lookup = |id: i64| {
        node_ids.get(&id).copied().ok_or_else(|| Error::Format {
            line: 0,
            message: format!("element references unknown node {id}"),
        })
    };
    let mut elements = Vec::with_capacity(cells.len());
    for (k, nodes) in &cells {
        if *k != kind {
            return Err(Error::UnsupportedElement(
                "mixed triangle/quadrilateral meshes".into(),
            ));
        }
        elements.push(nodes.iter().map(|&n| lookup(n)).collect::<Result<Vec<_>>>()?);
    }
    let mut edge_tags = HashMap::new();
    for (phys, [a, b]) in lines_tagged {
        let name = names
            .get(&phys)
            .cloned()
            .unwrap_or_else(|| format!("physical_{phys}"));
        edge_tags.insert(key(lookup(a)?, lookup(b)?), name);
    }
    Mesh::from_elements(kind, vertices, elements, &edge_tags)
}

fn expect(lines: &mut Lines, end: &str) -> Result<()> {
    let l = lines.next_line(end)?;
    if l == end {
        Ok(())
    } else {
        Err(lines.err(format!("expected {end}, found '{l}'")))
    }
}

/// Global DOF numbering for a continuous B1/B2 space.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub degree: u32,
    pub n_dofs: usize,
    pub dofs_per_element: usize,
    element_dofs: Vec<usize>,
    /// Canonical physical position `x_sigma` (Greville point) of each DOF.
    pub dof_position: Vec<Vec2>,
    image_shift: Vec<Vec2>,
    /// DOFs touched by more than one image position (periodic DOFs).
    pub periodic_dof: Vec<bool>,
}

impl DofMap {
    pub fn element_dofs(&self, k: usize) -> &[usize] {
        let n = self.dofs_per_element;
        &self.element_dofs[k * n..(k + 1) * n]
    }

    /// Offset between the position of local DOF `s` as seen from element `k`
    /// and the canonical DOF position (non-zero only across periodic seams).
    pub fn image_shift(&self, k: usize, s: usize) -> Vec2 {
        self.image_shift[k * self.dofs_per_element + s]
    }

    /// Position of local DOF `s` in the frame of element `k`.
    pub fn local_position(&self, k: usize, s: usize) -> Vec2 {
        let g = self.element_dofs(k)[s];
        let sh = self.image_shift(k, s);
        [self.dof_position[g][0] + sh[0], self.dof_position[g][1] + sh[1]]
    }
}

/// Number the DOFs of a continuous degree-`degree` space on `mesh`.
pub fn build_dofmap(mesh: &Mesh, degree: u32) -> Result<DofMap> {
    match (mesh.kind, degree) {
        (ElementKind::Triangle, 1 | 2) | (ElementKind::Quadrilateral, 1) => {}
        (kind, d) => {
            return Err(Error::UnsupportedElement(format!(
                "degree {d} on {kind:?} meshes"
            )))
        }
    }
    let nv = mesh.kind.n_vertices();
    let nd = if degree == 1 { nv } else { 6 };
    let canon = &mesh.vertex_canon;

    // vertex DOFs, numbered by canonical vertex index among used vertices
    let mut used = vec![false; mesh.vertices.len()];
    for elem in &mesh.elements {
        for &v in elem {
            used[canon[v]] = true;
        }
    }
    let mut vdof = vec![usize::MAX; mesh.vertices.len()];
    let mut dof_position = Vec::new();
    for v in 0..mesh.vertices.len() {
        if used[v] && canon[v] == v {
            vdof[v] = dof_position.len();
            dof_position.push(mesh.vertices[v]);
        }
    }

    let mut element_dofs = Vec::with_capacity(mesh.n_elements() * nd);
    let mut image_shift = Vec::with_capacity(mesh.n_elements() * nd);
    let mut edof: HashMap<EdgeKey, usize> = HashMap::new();
    for elem in &mesh.elements {
        for &v in elem {
            let c = canon[v];
            element_dofs.push(vdof[c]);
            image_shift.push(sub(mesh.vertices[v], mesh.vertices[c]));
        }
        if degree == 2 {
            // local order 110 (edge 0-1), 101 (edge 0-2), 011 (edge 1-2)
            for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                let (va, vb) = (elem[a], elem[b]);
                let mid = [
                    0.5 * (mesh.vertices[va][0] + mesh.vertices[vb][0]),
                    0.5 * (mesh.vertices[va][1] + mesh.vertices[vb][1]),
                ];
                let k = key(canon[va], canon[vb]);
                let g = *edof.entry(k).or_insert_with(|| {
                    dof_position.push(mid);
                    dof_position.len() - 1
                });
                element_dofs.push(g);
                image_shift.push(sub(mid, dof_position[g]));
            }
        }
    }
    let n_dofs = dof_position.len();
    let mut periodic_dof = vec![false; n_dofs];
    for (g, sh) in element_dofs.iter().zip(&image_shift) {
        if sh[0] != 0.0 || sh[1] != 0.0 {
            periodic_dof[*g] = true;
        }
    }
    Ok(DofMap {
        degree,
        n_dofs,
        dofs_per_element: nd,
        element_dofs,
        dof_position,
        image_shift,
        periodic_dof,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jitter_keeps_boundary_and_area() {
        let m = Mesh::tri_grid(6, 6, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let j = m.jitter(0.05, 7).unwrap();
        assert!((j.total_area() - 1.0).abs() < 1e-13);
        let moved = m.vertices.iter().zip(&j.vertices).filter(|(a, b)| a != b).count();
        assert_eq!(moved, 25);
        assert_eq!(j.vertices, m.jitter(0.05, 7).unwrap().vertices);
        assert!(m.jitter(0.2, 7).is_err());
        let p = j.make_periodic("left", "right", [1.0, 0.0]).unwrap();
        assert!(p.jitter(0.01, 1).is_err());
    }

    fn square2() -> Mesh {
        Mesh::tri_grid(1, 1, [0.0, 1.0], [0.0, 1.0]).unwrap()
    }

    #[test]
    fn two_triangle_square() {
        let m = square2();
        assert_eq!(m.vertices.len(), 4);
        assert_eq!(m.n_elements(), 2);
        assert_eq!(m.interior_edges.len(), 1);
        assert_eq!(m.boundary_faces.len(), 4);
        assert_eq!(build_dofmap(&m, 1).unwrap().n_dofs, 4);
        assert_eq!(build_dofmap(&m, 2).unwrap().n_dofs, 9);
    }

    #[test]
    fn single_triangle_b2() {
        let m = Mesh::from_elements(
            ElementKind::Triangle,
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![vec![0, 1, 2]],
            &HashMap::new(),
        )
        .unwrap();
        assert_eq!(build_dofmap(&m, 2).unwrap().n_dofs, 6);
    }

    #[test]
    fn clockwise_elements_are_reoriented() {
        let m = Mesh::from_elements(
            ElementKind::Triangle,
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![vec![0, 2, 1]],
            &HashMap::new(),
        )
        .unwrap();
        assert!(element_area(m.kind, &m.element_vertices(0)) > 0.0);
    }

    #[test]
    fn quadratic_quads_rejected() {
        let m = Mesh::quad_grid(2, 2, [0.0, 1.0], [0.0, 1.0]).unwrap();
        assert!(matches!(build_dofmap(&m, 2), Err(Error::UnsupportedElement(_))));
    }

    #[test]
    fn periodic_left_right() {
        let m = Mesh::tri_grid(4, 4, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let before = build_dofmap(&m, 2).unwrap().n_dofs;
        let p = m.make_periodic("left", "right", [1.0, 0.0]).unwrap();
        let after = build_dofmap(&p, 2).unwrap().n_dofs;
        // left edge carries 5 vertex DOFs and 4 edge DOFs
        assert_eq!(before - after, 9);
        assert_eq!(p.boundary_faces.len(), 8);
        assert_eq!(p.interior_edges.len(), m.interior_edges.len() + 4);
    }

    #[test]
    fn periodic_mismatch() {
        // 3 cells along x but 2 cells along y: left/right faces do not align
        // when shifted vertically
        let m = Mesh::tri_grid(3, 2, [0.0, 1.0], [0.0, 1.0]).unwrap();
        assert!(matches!(
            m.make_periodic("bottom", "top", [0.0, 0.5]),
            Err(Error::PeriodicityMismatch(_))
        ));
        assert!(matches!(
            m.make_periodic("left", "bottom", [1.0, 0.0]),
            Err(Error::PeriodicityMismatch(_))
        ));
    }

    #[test]
    fn doubly_periodic_corners_merge() {
        let m = Mesh::tri_grid(3, 3, [0.0, 1.0], [0.0, 1.0])
            .unwrap()
            .make_periodic("left", "right", [1.0, 0.0])
            .unwrap()
            .make_periodic("bottom", "top", [0.0, 1.0])
            .unwrap();
        let corners = [0usize, 3, 12, 15];
        let c0 = m.vertex_canon[corners[0]];
        assert!(corners.iter().all(|&c| m.vertex_canon[c] == c0));
        assert!(m.boundary_faces.is_empty());
        let d = build_dofmap(&m, 1).unwrap();
        assert_eq!(d.n_dofs, 9);
    }

    #[test]
    fn disc_mesh_counts() {
        let m = Mesh::disc([0.0, 0.0], 2.0, 5).unwrap();
        assert_eq!(m.n_elements(), 6 * 25);
        assert_eq!(m.boundary_faces.len(), 30);
        assert!(m.boundary_faces.iter().all(|f| m.tags[f.tag] == "outer"));
    }

    const TWO_TRIANGLES: &str = "$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
2
1 1 \"wall\"
1 2 \"inflow\"
$EndPhysicalNames
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
7
1 15 2 0 1 1
2 1 2 1 1 1 2
3 1 2 1 2 2 3
4 1 2 1 3 3 4
5 1 2 2 4 4 1
6 2 2 0 1 1 2 3
7 2 2 0 1 1 3 4
$EndElements
";

    #[test]
    fn gmsh_two_triangles() {
        let m = parse_gmsh(TWO_TRIANGLES).unwrap();
        assert_eq!(m.n_elements(), 2);
        assert_eq!(m.boundary_faces.len(), 4);
        let inflow = m.tag_id("inflow").unwrap();
        assert_eq!(m.boundary_faces.iter().filter(|f| f.tag == inflow).count(), 1);
        assert!((m.total_area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gmsh_errors_carry_line_numbers() {
        let bad_version = TWO_TRIANGLES.replace("2.2 0 8", "4.1 0 8");
        assert!(matches!(parse_gmsh(&bad_version), Err(Error::Format { line: 2, .. })));
        let bad_node = TWO_TRIANGLES.replace("7 2 2 0 1 1 3 4", "7 2 2 0 1 1 3 9");
        assert!(matches!(parse_gmsh(&bad_node), Err(Error::Format { .. })));
        let short = TWO_TRIANGLES.replace("6 2 2 0 1 1 2 3", "6 2 2 0 1 1 2");
        assert!(matches!(parse_gmsh(&short), Err(Error::Format { line: 23, .. })));
        let truncated = &TWO_TRIANGLES[..TWO_TRIANGLES.find("$Elements").unwrap()];
        assert!(parse_gmsh(truncated).is_err());
        let unsupported = TWO_TRIANGLES.replace("6 2 2 0 1 1 2 3", "6 9 2 0 1 1 2 3 1 2 3");
        assert!(matches!(parse_gmsh(&unsupported), Err(Error::Format { .. })));
    }

    #[test]
    fn gmsh_fixture_loads() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/meshes/box10.msh");
        let m = Mesh::load_gmsh(path).unwrap();
        assert_eq!(m.n_elements(), 200);
        assert!((m.total_area() - 4.0).abs() < 1e-12);
        for t in ["bottom", "right", "top", "left"] {
            assert!(m.tag_id(t).is_some(), "{t}");
        }
        assert!(matches!(Mesh::load_gmsh("/nonexistent.msh"), Err(Error::Io { .. })));
    }
}
