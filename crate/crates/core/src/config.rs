//! TOML run configuration.
//!
//! ```toml
//! [case]
//! name = "isentropic_vortex"   # four_vortex | gresho | sod
//! beta = 5.0
//!
//! [mesh]
//! generator = "tri_grid"       # quad_grid | disc, or `file = "mesh.msh"`
//! cells = [32, 32]
//! x_range = [-10.0, 10.0]
//! y_range = [-10.0, 10.0]
//! periodic = true
//! degree = 1
//!
//! [scheme]
//! name = "galerkin_cip"        # supg | rusanov | psi_cip
//! correction = "high_order"    # off | second_order
//!
//! [time]
//! final_time = 1.0
//! cfl = 0.5
//!
//! [output]
//! dir = "out/vortex"
//! snapshots = 10
//!
//! [boundary]                   # optional per-tag override
//! outer = "wall"               # gradient_free | far_field
//! ```

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bezier::Vec2;
use crate::cases::{Case, VortexParams};
use crate::correction::CorrectionMode;
use crate::error::{Error, Result};
use crate::euler::{BoundaryKind, GasModel};
use crate::mesh::Mesh;
use crate::residual::{Scheme, SchemeConfig};

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: CaseConfig,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub boundary: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub name: String,
    pub beta: Option<f64>,
    pub center: Option<Vec2>,
    pub free_stream: Option<Vec2>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_gamma() -> f64 {
    1.4
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub file: Option<PathBuf>,
    pub generator: Option<String>,
    /// Cells per direction for grids.
    pub cells: Option<[usize; 2]>,
    pub x_range: Option<Vec2>,
    pub y_range: Option<Vec2>,
    /// Disc generator.
    pub rings: Option<usize>,
    pub radius: Option<f64>,
    pub center: Option<Vec2>,
    #[serde(default)]
    pub periodic: bool,
    /// Interior vertex perturbation as a fraction of the grid spacing.
    #[serde(default)]
    pub jitter: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_degree")]
    pub degree: u32,
}

fn default_degree() -> u32 {
    1
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    #[serde(default = "default_scheme")]
    pub name: String,
    #[serde(default = "default_correction")]
    pub correction: String,
    pub theta_cip: Option<f64>,
    pub tau_supg: Option<f64>,
}

fn default_scheme() -> String {
    "galerkin_cip".into()
}

fn default_correction() -> String {
    "off".into()
}

impl Default for SchemeSection {
    fn default() -> Self {
        SchemeSection {
            name: default_scheme(),
            correction: default_correction(),
            theta_cip: None,
            tau_supg: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub final_time: Option<f64>,
    pub cfl: Option<f64>,
    pub dt_max: Option<f64>,
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Snapshots per run, evenly spaced in time; 0 disables them.
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
    /// Worker threads for the assembly passes (default: rayon's choice).
    pub threads: Option<usize>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("output")
}

fn default_snapshots() -> usize {
    10
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_dir(),
            snapshots: default_snapshots(),
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Read a config file; a relative mesh file path is resolved against
    /// the config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(f), Some(dir)) = (&cfg.mesh.file, path.parent()) {
            if f.is_relative() {
                cfg.mesh.file = Some(dir.join(f));
            }
        }
        Ok(cfg)
    }

    pub fn gas(&self) -> Result<GasModel> {
        GasModel::new(self.case.gamma)
    }

    pub fn scheme_config(&self) -> Result<SchemeConfig> {
        let mut c = SchemeConfig::new(self.scheme.name.parse::<Scheme>()?);
        if let Some(t) = self.scheme.theta_cip {
            c.theta_cip = t;
        }
        if let Some(t) = self.scheme.tau_supg {
            c.tau_supg = t;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn correction(&self) -> Result<CorrectionMode> {
        self.scheme.correction.parse()
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        let m = &self.mesh;
        if !(0.0..0.5).contains(&m.jitter) {
            return Err(Error::Config(format!("mesh.jitter must lie in [0, 0.5), got {}", m.jitter)));
        }
        let mesh = match (&m.file, m.generator.as_deref()) {
            (Some(_), Some(_)) => return Err(Error::Config("mesh: give either `file` or `generator`".into())),
            (Some(f), None) => {
                if m.jitter > 0.0 || m.periodic {
                    return Err(Error::Config("mesh: jitter/periodic apply to generated grids only".into()));
                }
                return Mesh::load_gmsh(f);
            }
            (None, None) => return Err(Error::Config("mesh: missing `file` or `generator`".into())),
            (None, Some(g @ ("tri_grid" | "quad_grid"))) => {
                let [nx, ny] = m.cells.ok_or_else(|| Error::Config("mesh.cells is required for grids".into()))?;
                let xr = m.x_range.ok_or_else(|| Error::Config("mesh.x_range is required for grids".into()))?;
                let yr = m.y_range.ok_or_else(|| Error::Config("mesh.y_range is required for grids".into()))?;
                if nx == 0 || ny == 0 || !(xr[1] > xr[0]) || !(yr[1] > yr[0]) {
                    return Err(Error::Config("mesh: empty grid".into()));
                }
                let mut mesh = if g == "tri_grid" {
                    Mesh::tri_grid(nx, ny, xr, yr)?
                } else {
                    Mesh::quad_grid(nx, ny, xr, yr)?
                };
                if m.jitter > 0.0 {
                    let h = ((xr[1] - xr[0]) / nx as f64).min((yr[1] - yr[0]) / ny as f64);
                    mesh = mesh.jitter(m.jitter * h, m.seed)?;
                }
                if m.periodic {
                    mesh = mesh
                        .make_periodic("left", "right", [xr[1] - xr[0], 0.0])?
                        .make_periodic("bottom", "top", [0.0, yr[1] - yr[0]])?;
                }
                mesh
            }
            (None, Some("disc")) => {
                if m.periodic {
                    return Err(Error::Config("mesh: a disc cannot be periodic".into()));
                }
                let rings = m.rings.ok_or_else(|| Error::Config("mesh.rings is required for disc".into()))?;
                let mesh = Mesh::disc(m.center.unwrap_or([0.0, 0.0]), m.radius.unwrap_or(1.0), rings)?;
                if m.jitter > 0.0 {
                    let h = m.radius.unwrap_or(1.0) / rings as f64;
                    mesh.jitter(m.jitter * h, m.seed)?
                } else {
                    mesh
                }
            }
            (None, Some(other)) => return Err(Error::Config(format!("unknown mesh generator '{other}'"))),
        };
        Ok(mesh)
    }

    /// The benchmark with parameters from the config; the periodic box of
    /// the vortex is taken from the mesh.
    pub fn build_case(&self, mesh: &Mesh) -> Result<Case> {
        let c = &self.case;
        let case = match c.name.as_str() {
            "isentropic_vortex" | "vortex" => {
                let params = VortexParams {
                    beta: c.beta.unwrap_or(5.0),
                    center: c.center.unwrap_or([0.0, 0.0]),
                    free_stream: c.free_stream.unwrap_or([1.0, 0.0]),
                    gamma: c.gamma,
                };
                params.validate()?;
                let period = mesh.is_periodic().then(|| {
                    let (lo, hi) = mesh.bounding_box();
                    (lo, [hi[0] - lo[0], hi[1] - lo[1]])
                });
                Case::IsentropicVortex { params, period }
            }
            "four_vortex" => {
                let beta = c.beta.unwrap_or(5.0);
                VortexParams {
                    beta,
                    gamma: c.gamma,
                    ..VortexParams::default()
                }
                .validate()?;
                Case::FourVortex { beta, gamma: c.gamma }
            }
            "gresho" => Case::Gresho {
                center: c.center.unwrap_or([0.0, 0.0]),
            },
            "sod" => Case::Sod,
            other => return Err(Error::Config(format!("unknown case '{other}'"))),
        };
        Ok(case)
    }

    /// Boundary condition per tag: the `[boundary]` table, then the case
    /// default.
    pub fn boundary_conditions(&self, mesh: &Mesh, case: &Case) -> Result<HashMap<String, BoundaryKind>> {
        for tag in self.boundary.keys() {
            if mesh.tag_id(tag).is_none() {
                return Err(Error::Config(format!("boundary tag '{tag}' not present in the mesh")));
            }
        }
        let mut out = HashMap::new();
        let mut used = vec![false; mesh.tags.len()];
        for f in &mesh.boundary_faces {
            used[f.tag] = true;
        }
        for (tag, _) in mesh.tags.iter().zip(used).filter(|(_, u)| *u) {
            let kind = match self.boundary.get(tag).map(String::as_str) {
                None => case.default_bc(),
                Some("far_field") => match case.default_bc() {
                    d @ BoundaryKind::Dirichlet(_) => d,
                    _ => return Err(Error::Config(format!("case '{}' has no far-field state", case.name()))),
                },
                Some(s) => s.parse()?,
            };
            out.insert(tag.clone(), kind);
        }
        Ok(out)
    }

    pub fn final_time(&self, case: &Case) -> Result<f64> {
        let t = self.time.final_time.unwrap_or_else(|| case.default_final_time());
        if t >= 0.0 && t.is_finite() {
            Ok(t)
        } else {
            Err(Error::Config(format!("time.final_time must be >= 0, got {t}")))
        }
    }

    pub fn cfl(&self, case: &Case) -> Result<f64> {
        let c = self.time.cfl.unwrap_or_else(|| case.default_cfl());
        if c > 0.0 && c.is_finite() {
            Ok(c)
        } else {
            Err(Error::Config(format!("time.cfl must be > 0, got {c}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const VORTEX: &str = r#"
[case]
name = "isentropic_vortex"
beta = 5.0

[mesh]
generator = "tri_grid"
cells = [8, 8]
x_range = [-5.0, 5.0]
y_range = [-5.0, 5.0]
periodic = true
degree = 2

[scheme]
name = "psi_cip"
correction = "high_order"

[time]
final_time = 0.5
"#;

    #[test]
    fn parses_vortex_config() {
        let c = RunConfig::from_toml(VORTEX).unwrap();
        assert_eq!(c.mesh.degree, 2);
        assert_eq!(c.scheme_config().unwrap().scheme, Scheme::PsiCip);
        assert_eq!(c.correction().unwrap(), CorrectionMode::HighOrder);
        let mesh = c.build_mesh().unwrap();
        assert!(mesh.is_periodic());
        let case = c.build_case(&mesh).unwrap();
        assert_eq!(case.name(), "isentropic_vortex");
        match &case {
            Case::IsentropicVortex { period, .. } => assert_eq!(*period, Some(([-5.0, -5.0], [10.0, 10.0]))),
            _ => unreachable!(),
        }
        assert_eq!(c.final_time(&case).unwrap(), 0.5);
        assert_eq!(c.cfl(&case).unwrap(), 0.5);
        assert!(c.boundary_conditions(&mesh, &case).unwrap().is_empty());
        assert_eq!(c.output.snapshots, 10);
    }

    #[test]
    fn rejects_bad_values() {
        let bad_scheme = VORTEX.replace("psi_cip", "upwind");
        assert!(matches!(RunConfig::from_toml(&bad_scheme).unwrap().scheme_config(), Err(Error::Config(_))));
        let bad_key = VORTEX.replace("beta = 5.0", "beta = 5.0\nalpha = 1.0");
        assert!(matches!(RunConfig::from_toml(&bad_key), Err(Error::Config(_))));
        let strong = VORTEX.replace("beta = 5.0", "beta = 12.0");
        let c = RunConfig::from_toml(&strong).unwrap();
        assert!(matches!(c.build_case(&c.build_mesh().unwrap()), Err(Error::Config(_))));
        let bad_case = VORTEX.replace("isentropic_vortex", "kelvin_helmholtz");
        let c = RunConfig::from_toml(&bad_case).unwrap();
        assert!(c.build_case(&c.build_mesh().unwrap()).is_err());
    }

    #[test]
    fn boundary_overrides() {
        let text = r#"
[case]
name = "gresho"
[mesh]
generator = "disc"
rings = 4
radius = 2.0
[boundary]
outer = "wall"
"#;
        let c = RunConfig::from_toml(text).unwrap();
        let mesh = c.build_mesh().unwrap();
        let case = c.build_case(&mesh).unwrap();
        assert_eq!(c.boundary_conditions(&mesh, &case).unwrap()["outer"], BoundaryKind::Wall);
        assert_eq!(c.final_time(&case).unwrap(), 0.16);
        assert_eq!(c.cfl(&case).unwrap(), 0.25);
        let far = RunConfig::from_toml(&text.replace("\"wall\"", "\"far_field\"")).unwrap();
        assert!(far.boundary_conditions(&mesh, &case).is_err());
        let unknown = RunConfig::from_toml(&text.replace("outer =", "inner =")).unwrap();
        assert!(unknown.boundary_conditions(&mesh, &case).is_err());
    }
}
