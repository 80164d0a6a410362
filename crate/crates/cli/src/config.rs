use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use lamefem::verify::{manufactured_case, ManufacturedCase};
use lamefem::{generate_box_mesh, BoundaryKind, FieldFunction, MaterialParams, Mesh, Order, SolverSettings, Vec3};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::CliError;

/// A length given as a number or as a multiple of π (`"pi"`, `"2pi"`,
/// `"pi/2"`, `"0.5*pi"`). The literal is kept so configs echo unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct Length {
    pub value: f64,
    literal: Option<String>,
}

impl Length {
    pub fn new(value: f64) -> Self {
        Length { value, literal: None }
    }
}

impl FromStr for Length {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let t = s.trim();
        let bad = || CliError::Validation(format!("cannot parse length '{s}'"));
        let value = if let Some(pos) = t.find("pi") {
            let (pre, post) = (&t[..pos], &t[pos + 2..]);
            let factor = match pre.trim_end_matches('*') {
                "" => 1.0,
                f => f.parse::<f64>().map_err(|_| bad())?,
            };
            let divisor = match post {
                "" => 1.0,
                d => d.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
            };
            factor * std::f64::consts::PI / divisor
        } else {
            return t.parse::<f64>().map(Length::new).map_err(|_| bad());
        };
        Ok(Length {
            value,
            literal: Some(t.to_string()),
        })
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.literal {
            Some(l) => f.write_str(l),
            None => write!(f, "{}", self.value),
        }
    }
}

impl Serialize for Length {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match &self.literal {
            Some(l) => s.serialize_str(l),
            None => s.serialize_f64(self.value),
        }
    }
}

impl<'de> Deserialize<'de> for Length {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(Length::new(v)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// One value for all three axes or one per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerAxis<T> {
    All(T),
    Each([T; 3]),
}

impl<T: Clone> PerAxis<T> {
    pub fn expand(&self) -> [T; 3] {
        match self {
            PerAxis::All(v) => [v.clone(), v.clone(), v.clone()],
            PerAxis::Each(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub n: PerAxis<usize>,
    pub lengths: PerAxis<Length>,
}

impl BoxSpec {
    pub fn n(&self) -> [usize; 3] {
        self.n.expand()
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths.expand().map(|l| l.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroTag {
    Zero,
}

/// Body force: `"zero"`, a manufactured case, or a constant vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SourceSpec {
    Zero(ZeroTag),
    Case {
        case: String,
        #[serde(default = "unit_mode")]
        mode: [u32; 3],
    },
    Constant {
        constant: [f64; 3],
    },
}

fn unit_mode() -> [u32; 3] {
    [1, 1, 1]
}

impl Default for SourceSpec {
    fn default() -> Self {
        SourceSpec::Zero(ZeroTag::Zero)
    }
}

/// Shifts of a resonance scan: an explicit list or a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScanSpec {
    List { sigmas: Vec<f64> },
    Grid { from: f64, to: f64, steps: usize },
}

impl ScanSpec {
    pub fn sigmas(&self) -> Result<Vec<f64>, CliError> {
        match self {
            ScanSpec::List { sigmas } => Ok(sigmas.clone()),
            ScanSpec::Grid { from, to, steps } => {
                if *steps < 1 || !(from <= to) {
                    return Err(CliError::Validation(format!(
                        "scan grid needs from ≤ to and steps ≥ 1, got {from}, {to}, {steps}"
                    )));
                }
                if *steps == 1 {
                    return Ok(vec![*from]);
                }
                let h = (to - from) / (*steps - 1) as f64;
                Ok((0..*steps).map(|i| if i + 1 == *steps { *to } else { from + h * i as f64 }).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vtk: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
}

/// JSON run configuration shared by the solver subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub box_spec: Option<BoxSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<PathBuf>,
    pub material: MaterialParams,
    /// Defaults to the boundary kind of a manufactured source.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bc: Option<BoundaryKind>,
    #[serde(default)]
    pub source: SourceSpec,
    #[serde(default = "default_order")]
    pub order: Order,
    #[serde(default)]
    pub solver: SolverSettings,
    /// Maxwell divergence penalty for the decoupled shear problem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_order() -> Order {
    Order::P2
}

fn default_seed() -> u64 {
    20240917
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Validation(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config; a relative mesh path is taken relative to the file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = RunConfig::from_json(&text)?;
        if let (Some(mesh), Some(dir)) = (&cfg.mesh, path.parent()) {
            if mesh.is_relative() {
                cfg.mesh = Some(dir.join(mesh));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match (&self.box_spec, &self.mesh) {
            (Some(_), Some(_)) => return Err(CliError::Validation("give either 'box' or 'mesh', not both".into())),
            (None, None) => return Err(CliError::Validation("one of 'box' or 'mesh' is required".into())),
            _ => {}
        }
        if let Some(b) = &self.box_spec {
            if b.n().iter().any(|&k| k == 0) {
                return Err(CliError::Validation("box subdivisions must be positive".into()));
            }
            if b.lengths().iter().any(|l| !(*l > 0.0 && l.is_finite())) {
                return Err(CliError::Validation("box lengths must be positive".into()));
            }
        }
        self.material
            .validate()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        if let Some(s) = self.penalty {
            if !(s > 0.0 && s.is_finite()) {
                return Err(CliError::Validation(format!("penalty must be positive, got {s}")));
            }
        }
        let s = &self.solver;
        if !(s.tol > 0.0 && s.inner_tol > 0.0 && s.guard_rel_tol > 0.0) || s.gmres_restart == 0 {
            return Err(CliError::Validation("solver tolerances must be positive".into()));
        }
        if let SourceSpec::Case { case, mode } = &self.source {
            let c = manufactured_case(case, *mode, self.material).map_err(|e| CliError::Validation(e.to_string()))?;
            if let Some(bc) = self.bc {
                if bc != c.bc() {
                    return Err(CliError::Validation(format!(
                        "case '{case}' is a {}-kind case but bc is '{}'",
                        c.bc().as_str(),
                        bc.as_str()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn bc(&self) -> BoundaryKind {
        match (&self.bc, self.case()) {
            (Some(bc), _) => *bc,
            (None, Some(c)) => c.bc(),
            (None, None) => BoundaryKind::Fourth,
        }
    }

    pub fn case(&self) -> Option<ManufacturedCase> {
        match &self.source {
            SourceSpec::Case { case, mode } => manufactured_case(case, *mode, self.material).ok(),
            _ => None,
        }
    }

    pub fn source_function(&self) -> FieldFunction {
        match &self.source {
            SourceSpec::Zero(_) => FieldFunction::zero(),
            SourceSpec::Constant { constant } => FieldFunction::constant(Vec3::from(*constant)),
            SourceSpec::Case { .. } => self.case().expect("validated").f,
        }
    }

    pub fn build_mesh(&self) -> Result<Arc<Mesh>, CliError> {
        let mesh = match (&self.box_spec, &self.mesh) {
            (Some(b), _) => generate_box_mesh(b.n(), b.lengths())?,
            (None, Some(path)) => Mesh::load(path)?,
            (None, None) => unreachable!("validated"),
        };
        Ok(Arc::new(mesh))
    }

    /// Subdivisions of a box config that is the cube `(0,π)³` with equal
    /// subdivisions, as the verification studies require.
    pub fn cube_level(&self) -> Result<usize, CliError> {
        let b = self
            .box_spec
            .as_ref()
            .ok_or_else(|| CliError::Validation("verification studies need a 'box' domain".into()))?;
        let [nx, ny, nz] = b.n();
        let pi = std::f64::consts::PI;
        if nx != ny || ny != nz || b.lengths().iter().any(|l| (l - pi).abs() > 1e-14) {
            return Err(CliError::Validation(
                "verification studies run on the cube (0,pi)^3 with equal subdivisions".into(),
            ));
        }
        Ok(nx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P4: &str = r#"{
        "box": {"n": 8, "lengths": "pi"},
        "material": {"lambda": 2.0, "mu": 1.0, "omega": 1.0},
        "source": {"case": "p4", "mode": [1, 1, 1]},
        "order": 2
    }"#;

    #[test]
    fn pi_literals() {
        let pi = std::f64::consts::PI;
        assert_eq!("pi".parse::<Length>().unwrap().value, pi);
        assert_eq!("2pi".parse::<Length>().unwrap().value, 2.0 * pi);
        assert_eq!("0.5*pi".parse::<Length>().unwrap().value, 0.5 * pi);
        assert_eq!("pi/2".parse::<Length>().unwrap().value, pi / 2.0);
        assert_eq!("1.5".parse::<Length>().unwrap().value, 1.5);
        assert!("tau".parse::<Length>().is_err());
        assert!("pi2".parse::<Length>().is_err());
    }

    #[test]
    fn config_defaults_and_case_bc() {
        let cfg = RunConfig::from_json(P4).unwrap();
        assert_eq!(cfg.bc(), BoundaryKind::Fourth);
        assert_eq!(cfg.order, Order::P2);
        assert_eq!(cfg.cube_level().unwrap(), 8);
        assert_eq!(cfg.box_spec.as_ref().unwrap().lengths(), [std::f64::consts::PI; 3]);
    }

    #[test]
    fn echo_round_trips() {
        let cfg = RunConfig::from_json(P4).unwrap();
        let echo = serde_json::to_string(&cfg).unwrap();
        assert!(echo.contains("\"pi\""));
        assert_eq!(RunConfig::from_json(&echo).unwrap(), cfg);
    }

    #[test]
    fn exactly_one_domain() {
        let both = P4.replace("\"order\": 2", "\"order\": 2, \"mesh\": \"m.json\"");
        assert!(matches!(RunConfig::from_json(&both), Err(CliError::Validation(_))));
        let none = r#"{"material": {"lambda": 2.0, "mu": 1.0, "omega": 1.0}}"#;
        assert!(matches!(RunConfig::from_json(none), Err(CliError::Validation(_))));
    }

    #[test]
    fn invalid_inputs_rejected() {
        for bad in [
            P4.replace("\"mu\": 1.0", "\"mu\": -1.0"),
            P4.replace("\"p4\"", "\"q9\""),
            P4.replace("\"order\": 2", "\"order\": 3"),
            P4.replace("\"order\": 2", "\"order\": 2, \"bc\": \"third\""),
            P4.replace("\"order\": 2", "\"order\": 2, \"colour\": 1"),
        ] {
            assert!(matches!(RunConfig::from_json(&bad), Err(CliError::Validation(_))), "{bad}");
        }
    }

    #[test]
    fn scan_grid() {
        let g = ScanSpec::Grid { from: 1.5, to: 2.5, steps: 3 };
        assert_eq!(g.sigmas().unwrap(), vec![1.5, 2.0, 2.5]);
        assert!(ScanSpec::Grid { from: 2.0, to: 1.0, steps: 3 }.sigmas().is_err());
    }

    #[test]
    fn sources() {
        let zero = RunConfig::from_json(&P4.replace(r#"{"case": "p4", "mode": [1, 1, 1]}"#, "\"zero\"")).unwrap();
        assert_eq!(zero.source, SourceSpec::default());
        let c = RunConfig::from_json(&P4.replace(r#"{"case": "p4", "mode": [1, 1, 1]}"#, r#"{"constant": [1, 2, 3]}"#)).unwrap();
        assert_eq!(c.source_function().value(&Vec3::zeros()), Vec3::new(1.0, 2.0, 3.0));
    }
}
