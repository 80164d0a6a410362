//! Decoupled problems for the pressure part `v_p = −∇·u` and the shear
//! part `E_s = ∇∧u` of a Lamé solution.
//!
//! Helmholtz, solved in the weak form
//!
//! ```text
//! (∇v, ∇φ) − k_p²(v, φ) = −(g, φ) + ⟨∂_ν v, φ⟩,   g = ∇·f/(λ+2μ)
//! ```
//!
//! with `v = 0` (fourth kind) or `∂_ν v = ν·f/(λ+2μ)` (third kind).
//!
//! Maxwell, regularized by a divergence penalty `s > 0`:
//!
//! ```text
//! (∇∧E, ∇∧F) + s(∇·E, ∇·F) − k_s²(E, F) = (h, F) − ⟨ν∧(∇∧E), F⟩,   h = ∇∧f/μ
//! ```
//!
//! over `X_T` with `ν∧(∇∧E) = ν∧f/μ` (fourth kind), or over `X_N` with the
//! boundary term absent (third kind).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::fem::{
    assemble_boundary_load, assemble_load, assemble_matrix, assemble_scalar_boundary_load,
    assemble_scalar_load, build_dofmap, norms, Constraint, FieldFunction, FormKind, Order,
    ScalarFunction, ValueKind,
};
use crate::lame::{solve_shifted_system, BoundaryKind, MaterialParams, Solution, SolverSettings};
use crate::mesh::Mesh;
use crate::{Error, Result, Vec3};

type BoundaryScalar = Arc<dyn Fn(&Vec3, &Vec3) -> f64 + Send + Sync>;
type BoundaryVector = Arc<dyn Fn(&Vec3, &Vec3) -> Vec3 + Send + Sync>;

/// `(k_p, k_s) = (ω/√(λ+2μ), ω/√μ)`.
pub fn wavenumbers(params: &MaterialParams) -> (f64, f64) {
    (params.k_p(), params.k_s())
}

#[derive(Clone)]
pub enum HelmholtzBc {
    DirichletZero,
    /// Prescribed `∂_ν v` as a function of `(x, ν)`.
    Neumann(BoundaryScalar),
}

impl fmt::Debug for HelmholtzBc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HelmholtzBc::DirichletZero => f.write_str("DirichletZero"),
            HelmholtzBc::Neumann(_) => f.write_str("Neumann"),
        }
    }
}

/// `Δv + k²v = g` in Ω with Dirichlet or Neumann data.
#[derive(Debug, Clone)]
pub struct HelmholtzProblem {
    pub mesh: Arc<Mesh>,
    pub k: f64,
    pub source: ScalarFunction,
    pub bc: HelmholtzBc,
    pub order: Order,
    pub settings: SolverSettings,
}

impl HelmholtzProblem {
    pub fn new(mesh: Arc<Mesh>, k: f64, source: ScalarFunction, bc: HelmholtzBc, order: Order) -> Result<Self> {
        positive("k", k)?;
        Ok(HelmholtzProblem {
            mesh,
            k,
            source,
            bc,
            order,
            settings: SolverSettings::default(),
        })
    }

    /// Pressure problem of a Lamé source `f`, which must carry its divergence.
    pub fn from_lame_source(
        mesh: Arc<Mesh>,
        params: &MaterialParams,
        bc: BoundaryKind,
        f: &FieldFunction,
        order: Order,
    ) -> Result<Self> {
        params.validate()?;
        if !f.has_divergence() {
            return Err(Error::InvalidInput("the Helmholtz source needs ∇·f".into()));
        }
        let c = 1.0 / params.p_modulus();
        let div = f.clone();
        let source = ScalarFunction::new(move |x| c * div.divergence(x).expect("checked above"));
        let bc = match bc {
            BoundaryKind::Fourth => HelmholtzBc::DirichletZero,
            BoundaryKind::Third => {
                let f = f.clone();
                HelmholtzBc::Neumann(Arc::new(move |x, n| c * n.dot(&f.value(x))))
            }
        };
        HelmholtzProblem::new(mesh, params.k_p(), source, bc, order)
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> Self {
        self.settings = settings;
        self
    }
}

pub fn solve_helmholtz(hp: &HelmholtzProblem) -> Result<Solution> {
    positive("k", hp.k)?;
    let constraint = match hp.bc {
        HelmholtzBc::DirichletZero => Constraint::DirichletZero,
        HelmholtzBc::Neumann(_) => Constraint::None,
    };
    let dm = Arc::new(build_dofmap(hp.mesh.clone(), hp.order, ValueKind::Scalar, constraint)?);
    let stiffness = assemble_matrix(&dm, FormKind::GradGrad)?;
    let mass = assemble_matrix(&dm, FormKind::Mass)?;
    let mut b: Vec<f64> = assemble_scalar_load(&dm, &hp.source)?.iter().map(|v| -v).collect();
    if let HelmholtzBc::Neumann(data) = &hp.bc {
        let g = assemble_scalar_boundary_load(&dm, |x, n| data(x, n))?;
        b.iter_mut().zip(&g).for_each(|(bi, gi)| *bi += gi);
    }
    solve_shifted_system(dm, &stiffness, &mass, &b, hp.k * hp.k, &hp.settings)
}

#[derive(Clone)]
pub enum MaxwellBc {
    /// `ν∧(∇∧E)` prescribed as a function of `(x, ν)`, posed over `X_T`.
    Natural(BoundaryVector),
    /// `ν∧E = 0`, posed over `X_N`.
    Essential,
}

impl fmt::Debug for MaxwellBc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxwellBc::Natural(_) => f.write_str("Natural"),
            MaxwellBc::Essential => f.write_str("Essential"),
        }
    }
}

/// `∇∧∇∧E − s∇(∇·E) − k²E = h` in Ω.
#[derive(Debug, Clone)]
pub struct MaxwellProblem {
    pub mesh: Arc<Mesh>,
    pub k: f64,
    pub s: f64,
    pub source: FieldFunction,
    pub bc: MaxwellBc,
    pub order: Order,
    pub settings: SolverSettings,
}

impl MaxwellProblem {
    pub fn new(mesh: Arc<Mesh>, k: f64, s: f64, source: FieldFunction, bc: MaxwellBc, order: Order) -> Result<Self> {
        positive("k", k)?;
        positive("s", s)?;
        Ok(MaxwellProblem {
            mesh,
            k,
            s,
            source,
            bc,
            order,
            settings: SolverSettings::default(),
        })
    }

    /// Default penalty `(λ+2μ)/μ`.
    pub fn default_penalty(params: &MaterialParams) -> f64 {
        params.p_modulus() / params.mu
    }

    /// Shear problem of a Lamé source `f`, which must carry its curl.
    pub fn from_lame_source(
        mesh: Arc<Mesh>,
        params: &MaterialParams,
        bc: BoundaryKind,
        f: &FieldFunction,
        order: Order,
        s: Option<f64>,
    ) -> Result<Self> {
        params.validate()?;
        if !f.has_curl() {
            return Err(Error::InvalidInput("the Maxwell source needs ∇∧f".into()));
        }
        let c = 1.0 / params.mu;
        let curl = f.clone();
        let source = FieldFunction::new(move |x| curl.curl(x).expect("checked above") * c);
        let bc = match bc {
            BoundaryKind::Fourth => {
                let f = f.clone();
                MaxwellBc::Natural(Arc::new(move |x, n| n.cross(&f.value(x)) * c))
            }
            BoundaryKind::Third => MaxwellBc::Essential,
        };
        let s = s.unwrap_or_else(|| Self::default_penalty(params));
        MaxwellProblem::new(mesh, params.k_s(), s, source, bc, order)
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> Self {
        self.settings = settings;
        self
    }
}

/// Maxwell solution with `‖∇·E_h‖_{L²}` as a consistency indicator.
#[derive(Debug, Clone)]
pub struct MaxwellSolution {
    pub solution: Solution,
    pub div_l2: f64,
}

pub fn solve_maxwell(mp: &MaxwellProblem) -> Result<MaxwellSolution> {
    positive("k", mp.k)?;
    positive("s", mp.s)?;
    let constraint = match mp.bc {
        MaxwellBc::Natural(_) => Constraint::NormalZero,
        MaxwellBc::Essential => Constraint::TangentialZero,
    };
    let dm = Arc::new(build_dofmap(mp.mesh.clone(), mp.order, ValueKind::Vector3, constraint)?);
    let curl = assemble_matrix(&dm, FormKind::CurlCurl)?;
    let div = assemble_matrix(&dm, FormKind::DivDiv)?;
    let stiffness = curl.linear_combination(1.0, &div, mp.s)?;
    let mass = assemble_matrix(&dm, FormKind::Mass)?;
    let mut b = assemble_load(&dm, &mp.source)?;
    if let MaxwellBc::Natural(data) = &mp.bc {
        let g = assemble_boundary_load(&dm, |x, n| data(x, n))?;
        b.iter_mut().zip(&g).for_each(|(bi, gi)| *bi -= gi);
    }
    let solution = solve_shifted_system(dm, &stiffness, &mass, &b, mp.k * mp.k, &mp.settings)?;
    let div_l2 = norms(&solution.field, None)?.div_l2;
    Ok(MaxwellSolution { solution, div_l2 })
}

/// Which decoupled boundary condition goes with a Lamé boundary kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoupledBcs {
    pub helmholtz_dirichlet: bool,
    pub maxwell_natural: bool,
}

impl From<BoundaryKind> for DecoupledBcs {
    fn from(kind: BoundaryKind) -> Self {
        let fourth = kind == BoundaryKind::Fourth;
        DecoupledBcs {
            helmholtz_dirichlet: fourth,
            maxwell_natural: fourth,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")))
    }
}
