//! The time-harmonic Lamé problems
//!
//! ```text
//! find u ∈ X:  μ(∇∧u, ∇∧v) + (λ+2μ)(∇·u, ∇·v) − ω²(u, v) = (f, v)  ∀v ∈ X
//! ```
//!
//! with `X = X_N` (fourth kind) or `X = X_T` (third kind), their compact
//! operator form `u − (ω²+1)Ku = Kf` with `K = (A+M)⁻¹M`, and traction and
//! boundary diagnostics of the solutions.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::fem::{
    assemble_load, assemble_matrix, boundary_points, build_dofmap, Constraint, DiscreteField,
    DofMap, FieldFunction, FormKind, Order, ValueKind,
};
use crate::linalg::{
    default_max_iter, gmres, resonance_guard, solve_spd, solve_sym, GuardReport, SolveStats,
    SparseSym,
};
use crate::mesh::Mesh;
use crate::{Error, Result, Vec3};

/// Lamé constants and angular frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub lambda: f64,
    pub mu: f64,
    pub omega: f64,
}

impl MaterialParams {
    pub fn new(lambda: f64, mu: f64, omega: f64) -> Result<Self> {
        let p = MaterialParams { lambda, mu, omega };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda", self.lambda), ("mu", self.mu), ("omega", self.omega)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// `λ + 2μ`.
    pub fn p_modulus(&self) -> f64 {
        self.lambda + 2.0 * self.mu
    }

    /// Pressure wavenumber `ω/√(λ+2μ)`.
    pub fn k_p(&self) -> f64 {
        self.omega / self.p_modulus().sqrt()
    }

    /// Shear wavenumber `ω/√μ`.
    pub fn k_s(&self) -> f64 {
        self.omega / self.mu.sqrt()
    }
}

/// Third kind: `ν·u = 0`, `ν∧Tu = 0`. Fourth kind: `ν∧u = 0`, `ν·Tu = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Third,
    Fourth,
}

impl BoundaryKind {
    /// The essential part of the condition, realized in the space.
    pub fn constraint(self) -> Constraint {
        match self {
            BoundaryKind::Third => Constraint::NormalZero,
            BoundaryKind::Fourth => Constraint::TangentialZero,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryKind::Third => "third",
            BoundaryKind::Fourth => "fourth",
        }
    }
}

/// Tolerances of the linear solves and the resonance guard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    /// Relative residual of the main solve.
    pub tol: f64,
    /// Iteration cap; `None` means `20·n`.
    pub max_iter: Option<usize>,
    /// Run the resonance guard before solving.
    pub guard: bool,
    /// Refuse when an eigenvalue lies within `guard_rel_tol·ω²`.
    pub guard_rel_tol: f64,
    pub guard_steps: usize,
    /// Relative residual of the SPD solves applying `K`.
    pub inner_tol: f64,
    pub gmres_restart: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-10,
            max_iter: None,
            guard: true,
            guard_rel_tol: 1e-6,
            guard_steps: 3,
            inner_tol: 1e-13,
            gmres_restart: 60,
        }
    }
}

impl SolverSettings {
    pub fn max_iter(&self, n: usize) -> usize {
        self.max_iter.unwrap_or_else(|| default_max_iter(n))
    }
}

/// A fourth- or third-kind Lamé problem.
#[derive(Debug, Clone)]
pub struct LameProblem {
    pub mesh: Arc<Mesh>,
    pub params: MaterialParams,
    pub bc: BoundaryKind,
    pub source: FieldFunction,
    pub order: Order,
    pub settings: SolverSettings,
}

impl LameProblem {
    pub fn new(
        mesh: Arc<Mesh>,
        params: MaterialParams,
        bc: BoundaryKind,
        source: FieldFunction,
        order: Order,
    ) -> Result<Self> {
        params.validate()?;
        Ok(LameProblem {
            mesh,
            params,
            bc,
            source,
            order,
            settings: SolverSettings::default(),
        })
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> Self {
        self.settings = settings;
        self
    }
}

/// Discrete system over the constrained space: stiffness
/// `A = μ·curlcurl + (λ+2μ)·divdiv`, mass `M` and load `b`.
#[derive(Debug, Clone)]
pub struct LameSystem {
    pub dofmap: Arc<DofMap>,
    pub stiffness: SparseSym,
    pub mass: SparseSym,
    pub load: Vec<f64>,
    pub params: MaterialParams,
}

impl LameSystem {
    /// `A − σM`.
    pub fn shifted(&self, sigma: f64) -> Result<SparseSym> {
        self.stiffness.linear_combination(1.0, &self.mass, -sigma)
    }

    /// `a(v, w) − (f, v)` style bilinear form value `vᵀ(A − ω²M)w`.
    pub fn form(&self, v: &[f64], w: &[f64]) -> f64 {
        let omega2 = self.params.omega * self.params.omega;
        self.stiffness.bilinear(v, w) - omega2 * self.mass.bilinear(v, w)
    }
}

pub fn assemble_lame_system(p: &LameProblem) -> Result<LameSystem> {
    p.params.validate()?;
    let dofmap = Arc::new(build_dofmap(p.mesh.clone(), p.order, ValueKind::Vector3, p.bc.constraint())?);
    let curl = assemble_matrix(&dofmap, FormKind::CurlCurl)?;
    let div = assemble_matrix(&dofmap, FormKind::DivDiv)?;
    let stiffness = curl.linear_combination(p.params.mu, &div, p.params.p_modulus())?;
    let mass = assemble_matrix(&dofmap, FormKind::Mass)?;
    let load = assemble_load(&dofmap, &p.source)?;
    Ok(LameSystem {
        dofmap,
        stiffness,
        mass,
        load,
        params: p.params,
    })
}

/// A solved field with its solver diagnostics.
#[derive(Debug, Clone)]
pub struct Solution {
    pub field: DiscreteField,
    pub stats: SolveStats,
    pub guard: Option<GuardReport>,
}

pub fn solve_lame(p: &LameProblem) -> Result<Solution> {
    let sys = assemble_lame_system(p)?;
    solve_lame_system(&sys, &p.settings)
}

/// Solves `(A − ω²M)u = b` behind the resonance guard.
pub fn solve_lame_system(sys: &LameSystem, settings: &SolverSettings) -> Result<Solution> {
    let omega2 = sys.params.omega * sys.params.omega;
    solve_shifted_system(
        sys.dofmap.clone(),
        &sys.stiffness,
        &sys.mass,
        &sys.load,
        omega2,
        settings,
    )
}

/// Guarded solve of `(K − σM)x = b`, shared with the decoupled problems.
pub(crate) fn solve_shifted_system(
    dofmap: Arc<DofMap>,
    k: &SparseSym,
    m: &SparseSym,
    b: &[f64],
    sigma: f64,
    settings: &SolverSettings,
) -> Result<Solution> {
    let n = k.dim();
    if n == 0 {
        return Ok(Solution {
            field: DiscreteField::zeros(dofmap),
            stats: SolveStats { iterations: 0, residual: 0.0 },
            guard: None,
        });
    }
    let guard = if settings.guard {
        Some(resonance_guard(k, m, sigma, settings.guard_rel_tol, settings.guard_steps)?)
    } else {
        None
    };
    let op = k.linear_combination(1.0, m, -sigma)?;
    let (x, stats) = match solve_sym(&op, b, settings.tol, settings.max_iter(n)) {
        Ok(r) => r,
        Err(Error::NotConverged { iterations, residual }) => {
            return Err(Error::Resonance {
                shift: sigma,
                nearest_eigenvalue: guard.map(|g| g.nearest_estimate),
                detail: format!(
                    "MINRES stalled after {iterations} iterations at relative residual {residual:e}"
                ),
            })
        }
        Err(e) => return Err(e),
    };
    Ok(Solution {
        field: DiscreteField::new(dofmap, x)?,
        stats,
        guard,
    })
}

/// `x = Kw`, i.e. the solution of `(A + M)x = Mw`.
pub fn shifted_solve_k(sys: &LameSystem, w: &[f64], tol: f64) -> Result<Vec<f64>> {
    let rhs = sys.mass.matvec(w);
    let op = sys.stiffness.linear_combination(1.0, &sys.mass, 1.0)?;
    let n = op.dim();
    Ok(solve_spd(&op, &rhs, tol, 20 * n.max(10))?.0)
}

/// `(A + M)⁻¹ r` for an arbitrary right-hand side.
fn apply_inverse(op: &SparseSym, r: &[f64], tol: f64) -> Result<Vec<f64>> {
    Ok(solve_spd(op, r, tol, 20 * op.dim().max(10))?.0)
}

pub fn solve_via_fredholm(p: &LameProblem) -> Result<Solution> {
    let sys = assemble_lame_system(p)?;
    solve_fredholm_system(&sys, &p.settings)
}

/// Solves `u − (ω²+1)Ku = (A+M)⁻¹b` by restarted GMRES, each application of
/// `K` being an SPD solve.
pub fn solve_fredholm_system(sys: &LameSystem, settings: &SolverSettings) -> Result<Solution> {
    let n = sys.stiffness.dim();
    let c = sys.params.omega * sys.params.omega + 1.0;
    let op = sys.stiffness.linear_combination(1.0, &sys.mass, 1.0)?;
    let rhs = apply_inverse(&op, &sys.load, settings.inner_tol)?;
    let apply = |v: &[f64]| -> Result<Vec<f64>> {
        let kv = apply_inverse(&op, &sys.mass.matvec(v), settings.inner_tol)?;
        Ok(v.iter().zip(&kv).map(|(a, b)| a - c * b).collect())
    };
    let max_iter = settings.max_iter.unwrap_or(4 * settings.gmres_restart).min(20 * n.max(10));
    let (x, stats) = match gmres(apply, &rhs, settings.tol, settings.gmres_restart, max_iter) {
        Ok(r) => r,
        Err(Error::NotConverged { iterations, residual }) => {
            return Err(Error::Resonance {
                shift: c - 1.0,
                nearest_eigenvalue: None,
                detail: format!(
                    "fixed-point form did not converge in {iterations} GMRES steps (residual {residual:e})"
                ),
            })
        }
        Err(e) => return Err(e),
    };
    Ok(Solution {
        field: DiscreteField::new(sys.dofmap.clone(), x)?,
        stats,
        guard: None,
    })
}

/// Traction at one boundary quadrature point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TractionSample {
    pub x: Vec3,
    pub normal: Vec3,
    pub traction: Vec3,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct TractionReport {
    pub samples: Vec<TractionSample>,
    /// `‖ν·Tu‖_{L²(∂Ω)}`.
    pub normal_l2: f64,
    /// `‖ν∧Tu‖_{L²(∂Ω)}`.
    pub tangential_l2: f64,
}

/// `Tu = λ(∇·u)ν + μ(∇u + ∇uᵀ)ν` from the gradient of the owning element.
pub fn traction(u: &DiscreteField, params: &MaterialParams) -> Result<TractionReport> {
    if !u.is_vector() {
        return Err(Error::InvalidInput("traction of a scalar field".into()));
    }
    let mut samples = Vec::new();
    let (mut nn, mut tt) = (0.0, 0.0);
    for bp in boundary_points(u.dofmap()) {
        let g = u.eval_in_element(bp.tet, bp.xi).gradient;
        let t = bp.normal * (params.lambda * g.trace()) + (g + g.transpose()) * bp.normal * params.mu;
        nn += bp.weight * bp.normal.dot(&t).powi(2);
        tt += bp.weight * bp.normal.cross(&t).norm_squared();
        samples.push(TractionSample {
            x: bp.x,
            normal: bp.normal,
            traction: t,
            weight: bp.weight,
        });
    }
    Ok(TractionReport {
        samples,
        normal_l2: nn.sqrt(),
        tangential_l2: tt.sqrt(),
    })
}

/// Surface norms of the boundary conditions a solution should satisfy:
/// fourth kind `ν∧u` (essential) and `∇·u` (recovered); third kind `ν·u`
/// (essential) and `ν∧(∇∧u)` (recovered).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryResiduals {
    pub kind: BoundaryKind,
    pub essential: f64,
    pub natural: f64,
    /// `‖u‖_{L²(∂Ω)}` for scaling.
    pub boundary_l2: f64,
}

impl BoundaryResiduals {
    pub fn essential_name(&self) -> &'static str {
        match self.kind {
            BoundaryKind::Fourth => "nu_cross_u",
            BoundaryKind::Third => "nu_dot_u",
        }
    }

    pub fn natural_name(&self) -> &'static str {
        match self.kind {
            BoundaryKind::Fourth => "div_u",
            BoundaryKind::Third => "nu_cross_curl_u",
        }
    }
}

pub fn boundary_residuals(u: &DiscreteField, kind: BoundaryKind) -> Result<BoundaryResiduals> {
    if !u.is_vector() {
        return Err(Error::InvalidInput("boundary residuals of a scalar field".into()));
    }
    let (mut ess, mut nat, mut size) = (0.0, 0.0, 0.0);
    for bp in boundary_points(u.dofmap()) {
        let p = u.eval_in_element(bp.tet, bp.xi);
        size += bp.weight * p.value.norm_squared();
        match kind {
            BoundaryKind::Fourth => {
                ess += bp.weight * bp.normal.cross(&p.value).norm_squared();
                nat += bp.weight * p.divergence().powi(2);
            }
            BoundaryKind::Third => {
                ess += bp.weight * bp.normal.dot(&p.value).powi(2);
                nat += bp.weight * bp.normal.cross(&p.curl()).norm_squared();
            }
        }
    }
    Ok(BoundaryResiduals {
        kind,
        essential: ess.sqrt(),
        natural: nat.sqrt(),
        boundary_l2: size.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::interpolate;
    use crate::mesh::generate_box_mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn params() -> MaterialParams {
        MaterialParams::new(2.0, 1.0, 1.0).unwrap()
    }

    fn pi_box(n: usize) -> Arc<Mesh> {
        Arc::new(generate_box_mesh([n; 3], [PI; 3]).unwrap())
    }

    #[test]
    fn wavenumbers_and_validation() {
        let p = MaterialParams::new(2.0, 1.0, 2.0).unwrap();
        assert_eq!((p.k_p(), p.k_s()), (1.0, 2.0));
        assert!(p.k_p() < p.k_s());
        assert!(MaterialParams::new(0.0, 1.0, 1.0).is_err());
        assert!(MaterialParams::new(1.0, -1.0, 1.0).is_err());
        assert!(MaterialParams::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn stiffness_is_the_linear_combination() {
        let p = LameProblem::new(pi_box(2), params(), BoundaryKind::Fourth, FieldFunction::zero(), Order::P1).unwrap();
        let sys = assemble_lame_system(&p).unwrap();
        let curl = assemble_matrix(&sys.dofmap, FormKind::CurlCurl).unwrap().to_dense();
        let div = assemble_matrix(&sys.dofmap, FormKind::DivDiv).unwrap().to_dense();
        let expected = curl + div * 4.0;
        let diff = (sys.stiffness.to_dense() - expected).abs().max();
        assert!(diff <= 1e-14 * sys.stiffness.max_abs());
    }

    #[test]
    fn stiffness_is_positive_semidefinite_and_symmetric() {
        let p = LameProblem::new(pi_box(2), params(), BoundaryKind::Third, FieldFunction::zero(), Order::P2).unwrap();
        let sys = assemble_lame_system(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = sys.stiffness.dim();
        for _ in 0..10 {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(sys.stiffness.bilinear(&v, &v) >= 0.0);
            let (a, b) = (sys.form(&v, &w), sys.form(&w, &v));
            assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0));
        }
        assert_eq!(sys.stiffness.symmetry_defect(), 0.0);
        assert_eq!(sys.mass.symmetry_defect(), 0.0);
    }

    #[test]
    fn zero_source_gives_zero() {
        let p = LameProblem::new(pi_box(2), params(), BoundaryKind::Fourth, FieldFunction::zero(), Order::P1).unwrap();
        let u = solve_lame(&p).unwrap();
        assert!(u.field.coeffs().iter().all(|&c| c == 0.0));
        let v = solve_via_fredholm(&p).unwrap();
        assert!(v.field.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn k_satisfies_its_defining_identity() {
        let p = LameProblem::new(pi_box(2), params(), BoundaryKind::Third, FieldFunction::zero(), Order::P2).unwrap();
        let sys = assemble_lame_system(&p).unwrap();
        let n = sys.stiffness.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = shifted_solve_k(&sys, &w, 1e-12).unwrap();
        assert!(shifted_solve_k(&sys, &vec![0.0; n], 1e-12).unwrap().iter().all(|&c| c == 0.0));
        let omega2 = 1.0;
        for _ in 0..20 {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lhs = sys.form(&x, &v) + (1.0 + omega2) * sys.mass.bilinear(&x, &v);
            let rhs = sys.mass.bilinear(&w, &v);
            let scale = sys.stiffness.max_abs() * crate::linalg::norm(&x) * crate::linalg::norm(&v);
            assert!((lhs - rhs).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn galerkin_orthogonality() {
        let f = FieldFunction::new(|x| Vec3::new(x.y.sin(), x.z * x.x, 1.0));
        let p = LameProblem::new(pi_box(2), params(), BoundaryKind::Fourth, f, Order::P2).unwrap();
        let sys = assemble_lame_system(&p).unwrap();
        let u = solve_lame_system(&sys, &p.settings).unwrap();
        let n = sys.stiffness.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = sys.form(u.field.coeffs(), &v) - crate::linalg::dot(&sys.load, &v);
            assert!(r.abs() <= 1e-9 * crate::linalg::norm(&sys.load) * crate::linalg::norm(&v));
        }
    }

    #[test]
    fn identity_field_traction() {
        let dm = Arc::new(build_dofmap(pi_box(1), Order::P1, ValueKind::Vector3, Constraint::None).unwrap());
        let u = interpolate(dm, &FieldFunction::new(|x| *x)).unwrap();
        let p = params();
        let t = traction(&u, &p).unwrap();
        for s in &t.samples {
            let expected = s.normal * (3.0 * p.lambda + 2.0 * p.mu);
            assert!((s.traction - expected).norm() < 1e-12);
            assert!(s.normal.cross(&s.traction).norm() < 1e-12);
        }
        assert!(t.tangential_l2 < 1e-12);
    }

    #[test]
    fn translation_has_no_traction() {
        let dm = Arc::new(build_dofmap(pi_box(1), Order::P2, ValueKind::Vector3, Constraint::None).unwrap());
        let u = interpolate(dm, &FieldFunction::constant(Vec3::new(1.0, -2.0, 0.5))).unwrap();
        let t = traction(&u, &params()).unwrap();
        assert!(t.normal_l2 < 1e-12 && t.tangential_l2 < 1e-12);
    }

    #[test]
    fn resonant_frequency_is_refused() {
        // Lowest fourth-kind eigenvalue of the P1 n=2 discretization.
        let p = LameProblem::new(
            pi_box(2),
            params(),
            BoundaryKind::Fourth,
            FieldFunction::constant(Vec3::new(1.0, 1.0, 1.0)),
            Order::P1,
        )
        .unwrap();
        let sys = assemble_lame_system(&p).unwrap();
        let eig = crate::linalg::smallest_eigenpair(&sys.stiffness, &sys.mass, 0.0).unwrap();
        let mut at = p.clone();
        at.params.omega = eig.value.sqrt();
        match solve_lame(&at) {
            Err(Error::Resonance { nearest_eigenvalue, .. }) => {
                if let Some(v) = nearest_eigenvalue {
                    assert!((v - eig.value).abs() <= 1e-6 * eig.value);
                }
            }
            other => panic!("expected a resonance error, got {other:?}"),
        }
    }

    #[test]
    fn fourth_kind_essential_constraint_holds() {
        let f = FieldFunction::new(|x| Vec3::new(x.y.cos(), x.z, x.x * x.y));
        let p = LameProblem::new(pi_box(2), params(), BoundaryKind::Fourth, f, Order::P2).unwrap();
        let u = solve_lame(&p).unwrap();
        let r = boundary_residuals(&u.field, BoundaryKind::Fourth).unwrap();
        assert!(r.essential <= 1e-10 * r.boundary_l2.max(1e-300));
        assert_eq!(r.essential_name(), "nu_cross_u");
    }
}
