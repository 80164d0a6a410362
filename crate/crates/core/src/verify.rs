//! Verification on the cube `(0,π)³`: manufactured solutions, the coupled
//! against decoupled pipelines, convergence tables and resonance scans.
//!
//! Catalog (`s, c` are `sin, cos` of `mx`, `ny`, `kz`; `κ² = m² + n² + k²`):
//!
//! | case | kind   | `u`                                  |
//! |------|--------|--------------------------------------|
//! | p4   | fourth | `∇(s s s)`                           |
//! | s4   | fourth | `(0, 0, s s)`, `k = 0`               |
//! | m4   | fourth | `(0, 0, s s c)`                      |
//! | p3   | third  | `∇(c c c)`                           |
//! | s3   | third  | `(n s c, −m c s, 0)`, `k = 0`        |
//! | m3   | third  | `(0, 0, c c s)`                      |

use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decoupled::{solve_helmholtz, solve_maxwell, HelmholtzProblem, MaxwellProblem};
use crate::fem::{
    l2_distance_by, l2_distance_to, l2_norm_of, norms, FieldFunction, Order, PointValue, ScalarFunction,
};
use crate::lame::{
    assemble_lame_system, boundary_residuals, solve_lame_system, traction, BoundaryKind, LameProblem,
    MaterialParams, SolverSettings,
};
use crate::linalg::{eigenpairs_near, LanczosOptions};
use crate::mesh::{generate_box_mesh, Mesh};
use crate::{Error, Result, Vec3};

/// Relative distance of `ω²` from a case eigenvalue that flags it resonant.
pub const RESONANCE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseKind {
    P4,
    S4,
    M4,
    P3,
    S3,
    M3,
}

impl CaseKind {
    pub const ALL: [CaseKind; 6] = [
        CaseKind::P4,
        CaseKind::S4,
        CaseKind::M4,
        CaseKind::P3,
        CaseKind::S3,
        CaseKind::M3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseKind::P4 => "p4",
            CaseKind::S4 => "s4",
            CaseKind::M4 => "m4",
            CaseKind::P3 => "p3",
            CaseKind::S3 => "s3",
            CaseKind::M3 => "m3",
        }
    }

    pub fn bc(self) -> BoundaryKind {
        match self {
            CaseKind::P4 | CaseKind::S4 | CaseKind::M4 => BoundaryKind::Fourth,
            CaseKind::P3 | CaseKind::S3 | CaseKind::M3 => BoundaryKind::Third,
        }
    }

    fn has_pressure(self) -> bool {
        !matches!(self, CaseKind::S4 | CaseKind::S3)
    }

    fn has_shear(self) -> bool {
        !matches!(self, CaseKind::P4 | CaseKind::P3)
    }
}

impl FromStr for CaseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown manufactured case '{s}'")))
    }
}

/// Closed-form Lamé solution `u` with source `f = −Δ*u − ω²u`, pressure
/// part `v_p = −∇·u` and shear part `E_s = ∇∧u`.
#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    pub kind: CaseKind,
    pub mode: [u32; 3],
    pub params: MaterialParams,
    pub kappa2: f64,
    pub u: FieldFunction,
    pub f: FieldFunction,
    pub v_p: ScalarFunction,
    pub e_s: FieldFunction,
    /// `ω²` hits one of the case's own eigenvalues.
    pub resonant: bool,
}

struct Trig {
    m: f64,
    n: f64,
    k: f64,
}

impl Trig {
    fn s(&self, x: &Vec3) -> [f64; 3] {
        [(self.m * x.x).sin(), (self.n * x.y).sin(), (self.k * x.z).sin()]
    }

    fn c(&self, x: &Vec3) -> [f64; 3] {
        [(self.m * x.x).cos(), (self.n * x.y).cos(), (self.k * x.z).cos()]
    }
}

pub fn manufactured_case(name: &str, mode: [u32; 3], params: MaterialParams) -> Result<ManufacturedCase> {
    params.validate().map_err(|e| Error::Validation(e.to_string()))?;
    let kind: CaseKind = name.parse()?;
    let [mi, ni, ki] = mode;
    let invalid = |why: &str| Err(Error::Validation(format!("mode {mode:?} invalid for '{name}': {why}")));
    match kind {
        CaseKind::P4 if mi == 0 || ni == 0 || ki == 0 => return invalid("all indices must be positive"),
        CaseKind::S4 | CaseKind::S3 if ki != 0 => return invalid("k must be 0"),
        CaseKind::S4 | CaseKind::S3 | CaseKind::M4 if mi == 0 || ni == 0 => {
            return invalid("m and n must be positive")
        }
        CaseKind::P3 if mi + ni + ki == 0 => return invalid("indices must not all vanish"),
        CaseKind::M3 if ki == 0 => return invalid("k must be positive"),
        _ => {}
    }
    let (m, n, k) = (mi as f64, ni as f64, ki as f64);
    let kappa2 = m * m + n * n + k * k;
    let MaterialParams { lambda, mu, omega } = params;
    let w2 = omega * omega;
    let ap = (lambda + 2.0 * mu) * kappa2 - w2;
    let as_ = mu * kappa2 - w2;
    let lm = lambda + mu;
    let t = Arc::new(Trig { m, n, k });

    macro_rules! field {
        (|$t:ident, $s:ident, $c:ident| $e:expr) => {{
            let $t = t.clone();
            move |x: &Vec3| {
                let $s = $t.s(x);
                let $c = $t.c(x);
                $e
            }
        }};
    }

    let (u, f, v_p, e_s) = match kind {
        CaseKind::P4 => {
            let grad = field!(|t, s, c| Vec3::new(t.m * c[0] * s[1] * s[2], t.n * s[0] * c[1] * s[2], t.k * s[0] * s[1] * c[2]));
            let psi = field!(|_t, s, _c| s[0] * s[1] * s[2]);
            let psi2 = psi.clone();
            let psi3 = psi.clone();
            let g2 = grad.clone();
            let u = FieldFunction::new(grad.clone())
                .with_divergence(move |x| -kappa2 * psi(x))
                .with_curl(|_| Vec3::zeros());
            let f = FieldFunction::new(move |x| g2(x) * ap)
                .with_divergence(move |x| -ap * kappa2 * psi2(x))
                .with_curl(|_| Vec3::zeros());
            (u, f, ScalarFunction::new(move |x| kappa2 * psi3(x)), FieldFunction::zero())
        }
        CaseKind::P3 => {
            let grad = field!(|t, s, c| Vec3::new(-t.m * s[0] * c[1] * c[2], -t.n * c[0] * s[1] * c[2], -t.k * c[0] * c[1] * s[2]));
            let psi = field!(|_t, _s, c| c[0] * c[1] * c[2]);
            let psi2 = psi.clone();
            let psi3 = psi.clone();
            let g2 = grad.clone();
            let u = FieldFunction::new(grad.clone())
                .with_divergence(move |x| -kappa2 * psi(x))
                .with_curl(|_| Vec3::zeros());
            let f = FieldFunction::new(move |x| g2(x) * ap)
                .with_divergence(move |x| -ap * kappa2 * psi2(x))
                .with_curl(|_| Vec3::zeros());
            (u, f, ScalarFunction::new(move |x| kappa2 * psi3(x)), FieldFunction::zero())
        }
        CaseKind::S4 => {
            let val = field!(|_t, s, _c| Vec3::new(0.0, 0.0, s[0] * s[1]));
            let curl = field!(|t, s, c| Vec3::new(t.n * s[0] * c[1], -t.m * c[0] * s[1], 0.0));
            let (v2, c2, c3) = (val.clone(), curl.clone(), curl.clone());
            let u = FieldFunction::new(val).with_divergence(|_| 0.0).with_curl(curl);
            let f = FieldFunction::new(move |x| v2(x) * as_)
                .with_divergence(|_| 0.0)
                .with_curl(move |x| c2(x) * as_);
            let e = FieldFunction::new(c3).with_divergence(|_| 0.0);
            (u, f, ScalarFunction::zero(), e)
        }
        CaseKind::S3 => {
            let val = field!(|t, s, c| Vec3::new(t.n * s[0] * c[1], -t.m * c[0] * s[1], 0.0));
            let curl = field!(|_t, s, _c| Vec3::new(0.0, 0.0, kappa2 * s[0] * s[1]));
            let (v2, c2, c3) = (val.clone(), curl.clone(), curl.clone());
            let u = FieldFunction::new(val).with_divergence(|_| 0.0).with_curl(curl);
            let f = FieldFunction::new(move |x| v2(x) * as_)
                .with_divergence(|_| 0.0)
                .with_curl(move |x| c2(x) * as_);
            let e = FieldFunction::new(c3).with_divergence(|_| 0.0);
            (u, f, ScalarFunction::zero(), e)
        }
        CaseKind::M4 => {
            let val = field!(|_t, s, c| Vec3::new(0.0, 0.0, s[0] * s[1] * c[2]));
            let div = field!(|t, s, _c| -t.k * s[0] * s[1] * s[2]);
            let curl = field!(|t, s, c| Vec3::new(t.n * s[0] * c[1] * c[2], -t.m * c[0] * s[1] * c[2], 0.0));
            let gsss = field!(|t, s, c| Vec3::new(t.m * c[0] * s[1] * s[2], t.n * s[0] * c[1] * s[2], t.k * s[0] * s[1] * c[2]));
            let (v2, d2, d3, c2, c3) = (val.clone(), div.clone(), div.clone(), curl.clone(), curl.clone());
            let u = FieldFunction::new(val).with_divergence(div).with_curl(curl);
            let f = FieldFunction::new(move |x| v2(x) * as_ + gsss(x) * (lm * k))
                .with_divergence(move |x| d2(x) * ((lambda + 2.0 * mu) * kappa2 - w2))
                .with_curl(move |x| c2(x) * as_);
            let e = FieldFunction::new(c3).with_divergence(|_| 0.0);
            (u, f, ScalarFunction::new(move |x| -d3(x)), e)
        }
        CaseKind::M3 => {
            let val = field!(|_t, s, c| Vec3::new(0.0, 0.0, c[0] * c[1] * s[2]));
            let div = field!(|t, _s, c| t.k * c[0] * c[1] * c[2]);
            let curl = field!(|t, s, c| Vec3::new(-t.n * c[0] * s[1] * s[2], t.m * s[0] * c[1] * s[2], 0.0));
            let gccc = field!(|t, s, c| Vec3::new(-t.m * s[0] * c[1] * c[2], -t.n * c[0] * s[1] * c[2], -t.k * c[0] * c[1] * s[2]));
            let (v2, d2, d3, c2, c3) = (val.clone(), div.clone(), div.clone(), curl.clone(), curl.clone());
            let u = FieldFunction::new(val).with_divergence(div).with_curl(curl);
            let f = FieldFunction::new(move |x| v2(x) * as_ - gccc(x) * (lm * k))
                .with_divergence(move |x| d2(x) * ((lambda + 2.0 * mu) * kappa2 - w2))
                .with_curl(move |x| c2(x) * as_);
            let e = FieldFunction::new(c3).with_divergence(|_| 0.0);
            (u, f, ScalarFunction::new(move |x| -d3(x)), e)
        }
    };
    let near = |ev: f64| (w2 - ev).abs() <= RESONANCE_REL_TOL * ev;
    let resonant = (kind.has_pressure() && near((lambda + 2.0 * mu) * kappa2))
        || (kind.has_shear() && near(mu * kappa2));
    Ok(ManufacturedCase {
        kind,
        mode,
        params,
        kappa2,
        u,
        f,
        v_p,
        e_s,
        resonant,
    })
}

const D1: [f64; 9] = [
    1.0 / 280.0,
    -4.0 / 105.0,
    1.0 / 5.0,
    -4.0 / 5.0,
    0.0,
    4.0 / 5.0,
    -1.0 / 5.0,
    4.0 / 105.0,
    -1.0 / 280.0,
];
const D2: [f64; 9] = [
    -1.0 / 560.0,
    8.0 / 315.0,
    -1.0 / 5.0,
    8.0 / 5.0,
    -205.0 / 72.0,
    8.0 / 5.0,
    -1.0 / 5.0,
    8.0 / 315.0,
    -1.0 / 560.0,
];

/// Eighth-order central-difference Hessians `H[c][i][j] = ∂_i∂_j u_c`.
fn fd_hessian(u: &FieldFunction, x: &Vec3, h: f64) -> [[[f64; 3]; 3]; 3] {
    let mut hess = [[[0.0; 3]; 3]; 3];
    let e = |i: usize| Vec3::ith(i, h);
    for i in 0..3 {
        let mut d = Vec3::zeros();
        for (a, w) in D2.iter().enumerate() {
            d += u.value(&(x + e(i) * (a as f64 - 4.0))) * *w;
        }
        for c in 0..3 {
            hess[c][i][i] = d[c] / (h * h);
        }
        for j in (i + 1)..3 {
            let mut d = Vec3::zeros();
            for (a, wa) in D1.iter().enumerate() {
                for (b, wb) in D1.iter().enumerate() {
                    if *wa == 0.0 || *wb == 0.0 {
                        continue;
                    }
                    let p = x + e(i) * (a as f64 - 4.0) + e(j) * (b as f64 - 4.0);
                    d += u.value(&p) * (wa * wb);
                }
            }
            for c in 0..3 {
                hess[c][i][j] = d[c] / (h * h);
                hess[c][j][i] = d[c] / (h * h);
            }
        }
    }
    hess
}

fn random_interior(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::from_fn(|_, _| rng.gen_range(0.05..std::f64::consts::PI - 0.05))
}

/// A seeded random point on a random face of the cube with its outward normal.
fn random_boundary(rng: &mut ChaCha8Rng) -> (Vec3, Vec3) {
    let face = rng.gen_range(0..6);
    let axis = face / 2;
    let high = face % 2 == 1;
    let mut x = Vec3::from_fn(|_, _| rng.gen_range(0.0..std::f64::consts::PI));
    x[axis] = if high { std::f64::consts::PI } else { 0.0 };
    let normal = Vec3::ith(axis, if high { 1.0 } else { -1.0 });
    (x, normal)
}

impl ManufacturedCase {
    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn bc(&self) -> BoundaryKind {
        self.kind.bc()
    }

    /// Largest relative residual `|−Δ*u − ω²u − f|` at `samples` seeded
    /// random interior points, with `Δ*u = μΔu + (λ+μ)∇(∇·u)` taken by
    /// eighth-order finite differences of `u`.
    pub fn residual_audit(&self, samples: usize, seed: u64) -> f64 {
        let MaterialParams { lambda, mu, omega } = self.params;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut worst, mut scale) = (0.0f64, 0.0f64);
        for _ in 0..samples {
            let x = random_interior(&mut rng);
            let hs = fd_hessian(&self.u, &x, 1e-2);
            let lap = Vec3::from_fn(|c, _| hs[c][0][0] + hs[c][1][1] + hs[c][2][2]);
            let grad_div = Vec3::from_fn(|j, _| (0..3).map(|i| hs[i][i][j]).sum());
            let op = -(lap * mu + grad_div * (lambda + mu));
            let u = self.u.value(&x) * (omega * omega);
            let f = self.f.value(&x);
            worst = worst.max((op - u - f).norm());
            scale = scale.max(op.norm()).max(u.norm()).max(f.norm());
        }
        if scale == 0.0 {
            worst
        } else {
            worst / scale
        }
    }

    /// Largest defect of the boundary conditions met by the exact fields at
    /// seeded random boundary points: the essential and natural parts for
    /// `u`, `v_p = 0` (fourth kind) and the trace of `E_s` in its space.
    pub fn boundary_audit(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let (x, n) = random_boundary(&mut rng);
            let u = self.u.value(&x);
            let e = self.e_s.value(&x);
            let div = self.u.divergence(&x).expect("catalog fields carry derivatives");
            let curl = self.u.curl(&x).expect("catalog fields carry derivatives");
            let defects = match self.bc() {
                BoundaryKind::Fourth => [
                    n.cross(&u).norm(),
                    div.abs(),
                    self.v_p.value(&x).abs(),
                    n.dot(&e).abs(),
                ],
                BoundaryKind::Third => [n.dot(&u).abs(), n.cross(&curl).norm(), n.cross(&e).norm(), 0.0],
            };
            worst = defects.iter().fold(worst, |w, d| w.max(*d));
        }
        worst
    }

    /// The case posed on a mesh of the cube.
    pub fn lame_problem(&self, mesh: Arc<Mesh>, order: Order) -> Result<LameProblem> {
        if self.resonant {
            let kappa2 = self.kappa2;
            let p = self.params;
            let omega2 = p.omega * p.omega;
            let nearest = [p.p_modulus() * kappa2, p.mu * kappa2]
                .into_iter()
                .min_by(|a, b| (a - omega2).abs().total_cmp(&(b - omega2).abs()));
            return Err(Error::Resonance {
                shift: omega2,
                nearest_eigenvalue: nearest,
                detail: format!("case '{}' {:?} is resonant at ω² = {omega2}", self.name(), self.mode),
            });
        }
        LameProblem::new(mesh, self.params, self.bc(), self.f.clone(), order)
    }
}

/// Uniform `n³`-cell mesh of `(0,π)³`.
pub fn cube_mesh(n: usize) -> Result<Arc<Mesh>> {
    Ok(Arc::new(generate_box_mesh([n; 3], [std::f64::consts::PI; 3])?))
}

fn tag_case(e: Error, case: &ManufacturedCase, n: usize) -> Error {
    match e {
        Error::Resonance {
            shift,
            nearest_eigenvalue,
            detail,
        } => Error::Resonance {
            shift,
            nearest_eigenvalue,
            detail: format!("case '{}' {:?} at n = {n}: {detail}", case.name(), case.mode),
        },
        other => other,
    }
}

/// Options of the decoupling pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DecouplingOptions {
    /// Maxwell divergence penalty; `None` means `(λ+2μ)/μ`.
    pub penalty: Option<f64>,
    pub settings: SolverSettings,
}

/// Coupled solve against the decoupled Helmholtz and Maxwell solves.
///
/// Relative quantities of `v_p` are scaled by `‖v_p‖`, those of `E_s` by
/// `‖E_s‖`; when one of these vanishes the other is used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecouplingReport {
    pub case: String,
    pub mode: [u32; 3],
    pub bc: BoundaryKind,
    pub order: Order,
    pub n: usize,
    pub u_l2_rel: f64,
    pub u_x_rel: f64,
    pub vp_exact_l2: f64,
    pub es_exact_l2: f64,
    pub vp_coupled_l2: f64,
    pub vp_decoupled_l2: f64,
    pub es_coupled_l2: f64,
    pub es_decoupled_l2: f64,
    /// `‖(−∇·u_h) − v_p,h‖`, relative.
    pub vp_cross_rel: f64,
    pub vp_coupled_rel: f64,
    pub vp_decoupled_rel: f64,
    /// `‖(∇∧u_h) − E_s,h‖`, relative.
    pub es_cross_rel: f64,
    pub es_coupled_rel: f64,
    pub es_decoupled_rel: f64,
    /// Essential constraint defect over `‖u_h‖_{L²(∂Ω)}`.
    pub essential_rel: f64,
    /// `‖∇·u_h‖_{∂Ω}` (fourth) or `‖ν∧(∇∧u_h)‖_{∂Ω}` (third).
    pub natural_l2: f64,
    pub traction_normal_l2: f64,
    pub traction_tangential_l2: f64,
    pub maxwell_div_l2: f64,
    pub lame_iterations: usize,
    pub lame_residual: f64,
    pub helmholtz_iterations: usize,
    pub maxwell_iterations: usize,
}

impl DecouplingReport {
    /// `(metric, value)` pairs in report order.
    pub fn metrics(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("u_l2_rel", self.u_l2_rel),
            ("u_x_rel", self.u_x_rel),
            ("vp_exact_l2", self.vp_exact_l2),
            ("es_exact_l2", self.es_exact_l2),
            ("vp_coupled_l2", self.vp_coupled_l2),
            ("vp_decoupled_l2", self.vp_decoupled_l2),
            ("es_coupled_l2", self.es_coupled_l2),
            ("es_decoupled_l2", self.es_decoupled_l2),
            ("vp_cross_rel", self.vp_cross_rel),
            ("vp_coupled_rel", self.vp_coupled_rel),
            ("vp_decoupled_rel", self.vp_decoupled_rel),
            ("es_cross_rel", self.es_cross_rel),
            ("es_coupled_rel", self.es_coupled_rel),
            ("es_decoupled_rel", self.es_decoupled_rel),
            ("essential_rel", self.essential_rel),
            ("natural_l2", self.natural_l2),
            ("traction_normal_l2", self.traction_normal_l2),
            ("traction_tangential_l2", self.traction_tangential_l2),
            ("maxwell_div_l2", self.maxwell_div_l2),
            ("lame_iterations", self.lame_iterations as f64),
            ("lame_residual", self.lame_residual),
            ("helmholtz_iterations", self.helmholtz_iterations as f64),
            ("maxwell_iterations", self.maxwell_iterations as f64),
        ]
    }
}

pub const REPORT_CSV_HEADER: &str = "case,bc,order,n,metric,value";

/// One row per metric of every report.
pub fn reports_to_csv(reports: &[DecouplingReport]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in reports {
        for (metric, value) in r.metrics() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.16e}",
                r.case,
                r.bc.as_str(),
                r.order.degree(),
                r.n,
                metric,
                value
            );
        }
    }
    out
}

pub fn verify_decoupling(case: &ManufacturedCase, n: usize, order: Order) -> Result<DecouplingReport> {
    verify_decoupling_with(case, n, order, &DecouplingOptions::default())
}

pub fn verify_decoupling_with(
    case: &ManufacturedCase,
    n: usize,
    order: Order,
    opts: &DecouplingOptions,
) -> Result<DecouplingReport> {
    let mesh = cube_mesh(n)?;
    let tag = |e| tag_case(e, case, n);
    let problem = case.lame_problem(mesh.clone(), order).map_err(tag)?;
    let sys = assemble_lame_system(&problem)?;
    let lame = solve_lame_system(&sys, &opts.settings).map_err(tag)?;
    let u = &lame.field;

    let bc = case.bc();
    let hp = HelmholtzProblem::from_lame_source(mesh.clone(), &case.params, bc, &case.f, order)?
        .with_settings(opts.settings);
    let vp = solve_helmholtz(&hp).map_err(tag)?;
    let mp = MaxwellProblem::from_lame_source(mesh, &case.params, bc, &case.f, order, opts.penalty)?
        .with_settings(opts.settings);
    let es = solve_maxwell(&mp).map_err(tag)?;

    let un = norms(u, Some(&case.u))?.error.expect("exact field given");
    let vp_exact = |x: &Vec3| Vec3::new(case.v_p.value(x), 0.0, 0.0);
    let es_exact = |x: &Vec3| case.e_s.value(x);
    let vp_exact_l2 = l2_norm_of(u, vp_exact);
    let es_exact_l2 = l2_norm_of(u, es_exact);
    let vp_scale = if vp_exact_l2 > 0.0 { vp_exact_l2 } else { es_exact_l2 };
    let es_scale = if es_exact_l2 > 0.0 { es_exact_l2 } else { vp_exact_l2 };

    let neg_div = |p: &PointValue| Vec3::new(-p.divergence(), 0.0, 0.0);
    let curl = |p: &PointValue| p.curl();
    let value = |p: &PointValue| p.value;
    let zero = |_: &Vec3| Vec3::zeros();
    let vp_coupled_l2 = l2_distance_to(u, neg_div, zero);
    let vp_decoupled_l2 = l2_distance_to(&vp.field, value, zero);
    let es_coupled_l2 = l2_distance_to(u, curl, zero);
    let es_decoupled_l2 = norms(&es.solution.field, None)?.l2;

    let boundary = boundary_residuals(u, bc)?;
    let tr = traction(u, &case.params)?;
    let essential_rel = if boundary.boundary_l2 > 0.0 {
        boundary.essential / boundary.boundary_l2
    } else {
        boundary.essential
    };
    Ok(DecouplingReport {
        case: case.name().to_string(),
        mode: case.mode,
        bc,
        order,
        n,
        u_l2_rel: un.relative_l2()?,
        u_x_rel: un.relative_x()?,
        vp_exact_l2,
        es_exact_l2,
        vp_coupled_l2,
        vp_decoupled_l2,
        es_coupled_l2,
        es_decoupled_l2,
        vp_cross_rel: l2_distance_by(u, &vp.field, neg_div, value)? / vp_scale,
        vp_coupled_rel: l2_distance_to(u, neg_div, vp_exact) / vp_scale,
        vp_decoupled_rel: l2_distance_to(&vp.field, value, vp_exact) / vp_scale,
        es_cross_rel: l2_distance_by(u, &es.solution.field, curl, value)? / es_scale,
        es_coupled_rel: l2_distance_to(u, curl, es_exact) / es_scale,
        es_decoupled_rel: l2_distance_to(&es.solution.field, value, es_exact) / es_scale,
        essential_rel,
        natural_l2: boundary.natural,
        traction_normal_l2: tr.normal_l2,
        traction_tangential_l2: tr.tangential_l2,
        maxwell_div_l2: es.div_l2,
        lame_iterations: lame.stats.iterations,
        lame_residual: lame.stats.residual,
        helmholtz_iterations: vp.stats.iterations,
        maxwell_iterations: es.solution.stats.iterations,
    })
}

/// One refinement level of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub l2_error: f64,
    pub x_error: f64,
    /// `log₂(e_{l−1}/e_l)`, absent on the coarsest level.
    pub l2_rate: Option<f64>,
    pub x_rate: Option<f64>,
    /// Essential constraint defect over `‖u_h‖_{L²(∂Ω)}`.
    pub essential_rel: f64,
    /// `‖∇·u_h‖_{∂Ω}` (fourth) or `‖ν∧(∇∧u_h)‖_{∂Ω}` (third).
    pub natural_l2: f64,
    pub traction_normal_l2: f64,
    pub traction_tangential_l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub case: String,
    pub mode: [u32; 3],
    pub bc: BoundaryKind,
    pub order: Order,
    pub rows: Vec<ConvergenceRow>,
}

pub const CONVERGENCE_CSV_HEADER: &str =
    "case,order,n,h,l2_error,x_error,l2_rate,x_rate,essential_rel,natural_l2,traction_normal_l2,traction_tangential_l2";

impl ConvergenceStudy {
    pub fn to_csv(&self) -> String {
        let rate = |r: Option<f64>| r.map(|v| format!("{v:.16e}")).unwrap_or_default();
        let mut out = String::from(CONVERGENCE_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.16e},{:.16e},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.case,
                self.order.degree(),
                r.n,
                r.h,
                r.l2_error,
                r.x_error,
                rate(r.l2_rate),
                rate(r.x_rate),
                r.essential_rel,
                r.natural_l2,
                r.traction_normal_l2,
                r.traction_tangential_l2
            );
        }
        out
    }

    /// Rates between the two finest levels.
    pub fn finest_rates(&self) -> Option<(f64, f64)> {
        let last = self.rows.last()?;
        Some((last.l2_rate?, last.x_rate?))
    }
}

/// Errors of `u_h` against the exact field on uniform meshes `n ∈ levels`.
pub fn convergence_study(
    case: &ManufacturedCase,
    levels: &[usize],
    order: Order,
    settings: &SolverSettings,
) -> Result<ConvergenceStudy> {
    if levels.len() < 3 {
        return Err(Error::Validation(format!(
            "a convergence study needs at least 3 levels, got {}",
            levels.len()
        )));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) || levels[0] == 0 {
        return Err(Error::Validation(format!("levels must be positive and increasing: {levels:?}")));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in levels {
        let problem = case.lame_problem(cube_mesh(n)?, order).map_err(|e| tag_case(e, case, n))?;
        let sys = assemble_lame_system(&problem)?;
        let u = solve_lame_system(&sys, settings).map_err(|e| tag_case(e, case, n))?.field;
        let err = norms(&u, Some(&case.u))?.error.expect("exact field given");
        let x_error = err.x.expect("catalog fields carry derivatives");
        let boundary = boundary_residuals(&u, case.bc())?;
        let tr = traction(&u, &case.params)?;
        let h = std::f64::consts::PI / n as f64;
        let rate = |prev: f64, cur: f64, hp: f64| (prev / cur).ln() / (hp / h).ln();
        let (l2_rate, x_rate) = match rows.last() {
            Some(p) => (Some(rate(p.l2_error, err.l2, p.h)), Some(rate(p.x_error, x_error, p.h))),
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            n,
            h,
            l2_error: err.l2,
            x_error,
            l2_rate,
            x_rate,
            essential_rel: if boundary.boundary_l2 > 0.0 {
                boundary.essential / boundary.boundary_l2
            } else {
                boundary.essential
            },
            natural_l2: boundary.natural,
            traction_normal_l2: tr.normal_l2,
            traction_tangential_l2: tr.tangential_l2,
        });
    }
    Ok(ConvergenceStudy {
        case: case.name().to_string(),
        mode: case.mode,
        bc: case.bc(),
        order,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Pressure,
    Shear,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Pressure => "pressure",
            Family::Shear => "shear",
        }
    }
}

/// Eigenvalue of the cube problem: `(λ+2μ)κ²` or `μκ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticEigenvalue {
    pub value: f64,
    pub family: Family,
    pub kappa2: u32,
}

/// Cube eigenvalues up to `max_value`, sorted. Pressure modes are
/// gradients of `sin sin sin` (fourth kind, all indices positive) or
/// `cos cos cos` (third kind, indices not all zero); shear modes need at
/// most one vanishing index for either kind.
pub fn analytic_cube_eigenvalues(bc: BoundaryKind, lambda: f64, mu: f64, max_value: f64) -> Vec<AnalyticEigenvalue> {
    let p = lambda + 2.0 * mu;
    let top = (max_value / mu.min(p)).max(0.0).sqrt() as u32 + 1;
    let mut pressure = std::collections::BTreeSet::new();
    let mut shear = std::collections::BTreeSet::new();
    for m in 0..=top {
        for n in 0..=top {
            for k in 0..=top {
                let zeros = [m, n, k].iter().filter(|&&i| i == 0).count();
                let kappa2 = m * m + n * n + k * k;
                let pressure_ok = match bc {
                    BoundaryKind::Fourth => zeros == 0,
                    BoundaryKind::Third => zeros < 3,
                };
                if pressure_ok && p * kappa2 as f64 <= max_value {
                    pressure.insert(kappa2);
                }
                if zeros <= 1 && mu * kappa2 as f64 <= max_value {
                    shear.insert(kappa2);
                }
            }
        }
    }
    let mut out: Vec<AnalyticEigenvalue> = pressure
        .into_iter()
        .map(|kappa2| AnalyticEigenvalue { value: p * kappa2 as f64, family: Family::Pressure, kappa2 })
        .chain(shear.into_iter().map(|kappa2| AnalyticEigenvalue {
            value: mu * kappa2 as f64,
            family: Family::Shear,
            kappa2,
        }))
        .collect();
    out.sort_by(|a, b| a.value.total_cmp(&b.value).then((a.family as u8).cmp(&(b.family as u8))));
    out
}

/// Nearest discrete eigenvalue found from one scan shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub sigma: f64,
    pub eigenvalue: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceScan {
    pub bc: BoundaryKind,
    pub lambda: f64,
    pub mu: f64,
    pub n: usize,
    pub order: Order,
    pub points: Vec<ScanPoint>,
    /// Distinct eigenvalue estimates, ascending.
    pub clusters: Vec<f64>,
    pub analytic: Vec<AnalyticEigenvalue>,
}

/// Estimates closer than this relative distance are merged.
pub const CLUSTER_REL_TOL: f64 = 1e-5;

/// Merges sorted estimates within [`CLUSTER_REL_TOL`] into their means.
pub fn cluster_values(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    for x in v {
        match out.last_mut() {
            Some((sum, count)) if (x - *sum / *count as f64).abs() <= CLUSTER_REL_TOL * x.abs() => {
                *sum += x;
                *count += 1;
            }
            _ => out.push((x, 1)),
        }
    }
    out.into_iter().map(|(s, c)| s / c as f64).collect()
}

pub const SCAN_CSV_HEADER: &str = "row,sigma,value,residual,analytic,family";

impl ResonanceScan {
    pub fn clusters_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.clusters.iter().copied().filter(|v| (lo..=hi).contains(v)).collect()
    }

    pub fn nearest_analytic(&self, value: f64) -> Option<AnalyticEigenvalue> {
        self.analytic
            .iter()
            .copied()
            .min_by(|a, b| (a.value - value).abs().total_cmp(&(b.value - value).abs()))
    }

    /// Scan points, then clusters with their nearest analytic eigenvalue.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SCAN_CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(out, "point,{:.16e},{:.16e},{:.16e},,", p.sigma, p.eigenvalue, p.residual);
        }
        for &c in &self.clusters {
            match self.nearest_analytic(c) {
                Some(a) => {
                    let _ = writeln!(out, "cluster,,{c:.16e},,{:.16e},{}", a.value, a.family.as_str());
                }
                None => {
                    let _ = writeln!(out, "cluster,,{c:.16e},,,");
                }
            }
        }
        out
    }
}

/// Nearest eigenvalue of the Lamé pencil `(A, M)` for every shift of the
/// grid on the `n³` cube mesh, with the analytic cube eigenvalues up to
/// twice the largest shift.
pub fn resonance_scan(
    bc: BoundaryKind,
    lambda: f64,
    mu: f64,
    sigmas: &[f64],
    n: usize,
    order: Order,
) -> Result<ResonanceScan> {
    if sigmas.is_empty() || sigmas.iter().any(|s| !s.is_finite()) {
        return Err(Error::Validation("the scan grid must be finite and nonempty".into()));
    }
    let params = MaterialParams::new(lambda, mu, 1.0).map_err(|e| Error::Validation(e.to_string()))?;
    let problem = LameProblem::new(cube_mesh(n)?, params, bc, FieldFunction::zero(), order)?;
    let sys = assemble_lame_system(&problem)?;
    let opts = LanczosOptions {
        inner_tol: 1e-9,
        ..LanczosOptions::default()
    };
    let mut points = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let pair = eigenpairs_near(&sys.stiffness, &sys.mass, sigma, 1, &opts)?
            .into_iter()
            .next()
            .ok_or(Error::NotConverged { iterations: 0, residual: f64::INFINITY })?;
        points.push(ScanPoint {
            sigma,
            eigenvalue: pair.value,
            residual: pair.residual,
        });
    }
    let clusters = cluster_values(&points.iter().map(|p| p.eigenvalue).collect::<Vec<_>>());
    let top = sigmas.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    Ok(ResonanceScan {
        bc,
        lambda,
        mu,
        n,
        order,
        points,
        clusters,
        analytic: analytic_cube_eigenvalues(bc, lambda, mu, 2.0 * top.max(1.0)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> MaterialParams {
        MaterialParams::new(2.0, 1.0, 1.0).unwrap()
    }

    fn catalog() -> Vec<ManufacturedCase> {
        vec![
            manufactured_case("p4", [1, 1, 1], params()).unwrap(),
            manufactured_case("p4", [1, 2, 1], params()).unwrap(),
            manufactured_case("s4", [1, 1, 0], params()).unwrap(),
            manufactured_case("s4", [2, 1, 0], params()).unwrap(),
            manufactured_case("m4", [1, 1, 1], params()).unwrap(),
            manufactured_case("m4", [1, 2, 2], params()).unwrap(),
            manufactured_case("p3", [1, 1, 1], params()).unwrap(),
            manufactured_case("p3", [1, 0, 2], params()).unwrap(),
            manufactured_case("s3", [1, 1, 0], params()).unwrap(),
            manufactured_case("m3", [1, 1, 1], params()).unwrap(),
            manufactured_case("m3", [2, 0, 1], params()).unwrap(),
        ]
    }

    #[test]
    fn every_case_passes_the_residual_audit() {
        for c in catalog() {
            let r = c.residual_audit(100, 7);
            assert!(r <= 1e-8, "{} {:?}: {r}", c.name(), c.mode);
        }
    }

    #[test]
    fn wrong_source_fails_the_residual_audit() {
        let mut c = manufactured_case("m4", [1, 1, 1], params()).unwrap();
        c.f = c.f.scaled(1.01);
        assert!(c.residual_audit(20, 7) > 1e-4);
    }

    #[test]
    fn every_case_meets_its_boundary_conditions() {
        for c in catalog() {
            let d = c.boundary_audit(200, 11);
            assert!(d <= 1e-10, "{} {:?}: {d}", c.name(), c.mode);
        }
    }

    #[test]
    fn derivative_callbacks_match_differences() {
        let lo = Vec3::repeat(0.1);
        let hi = Vec3::repeat(3.0);
        for c in catalog() {
            for (what, f) in [("u", &c.u), ("f", &c.f), ("E_s", &c.e_s)] {
                let a = f.derivative_audit(lo, hi, 20, 3);
                assert!(a <= 1e-7, "{} {what}: {a}", c.name());
            }
        }
    }

    #[test]
    fn pressure_and_shear_parts() {
        let x = Vec3::new(0.3, 1.1, 2.2);
        for c in catalog() {
            let div = c.u.divergence(&x).unwrap();
            assert!((c.v_p.value(&x) + div).abs() < 1e-13);
            assert!((c.e_s.value(&x) - c.u.curl(&x).unwrap()).norm() < 1e-13);
        }
    }

    #[test]
    fn catalog_examples() {
        let x = Vec3::new(0.4, 0.9, 2.5);
        let p4 = manufactured_case("p4", [1, 1, 1], params()).unwrap();
        assert!((p4.f.value(&x) - p4.u.value(&x) * 11.0).norm() < 1e-13);
        let s4 = manufactured_case("s4", [1, 1, 0], params()).unwrap();
        assert!((s4.f.value(&x) - s4.u.value(&x)).norm() < 1e-15);
        assert!(!p4.resonant && !s4.resonant);
    }

    #[test]
    fn resonant_case_is_flagged_and_rejected() {
        let p = MaterialParams::new(2.0, 1.0, 12f64.sqrt()).unwrap();
        let c = manufactured_case("p4", [1, 1, 1], p).unwrap();
        assert!(c.resonant);
        assert!(c.f.value(&Vec3::new(0.3, 0.4, 0.5)).norm() < 1e-13);
        assert!(matches!(
            c.lame_problem(cube_mesh(1).unwrap(), Order::P1),
            Err(Error::Resonance { .. })
        ));
        let shear = manufactured_case("s4", [1, 1, 0], MaterialParams::new(2.0, 1.0, 2f64.sqrt()).unwrap()).unwrap();
        assert!(shear.resonant);
    }

    #[test]
    fn invalid_cases_rejected() {
        assert!(manufactured_case("q4", [1, 1, 1], params()).is_err());
        assert!(manufactured_case("p4", [0, 1, 1], params()).is_err());
        assert!(manufactured_case("s4", [1, 1, 1], params()).is_err());
        assert!(manufactured_case("p3", [0, 0, 0], params()).is_err());
        assert!(manufactured_case("m3", [1, 1, 0], params()).is_err());
        let bad = MaterialParams { lambda: 1.0, mu: 0.0, omega: 1.0 };
        assert!(matches!(manufactured_case("p4", [1, 1, 1], bad), Err(Error::Validation(_))));
    }

    #[test]
    fn analytic_spectrum_of_the_cube() {
        let ev = analytic_cube_eigenvalues(BoundaryKind::Fourth, 2.0, 1.0, 13.0);
        let shear: Vec<f64> = ev.iter().filter(|e| e.family == Family::Shear).map(|e| e.value).collect();
        let pressure: Vec<f64> = ev.iter().filter(|e| e.family == Family::Pressure).map(|e| e.value).collect();
        assert_eq!(shear, vec![2.0, 3.0, 5.0, 6.0, 8.0, 9.0, 10.0, 11.0, 12.0, 13.0]);
        assert_eq!(pressure, vec![12.0]);
        assert!(!ev.iter().any(|e| (6.5..=7.5).contains(&e.value)));
        let third = analytic_cube_eigenvalues(BoundaryKind::Third, 2.0, 1.0, 8.0);
        let p3: Vec<f64> = third.iter().filter(|e| e.family == Family::Pressure).map(|e| e.value).collect();
        assert_eq!(p3, vec![4.0, 8.0]);
    }

    #[test]
    fn clustering() {
        assert_eq!(cluster_values(&[2.0, 12.0, 2.0000001, 11.0]).len(), 3);
        assert!(cluster_values(&[]).is_empty());
    }

    #[test]
    fn coarse_decoupling_report_is_finite() {
        let c = manufactured_case("p4", [1, 1, 1], params()).unwrap();
        let r = verify_decoupling(&c, 2, Order::P1).unwrap();
        for (name, v) in r.metrics() {
            assert!(v.is_finite() && v >= 0.0, "{name}: {v}");
        }
        let csv = reports_to_csv(&[r.clone()]);
        assert_eq!(csv.lines().next(), Some(REPORT_CSV_HEADER));
        assert_eq!(csv.lines().count(), 1 + r.metrics().len());
    }

    #[test]
    fn convergence_study_needs_three_levels() {
        let c = manufactured_case("p4", [1, 1, 1], params()).unwrap();
        let s = SolverSettings::default();
        assert!(convergence_study(&c, &[2, 4], Order::P1, &s).is_err());
        assert!(convergence_study(&c, &[4, 2, 8], Order::P1, &s).is_err());
    }

    #[test]
    fn p1_convergence_table() {
        let c = manufactured_case("p4", [1, 1, 1], params()).unwrap();
        let study = convergence_study(&c, &[1, 2, 4], Order::P1, &SolverSettings::default()).unwrap();
        assert!(study.rows[0].l2_rate.is_none());
        assert!(study.rows.windows(2).all(|w| w[1].l2_error < w[0].l2_error));
        let csv = study.to_csv();
        assert_eq!(csv.lines().next(), Some(CONVERGENCE_CSV_HEADER));
        assert_eq!(csv.lines().count(), 4);
    }
}
