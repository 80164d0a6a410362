use std::sync::Arc;

use nalgebra::Matrix3;

use super::assembly::{assemble_matrix, FormKind, ReferenceBasis};
use super::dofmap::{build_dofmap, Constraint, DofMap, ValueKind};
use super::function::{FieldFunction, ScalarFunction};
use super::shape::{shape, Order};
use crate::linalg::{solve_spd, SolveStats};
use crate::{Error, Result, Vec3};

/// Coefficients over the free DOFs of a [`DofMap`]; constrained slots are
/// zero in their node frames.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    dofmap: Arc<DofMap>,
    coeffs: Vec<f64>,
    nodal: Vec<f64>,
}

/// Value and gradient of a field at a point. For scalar fields only the
/// first component / first row is meaningful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValue {
    pub value: Vec3,
    /// `gradient[(i, j)] = ∂u_i/∂x_j`.
    pub gradient: Matrix3<f64>,
}

impl PointValue {
    pub fn divergence(&self) -> f64 {
        self.gradient.trace()
    }

    pub fn curl(&self) -> Vec3 {
        let g = &self.gradient;
        Vec3::new(g[(2, 1)] - g[(1, 2)], g[(0, 2)] - g[(2, 0)], g[(1, 0)] - g[(0, 1)])
    }
}

impl DiscreteField {
    pub fn new(dofmap: Arc<DofMap>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != dofmap.n_free() {
            return Err(Error::InvalidInput(format!(
                "{} coefficients for a space with {} free DOFs",
                coeffs.len(),
                dofmap.n_free()
            )));
        }
        let nodal = dofmap.expand(&coeffs);
        Ok(DiscreteField {
            dofmap,
            coeffs,
            nodal,
        })
    }

    pub fn zeros(dofmap: Arc<DofMap>) -> Self {
        let n = dofmap.n_free();
        DiscreteField::new(dofmap, vec![0.0; n]).expect("length matches")
    }

    pub fn dofmap(&self) -> &Arc<DofMap> {
        &self.dofmap
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_vector(&self) -> bool {
        self.dofmap.value_kind() == ValueKind::Vector3
    }

    /// Cartesian value at a node.
    pub fn node_value(&self, node: usize) -> Vec3 {
        if self.is_vector() {
            Vec3::new(self.nodal[3 * node], self.nodal[3 * node + 1], self.nodal[3 * node + 2])
        } else {
            Vec3::new(self.nodal[node], 0.0, 0.0)
        }
    }

    /// Values at the mesh vertices (the first `n_vertices` nodes).
    pub fn vertex_values(&self) -> Vec<Vec3> {
        (0..self.dofmap.mesh().n_vertices())
            .map(|v| self.node_value(v))
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.nodal.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Value and gradient inside element `t` at reference point `xi`.
    pub fn eval_in_element(&self, t: usize, xi: [f64; 3]) -> PointValue {
        let s = shape(self.dofmap.order(), xi);
        let geo = self.dofmap.geometry(t);
        let mut value = Vec3::zeros();
        let mut gradient = Matrix3::zeros();
        for (a, &node) in self.dofmap.element_nodes(t).iter().enumerate() {
            let u = self.node_value(node);
            let g = geo.gradient(s.gradients[a]);
            value += u * s.values[a];
            gradient += u * g.transpose();
        }
        PointValue { value, gradient }
    }

    /// Point evaluation by element search.
    pub fn eval(&self, x: &Vec3) -> Result<PointValue> {
        let tol = 1e-12;
        for t in 0..self.dofmap.n_elements() {
            let xi = self.dofmap.geometry(t).to_reference(x);
            let l0 = 1.0 - xi[0] - xi[1] - xi[2];
            if xi.iter().all(|&c| c >= -tol) && l0 >= -tol {
                return Ok(self.eval_in_element(t, xi));
            }
        }
        Err(Error::Geometry(format!("point {x:?} lies outside the mesh")))
    }

    pub fn scaled(&self, c: f64) -> DiscreteField {
        DiscreteField::new(self.dofmap.clone(), self.coeffs.iter().map(|v| c * v).collect())
            .expect("same space")
    }
}

fn nodal_interpolant(dm: Arc<DofMap>, value: impl Fn(&Vec3) -> Vec3) -> Result<DiscreteField> {
    let nc = dm.components();
    let mut nodal = vec![0.0; dm.n_nodes() * nc];
    for node in 0..dm.n_nodes() {
        let v = value(&dm.node_point(node));
        for c in 0..nc {
            nodal[node * nc + c] = v[c];
        }
    }
    let coeffs = dm.restrict(&nodal);
    DiscreteField::new(dm, coeffs)
}

/// Nodal interpolant of a vector field; components along constrained frame
/// axes are dropped.
pub fn interpolate(dm: Arc<DofMap>, f: &FieldFunction) -> Result<DiscreteField> {
    if dm.value_kind() != ValueKind::Vector3 {
        return Err(Error::InvalidInput("vector interpolation into a scalar space".into()));
    }
    nodal_interpolant(dm, |x| f.value(x))
}

pub fn interpolate_scalar(dm: Arc<DofMap>, f: &ScalarFunction) -> Result<DiscreteField> {
    if dm.value_kind() != ValueKind::Scalar {
        return Err(Error::InvalidInput("scalar interpolation into a vector space".into()));
    }
    nodal_interpolant(dm, |x| Vec3::new(f.value(x), 0.0, 0.0))
}

/// L² projection onto unconstrained continuous P1 of an element-wise
/// quantity evaluated at the volume quadrature points.
fn project_p1(
    u: &DiscreteField,
    kind: ValueKind,
    quantity: impl Fn(&PointValue) -> Vec3,
) -> Result<(DiscreteField, SolveStats)> {
    let target = Arc::new(build_dofmap(u.dofmap().mesh().clone(), Order::P1, kind, Constraint::None)?);
    let mass = assemble_matrix(&target, FormKind::Mass)?;
    let basis = ReferenceBasis::new(u.dofmap());
    let p1 = ReferenceBasis::new(&target);
    let nc = kind.components();
    let mut rhs = vec![0.0; target.n_free()];
    for t in 0..target.n_elements() {
        let det = target.geometry(t).det;
        let nodes = target.element_nodes(t);
        for (q, xi) in basis.xi.iter().enumerate() {
            let w = basis.weights[q] * det;
            let v = quantity(&u.eval_in_element(t, *xi));
            for (a, &node) in nodes.iter().enumerate() {
                let phi = p1.shapes[q].values[a];
                for c in 0..nc {
                    let i = target.dof(node, c).expect("unconstrained space");
                    rhs[i] += w * phi * v[c];
                }
            }
        }
    }
    let (coeffs, stats) = solve_spd(&mass, &rhs, 1e-12, 10 * target.n_free() + 100)?;
    Ok((DiscreteField::new(target, coeffs)?, stats))
}

/// `∇·u_h` projected onto continuous P1.
pub fn field_div(u: &DiscreteField) -> Result<DiscreteField> {
    if !u.is_vector() {
        return Err(Error::InvalidInput("divergence of a scalar field".into()));
    }
    Ok(project_p1(u, ValueKind::Scalar, |p| Vec3::new(p.divergence(), 0.0, 0.0))?.0)
}

/// `∇∧u_h` projected onto continuous vector P1.
pub fn field_curl(u: &DiscreteField) -> Result<DiscreteField> {
    if !u.is_vector() {
        return Err(Error::InvalidInput("curl of a scalar field".into()));
    }
    Ok(project_p1(u, ValueKind::Vector3, |p| p.curl())?.0)
}

/// Element-wise raw derivative values are exposed for norms through
/// [`DiscreteField::eval_in_element`]; this helper lists the quadrature
/// points of element `t` with weights.
pub(crate) fn element_quadrature(dm: &DofMap, basis: &ReferenceBasis, t: usize) -> Vec<([f64; 3], Vec3, f64)> {
    let geo = dm.geometry(t);
    basis
        .xi
        .iter()
        .zip(&basis.weights)
        .map(|(xi, w)| (*xi, geo.map(*xi), w * geo.det))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_box_mesh, Mesh};

    fn cube(n: usize) -> Arc<Mesh> {
        Arc::new(generate_box_mesh([n; 3], [1.0; 3]).unwrap())
    }

    fn space(n: usize, order: Order, constraint: Constraint) -> Arc<DofMap> {
        Arc::new(build_dofmap(cube(n), order, ValueKind::Vector3, constraint).unwrap())
    }

    #[test]
    fn divergence_of_identity_is_three() {
        let u = interpolate(space(2, Order::P1, Constraint::None), &FieldFunction::new(|x| *x)).unwrap();
        let d = field_div(&u).unwrap();
        for v in d.vertex_values() {
            assert!((v.x - 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn curl_of_rotation() {
        let u = interpolate(
            space(2, Order::P1, Constraint::None),
            &FieldFunction::new(|x| Vec3::new(-x.y, x.x, 0.0)),
        )
        .unwrap();
        let c = field_curl(&u).unwrap();
        for v in c.vertex_values() {
            assert!((v - Vec3::new(0.0, 0.0, 2.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        let u = interpolate(space(2, Order::P2, Constraint::None), &FieldFunction::new(|x| *x)).unwrap();
        let c = field_curl(&u).unwrap();
        assert!(c.max_abs() < 1e-10);
    }

    #[test]
    fn point_evaluation_reproduces_quadratics() {
        let f = FieldFunction::new(|x| Vec3::new(x.x * x.y, x.z * x.z, 1.0 - x.x));
        let u = interpolate(space(2, Order::P2, Constraint::None), &f).unwrap();
        let x = Vec3::new(0.31, 0.77, 0.45);
        let p = u.eval(&x).unwrap();
        assert!((p.value - f.value(&x)).norm() < 1e-13);
        assert!((p.gradient[(0, 1)] - x.x).abs() < 1e-12);
        assert!((p.gradient[(1, 2)] - 2.0 * x.z).abs() < 1e-12);
        assert!(u.eval(&Vec3::new(2.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn constrained_traces_vanish() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for constraint in [Constraint::TangentialZero, Constraint::NormalZero] {
            let dm = space(2, Order::P2, constraint);
            let coeffs: Vec<f64> = (0..dm.n_free()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let u = DiscreteField::new(dm.clone(), coeffs).unwrap();
            let scale = u.max_abs();
            for bp in crate::fem::assembly::boundary_points(&dm) {
                let v = u.eval_in_element(bp.tet, bp.xi).value;
                let defect = match constraint {
                    Constraint::TangentialZero => bp.normal.cross(&v).norm(),
                    _ => bp.normal.dot(&v).abs(),
                };
                assert!(defect <= 1e-10 * scale, "{constraint:?}: {defect}");
            }
        }
    }
}
