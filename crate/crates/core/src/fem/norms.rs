use std::sync::Arc;

use super::assembly::ReferenceBasis;
use super::field::{element_quadrature, DiscreteField, PointValue};
use super::function::{FieldFunction, ScalarFunction};
use crate::{Error, Result, Vec3};

/// Norms of a discrete vector field, `‖v‖_X = (‖v‖² + ‖∇∧v‖² + ‖∇·v‖²)^½`,
/// with derivatives taken element-wise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldNorms {
    pub l2: f64,
    pub curl_l2: f64,
    pub div_l2: f64,
    pub x_norm: f64,
    pub error: Option<ErrorNorms>,
}

/// Error against an exact field, with the exact field's own norms from the
/// same quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    /// `None` when the exact field lacks a divergence or curl.
    pub x: Option<f64>,
    pub exact_l2: f64,
    pub exact_x: Option<f64>,
}

impl ErrorNorms {
    pub fn relative_l2(&self) -> Result<f64> {
        relative(self.l2, self.exact_l2)
    }

    pub fn relative_x(&self) -> Result<f64> {
        match (self.x, self.exact_x) {
            (Some(e), Some(n)) => relative(e, n),
            _ => Err(Error::InvalidInput(
                "X-norm error needs the exact divergence and curl".into(),
            )),
        }
    }
}

fn relative(err: f64, norm: f64) -> Result<f64> {
    if norm == 0.0 {
        return Err(Error::InvalidInput(
            "relative error against an exact field of zero norm".into(),
        ));
    }
    Ok(err / norm)
}

/// Calls `visit(t, xi, x, weight)` for every volume quadrature point.
fn for_each_point(u: &DiscreteField, mut visit: impl FnMut(usize, [f64; 3], Vec3, f64)) {
    let dm = u.dofmap();
    let basis = ReferenceBasis::new(dm);
    for t in 0..dm.n_elements() {
        for (xi, x, w) in element_quadrature(dm, &basis, t) {
            visit(t, xi, x, w);
        }
    }
}

pub fn norms(u: &DiscreteField, exact: Option<&FieldFunction>) -> Result<FieldNorms> {
    if !u.is_vector() {
        return Err(Error::InvalidInput("vector norms of a scalar field".into()));
    }
    let with_derivs = exact.is_some_and(|f| f.has_divergence() && f.has_curl());
    let mut s = [0.0f64; 3];
    let mut e = [0.0f64; 3];
    let mut n = [0.0f64; 3];
    let mut failure = None;
    for_each_point(u, |t, xi, x, w| {
        let p = u.eval_in_element(t, xi);
        let (div, curl) = (p.divergence(), p.curl());
        s[0] += w * p.value.norm_squared();
        s[1] += w * curl.norm_squared();
        s[2] += w * div * div;
        if let Some(f) = exact {
            let v = f.value(&x);
            e[0] += w * (p.value - v).norm_squared();
            n[0] += w * v.norm_squared();
            if with_derivs {
                match (f.divergence(&x), f.curl(&x)) {
                    (Ok(fd), Ok(fc)) => {
                        e[1] += w * (curl - fc).norm_squared();
                        e[2] += w * (div - fd) * (div - fd);
                        n[1] += w * fc.norm_squared();
                        n[2] += w * fd * fd;
                    }
                    (Err(err), _) | (_, Err(err)) => failure = Some(err),
                }
            }
        }
    });
    if let Some(err) = failure {
        return Err(err);
    }
    let error = exact.map(|_| ErrorNorms {
        l2: e[0].sqrt(),
        x: with_derivs.then(|| (e[0] + e[1] + e[2]).sqrt()),
        exact_l2: n[0].sqrt(),
        exact_x: with_derivs.then(|| (n[0] + n[1] + n[2]).sqrt()),
    });
    Ok(FieldNorms {
        l2: s[0].sqrt(),
        curl_l2: s[1].sqrt(),
        div_l2: s[2].sqrt(),
        x_norm: (s[0] + s[1] + s[2]).sqrt(),
        error,
    })
}

/// Norms of a discrete scalar field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarNorms {
    pub l2: f64,
    /// `‖∇v‖`.
    pub grad_l2: f64,
    /// `(‖v − g‖, ‖g‖)` against the exact field.
    pub error: Option<(f64, f64)>,
}

impl ScalarNorms {
    pub fn relative_l2(&self) -> Result<f64> {
        match self.error {
            Some((e, n)) => relative(e, n),
            None => Err(Error::InvalidInput("no exact field given".into())),
        }
    }
}

pub fn scalar_norms(v: &DiscreteField, exact: Option<&ScalarFunction>) -> Result<ScalarNorms> {
    if v.is_vector() {
        return Err(Error::InvalidInput("scalar norms of a vector field".into()));
    }
    let (mut l2, mut grad, mut err, mut nrm) = (0.0, 0.0, 0.0, 0.0);
    for_each_point(v, |t, xi, x, w| {
        let p = v.eval_in_element(t, xi);
        l2 += w * p.value.x * p.value.x;
        let g = Vec3::new(p.gradient[(0, 0)], p.gradient[(0, 1)], p.gradient[(0, 2)]);
        grad += w * g.norm_squared();
        if let Some(f) = exact {
            let fx = f.value(&x);
            err += w * (p.value.x - fx) * (p.value.x - fx);
            nrm += w * fx * fx;
        }
    });
    Ok(ScalarNorms {
        l2: l2.sqrt(),
        grad_l2: grad.sqrt(),
        error: exact.map(|_| (err.sqrt(), nrm.sqrt())),
    })
}

/// `‖q(a) − q(b)‖_{L²}` for fields on the same mesh, where `q` picks a
/// quantity (value, divergence, curl, ...) from each point evaluation.
pub fn l2_distance_by(
    a: &DiscreteField,
    b: &DiscreteField,
    qa: impl Fn(&PointValue) -> Vec3,
    qb: impl Fn(&PointValue) -> Vec3,
) -> Result<f64> {
    if !Arc::ptr_eq(a.dofmap().mesh(), b.dofmap().mesh()) && a.dofmap().mesh().as_ref() != b.dofmap().mesh().as_ref() {
        return Err(Error::InvalidInput("fields live on different meshes".into()));
    }
    let mut s = 0.0;
    for_each_point(a, |t, xi, _, w| {
        let d = qa(&a.eval_in_element(t, xi)) - qb(&b.eval_in_element(t, xi));
        s += w * d.norm_squared();
    });
    Ok(s.sqrt())
}

/// `‖a − b‖_{L²}` for two fields of the same value kind on one mesh.
pub fn l2_distance(a: &DiscreteField, b: &DiscreteField) -> Result<f64> {
    if a.is_vector() != b.is_vector() {
        return Err(Error::InvalidInput("fields differ in value kind".into()));
    }
    l2_distance_by(a, b, |p| p.value, |p| p.value)
}

/// `‖q(a) − g‖_{L²}` against an analytic vector function.
pub fn l2_distance_to(a: &DiscreteField, q: impl Fn(&PointValue) -> Vec3, g: impl Fn(&Vec3) -> Vec3) -> f64 {
    let mut s = 0.0;
    for_each_point(a, |t, xi, x, w| {
        s += w * (q(&a.eval_in_element(t, xi)) - g(&x)).norm_squared();
    });
    s.sqrt()
}

/// `‖g‖_{L²}` of an analytic vector function by the same quadrature as
/// the field `a` lives on.
pub fn l2_norm_of(a: &DiscreteField, g: impl Fn(&Vec3) -> Vec3) -> f64 {
    let mut s = 0.0;
    for_each_point(a, |_, _, x, w| s += w * g(&x).norm_squared());
    s.sqrt()
}
