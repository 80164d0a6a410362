use serde::{Deserialize, Serialize};

use super::dofmap::{DofMap, ValueKind};
use super::function::{FieldFunction, ScalarFunction};
use super::quadrature::{tet_rule, tri_rule};
use super::shape::{shape, Shape};
use crate::linalg::{csr_from_triplets, SparseSym};
use crate::{Error, Result, Vec3};

/// Bilinear forms available to [`assemble_matrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    /// `(u, v)`.
    Mass,
    /// `(∇·u, ∇·v)`.
    DivDiv,
    /// `(∇∧u, ∇∧v)`.
    CurlCurl,
    /// `(∇u, ∇v)`, componentwise for vector spaces.
    GradGrad,
}

/// Reference basis at the volume quadrature points.
pub(crate) struct ReferenceBasis {
    pub weights: Vec<f64>,
    pub xi: Vec<[f64; 3]>,
    pub shapes: Vec<Shape>,
}

impl ReferenceBasis {
    pub fn new(dm: &DofMap) -> Self {
        let rule = tet_rule();
        ReferenceBasis {
            weights: rule.iter().map(|p| p.weight).collect(),
            xi: rule.iter().map(|p| p.xi()).collect(),
            shapes: rule.iter().map(|p| shape(dm.order(), p.xi())).collect(),
        }
    }
}

/// Physical basis gradients of element `t` at every quadrature point.
pub(crate) fn physical_gradients(dm: &DofMap, basis: &ReferenceBasis, t: usize) -> Vec<Vec<Vec3>> {
    let geo = dm.geometry(t);
    basis
        .shapes
        .iter()
        .map(|s| s.gradients.iter().map(|g| geo.gradient(*g)).collect())
        .collect()
}

/// Symmetric local matrix in Cartesian components, `(node·ncomp + i)`.
fn local_matrix(
    dm: &DofMap,
    basis: &ReferenceBasis,
    t: usize,
    kind: FormKind,
    out: &mut [f64],
) {
    let nl = dm.n_local();
    let nc = dm.components();
    let size = nl * nc;
    out.iter_mut().for_each(|v| *v = 0.0);
    let det = dm.geometry(t).det;
    let grads = physical_gradients(dm, basis, t);
    for (q, s) in basis.shapes.iter().enumerate() {
        let w = basis.weights[q] * det;
        let g = &grads[q];
        for p in 0..size {
            let (a, i) = (p / nc, p % nc);
            for r in p..size {
                let (b, j) = (r / nc, r % nc);
                let v = match kind {
                    FormKind::Mass => {
                        if i == j {
                            s.values[a] * s.values[b]
                        } else {
                            0.0
                        }
                    }
                    FormKind::GradGrad => {
                        if i == j {
                            g[a].dot(&g[b])
                        } else {
                            0.0
                        }
                    }
                    FormKind::DivDiv => g[a][i] * g[b][j],
                    FormKind::CurlCurl => {
                        let d = if i == j { g[a].dot(&g[b]) } else { 0.0 };
                        d - g[a][j] * g[b][i]
                    }
                };
                out[p * size + r] += w * v;
            }
        }
    }
    for p in 0..size {
        for r in 0..p {
            out[p * size + r] = out[r * size + p];
        }
    }
}

/// Rotates the node blocks of a Cartesian local matrix into the node frames
/// and emits the free upper-triangle entries together with their mirrors.
fn emit(dm: &DofMap, t: usize, local: &[f64], triplets: &mut Vec<(usize, usize, f64)>) {
    let nodes = dm.element_nodes(t);
    let nl = nodes.len();
    let nc = dm.components();
    let size = nl * nc;
    let mut rotated = vec![0.0; size * size];
    if nc == 1 {
        rotated.copy_from_slice(local);
    } else {
        for a in 0..nl {
            let fa = dm.frame(nodes[a]);
            for b in a..nl {
                let fb = dm.frame(nodes[b]);
                for c in 0..3 {
                    for d in 0..3 {
                        let mut v = 0.0;
                        for i in 0..3 {
                            let mut row = 0.0;
                            for j in 0..3 {
                                row += local[(3 * a + i) * size + 3 * b + j] * fb[d][j];
                            }
                            v += fa[c][i] * row;
                        }
                        rotated[(3 * a + c) * size + 3 * b + d] = v;
                    }
                }
            }
        }
    }
    for p in 0..size {
        let Some(i) = dm.dof(nodes[p / nc], p % nc) else { continue };
        // Within a diagonal node block only r ≥ p is computed; across blocks
        // the full a < b block is.
        let r_start = if nc == 1 { p } else { (p / nc) * nc };
        for r in r_start..size {
            if r / nc == p / nc && r < p {
                continue;
            }
            let Some(j) = dm.dof(nodes[r / nc], r % nc) else { continue };
            let v = rotated[p * size + r];
            if v == 0.0 {
                continue;
            }
            triplets.push((i, j, v));
            if i != j {
                triplets.push((j, i, v));
            }
        }
    }
}

/// Assembles a bilinear form over the free DOFs of `dm`.
pub fn assemble_matrix(dm: &DofMap, kind: FormKind) -> Result<SparseSym> {
    if matches!(kind, FormKind::DivDiv | FormKind::CurlCurl) && dm.value_kind() != ValueKind::Vector3 {
        return Err(Error::InvalidInput(format!(
            "{kind:?} needs a vector-valued space"
        )));
    }
    let basis = ReferenceBasis::new(dm);
    let size = dm.n_local() * dm.components();
    let mut local = vec![0.0; size * size];
    let mut triplets = Vec::with_capacity(dm.n_elements() * size * (size + 1));
    for t in 0..dm.n_elements() {
        local_matrix(dm, &basis, t, kind, &mut local);
        emit(dm, t, &local, &mut triplets);
    }
    csr_from_triplets(dm.n_free(), &triplets)
}

/// Adds Cartesian nodal contributions of element `t` to the free load vector.
fn scatter_load(dm: &DofMap, t: usize, local: &[Vec3], b: &mut [f64]) {
    let nodes = dm.element_nodes(t);
    for (a, &node) in nodes.iter().enumerate() {
        if dm.components() == 1 {
            if let Some(i) = dm.dof(node, 0) {
                b[i] += local[a].x;
            }
            continue;
        }
        let frame = dm.frame(node);
        for c in 0..3 {
            if let Some(i) = dm.dof(node, c) {
                b[i] += frame[c].dot(&local[a]);
            }
        }
    }
}

fn volume_load(dm: &DofMap, value: impl Fn(&Vec3) -> Vec3) -> Vec<f64> {
    let basis = ReferenceBasis::new(dm);
    let mut b = vec![0.0; dm.n_free()];
    let mut local = vec![Vec3::zeros(); dm.n_local()];
    for t in 0..dm.n_elements() {
        let geo = dm.geometry(t);
        local.iter_mut().for_each(|v| *v = Vec3::zeros());
        for (q, s) in basis.shapes.iter().enumerate() {
            let f = value(&geo.map(basis.xi[q])) * (basis.weights[q] * geo.det);
            for (a, phi) in s.values.iter().enumerate() {
                local[a] += f * *phi;
            }
        }
        scatter_load(dm, t, &local, &mut b);
    }
    b
}

/// `bᵢ = ∫ f·φᵢ` over the free DOFs of a vector space.
pub fn assemble_load(dm: &DofMap, f: &FieldFunction) -> Result<Vec<f64>> {
    if dm.value_kind() != ValueKind::Vector3 {
        return Err(Error::InvalidInput("vector load on a scalar space".into()));
    }
    Ok(volume_load(dm, |x| f.value(x)))
}

/// `bᵢ = ∫ g φᵢ` over the free DOFs of a scalar space.
pub fn assemble_scalar_load(dm: &DofMap, g: &ScalarFunction) -> Result<Vec<f64>> {
    if dm.value_kind() != ValueKind::Scalar {
        return Err(Error::InvalidInput("scalar load on a vector space".into()));
    }
    Ok(volume_load(dm, |x| Vec3::new(g.value(x), 0.0, 0.0)))
}

/// A quadrature point on a boundary facet.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryPoint {
    pub facet: usize,
    pub tet: usize,
    pub label: i32,
    pub x: Vec3,
    /// Reference coordinates in the owning tet.
    pub xi: [f64; 3],
    pub normal: Vec3,
    pub weight: f64,
}

/// 7-point quadrature on every boundary facet.
pub fn boundary_points(dm: &DofMap) -> Vec<BoundaryPoint> {
    let rule = tri_rule();
    let surface = dm.boundary();
    let points = surface.points();
    let mut out = Vec::with_capacity(surface.facets().len() * rule.len());
    for (fi, facet) in surface.facets().iter().enumerate() {
        let p = facet.points(points);
        let geo = dm.geometry(facet.tet);
        for q in &rule {
            let x = p[0] * q.bary[0] + p[1] * q.bary[1] + p[2] * q.bary[2];
            out.push(BoundaryPoint {
                facet: fi,
                tet: facet.tet,
                label: facet.label,
                x,
                xi: geo.to_reference(&x),
                normal: facet.normal,
                weight: q.weight * facet.area,
            });
        }
    }
    out
}

fn surface_load(dm: &DofMap, data: impl Fn(&Vec3, &Vec3) -> Vec3) -> Vec<f64> {
    let mut b = vec![0.0; dm.n_free()];
    let mut local = vec![Vec3::zeros(); dm.n_local()];
    for bp in boundary_points(dm) {
        let s = shape(dm.order(), bp.xi);
        let g = data(&bp.x, &bp.normal) * bp.weight;
        for (a, phi) in s.values.iter().enumerate() {
            local[a] = g * *phi;
        }
        scatter_load(dm, bp.tet, &local, &mut b);
    }
    b
}

/// `bᵢ = ∫_∂Ω g(x, ν)·φᵢ` for a vector space.
pub fn assemble_boundary_load(dm: &DofMap, data: impl Fn(&Vec3, &Vec3) -> Vec3) -> Result<Vec<f64>> {
    if dm.value_kind() != ValueKind::Vector3 {
        return Err(Error::InvalidInput("vector boundary load on a scalar space".into()));
    }
    Ok(surface_load(dm, data))
}

/// `bᵢ = ∫_∂Ω g(x, ν) φᵢ` for a scalar space.
pub fn assemble_scalar_boundary_load(
    dm: &DofMap,
    data: impl Fn(&Vec3, &Vec3) -> f64,
) -> Result<Vec<f64>> {
    if dm.value_kind() != ValueKind::Scalar {
        return Err(Error::InvalidInput("scalar boundary load on a vector space".into()));
    }
    Ok(surface_load(dm, |x, n| Vec3::new(data(x, n), 0.0, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::dofmap::{build_dofmap, Constraint};
    use crate::fem::field::interpolate;
    use crate::fem::shape::Order;
    use crate::mesh::{generate_box_mesh, Mesh};
    use std::sync::Arc;

    fn cube(n: usize) -> Arc<Mesh> {
        Arc::new(generate_box_mesh([n; 3], [1.0; 3]).unwrap())
    }

    #[test]
    fn scalar_mass_integrates_one() {
        for order in [Order::P1, Order::P2] {
            let dm = build_dofmap(cube(2), order, ValueKind::Scalar, Constraint::None).unwrap();
            let m = assemble_matrix(&dm, FormKind::Mass).unwrap();
            let one = vec![1.0; dm.n_free()];
            assert!((m.bilinear(&one, &one) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn divdiv_of_identity_field() {
        let dm = build_dofmap(cube(2), Order::P1, ValueKind::Vector3, Constraint::None).unwrap();
        let a = assemble_matrix(&dm, FormKind::DivDiv).unwrap();
        let u = interpolate(Arc::new(dm), &FieldFunction::new(|x| *x)).unwrap();
        assert!((a.bilinear(u.coeffs(), u.coeffs()) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn curlcurl_annihilates_gradients() {
        let dm = build_dofmap(cube(2), Order::P2, ValueKind::Vector3, Constraint::None).unwrap();
        let a = assemble_matrix(&dm, FormKind::CurlCurl).unwrap();
        // φ = x² + xy − 2yz + z²/2.
        let u = interpolate(
            Arc::new(dm),
            &FieldFunction::new(|p| Vec3::new(2.0 * p.x + p.y, p.x - 2.0 * p.z, -2.0 * p.y + p.z)),
        )
        .unwrap();
        let scale = a.max_abs() * u.coeffs().iter().map(|c| c * c).sum::<f64>();
        assert!(a.bilinear(u.coeffs(), u.coeffs()).abs() <= 1e-20_f64.max(1e-14 * scale));
    }

    #[test]
    fn assembled_matrices_are_exactly_symmetric() {
        for constraint in [Constraint::None, Constraint::TangentialZero, Constraint::NormalZero] {
            let dm = build_dofmap(cube(2), Order::P2, ValueKind::Vector3, constraint).unwrap();
            for kind in [FormKind::Mass, FormKind::DivDiv, FormKind::CurlCurl, FormKind::GradGrad] {
                let a = assemble_matrix(&dm, kind).unwrap();
                assert_eq!(a.symmetry_defect(), 0.0, "{constraint:?} {kind:?}");
            }
        }
    }

    #[test]
    fn p2_reference_mass_matches_closed_form() {
        let mesh = Arc::new(
            Mesh::new(
                vec![Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z()],
                vec![[0, 1, 2, 3]],
                (0..4)
                    .map(|i| {
                        let f = crate::mesh::TET_FACES[i];
                        crate::mesh::BoundaryFacet { vertices: f, label: 1, tet: 0 }
                    })
                    .collect(),
            )
            .unwrap(),
        );
        let dm = build_dofmap(mesh, Order::P2, ValueKind::Scalar, Constraint::None).unwrap();
        let m = assemble_matrix(&dm, FormKind::Mass).unwrap().to_dense();
        // Closed-form P2 mass matrix on a tet of volume V, times 420/V.
        let v = 1.0 / 6.0;
        let expected = |a: usize, b: usize| -> f64 {
            let vertex = |i: usize| i < 4;
            let entry = match (vertex(a), vertex(b)) {
                (true, true) => {
                    if a == b {
                        6.0
                    } else {
                        1.0
                    }
                }
                (true, false) | (false, true) => {
                    let (vx, e) = if vertex(a) { (a, b) } else { (b, a) };
                    let (i, j) = crate::fem::shape::TET_EDGES[e - 4];
                    if i == vx || j == vx {
                        -4.0
                    } else {
                        -6.0
                    }
                }
                (false, false) => {
                    if a == b {
                        32.0
                    } else {
                        let (i, j) = crate::fem::shape::TET_EDGES[a - 4];
                        let (k, l) = crate::fem::shape::TET_EDGES[b - 4];
                        if i == k || i == l || j == k || j == l {
                            16.0
                        } else {
                            8.0
                        }
                    }
                }
            };
            entry * v / 420.0
        };
        // Global P2 numbering on a single tet: vertices, then sorted edges,
        // which coincide with the local order here.
        for a in 0..10 {
            for b in 0..10 {
                assert!((m[(a, b)] - expected(a, b)).abs() < 1e-14, "({a},{b})");
            }
        }
    }

    #[test]
    fn constant_load_sums_to_volume() {
        let dm = build_dofmap(cube(2), Order::P2, ValueKind::Scalar, Constraint::None).unwrap();
        let b = assemble_scalar_load(&dm, &ScalarFunction::constant(2.5)).unwrap();
        assert!((b.iter().sum::<f64>() - 2.5).abs() < 1e-12);
        let zero = assemble_scalar_load(&dm, &ScalarFunction::zero()).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constrained_corners_drop_out_of_load() {
        let dm = build_dofmap(cube(2), Order::P1, ValueKind::Vector3, Constraint::TangentialZero).unwrap();
        let b = assemble_load(&dm, &FieldFunction::constant(Vec3::x())).unwrap();
        assert_eq!(b.len(), dm.n_free());
        let corner = (0..dm.n_nodes()).find(|&i| dm.node_point(i).norm() == 0.0).unwrap();
        assert!((0..3).all(|c| dm.dof(corner, c).is_none()));
    }

    #[test]
    fn boundary_load_integrates_area() {
        let dm = build_dofmap(cube(2), Order::P2, ValueKind::Scalar, Constraint::None).unwrap();
        let b = assemble_scalar_boundary_load(&dm, |_, _| 1.0).unwrap();
        assert!((b.iter().sum::<f64>() - 6.0).abs() < 1e-12);
        let total: f64 = boundary_points(&dm).iter().map(|p| p.weight).sum();
        assert!((total - 6.0).abs() < 1e-12);
    }

    #[test]
    fn element_order_does_not_change_the_matrix() {
        let mesh = generate_box_mesh([2, 2, 2], [1.0; 3]).unwrap();
        let mut tets = mesh.tets().to_vec();
        let mut facets = mesh.boundary_facets().to_vec();
        let n = tets.len();
        tets.reverse();
        for f in &mut facets {
            f.tet = n - 1 - f.tet;
        }
        let shuffled = Mesh::new(mesh.vertices().to_vec(), tets, facets).unwrap();
        for kind in [FormKind::Mass, FormKind::CurlCurl] {
            let a = build_dofmap(Arc::new(mesh.clone()), Order::P2, ValueKind::Vector3, Constraint::NormalZero).unwrap();
            let b = build_dofmap(Arc::new(shuffled.clone()), Order::P2, ValueKind::Vector3, Constraint::NormalZero).unwrap();
            assert_eq!(assemble_matrix(&a, kind).unwrap(), assemble_matrix(&b, kind).unwrap());
        }
    }
}
