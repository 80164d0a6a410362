use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::element::ElementGeometry;
use super::shape::{Order, TET_EDGES};
use crate::mesh::{extract_boundary, BoundarySurface, Mesh};
use crate::{Error, Result, Vec3};

/// Normals closer than this angle (radians) count as one direction.
pub const DISTINCT_NORMAL_ANGLE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Scalar,
    Vector3,
}

impl ValueKind {
    pub fn components(self) -> usize {
        match self {
            ValueKind::Scalar => 1,
            ValueKind::Vector3 => 3,
        }
    }
}

/// Boundary constraint realized by the space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    None,
    /// `ν∧u = 0` (the space `X_N`).
    TangentialZero,
    /// `ν·u = 0` (the space `X_T`).
    NormalZero,
    /// `u = 0` on the whole boundary.
    DirichletZero,
}

/// Global node numbering, per-node frames and the free-DOF numbering.
///
/// Nodes are the mesh vertices followed by one node per edge (P2), edges in
/// ascending order of their sorted vertex pair. A vector field stores one
/// slot per node and frame axis; slot `3·node + c` holds the component along
/// `frame(node)[c]`, and constrained slots are dropped from the free
/// numbering.
#[derive(Debug, Clone)]
pub struct DofMap {
    mesh: Arc<Mesh>,
    order: Order,
    value_kind: ValueKind,
    constraint: Constraint,
    n_local: usize,
    element_nodes: Vec<usize>,
    node_points: Vec<Vec3>,
    node_normals: Vec<Vec<Vec3>>,
    normal_rank: Vec<usize>,
    frames: Vec<[Vec3; 3]>,
    slot_dof: Vec<Option<usize>>,
    constrained: Vec<usize>,
    n_free: usize,
    geometry: Vec<ElementGeometry>,
    boundary: BoundarySurface,
}

const IDENTITY_FRAME: [Vec3; 3] = [
    Vec3::new(1.0, 0.0, 0.0),
    Vec3::new(0.0, 1.0, 0.0),
    Vec3::new(0.0, 0.0, 1.0),
];

fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

fn tangent_to(nu: &Vec3) -> Vec3 {
    let axis = (0..3)
        .min_by(|&i, &j| nu[i].abs().total_cmp(&nu[j].abs()))
        .expect("three axes");
    let mut e = Vec3::zeros();
    e[axis] = 1.0;
    nu.cross(&e).normalize()
}

/// Orthonormal frame adapted to the distinct normals at a node, with the
/// number of independent normals.
fn node_frame(normals: &[Vec3]) -> ([Vec3; 3], usize) {
    let Some(a) = normals.first().copied() else {
        return (IDENTITY_FRAME, 0);
    };
    let mut basis = vec![a];
    let mut second = None;
    for n in &normals[1..] {
        let mut r = *n;
        for q in &basis {
            r -= q * q.dot(&r);
        }
        if r.norm() > DISTINCT_NORMAL_ANGLE {
            let r = r.normalize();
            if second.is_none() {
                second = Some(r);
            }
            basis.push(r);
            if basis.len() == 3 {
                break;
            }
        }
    }
    match second {
        None => {
            let t1 = tangent_to(&a);
            (([a, t1, a.cross(&t1)]), 1)
        }
        Some(b) => ([a, b, a.cross(&b).normalize()], basis.len()),
    }
}

/// Which frame axes a constraint removes at a node with `rank` independent
/// normals.
fn constrained_axes(constraint: Constraint, kind: ValueKind, rank: usize, boundary: bool) -> [bool; 3] {
    if !boundary {
        return [false; 3];
    }
    match (constraint, kind) {
        (Constraint::None, _) => [false; 3],
        (Constraint::DirichletZero, _) => [true; 3],
        (Constraint::TangentialZero, _) => match rank {
            1 => [false, true, true],
            _ => [true; 3],
        },
        (Constraint::NormalZero, _) => match rank {
            1 => [true, false, false],
            2 => [true, true, false],
            _ => [true; 3],
        },
    }
}

/// Builds the DOF map of a continuous Lagrange space.
pub fn build_dofmap(
    mesh: Arc<Mesh>,
    order: Order,
    value_kind: ValueKind,
    constraint: Constraint,
) -> Result<DofMap> {
    if value_kind == ValueKind::Scalar
        && matches!(constraint, Constraint::TangentialZero | Constraint::NormalZero)
    {
        return Err(Error::InvalidInput(format!(
            "constraint {constraint:?} needs a vector-valued space"
        )));
    }
    let boundary = extract_boundary(&mesh)?;
    let nv = mesh.n_vertices();

    let mut edges: Vec<(usize, usize)> = Vec::new();
    if order == Order::P2 {
        for tet in mesh.tets() {
            for (i, j) in TET_EDGES {
                let (a, b) = (tet[i], tet[j]);
                edges.push((a.min(b), a.max(b)));
            }
        }
        edges.sort_unstable();
        edges.dedup();
    }

    let n_local = order.n_local();
    let mut element_nodes = Vec::with_capacity(mesh.n_tets() * n_local);
    for tet in mesh.tets() {
        element_nodes.extend_from_slice(tet);
        if order == Order::P2 {
            for (i, j) in TET_EDGES {
                let key = (tet[i].min(tet[j]), tet[i].max(tet[j]));
                let e = edges.binary_search(&key).expect("edge list contains every tet edge");
                element_nodes.push(nv + e);
            }
        }
    }

    let vertices = mesh.vertices();
    let mut node_points: Vec<Vec3> = vertices.to_vec();
    node_points.extend(edges.iter().map(|&(a, b)| (vertices[a] + vertices[b]) * 0.5));

    let facets = boundary.facets();
    let distinct = |ids: &mut dyn Iterator<Item = usize>| -> Vec<Vec3> {
        let mut out: Vec<Vec3> = Vec::new();
        for f in ids {
            let n = facets[f].normal;
            if out.iter().all(|m| angle_between(m, &n) > DISTINCT_NORMAL_ANGLE) {
                out.push(n);
            }
        }
        // Canonical order, so frames do not depend on facet numbering.
        out.sort_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        out
    };
    let mut node_normals: Vec<Vec<Vec3>> = (0..nv)
        .map(|v| distinct(&mut boundary.vertex_facets(v).iter().copied()))
        .collect();
    for &(a, b) in &edges {
        let mut ids = boundary
            .vertex_facets(a)
            .iter()
            .copied()
            .filter(|&f| facets[f].vertices.contains(&b));
        node_normals.push(distinct(&mut ids));
    }

    let ncomp = value_kind.components();
    let vector_frames = value_kind == ValueKind::Vector3
        && matches!(constraint, Constraint::TangentialZero | Constraint::NormalZero);
    let mut frames = Vec::with_capacity(node_points.len());
    let mut normal_rank = Vec::with_capacity(node_points.len());
    let mut slot_dof = Vec::with_capacity(node_points.len() * ncomp);
    let mut constrained = Vec::new();
    let mut n_free = 0;
    for (node, normals) in node_normals.iter().enumerate() {
        let (frame, rank) = node_frame(normals);
        frames.push(if vector_frames { frame } else { IDENTITY_FRAME });
        normal_rank.push(rank);
        let fixed = constrained_axes(constraint, value_kind, rank, !normals.is_empty());
        for (c, &is_fixed) in fixed.iter().enumerate().take(ncomp) {
            if is_fixed {
                constrained.push(node * ncomp + c);
                slot_dof.push(None);
            } else {
                slot_dof.push(Some(n_free));
                n_free += 1;
            }
        }
    }

    let geometry = (0..mesh.n_tets())
        .map(|t| ElementGeometry::new(mesh.tet_points(t)))
        .collect();

    Ok(DofMap {
        mesh,
        order,
        value_kind,
        constraint,
        n_local,
        element_nodes,
        node_points,
        node_normals,
        normal_rank,
        frames,
        slot_dof,
        constrained,
        n_free,
        geometry,
        boundary,
    })
}

impl DofMap {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn value_kind(&self) -> ValueKind {
        self.value_kind
    }

    pub fn constraint(&self) -> Constraint {
        self.constraint
    }

    pub fn components(&self) -> usize {
        self.value_kind.components()
    }

    pub fn n_local(&self) -> usize {
        self.n_local
    }

    pub fn n_nodes(&self) -> usize {
        self.node_points.len()
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    pub fn n_elements(&self) -> usize {
        self.geometry.len()
    }

    pub fn element_nodes(&self, t: usize) -> &[usize] {
        &self.element_nodes[t * self.n_local..(t + 1) * self.n_local]
    }

    pub fn boundary(&self) -> &BoundarySurface {
        &self.boundary
    }

    pub fn geometry(&self, t: usize) -> &ElementGeometry {
        &self.geometry[t]
    }

    pub fn node_point(&self, node: usize) -> Vec3 {
        self.node_points[node]
    }

    pub fn node_points(&self) -> &[Vec3] {
        &self.node_points
    }

    /// Distinct outward normals of the boundary facets touching a node.
    pub fn node_normals(&self, node: usize) -> &[Vec3] {
        &self.node_normals[node]
    }

    pub fn is_boundary_node(&self, node: usize) -> bool {
        !self.node_normals[node].is_empty()
    }

    /// Number of linearly independent normals at a node.
    pub fn normal_rank(&self, node: usize) -> usize {
        self.normal_rank[node]
    }

    pub fn frame(&self, node: usize) -> &[Vec3; 3] {
        &self.frames[node]
    }

    pub fn dof(&self, node: usize, component: usize) -> Option<usize> {
        self.slot_dof[node * self.components() + component]
    }

    /// Constrained slots `node·components + axis`, ascending.
    pub fn constrained_slots(&self) -> &[usize] {
        &self.constrained
    }

    pub fn free_components(&self, node: usize) -> usize {
        (0..self.components()).filter(|&c| self.dof(node, c).is_some()).count()
    }

    /// Cartesian nodal values from free coefficients; `components()` entries
    /// per node.
    pub fn expand(&self, coeffs: &[f64]) -> Vec<f64> {
        let ncomp = self.components();
        let mut out = vec![0.0; self.n_nodes() * ncomp];
        for node in 0..self.n_nodes() {
            if ncomp == 1 {
                if let Some(d) = self.dof(node, 0) {
                    out[node] = coeffs[d];
                }
                continue;
            }
            let frame = &self.frames[node];
            for c in 0..3 {
                if let Some(d) = self.dof(node, c) {
                    for k in 0..3 {
                        out[3 * node + k] += coeffs[d] * frame[c][k];
                    }
                }
            }
        }
        out
    }

    /// Free coefficients from Cartesian nodal values (components along
    /// constrained axes are discarded).
    pub fn restrict(&self, nodal: &[f64]) -> Vec<f64> {
        let ncomp = self.components();
        let mut out = vec![0.0; self.n_free];
        for node in 0..self.n_nodes() {
            for c in 0..ncomp {
                if let Some(d) = self.dof(node, c) {
                    out[d] = if ncomp == 1 {
                        nodal[node]
                    } else {
                        let v = Vec3::new(nodal[3 * node], nodal[3 * node + 1], nodal[3 * node + 2]);
                        self.frames[node][c].dot(&v)
                    };
                }
            }
        }
        out
    }
}
