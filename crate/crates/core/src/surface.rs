//! Differential geometry on triangulated boundaries.
//!
//! Each boundary triangle is treated as an affine patch `x(u₁,u₂)` over the
//! unit reference triangle. On such a patch the first fundamental form is
//! constant and the surface gradient of a P1 function is exact, which gives
//! a discrete version of
//!
//! ```text
//! S(x) = ½ Σ_l [Grad_Γ ν_l]_l
//! ```
//!
//! where `ν_l` are the components of the (interpolated) unit normal field.
//! `S` is half the surface divergence of the normal: it vanishes on flat
//! pieces and equals `1/R` on a sphere of radius `R`.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::Matrix2;

use crate::mesh::BoundarySurface;
use crate::{Error, Result, Vec3};

/// Default angular tolerance (radians) for calling a patch flat.
pub const DEFAULT_TOL_FLAT: f64 = 1e-8;
/// Default bound on `|S|` for fourth-kind admissibility.
pub const DEFAULT_TOL_S: f64 = 1e-6;
/// Facet normals around a vertex spreading wider than this (radians) mark a
/// crease; such vertices are left out of `S` statistics.
pub const DEFAULT_CREASE_ANGLE: f64 = std::f64::consts::FRAC_PI_6;

/// Affine parametrization of one triangle with its first fundamental form.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePatch {
    pub vertices: [Vec3; 3],
    /// `∂x/∂u₁`, `∂x/∂u₂`.
    pub tangents: [Vec3; 2],
    /// `g_jk = ∂x/∂u_j · ∂x/∂u_k`.
    pub metric: Matrix2<f64>,
    /// `|g| = det g`.
    pub metric_det: f64,
    /// `g^{jk}`.
    pub metric_inv: Matrix2<f64>,
}

impl SurfacePatch {
    /// Unit normal `(∂x/∂u₁ ∧ ∂x/∂u₂)/√|g|`.
    pub fn normal(&self) -> Vec3 {
        self.tangents[0].cross(&self.tangents[1]) / self.metric_det.sqrt()
    }

    pub fn area(&self) -> f64 {
        0.5 * self.metric_det.sqrt()
    }
}

pub fn first_fundamental_form(tri: [Vec3; 3]) -> Result<SurfacePatch> {
    let t1 = tri[1] - tri[0];
    let t2 = tri[2] - tri[0];
    let diameter = t1.norm().max(t2.norm()).max((tri[2] - tri[1]).norm());
    let area = 0.5 * t1.cross(&t2).norm();
    if !(area > 1e-14 * diameter * diameter) {
        return Err(Error::Geometry(format!(
            "degenerate triangle (area {area:e}, diameter {diameter:e})"
        )));
    }
    let metric = Matrix2::new(t1.dot(&t1), t1.dot(&t2), t2.dot(&t1), t2.dot(&t2));
    let metric_det = metric[(0, 0)] * metric[(1, 1)] - metric[(0, 1)] * metric[(1, 0)];
    let metric_inv = Matrix2::new(
        metric[(1, 1)],
        -metric[(0, 1)],
        -metric[(1, 0)],
        metric[(0, 0)],
    ) / metric_det;
    Ok(SurfacePatch {
        vertices: tri,
        tangents: [t1, t2],
        metric,
        metric_det,
        metric_inv,
    })
}

/// `Grad_Γ φ = Σ g^{jk} ∂φ/∂u_j ∂x/∂u_k` for the linear interpolant of the
/// vertex values `phi`.
pub fn surface_gradient(patch: &SurfacePatch, phi: [f64; 3]) -> Vec3 {
    let dphi = [phi[1] - phi[0], phi[2] - phi[0]];
    let mut grad = Vec3::zeros();
    for j in 0..2 {
        for k in 0..2 {
            grad += patch.metric_inv[(j, k)] * dphi[j] * patch.tangents[k];
        }
    }
    grad
}

/// How a boundary vertex takes part in `S` statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexStatus {
    /// Not on the boundary.
    Interior,
    /// On a regular piece: one label, normals within the crease angle.
    Smooth,
    /// On a patch junction or geometric crease.
    Crease,
    /// On the rim of an open surface.
    Rim,
}

impl VertexStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            VertexStatus::Interior => "interior",
            VertexStatus::Smooth => "smooth",
            VertexStatus::Crease => "crease",
            VertexStatus::Rim => "rim",
        }
    }
}

/// Per-vertex values of `S`, indexed like the mesh vertices.
#[derive(Debug, Clone)]
pub struct SField {
    /// Area-weighted average of the adjacent triangle values; `None` off the
    /// boundary.
    pub values: Vec<Option<f64>>,
    pub status: Vec<VertexStatus>,
    /// Value on each boundary facet.
    pub facet_values: Vec<f64>,
}

impl SField {
    /// Values on smooth vertices only.
    pub fn smooth_values(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .zip(&self.status)
            .enumerate()
            .filter_map(|(v, (s, st))| match (s, st) {
                (Some(s), VertexStatus::Smooth) => Some((v, *s)),
                _ => None,
            })
    }

    pub fn smooth_mean(&self) -> Option<f64> {
        let (sum, count) = self
            .smooth_values()
            .fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
        (count > 0).then(|| sum / count as f64)
    }

    pub fn smooth_max_abs(&self) -> f64 {
        self.smooth_values().map(|(_, v)| v.abs()).fold(0.0, f64::max)
    }
}

fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// `S(x)` with the default crease angle.
pub fn compute_s(surface: &BoundarySurface) -> Result<SField> {
    compute_s_with(surface, DEFAULT_CREASE_ANGLE)
}

/// `S(x)` on every boundary vertex.
///
/// The normal interpolated over a triangle uses, at each corner, the
/// angle-weighted average of the facets around that corner that share the
/// triangle's label and lie within `crease_angle` of its normal, so that
/// a piece `Γ` never sees the normals of a neighbouring piece.
pub fn compute_s_with(surface: &BoundarySurface, crease_angle: f64) -> Result<SField> {
    let points = surface.points();
    let facets = surface.facets();

    let mut edge_use: HashMap<(usize, usize), usize> = HashMap::new();
    for f in facets {
        for k in 0..3 {
            let (a, b) = (f.vertices[k], f.vertices[(k + 1) % 3]);
            *edge_use.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut on_rim = vec![false; points.len()];
    for (&(a, b), &count) in &edge_use {
        if count == 1 {
            on_rim[a] = true;
            on_rim[b] = true;
        }
    }

    let mut facet_values = Vec::with_capacity(facets.len());
    for (t, facet) in facets.iter().enumerate() {
        let corner_normals = facet.vertices.map(|v| {
            let sum: Vec3 = surface
                .vertex_facets(v)
                .iter()
                .filter(|&&g| {
                    facets[g].label == facet.label
                        && angle_between(&facets[g].normal, &facet.normal) <= crease_angle
                })
                .map(|&g| facets[g].normal * surface.corner_angle(g, v))
                .sum();
            sum.normalize()
        });
        let patch = first_fundamental_form(facet.points(points))
            .map_err(|e| Error::Geometry(format!("boundary facet {t}: {e}")))?;
        let s: f64 = (0..3)
            .map(|l| surface_gradient(&patch, corner_normals.map(|n| n[l]))[l])
            .sum();
        facet_values.push(0.5 * s);
    }

    let mut values = vec![None; points.len()];
    let mut status = vec![VertexStatus::Interior; points.len()];
    for v in 0..points.len() {
        let adjacent = surface.vertex_facets(v);
        if adjacent.is_empty() {
            continue;
        }
        let (mut num, mut den) = (0.0, 0.0);
        for &t in adjacent {
            num += facets[t].area * facet_values[t];
            den += facets[t].area;
        }
        values[v] = Some(num / den);
        let first = &facets[adjacent[0]];
        let mixed_labels = adjacent.iter().any(|&t| facets[t].label != first.label);
        let spread = adjacent
            .iter()
            .flat_map(|&a| adjacent.iter().map(move |&b| (a, b)))
            .map(|(a, b)| angle_between(&facets[a].normal, &facets[b].normal))
            .fold(0.0, f64::max);
        status[v] = if on_rim[v] {
            VertexStatus::Rim
        } else if mixed_labels || spread > crease_angle {
            VertexStatus::Crease
        } else {
            VertexStatus::Smooth
        };
    }
    Ok(SField {
        values,
        status,
        facet_values,
    })
}

/// A label-connected set of boundary facets.
#[derive(Debug, Clone)]
pub struct PatchSummary {
    pub label: i32,
    pub facets: Vec<usize>,
    pub mean_normal: Vec3,
    /// Largest angle between a facet normal and the mean normal.
    pub normal_spread: f64,
    pub flat: bool,
    /// Smooth vertices whose facets all lie in this patch.
    pub interior_vertices: Vec<usize>,
    pub max_abs_s: f64,
}

/// Whether the geometric hypotheses behind decoupling hold on a boundary.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub s: SField,
    pub patches: Vec<PatchSummary>,
    /// Patch index of each vertex whose facets all lie in one patch.
    pub vertex_patch: Vec<Option<usize>>,
    pub tol_flat: f64,
    pub tol_s: f64,
    /// Every patch flat (a polyhedral boundary).
    pub third_kind_admissible: bool,
    /// `max|S| ≤ tol_s` on every patch.
    pub fourth_kind_admissible: bool,
}

pub fn classify_boundary(
    surface: &BoundarySurface,
    tol_flat: f64,
    tol_s: f64,
) -> Result<AdmissibilityReport> {
    let s = compute_s(surface)?;
    let facets = surface.facets();

    let mut edge_facets: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, f) in facets.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (f.vertices[k], f.vertices[(k + 1) % 3]);
            edge_facets.entry((a.min(b), a.max(b))).or_default().push(i);
        }
    }

    let mut patch_of = vec![usize::MAX; facets.len()];
    let mut patches = Vec::new();
    for seed in 0..facets.len() {
        if patch_of[seed] != usize::MAX {
            continue;
        }
        let id = patches.len();
        let label = facets[seed].label;
        let mut members = vec![seed];
        patch_of[seed] = id;
        let mut cursor = 0;
        while cursor < members.len() {
            let f = &facets[members[cursor]];
            cursor += 1;
            for k in 0..3 {
                let (a, b) = (f.vertices[k], f.vertices[(k + 1) % 3]);
                for &g in &edge_facets[&(a.min(b), a.max(b))] {
                    if patch_of[g] == usize::MAX && facets[g].label == label {
                        patch_of[g] = id;
                        members.push(g);
                    }
                }
            }
        }
        members.sort_unstable();
        let mean_normal = members
            .iter()
            .map(|&g| facets[g].normal * facets[g].area)
            .sum::<Vec3>()
            .normalize();
        let normal_spread = members
            .iter()
            .map(|&g| angle_between(&facets[g].normal, &mean_normal))
            .fold(0.0, f64::max);
        patches.push(PatchSummary {
            label,
            facets: members,
            mean_normal,
            normal_spread,
            flat: normal_spread <= tol_flat,
            interior_vertices: Vec::new(),
            max_abs_s: 0.0,
        });
    }

    let mut vertex_patch = vec![None; surface.points().len()];
    for v in surface.boundary_vertices() {
        let adjacent = surface.vertex_facets(v);
        let p = patch_of[adjacent[0]];
        if adjacent.iter().all(|&f| patch_of[f] == p) {
            vertex_patch[v] = Some(p);
            if s.status[v] == VertexStatus::Smooth {
                let value = s.values[v].expect("boundary vertex has a value");
                let patch = &mut patches[p];
                patch.interior_vertices.push(v);
                patch.max_abs_s = patch.max_abs_s.max(value.abs());
            }
        }
    }

    let third_kind_admissible = patches.iter().all(|p| p.flat);
    let fourth_kind_admissible = patches.iter().all(|p| p.max_abs_s <= tol_s);
    Ok(AdmissibilityReport {
        s,
        patches,
        vertex_patch,
        tol_flat,
        tol_s,
        third_kind_admissible,
        fourth_kind_admissible,
    })
}

impl AdmissibilityReport {
    /// CSV with one `vertex` row per boundary vertex, one `patch` row per
    /// patch and two `verdict` rows.
    ///
    /// Columns: `row,id,x,y,z,s,patch,label,flat,included`. For patch rows
    /// `s` is `max|S|` and `included` counts the vertices behind it.
    pub fn to_csv(&self, points: &[Vec3]) -> String {
        let mut out = String::from("row,id,x,y,z,s,patch,label,flat,included\n");
        for (v, value) in self.s.values.iter().enumerate() {
            let Some(value) = value else { continue };
            let p = points[v];
            let (patch, label, flat) = match self.vertex_patch[v] {
                Some(i) => (
                    i.to_string(),
                    self.patches[i].label.to_string(),
                    self.patches[i].flat.to_string(),
                ),
                None => (String::new(), String::new(), String::new()),
            };
            let included = self.s.status[v] == VertexStatus::Smooth && self.vertex_patch[v].is_some();
            let _ = writeln!(
                out,
                "vertex,{v},{:e},{:e},{:e},{:e},{patch},{label},{flat},{included}",
                p.x, p.y, p.z, value
            );
        }
        for (i, p) in self.patches.iter().enumerate() {
            let _ = writeln!(
                out,
                "patch,{i},,,,{:e},{i},{},{},{}",
                p.max_abs_s,
                p.label,
                p.flat,
                p.interior_vertices.len()
            );
        }
        let verdict = |ok: bool| if ok { "admissible" } else { "inadmissible" };
        let _ = writeln!(out, "verdict,third,,,,,,,,{}", verdict(self.third_kind_admissible));
        let _ = writeln!(out, "verdict,fourth,,,,,,,,{}", verdict(self.fourth_kind_admissible));
        out
    }
}
