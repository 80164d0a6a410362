//! Tetrahedral meshes: construction and validation, structured box
//! generation, JSON persistence and boundary extraction.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

/// Local vertex triples of the four faces of a tetrahedron; face `i` is
/// opposite local vertex `i`.
pub const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

/// A triangle on the boundary, with its patch label and the tetrahedron it
/// belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryFacet {
    pub vertices: [usize; 3],
    pub label: i32,
    pub tet: usize,
}

/// Immutable tetrahedral mesh. Every tetrahedron is positively oriented and
/// the boundary facet list is exactly the set of faces owned by one element.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Vec3>,
    tets: Vec<[usize; 4]>,
    boundary_facets: Vec<BoundaryFacet>,
}

#[derive(Serialize, Deserialize)]
struct MeshFile {
    vertices: Vec<[f64; 3]>,
    tets: Vec<[usize; 4]>,
    boundary_facets: Vec<BoundaryFacet>,
}

fn face_key(mut f: [usize; 3]) -> [usize; 3] {
    f.sort_unstable();
    f
}

fn signed_volume6(p: &[Vec3; 4]) -> f64 {
    (p[1] - p[0]).cross(&(p[2] - p[0])).dot(&(p[3] - p[0]))
}

/// Faces of `tets` with the elements that contain them, in first-seen order.
fn face_incidence(tets: &[[usize; 4]]) -> (Vec<[usize; 3]>, HashMap<[usize; 3], Vec<usize>>) {
    let mut order = Vec::new();
    let mut incidence: HashMap<[usize; 3], Vec<usize>> = HashMap::new();
    for (t, tet) in tets.iter().enumerate() {
        for lf in TET_FACES {
            let key = face_key([tet[lf[0]], tet[lf[1]], tet[lf[2]]]);
            let entry = incidence.entry(key).or_default();
            if entry.is_empty() {
                order.push(key);
            }
            entry.push(t);
        }
    }
    (order, incidence)
}

impl Mesh {
    /// Builds a mesh and checks all structural invariants.
    pub fn new(
        vertices: Vec<Vec3>,
        tets: Vec<[usize; 4]>,
        boundary_facets: Vec<BoundaryFacet>,
    ) -> Result<Self> {
        let mesh = Mesh {
            vertices,
            tets,
            boundary_facets,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        if let Some((i, _)) = self
            .vertices
            .iter()
            .enumerate()
            .find(|(_, v)| !v.iter().all(|c| c.is_finite()))
        {
            return Err(Error::Validation(format!(
                "vertex {i} has non-finite coordinates"
            )));
        }
        for (t, tet) in self.tets.iter().enumerate() {
            if let Some(&v) = tet.iter().find(|&&v| v >= nv) {
                return Err(Error::Validation(format!(
                    "tet {t} references vertex {v}, violating vertex indices in range (have {nv} vertices)"
                )));
            }
            let mut sorted = *tet;
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Validation(format!(
                    "tet {t} repeats a vertex, violating positive signed volume"
                )));
            }
            let det = signed_volume6(&self.tet_points(t));
            if !(det > 0.0) {
                return Err(Error::Validation(format!(
                    "tet {t} violates positive signed volume (6·vol = {det:e})"
                )));
            }
        }
        for (i, f) in self.boundary_facets.iter().enumerate() {
            if let Some(&v) = f.vertices.iter().find(|&&v| v >= nv) {
                return Err(Error::Validation(format!(
                    "boundary facet {i} references vertex {v}, violating vertex indices in range"
                )));
            }
            if f.tet >= self.tets.len() {
                return Err(Error::Validation(format!(
                    "boundary facet {i} references tet {}, violating vertex indices in range",
                    f.tet
                )));
            }
        }

        let (_, incidence) = face_incidence(&self.tets);
        if let Some((face, owners)) = incidence.iter().find(|(_, o)| o.len() > 2) {
            return Err(Error::Validation(format!(
                "face {face:?} is shared by {} tets, violating interior faces belong to exactly two tets",
                owners.len()
            )));
        }
        let mut seen: HashMap<[usize; 3], usize> = HashMap::new();
        for (i, f) in self.boundary_facets.iter().enumerate() {
            let key = face_key(f.vertices);
            match incidence.get(&key) {
                Some(owners) if owners.len() == 1 && owners[0] == f.tet => {}
                Some(owners) if owners.len() == 1 => {
                    return Err(Error::Validation(format!(
                        "boundary facet {i} names tet {} but belongs to tet {}, violating every boundary facet belongs to exactly one tet",
                        f.tet, owners[0]
                    )))
                }
                _ => {
                    return Err(Error::Validation(format!(
                        "boundary facet {i} is not a face of exactly one tet, violating every boundary facet belongs to exactly one tet"
                    )))
                }
            }
            if let Some(prev) = seen.insert(key, i) {
                return Err(Error::Validation(format!(
                    "boundary facets {prev} and {i} coincide, violating patch labels partition the boundary facets"
                )));
            }
        }
        let n_exposed = incidence.values().filter(|o| o.len() == 1).count();
        if n_exposed != self.boundary_facets.len() {
            return Err(Error::Validation(format!(
                "{} faces are owned by one tet but {} boundary facets are listed, violating every boundary facet belongs to exactly one tet",
                n_exposed,
                self.boundary_facets.len()
            )));
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn boundary_facets(&self) -> &[BoundaryFacet] {
        &self.boundary_facets
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn tet_points(&self, t: usize) -> [Vec3; 4] {
        self.tets[t].map(|v| self.vertices[v])
    }

    pub fn tet_volume(&self, t: usize) -> f64 {
        signed_volume6(&self.tet_points(t)) / 6.0
    }

    pub fn volume(&self) -> f64 {
        (0..self.tets.len()).map(|t| self.tet_volume(t)).sum()
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Same connectivity with every vertex mapped through `map`. Fails if the
    /// map flips or collapses an element.
    pub fn transformed(&self, map: impl Fn(&Vec3) -> Vec3) -> Result<Mesh> {
        Mesh::new(
            self.vertices.iter().map(map).collect(),
            self.tets.clone(),
            self.boundary_facets.clone(),
        )
    }

    /// Same geometry with boundary labels reassigned by `label(index, facet)`.
    pub fn relabeled(&self, label: impl Fn(usize, &BoundaryFacet) -> i32) -> Mesh {
        let boundary_facets = self
            .boundary_facets
            .iter()
            .enumerate()
            .map(|(i, f)| BoundaryFacet {
                label: label(i, f),
                ..*f
            })
            .collect();
        Mesh {
            vertices: self.vertices.clone(),
            tets: self.tets.clone(),
            boundary_facets,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Mesh> {
        let file: MeshFile = serde_json::from_str(text)?;
        Mesh::new(
            file.vertices.into_iter().map(Vec3::from).collect(),
            file.tets,
            file.boundary_facets,
        )
    }

    pub fn to_json_string(&self) -> String {
        let file = MeshFile {
            vertices: self.vertices.iter().map(|v| [v.x, v.y, v.z]).collect(),
            tets: self.tets.clone(),
            boundary_facets: self.boundary_facets.clone(),
        };
        serde_json::to_string(&file).expect("mesh serialization cannot fail")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Mesh> {
        Mesh::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json_string();
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Structured mesh of the box `(0,L₁)×(0,L₂)×(0,L₃)`.
///
/// Each of the `n₁·n₂·n₃` cells is cut into six tetrahedra around one of
/// its diagonals (Kuhn split), mirrored in every axis with odd cell index.
/// Neighbouring cells share face diagonals, so the mesh is conforming. Boundary labels: 1/2 for `x = 0`/`x = L₁`, 3/4 for
/// `y`, 5/6 for `z`. Facets are oriented with outward normals.
pub fn generate_box_mesh(n: [usize; 3], lengths: [f64; 3]) -> Result<Mesh> {
    if n.iter().any(|&k| k == 0) {
        return Err(Error::InvalidInput(format!(
            "box subdivisions must be at least 1 per axis, got {n:?}"
        )));
    }
    if lengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "box edge lengths must be positive and finite, got {lengths:?}"
        )));
    }
    let [nx, ny, nz] = n;
    let index = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    let mut grid = Vec::with_capacity(vertices.capacity());
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                // Exact endpoints: the last node sits on L, not on n·(L/n).
                let coord = |idx: usize, cnt: usize, len: f64| {
                    if idx == cnt {
                        len
                    } else {
                        len * idx as f64 / cnt as f64
                    }
                };
                vertices.push(Vec3::new(
                    coord(i, nx, lengths[0]),
                    coord(j, ny, lengths[1]),
                    coord(k, nz, lengths[2]),
                ));
                grid.push([i, j, k]);
            }
        }
    }

    const PERMUTATIONS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut tets = Vec::with_capacity(6 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                // Cells with odd indices are mirrored so the mesh is symmetric
                // under the reflections of the box.
                let flip = [i % 2 == 1, j % 2 == 1, k % 2 == 1];
                for perm in PERMUTATIONS {
                    let mut corner = [i, j, k];
                    for axis in 0..3 {
                        corner[axis] += flip[axis] as usize;
                    }
                    let mut path = [index(corner[0], corner[1], corner[2]); 4];
                    for (step, &axis) in perm.iter().enumerate() {
                        if flip[axis] {
                            corner[axis] -= 1;
                        } else {
                            corner[axis] += 1;
                        }
                        path[step + 1] = index(corner[0], corner[1], corner[2]);
                    }
                    let [a, b, c, d] = path.map(|v| vertices[v]);
                    if (b - a).cross(&(c - a)).dot(&(d - a)) < 0.0 {
                        path.swap(1, 2);
                    }
                    tets.push(path);
                }
            }
        }
    }

    let (order, incidence) = face_incidence(&tets);
    let mut boundary_facets = Vec::new();
    for key in order {
        let owners = &incidence[&key];
        if owners.len() != 1 {
            continue;
        }
        let t = owners[0];
        let g = key.map(|v| grid[v]);
        let label = (0..3)
            .find_map(|axis| {
                if g.iter().all(|c| c[axis] == 0) {
                    Some(2 * axis as i32 + 1)
                } else if g.iter().all(|c| c[axis] == n[axis]) {
                    Some(2 * axis as i32 + 2)
                } else {
                    None
                }
            })
            .expect("exposed face of a box mesh lies on a box face");
        let vertices = outward_order(&vertices, &tets[t], key);
        boundary_facets.push(BoundaryFacet {
            vertices,
            label,
            tet: t,
        });
    }
    Mesh::new(vertices, tets, boundary_facets)
}

/// Reorders a face of `tet` so that its right-hand normal points away from
/// the element.
fn outward_order(points: &[Vec3], tet: &[usize; 4], face: [usize; 3]) -> [usize; 3] {
    let [a, b, c] = face.map(|v| points[v]);
    let centroid_tet = tet.iter().map(|&v| points[v]).sum::<Vec3>() / 4.0;
    let normal = (b - a).cross(&(c - a));
    if normal.dot(&((a + b + c) / 3.0 - centroid_tet)) >= 0.0 {
        face
    } else {
        [face[0], face[2], face[1]]
    }
}

/// A boundary triangle with its outward unit normal and area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceFacet {
    /// Vertex indices (into the mesh vertex array), ordered counter-clockwise
    /// seen from outside.
    pub vertices: [usize; 3],
    pub label: i32,
    pub tet: usize,
    pub normal: Vec3,
    pub area: f64,
}

impl SurfaceFacet {
    pub fn points(&self, all: &[Vec3]) -> [Vec3; 3] {
        self.vertices.map(|v| all[v])
    }
}

/// The boundary `∂Ω` of a mesh: oriented facets, vertex-to-facet adjacency
/// and angle-weighted vertex normals. Vertex indices are those of the mesh.
#[derive(Debug, Clone)]
pub struct BoundarySurface {
    points: Vec<Vec3>,
    facets: Vec<SurfaceFacet>,
    vertex_facets: Vec<Vec<usize>>,
    vertex_normals: Vec<Option<Vec3>>,
}

impl BoundarySurface {
    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn facets(&self) -> &[SurfaceFacet] {
        &self.facets
    }

    /// Facets incident to mesh vertex `v` in ascending order; empty for
    /// interior vertices.
    pub fn vertex_facets(&self, v: usize) -> &[usize] {
        &self.vertex_facets[v]
    }

    pub fn vertex_normal(&self, v: usize) -> Option<Vec3> {
        self.vertex_normals[v]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        !self.vertex_facets[v].is_empty()
    }

    pub fn boundary_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.points.len()).filter(|&v| self.is_boundary_vertex(v))
    }

    /// Interior angle of facet `f` at its corner `v`.
    pub fn corner_angle(&self, f: usize, v: usize) -> f64 {
        let facet = &self.facets[f];
        let k = facet
            .vertices
            .iter()
            .position(|&x| x == v)
            .expect("vertex is a corner of the facet");
        let p = facet.points(&self.points);
        let e1 = p[(k + 1) % 3] - p[k];
        let e2 = p[(k + 2) % 3] - p[k];
        e1.cross(&e2).norm().atan2(e1.dot(&e2))
    }

    /// Total signed-area vector `Σ area·ν`; zero for a closed surface.
    pub fn area_vector(&self) -> Vec3 {
        self.facets.iter().map(|f| f.normal * f.area).sum()
    }

    pub fn area(&self) -> f64 {
        self.facets.iter().map(|f| f.area).sum()
    }
}

/// Extracts the faces owned by exactly one tetrahedron, orients them
/// outward and computes angle-weighted vertex normals.
pub fn extract_boundary(mesh: &Mesh) -> Result<BoundarySurface> {
    let (order, incidence) = face_incidence(mesh.tets());
    if let Some((face, owners)) = incidence.iter().find(|(_, o)| o.len() > 2) {
        return Err(Error::Topology(format!(
            "non-manifold face {face:?} is incident to {} tets",
            owners.len()
        )));
    }
    let labels: HashMap<[usize; 3], i32> = mesh
        .boundary_facets()
        .iter()
        .map(|f| (face_key(f.vertices), f.label))
        .collect();

    let points = mesh.vertices().to_vec();
    let mut facets = Vec::new();
    for key in order {
        let owners = &incidence[&key];
        if owners.len() != 1 {
            continue;
        }
        let t = owners[0];
        let vertices = outward_order(&points, &mesh.tets()[t], key);
        let [a, b, c] = vertices.map(|v| points[v]);
        let cross = (b - a).cross(&(c - a));
        let norm = cross.norm();
        if !(norm > 0.0) {
            return Err(Error::Geometry(format!(
                "boundary facet {vertices:?} is degenerate"
            )));
        }
        facets.push(SurfaceFacet {
            vertices,
            label: labels.get(&key).copied().unwrap_or(0),
            tet: t,
            normal: cross / norm,
            area: 0.5 * norm,
        });
    }

    let mut vertex_facets = vec![Vec::new(); points.len()];
    for (i, f) in facets.iter().enumerate() {
        for &v in &f.vertices {
            vertex_facets[v].push(i);
        }
    }
    let mut surface = BoundarySurface {
        points,
        facets,
        vertex_facets,
        vertex_normals: Vec::new(),
    };
    surface.vertex_normals = (0..surface.points.len())
        .map(|v| {
            if surface.vertex_facets[v].is_empty() {
                return None;
            }
            let sum: Vec3 = surface.vertex_facets[v]
                .iter()
                .map(|&f| surface.facets[f].normal * surface.corner_angle(f, v))
                .sum();
            Some(sum.normalize())
        })
        .collect();
    Ok(surface)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_cube_counts() {
        let m = generate_box_mesh([1, 1, 1], [1.0, 1.0, 1.0]).unwrap();
        assert_eq!(m.n_vertices(), 8);
        assert_eq!(m.n_tets(), 6);
        assert_eq!(m.boundary_facets().len(), 12);
        assert!((m.volume() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pi_box_volume() {
        let m = generate_box_mesh([2, 2, 2], [PI, PI, PI]).unwrap();
        assert_eq!(m.n_tets(), 48);
        assert!((m.volume() - PI.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_box_arguments() {
        assert!(generate_box_mesh([0, 1, 1], [1.0; 3]).is_err());
        assert!(generate_box_mesh([1, 1, 1], [1.0, -1.0, 1.0]).is_err());
        assert!(generate_box_mesh([1, 1, 1], [1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn box_facet_normals_are_axis_aligned() {
        let m = generate_box_mesh([4, 4, 4], [PI; 3]).unwrap();
        let b = extract_boundary(&m).unwrap();
        for f in b.facets() {
            let axis = ((f.label - 1) / 2) as usize;
            let sign = if f.label % 2 == 1 { -1.0 } else { 1.0 };
            let mut expected = Vec3::zeros();
            expected[axis] = sign;
            assert_eq!(f.normal, expected, "facet {:?}", f.vertices);
        }
    }

    #[test]
    fn refinement_multiplies_tets_by_eight() {
        for n in 1..4 {
            let a = generate_box_mesh([n; 3], [1.0; 3]).unwrap();
            let b = generate_box_mesh([2 * n; 3], [1.0; 3]).unwrap();
            assert_eq!(b.n_tets(), 8 * a.n_tets());
        }
    }

    #[test]
    fn cube_boundary_geometry() {
        let m = generate_box_mesh([1, 1, 1], [1.0; 3]).unwrap();
        let b = extract_boundary(&m).unwrap();
        assert_eq!(b.facets().len(), 12);
        for f in b.facets().iter().filter(|f| f.label == 1) {
            assert_eq!(f.normal, Vec3::new(-1.0, 0.0, 0.0));
        }
        assert!(b.area_vector().norm() < 1e-12);
        let s = 1.0 / 3f64.sqrt();
        for (v, p) in m.vertices().iter().enumerate() {
            let expected = p.map(|c| if c > 0.5 { s } else { -s });
            assert!((b.vertex_normal(v).unwrap() - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn outward_normals_point_away_from_owner() {
        let m = generate_box_mesh([2, 3, 2], [1.0, 2.0, 0.5]).unwrap();
        let b = extract_boundary(&m).unwrap();
        for f in b.facets() {
            assert!((f.normal.norm() - 1.0).abs() < 1e-12);
            let p = m.tet_points(f.tet);
            let c_tet = p.iter().sum::<Vec3>() / 4.0;
            let c_face = f.points(m.vertices()).iter().sum::<Vec3>() / 3.0;
            assert!(f.normal.dot(&(c_face - c_tet)) > 0.0);
        }
    }

    #[test]
    fn constant_field_flux_vanishes() {
        let m = generate_box_mesh([3, 2, 4], [PI, 1.0, 2.0]).unwrap();
        let b = extract_boundary(&m).unwrap();
        for c in [Vec3::new(1.0, 2.0, 3.0), Vec3::new(-0.5, 0.0, 7.0)] {
            let flux: f64 = b.facets().iter().map(|f| f.area * c.dot(&f.normal)).sum();
            assert!(flux.abs() < 1e-10);
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = generate_box_mesh([1, 1, 1], [1.0; 3]).unwrap();
        let again = Mesh::from_json_str(&m.to_json_string()).unwrap();
        assert_eq!(m, again);
        let m = generate_box_mesh([2, 1, 3], [PI, 0.1, 1.0 / 3.0]).unwrap();
        let again = Mesh::from_json_str(&m.to_json_string()).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn load_rejects_out_of_range_vertex() {
        let m = generate_box_mesh([1, 1, 1], [1.0; 3]).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&m.to_json_string()).unwrap();
        v["tets"][0][2] = serde_json::json!(42);
        let err = Mesh::from_json_str(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::Validation(ref s) if s.contains("in range")), "{err}");
    }

    #[test]
    fn load_rejects_negative_volume() {
        let m = generate_box_mesh([1, 1, 1], [1.0; 3]).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&m.to_json_string()).unwrap();
        let t0 = v["tets"][0].clone();
        v["tets"][0][1] = t0[2].clone();
        v["tets"][0][2] = t0[1].clone();
        let err = Mesh::from_json_str(&v.to_string()).unwrap_err();
        assert!(
            matches!(err, Error::Validation(ref s) if s.contains("positive signed volume")),
            "{err}"
        );
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = Mesh::from_json_str("{\n \"vertices\": [[0, 0, 0]],\n \"tets\": [1, 2").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert!(line >= 1),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn missing_boundary_facet_is_rejected() {
        let m = generate_box_mesh([1, 1, 1], [1.0; 3]).unwrap();
        let mut facets = m.boundary_facets().to_vec();
        facets.pop();
        let err = Mesh::new(m.vertices().to_vec(), m.tets().to_vec(), facets).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn non_manifold_face_is_rejected() {
        // Three tets glued on one triangle.
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.0, 0.0, -1.0),
            Vec3::new(0.3, 0.3, 2.0),
        ];
        let tets = vec![[0, 1, 2, 3], [0, 2, 1, 4], [0, 1, 2, 5]];
        let err = Mesh::new(v, tets, vec![]).unwrap_err();
        assert!(matches!(err, Error::Validation(ref s) if s.contains("exactly two")));
    }
}
