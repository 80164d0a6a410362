//! Fixtures shared by the benchmarks.

use lamefem::lame::{assemble_lame_system, LameSystem};
use lamefem::mesh::extract_boundary;
use lamefem::verify::{cube_mesh, manufactured_case};
use lamefem::{BoundarySurface, LameProblem, MaterialParams, Mesh, Order};

pub fn params() -> MaterialParams {
    MaterialParams::new(2.0, 1.0, 1.0).expect("valid material")
}

/// Case `p4` (1,1,1) on the `n³` cube mesh.
pub fn p4_problem(n: usize, order: Order) -> LameProblem {
    let case = manufactured_case("p4", [1, 1, 1], params()).expect("catalog case");
    case.lame_problem(cube_mesh(n).expect("cube mesh"), order).expect("off resonance")
}

pub fn p4_system(n: usize, order: Order) -> LameSystem {
    assemble_lame_system(&p4_problem(n, order)).expect("assembly")
}

/// Boundary of a unit icosphere built by projecting a subdivided icosahedron.
pub fn icosphere_surface() -> BoundarySurface {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/data/icosphere_r1_s4.json");
    let mesh = Mesh::load(path).expect("icosphere data");
    extract_boundary(&mesh).expect("closed surface")
}
