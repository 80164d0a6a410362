//! Continuous P1/P2 Lagrange elements on tetrahedra: quadrature, shape
//! functions, constrained DOF maps for `X_N`, `X_T` and `H¹` spaces,
//! assembly, discrete fields, norms and VTK export.

mod assembly;
mod dofmap;
mod element;
mod field;
mod function;
mod norms;
mod quadrature;
mod shape;
mod vtk;

pub use assembly::{
    assemble_boundary_load, assemble_load, assemble_matrix, assemble_scalar_boundary_load,
    assemble_scalar_load, boundary_points, BoundaryPoint, FormKind,
};
pub use dofmap::{build_dofmap, Constraint, DofMap, ValueKind, DISTINCT_NORMAL_ANGLE};
pub use element::ElementGeometry;
pub use field::{field_curl, field_div, interpolate, interpolate_scalar, DiscreteField, PointValue};
pub use function::{FieldFunction, ScalarFunction};
pub use norms::{
    l2_distance, l2_distance_by, l2_distance_to, l2_norm_of, norms, scalar_norms, ErrorNorms,
    FieldNorms, ScalarNorms,
};
pub use quadrature::{tet_rule, tri_rule, TetPoint, TriPoint};
pub use shape::{local_nodes, reference_shape, shape, Order, Shape, TET_EDGES};
pub use vtk::{export_vtk, vtk_string, VtkData};
