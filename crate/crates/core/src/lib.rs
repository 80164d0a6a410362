//! Continuous Lagrange finite elements for the time-harmonic Lamé system
//! with third-kind (`ν·u = 0`, `ν∧Tu = 0`) and fourth-kind (`ν∧u = 0`,
//! `ν·Tu = 0`) boundary conditions, posed in curl–div variational form over
//! the constrained spaces `X_T` and `X_N`.
//!
//! Besides the coupled Lamé solver the crate carries the decoupled problems
//! for the pressure part (a scalar Helmholtz equation for `-∇·u`) and the
//! shear part (a regularized Maxwell system for `∇∧u`), boundary geometry
//! diagnostics, and a manufactured-solution verification harness on the
//! cube `(0,π)³`.
//!
//! Module map:
//!
//! * [`mesh`]: tetrahedral meshes, box generation, JSON I/O, boundary extraction
//! * [`surface`]: first fundamental form, surface gradients, `S(x)` and
//!   decoupling admissibility
//! * [`linalg`]: CSR storage, MINRES/CG/GMRES, shift-invert Lanczos
//! * [`fem`]: P1/P2 elements, constrained DOF maps, assembly, norms, VTK
//! * [`lame`]: the coupled problems, the compact-operator form, tractions
//! * [`decoupled`]: Helmholtz and Maxwell solvers
//! * [`verify`]: manufactured cases, decoupling checks, convergence, resonance scans

pub mod decoupled;
pub mod error;
pub mod fem;
pub mod lame;
pub mod linalg;
pub mod mesh;
pub mod surface;
pub mod verify;

pub use error::{Error, Result};
pub use fem::{
    Constraint, DiscreteField, DofMap, FieldFunction, Order, ScalarFunction,
    ValueKind,
};
pub use lame::{BoundaryKind, LameProblem, MaterialParams, SolverSettings};
pub use linalg::SparseSym;
pub use mesh::{generate_box_mesh, BoundarySurface, Mesh};

/// Three-component vector used for points, normals and field values.
pub type Vec3 = nalgebra::Vector3<f64>;
