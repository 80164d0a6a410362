use lamefem::lame::assemble_lame_system;
use lamefem::linalg::{eigenpairs_near, LanczosOptions, SparseSym};
use lamefem::verify::{analytic_cube_eigenvalues, cube_mesh};
use lamefem::{BoundaryKind, FieldFunction, LameProblem, MaterialParams, Order};
use nalgebra::{DMatrix, SymmetricEigen};

fn dense(a: &SparseSym) -> DMatrix<f64> {
    let n = a.dim();
    DMatrix::from_fn(n, n, |i, j| a.get(i, j))
}

/// Eigenvalues of `(K, M)` from `L⁻¹ K L⁻ᵀ` with `M = L Lᵀ`.
fn dense_pencil(k: &SparseSym, m: &SparseSym) -> Vec<f64> {
    let l = dense(m).cholesky().unwrap().l();
    let li = l.clone().try_inverse().unwrap();
    let c = &li * dense(k) * li.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let mut values: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

#[test]
fn lanczos_matches_dense_oracle_and_analytic_spectrum() {
    let params = MaterialParams::new(2.0, 1.0, 1.0).unwrap();
    for bc in [BoundaryKind::Fourth, BoundaryKind::Third] {
        let p = LameProblem::new(cube_mesh(2).unwrap(), params, bc, FieldFunction::zero(), Order::P2).unwrap();
        let sys = assemble_lame_system(&p).unwrap();
        let all = dense_pencil(&sys.stiffness, &sys.mass);
        let analytic = analytic_cube_eigenvalues(bc, 2.0, 1.0, 20.0);

        for &sigma in &[1.7, 4.6, 11.0] {
            let nearest_dense = all
                .iter()
                .copied()
                .min_by(|a, b| (a - sigma).abs().total_cmp(&(b - sigma).abs()))
                .unwrap();
            let pair = eigenpairs_near(&sys.stiffness, &sys.mass, sigma, 1, &LanczosOptions::default()).unwrap();
            let found = pair[0].value;
            assert!(
                (found - nearest_dense).abs() <= 1e-8 * nearest_dense,
                "{bc:?} σ={sigma}: lanczos {found} vs dense {nearest_dense}"
            );
        }

        // Conforming Galerkin eigenvalues approximate from above.
        let lowest = all[0];
        let exact_lowest = analytic[0].value;
        assert!(lowest >= exact_lowest * (1.0 - 1e-12), "{bc:?}: {lowest} below {exact_lowest}");
        assert!((lowest - exact_lowest) / exact_lowest < 0.1, "{bc:?}: {lowest} vs {exact_lowest}");
    }
}
