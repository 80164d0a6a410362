use lamefem::lame::assemble_lame_system;
use lamefem::mesh::extract_boundary;
use lamefem::surface::compute_s;
use lamefem::verify::{analytic_cube_eigenvalues, cube_mesh, manufactured_case, CaseKind, Family};
use lamefem::{generate_box_mesh, BoundaryKind, FieldFunction, LameProblem, MaterialParams, Order, Vec3};
use proptest::prelude::*;

fn material() -> impl Strategy<Value = MaterialParams> {
    (0.2f64..5.0, 0.2f64..3.0, 0.1f64..2.0).prop_map(|(l, m, w)| MaterialParams::new(l, m, w).unwrap())
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn box_mesh_volume_and_boundary(nx in 1usize..4, ny in 1usize..4, nz in 1usize..4,
                                    lx in 0.1f64..3.0, ly in 0.1f64..3.0, lz in 0.1f64..3.0) {
        let m = generate_box_mesh([nx, ny, nz], [lx, ly, lz]).unwrap();
        prop_assert_eq!(m.n_tets(), 6 * nx * ny * nz);
        prop_assert_eq!(m.boundary_facets().len(), 4 * (nx * ny + ny * nz + nz * nx));
        prop_assert!((m.volume() - lx * ly * lz).abs() <= 1e-12 * lx * ly * lz);
    }

    #[test]
    fn catalog_cases_satisfy_their_equations(kind in 0usize..6, a in 1u32..4, b in 1u32..4, c in 0u32..4,
                                             params in material(), seed in any::<u64>()) {
        let kind = CaseKind::ALL[kind];
        let mode = match kind {
            CaseKind::S4 | CaseKind::S3 => [a, b, 0],
            CaseKind::P4 | CaseKind::M3 => [a, b, c.max(1)],
            _ => [a, b, c],
        };
        let case = manufactured_case(kind.name(), mode, params).unwrap();
        prop_assert!(case.residual_audit(20, seed) <= 1e-8);
        prop_assert!(case.boundary_audit(20, seed) <= 1e-10);
    }

    #[test]
    fn lame_form_is_symmetric(params in material(), third in any::<bool>(), seed in vector(300)) {
        let bc = if third { BoundaryKind::Third } else { BoundaryKind::Fourth };
        let p = LameProblem::new(cube_mesh(1).unwrap(), params, bc, FieldFunction::zero(), Order::P2).unwrap();
        let sys = assemble_lame_system(&p).unwrap();
        let n = sys.stiffness.dim();
        let v: Vec<f64> = (0..n).map(|i| seed[i % seed.len()]).collect();
        let w: Vec<f64> = (0..n).map(|i| seed[(7 * i + 3) % seed.len()]).collect();
        let (vw, wv) = (sys.form(&v, &w), sys.form(&w, &v));
        prop_assert!((vw - wv).abs() <= 1e-12 * (vw.abs() + wv.abs() + 1.0));
        prop_assert!(sys.mass.bilinear(&v, &v) > 0.0);
        prop_assert!(sys.stiffness.bilinear(&v, &v) >= -1e-12 * sys.stiffness.max_abs());
    }

    #[test]
    fn analytic_eigenvalues_come_from_the_two_families(lambda in 0.1f64..5.0, mu in 0.1f64..3.0, third in any::<bool>()) {
        let bc = if third { BoundaryKind::Third } else { BoundaryKind::Fourth };
        let values = analytic_cube_eigenvalues(bc, lambda, mu, 30.0);
        prop_assert!(values.windows(2).all(|w| w[0].value <= w[1].value));
        for e in &values {
            let modulus = match e.family { Family::Pressure => lambda + 2.0 * mu, Family::Shear => mu };
            prop_assert!((e.value - modulus * e.kappa2 as f64).abs() <= 1e-12 * e.value);
            prop_assert!(e.value <= 30.0);
        }
        prop_assert!(values.iter().any(|e| e.family == Family::Shear && e.kappa2 == 2));
        prop_assert_eq!(values.iter().any(|e| e.family == Family::Pressure && e.kappa2 == 1), third);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn s_is_rigid_motion_invariant(ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in 0.1f64..1.0,
                                   angle in 0.0f64..6.28, shift in vector(3)) {
        let mesh = lamefem::Mesh::load(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/icosphere_r1_s4.json")).unwrap();
        let k = Vec3::new(ax, ay, az).normalize();
        let (s, c) = angle.sin_cos();
        let t = Vec3::new(shift[0], shift[1], shift[2]) * 5.0;
        let moved = mesh.transformed(|x| x * c + k.cross(x) * s + k * k.dot(x) * (1.0 - c) + t).unwrap();
        let a = compute_s(&extract_boundary(&mesh).unwrap()).unwrap();
        let b = compute_s(&extract_boundary(&moved).unwrap()).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            if let (Some(x), Some(y)) = (x, y) {
                prop_assert!((x - y).abs() <= 1e-10);
            }
        }
    }
}
