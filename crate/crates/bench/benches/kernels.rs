use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lamefem::lame::{assemble_lame_system, solve_lame_system};
use lamefem::surface::compute_s;
use lamefem::{Order, SolverSettings};
use lamefem_bench::{icosphere_surface, p4_problem, p4_system};

fn bench_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assembly");
    for n in [2usize, 4] {
        let problem = p4_problem(n, Order::P2);
        group.bench_with_input(BenchmarkId::new("lame_p2", n), &problem, |b, p| {
            b.iter(|| assemble_lame_system(p).unwrap())
        });
    }
    group.finish();
}

fn bench_minres(c: &mut Criterion) {
    let mut group = c.benchmark_group("minres");
    group.sample_size(10);
    let settings = SolverSettings {
        guard: false,
        ..SolverSettings::default()
    };
    for n in [2usize, 4] {
        let sys = p4_system(n, Order::P2);
        group.bench_with_input(BenchmarkId::new("lame_p2", n), &sys, |b, s| {
            b.iter(|| solve_lame_system(s, &settings).unwrap())
        });
    }
    group.finish();
}

fn bench_compute_s(c: &mut Criterion) {
    let surface = icosphere_surface();
    c.bench_function("compute_s/icosphere_s4", |b| b.iter(|| compute_s(&surface).unwrap()));
}

criterion_group!(assembly, bench_assembly);
criterion_group!(solvers, bench_minres);
criterion_group!(geometry, bench_compute_s);
criterion_main!(assembly, solvers, geometry);
