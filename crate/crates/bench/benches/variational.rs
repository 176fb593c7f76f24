use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use jumpvar::model::{dissipative_heisenberg, AnsatzKind, LatticeSpec};
use jumpvar::oracle::{build_liouvillian, steady_states, Topology};
use jumpvar::variational::{minimize_norm, MinimizeOptions, VariationalFunctional};

fn functional(c: &mut Criterion) {
    let model = dissipative_heisenberg(0.4, LatticeSpec::cubic(true)).unwrap();
    let f = VariationalFunctional::new(&model);
    let (a, b) = ([0.3, 0.1, -0.2], [-0.1, 0.4, 0.2]);
    c.bench_function("functional_norm", |bench| bench.iter(|| f.norm(black_box(&a), black_box(&b))));
}

fn minimize(c: &mut Criterion) {
    let model = dissipative_heisenberg(1.6, LatticeSpec::cubic(true)).unwrap();
    let opts = MinimizeOptions::default();
    let mut g = c.benchmark_group("minimize_norm");
    g.sample_size(20);
    g.bench_function("uniform", |bench| {
        bench.iter(|| minimize_norm(black_box(&model), AnsatzKind::Uniform, &opts).unwrap())
    });
    g.bench_function("bipartite", |bench| {
        bench.iter(|| minimize_norm(black_box(&model), AnsatzKind::Bipartite, &opts).unwrap())
    });
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let model = dissipative_heisenberg(0.4, LatticeSpec::cubic(false)).unwrap();
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    for n in [2, 4] {
        g.bench_function(format!("build_liouvillian_ring_{n}"), |bench| {
            bench.iter(|| build_liouvillian(black_box(&model), n, Topology::Ring).unwrap())
        });
    }
    let l = build_liouvillian(&model, 3, Topology::Ring).unwrap();
    g.bench_function("steady_states_ring_3", |bench| bench.iter(|| steady_states(black_box(&l), 1e-9).unwrap()));
    g.finish();
}

criterion_group!(benches, functional, minimize, oracle);
criterion_main!(benches);
