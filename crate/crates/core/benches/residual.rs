use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use simplex_esdg::euler::Gas;
use simplex_esdg::geometry::MetricKind;
use simplex_esdg::mesh::MeshSpec;
use simplex_esdg::reference::ElementType;
use simplex_esdg::solver::{Discretization, DiscretizationSpec, InterfaceFlux, SolverOptions};

fn build(element: ElementType, m: usize, q: usize, pg: usize, parallel: bool) -> Discretization {
    let spec = DiscretizationSpec {
        mesh: MeshSpec {
            element,
            m,
            l: 2.0,
            eps: 1.0 / 16.0,
            pg,
        },
        q,
        p: q,
        metric: MetricKind::default_for(element),
        gamma: 1.4,
    };
    let options = SolverOptions {
        interface: InterfaceFlux::LaxFriedrichs,
        parallel,
        ..SolverOptions::default()
    };
    Discretization::build(&spec, options).expect("bench discretization")
}

fn residual(c: &mut Criterion) {
    let gas = Gas::default();
    let cases = [
        (ElementType::Triangle, 8, 4, 4),
        (ElementType::Tetrahedron, 2, 3, 2),
    ];
    let mut group = c.benchmark_group("time_derivative");
    group.sample_size(20);
    for (element, m, q, pg) in cases {
        for parallel in [false, true] {
            let disc = build(element, m, q, pg, parallel);
            let u = disc
                .project(0.0, |x| gas.conserved(1.0 + 0.2 * (x[0] + x[1]).sin(), [1.0, 0.5, 0.0], 1.0))
                .coeffs;
            let mut du = vec![0.0; disc.state_len()];
            let label = if parallel { "parallel" } else { "serial" };
            group.bench_with_input(
                BenchmarkId::new(format!("{element}-M{m}-q{q}"), label),
                &u,
                |b, u| b.iter(|| disc.time_derivative(black_box(u), &mut du).unwrap()),
            );
        }
    }
    group.finish();
}

criterion_group!(benches, residual);
criterion_main!(benches);
