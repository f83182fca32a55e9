//! Parallel against sequential execution on the data-parallel kernels.
//! `CUBULATE_THREADS` caps the pool used by the parallel path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cubulate::ball::build_ball_with_core;
use cubulate::dual_cube::HalfspaceSystem;
use cubulate::par::{self, Exec};
use cubulate::walls::{carrier_quasiconvexity, linear_separation_fit, WallSystem};
use cubulate::word_problem::dehn_reduce;
use cubulate::{corpus, parse_presentation, StaggeredComplex};

fn load(name: &str) -> StaggeredComplex {
    let path = format!("{}/../../presentations/{name}.sgc", env!("CARGO_MANIFEST_DIR"));
    parse_presentation(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const PATHS: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn kernels(c: &mut Criterion) {
    par::init();
    let cx = load("p1");
    let b = build_ball_with_core(&cx, 5).unwrap();
    let sys = WallSystem::build(&b);
    let words = corpus::trivial_corpus(&cx, 7, 500, 5, 8);

    let mut g = c.benchmark_group("p1");
    g.sample_size(10);
    for (name, exec) in PATHS {
        g.bench_with_input(BenchmarkId::new("linear_separation", name), &exec, |bch, &e| {
            bch.iter(|| linear_separation_fit(&b, &sys, e))
        });
        g.bench_with_input(BenchmarkId::new("quasiconvexity", name), &exec, |bch, &e| {
            bch.iter(|| carrier_quasiconvexity(&b, &sys, 5, e))
        });
        g.bench_with_input(BenchmarkId::new("halfspaces", name), &exec, |bch, &e| {
            bch.iter(|| HalfspaceSystem::new(&b, &sys, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("dehn_corpus", name), &exec, |bch, &e| {
            bch.iter(|| par::map(e, &words, |w| dehn_reduce(&cx, w).trivial()))
        });
    }
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
