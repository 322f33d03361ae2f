use criterion::{criterion_group, criterion_main, Criterion};
use kinecx::cohomology::{cx_lower_bound, CohomologyModel};
use kinecx::lifting::{lift, LiftOptions};
use kinecx::roadmaps::universal_atlas;
use kinecx_bench::{lifting_fixture, universal_queries};
use std::hint::black_box;

fn plan_universal(c: &mut Criterion) {
    let atlas = universal_atlas(1.0).unwrap();
    let queries = universal_queries(256);
    c.bench_function("universal atlas, 256 plans", |b| {
        b.iter(|| {
            for q in &queries {
                black_box(atlas.plan(q).unwrap());
            }
        })
    });
}

fn lift_redundant_arm(c: &mut Criterion) {
    let (mech, c0, path) = lifting_fixture();
    let mut group = c.benchmark_group("lift three-link arm");
    for steps in [64, 256] {
        let opts = LiftOptions { step_count: steps, ..Default::default() };
        group.bench_function(format!("{steps} steps"), |b| b.iter(|| black_box(lift(&mech, &c0, &path, &opts).unwrap())));
    }
    group.finish();
}

fn six_dof_bound(c: &mut Criterion) {
    let model = CohomologyModel { config: "torus6".into(), work: "so3".into(), fstar_u: Some(vec![1, 0, 0, 0, 0, 0]), fstar: None };
    c.bench_function("6-dof nilpotency", |b| b.iter(|| black_box(cx_lower_bound(&model).unwrap())));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = plan_universal, lift_redundant_arm, six_dof_bound
}
criterion_main!(benches);
