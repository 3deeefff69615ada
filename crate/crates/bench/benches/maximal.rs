use criterion::{criterion_group, criterion_main, Criterion};
use maxtree_bench::{probe_points, spread_function};
use maxtree_core::maximal::evaluate_many;
use maxtree_core::{Exponent, MaximalKind, Tree, TreeSpec};

fn operators(c: &mut Criterion) {
    let tree = Tree::new(TreeSpec::stromberg(2, 3).unwrap());
    let f = spread_function(&tree, 4, 3).unwrap();
    let xs = probe_points(&tree, 3).unwrap();
    let kinds = [
        ("centred", MaximalKind::Centred),
        ("uncentred", MaximalKind::Uncentred),
        ("modified tau", MaximalKind::Modified(Exponent::tau(2, 3))),
    ];
    let mut g = c.benchmark_group("maximal");
    g.sample_size(20);
    for (name, kind) in &kinds {
        g.bench_function(*name, |b| b.iter(|| evaluate_many(&tree, &f, &xs, kind).unwrap().len()));
    }
    g.finish();
}

criterion_group!(benches, operators);
criterion_main!(benches);
