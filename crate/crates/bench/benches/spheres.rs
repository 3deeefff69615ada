use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use maxtree_core::tree::sphere_check;
use maxtree_core::{Tree, TreeSpec, VertexAddress};

fn closed_form(c: &mut Criterion) {
    let tree = Tree::new(TreeSpec::stromberg(2, 3).unwrap());
    let x = VertexAddress::new(2, vec![1, 0, 1]);
    let mut g = c.benchmark_group("sphere_size_closed_form");
    for r in [4u32, 8, 16] {
        g.bench_with_input(BenchmarkId::from_parameter(r), &r, |b, &r| b.iter(|| tree.sphere_size_closed_form(&x, r).unwrap()));
    }
    g.finish();
}

fn enumeration(c: &mut Criterion) {
    let tree = Tree::new(TreeSpec::stromberg(2, 3).unwrap());
    let o = tree.origin();
    let mut g = c.benchmark_group("enumerate_sphere");
    for r in [4u32, 6, 8] {
        g.bench_with_input(BenchmarkId::from_parameter(r), &r, |b, &r| b.iter(|| tree.enumerate_sphere(&o, r).unwrap().len()));
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let tree = Tree::new(TreeSpec::striped(2, 3, 1, 1).unwrap());
    c.bench_function("sphere_check x<=3 r<=6", |b| b.iter(|| sphere_check(&tree, 3, 6).unwrap().mismatches.len()));
}

criterion_group!(benches, closed_form, enumeration, oracle);
criterion_main!(benches);
