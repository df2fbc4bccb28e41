use criterion::{black_box, criterion_group, criterion_main, Criterion};

use ribbonflow::eigen::{family_eigen, FamilyKind};
use ribbonflow::exact::q;
use ribbonflow::measures::{plane_point, survivor_check};
use ribbonflow::renorm::{direction_from_sequence, Direction, RaySpec};
use ribbonflow::{shrinking_sequence, Dd, Flow, HPoint, QVec2, QuadNum, Surface};

fn theta(lambda: &QuadNum) -> QVec2 {
    let spec: RaySpec = "(h^-1 v^-1)".parse().unwrap();
    match direction_from_sequence(lambda, &spec).unwrap() {
        Direction::Exact(t) => t,
        Direction::Interval(_) => unreachable!(),
    }
}

fn arithmetic(c: &mut Criterion) {
    let x: QuadNum = "3/7+2/5*sqrt(41)".parse().unwrap();
    let y: QuadNum = "-1/3+1/9*sqrt(41)".parse().unwrap();
    c.bench_function("quadnum mul+div", |b| {
        b.iter(|| black_box(&x).try_mul(black_box(&y)).unwrap().try_div(&x).unwrap())
    });
}

fn shrinking(c: &mut Criterion) {
    let lambda = q(5, 2);
    let t = theta(&lambda);
    c.bench_function("shrinking sequence, 40 steps", |b| {
        b.iter(|| shrinking_sequence(&lambda, black_box(&t), 40).unwrap())
    });
}

fn eigen(c: &mut Criterion) {
    let fam = family_eigen(&FamilyKind::NTreeConstant { n: 3 }).unwrap();
    c.bench_function("eigen residual, ntree(3) radius 10", |b| b.iter(|| fam.verify(black_box(10)).unwrap()));
}

fn flow(c: &mut Criterion) {
    let fam = family_eigen(&FamilyKind::Tripod { t: QuadNum::int(2) }).unwrap();
    let s = Surface::from_family(&fam);
    let t = theta(&fam.lambda);
    let start = HPoint { a: s.g().root(), t: q(1, 5) };
    let mut g = c.benchmark_group("first return, 1000 steps on tripod");
    g.sample_size(20);
    g.bench_function("exact", |b| {
        let mut flow = Flow::<QuadNum>::new(&s, &t, 100_000).unwrap();
        b.iter(|| flow.orbit(black_box(&start), 1000).unwrap())
    });
    g.bench_function("double-double", |b| {
        let mut flow = Flow::<Dd>::new(&s, &t, 100_000).unwrap();
        let p = HPoint { a: start.a.clone(), t: Dd::new(0.2) };
        b.iter(|| flow.orbit(black_box(&p), 1000).unwrap())
    });
    g.finish();
}

fn survivor(c: &mut Criterion) {
    let w1 = family_eigen(&FamilyKind::GzConstant).unwrap();
    let w2 = family_eigen(&FamilyKind::GzExponential { t: QuadNum::int(2) }).unwrap();
    let data = shrinking_sequence(&w1.lambda, &theta(&w1.lambda), 12).unwrap();
    let f = plane_point(w2.graph.clone(), w2.oracle.clone(), &theta(&w2.lambda));
    let g = w2.graph.as_ref();
    c.bench_function("survivor check, depth 12 radius 12", |b| {
        b.iter(|| survivor_check(g, &f, &data, 12, &g.root(), 12).unwrap())
    });
}

criterion_group!(benches, arithmetic, shrinking, eigen, flow, survivor);
criterion_main!(benches);
