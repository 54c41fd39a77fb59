use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use plectic_core::fq::FqCtx;
use plectic_core::lubin_tate::{lt_add_law, lt_scalar, LubinTatePoly};
use plectic_core::monoid::coind_finite_field;
use plectic_core::multivar::{act_gamma, act_phi, MultivarLaurent, RingSpecDelta};
use plectic_core::padic::PadicRingSpec;
use plectic_core::phigamma::{fixed_points, ResidueModule, ResidueRing, SearchBox};

fn two_var_ring() -> Arc<RingSpecDelta> {
    let base = PadicRingSpec::qp(2, 40).unwrap();
    let f = LubinTatePoly::standard(&base, 40).unwrap();
    RingSpecDelta::uniform(&base, vec!["a".into(), "b".into()], f, 6, 24, 3).unwrap()
}

fn sparse_element(spec: &Arc<RingSpecDelta>) -> MultivarLaurent {
    let base = spec.base().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let terms = (0..6)
        .map(|_| {
            let exp: Vec<i64> = (0..2).map(|_| rng.gen_range(-2..4i64)).collect();
            (exp, base.from_u64(rng.gen_range(1..200), 3))
        })
        .collect();
    spec.from_terms(terms).unwrap()
}

fn bench_lubin_tate(c: &mut Criterion) {
    let spec = PadicRingSpec::qp(2, 30).unwrap();
    let f = LubinTatePoly::standard(&spec, 30).unwrap();
    c.bench_function("lt_add_law p=2 cap=10", |b| {
        b.iter(|| lt_add_law(black_box(&f), 10, 4).unwrap())
    });
    let a = spec.from_u64(173, 30);
    c.bench_function("lt_scalar p=2 cap=12", |b| {
        b.iter(|| lt_scalar(black_box(&f), &a, 12, 4).unwrap())
    });
}

fn bench_ring_ops(c: &mut Criterion) {
    let spec = two_var_ring();
    let x = sparse_element(&spec);
    let y = sparse_element(&spec);
    c.bench_function("multivar mul sparse", |b| {
        b.iter(|| black_box(&x).mul_widened(black_box(&y)).unwrap())
    });
    let base = spec.base().clone();
    let gammas = vec![base.from_u64(3, 40), base.from_u64(5, 40)];
    c.bench_function("act_gamma two vars", |b| {
        b.iter(|| act_gamma(black_box(&x), &gammas).unwrap())
    });
    c.bench_function("act_phi one step", |b| {
        b.iter(|| act_phi(black_box(&x), &[1, 0]).unwrap())
    });
}

fn bench_solvers(c: &mut Criterion) {
    let ctx = FqCtx::new(2, 1).unwrap();
    let ring = ResidueRing::new(&ctx, 2, 16);
    let module = ResidueModule::trivial_rank_one(&ring, 1);
    c.bench_function("fixed_points box [-3,3]^2", |b| {
        b.iter(|| fixed_points(black_box(&module), SearchBox { lo: -3, hi: 3 }).unwrap())
    });
    c.bench_function("coinduction F_8 over F_2", |b| {
        b.iter(|| coind_finite_field(2, 8, 2, 2).unwrap())
    });
}

criterion_group!(benches, bench_lubin_tate, bench_ring_ops, bench_solvers);
criterion_main!(benches);
