use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use toric_wkstab::extremal::extremal_family;
use toric_wkstab::filtration::{dh_histogram, weighted_volume_lattice, Minima};
use toric_wkstab::parallel::ExecPolicy;
use toric_wkstab::polytope::{cube, PerturbationCut};
use toric_wkstab::rational::{q, qf};
use toric_wkstab::stability::hat_integrals;
use toric_wkstab::triangulation::triangulate;
use toric_wkstab::{AffineFunction, PLConvexFunction, SmoothWeight, Weight};

const POLICIES: [(&str, ExecPolicy); 2] = [("sequential", ExecPolicy::Sequential), ("parallel", ExecPolicy::Parallel)];

fn hinge() -> PLConvexFunction {
    PLConvexFunction::max_of_affine(
        &cube(2, -1, 1),
        vec![
            AffineFunction::zero(2),
            AffineFunction::new(qf(1, 3), vec![q(1), qf(1, 2)]),
            AffineFunction::new(q(0), vec![q(-1), q(1)]),
        ],
    )
}

fn lattice_sum(c: &mut Criterion) {
    let f = hinge();
    let v = Weight::Smooth(SmoothWeight::exp_linear(vec![0.0, 0.3, -0.2], 7));
    let mut g = c.benchmark_group("lattice_sum");
    for m in [200u64, 800] {
        for (name, policy) in POLICIES {
            g.bench_with_input(BenchmarkId::new(name, m), &m, |b, &m| {
                b.iter(|| weighted_volume_lattice(black_box(&f), &v, m, Minima::Exact, policy).unwrap())
            });
        }
    }
    g.finish();
}

fn histogram(c: &mut Criterion) {
    let f = hinge();
    let v = Weight::one(2);
    let mut g = c.benchmark_group("dh_histogram");
    for (name, policy) in POLICIES {
        g.bench_function(name, |b| b.iter(|| dh_histogram(black_box(&f), &v, 32, 400, policy).unwrap()));
    }
    g.finish();
}

fn hat_moments(c: &mut Criterion) {
    let t = triangulate(&cube(2, -1, 1), 4);
    let v = Weight::one(2);
    let smooth = Weight::Smooth(SmoothWeight::exp_linear(vec![0.0, 0.5, 0.5], 9));
    let mut g = c.benchmark_group("hat_integrals");
    g.sample_size(20);
    for (name, policy) in POLICIES {
        g.bench_function(BenchmarkId::new("exact", name), |b| b.iter(|| hat_integrals(&v, &v, black_box(&t), policy)));
        g.bench_function(BenchmarkId::new("smooth", name), |b| {
            b.iter(|| hat_integrals(&smooth, &smooth, black_box(&t), policy))
        });
    }
    g.finish();
}

fn eps_sweep(c: &mut Criterion) {
    let sq = cube(2, -1, 1);
    let cut = [PerturbationCut::new(vec![-1, -1], q(2), q(1))];
    let v = Weight::one(2);
    let eps: Vec<_> = (0..16).map(|i| qf(i, 64)).collect();
    let mut g = c.benchmark_group("extremal_sweep");
    g.sample_size(20);
    for (name, policy) in POLICIES {
        g.bench_function(name, |b| b.iter(|| extremal_family(&sq, &cut, &v, &v, black_box(&eps), policy)));
    }
    g.finish();
}

criterion_group!(benches, lattice_sum, histogram, hat_moments, eps_sweep);
criterion_main!(benches);
