use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cvtele_core::cloning::{bogoliubov_cloner, clone_objective, optimal_clone_fidelity};
use cvtele_core::gaussian::three_mode_standard_cm;
use cvtele_core::network::{localized_pt_eigenvalue, NetworkParams};
use cvtele_core::nongaussian::{
    apply_pattern, build_three_mode_fock, teleport_fidelity_fock, teleport_fidelity_pure, OperationPattern,
};
use cvtele_core::teleport::{fidelity_cm, optimize_local_squeezing};
use cvtele_core::verify::{random_gaussian_resource, rng_from_seed};

fn gaussian(c: &mut Criterion) {
    let form = three_mode_standard_cm(1.5, 1.0, 1.0).unwrap().state();
    let pair = form.partial_trace(&[0, 1]).unwrap();
    c.bench_function("fidelity_cm", |b| b.iter(|| fidelity_cm(black_box(&pair))));
    c.bench_function("symplectic_spectrum 3 modes", |b| b.iter(|| black_box(&form).symplectic_spectrum()));
    c.bench_function("optimize_local_squeezing", |b| b.iter(|| optimize_local_squeezing(black_box(&form), 0, 1)));
    let net = NetworkParams::from_mean(10, 1.0, 1.0, 0.5, 0.2).state().unwrap();
    c.bench_function("localized_pt_eigenvalue N=10", |b| b.iter(|| localized_pt_eigenvalue(black_box(&net))));
}

fn fock(c: &mut Criterion) {
    let mut group = c.benchmark_group("nongaussian");
    for cutoff in [24, 40] {
        group.bench_with_input(BenchmarkId::new("build_and_subA", cutoff), &cutoff, |b, &d| {
            b.iter(|| {
                let psi = build_three_mode_fock(0.66, d).unwrap();
                apply_pattern(&psi, OperationPattern::SUB_A).unwrap()
            })
        });
        let (psi, _) = apply_pattern(&build_three_mode_fock(0.66, cutoff).unwrap(), OperationPattern::SUB_A).unwrap();
        group.bench_with_input(BenchmarkId::new("operator_fidelity", cutoff), &psi, |b, psi| {
            b.iter(|| teleport_fidelity_pure(psi, 0, 1))
        });
    }
    group.sample_size(10);
    let (resource, _) = random_gaussian_resource(&mut rng_from_seed(1), 20).unwrap();
    let rho = resource.density();
    group.bench_function("chi_fidelity cutoff 20", |b| b.iter(|| teleport_fidelity_fock(black_box(&rho))));
    group.finish();
}

fn cloning(c: &mut Criterion) {
    c.bench_function("bogoliubov_cloner N=5", |b| b.iter(|| bogoliubov_cloner(black_box(5))));
    let mut group = c.benchmark_group("cloning");
    group.sample_size(10);
    group.bench_function("clone_objective N=2 D=16", |b| b.iter(|| clone_objective(2, black_box(16))));
    group.bench_function("optimal_clone_fidelity N=2 D=24", |b| b.iter(|| optimal_clone_fidelity(2, black_box(24))));
    group.finish();
}

criterion_group!(benches, gaussian, fock, cloning);
criterion_main!(benches);
