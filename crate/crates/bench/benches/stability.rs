use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mrisr::stability::{phi, scan_component_region, Component, SectorSampling, SectorSpec, StabilityFunction, Window};
use mrisr_bench::method;
use num_complex::Complex64;

fn phi_eval(c: &mut Criterion) {
    let mut group = c.benchmark_group("phi");
    for z in [Complex64::new(-0.1, 0.05), Complex64::new(-5.0, 3.0)] {
        group.bench_with_input(BenchmarkId::new("phi5", z), &z, |b, &z| b.iter(|| phi(5, z)));
    }
    group.finish();
}

fn stability_eval(c: &mut Criterion) {
    let mut group = c.benchmark_group("stability_function");
    let z = Complex64::new(-1.0, 0.5);
    for name in ["imex-mri-sr21", "imex-mri-sr43", "merk5"] {
        let sf = StabilityFunction::new(&method(name).0);
        group.bench_function(BenchmarkId::new("eval", name), |b| b.iter(|| sf.eval(z, z, z)));
        let f = sf.fast_factors(z);
        group.bench_function(BenchmarkId::new("eval_cached", name), |b| b.iter(|| sf.eval_with(&f, z, z)));
    }
    group.finish();
}

fn region_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("scan");
    group.sample_size(10);
    let t = method("imex-mri-sr32").0;
    let w = Window::new((-4.0, 0.5), (-3.0, 3.0), 20, 20).expect("window");
    let fast = SectorSpec::new(45.0, 1e2).expect("sector");
    group.bench_function("explicit_20x20_coarse", |b| {
        b.iter(|| scan_component_region(&t, Component::Explicit, fast, w, &SectorSampling::coarse()).expect("scan"))
    });
    group.finish();
}

criterion_group!(benches, phi_eval, stability_eval, region_scan);
criterion_main!(benches);
