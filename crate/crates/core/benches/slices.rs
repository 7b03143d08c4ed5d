use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use cvkey::channel::ProtocolSignal;
use cvkey::information::Scheme;
use cvkey::rate::{secret_key_rate, slice_value, Numerics, SweepTemplate};
use cvkey::Execution;

fn template(execution: Execution) -> SweepTemplate {
    SweepTemplate {
        xi: 0.01,
        eta2: 1.0,
        loss_db_per_km: 0.2,
        signal: ProtocolSignal::from_photon_number(0.5, 1.0).unwrap(),
        scheme: Scheme::Rr,
        numerics: Numerics {
            execution,
            ..Numerics::default()
        },
        sifting: false,
    }
}

fn key_rate(c: &mut Criterion) {
    let mut group = c.benchmark_group("key_rate_rr_40km");
    group.sample_size(10);
    for (name, exec) in [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)] {
        let cfg = template(exec).config(40.0, 0.8).unwrap();
        group.bench_function(name, |b| b.iter(|| secret_key_rate(black_box(&cfg)).unwrap().rate));
    }
    group.finish();
}

fn single_slice(c: &mut Criterion) {
    let cfg = template(Execution::Sequential).config(40.0, 0.8).unwrap();
    c.bench_function("slice_m0.5", |b| {
        b.iter(|| slice_value(black_box(0.5), &cfg).unwrap().margin())
    });
}

criterion_group!(benches, key_rate, single_slice);
criterion_main!(benches);
