//! Parallel vs sequential grid sweeps.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use psop_core::classify::{self, GridParams};
use psop_core::operators::OperatorSpec;
use psop_core::verify::{self, SweepConfig};
use psop_core::{Element, Exec, Scalar, SpaceSpec, Symbol};

const MODES: [(&str, Exec); 2] = [
    ("parallel", Exec::Parallel),
    ("sequential", Exec::Sequential),
];

fn hat_continuity(c: &mut Criterion) {
    let cfg = SweepConfig {
        n: 64,
        k: 8,
        symbols: 8,
        ..SweepConfig::default()
    };
    let space = SpaceSpec::lambda1_linear();
    let mut g = c.benchmark_group("hat_continuity");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| verify::hat_continuity(&space, &cfg, exec).unwrap())
        });
    }
    g.finish();
}

fn tame_constant(c: &mut Criterion) {
    let theta = Symbol::geometric(Scalar::ratio(1, 2), Scalar::ratio(1, 2));
    let op = OperatorSpec::hat(SpaceSpec::lambda1_linear(), theta).unwrap();
    let mut g = c.benchmark_group("ln_tame_constant");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| classify::ln_tame_constant(&op, 4, 256, exec).unwrap())
        });
    }
    g.finish();
}

fn ergodic_probe(c: &mut Criterion) {
    let theta = Symbol::geometric(Scalar::ratio(1, 2), Scalar::ratio(1, 2));
    let op = OperatorSpec::hat(SpaceSpec::lambda1_linear(), theta).unwrap();
    let grid = GridParams {
        k: 32,
        p: 4,
        ..GridParams::default()
    };
    let mut g = c.benchmark_group("mean_ergodic_probe");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| classify::mean_ergodic_probe(&op, &Element::basis(1), &grid, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, hat_continuity, tame_constant, ergodic_probe);
criterion_main!(benches);
