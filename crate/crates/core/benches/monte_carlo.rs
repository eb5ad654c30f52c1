//! Monte-Carlo trials of the secure case study, spread over the rayon pool
//! versus run one after another.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use irs_core::channel::{
    draw_channels, ArraySite, FadingModel, FadingSpec, Geometry, Layout, LinkFading, PathLoss, Receiver,
};
use irs_core::parallel::{map_range, Execution};
use irs_core::rng::{derive, purpose, stream, substream_seed};
use irs_core::scenarios::{solve_secure, CsiError, IrsModel, SecureOptions, SecureScenario};

fn site(p: [f64; 3], n: usize) -> ArraySite {
    ArraySite::new(p, Layout::Linear(n), 0.5)
}

fn geometry() -> Geometry {
    let rx = |p: [f64; 3], n| Receiver {
        site: site(p, n),
        direct_blocked: true,
    };
    Geometry {
        tx: site([0.0, 0.0, 10.0], 4),
        receivers: vec![
            rx([60.0, 20.0, 1.5], 1),
            rx([50.0, -30.0, 1.5], 1),
            rx([70.0, 0.0, 1.5], 2),
        ],
        irs: vec![site([30.0, 40.0, 10.0], 4), site([30.0, -40.0, 10.0], 4)],
        wavelength: 0.1,
    }
}

fn trial(seed: u64) -> f64 {
    let spec = FadingSpec {
        model: FadingModel::Rician { k_factor: 3.0 },
        pathloss: PathLoss {
            reference_loss_db: 30.0,
            exponent: 2.2,
        },
    };
    let cs = draw_channels(
        &geometry(),
        &LinkFading::uniform(spec),
        1e-12,
        &mut stream(derive(seed, purpose::CHANNELS)),
    )
    .expect("valid geometry");
    let sc = SecureScenario {
        users: vec![0, 1],
        eavesdroppers: vec![2],
        power_budget: 1.0,
        leakage_cap: 1.0,
        csi_error: CsiError::default(),
    };
    solve_secure(&sc, &cs, IrsModel::Ids, seed, &SecureOptions::default())
        .expect("solvable")
        .objective
}

fn trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("secure_trials");
    group.sample_size(10);
    let n = 16;
    for (name, exec) in [("parallel", Execution::Auto), ("sequential", Execution::Sequential)] {
        group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
            b.iter(|| map_range(n, exec, |t| trial(substream_seed(7, 0, t as u64))))
        });
    }
    group.finish();
}

criterion_group!(benches, trials);
criterion_main!(benches);
