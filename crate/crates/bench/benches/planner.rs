//! Hot-path benchmarks: single ray cast, full sensor sweep, net force
//! evaluation, wall-line estimation, and two end-to-end scenario runs.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use nav_core::{
    apf::total_force,
    builtin_scenario, run,
    sensing::{obstacle_points, scan},
    wfm::estimate_wall,
    Dir2, Policy, Vec2,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The most cluttered bundled arena; worst case for geometry queries.
fn arena() -> nav_core::sim::RunConfig {
    builtin_scenario("comparison-arena")
        .expect("bundled scenario")
        .build()
        .expect("buildable scenario")
}

fn bench_ray_cast(c: &mut Criterion) {
    let config = arena();
    let origin = Vec2::new(2.3, 4.0);
    let dir = Dir2::from_angle(0.3).unwrap();
    c.bench_function("ray_cast/cluttered", |b| {
        b.iter(|| {
            config
                .world
                .ray_cast(black_box(origin), black_box(dir), black_box(4.0))
        })
    });
}

fn bench_scan(c: &mut Criterion) {
    let config = arena();
    let pose = Vec2::new(2.3, 4.0);
    c.bench_function("scan/ring8", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        b.iter(|| {
            scan(
                &config.world,
                black_box(pose),
                black_box(0.3),
                &config.sensors,
                &mut rng,
            )
        })
    });
}

fn bench_total_force(c: &mut Criterion) {
    let config = arena();
    let pose = Vec2::new(2.3, 4.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let s = scan(&config.world, pose, 0.3, &config.sensors, &mut rng);
    let points = obstacle_points(&s, pose, 0.3, &config.sensors);
    let goal = config.world.goal();
    c.bench_function("total_force/ring8_points", |b| {
        b.iter(|| total_force(black_box(pose), black_box(goal), &points, &config.apf))
    });
}

fn bench_estimate_wall(c: &mut Criterion) {
    let config = arena();
    let pose = Vec2::new(2.3, 4.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let s = scan(&config.world, pose, 0.3, &config.sensors, &mut rng);
    c.bench_function("estimate_wall/ring8", |b| {
        b.iter(|| {
            estimate_wall(
                black_box(&s),
                black_box(pose),
                black_box(0.3),
                &config.sensors,
            )
        })
    });
}

fn bench_full_runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate");
    group.sample_size(20);
    for (name, policy) in [("open-corridor", Policy::Full), ("h-shape", Policy::Full)] {
        let config = builtin_scenario(name).unwrap().build().unwrap();
        group.bench_function(format!("{name}/{policy}"), |b| {
            b.iter(|| run(black_box(&config), policy, 0))
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_ray_cast,
    bench_scan,
    bench_total_force,
    bench_estimate_wall,
    bench_full_runs
);
criterion_main!(benches);
