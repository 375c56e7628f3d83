use std::hint::black_box;

use coverage_bench::fixture;
use coverage_core::blocks::{build_block_graph, build_blocks};
use coverage_core::grid::rasterize;
use coverage_core::mst::prim_mst;
use coverage_core::{optimize_plan, plan_at};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn raster(c: &mut Criterion) {
    let s = fixture("four_obstacles.toml");
    let obstacles = s.obstacles();
    let mut g = c.benchmark_group("rasterize");
    for cs in [0.5, 0.75, 1.5, 3.0] {
        g.bench_with_input(BenchmarkId::from_parameter(cs), &cs, |b, &cs| {
            b.iter(|| rasterize(black_box(&obstacles), s.bounds(), cs).unwrap())
        });
    }
    g.finish();
}

fn blocks_and_tree(c: &mut Criterion) {
    let s = fixture("four_obstacles.toml");
    let grid = rasterize(&s.obstacles(), s.bounds(), 0.75).unwrap();
    c.bench_function("blocks 0.75", |b| b.iter(|| build_blocks(black_box(&grid), 8).unwrap()));
    let blocks = build_blocks(&grid, 8).unwrap();
    let graph = build_block_graph(&blocks, &grid).unwrap();
    c.bench_function("prim 0.75", |b| b.iter(|| prim_mst(black_box(&graph), 0).unwrap()));
}

fn plan(c: &mut Criterion) {
    let s = fixture("four_obstacles.toml");
    let settings = s.plan_settings();
    let mut g = c.benchmark_group("plan_at");
    for cs in [0.75, 1.5, 3.0] {
        g.bench_with_input(BenchmarkId::from_parameter(cs), &cs, |b, &cs| {
            b.iter(|| plan_at(&s.obstacles(), s.bounds(), cs, black_box(&settings)).unwrap())
        });
    }
    g.finish();
    let ladder = s.ladder().unwrap();
    c.bench_function("cell size search", |b| {
        b.iter(|| optimize_plan(&s.obstacles(), s.bounds(), &ladder, &s.budget(), &settings, &s.search_config()).unwrap())
    });
}

criterion_group!(benches, raster, blocks_and_tree, plan);
criterion_main!(benches);
