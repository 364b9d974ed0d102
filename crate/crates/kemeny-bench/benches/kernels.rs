use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use kemeny_core::diffusion::{self, Boundary, DiffusionAnalysis, DiffusionSpec};
use kemeny_core::{chain, ctmc, sim, Expr, RngStream};

fn bench_dtmc_kemeny(c: &mut Criterion) {
    let mut group = c.benchmark_group("dtmc_kemeny_function");
    for &n in &[10usize, 50, 150] {
        let mut rng = RngStream::new(1, 0);
        let p = sim::random_transition_matrix(n, 0.5, &mut rng).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| chain::kemeny_function(black_box(p)).unwrap())
        });
    }
    group.finish();
}

fn bench_ctmc_kemeny(c: &mut Criterion) {
    let mut rng = RngStream::new(2, 0);
    let q = sim::random_generator_matrix(50, 0.5, &mut rng).unwrap();
    c.bench_function("ctmc_kemeny_function_50", |b| {
        b.iter(|| ctmc::kemeny_function_ct(black_box(&q)).unwrap())
    });
}

fn bessel() -> DiffusionAnalysis {
    let spec = DiffusionSpec::new(
        Expr::parse("1/x").unwrap(),
        Expr::parse("1").unwrap(),
        (0.0, 1.0),
        Boundary::Entrance,
        Boundary::Reflecting,
        None,
    )
    .unwrap();
    DiffusionAnalysis::build(spec).unwrap()
}

fn bench_diffusion(c: &mut Criterion) {
    c.bench_function("diffusion_build_bessel", |b| {
        b.iter(|| {
            let spec = DiffusionSpec::new(
                Expr::parse("1/x").unwrap(),
                Expr::parse("1").unwrap(),
                (0.0, 1.0),
                Boundary::Entrance,
                Boundary::Reflecting,
                None,
            )
            .unwrap();
            DiffusionAnalysis::build(spec).unwrap()
        })
    });

    let a = bessel();
    c.bench_function("diffusion_scale_eval", |b| {
        b.iter(|| a.scale(black_box(0.37)).unwrap())
    });
    c.bench_function("diffusion_expected_hitting", |b| {
        b.iter(|| diffusion::expected_hitting(&a, black_box(1.0), black_box(0.5)).unwrap())
    });
    c.bench_function("diffusion_profile_5pts", |b| {
        let grid = diffusion::default_grid(&a, 5).unwrap();
        b.iter(|| diffusion::kemeny_profile(&a, black_box(&grid)).unwrap())
    });
}

fn bench_expr(c: &mut Criterion) {
    let e = Expr::parse("exp(x^2/2) + 1/x - sqrt(abs(cos(x)))").unwrap();
    c.bench_function("expr_eval", |b| b.iter(|| e.eval(black_box(0.73)).unwrap()));
    c.bench_function("expr_parse", |b| {
        b.iter(|| Expr::parse(black_box("exp(x^2/2) + 1/x - sqrt(abs(cos(x)))")).unwrap())
    });
}

fn bench_mc(c: &mut Criterion) {
    let p = kemeny_core::TransitionMatrix::validate(&[vec![0.7, 0.3], vec![0.2, 0.8]]).unwrap();
    let rng = RngStream::new(42, 0);
    c.bench_function("mc_kemeny_dtmc_1e4", |b| {
        b.iter(|| sim::estimate_kemeny_dtmc(&p, 0, 10_000, black_box(&rng)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_dtmc_kemeny,
    bench_ctmc_kemeny,
    bench_diffusion,
    bench_expr,
    bench_mc
);
criterion_main!(benches);
