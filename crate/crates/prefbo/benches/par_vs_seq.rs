//! Throughput of the data-parallel kernels, parallel vs sequential.
//!
//! Run `cargo bench` for the rayon build and
//! `cargo bench --no-default-features` for the sequential fallback; bench
//! ids carry the mode so criterion keeps the two sets side by side.

use criterion::{criterion_group, criterion_main, Criterion};
use prefbo::acquisition::{expected_improvement_mc_crn, gumbel_base_draws};
use prefbo::asf_dist::{Gumbel, MaxOfGaussians};
use prefbo::driver::{run, Method, RunConfig};
use prefbo::ga::{self, GaConfig};
use prefbo::gp::TrainedGp;
use prefbo::par;
use prefbo::problems::{Benchmark, ProblemSpec};
use prefbo::scalarize::PreferenceSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODE: &str = if cfg!(feature = "parallel") { "parallel" } else { "sequential" };

fn synthetic_data(n_points: usize, dim: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let xs: Vec<Vec<f64>> =
        (0..n_points).map(|_| (0..dim).map(|_| rng.random()).collect()).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|x| (x.iter().sum::<f64>() * 2.5).sin() + 0.05 * rng.random::<f64>())
        .collect();
    (xs, ys)
}

fn bench_gp_train(c: &mut Criterion) {
    let (xs, ys) = synthetic_data(60, 5);
    c.bench_function(&format!("gp_train_60pts_10restarts/{MODE}"), |b| {
        b.iter(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            TrainedGp::train(&xs, &ys, 10, &mut rng).unwrap()
        })
    });
}

fn bench_ga_on_gumbel_acquisition(c: &mut Criterion) {
    let (xs, ys) = synthetic_data(50, 5);
    let ys2: Vec<f64> = ys.iter().map(|y| 1.0 - y).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m1 = TrainedGp::train(&xs, &ys, 5, &mut rng).unwrap();
    let m2 = TrainedGp::train(&xs, &ys2, 5, &mut rng).unwrap();
    let pref =
        PreferenceSpec::new(vec![0.2, 0.2], vec![-1.2, -1.2], vec![1.2, 1.2]).unwrap();
    let normals: Vec<f64> = (0..1000 * 2).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
    let base = gumbel_base_draws(1000, &mut rng);
    let acq = move |u: &[f64]| {
        let p1 = m1.predict(u).unwrap();
        let p2 = m2.predict(u).unwrap();
        let dist =
            MaxOfGaussians::from_posterior(&[p1.mean, p2.mean], &[p1.std, p2.std], &pref)
                .unwrap();
        match Gumbel::fit(&dist.sample_with_normals(&normals)) {
            Ok(q) => expected_improvement_mc_crn(&q, 0.3, &base),
            Err(_) => 0.0,
        }
    };
    let bounds = vec![(0.0, 1.0); 5];
    let cfg = GaConfig { population_size: 50, generations: 20, seed: 11, ..GaConfig::default() };
    c.bench_function(&format!("ga_maximize_gumbel_acquisition/{MODE}"), |b| {
        b.iter(|| ga::maximize(&acq, &bounds, &cfg).unwrap())
    });
}

fn bench_candidate_batch(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let normals: Vec<f64> = (0..1000 * 2).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
    let base = gumbel_base_draws(1000, &mut rng);
    let candidates: Vec<(f64, f64, f64, f64)> = (0..512)
        .map(|_| {
            (
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.05..0.8),
                rng.random_range(0.05..0.8),
            )
        })
        .collect();
    c.bench_function(&format!("gumbel_fit_ei_batch_512/{MODE}"), |b| {
        b.iter(|| {
            par::map_slice(&candidates, |&(m1, m2, s1, s2)| {
                let dist = MaxOfGaussians::new(vec![m1, m2], vec![s1, s2]).unwrap();
                match Gumbel::fit(&dist.sample_with_normals(&normals)) {
                    Ok(q) => expected_improvement_mc_crn(&q, 0.0, &base),
                    Err(_) => 0.0,
                }
            })
        })
    });
}

fn bench_bo_iteration(c: &mut Criterion) {
    let problem = ProblemSpec::new(Benchmark::Dtlz2, 4, 2).unwrap();
    let pref = PreferenceSpec::new(
        vec![0.5, 0.5],
        problem.ideal().to_vec(),
        problem.nadir().to_vec(),
    )
    .unwrap();
    let cfg = RunConfig {
        budget: 13,
        initial_size: 12,
        ga: GaConfig { population_size: 20, generations: 10, ..GaConfig::default() },
        ..RunConfig::with_defaults(Method::MultiGumbel, 4, 2)
    };
    c.bench_function(&format!("multi_gumbel_single_bo_iteration/{MODE}"), |b| {
        b.iter(|| run(&problem, &pref, &cfg, Some(0.2)).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_gp_train, bench_ga_on_gumbel_acquisition, bench_candidate_batch, bench_bo_iteration
}
criterion_main!(benches);
