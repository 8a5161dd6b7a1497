// counts fixed-point iterations for realistic candidate fits (removed before delivery)
use prefbo::asf_dist::{Gumbel, MaxOfGaussians};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let normals: Vec<f64> = (0..2000).map(|_| rng.sample::<f64,_>(rand_distr::StandardNormal)).collect();
    let t = Instant::now();
    let mut fits = 0usize;
    for _ in 0..2000 {
        let m1 = rng.random_range(-0.3..0.5);
        let m2 = rng.random_range(-0.3..0.5);
        let s1 = rng.random_range(0.001..0.3);
        let s2 = rng.random_range(0.001..0.3);
        let p = MaxOfGaussians::new(vec![m1, m2], vec![s1, s2]).unwrap();
        let samples = p.sample_with_normals(&normals);
        if Gumbel::fit(&samples).is_ok() { fits += 1; }
    }
    println!("2000 fits ({} ok) in {:.2}s -> {:.0}us/fit", fits, t.elapsed().as_secs_f64(), t.elapsed().as_secs_f64()/2000.0*1e6);
}
