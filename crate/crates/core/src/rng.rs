use rand::Rng;
use rand_distr::StandardNormal;

pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}
