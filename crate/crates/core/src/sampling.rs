//! Random points of the unit ball and random convex weights.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

/// Uniform point of `B^n`: Gaussian direction scaled by `U^{1/n}`.
pub fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let len = crate::geometry::norm(&g);
        if len > 1e-300 {
            let radius = rng.random::<f64>().powf(1.0 / dim as f64);
            return g.into_iter().map(|c| c * radius / len).collect();
        }
    }
}

/// Flat-Dirichlet weights (normalised exponentials), all strictly positive.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..count).map(|_| Exp1.sample(rng)).map(|w: f64| w.max(1e-12)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ball_samples_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in 1..=5 {
            for _ in 0..500 {
                let p = uniform_in_ball(&mut rng, dim);
                assert_eq!(p.len(), dim);
                assert!(crate::geometry::norm(&p) <= 1.0);
            }
        }
    }

    #[test]
    fn weights_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for k in 1..20 {
            let w = random_weights(&mut rng, k);
            assert!(w.iter().all(|x| *x > 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
