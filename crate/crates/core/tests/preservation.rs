//! Pseudorandom round restrictions preserve acceptance on average about as
//! well as truly random ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ro_ac0::circuit::{acceptance_probability, gen_random_read_once, BiasVector};
use ro_ac0::prg::{seed_words, Expander, RestrictionConfig};
use ro_ac0::shrinkage::PRegularSampler;
use ro_ac0::{Circuit, RestrictionMask, RestrictionPrg, Scalar};

const SAMPLES: u64 = 1000;

/// `Pr[F|_{t̄←x} = 1]` with the free positions uniform.
fn restricted_acceptance(c: &Circuit, m: &RestrictionMask) -> f64 {
    let q: Vec<f64> = m
        .free()
        .iter()
        .zip(m.values())
        .map(|(&f, &v)| if f { 0.5 } else { f64::from(u8::from(v)) })
        .collect();
    acceptance_probability(c, &BiasVector::new(q).unwrap()).unwrap()
}

/// Mean of the samples minus `target`, and the standard error of the mean.
fn deviation(samples: &[f64], target: f64) -> (f64, f64) {
    let k = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / k;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean - target, (var / k).sqrt())
}

#[test]
fn small_bias_rounds_preserve_acceptance() {
    let mut worst: f64 = f64::NEG_INFINITY;
    for i in 0..200u64 {
        let n = 2 + (i as usize % 11);
        let c = gen_random_read_once(n, 1 + i as usize % 3, 1000 + i).unwrap();
        let target = c.mean().to_f64();
        let cfg = RestrictionConfig::with_defaults(n, 1, 1.0 / 1024.0).unwrap();
        let g = RestrictionPrg::new(cfg).unwrap();
        let words = seed_words(g.seed_bits());
        let mut rng = ChaCha8Rng::seed_from_u64(i);
        let pseudo: Vec<f64> = (0..SAMPLES)
            .map(|_| {
                let seed: Vec<u64> = (0..words).map(|_| rng.gen()).collect();
                restricted_acceptance(&c, &g.round_restriction(&seed, 0).unwrap())
            })
            .collect();
        // A position is fixed when its single selection bit is 1.
        let s = PRegularSampler::new(n, 0.5, i).unwrap();
        let random: Vec<f64> = (0..SAMPLES)
            .map(|t| restricted_acceptance(&c, &s.sample(t)))
            .collect();
        let (dp, sep) = deviation(&pseudo, target);
        let (dr, ser) = deviation(&random, target);
        let se = (sep * sep + ser * ser).sqrt();
        let slack = dr.abs() + 3.0 * se - dp.abs();
        assert!(
            slack >= 0.0,
            "circuit {i}: pseudo {dp:.4} random {dr:.4} se {se:.4}"
        );
        worst = worst.max(dp.abs() - dr.abs());
    }
    println!("largest excess deviation {worst:.5}");
}
