//! Seeded random states, channels and effects for demos and tests.
//!
//! Channels are drawn as mixtures of random unitaries, so they are unital
//! by construction.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::CMat;
use crate::ops::Channel;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn ginibre(d: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(d, |_, _| C64::new(standard_normal(rng), standard_normal(rng)))
}

/// A full-rank random density matrix `G G† / tr(G G†)`.
pub fn random_state(d: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre(d, rng);
    let m = g.matmul(&g.dagger());
    let t = m.trace().re;
    m.scale(C64::new(1.0 / t, 0.0))
}

/// A Haar-ish random pure state projector.
pub fn random_pure_state(d: usize, rng: &mut impl Rng) -> CMat {
    let v: Vec<C64> = (0..d)
        .map(|_| C64::new(standard_normal(rng), standard_normal(rng)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let v: Vec<C64> = v.into_iter().map(|z| z / norm).collect();
    CMat::projector(&v)
}

/// A random unitary from Gram-Schmidt orthonormalization of a Ginibre
/// matrix.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre(d, rng);
    let mut cols: Vec<Vec<C64>> = (0..d)
        .map(|j| (0..d).map(|i| g[(i, j)]).collect())
        .collect();
    for j in 0..d {
        for k in 0..j {
            let proj: C64 = (0..d).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            for i in 0..d {
                let sub = proj * cols[k][i];
                cols[j][i] -= sub;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    CMat::from_fn(d, |i, j| cols[j][i])
}

/// A unital channel: a probabilistic mixture of `k` random unitaries.
pub fn random_unital_channel(d: usize, k: usize, rng: &mut impl Rng) -> Channel {
    let mut weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    let kraus = weights
        .into_iter()
        .map(|w| random_unitary(d, rng).scale(C64::new(w.sqrt(), 0.0)))
        .collect();
    Channel::new(kraus)
}

/// A random effect with spectrum strictly inside `[0, 1]`.
pub fn random_povm_element(d: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre(d, rng);
    let m = g.matmul(&g.dagger());
    let top = m.max_eigenvalue();
    let scale: f64 = rng.gen_range(0.1..1.0);
    m.scale(C64::new(scale / top, 0.0))
}
