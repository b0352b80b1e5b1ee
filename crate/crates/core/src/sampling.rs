//! Deterministic sample-point generators and seeded RNG helpers.
//!
//! Every stochastic routine in the crate takes an explicit seed, and child
//! tasks derive their seeds by index, so reports are reproducible bit for bit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed; used for per-restart and per-point RNGs.
pub fn child_seed(base: u64, index: u64) -> u64 {
    // splitmix64 step keeps children decorrelated
    let mut z = base ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn gaussian_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    // Box-Muller; two draws per pair.
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u1: f64 = rng.gen_range(1e-12..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        let r = (-2.0 * u1.ln()).sqrt();
        let t = 2.0 * std::f64::consts::PI * u2;
        out.push(r * t.cos());
        if out.len() < n {
            out.push(r * t.sin());
        }
    }
    out
}

pub fn random_unit(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v = gaussian_vec(rng, n);
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

const GOLDEN_ANGLE: f64 = 2.399963229728653; // pi * (3 - sqrt 5)

/// Deterministic quasi-uniform lattice on the unit sphere S^{n-1} for
/// n in {1, 2, 3, 4}. Used for coarse exhaustive frame grids and for
/// direction sets in the sampled norms.
pub fn unit_sphere_lattice(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * (i as f64) / (count as f64);
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            // Fibonacci sphere
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / (count as f64);
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let t = GOLDEN_ANGLE * i as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
        4 => {
            // Hopf-coordinate spiral: theta stratified by the measure
            // sin(2 theta) d theta, phases advanced by irrational rotations.
            let s2 = 2.0f64.sqrt();
            let s3 = 3.0f64.sqrt();
            (0..count)
                .map(|i| {
                    let u = (i as f64 + 0.5) / (count as f64);
                    let theta = 0.5 * (1.0 - 2.0 * u).acos();
                    let p1 = 2.0 * std::f64::consts::PI * ((i as f64 * s2) % 1.0);
                    let p2 = 2.0 * std::f64::consts::PI * ((i as f64 * s3) % 1.0);
                    vec![
                        theta.cos() * p1.cos(),
                        theta.cos() * p1.sin(),
                        theta.sin() * p2.cos(),
                        theta.sin() * p2.sin(),
                    ]
                })
                .collect()
        }
        _ => {
            // high dimensions fall back to a seeded Gaussian cloud
            let mut r = rng(0x5eed);
            (0..count).map(|_| random_unit(&mut r, n)).collect()
        }
    }
}

/// Geometric grid of radii covering `[lo, hi]`, endpoints included.
pub fn geometric_radii(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let ratio = (hi / lo).powf(1.0 / (count as f64 - 1.0));
    (0..count).map(|i| lo * ratio.powi(i as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_points_are_unit() {
        for n in 1..=4 {
            for p in unit_sphere_lattice(n, 50) {
                let norm: f64 = p.iter().map(|x| x * x).sum::<f64>();
                assert!((norm - 1.0).abs() < 1e-12, "dim {n}");
            }
        }
    }

    #[test]
    fn child_seeds_differ() {
        let a = child_seed(7, 0);
        let b = child_seed(7, 1);
        assert_ne!(a, b);
    }
}
