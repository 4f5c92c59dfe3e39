//! Random points of `S` and `X`.
//!
//! `G = exp(B)` with `B` symmetric, trace-free, entries uniform in `[-sigma, sigma]`.
//! Seeds map to ChaCha8 streams, so draws are reproducible across platforms.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::field::{MeasureGrid, MetricField};
use crate::linalg::{EigDecomp, Mat};
use crate::spd::SpdMatrix;

/// Spread regimes used by the property suites.
pub const SIGMA_REGIMES: [f64; 2] = [0.5, 2.0];

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric trace-free matrix with upper entries uniform in `[-sigma, sigma]`.
pub fn random_traceless<R: Rng + ?Sized>(rng: &mut R, n: usize, sigma: f64) -> Mat {
    let mut b = Mat::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = if sigma > 0.0 {
                rng.gen_range(-sigma..=sigma)
            } else {
                0.0
            };
            b.set(i, j, v);
            b.set(j, i, v);
        }
    }
    let shift = b.trace() / n as f64;
    for i in 0..n {
        b.set(i, i, b.get(i, i) - shift);
    }
    b
}

pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, n: usize, sigma: f64) -> SpdMatrix {
    let b = random_traceless(rng, n, sigma);
    let e = EigDecomp::new(&b);
    SpdMatrix::new(&e.map(f64::exp)).expect("exp of a symmetric matrix is SPD")
}

pub fn random_field<R: Rng + ?Sized>(
    rng: &mut R,
    grid: &Arc<MeasureGrid>,
    n: usize,
    sigma: f64,
) -> MetricField {
    let values = (0..grid.len()).map(|_| random_spd(rng, n, sigma)).collect();
    MetricField::new(grid.clone(), values).expect("cell count matches grid")
}
