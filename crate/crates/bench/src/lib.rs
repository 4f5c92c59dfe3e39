//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use volmorph_core::sampling::{random_field, random_spd, rng_from_seed};
use volmorph_core::{
    make_torus_automorphism, MeasureGrid, MetricField, SpdMatrix, VolumorphismMap,
};

pub fn spd_points(n: usize, count: usize, seed: u64) -> Vec<SpdMatrix> {
    let mut rng = rng_from_seed(seed);
    (0..count)
        .map(|i| random_spd(&mut rng, n, if i % 2 == 0 { 0.5 } else { 2.0 }))
        .collect()
}

pub fn square_grid(side: usize) -> Arc<MeasureGrid> {
    Arc::new(MeasureGrid::uniform(&[side, side], 1.0).expect("positive side"))
}

pub fn fields(grid: &Arc<MeasureGrid>, count: usize, seed: u64) -> Vec<MetricField> {
    let mut rng = rng_from_seed(seed);
    (0..count)
        .map(|_| random_field(&mut rng, grid, 2, 2.0))
        .collect()
}

/// Quarter turn of the square torus, order four.
pub fn quarter_turn(grid: &Arc<MeasureGrid>) -> VolumorphismMap {
    make_torus_automorphism(grid.clone(), [[0, -1], [1, 0]]).expect("square grid")
}
