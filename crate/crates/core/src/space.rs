//! The two geodesic spaces the property suites run against: `S` and `(X, delta)`.

use std::sync::Arc;

use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::field::{self, FieldGeodesic, MeasureGrid, MetricField};
use crate::sampling::{random_field, random_spd};
use crate::spd::{self, SpdMatrix};

pub trait GeodesicSpace: Sync {
    type Point: Clone + Send + Sync;

    fn name(&self) -> String;

    fn dist(&self, a: &Self::Point, b: &Self::Point) -> Result<f64>;

    /// Constant-speed geodesic from `a` (t = 0) to `b` (t = 1).
    fn geodesic(&self, a: &Self::Point, b: &Self::Point, t: f64) -> Result<Self::Point>;

    /// Weighted Karcher mean.
    fn mean(&self, points: &[Self::Point], weights: &[f64]) -> Result<Self::Point>;

    /// Parameter of the closest point to `p` on the maximal geodesic through `a`, `b`.
    fn project(&self, p: &Self::Point, a: &Self::Point, b: &Self::Point) -> Result<f64>;

    fn random_point(&self, rng: &mut ChaCha8Rng, sigma: f64) -> Self::Point;

    fn dist_sq(&self, a: &Self::Point, b: &Self::Point) -> Result<f64> {
        self.dist(a, b).map(|d| d * d)
    }

    /// `F_S(x) = sum_i w_i d^2(x, S_i)`.
    fn mean_function(
        &self,
        x: &Self::Point,
        points: &[Self::Point],
        weights: &[f64],
    ) -> Result<f64> {
        let mut acc = 0.0;
        for (p, w) in points.iter().zip(weights) {
            acc += w * self.dist_sq(x, p)?;
        }
        Ok(acc)
    }
}

/// `S = SL(n)/SO(n)`.
#[derive(Clone, Copy, Debug)]
pub struct MatrixSpace {
    pub n: usize,
}

impl GeodesicSpace for MatrixSpace {
    type Point = SpdMatrix;

    fn name(&self) -> String {
        format!("S(n={})", self.n)
    }

    fn dist(&self, a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
        spd::try_dist(a, b)
    }

    fn dist_sq(&self, a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
        spd::try_dist(a, b)?;
        Ok(spd::dist_sq(a, b))
    }

    fn geodesic(&self, a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
        spd::geodesic(a, b, t)
    }

    fn mean(&self, points: &[SpdMatrix], weights: &[f64]) -> Result<SpdMatrix> {
        spd::karcher_mean(points, weights)
    }

    fn project(&self, p: &SpdMatrix, a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
        spd::project_to_geodesic(p, a, b).map(|(t, _)| t)
    }

    fn random_point(&self, rng: &mut ChaCha8Rng, sigma: f64) -> SpdMatrix {
        random_spd(rng, self.n, sigma)
    }
}

/// `(X, delta)` over a fixed grid.
#[derive(Clone, Debug)]
pub struct FieldSpace {
    pub grid: Arc<MeasureGrid>,
    pub n: usize,
}

impl FieldSpace {
    pub fn uniform(dims: &[usize], n: usize) -> Result<Self> {
        Ok(Self {
            grid: Arc::new(MeasureGrid::uniform(dims, 1.0)?),
            n,
        })
    }
}

impl GeodesicSpace for FieldSpace {
    type Point = MetricField;

    fn name(&self) -> String {
        let dims: Vec<String> = self.grid.dims().iter().map(|d| d.to_string()).collect();
        format!("X({}, n={})", dims.join("x"), self.n)
    }

    fn dist(&self, a: &MetricField, b: &MetricField) -> Result<f64> {
        field::field_dist(a, b)
    }

    fn dist_sq(&self, a: &MetricField, b: &MetricField) -> Result<f64> {
        field::field_dist_sq(a, b)
    }

    fn geodesic(&self, a: &MetricField, b: &MetricField, t: f64) -> Result<MetricField> {
        field::field_geodesic(a, b, t)
    }

    fn mean(&self, points: &[MetricField], weights: &[f64]) -> Result<MetricField> {
        field::field_mean(points, weights)
    }

    fn project(&self, p: &MetricField, a: &MetricField, b: &MetricField) -> Result<f64> {
        let path = FieldGeodesic::new(a, b)?;
        if path.length() <= 1e-12 {
            return Err(crate::error::Error::invalid(
                "degenerate geodesic: endpoints coincide",
            ));
        }
        p.check_compatible(a)?;
        Ok(field::project_onto(p, &path))
    }

    fn random_point(&self, rng: &mut ChaCha8Rng, sigma: f64) -> MetricField {
        random_field(rng, &self.grid, self.n, sigma)
    }
}
