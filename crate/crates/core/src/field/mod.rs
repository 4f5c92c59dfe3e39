//! The field space `(X, delta)`: one unit-determinant SPD matrix per cell of a
//! weighted grid on a flat torus, with
//!
//! ```text
//! delta(g, h)^2 = sum_j mu_j * tr( log(g_j^{-1} h_j)^2 )
//! ```
//!
//! the cell-centre quadrature of the `L^2` integral. Because `delta^2` is a sum
//! of independent per-cell terms, geodesics, means and projections-per-cell all
//! decompose cellwise; the one exception is projection onto a geodesic, whose
//! parameter is shared by every cell and is therefore solved globally.

pub mod io;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::minimize_convex;
use crate::spd::{self, KarcherOptions, SpdGeodesic, SpdMatrix, TangentSym, PROJECTION_WIDTH_TOL};

/// Weighted cells of a 1-D or 2-D periodic grid, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureGrid {
    dims: Vec<usize>,
    weights: Vec<f64>,
    total_volume: f64,
}

impl MeasureGrid {
    /// Uniform weights `volume / J`.
    pub fn uniform(dims: &[usize], volume: f64) -> Result<Self> {
        Self::check_dims(dims)?;
        if !(volume > 0.0 && volume.is_finite()) {
            return Err(Error::invalid("grid volume must be positive"));
        }
        let len: usize = dims.iter().product();
        Self::with_weights(dims, vec![volume / len as f64; len])
    }

    pub fn with_weights(dims: &[usize], weights: Vec<f64>) -> Result<Self> {
        Self::check_dims(dims)?;
        let len: usize = dims.iter().product();
        if weights.len() != len {
            return Err(Error::invalid(format!(
                "{} weights for {len} cells",
                weights.len()
            )));
        }
        if let Some(j) = weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::invalid(format!(
                "weight of cell {j} is not positive"
            )));
        }
        let total_volume = pairwise_sum(&weights);
        Ok(Self {
            dims: dims.to_vec(),
            weights,
            total_volume,
        })
    }

    fn check_dims(dims: &[usize]) -> Result<()> {
        if dims.is_empty() || dims.len() > 2 {
            return Err(Error::invalid(format!(
                "grid must be 1-D or 2-D, got {} axes",
                dims.len()
            )));
        }
        if dims.contains(&0) {
            return Err(Error::invalid("grid axes must be nonempty"));
        }
        Ok(())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, cell: usize) -> f64 {
        self.weights[cell]
    }

    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }

    /// Row-major coordinates of a cell.
    pub fn coords(&self, cell: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        let mut rest = cell;
        for (k, &d) in self.dims.iter().enumerate().rev() {
            out[k] = rest % d;
            rest /= d;
        }
        out
    }

    /// Cell index of (periodically wrapped) coordinates.
    pub fn index(&self, coords: &[i64]) -> usize {
        debug_assert_eq!(coords.len(), self.dims.len());
        coords
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&c, &d)| acc * d + c.rem_euclid(d as i64) as usize)
    }
}

fn same_grid(a: &Arc<MeasureGrid>, b: &Arc<MeasureGrid>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Pairwise (tree) summation in a fixed order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Maps `f` over cell indices in parallel; output order is cell order.
pub(crate) fn par_cells<T: Send>(len: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..len).into_par_iter().with_min_len(64).map(f).collect()
}

/// Collects per-cell results, reporting the lowest failing cell.
fn collect_cells<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results
        .into_iter()
        .enumerate()
        .map(|(j, r)| r.map_err(|e| e.in_cell(j)))
        .collect()
}

/// A point of `(X, delta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    grid: Arc<MeasureGrid>,
    values: Vec<SpdMatrix>,
}

impl MetricField {
    pub fn new(grid: Arc<MeasureGrid>, values: Vec<SpdMatrix>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        let n = values[0].dim();
        if values.iter().any(|v| v.dim() != n) {
            return Err(Error::invalid("cell values have mixed dimensions"));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Arc<MeasureGrid>, value: SpdMatrix) -> Self {
        let values = vec![value; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<MeasureGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[SpdMatrix] {
        &self.values
    }

    pub fn value(&self, cell: usize) -> &SpdMatrix {
        &self.values[cell]
    }

    /// Matrix dimension of every cell value.
    pub fn dim(&self) -> usize {
        self.values[0].dim()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn check_compatible(&self, other: &MetricField) -> Result<()> {
        if !same_grid(&self.grid, &other.grid) {
            return Err(Error::contract("fields live on different grids"));
        }
        if self.dim() != other.dim() {
            return Err(Error::contract("fields have different matrix dimensions"));
        }
        Ok(())
    }
}

/// `delta(g, h)^2`.
pub fn field_dist_sq(g: &MetricField, h: &MetricField) -> Result<f64> {
    g.check_compatible(h)?;
    let w = g.grid.weights();
    let terms = par_cells(g.len(), |j| w[j] * spd::dist_sq(&g.values[j], &h.values[j]));
    Ok(pairwise_sum(&terms))
}

/// `delta(g, h)`.
pub fn field_dist(g: &MetricField, h: &MetricField) -> Result<f64> {
    field_dist_sq(g, h).map(f64::sqrt)
}

/// Cellwise geodesic `g exp(t g^{-1} A)`.
pub fn field_geodesic(g: &MetricField, h: &MetricField, t: f64) -> Result<MetricField> {
    g.check_compatible(h)?;
    let values = collect_cells(par_cells(g.len(), |j| {
        spd::geodesic(&g.values[j], &h.values[j], t)
    }))?;
    Ok(MetricField {
        grid: g.grid.clone(),
        values,
    })
}

/// Minimizer of `sum_i w_i delta^2(., fields_i)`.
///
/// `delta^2` is a `mu`-weighted sum of independent per-cell squared distances,
/// so the global minimizer is the field of per-cell Karcher means.
pub fn field_mean(fields: &[MetricField], weights: &[f64]) -> Result<MetricField> {
    field_mean_with(fields, weights, None, &KarcherOptions::default())
}

/// [`field_mean`] with an optional warm start.
pub fn field_mean_with(
    fields: &[MetricField],
    weights: &[f64],
    init: Option<&MetricField>,
    opts: &KarcherOptions,
) -> Result<MetricField> {
    spd::validate_weights(fields.len(), weights)?;
    let first = &fields[0];
    for f in &fields[1..] {
        first.check_compatible(f)?;
    }
    if let Some(m) = init {
        first.check_compatible(m)?;
    }
    let values = collect_cells(par_cells(first.len(), |j| {
        let pts: Vec<SpdMatrix> = fields.iter().map(|f| f.values[j]).collect();
        let start = init.map(|m| &m.values[j]);
        spd::karcher_mean_with(&pts, weights, start, opts).map(|o| o.mean)
    }))?;
    Ok(MetricField {
        grid: first.grid.clone(),
        values,
    })
}

/// A tangent vector of `(X, delta)`: one trace-free symmetric matrix per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentField {
    base: MetricField,
    values: Vec<TangentSym>,
}

impl TangentField {
    pub fn new(base: &MetricField, values: Vec<TangentSym>) -> Result<Self> {
        if values.len() != base.len() {
            return Err(Error::contract("tangent field size differs from its base"));
        }
        if values.iter().zip(&base.values).any(|(a, g)| a.base() != g) {
            return Err(Error::contract(
                "tangent values are not based at the field values",
            ));
        }
        Ok(Self {
            base: base.clone(),
            values,
        })
    }

    pub fn base(&self) -> &MetricField {
        &self.base
    }

    pub fn values(&self) -> &[TangentSym] {
        &self.values
    }

    /// `<A, B>_g = sum_j mu_j tr(g_j^{-1} A_j g_j^{-1} B_j)`.
    pub fn inner(&self, other: &TangentField) -> Result<f64> {
        if self.base != other.base {
            return Err(Error::contract(
                "tangent fields live at different base points",
            ));
        }
        let w = self.base.grid.weights();
        let terms = collect_cells(par_cells(self.values.len(), |j| {
            self.values[j].inner(&other.values[j]).map(|v| w[j] * v)
        }))?;
        Ok(pairwise_sum(&terms))
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).expect("same base").sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            base: self.base.clone(),
            values: self.values.iter().map(|a| a.scale(s)).collect(),
        }
    }
}

/// Cellwise `A_j = g_j log(g_j^{-1} h_j)`.
pub fn field_log(g: &MetricField, h: &MetricField) -> Result<TangentField> {
    g.check_compatible(h)?;
    let values = collect_cells(par_cells(g.len(), |j| {
        spd::log_map(&g.values[j], &h.values[j])
    }))?;
    Ok(TangentField {
        base: g.clone(),
        values,
    })
}

/// Cellwise `g_j exp(t g_j^{-1} A_j)`.
pub fn field_exp(g: &MetricField, a: &TangentField, t: f64) -> Result<MetricField> {
    if a.base != *g {
        return Err(Error::contract(
            "tangent field is not based at the given field",
        ));
    }
    let values = collect_cells(par_cells(g.len(), |j| {
        spd::exp_map(&g.values[j], &a.values[j], t)
    }))?;
    Ok(MetricField {
        grid: g.grid.clone(),
        values,
    })
}

/// The geodesic `t -> g exp(t log(g^{-1}h))` with per-cell spectral data cached.
pub struct FieldGeodesic {
    grid: Arc<MeasureGrid>,
    cells: Vec<SpdGeodesic>,
    length: f64,
}

impl FieldGeodesic {
    pub fn new(g: &MetricField, h: &MetricField) -> Result<Self> {
        g.check_compatible(h)?;
        let cells = collect_cells(par_cells(g.len(), |j| {
            SpdGeodesic::new(&g.values[j], &h.values[j])
        }))?;
        let w = g.grid.weights();
        let terms: Vec<f64> = cells
            .iter()
            .zip(w)
            .map(|(c, wj)| wj * c.length() * c.length())
            .collect();
        Ok(Self {
            grid: g.grid.clone(),
            length: pairwise_sum(&terms).sqrt(),
            cells,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn at(&self, t: f64) -> Result<MetricField> {
        let values = collect_cells(par_cells(self.cells.len(), |j| self.cells[j].at(t)))?;
        Ok(MetricField {
            grid: self.grid.clone(),
            values,
        })
    }
}

/// Projection of `p` onto the maximal geodesic through `g` and `h` in `(X, delta)`.
///
/// The parameter is shared across cells, so this minimizes the global convex
/// function `t -> delta^2(p, gamma(t))` rather than projecting cell by cell.
pub fn project_field_to_geodesic(
    p: &MetricField,
    g: &MetricField,
    h: &MetricField,
) -> Result<(f64, MetricField)> {
    p.check_compatible(g)?;
    let path = FieldGeodesic::new(g, h)?;
    if path.length() <= 1e-12 {
        return Err(Error::invalid("degenerate geodesic: endpoints coincide"));
    }
    let t = project_onto(p, &path);
    Ok((t, path.at(t)?))
}

/// Parameter of the projection of `p` onto a precomputed geodesic.
pub fn project_onto(p: &MetricField, path: &FieldGeodesic) -> f64 {
    let w = p.grid.weights();
    minimize_convex(
        |t| {
            let terms = par_cells(p.len(), |j| match path.cells[j].at(t) {
                Ok(q) => w[j] * spd::dist_sq(&p.values[j], &q),
                Err(_) => f64::INFINITY,
            });
            pairwise_sum(&terms)
        },
        PROJECTION_WIDTH_TOL,
    )
}
