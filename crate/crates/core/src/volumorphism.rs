//! Discrete volume-preserving maps and their pullback action on fields.
//!
//! A map is a weight-preserving permutation of cells together with a
//! unit-determinant Jacobian per cell. Pullback is
//!
//! ```text
//! (phi^* g)_j = J_j^T g_{phi(j)} J_j
//! ```
//!
//! and composes contravariantly: `(phi o psi)^* = psi^* o phi^*`. Only exact grid
//! symmetries are constructible, so the action is an exact isometry of `(X, delta)`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{field_dist, par_cells, MeasureGrid, MetricField};
use crate::linalg::Mat;
use crate::sampling::{random_field, rng_from_seed, SIGMA_REGIMES};
use crate::spd::SpdMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct VolumorphismMap {
    grid: Arc<MeasureGrid>,
    n: usize,
    cell_map: Vec<usize>,
    jacobian: Vec<Mat>,
    label: String,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

impl VolumorphismMap {
    pub fn new(
        grid: Arc<MeasureGrid>,
        n: usize,
        cell_map: Vec<usize>,
        jacobian: Vec<Mat>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if n != 2 && n != 3 {
            return Err(Error::invalid(format!(
                "matrix dimension must be 2 or 3, got {n}"
            )));
        }
        let len = grid.len();
        if cell_map.len() != len || jacobian.len() != len {
            return Err(Error::invalid(
                "cell map and jacobian must have one entry per cell",
            ));
        }
        let mut seen = vec![false; len];
        for &k in &cell_map {
            if k >= len || std::mem::replace(&mut seen[k], true) {
                return Err(Error::invalid("cell map is not a bijection"));
            }
        }
        for (j, &k) in cell_map.iter().enumerate() {
            let (a, b) = (grid.weight(j), grid.weight(k));
            if (a - b).abs() > 1e-12 * a.max(b) {
                return Err(Error::invalid(format!(
                    "cell map does not preserve the weight of cell {j}"
                )));
            }
        }
        for (j, jac) in jacobian.iter().enumerate() {
            if jac.dim() != n {
                return Err(Error::invalid(format!(
                    "jacobian of cell {j} is not {n}x{n}"
                )));
            }
            if (jac.det() - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "jacobian of cell {j} does not have determinant 1"
                )));
            }
        }
        Ok(Self {
            grid,
            n,
            cell_map,
            jacobian,
            label: label.into(),
        })
    }

    pub fn identity(grid: Arc<MeasureGrid>, n: usize) -> Result<Self> {
        let len = grid.len();
        Self::new(
            grid,
            n,
            (0..len).collect(),
            vec![Mat::identity(n); len],
            "identity",
        )
    }

    /// Weight-preserving cell permutation with identity Jacobian.
    pub fn permutation(grid: Arc<MeasureGrid>, n: usize, cell_map: Vec<usize>) -> Result<Self> {
        let len = grid.len();
        Self::new(
            grid,
            n,
            cell_map,
            vec![Mat::identity(n); len],
            "permutation",
        )
    }

    pub fn grid(&self) -> &Arc<MeasureGrid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn cell_map(&self) -> &[usize] {
        &self.cell_map
    }

    pub fn jacobian(&self) -> &[Mat] {
        &self.jacobian
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_identity(&self) -> bool {
        let id = Mat::identity(self.n);
        self.cell_map.iter().enumerate().all(|(j, &k)| j == k)
            && self.jacobian.iter().all(|m| *m == id)
    }

    /// `self o other`: first `other`, then `self`.
    pub fn compose(&self, other: &VolumorphismMap) -> Result<Self> {
        if self.grid != other.grid || self.n != other.n {
            return Err(Error::contract("maps act on different grids"));
        }
        let cell_map = other.cell_map.iter().map(|&k| self.cell_map[k]).collect();
        let jacobian = (0..self.grid.len())
            .map(|j| self.jacobian[other.cell_map[j]] * other.jacobian[j])
            .collect();
        Self::new(
            self.grid.clone(),
            self.n,
            cell_map,
            jacobian,
            format!("{} o {}", self.label, other.label),
        )
    }

    /// `self^k`, with `self^0` the identity.
    pub fn power(&self, k: usize) -> Result<Self> {
        let mut acc = Self::identity(self.grid.clone(), self.n)?;
        for _ in 0..k {
            acc = self.compose(&acc)?;
        }
        acc.label = format!("({})^{k}", self.label);
        Ok(acc)
    }

    /// Smallest `k in 1..=max` with `self^k` the identity map.
    pub fn order(&self, max: usize) -> Option<usize> {
        let mut acc = self.clone();
        for k in 1..=max {
            if acc.is_identity() {
                return Some(k);
            }
            acc = self.compose(&acc).ok()?;
        }
        None
    }
}

/// Cyclic shift `x -> x + shift` on the torus grid; Jacobian `I`.
pub fn make_translation(
    grid: Arc<MeasureGrid>,
    n: usize,
    shift: &[i64],
) -> Result<VolumorphismMap> {
    if shift.len() != grid.dims().len() {
        return Err(Error::invalid(format!(
            "shift has {} components for a {}-D grid",
            shift.len(),
            grid.dims().len()
        )));
    }
    let cell_map = (0..grid.len())
        .map(|j| {
            let c: Vec<i64> = grid
                .coords(j)
                .iter()
                .zip(shift)
                .map(|(&x, &s)| x as i64 + s)
                .collect();
            grid.index(&c)
        })
        .collect();
    let len = grid.len();
    let reduced: Vec<i64> = shift
        .iter()
        .zip(grid.dims())
        .map(|(s, &d)| s.rem_euclid(d as i64))
        .collect();
    VolumorphismMap::new(
        grid,
        n,
        cell_map,
        vec![Mat::identity(n); len],
        format!("translation{reduced:?}"),
    )
}

/// Group order of a translation: lcm of `N_i / gcd(N_i, s_i)`.
pub fn translation_order(dims: &[usize], shift: &[i64]) -> u64 {
    dims.iter().zip(shift).fold(1, |acc, (&d, &s)| {
        let d = d as u64;
        let s = s.rem_euclid(d as i64) as u64;
        lcm(acc, d / gcd(d, s))
    })
}

/// Linear torus automorphism `x -> B x mod N` on a square grid, `B` in `SL(2, Z)`.
pub fn make_torus_automorphism(
    grid: Arc<MeasureGrid>,
    b: [[i64; 2]; 2],
) -> Result<VolumorphismMap> {
    let dims = grid.dims();
    if dims.len() != 2 || dims[0] != dims[1] {
        return Err(Error::invalid("torus automorphisms need a square 2-D grid"));
    }
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    if det != 1 {
        return Err(Error::invalid(format!(
            "automorphism matrix must have determinant 1, got {det}"
        )));
    }
    let cell_map = (0..grid.len())
        .map(|j| {
            let c = grid.coords(j);
            let (x, y) = (c[0] as i64, c[1] as i64);
            grid.index(&[b[0][0] * x + b[0][1] * y, b[1][0] * x + b[1][1] * y])
        })
        .collect();
    let jac = Mat::from_rows(&[
        &[b[0][0] as f64, b[0][1] as f64],
        &[b[1][0] as f64, b[1][1] as f64],
    ]);
    let len = grid.len();
    VolumorphismMap::new(
        grid,
        2,
        cell_map,
        vec![jac; len],
        format!("automorphism{b:?}"),
    )
}

/// `(phi^* g)_j = J_j^T g_{phi(j)} J_j`.
pub fn pullback(phi: &VolumorphismMap, g: &MetricField) -> Result<MetricField> {
    if **g.grid() != *phi.grid || g.dim() != phi.n {
        return Err(Error::contract("map and field live on different grids"));
    }
    let id = Mat::identity(phi.n);
    let values = par_cells(g.len(), |j| {
        let src = g.value(phi.cell_map[j]);
        let jac = &phi.jacobian[j];
        if *jac == id {
            Ok(*src)
        } else {
            src.congruence(jac).map_err(|e| e.in_cell(j))
        }
    })
    .into_iter()
    .collect::<Result<Vec<SpdMatrix>>>()?;
    MetricField::new(g.grid().clone(), values)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct IsometryReport {
    /// `max |delta(phi^*g, phi^*h) - delta(g, h)|`.
    pub max_abs: f64,
    /// `max |delta(phi^*g, phi^*h) - delta(g, h)| / (1 + delta(g, h))`.
    pub max_rel: f64,
}

/// Measures how far pullback is from preserving `delta` on random field pairs.
pub fn isometry_check(phi: &VolumorphismMap, samples: usize, seed: u64) -> Result<IsometryReport> {
    let mut report = IsometryReport {
        max_abs: 0.0,
        max_rel: 0.0,
    };
    for i in 0..samples {
        let mut rng = rng_from_seed(seed.wrapping_add(i as u64));
        let sigma = SIGMA_REGIMES[i % SIGMA_REGIMES.len()];
        let g = random_field(&mut rng, &phi.grid, phi.n, sigma);
        let h = random_field(&mut rng, &phi.grid, phi.n, sigma);
        let before = field_dist(&g, &h)?;
        let after = field_dist(&pullback(phi, &g)?, &pullback(phi, &h)?)?;
        let diff = (after - before).abs();
        report.max_abs = report.max_abs.max(diff);
        report.max_rel = report.max_rel.max(diff / (1.0 + before));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(n: usize) -> Arc<MeasureGrid> {
        Arc::new(MeasureGrid::uniform(&[n, n], 1.0).unwrap())
    }

    #[test]
    fn zero_shift_is_identity() {
        let t = make_translation(square(6), 2, &[0, 0]).unwrap();
        assert!(t.is_identity());
        assert_eq!(t.order(10), Some(1));
    }

    #[test]
    fn half_shift_has_order_two() {
        let t = make_translation(square(8), 3, &[4, 0]).unwrap();
        assert_eq!(t.order(10), Some(2));
        assert_eq!(translation_order(&[8, 8], &[4, 0]), 2);
    }

    #[test]
    fn translation_order_matches_composition() {
        for shift in [[1i64, 0], [2, 3], [-3, 6], [5, 10]] {
            let t = make_translation(square(12), 2, &shift).unwrap();
            let k = translation_order(&[12, 12], &shift) as usize;
            assert!(t.power(k).unwrap().is_identity(), "shift {shift:?}");
            assert_eq!(t.order(200), Some(k));
        }
    }

    #[test]
    fn cat_map_is_a_permutation() {
        let cat = make_torus_automorphism(square(16), [[2, 1], [1, 1]]).unwrap();
        let mut seen = [false; 256];
        for &k in cat.cell_map() {
            assert!(!seen[k]);
            seen[k] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn rotation_has_order_four() {
        let rot = make_torus_automorphism(square(16), [[0, -1], [1, 0]]).unwrap();
        assert_eq!(rot.order(10), Some(4));
        assert!(make_torus_automorphism(square(16), [[1, 0], [0, 1]])
            .unwrap()
            .is_identity());
    }

    #[test]
    fn automorphism_validation() {
        assert!(make_torus_automorphism(square(4), [[1, 1], [1, 1]]).is_err());
        assert!(make_torus_automorphism(square(4), [[0, 1], [1, 0]]).is_err());
        let rect = Arc::new(MeasureGrid::uniform(&[4, 5], 1.0).unwrap());
        assert!(make_torus_automorphism(rect, [[2, 1], [1, 1]]).is_err());
    }

    #[test]
    fn constructor_rejects_non_bijection_and_weight_change() {
        let grid = Arc::new(MeasureGrid::with_weights(&[3], vec![1.0, 1.0, 2.0]).unwrap());
        assert!(VolumorphismMap::permutation(grid.clone(), 2, vec![0, 0, 2]).is_err());
        assert!(VolumorphismMap::permutation(grid.clone(), 2, vec![2, 1, 0]).is_err());
        assert!(VolumorphismMap::permutation(grid.clone(), 2, vec![1, 0, 2]).is_ok());
        let bad = Mat::diag(&[2.0, 1.0]);
        assert!(VolumorphismMap::new(grid, 2, vec![0, 1, 2], vec![bad; 3], "x").is_err());
    }

    #[test]
    fn cat_map_pullback_of_identity() {
        let grid = square(16);
        let cat = make_torus_automorphism(grid.clone(), [[2, 1], [1, 1]]).unwrap();
        let g = MetricField::constant(grid, SpdMatrix::identity(2));
        let p = pullback(&cat, &g).unwrap();
        let expected = Mat::from_rows(&[&[5.0, 3.0], &[3.0, 2.0]]);
        for v in p.values() {
            assert_eq!(v.to_mat(), expected);
        }
    }

    #[test]
    fn identity_pullback_is_exact() {
        let grid = square(4);
        let id = VolumorphismMap::identity(grid.clone(), 3).unwrap();
        let g = random_field(&mut rng_from_seed(1), &grid, 3, 2.0);
        assert_eq!(pullback(&id, &g).unwrap(), g);
        assert_eq!(isometry_check(&id, 5, 1).unwrap().max_abs, 0.0);
    }

    #[test]
    fn pullback_rejects_foreign_field() {
        let t = make_translation(square(4), 2, &[1, 0]).unwrap();
        let g = MetricField::constant(square(5), SpdMatrix::identity(2));
        assert!(matches!(pullback(&t, &g), Err(Error::Contract(_))));
    }
}
