//! Small dense matrices (n <= 3) and the spectral kernels the geometry is built on.
//!
//! Everything here is allocation-free and deterministic: the Jacobi sweep order
//! is fixed, so the same input always yields bit-identical output.

use std::ops::{Add, Mul, Sub};

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 3;

/// A dense `n x n` real matrix with `n <= 3`, stored inline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat {
    n: usize,
    a: [[f64; MAX_DIM]; MAX_DIM],
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&n),
            "matrix dimension {n} out of range"
        );
        Self {
            n,
            a: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i][i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.a[i][i] = *v;
        }
        m
    }

    /// Builds a matrix from row slices. Panics on ragged input.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "ragged matrix rows");
            m.a[i][..n].copy_from_slice(row);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i][j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i][j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.a[i][..self.n].to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.a[j][i])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_fn(self.n, |i, j| s * self.a[i][j])
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.a[i][i]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.a[i][j] * self.a[i][j];
            }
        }
        s.sqrt()
    }

    /// `(M + M^T) / 2`.
    pub fn symmetrize(&self) -> Self {
        Self::from_fn(self.n, |i, j| 0.5 * (self.a[i][j] + self.a[j][i]))
    }

    pub fn is_finite(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.a[i][j].is_finite()))
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!(self.n, other.n);
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                m = m.max((self.a[i][j] - other.a[i][j]).abs());
            }
        }
        m
    }

    /// `B^T M B`, symmetrized.
    pub fn congruence(&self, b: &Mat) -> Mat {
        (b.transpose() * *self * *b).symmetrize()
    }

    /// Determinant evaluated with error-free products, accurate to a few ulps
    /// of the result even when the entries are large and the determinant is not.
    pub fn det(&self) -> f64 {
        let a = &self.a;
        match self.n {
            1 => a[0][0],
            2 => compensated_sum(&[two_prod(a[0][0], a[1][1]), two_prod(-a[0][1], a[1][0])]),
            _ => {
                let mut terms = [(0.0, 0.0); 12];
                let perms: [([usize; 3], f64); 6] = [
                    ([0, 1, 2], 1.0),
                    ([1, 2, 0], 1.0),
                    ([2, 0, 1], 1.0),
                    ([0, 2, 1], -1.0),
                    ([1, 0, 2], -1.0),
                    ([2, 1, 0], -1.0),
                ];
                for (k, (p, sign)) in perms.iter().enumerate() {
                    let (x, ex) = two_prod(sign * a[0][p[0]], a[1][p[1]]);
                    terms[2 * k] = two_prod(x, a[2][p[2]]);
                    terms[2 * k + 1] = (ex * a[2][p[2]], 0.0);
                }
                compensated_sum(&terms)
            }
        }
    }

    /// Transposed cofactor matrix, so `M adj(M) = det(M) I`.
    pub fn adjugate(&self) -> Mat {
        let a = &self.a;
        match self.n {
            1 => Mat::from_rows(&[&[1.0]]),
            2 => Mat::from_rows(&[&[a[1][1], -a[0][1]], &[-a[1][0], a[0][0]]]),
            _ => Mat::from_fn(3, |i, j| {
                // cofactor C_ji
                let r: Vec<usize> = (0..3).filter(|&r| r != j).collect();
                let c: Vec<usize> = (0..3).filter(|&c| c != i).collect();
                let minor = a[r[0]][c[0]] * a[r[1]][c[1]] - a[r[0]][c[1]] * a[r[1]][c[0]];
                if (i + j) % 2 == 0 {
                    minor
                } else {
                    -minor
                }
            }),
        }
    }

    /// Inverse by the adjugate. Callers only invert well-conditioned or SPD inputs.
    pub fn inverse(&self) -> Option<Mat> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(self.adjugate().scale(1.0 / d))
    }

    /// First-order bound on the change in `det` caused by rounding every entry
    /// to working precision: `eps * sum_ij |m_ij| |adj_ji|`.
    pub fn det_rounding_noise(&self) -> f64 {
        let adj = self.adjugate();
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += (self.a[i][j] * adj.a[j][i]).abs();
            }
        }
        f64::EPSILON * acc
    }

    /// Leading principal minors, each evaluated accurately.
    pub fn leading_minors(&self) -> [f64; MAX_DIM] {
        let mut out = [0.0; MAX_DIM];
        for k in 1..=self.n {
            out[k - 1] = Mat::from_fn(k, |i, j| self.a[i][j]).det();
        }
        out
    }
}

impl Add for Mat {
    type Output = Mat;
    fn add(self, rhs: Mat) -> Mat {
        assert_eq!(self.n, rhs.n);
        Mat::from_fn(self.n, |i, j| self.a[i][j] + rhs.a[i][j])
    }
}

impl Sub for Mat {
    type Output = Mat;
    fn sub(self, rhs: Mat) -> Mat {
        assert_eq!(self.n, rhs.n);
        Mat::from_fn(self.n, |i, j| self.a[i][j] - rhs.a[i][j])
    }
}

impl Mul for Mat {
    type Output = Mat;
    fn mul(self, rhs: Mat) -> Mat {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        Mat::from_fn(n, |i, j| (0..n).map(|k| self.a[i][k] * rhs.a[k][j]).sum())
    }
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Sums `(value, error)` pairs with a compensated accumulator.
fn compensated_sum(terms: &[(f64, f64)]) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for &(v, e) in terms {
        let (t, err) = two_sum(s, v);
        s = t;
        c += err + e;
    }
    s + c
}

/// Symmetric eigendecomposition: `S = Q diag(values) Q^T`.
#[derive(Clone, Copy, Debug)]
pub struct EigDecomp {
    /// Eigenvalues in descending order (only the first `n` are meaningful).
    pub values: [f64; MAX_DIM],
    /// Orthogonal matrix whose columns are the eigenvectors.
    pub vectors: Mat,
}

const JACOBI_MAX_SWEEPS: usize = 64;

impl EigDecomp {
    /// Cyclic Jacobi on the symmetric part of `s`.
    pub fn new(s: &Mat) -> Self {
        let n = s.n;
        let mut a = s.symmetrize();
        let mut v = Mat::identity(n);
        for _ in 0..JACOBI_MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.a[p][q];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = a.a[p][p];
                    let aqq = a.a[q][q];
                    // Converged pair: the rotation would not change either diagonal entry.
                    if apq.abs() <= 0.5 * f64::EPSILON * (app.abs() * aqq.abs()).sqrt() {
                        a.a[p][q] = 0.0;
                        a.a[q][p] = 0.0;
                        continue;
                    }
                    rotated = true;
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s_ = t * c;
                    a.a[p][p] = app - t * apq;
                    a.a[q][q] = aqq + t * apq;
                    a.a[p][q] = 0.0;
                    a.a[q][p] = 0.0;
                    for r in 0..n {
                        if r != p && r != q {
                            let arp = a.a[r][p];
                            let arq = a.a[r][q];
                            a.a[r][p] = c * arp - s_ * arq;
                            a.a[p][r] = a.a[r][p];
                            a.a[r][q] = s_ * arp + c * arq;
                            a.a[q][r] = a.a[r][q];
                        }
                    }
                    for r in 0..n {
                        let vrp = v.a[r][p];
                        let vrq = v.a[r][q];
                        v.a[r][p] = c * vrp - s_ * vrq;
                        v.a[r][q] = s_ * vrp + c * vrq;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut order = [0usize, 1, 2];
        let order = &mut order[..n];
        order.sort_by(|&i, &j| a.a[j][j].total_cmp(&a.a[i][i]).then(i.cmp(&j)));
        let mut values = [0.0; MAX_DIM];
        let mut vectors = Mat::zeros(n);
        for (dst, &src) in order.iter().enumerate() {
            values[dst] = a.a[src][src];
            for r in 0..n {
                vectors.a[r][dst] = v.a[r][src];
            }
        }
        Self { values, vectors }
    }

    pub fn dim(&self) -> usize {
        self.vectors.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values[..self.dim()]
    }

    /// `Q diag(f(lambda)) Q^T`, symmetrized.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Mat {
        let vals: Vec<f64> = self.eigenvalues().iter().map(|&l| f(l)).collect();
        self.with_values(&vals)
    }

    /// `Q diag(values) Q^T` for caller-supplied eigenvalues.
    pub fn with_values(&self, values: &[f64]) -> Mat {
        let n = self.dim();
        let q = &self.vectors;
        Mat::from_fn(n, |i, j| {
            (0..n).map(|k| q.a[i][k] * values[k] * q.a[j][k]).sum()
        })
        .symmetrize()
    }

    pub fn reconstruct(&self) -> Mat {
        self.with_values(self.eigenvalues())
    }
}
