//! Geometry of the model space `SL(n)/SO(n)`: unit-determinant symmetric
//! positive-definite matrices with the affine-invariant distance
//!
//! ```text
//! d(G, H)^2 = tr( log(G^{-1} H)^2 )
//! ```
//!
//! Spectral work is always done on the symmetric congruence
//! `C = G^{-1/2} H G^{-1/2}`, which is similar to `G^{-1} H`. Because `det C = 1`,
//! the smallest eigenvalue of `C` is recovered as the reciprocal of the product
//! of the others; this keeps distances to far-away points (huge condition
//! numbers) accurate where a direct eigenvalue would have lost all digits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{EigDecomp, Mat, MAX_DIM};
use crate::search::minimize_convex;

/// Determinant drift tolerated before a value is rescaled back onto `det = 1`.
pub const DET_RENORM_TOL: f64 = 1e-12;

/// Upper-triangle storage length for an `n x n` symmetric matrix.
#[inline]
pub const fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// A point of `S = SL(n)/SO(n)`, `n` in {2, 3}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpdRepr", into = "SpdRepr")]
pub struct SpdMatrix {
    n: usize,
    upper: [f64; 6],
}

#[derive(Serialize, Deserialize)]
struct SpdRepr {
    n: usize,
    upper: Vec<f64>,
}

impl TryFrom<SpdRepr> for SpdMatrix {
    type Error = Error;
    fn try_from(r: SpdRepr) -> Result<Self> {
        SpdMatrix::from_upper(r.n, &r.upper)
    }
}

impl From<SpdMatrix> for SpdRepr {
    fn from(m: SpdMatrix) -> Self {
        SpdRepr {
            n: m.n,
            upper: m.upper().to_vec(),
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "matrix dimension must be 2 or 3, got {n}"
        )))
    }
}

impl SpdMatrix {
    pub fn identity(n: usize) -> Self {
        assert!(n == 2 || n == 3, "matrix dimension must be 2 or 3");
        Self::pack(&Mat::identity(n))
    }

    /// Validates a symmetric positive-definite matrix and rescales it to unit
    /// determinant.
    pub fn new(m: &Mat) -> Result<Self> {
        let n = m.dim();
        check_dim(n)?;
        if !m.is_finite() {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let asym = (*m - m.transpose()).frobenius();
        if asym > 1e-9 * (1.0 + m.frobenius()) {
            return Err(Error::invalid(format!(
                "matrix is not symmetric (asymmetry {asym:e})"
            )));
        }
        Self::renormalized(&m.symmetrize())
    }

    /// Builds from the packed upper triangle, row-major.
    pub fn from_upper(n: usize, upper: &[f64]) -> Result<Self> {
        check_dim(n)?;
        if upper.len() != packed_len(n) {
            return Err(Error::invalid(format!(
                "expected {} upper-triangle entries for n = {n}, got {}",
                packed_len(n),
                upper.len()
            )));
        }
        let mut m = Mat::zeros(n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                m.set(i, j, upper[k]);
                m.set(j, i, upper[k]);
                k += 1;
            }
        }
        Self::new(&m)
    }

    /// Checks positive definiteness and divides by `det^{1/n}` when the
    /// determinant has measurably drifted from one.
    ///
    /// Past a condition number of about `1/eps` the rounded entries no longer
    /// determine the determinant. A drift within that rounding noise is not
    /// measurable, so the matrix is kept as a representative of the det-one
    /// point whose smallest eigenvalue is pinned by the others.
    pub(crate) fn renormalized(m: &Mat) -> Result<Self> {
        let n = m.dim();
        if !m.is_finite() {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let minors = m.leading_minors();
        let sylvester = minors[..n].iter().all(|&d| d > 0.0 && d.is_finite());
        let det = minors[n - 1];
        let noise = 8.0 * m.det_rounding_noise();
        if (det - 1.0).abs() <= DET_RENORM_TOL.max(noise) {
            if sylvester || (noise > 0.5 && pinned_positive(m)) {
                return Ok(Self::pack(m));
            }
            return Err(Error::invalid("matrix is not positive definite"));
        }
        if !sylvester || det <= noise {
            return Err(Error::invalid("matrix is not positive definite"));
        }
        Ok(Self::pack(&m.scale(det.powf(-1.0 / n as f64))))
    }

    fn pack(m: &Mat) -> Self {
        let n = m.dim();
        let mut upper = [0.0; 6];
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                upper[k] = m.get(i, j);
                k += 1;
            }
        }
        Self { n, upper }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper[..packed_len(self.n)]
    }

    pub fn to_mat(&self) -> Mat {
        let n = self.n;
        let mut m = Mat::zeros(n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                m.set(i, j, self.upper[k]);
                m.set(j, i, self.upper[k]);
                k += 1;
            }
        }
        m
    }

    pub fn det(&self) -> f64 {
        self.to_mat().det()
    }

    /// Eigendecomposition with the smallest eigenvalue pinned by `det = 1`.
    pub fn eig(&self) -> EigDecomp {
        det_one_eig(&self.to_mat())
    }

    /// `(G^{1/2}, G^{-1/2})`.
    pub fn sqrt_pair(&self) -> (Mat, Mat) {
        let e = self.eig();
        (e.map(f64::sqrt), e.map(|l| 1.0 / l.sqrt()))
    }

    /// Congruence `B^T G B` for `|det B| = 1`, renormalized.
    pub fn congruence(&self, b: &Mat) -> Result<Self> {
        Self::renormalized(&self.to_mat().congruence(b))
    }
}

/// All eigenvalues but the smallest are positive; the smallest is then pinned positive.
fn pinned_positive(m: &Mat) -> bool {
    let e = EigDecomp::new(m);
    e.values[..m.dim() - 1]
        .iter()
        .all(|&l| l > 0.0 && l.is_finite())
}

/// Eigendecomposition of a symmetric matrix known to have determinant one.
fn det_one_eig(m: &Mat) -> EigDecomp {
    let mut e = EigDecomp::new(m);
    let n = m.dim();
    let head: f64 = e.values[..n - 1].iter().product();
    if head > 0.0 && head.is_finite() {
        e.values[n - 1] = 1.0 / head;
    }
    e
}

/// Logarithms of the eigenvalues of a det-one SPD matrix; they sum to zero.
fn det_one_logs(e: &EigDecomp) -> [f64; MAX_DIM] {
    let n = e.dim();
    let mut logs = [0.0; MAX_DIM];
    let mut sum = 0.0;
    for i in 0..n - 1 {
        logs[i] = e.values[i].ln();
        sum += logs[i];
    }
    logs[n - 1] = -sum;
    logs
}

/// Whitened view of `H` from base `G`: the spectrum of `G^{-1/2} H G^{-1/2}`.
struct Relative {
    half: Mat,
    eig: EigDecomp,
    logs: [f64; MAX_DIM],
}

impl Relative {
    fn new(g: &SpdMatrix, h: &SpdMatrix) -> Self {
        let (half, inv_half) = g.sqrt_pair();
        let c = h.to_mat().congruence(&inv_half);
        let eig = det_one_eig(&c);
        let logs = det_one_logs(&eig);
        Self { half, eig, logs }
    }

    fn norm_sq(&self) -> f64 {
        self.logs[..self.eig.dim()].iter().map(|l| l * l).sum()
    }

    fn point_at(&self, t: f64) -> Result<SpdMatrix> {
        let n = self.eig.dim();
        let vals: Vec<f64> = self.logs[..n].iter().map(|l| (t * l).exp()).collect();
        let inner = self.eig.with_values(&vals);
        SpdMatrix::renormalized(&inner.congruence(&self.half))
    }
}

fn check_same_dim(g: &SpdMatrix, h: &SpdMatrix) -> Result<()> {
    if g.n != h.n {
        return Err(Error::contract(format!(
            "dimension mismatch: {} vs {}",
            g.n, h.n
        )));
    }
    Ok(())
}

/// Squared distance `tr(log(G^{-1}H)^2)`.
pub fn dist_sq(g: &SpdMatrix, h: &SpdMatrix) -> f64 {
    assert_eq!(g.n, h.n, "dimension mismatch");
    if g == h {
        return 0.0;
    }
    Relative::new(g, h).norm_sq()
}

/// Affine-invariant distance on `S`.
pub fn dist(g: &SpdMatrix, h: &SpdMatrix) -> f64 {
    dist_sq(g, h).sqrt()
}

/// Fallible form of [`dist`] for unvalidated callers.
pub fn try_dist(g: &SpdMatrix, h: &SpdMatrix) -> Result<f64> {
    check_same_dim(g, h)?;
    if !g.upper().iter().chain(h.upper()).all(|x| x.is_finite()) {
        return Err(Error::invalid("non-finite entries"));
    }
    Ok(dist(g, h))
}

/// `G exp(t log(G^{-1}H))`; `t` may lie outside `[0, 1]`.
pub fn geodesic(g: &SpdMatrix, h: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    check_same_dim(g, h)?;
    if t == 0.0 || g == h {
        return Ok(*g);
    }
    if t == 1.0 {
        return Ok(*h);
    }
    Relative::new(g, h).point_at(t)
}

/// A symmetric tangent vector `A` at `base`, trace-free in the sense
/// `tr(base^{-1} A) = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentSym {
    entries: Mat,
    base: SpdMatrix,
}

impl TangentSym {
    pub fn zero(base: &SpdMatrix) -> Self {
        Self {
            entries: Mat::zeros(base.n),
            base: *base,
        }
    }

    /// Validates symmetry and the trace-free condition.
    pub fn new(base: &SpdMatrix, entries: &Mat) -> Result<Self> {
        if entries.dim() != base.n {
            return Err(Error::contract("tangent and base dimensions differ"));
        }
        if !entries.is_finite() {
            return Err(Error::invalid("tangent has non-finite entries"));
        }
        let asym = (*entries - entries.transpose()).frobenius();
        if asym > 1e-9 * (1.0 + entries.frobenius()) {
            return Err(Error::invalid("tangent is not symmetric"));
        }
        let t = Self {
            entries: entries.symmetrize(),
            base: *base,
        };
        let tr = t.base_trace();
        if tr.abs() > 1e-10 * (1.0 + t.norm()) {
            return Err(Error::invalid(format!(
                "tangent is not trace-free at its base (trace {tr:e})"
            )));
        }
        Ok(t)
    }

    /// Removes the `tr(G^{-1}A)` component: `A - tr(G^{-1}A)/n * G`.
    pub fn project(base: &SpdMatrix, entries: &Mat) -> Self {
        let sym = entries.symmetrize();
        let g = base.to_mat();
        let tr = (g.inverse().expect("SPD matrix is invertible") * sym).trace();
        Self {
            entries: sym - g.scale(tr / base.n as f64),
            base: *base,
        }
    }

    pub fn entries(&self) -> &Mat {
        &self.entries
    }

    pub fn base(&self) -> &SpdMatrix {
        &self.base
    }

    /// `G^{-1/2} A G^{-1/2}`.
    fn whitened(&self) -> Mat {
        let (_, inv_half) = self.base.sqrt_pair();
        self.entries.congruence(&inv_half)
    }

    /// `tr(G^{-1} A)`.
    pub fn base_trace(&self) -> f64 {
        self.whitened().trace()
    }

    /// `sqrt(tr((G^{-1}A)^2))`.
    pub fn norm(&self) -> f64 {
        self.whitened().frobenius()
    }

    /// `tr(G^{-1} A G^{-1} B)`.
    pub fn inner(&self, other: &TangentSym) -> Result<f64> {
        if self.base != other.base {
            return Err(Error::contract(
                "tangent vectors live at different base points",
            ));
        }
        let a = self.whitened();
        let b = other.whitened();
        Ok((a * b).trace())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            entries: self.entries.scale(s),
            base: self.base,
        }
    }

    pub fn add(&self, other: &TangentSym) -> Result<Self> {
        if self.base != other.base {
            return Err(Error::contract(
                "tangent vectors live at different base points",
            ));
        }
        Ok(Self {
            entries: self.entries + other.entries,
            base: self.base,
        })
    }
}

/// `A = G log(G^{-1} H)`, the initial velocity of the geodesic from `G` to `H`.
pub fn log_map(g: &SpdMatrix, h: &SpdMatrix) -> Result<TangentSym> {
    check_same_dim(g, h)?;
    if g == h {
        return Ok(TangentSym::zero(g));
    }
    let rel = Relative::new(g, h);
    let n = g.n;
    let inner = rel.eig.with_values(&rel.logs[..n]);
    Ok(TangentSym {
        entries: inner.congruence(&rel.half),
        base: *g,
    })
}

/// `G exp(t G^{-1} A)`.
pub fn exp_map(g: &SpdMatrix, a: &TangentSym, t: f64) -> Result<SpdMatrix> {
    if a.base != *g {
        return Err(Error::contract(
            "tangent vector is not based at the given point",
        ));
    }
    if t == 0.0 || a.entries == Mat::zeros(g.n) {
        return Ok(*g);
    }
    let (half, inv_half) = g.sqrt_pair();
    let w = a.entries.congruence(&inv_half);
    exp_whitened(&half, &w, t)
}

/// `G^{1/2} exp(t W) G^{1/2}` with `W` projected to trace zero.
fn exp_whitened(half: &Mat, w: &Mat, t: f64) -> Result<SpdMatrix> {
    let e = EigDecomp::new(w);
    let n = w.dim();
    let mean = e.eigenvalues().iter().sum::<f64>() / n as f64;
    let vals: Vec<f64> = e
        .eigenvalues()
        .iter()
        .map(|l| (t * (l - mean)).exp())
        .collect();
    SpdMatrix::renormalized(&e.with_values(&vals).congruence(half))
}

/// Stopping rule for the Karcher iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KarcherOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
}

impl Default for KarcherOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            grad_tol: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct KarcherOutcome {
    pub mean: SpdMatrix,
    pub iterations: usize,
    pub grad_norm: f64,
}

pub(crate) fn validate_weights(len: usize, weights: &[f64]) -> Result<()> {
    if len == 0 {
        return Err(Error::invalid("mean of an empty set"));
    }
    if weights.len() != len {
        return Err(Error::invalid(format!(
            "{} weights for {len} points",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::invalid("weights must be finite and nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "weights sum to {total}, expected 1"
        )));
    }
    Ok(())
}

/// Index of the largest weight, ties broken toward the lowest index.
pub(crate) fn heaviest(weights: &[f64]) -> usize {
    let mut best = 0;
    for (i, w) in weights.iter().enumerate() {
        if *w > weights[best] {
            best = i;
        }
    }
    best
}

/// Weighted Karcher mean: the minimizer of `sum_i w_i d^2(., S_i)`.
pub fn karcher_mean(points: &[SpdMatrix], weights: &[f64]) -> Result<SpdMatrix> {
    karcher_mean_with(points, weights, None, &KarcherOptions::default()).map(|o| o.mean)
}

/// One point seen from the current iterate: `C = m^{-1/2} S m^{-1/2} = Q diag(e^l) Q^T`.
struct Whitened {
    weight: f64,
    q: Mat,
    logs: [f64; MAX_DIM],
}

/// `(x/2) coth(x/2)`, the Hessian multiplier of `d^2/2` across eigen-directions
/// whose logarithms differ by `x`.
fn coth_multiplier(x: f64) -> f64 {
    let h = 0.5 * x;
    if h.abs() < 1e-4 {
        1.0 + h * h / 3.0
    } else {
        h / h.tanh()
    }
}

/// Whitened view of every point at base `m`; returns the points, the negative
/// half-gradient `W = sum_i w_i log C_i` and `F(m) = sum_i w_i |log C_i|^2`.
fn whiten(
    points: &[SpdMatrix],
    weights: &[f64],
    m: &SpdMatrix,
    inv_half: &Mat,
) -> (Vec<Whitened>, Mat, f64) {
    let n = m.n;
    let mut out = Vec::with_capacity(points.len());
    let mut w = Mat::zeros(n);
    let mut f = 0.0;
    for (p, &wt) in points.iter().zip(weights) {
        if wt == 0.0 {
            continue;
        }
        if p == m {
            out.push(Whitened {
                weight: wt,
                q: Mat::identity(n),
                logs: [0.0; MAX_DIM],
            });
            continue;
        }
        let e = det_one_eig(&p.to_mat().congruence(inv_half));
        let logs = det_one_logs(&e);
        w = w + e.with_values(&logs[..n]).scale(wt);
        f += wt * logs[..n].iter().map(|l| l * l).sum::<f64>();
        out.push(Whitened {
            weight: wt,
            q: e.vectors,
            logs,
        });
    }
    (out, w, f)
}

fn mean_objective(points: &[SpdMatrix], weights: &[f64], m: &SpdMatrix) -> f64 {
    let (_, inv_half) = m.sqrt_pair();
    whiten(points, weights, m, &inv_half).2
}

/// Symmetric matrices in the orthonormal basis `E_jj`, `(E_jk + E_kj)/sqrt 2`.
fn sym_coords(m: &Mat) -> Vec<f64> {
    let n = m.dim();
    let mut out = Vec::with_capacity(packed_len(n));
    for j in 0..n {
        for k in j..n {
            out.push(if j == k {
                m.get(j, j)
            } else {
                std::f64::consts::SQRT_2 * m.get(j, k)
            });
        }
    }
    out
}

fn sym_from_coords(n: usize, x: &[f64]) -> Mat {
    let mut m = Mat::zeros(n);
    let mut idx = 0;
    for j in 0..n {
        for k in j..n {
            let v = if j == k {
                x[idx]
            } else {
                x[idx] / std::f64::consts::SQRT_2
            };
            m.set(j, k, v);
            m.set(k, j, v);
            idx += 1;
        }
    }
    m
}

/// Riemannian Hessian of `F/2` at the whitened base, applied to `x`.
fn hessian_apply(set: &[Whitened], x: &Mat) -> Mat {
    let n = x.dim();
    let mut acc = Mat::zeros(n);
    for pt in set {
        let xt = x.congruence(&pt.q);
        let yt = Mat::from_fn(n, |j, k| {
            xt.get(j, k) * coth_multiplier(pt.logs[j] - pt.logs[k])
        });
        acc = acc + yt.congruence(&pt.q.transpose()).scale(pt.weight);
    }
    acc
}

/// Newton direction `H^{-1} W`, or `W` if the system cannot be solved.
fn newton_direction(set: &[Whitened], w: &Mat) -> Mat {
    let n = w.dim();
    let p = packed_len(n);
    let mut a = vec![vec![0.0; p + 1]; p];
    for col in 0..p {
        let mut e = vec![0.0; p];
        e[col] = 1.0;
        let h = sym_coords(&hessian_apply(set, &sym_from_coords(n, &e)));
        for row in 0..p {
            a[row][col] = h[row];
        }
    }
    for (row, v) in sym_coords(w).into_iter().enumerate() {
        a[row][p] = v;
    }
    match solve_augmented(a) {
        Some(x) => {
            let d = sym_from_coords(n, &x);
            let shift = d.trace() / n as f64;
            d - Mat::identity(n).scale(shift)
        }
        None => *w,
    }
}

/// Gaussian elimination with partial pivoting on `[A | b]`.
fn solve_augmented(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let p = a.len();
    for c in 0..p {
        let piv = (c..p).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if !(a[piv][c].abs() > 0.0) {
            return None;
        }
        a.swap(c, piv);
        for r in c + 1..p {
            let f = a[r][c] / a[c][c];
            for k in c..=p {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    let mut x = vec![0.0; p];
    for r in (0..p).rev() {
        let s: f64 = (r + 1..p).map(|k| a[r][k] * x[k]).sum();
        x[r] = (a[r][p] - s) / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Below this gradient norm Newton steps are taken without a decrease test,
/// whose differences would be at rounding level.
const NEWTON_FULL_STEP: f64 = 1e-6;

/// Damped Riemannian Newton iteration on `F(m) = sum_i w_i d^2(m, S_i)`, started
/// from `init` or from the heaviest point. Converged when `|sum_i w_i log C_i|_F`
/// is at most `grad_tol`.
pub fn karcher_mean_with(
    points: &[SpdMatrix],
    weights: &[f64],
    init: Option<&SpdMatrix>,
    opts: &KarcherOptions,
) -> Result<KarcherOutcome> {
    validate_weights(points.len(), weights)?;
    let n = points[0].n;
    if points.iter().any(|p| p.n != n) || init.is_some_and(|m| m.n != n) {
        return Err(Error::contract("points of different dimensions"));
    }
    let mut m = init.copied().unwrap_or(points[heaviest(weights)]);
    let mut grad_norm = f64::INFINITY;
    for it in 0..=opts.max_iter {
        let (half, inv_half) = m.sqrt_pair();
        let (set, w, f) = whiten(points, weights, &m, &inv_half);
        grad_norm = w.frobenius();
        if grad_norm <= opts.grad_tol {
            return Ok(KarcherOutcome {
                mean: m,
                iterations: it,
                grad_norm,
            });
        }
        if it == opts.max_iter {
            break;
        }
        let mut dir = newton_direction(&set, &w);
        // descent slope of F along dir is -2 <W, dir>
        let mut slope = 2.0
            * (0..n)
                .flat_map(|j| (0..n).map(move |k| (j, k)))
                .map(|(j, k)| w.get(j, k) * dir.get(j, k))
                .sum::<f64>();
        if !(slope > 0.0) {
            dir = w;
            slope = 2.0 * grad_norm * grad_norm;
        }
        let mut alpha = 1.0;
        let mut next = exp_whitened(&half, &dir, alpha)?;
        if grad_norm > NEWTON_FULL_STEP {
            for _ in 0..40 {
                if mean_objective(points, weights, &next) <= f - 1e-4 * alpha * slope {
                    break;
                }
                alpha *= 0.5;
                next = exp_whitened(&half, &dir, alpha)?;
            }
        }
        m = next;
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        grad_norm,
    })
}

/// `Gamma(t) = G exp(t log(G^{-1}H))` with its spectral data cached, for
/// repeated evaluation.
pub struct SpdGeodesic {
    start: SpdMatrix,
    rel: Relative,
    length: f64,
}

impl SpdGeodesic {
    pub fn new(g: &SpdMatrix, h: &SpdMatrix) -> Result<Self> {
        check_same_dim(g, h)?;
        let rel = Relative::new(g, h);
        let length = if g == h { 0.0 } else { rel.norm_sq().sqrt() };
        Ok(Self {
            start: *g,
            rel,
            length,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn at(&self, t: f64) -> Result<SpdMatrix> {
        if t == 0.0 || self.length == 0.0 {
            return Ok(self.start);
        }
        self.rel.point_at(t)
    }
}

/// Projection width used by the golden-section search.
pub const PROJECTION_WIDTH_TOL: f64 = 1e-12;

/// Closest point to `p` on the maximal geodesic through `g` and `h`.
///
/// `t -> d^2(P, Gamma(t))` is convex, so the minimizer is unique.
pub fn project_to_geodesic(
    p: &SpdMatrix,
    g: &SpdMatrix,
    h: &SpdMatrix,
) -> Result<(f64, SpdMatrix)> {
    check_same_dim(p, g)?;
    let path = SpdGeodesic::new(g, h)?;
    if path.length() <= 1e-12 {
        return Err(Error::invalid("degenerate geodesic: endpoints coincide"));
    }
    let t = minimize_convex(
        |t| path.at(t).map(|q| dist_sq(p, &q)).unwrap_or(f64::INFINITY),
        PROJECTION_WIDTH_TOL,
    );
    Ok((t, path.at(t)?))
}
