//! Orbits, ergodic means `m_n(p)` and fixed points of the pullback action.
//!
//! `m_n(p)` is the equal-weight mean of `p, T p, .., T^{n-1} p`. For an isometry
//! with bounded orbits it converges to a fixed point of `T`. A run first screens
//! the orbit for unbounded growth, then computes means until the residual
//! `delta(T m_n, m_n)` drops below tolerance.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    field_dist, field_geodesic, field_mean_with, project_onto, FieldGeodesic, MetricField,
};
use crate::sampling::rng_from_seed;
use crate::space::GeodesicSpace;
use crate::spd::KarcherOptions;
use crate::volumorphism::{pullback, VolumorphismMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Converged,
    DivergingOrbit,
    MaxIterations,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Converged => "converged",
            Verdict::DivergingOrbit => "diverging-orbit",
            Verdict::MaxIterations => "max-iterations",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub n_max: usize,
    /// Residual tolerance in `delta`.
    pub tol: f64,
    /// Least-squares slope of the diameter tail, per step.
    pub slope_threshold: f64,
    /// Multiple of the reference diameter beyond which an orbit counts as unbounded.
    pub diameter_factor: f64,
    pub tail_window: usize,
    /// Orbit length whose diameter is the reference.
    pub reference_len: usize,
    pub karcher: KarcherOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            n_max: 400,
            tol: 1e-8,
            slope_threshold: 1e-3,
            diameter_factor: 10.0,
            tail_window: 10,
            reference_len: 10,
            karcher: KarcherOptions::default(),
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::invalid("n_max must be at least 1"));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::invalid("tol must be positive"));
        }
        if self.tail_window < 2 || self.reference_len == 0 {
            return Err(Error::invalid(
                "tail_window must be at least 2 and reference_len at least 1",
            ));
        }
        if !(self.diameter_factor.is_finite() && self.diameter_factor > 0.0)
            || !self.slope_threshold.is_finite()
        {
            return Err(Error::invalid(
                "divergence thresholds must be finite, diameter_factor positive",
            ));
        }
        if self.karcher.max_iter == 0 || !(self.karcher.grad_tol > 0.0) {
            return Err(Error::invalid(
                "karcher options must allow at least one step with positive tolerance",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MeanRunReport {
    pub map: String,
    pub options: SolverOptions,
    pub verdict: Verdict,
    /// `n` for which `m_n` was computed.
    pub n_values: Vec<usize>,
    /// `delta(T m_n, m_n)`, aligned with `n_values`.
    pub residuals: Vec<f64>,
    /// `delta(m_n, m_{n+1})`; one shorter than `n_values`.
    pub mean_drift: Vec<f64>,
    /// Entry `k - 1` is the diameter of the first `k` iterates.
    pub orbit_diameter_curve: Vec<f64>,
    pub snapshot_n: Vec<usize>,
    #[serde(skip)]
    pub mean_points: Vec<MetricField>,
    /// `max_i delta(h, T^i p) - diam`, over the averaged iterates; set when converged.
    pub hull_excess: Option<f64>,
}

impl MeanRunReport {
    pub fn final_residual(&self) -> Option<f64> {
        self.residuals.last().copied()
    }

    /// Least-squares slope of the last `window` points of the diameter curve.
    pub fn diameter_tail_slope(&self, window: usize) -> Option<f64> {
        tail_slope(&self.orbit_diameter_curve, window)
    }
}

/// `[p, T p, .., T^{count-1} p]`.
pub fn orbit(p: &MetricField, phi: &VolumorphismMap, count: usize) -> Result<Vec<MetricField>> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    out.push(p.clone());
    for _ in 1..count {
        let next = pullback(phi, out.last().expect("nonempty"))?;
        out.push(next);
    }
    Ok(out)
}

/// Largest pairwise distance.
pub fn orbit_diameter<P: GeodesicSpace>(space: &P, points: &[P::Point]) -> Result<f64> {
    let mut d = 0.0f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d = d.max(space.dist(&points[i], &points[j])?);
        }
    }
    Ok(d)
}

pub fn tail_slope(curve: &[f64], window: usize) -> Option<f64> {
    if window < 2 || curve.len() < window {
        return None;
    }
    let ys = &curve[curve.len() - window..];
    let xbar = (window - 1) as f64 / 2.0;
    let ybar = ys.iter().sum::<f64>() / window as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - xbar;
        num += dx * (y - ybar);
        den += dx * dx;
    }
    Some(num / den)
}

fn diverging(curve: &[f64], opts: &SolverOptions) -> bool {
    let k = curve.len();
    if k < opts.reference_len.max(opts.tail_window) {
        return false;
    }
    let reference = curve[opts.reference_len - 1];
    let slope = tail_slope(curve, opts.tail_window).unwrap_or(0.0);
    slope > opts.slope_threshold && curve[k - 1] > opts.diameter_factor * reference
}

struct Screen {
    orbit: Vec<MetricField>,
    curve: Vec<f64>,
    diverging: bool,
}

/// Iterates the orbit up to `n_max`, recording its diameter curve.
///
/// `T` is an isometry, so `delta(T^i p, T^j p) = delta(p, T^{j-i} p)` and the
/// diameter of the first `k` iterates is `max_{d<k} delta(p, T^d p)`.
fn screen_orbit(p: &MetricField, phi: &VolumorphismMap, opts: &SolverOptions) -> Result<Screen> {
    let mut orbit = vec![p.clone()];
    let mut curve: Vec<f64> = vec![0.0];
    while orbit.len() < opts.n_max {
        let next = pullback(phi, orbit.last().expect("nonempty"))?;
        let d = field_dist(p, &next)?;
        curve.push(curve.last().expect("nonempty").max(d));
        orbit.push(next);
        if diverging(&curve, opts) {
            return Ok(Screen {
                orbit,
                curve,
                diverging: true,
            });
        }
    }
    Ok(Screen {
        orbit,
        curve,
        diverging: false,
    })
}

fn is_snapshot(n: usize) -> bool {
    n.is_power_of_two()
}

/// Means `m_1, m_2, ..` with residual tracking; see the module docs.
pub fn mean_sequence(
    p: &MetricField,
    phi: &VolumorphismMap,
    opts: &SolverOptions,
) -> Result<MeanRunReport> {
    opts.validate()?;
    if **p.grid() != **phi.grid() || p.dim() != phi.dim() {
        return Err(Error::contract("map and field live on different grids"));
    }
    let screen = screen_orbit(p, phi, opts)?;
    let mut report = MeanRunReport {
        map: phi.label().to_string(),
        options: *opts,
        verdict: Verdict::MaxIterations,
        n_values: Vec::new(),
        residuals: Vec::new(),
        mean_drift: Vec::new(),
        orbit_diameter_curve: screen.curve,
        snapshot_n: Vec::new(),
        mean_points: Vec::new(),
        hull_excess: None,
    };
    if screen.diverging {
        report.verdict = Verdict::DivergingOrbit;
        return Ok(report);
    }
    let orbit = screen.orbit;
    let mut prev: Option<MetricField> = None;
    for n in 1..=orbit.len() {
        let m = if n == 1 {
            orbit[0].clone()
        } else {
            let w = vec![1.0 / n as f64; n];
            field_mean_with(&orbit[..n], &w, prev.as_ref(), &opts.karcher).map_err(|e| {
                Error::Mean {
                    n,
                    source: Box::new(e),
                }
            })?
        };
        let residual = field_dist(&pullback(phi, &m)?, &m)?;
        if let Some(prev) = &prev {
            report.mean_drift.push(field_dist(prev, &m)?);
        }
        report.n_values.push(n);
        report.residuals.push(residual);
        let done = residual <= opts.tol;
        if done || n == orbit.len() || is_snapshot(n) {
            report.snapshot_n.push(n);
            report.mean_points.push(m.clone());
        }
        if done {
            report.verdict = Verdict::Converged;
            let diam = report.orbit_diameter_curve[n - 1];
            let mut excess = f64::NEG_INFINITY;
            for o in &orbit[..n] {
                excess = excess.max(field_dist(&m, o)? - diam);
            }
            report.hull_excess = Some(excess);
            break;
        }
        prev = Some(m);
    }
    Ok(report)
}

/// First mean with residual within tolerance, as an invariant metric of `phi`.
pub fn fixed_point_solve(
    p: &MetricField,
    phi: &VolumorphismMap,
    opts: &SolverOptions,
) -> Result<(MetricField, MeanRunReport)> {
    let report = mean_sequence(p, phi, opts)?;
    if report.verdict != Verdict::Converged {
        return Err(Error::NoFixedPoint {
            report: Box::new(report),
        });
    }
    if let Some(excess) = report.hull_excess {
        if excess > 1e-9 {
            return Err(Error::contract(format!(
                "mean lies {excess:e} outside the orbit-diameter ball"
            )));
        }
    }
    let h = report
        .mean_points
        .last()
        .expect("converged run stores its final mean")
        .clone();
    Ok((h, report))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexityProbe {
    pub n: usize,
    pub t: Vec<f64>,
    /// `delta^2(m_n(gamma(t)), q)` at each `t`.
    pub values: Vec<f64>,
    /// Largest `f((t1 + t2)/2) - (f(t1) + f(t2))/2` over triples `t[i], t[i+2]`.
    pub max_violation: f64,
}

fn orbit_mean(
    x: &MetricField,
    phi: &VolumorphismMap,
    n: usize,
    opts: &KarcherOptions,
) -> Result<MetricField> {
    let pts = orbit(x, phi, n)?;
    field_mean_with(&pts, &vec![1.0 / n as f64; n], None, opts)
}

/// Samples `t -> delta^2(m_n(gamma(t)), q)` along the geodesic `g0 -> g1`.
///
/// Reports midpoint convexity violations; it asserts nothing.
pub fn distance_convexity_probe(
    phi: &VolumorphismMap,
    q: &MetricField,
    g0: &MetricField,
    g1: &MetricField,
    n: usize,
    t_samples: &[f64],
) -> Result<ConvexityProbe> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    q.check_compatible(g0)?;
    let opts = KarcherOptions::default();
    let f = |t: f64| -> Result<f64> {
        let m = orbit_mean(&field_geodesic(g0, g1, t)?, phi, n, &opts)?;
        let d = field_dist(&m, q)?;
        Ok(d * d)
    };
    let values = t_samples
        .iter()
        .map(|&t| f(t))
        .collect::<Result<Vec<_>>>()?;
    let mut max_violation = f64::NEG_INFINITY;
    for i in 0..t_samples.len().saturating_sub(2) {
        let (t1, t2) = (t_samples[i], t_samples[i + 2]);
        let mid = 0.5 * (t1 + t2);
        let fm = if mid == t_samples[i + 1] {
            values[i + 1]
        } else {
            f(mid)?
        };
        max_violation = max_violation.max(fm - 0.5 * (values[i] + values[i + 2]));
    }
    Ok(ConvexityProbe {
        n,
        t: t_samples.to_vec(),
        values,
        max_violation,
    })
}

/// Random points of the geodesic hull: level 0 is `points`, level `k` holds
/// geodesic points between random pairs of level `k - 1`. Returns every level.
pub fn hull_sampler<P: GeodesicSpace>(
    space: &P,
    points: &[P::Point],
    k_levels: usize,
    samples_per_level: usize,
    seed: u64,
) -> Result<Vec<P::Point>> {
    let mut rng = rng_from_seed(seed);
    let mut all: Vec<P::Point> = points.to_vec();
    let mut level: Vec<P::Point> = points.to_vec();
    if level.is_empty() {
        return Ok(all);
    }
    for _ in 0..k_levels {
        let mut next = Vec::with_capacity(samples_per_level);
        for _ in 0..samples_per_level {
            let a = rng.gen_range(0..level.len());
            let b = rng.gen_range(0..level.len());
            let t: f64 = rng.gen();
            next.push(space.geodesic(&level[a], &level[b], t)?);
        }
        all.extend(next.iter().cloned());
        level = next;
    }
    Ok(all)
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakConvergenceProbe {
    pub tol: f64,
    /// Per direction, `delta(pi_gamma(m_k), q)` for each element of the sequence.
    pub curves: Vec<Vec<f64>>,
    /// Every curve ends at or below `tol`.
    pub within_tol: bool,
}

/// Distances from `q` of the projections of `sequence` onto the geodesics
/// `q -> d` for each direction `d`.
///
/// Only finitely many directions are probed, so this supports weak convergence
/// rather than establishing it.
pub fn weak_convergence_probe(
    sequence: &[MetricField],
    q: &MetricField,
    directions: &[MetricField],
    tol: f64,
) -> Result<WeakConvergenceProbe> {
    let mut curves = Vec::with_capacity(directions.len());
    for d in directions {
        let path = FieldGeodesic::new(q, d)?;
        if path.length() <= 1e-12 {
            return Err(Error::invalid("degenerate direction: coincides with q"));
        }
        let mut curve = Vec::with_capacity(sequence.len());
        for m in sequence {
            m.check_compatible(q)?;
            curve.push(project_onto(m, &path).abs() * path.length());
        }
        curves.push(curve);
    }
    let within_tol = curves.iter().all(|c| c.last().is_none_or(|&v| v <= tol));
    Ok(WeakConvergenceProbe {
        tol,
        curves,
        within_tol,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::field::MeasureGrid;
    use crate::sampling::random_field;
    use crate::space::FieldSpace;
    use crate::spd::SpdMatrix;
    use crate::volumorphism::{make_torus_automorphism, make_translation};

    fn grid(n: usize) -> Arc<MeasureGrid> {
        Arc::new(MeasureGrid::uniform(&[n, n], 1.0).unwrap())
    }

    #[test]
    fn identity_converges_at_once() {
        let g = grid(4);
        let id = VolumorphismMap::identity(g.clone(), 2).unwrap();
        let p = random_field(&mut rng_from_seed(3), &g, 2, 2.0);
        let (h, report) = fixed_point_solve(&p, &id, &SolverOptions::default()).unwrap();
        assert_eq!(h, p);
        assert_eq!(report.n_values, vec![1]);
        assert_eq!(report.residuals, vec![0.0]);
        assert_eq!(report.verdict, Verdict::Converged);
    }

    #[test]
    fn orbit_of_identity_repeats() {
        let g = grid(3);
        let id = VolumorphismMap::identity(g.clone(), 3).unwrap();
        let p = random_field(&mut rng_from_seed(1), &g, 3, 0.5);
        let o = orbit(&p, &id, 4).unwrap();
        assert_eq!(o.len(), 4);
        assert!(o.iter().all(|x| *x == p));
    }

    #[test]
    fn translation_orbit_is_periodic() {
        let g = grid(6);
        let t = make_translation(g.clone(), 2, &[2, 0]).unwrap();
        let p = random_field(&mut rng_from_seed(2), &g, 2, 2.0);
        let o = orbit(&p, &t, 7).unwrap();
        assert_eq!(o[3], o[0]);
        assert_eq!(o[6], o[0]);
        assert_ne!(o[1], o[0]);
    }

    #[test]
    fn diameter_of_small_sets() {
        let space = FieldSpace::uniform(&[2, 2], 2).unwrap();
        let mut r = rng_from_seed(5);
        let a = random_field(&mut r, &space.grid, 2, 0.5);
        let b = random_field(&mut r, &space.grid, 2, 0.5);
        assert_eq!(orbit_diameter(&space, &[a.clone()]).unwrap(), 0.0);
        assert_eq!(
            orbit_diameter(&space, &[a.clone(), b.clone()]).unwrap(),
            field_dist(&a, &b).unwrap()
        );
    }

    #[test]
    fn tail_slope_of_a_line() {
        let curve: Vec<f64> = (0..20).map(|k| 3.0 * k as f64 + 1.0).collect();
        assert!((tail_slope(&curve, 10).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(tail_slope(&curve[..5], 10), None);
    }

    #[test]
    fn cat_map_is_flagged_as_diverging() {
        let g = grid(8);
        let cat = make_torus_automorphism(g.clone(), [[2, 1], [1, 1]]).unwrap();
        let p = MetricField::constant(g, SpdMatrix::identity(2));
        let err = fixed_point_solve(&p, &cat, &SolverOptions::default()).unwrap_err();
        match err {
            Error::NoFixedPoint { report } => {
                assert_eq!(report.verdict, Verdict::DivergingOrbit);
                assert!(report.n_values.is_empty());
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn max_iterations_when_n_max_is_too_small() {
        let g = grid(4);
        let t = make_translation(g.clone(), 2, &[1, 0]).unwrap();
        let p = random_field(&mut rng_from_seed(8), &g, 2, 0.5);
        let opts = SolverOptions {
            n_max: 3,
            ..SolverOptions::default()
        };
        let report = mean_sequence(&p, &t, &opts).unwrap();
        assert_eq!(report.verdict, Verdict::MaxIterations);
        assert_eq!(report.n_values, vec![1, 2, 3]);
        assert_eq!(report.snapshot_n, vec![1, 2, 3]);
        assert_eq!(report.mean_drift.len(), 2);
    }

    #[test]
    fn options_validation() {
        let bad = SolverOptions {
            n_max: 0,
            ..SolverOptions::default()
        };
        assert!(bad.validate().is_err());
        assert!(SolverOptions::default().validate().is_ok());
    }

    #[test]
    fn hull_sampler_level_zero_returns_input() {
        let space = FieldSpace::uniform(&[2], 2).unwrap();
        let mut r = rng_from_seed(1);
        let pts = vec![
            random_field(&mut r, &space.grid, 2, 2.0),
            random_field(&mut r, &space.grid, 2, 2.0),
        ];
        assert_eq!(hull_sampler(&space, &pts, 0, 10, 1).unwrap(), pts);
        assert_eq!(hull_sampler(&space, &pts, 2, 5, 1).unwrap().len(), 12);
    }

    #[test]
    fn weak_probe_on_constant_sequence() {
        let g = grid(2);
        let mut r = rng_from_seed(6);
        let q = random_field(&mut r, &g, 2, 0.5);
        let dirs = vec![random_field(&mut r, &g, 2, 0.5)];
        let probe = weak_convergence_probe(&[q.clone(), q.clone()], &q, &dirs, 1e-8).unwrap();
        assert!(probe.within_tol);
        assert!(probe.curves[0].iter().all(|&v| v <= 1e-9));
        assert!(weak_convergence_probe(&[q.clone()], &q, &[q.clone()], 1e-8).is_err());
    }
}
