//! Randomized checks of the comparison inequalities behind the fixed point theorem.
//!
//! Each check runs independent trials; trial `i` uses seed `seed + i` and spread
//! `SIGMA_REGIMES[i % 2]`. A trial yields one signed violation (positive means the
//! inequality failed by that much), so any witness can be replayed from its seed.

use rayon::prelude::*;
use serde::Serialize;

use crate::ergodic::{hull_sampler, orbit_diameter};
use crate::error::{Error, Result};
use crate::sampling::{rng_from_seed, SIGMA_REGIMES};
use crate::space::GeodesicSpace;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const MAX_WITNESSES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    NpcInequality,
    EquiconvexityDist,
    EquiconvexityMean,
    MinimizerStability,
    ProjectionContinuity,
    HullDiameter,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::NpcInequality => "npc-inequality",
            Property::EquiconvexityDist => "equiconvexity-dist",
            Property::EquiconvexityMean => "equiconvexity-mean",
            Property::MinimizerStability => "minimizer-stability",
            Property::ProjectionContinuity => "projection-continuity",
            Property::HullDiameter => "hull-diameter",
        }
    }

    /// Largest violation still counted as a pass.
    pub fn tolerance(self) -> f64 {
        match self {
            Property::NpcInequality
            | Property::EquiconvexityDist
            | Property::EquiconvexityMean
            | Property::HullDiameter => 1e-9,
            // the bounds below already carry their own slack
            Property::MinimizerStability | Property::ProjectionContinuity => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub trial: usize,
    pub seed: u64,
    pub violation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub property: Property,
    pub space: String,
    pub trials: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// The worst trials, largest violation first.
    pub witnesses: Vec<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<&'static str>,
}

fn sigma_for(trial: usize) -> f64 {
    SIGMA_REGIMES[trial % SIGMA_REGIMES.len()]
}

fn run_trials<P: GeodesicSpace>(
    space: &P,
    property: Property,
    trials: usize,
    seed: u64,
) -> Result<PropertyReport> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let results: Vec<Result<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| run_trial(space, property, i, seed.wrapping_add(i as u64)))
        .collect();
    let mut witnesses = Vec::with_capacity(trials);
    for (i, r) in results.into_iter().enumerate() {
        witnesses.push(Witness {
            trial: i,
            seed: seed.wrapping_add(i as u64),
            violation: r?,
        });
    }
    // stable sort keeps equal violations in trial order
    witnesses.sort_by(|a, b| b.violation.total_cmp(&a.violation));
    witnesses.truncate(MAX_WITNESSES);
    let max_violation = witnesses[0].violation;
    let tolerance = property.tolerance();
    Ok(PropertyReport {
        property,
        space: space.name(),
        trials,
        max_violation,
        tolerance,
        passed: max_violation <= tolerance,
        witnesses,
        note: match property {
            Property::ProjectionContinuity => Some(
                "bound d(pi p, pi q)^2 <= 4(2 D eta + eta^2) + 1e-9 with D = d(gamma(1/2), p) is a conservative explicit reading of the continuity estimate",
            ),
            Property::MinimizerStability => Some(
                "sup |F - G| is estimated on hull samples and both minimizers; the bound carries a factor-2 slack",
            ),
            _ => None,
        },
    })
}

/// Re-runs a single trial; returns its violation.
pub fn replay<P: GeodesicSpace>(space: &P, property: Property, witness: &Witness) -> Result<f64> {
    run_trial(space, property, witness.trial, witness.seed)
}

fn run_trial<P: GeodesicSpace>(
    space: &P,
    property: Property,
    trial: usize,
    seed: u64,
) -> Result<f64> {
    let sigma = sigma_for(trial);
    let mut rng = rng_from_seed(seed);
    match property {
        Property::NpcInequality => {
            let q = space.random_point(&mut rng, sigma);
            let a = space.random_point(&mut rng, sigma);
            let b = space.random_point(&mut rng, sigma);
            let t: f64 = rng.gen();
            npc_violation(space, &q, &a, &b, t)
        }
        Property::EquiconvexityDist => {
            let p = space.random_point(&mut rng, sigma);
            let a = space.random_point(&mut rng, sigma);
            let b = space.random_point(&mut rng, sigma);
            midpoint_violation(space, &a, &b, |x| space.dist_sq(x, &p))
        }
        Property::EquiconvexityMean => {
            let k = rng.gen_range(1..=5);
            let pts: Vec<P::Point> = (0..k)
                .map(|_| space.random_point(&mut rng, sigma))
                .collect();
            let w = vec![1.0 / k as f64; k];
            let a = space.random_point(&mut rng, sigma);
            let b = space.random_point(&mut rng, sigma);
            midpoint_violation(space, &a, &b, |x| space.mean_function(x, &pts, &w))
        }
        Property::MinimizerStability => {
            let eta = [1e-1, 1e-2, 1e-4][trial % 3];
            minimizer_stability_trial(space, &mut rng, sigma, eta, seed)
        }
        Property::ProjectionContinuity => {
            let eta = [1e-2, 1e-4, 1e-6][trial % 3];
            projection_continuity_trial(space, &mut rng, sigma, eta)
        }
        Property::HullDiameter => {
            let k = rng.gen_range(1..=5);
            let pts: Vec<P::Point> = (0..k)
                .map(|_| space.random_point(&mut rng, sigma))
                .collect();
            let samples = hull_sampler(space, &pts, 3, 20, seed)?;
            hull_excess(space, &pts, &samples)
        }
    }
}

/// `d^2(q, g(t)) - [(1-t) d^2(q, g(0)) + t d^2(q, g(1)) - t(1-t) l^2]`.
pub fn npc_violation<P: GeodesicSpace>(
    space: &P,
    q: &P::Point,
    a: &P::Point,
    b: &P::Point,
    t: f64,
) -> Result<f64> {
    let x = space.geodesic(a, b, t)?;
    let lhs = space.dist_sq(q, &x)?;
    let rhs = (1.0 - t) * space.dist_sq(q, a)? + t * space.dist_sq(q, b)?
        - t * (1.0 - t) * space.dist_sq(a, b)?;
    Ok(lhs - rhs)
}

/// `f(g(1/2)) - [f(g(0))/2 + f(g(1))/2 - d^2(g(0), g(1))/4]`.
pub fn midpoint_violation<P: GeodesicSpace>(
    space: &P,
    a: &P::Point,
    b: &P::Point,
    f: impl Fn(&P::Point) -> Result<f64>,
) -> Result<f64> {
    let mid = space.geodesic(a, b, 0.5)?;
    Ok(f(&mid)? - (0.5 * f(a)? + 0.5 * f(b)? - 0.25 * space.dist_sq(a, b)?))
}

/// Point at distance `eta` from `p`, toward a random point.
fn perturb<P: GeodesicSpace>(
    space: &P,
    rng: &mut ChaCha8Rng,
    p: &P::Point,
    sigma: f64,
    eta: f64,
) -> Result<P::Point> {
    let toward = space.random_point(rng, sigma);
    let d = space.dist(p, &toward)?;
    if d <= eta {
        return Ok(toward);
    }
    space.geodesic(p, &toward, eta / d)
}

fn minimizer_stability_trial<P: GeodesicSpace>(
    space: &P,
    rng: &mut ChaCha8Rng,
    sigma: f64,
    eta: f64,
    seed: u64,
) -> Result<f64> {
    let k = rng.gen_range(2..=5);
    let pts: Vec<P::Point> = (0..k).map(|_| space.random_point(rng, sigma)).collect();
    let w = vec![1.0 / k as f64; k];
    let moved = rng.gen_range(0..k);
    let mut pts2 = pts.clone();
    pts2[moved] = perturb(space, rng, &pts[moved], sigma, eta)?;
    let m1 = space.mean(&pts, &w)?;
    let m2 = space.mean(&pts2, &w)?;
    let mut probe: Vec<P::Point> = pts.iter().chain(&pts2).cloned().collect();
    probe = hull_sampler(space, &probe, 2, 10, seed)?;
    probe.push(m1.clone());
    probe.push(m2.clone());
    let mut sup = 0.0f64;
    for x in &probe {
        let diff = space.mean_function(x, &pts, &w)? - space.mean_function(x, &pts2, &w)?;
        sup = sup.max(diff.abs());
    }
    Ok(space.dist(&m1, &m2)? - 2.0 * (4.0 * sup).sqrt())
}

fn projection_continuity_trial<P: GeodesicSpace>(
    space: &P,
    rng: &mut ChaCha8Rng,
    sigma: f64,
    eta: f64,
) -> Result<f64> {
    let a = space.random_point(rng, sigma);
    let b = space.random_point(rng, sigma);
    let p = space.random_point(rng, sigma);
    let q = perturb(space, rng, &p, sigma, eta)?;
    let eta = space.dist(&p, &q)?;
    let onto_segment = |x: &P::Point| -> Result<P::Point> {
        let t = space.project(x, &a, &b)?.clamp(0.0, 1.0);
        space.geodesic(&a, &b, t)
    };
    let (pp, pq) = (onto_segment(&p)?, onto_segment(&q)?);
    let big_d = space.dist(&space.geodesic(&a, &b, 0.5)?, &p)?;
    let bound = 4.0 * (2.0 * big_d * eta + eta * eta) + 1e-9;
    Ok(space.dist_sq(&pp, &pq)? - bound)
}

/// `max d(x, y)` over hull samples, minus `diam(points)`.
pub fn hull_excess<P: GeodesicSpace>(
    space: &P,
    points: &[P::Point],
    samples: &[P::Point],
) -> Result<f64> {
    Ok(orbit_diameter(space, samples)? - orbit_diameter(space, points)?)
}

pub fn npc_inequality_check<P: GeodesicSpace>(
    space: &P,
    trials: usize,
    seed: u64,
) -> Result<PropertyReport> {
    run_trials(space, Property::NpcInequality, trials, seed)
}

/// Midpoint form with modulus `eps^2 / 4`, for `d^2(., p)`.
pub fn equiconvexity_check<P: GeodesicSpace>(
    space: &P,
    trials: usize,
    seed: u64,
) -> Result<PropertyReport> {
    run_trials(space, Property::EquiconvexityDist, trials, seed)
}

/// Midpoint form with modulus `eps^2 / 4`, for mean functions `F_S`, `|S| <= 5`.
pub fn mean_equiconvexity_check<P: GeodesicSpace>(
    space: &P,
    trials: usize,
    seed: u64,
) -> Result<PropertyReport> {
    run_trials(space, Property::EquiconvexityMean, trials, seed)
}

/// `d(argmin F, argmin G) < 2 sqrt(4 sup |F - G|)` for one point moved by
/// `eta in {1e-1, 1e-2, 1e-4}`.
pub fn minimizer_stability_check<P: GeodesicSpace>(
    space: &P,
    trials: usize,
    seed: u64,
) -> Result<PropertyReport> {
    run_trials(space, Property::MinimizerStability, trials, seed)
}

/// Projection onto a geodesic segment at `d(p, q) = eta in {1e-2, 1e-4, 1e-6}`.
pub fn projection_continuity_check<P: GeodesicSpace>(
    space: &P,
    trials: usize,
    seed: u64,
) -> Result<PropertyReport> {
    run_trials(space, Property::ProjectionContinuity, trials, seed)
}

/// Random point sets with three hull levels of 20 samples each.
pub fn hull_diameter_check<P: GeodesicSpace>(
    space: &P,
    trials: usize,
    seed: u64,
) -> Result<PropertyReport> {
    run_trials(space, Property::HullDiameter, trials, seed)
}

/// Single-shot form for caller-supplied points and hull samples.
pub fn hull_diameter_report<P: GeodesicSpace>(
    space: &P,
    points: &[P::Point],
    samples: &[P::Point],
) -> Result<PropertyReport> {
    let excess = hull_excess(space, points, samples)?;
    let tolerance = Property::HullDiameter.tolerance();
    Ok(PropertyReport {
        property: Property::HullDiameter,
        space: space.name(),
        trials: 1,
        max_violation: excess,
        tolerance,
        passed: excess <= tolerance,
        witnesses: Vec::new(),
        note: None,
    })
}
