//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use volmorph_cli::config::{ScenarioConfig, BUNDLED};
use volmorph_cli::run_scenario_into;
use volmorph_core::linalg::Mat;
use volmorph_core::npc::{self, PropertyReport};
use volmorph_core::sampling::{random_field, random_spd, rng_from_seed};
use volmorph_core::volumorphism::isometry_check;
use volmorph_core::*;

type Criterion = (&'static str, fn() -> Check);

type Check = std::result::Result<(bool, String), Box<dyn std::error::Error>>;

fn grid(side: usize) -> Arc<MeasureGrid> {
    Arc::new(MeasureGrid::uniform(&[side, side], 1.0).unwrap())
}

fn spaces_summary(reports: &[PropertyReport], bound: f64) -> (bool, String) {
    let ok = reports.iter().all(|r| r.passed && r.max_violation <= bound);
    let parts: Vec<String> = reports
        .iter()
        .map(|r| {
            format!(
                "{} {} max {:.2e}",
                r.property.name(),
                r.space,
                r.max_violation
            )
        })
        .collect();
    (ok, parts.join("; "))
}

fn npc_inequality() -> Check {
    let start = Instant::now();
    let x = FieldSpace::uniform(&[16, 16], 2)?;
    let reports = vec![
        npc::npc_inequality_check(&MatrixSpace { n: 2 }, 10_000, 1)?,
        npc::npc_inequality_check(&MatrixSpace { n: 3 }, 10_000, 1)?,
        npc::npc_inequality_check(&x, 10_000, 1)?,
    ];
    let secs = start.elapsed().as_secs_f64();
    let (ok, text) = spaces_summary(&reports, 1e-9);
    Ok((
        ok && secs <= 60.0,
        format!("{text}; {secs:.1} s (limit 60 s)"),
    ))
}

fn equiconvexity() -> Check {
    let x = FieldSpace::uniform(&[16, 16], 2)?;
    let mut reports = Vec::new();
    for n in [2, 3] {
        let s = MatrixSpace { n };
        reports.push(npc::equiconvexity_check(&s, 10_000, 2)?);
        reports.push(npc::mean_equiconvexity_check(&s, 1_000, 2)?);
    }
    reports.push(npc::equiconvexity_check(&x, 10_000, 2)?);
    reports.push(npc::mean_equiconvexity_check(&x, 1_000, 2)?);
    Ok(spaces_summary(&reports, 1e-9))
}

fn isometric_action() -> Check {
    let g = grid(16);
    let cells = g.len();
    let maps = [
        make_translation(g.clone(), 2, &[3, 5])?,
        make_translation(g.clone(), 3, &[-1, 7])?,
        VolumorphismMap::permutation(
            g.clone(),
            2,
            (0..cells).map(|j| (7 * j + 3) % cells).collect(),
        )?,
        VolumorphismMap::permutation(
            g.clone(),
            3,
            (0..cells).map(|j| (cells - 1 - j + 5) % cells).collect(),
        )?,
        make_torus_automorphism(g.clone(), [[2, 1], [1, 1]])?,
        make_torus_automorphism(g.clone(), [[0, -1], [1, 0]])?,
        make_torus_automorphism(g.clone(), [[1, 3], [0, 1]])?,
    ];
    let mut worst = 0.0f64;
    for (i, phi) in maps.iter().enumerate() {
        worst = worst.max(isometry_check(phi, 1_000, 100 * i as u64)?.max_rel);
    }
    Ok((
        worst <= 1e-10,
        format!(
            "{} maps x 1000 pairs, max |diff|/(1+delta) {worst:.2e} (bound 1e-10)",
            maps.len()
        ),
    ))
}

fn finite_order_maps(g: &Arc<MeasureGrid>) -> Vec<(VolumorphismMap, usize)> {
    let side = g.dims()[0] as i64;
    vec![
        (
            make_torus_automorphism(g.clone(), [[-1, 0], [0, -1]]).unwrap(),
            2,
        ),
        (
            make_torus_automorphism(g.clone(), [[0, -1], [1, -1]]).unwrap(),
            3,
        ),
        (
            make_torus_automorphism(g.clone(), [[0, -1], [1, 0]]).unwrap(),
            4,
        ),
        (make_translation(g.clone(), 2, &[side / 8, 0]).unwrap(), 8),
    ]
}

fn fixed_points() -> Check {
    let start = Instant::now();
    let opts = SolverOptions::default();
    let mut runs = 0;
    let mut failures = Vec::new();
    let mut worst_residual = 0.0f64;
    let mut worst_ball = f64::NEG_INFINITY;
    for side in [16, 32] {
        let g = grid(side);
        let space = FieldSpace {
            grid: g.clone(),
            n: 2,
        };
        for (phi, k) in finite_order_maps(&g) {
            assert_eq!(phi.order(16), Some(k));
            for seed in 0..3u64 {
                runs += 1;
                let p = random_field(
                    &mut rng_from_seed(1000 * side as u64 + 10 * k as u64 + seed),
                    &g,
                    2,
                    2.0,
                );
                let (h, report) = match fixed_point_solve(&p, &phi, &opts) {
                    Ok(v) => v,
                    Err(e) => {
                        failures.push(format!("{side}x{side} k={k} seed {seed}: {e}"));
                        continue;
                    }
                };
                let residual = field_dist(&pullback(&phi, &h)?, &h)?;
                let n = *report.n_values.last().unwrap();
                let pts = orbit(&p, &phi, k)?;
                let diam = orbit_diameter(&space, &pts)?;
                let mut ball = f64::NEG_INFINITY;
                for x in &pts {
                    ball = ball.max(field_dist(&h, x)? - diam);
                }
                worst_residual = worst_residual.max(residual);
                worst_ball = worst_ball.max(ball);
                if residual > 1e-8 || n > 50 * k || ball > 1e-9 {
                    failures.push(format!(
                        "{side}x{side} k={k} seed {seed}: residual {residual:e}, n {n}"
                    ));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        failures.is_empty() && secs <= 300.0,
        format!(
            "{runs} runs, {} failed{}; max residual {worst_residual:.2e}, max d(h, orbit) - diam {worst_ball:.2e}; {secs:.1} s (limit 300 s)",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    ))
}

fn mean_orbit_identity() -> Check {
    let g = grid(16);
    let mut maps = finite_order_maps(&g);
    maps.push((make_translation(g.clone(), 3, &[0, 4])?, 4));
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (i, (phi, k)) in maps.iter().enumerate() {
        let n = phi.dim();
        let p = random_field(&mut rng_from_seed(500 + i as u64), &g, n, 2.0);
        let base = field_mean(&orbit(&p, phi, *k)?, &vec![1.0 / *k as f64; *k])?;
        // the engine's own sequence, forced past convergence
        let opts = SolverOptions {
            tol: 1e-300,
            n_max: 3 * k,
            ..SolverOptions::default()
        };
        let report = mean_sequence(&p, phi, &opts)?;
        for (m, sn) in report.mean_points.iter().zip(&report.snapshot_n) {
            if sn % k == 0 {
                worst = worst.max(field_dist(m, &base)?);
                cases += 1;
            }
        }
        for j in 2..=3 {
            let pts = orbit(&p, phi, j * k)?;
            let direct = field_mean(&pts, &vec![1.0 / (j * k) as f64; j * k])?;
            worst = worst.max(field_dist(&direct, &base)?);
            cases += 1;
        }
    }
    Ok((
        worst <= 1e-8,
        format!("{cases} comparisons, max delta {worst:.2e} (bound 1e-8)"),
    ))
}

fn unbounded_orbit() -> Check {
    let g = grid(16);
    let cat = make_torus_automorphism(g.clone(), [[2, 1], [1, 1]])?;
    let p = MetricField::constant(g.clone(), SpdMatrix::identity(2));
    // d(I, B^k^T B^k) = sqrt(2) ln lambda_max, lambda_max from the integer trace
    let mut b: [[i128; 2]; 2] = [[1, 0], [0, 1]];
    let mut closed = Vec::new();
    for _ in 0..20 {
        b = [
            [2 * b[0][0] + b[0][1], b[0][0] + b[0][1]],
            [2 * b[1][0] + b[1][1], b[1][0] + b[1][1]],
        ];
        let tau = b.iter().flatten().map(|v| v * v).sum::<i128>() as f64;
        closed.push(2f64.sqrt() * ((tau + (tau * tau - 4.0).sqrt()) / 2.0).ln());
    }
    let per_step = closed[19] - closed[18];
    let expect = 2.0 * 2f64.sqrt() * ((3.0 + 5f64.sqrt()) / 2.0).ln();
    let report = mean_sequence(&p, &cat, &SolverOptions::default())?;
    let slope = report.diameter_tail_slope(10).unwrap_or(f64::NAN);
    let rel = (slope / expect - 1.0).abs();
    let oracle_rel = (per_step / expect - 1.0).abs();
    let curve_ok = report
        .orbit_diameter_curve
        .iter()
        .skip(1)
        .zip(&closed)
        .all(|(d, c)| (d - c).abs() <= 1e-9 * c);
    Ok((
        report.verdict == Verdict::DivergingOrbit && rel <= 1e-2 && oracle_rel <= 1e-9 && curve_ok,
        format!(
            "verdict {} at n = {}, tail slope {slope:.6} vs {expect:.6} (rel {rel:.1e}), curve matches integer powers: {curve_ok}",
            report.verdict,
            report.orbit_diameter_curve.len()
        ),
    ))
}

fn karcher_correctness() -> Check {
    let mut worst_mid = 0.0f64;
    for seed in 0..100u64 {
        let n = 2 + (seed % 2) as usize;
        let mut rng = rng_from_seed(seed);
        let sigma = if seed % 4 < 2 { 0.5 } else { 2.0 };
        let (g, h) = (
            random_spd(&mut rng, n, sigma),
            random_spd(&mut rng, n, sigma),
        );
        let m = karcher_mean(&[g, h], &[0.5, 0.5])?;
        let mid = if n == 2 {
            let s = g.to_mat() + h.to_mat();
            SpdMatrix::new(&s.scale(1.0 / s.det().sqrt()))?
        } else {
            geodesic(&g, &h, 0.5)?
        };
        worst_mid = worst_mid.max(dist(&m, &mid));
    }
    let mut worst_grad = 0.0f64;
    for seed in 0..300u64 {
        let n = 2 + (seed % 2) as usize;
        let mut rng = rng_from_seed(10_000 + seed);
        let k = 1 + (seed % 7) as usize;
        let pts: Vec<SpdMatrix> = (0..k).map(|_| random_spd(&mut rng, n, 2.0)).collect();
        let w: Vec<f64> = (1..=k)
            .map(|i| 2.0 * i as f64 / (k * (k + 1)) as f64)
            .collect();
        let m = karcher_mean(&pts, &w)?;
        let mut grad = TangentSym::zero(&m);
        for (p, wi) in pts.iter().zip(&w) {
            grad = grad.add(&log_map(&m, p)?.scale(*wi))?;
        }
        worst_grad = worst_grad.max(grad.norm());
    }
    let d = [[2.0, 0.5, 1.0], [0.25, 8.0, 0.5], [1.0, 1.0 / 3.0, 3.0]];
    let w = [0.5, 0.3, 0.2];
    let pts: Vec<SpdMatrix> = d
        .iter()
        .map(|x| SpdMatrix::new(&Mat::diag(x)).unwrap())
        .collect();
    let m = karcher_mean(&pts, &w)?;
    let expect: Vec<f64> = (0..3)
        .map(|i| (0..3).map(|j| w[j] * d[j][i].ln()).sum::<f64>().exp())
        .collect();
    let diag_err = m.to_mat().max_abs_diff(&Mat::diag(&expect));
    Ok((
        worst_mid <= 1e-10 && worst_grad <= 1e-10 && diag_err <= 1e-12,
        format!("midpoint {worst_mid:.1e}, first-order {worst_grad:.1e}, diagonal {diag_err:.1e}"),
    ))
}

fn geodesic_length() -> Check {
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let n = 2 + (seed % 2) as usize;
        let mut rng = rng_from_seed(20_000 + seed);
        let sigma = if seed % 4 < 2 { 0.5 } else { 2.0 };
        let (g, h) = (
            random_spd(&mut rng, n, sigma),
            random_spd(&mut rng, n, sigma),
        );
        let d = dist(&g, &h);
        let segments = 1usize << 6;
        let mut prev = g;
        let mut length = 0.0;
        for i in 1..=segments {
            let next = geodesic(&g, &h, i as f64 / segments as f64)?;
            length += dist(&prev, &next);
            prev = next;
        }
        worst = worst.max((length - d).abs() / d.max(1e-300));
    }
    Ok((
        worst <= 1e-6,
        format!("100 pairs, 64 segments, max relative error {worst:.1e}"),
    ))
}

fn stability_and_continuity() -> Check {
    let x = FieldSpace::uniform(&[16, 16], 2)?;
    let mut reports = Vec::new();
    for n in [2, 3] {
        let s = MatrixSpace { n };
        reports.push(npc::minimizer_stability_check(&s, 100, 3)?);
        reports.push(npc::projection_continuity_check(&s, 100, 3)?);
    }
    reports.push(npc::minimizer_stability_check(&x, 100, 3)?);
    reports.push(npc::projection_continuity_check(&x, 100, 3)?);
    Ok(spaces_summary(&reports, 0.0))
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir()?;
    let mut mismatches = Vec::new();
    for (name, text) in BUNDLED {
        let scenario = ScenarioConfig::parse(text).and_then(|c| c.resolve(Path::new(".")))?;
        let mut outputs = Vec::new();
        for threads in [1, 2, 8] {
            for rep in 0..2 {
                let dir = tmp.path().join(format!("{name}-{threads}-{rep}"));
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .unwrap();
                pool.install(|| run_scenario_into(&scenario, &dir))?;
                outputs.push(read_all(&dir));
            }
        }
        if outputs.iter().any(|o| *o != outputs[0]) {
            mismatches.push(name);
        }
    }
    Ok((
        mismatches.is_empty(),
        format!(
            "{} bundled scenarios x threads 1, 2, 8 x 2 runs; differing: {mismatches:?}",
            BUNDLED.len()
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("npc inequality", npc_inequality),
        ("equiconvexity", equiconvexity),
        ("isometric action", isometric_action),
        ("fixed points of bounded orbits", fixed_points),
        ("mean-orbit identity", mean_orbit_identity),
        ("unbounded orbit detection", unbounded_orbit),
        ("karcher mean", karcher_correctness),
        ("geodesic length", geodesic_length),
        (
            "minimizer stability and projection continuity",
            stability_and_continuity,
        ),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = match check() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail}",
            if ok { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
