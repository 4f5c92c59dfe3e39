use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use volmorph_core::npc::{self, PropertyReport};
use volmorph_core::{
    mean_sequence, orbit, save_field, FieldSpace, GeodesicSpace, MatrixSpace, MeanRunReport,
    Verdict,
};

use crate::config::{Scenario, OUT_DIR_ENV};

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Failure = 1,
    Config = 2,
    DivergingOrbit = 3,
    MaxIterations = 4,
    PropertyFailure = 5,
}

impl From<Verdict> for Exit {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Converged => Exit::Ok,
            Verdict::DivergingOrbit => Exit::DivergingOrbit,
            Verdict::MaxIterations => Exit::MaxIterations,
        }
    }
}

#[derive(Debug)]
pub enum RunError {
    Io(io::Error),
    Numeric(volmorph_core::Error),
    Usage(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Io(e) => write!(f, "i/o: {e}"),
            RunError::Numeric(e) => write!(f, "{e}"),
            RunError::Usage(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for RunError {}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<volmorph_core::Error> for RunError {
    fn from(e: volmorph_core::Error) -> Self {
        match e {
            volmorph_core::Error::Io(e) => RunError::Io(e),
            e => RunError::Numeric(e),
        }
    }
}

impl RunError {
    pub fn exit(&self) -> Exit {
        match self {
            RunError::Usage(_) => Exit::Config,
            _ => Exit::Failure,
        }
    }
}

pub const REPORT_FILE: &str = "report.json";
pub const RESIDUALS_FILE: &str = "residuals.csv";
pub const DIAMETER_FILE: &str = "diameter.csv";
pub const FIELD_FILE: &str = "invariant_metric.field";

#[derive(Serialize)]
struct ScenarioReport<'a> {
    schema_version: u32,
    scenario: &'a str,
    n: usize,
    dims: &'a [usize],
    total_volume: f64,
    run: &'a MeanRunReport,
}

pub struct Outcome {
    pub report: MeanRunReport,
    pub out_dir: PathBuf,
    pub exit: Exit,
}

/// Runs the mean sequence and writes `report.json`, `residuals.csv`,
/// `diameter.csv` and, when converged, `invariant_metric.field`.
pub fn run_scenario(s: &Scenario) -> Result<Outcome, RunError> {
    run_scenario_into(s, &s.out_dir)
}

pub fn run_scenario_into(s: &Scenario, out_dir: &Path) -> Result<Outcome, RunError> {
    let report = mean_sequence(&s.initial, &s.map, &s.solver)?;
    fs::create_dir_all(out_dir)?;
    let doc = ScenarioReport {
        schema_version: crate::config::SCHEMA_VERSION,
        scenario: &s.name,
        n: s.initial.dim(),
        dims: s.grid.dims(),
        total_volume: s.grid.total_volume(),
        run: &report,
    };
    let mut json = serde_json::to_string_pretty(&doc).expect("report serializes");
    json.push('\n');
    fs::write(out_dir.join(REPORT_FILE), json)?;
    fs::write(out_dir.join(RESIDUALS_FILE), residuals_csv(&report))?;
    fs::write(
        out_dir.join(DIAMETER_FILE),
        diameter_csv(&report.orbit_diameter_curve),
    )?;
    let field_path = out_dir.join(FIELD_FILE);
    if report.verdict == Verdict::Converged {
        save_field(
            &field_path,
            report
                .mean_points
                .last()
                .expect("converged run keeps its mean"),
        )?;
    } else if field_path.exists() {
        // a stale metric from an earlier run must not pass for this run's result
        fs::remove_file(&field_path)?;
    }
    Ok(Outcome {
        exit: report.verdict.into(),
        report,
        out_dir: out_dir.to_path_buf(),
    })
}

/// Columns `n,residual,drift,diameter`; drift is empty on the last row.
pub fn residuals_csv(r: &MeanRunReport) -> String {
    let mut out = String::from("n,residual,drift,diameter\n");
    for (i, (n, res)) in r.n_values.iter().zip(&r.residuals).enumerate() {
        let drift = r
            .mean_drift
            .get(i)
            .map(|d| d.to_string())
            .unwrap_or_default();
        let diam = r
            .orbit_diameter_curve
            .get(n - 1)
            .map(|d| d.to_string())
            .unwrap_or_default();
        writeln!(out, "{n},{res},{drift},{diam}").expect("string write");
    }
    out
}

/// Columns `n,diameter`: diameter of the first `n` iterates.
pub fn diameter_csv(curve: &[f64]) -> String {
    let mut out = String::from("n,diameter\n");
    for (i, d) in curve.iter().enumerate() {
        writeln!(out, "{},{d}", i + 1).expect("string write");
    }
    out
}

/// Columns `k,dist_from_start,diameter` for the first `count` iterates.
pub fn run_orbit(s: &Scenario, count: usize) -> Result<String, RunError> {
    if count == 0 {
        return Err(RunError::Usage("--n must be at least 1".into()));
    }
    let pts = orbit(&s.initial, &s.map, count)?;
    let mut out = String::from("k,dist_from_start,diameter\n");
    let mut diam = 0.0f64;
    for (k, x) in pts.iter().enumerate() {
        let d = volmorph_core::field_dist(&s.initial, x)?;
        diam = diam.max(d);
        writeln!(out, "{k},{d},{diam}").expect("string write");
    }
    Ok(out)
}

pub const SUITES: [&str; 6] = [
    "npc",
    "equiconvexity",
    "minimizer",
    "projection",
    "hull",
    "all",
];

/// Grid of the field space used by the suites.
pub const SUITE_GRID: [usize; 2] = [16, 16];

fn default_trials(suite: &str) -> usize {
    match suite {
        "npc" | "equiconvexity" => 10_000,
        _ => 100,
    }
}

fn suite_on<P: GeodesicSpace>(
    space: &P,
    suite: &str,
    trials: Option<usize>,
    seed: u64,
) -> Result<Vec<PropertyReport>, RunError> {
    let t = |s: &str| trials.unwrap_or_else(|| default_trials(s));
    let mut out = Vec::new();
    let all = suite == "all";
    if all || suite == "npc" {
        out.push(npc::npc_inequality_check(space, t("npc"), seed)?);
    }
    if all || suite == "equiconvexity" {
        let n = t("equiconvexity");
        out.push(npc::equiconvexity_check(space, n, seed)?);
        out.push(npc::mean_equiconvexity_check(space, (n / 10).max(1), seed)?);
    }
    if all || suite == "minimizer" {
        out.push(npc::minimizer_stability_check(space, t("minimizer"), seed)?);
    }
    if all || suite == "projection" {
        out.push(npc::projection_continuity_check(
            space,
            t("projection"),
            seed,
        )?);
    }
    if all || suite == "hull" {
        out.push(npc::hull_diameter_check(space, t("hull"), seed)?);
    }
    Ok(out)
}

pub struct PropertiesOutcome {
    pub reports: Vec<PropertyReport>,
    pub path: PathBuf,
    pub exit: Exit,
}

/// Runs a suite on `S` (n = 2, 3) and on the 16x16 field space, then writes
/// `properties-<suite>.json` to `out_dir`.
pub fn run_properties(
    suite: &str,
    seed: u64,
    trials: Option<usize>,
    out_dir: &Path,
) -> Result<PropertiesOutcome, RunError> {
    if !SUITES.contains(&suite) {
        return Err(RunError::Usage(format!(
            "unknown suite {suite:?}; expected one of {}",
            SUITES.join(", ")
        )));
    }
    if trials == Some(0) {
        return Err(RunError::Usage("--trials must be at least 1".into()));
    }
    let mut reports = Vec::new();
    for n in [2, 3] {
        reports.extend(suite_on(&MatrixSpace { n }, suite, trials, seed)?);
    }
    let x = FieldSpace::uniform(&SUITE_GRID, 2)?;
    reports.extend(suite_on(&x, suite, trials, seed)?);
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("properties-{suite}.json"));
    let mut json = serde_json::to_string_pretty(&reports).expect("reports serialize");
    json.push('\n');
    fs::write(&path, json)?;
    let exit = if reports.iter().all(|r| r.passed) {
        Exit::Ok
    } else {
        Exit::PropertyFailure
    };
    Ok(PropertiesOutcome {
        reports,
        path,
        exit,
    })
}

pub fn properties_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("volmorph-out"))
}
