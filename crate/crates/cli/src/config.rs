//! Scenario files.
//!
//! A scenario is one TOML document:
//!
//! ```toml
//! schema_version = 1
//! name = "rot4-random16"
//!
//! [grid]
//! n = 2                  # matrix size, 2 or 3
//! dims = [16, 16]        # one or two axes, periodic
//! volume = 1.0           # uniform cell weights summing to this (default 1)
//! # weights = [...]      # or explicit row-major weights
//!
//! [map]
//! kind = "automorphism"  # identity | translation | automorphism | permutation
//! matrix = [[0, -1], [1, 0]]
//! # shift = [1, 0]       # translation
//! # cells = [...]        # permutation: cell j is sent to cells[j]
//!
//! [initial]
//! kind = "random"        # constant | random | file
//! seed = 7
//! sigma = 2.0
//! # value = [g00, g01, g11]   # constant, packed upper triangle (default identity)
//! # path = "start.field"      # file, relative to the scenario file
//!
//! [solver]               # optional; every key has a default
//! n_max = 400
//! tol = 1e-8
//!
//! [output]               # optional
//! dir = "volmorph-out/rot4-random16"
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use volmorph_core::sampling::{random_field, rng_from_seed};
use volmorph_core::{
    load_field, make_torus_automorphism, make_translation, MeasureGrid, MetricField, SolverOptions,
    SpdMatrix, VolumorphismMap,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Overrides `[output] dir` when set.
pub const OUT_DIR_ENV: &str = "VOLMORPH_OUT_DIR";

pub const BUNDLED: [(&str, &str); 3] = [
    ("identity", include_str!("../scenarios/identity.toml")),
    (
        "rot4-random16",
        include_str!("../scenarios/rot4-random16.toml"),
    ),
    (
        "catmap-unbounded",
        include_str!("../scenarios/catmap-unbounded.toml"),
    ),
];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    pub grid: GridSpec,
    pub map: MapSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub dims: Vec<usize>,
    pub volume: Option<f64>,
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapSpec {
    Identity,
    Translation { shift: Vec<i64> },
    Automorphism { matrix: [[i64; 2]; 2] },
    Permutation { cells: Vec<usize> },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    Constant { value: Option<Vec<f64>> },
    Random { seed: u64, sigma: f64 },
    File { path: PathBuf },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
}

/// A scenario with every input built and checked.
#[derive(Debug)]
pub struct Scenario {
    pub name: String,
    pub grid: Arc<MeasureGrid>,
    pub map: VolumorphismMap,
    pub initial: MetricField,
    pub solver: SolverOptions,
    pub out_dir: PathBuf,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("scenario: {e}")))
    }

    /// Builds the grid, map and initial field. Relative file paths resolve
    /// against `base`.
    pub fn resolve(self, base: &Path) -> Result<Scenario, ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return err(format!(
                "schema_version: expected {SCHEMA_VERSION}, found {}",
                self.schema_version
            ));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return err("name: must be non-empty and contain no path separators");
        }
        let g = &self.grid;
        if g.n != 2 && g.n != 3 {
            return err(format!("grid.n: must be 2 or 3, found {}", g.n));
        }
        let grid = match (&g.weights, g.volume) {
            (Some(_), Some(_)) => return err("grid: give either volume or weights, not both"),
            (Some(w), None) => MeasureGrid::with_weights(&g.dims, w.clone()),
            (None, v) => MeasureGrid::uniform(&g.dims, v.unwrap_or(1.0)),
        }
        .map_err(|e| ConfigError(format!("grid: {e}")))?;
        let grid = Arc::new(grid);
        let n = g.n;
        let map = match &self.map {
            MapSpec::Identity => VolumorphismMap::identity(grid.clone(), n),
            MapSpec::Translation { shift } => make_translation(grid.clone(), n, shift),
            MapSpec::Automorphism { matrix } => {
                if n != 2 {
                    return err("map: automorphisms act on 2x2 metrics, set grid.n = 2");
                }
                make_torus_automorphism(grid.clone(), *matrix)
            }
            MapSpec::Permutation { cells } => {
                VolumorphismMap::permutation(grid.clone(), n, cells.clone())
            }
        }
        .map_err(|e| ConfigError(format!("map: {e}")))?;
        let initial = match &self.initial {
            InitialSpec::Constant { value } => {
                let v = match value {
                    None => SpdMatrix::identity(n),
                    Some(upper) => SpdMatrix::from_upper(n, upper)
                        .map_err(|e| ConfigError(format!("initial.value: {e}")))?,
                };
                MetricField::constant(grid.clone(), v)
            }
            InitialSpec::Random { seed, sigma } => {
                if !(sigma.is_finite() && *sigma >= 0.0) {
                    return err("initial.sigma: must be finite and nonnegative");
                }
                random_field(&mut rng_from_seed(*seed), &grid, n, *sigma)
            }
            InitialSpec::File { path } => {
                let path = base.join(path);
                let f = load_field(&path)
                    .map_err(|e| ConfigError(format!("initial.path {}: {e}", path.display())))?;
                if **f.grid() != *grid || f.dim() != n {
                    return err(format!(
                        "initial.path {}: field does not match [grid]",
                        path.display()
                    ));
                }
                MetricField::new(grid.clone(), f.values().to_vec()).expect("sizes match")
            }
        };
        self.solver
            .validate()
            .map_err(|e| ConfigError(format!("solver: {e}")))?;
        let out_dir = match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) => PathBuf::from(dir),
            None => self
                .output
                .dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("volmorph-out").join(&self.name)),
        };
        Ok(Scenario {
            name: self.name,
            grid,
            map,
            initial,
            solver: self.solver,
            out_dir,
        })
    }
}

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

/// Loads a scenario from a file path, or by bundled name when no such file exists.
pub fn load_scenario(spec: &str) -> Result<Scenario, ConfigError> {
    let path = Path::new(spec);
    if path.is_file() {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{spec}: {e}")))?;
        let base = path.parent().unwrap_or(Path::new("."));
        return ScenarioConfig::parse(&text)
            .map_err(|e| ConfigError(format!("{spec}: {e}")))?
            .resolve(base);
    }
    match bundled(spec) {
        Some(text) => ScenarioConfig::parse(text)?.resolve(Path::new(".")),
        None => {
            let names: Vec<&str> = BUNDLED.iter().map(|(n, _)| *n).collect();
            err(format!(
                "{spec}: no such file and not a bundled scenario ({})",
                names.join(", ")
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
name = "t"
[grid]
n = 2
dims = [4, 4]
[map]
kind = "translation"
shift = [1, 0]
[initial]
kind = "constant"
"#;

    #[test]
    fn minimal_config_resolves_with_defaults() {
        let s = ScenarioConfig::parse(MINIMAL)
            .unwrap()
            .resolve(Path::new("."))
            .unwrap();
        assert_eq!(s.grid.len(), 16);
        assert_eq!(s.solver, SolverOptions::default());
        assert_eq!(s.initial.value(3), &SpdMatrix::identity(2));
    }

    #[test]
    fn bundled_scenarios_resolve() {
        for (name, text) in BUNDLED {
            let s = ScenarioConfig::parse(text)
                .unwrap()
                .resolve(Path::new("."))
                .unwrap();
            assert_eq!(s.name, name);
        }
    }

    #[test]
    fn unknown_keys_report_their_line() {
        let text = MINIMAL.replace("dims = [4, 4]", "dims = [4, 4]\nsize = 3");
        let e = ScenarioConfig::parse(&text).unwrap_err().0;
        assert!(e.contains("line 7"), "{e}");
        assert!(e.contains("size"), "{e}");
    }

    #[test]
    fn bad_values_name_their_field() {
        let cases = [
            (MINIMAL.replace("n = 2", "n = 4"), "grid.n"),
            (
                MINIMAL.replace("schema_version = 1", "schema_version = 2"),
                "schema_version",
            ),
            (MINIMAL.replace("shift = [1, 0]", "shift = [1]"), "map"),
            (
                MINIMAL.replace(
                    "kind = \"translation\"\nshift = [1, 0]",
                    "kind = \"automorphism\"\nmatrix = [[1, 1], [1, 1]]",
                ),
                "map",
            ),
            (
                MINIMAL.replace(
                    "kind = \"constant\"",
                    "kind = \"constant\"\nvalue = [1.0, 2.0, 1.0]",
                ),
                "initial.value",
            ),
            (format!("{MINIMAL}[solver]\nn_max = 0\n"), "solver"),
        ];
        for (text, field) in cases {
            let e = ScenarioConfig::parse(&text)
                .and_then(|c| c.resolve(Path::new(".")))
                .unwrap_err()
                .0;
            assert!(e.contains(field), "{field}: {e}");
        }
    }

    #[test]
    fn unknown_scenario_lists_bundled_names() {
        let e = load_scenario("no-such-scenario").unwrap_err().0;
        assert!(e.contains("rot4-random16"));
    }
}
