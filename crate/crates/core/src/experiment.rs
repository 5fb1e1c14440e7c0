//! Experiment driver behind the `propagate` subcommand: solve, tabulate
//! diagnostics, write CSVs and a manifest with checksums.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::energy::{
    energy_table, equipartition_gap, huygens_report, total_energy_closed_form, Schedule,
};
use crate::error::{Error, Result};
use crate::function::TreeFunction;
use crate::io;
use crate::scalar::{QSurd, Scalar, ScalarMode};
use crate::tree::{check_q, Ball, VertexAddress};
use crate::wave::{solve, SolverMode, WaveTrajectory};

/// Which solver(s) to run; `Both` cross-checks the two.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverChoice {
    Closed,
    Recurrence,
    Both,
}

impl fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverChoice::Closed => "closed",
            SolverChoice::Recurrence => "recurrence",
            SolverChoice::Both => "both",
        })
    }
}

impl FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(SolverChoice::Both),
            other => match other.parse::<SolverMode>() {
                Ok(SolverMode::ClosedForm) => Ok(SolverChoice::Closed),
                Ok(SolverMode::Recurrence) => Ok(SolverChoice::Recurrence),
                Err(_) => Err(Error::usage(
                    "solver",
                    format!("expected closed, recurrence or both, got `{other}`"),
                )),
            },
        }
    }
}

/// Initial data `(f, g)`.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialSpec {
    /// `f = δ_0`, `g = 0`.
    DeltaF,
    /// `f = 0`, `g = δ_0`.
    DeltaG,
    /// Seeded small integers on `B(0, radius)`, for both `f` and `g`.
    Random { radius: u32 },
    /// `{"q": 2, "f": {"entries": [...]}, "g": {"entries": [...]}}`; `q`, `f`, `g` optional.
    Explicit(Value),
}

impl InitialSpec {
    /// Accepts `delta-f`, `delta-g`, `random`, `random:R`, inline JSON, or a path to a JSON file.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "delta-f" | "delta" => return Ok(InitialSpec::DeltaF),
            "delta-g" => return Ok(InitialSpec::DeltaG),
            "random" => return Ok(InitialSpec::Random { radius: 2 }),
            _ => {}
        }
        if let Some(r) = s.strip_prefix("random:") {
            let radius = r
                .parse()
                .map_err(|_| Error::usage("initial", format!("bad radius in `{s}`")))?;
            return Ok(InitialSpec::Random { radius });
        }
        let text = if s.starts_with('{') {
            s.to_string()
        } else {
            fs::read_to_string(s)
                .map_err(|e| Error::usage("initial", format!("cannot read `{s}`: {e}")))?
        };
        Ok(InitialSpec::Explicit(serde_json::from_str(&text)?))
    }

    pub fn to_json(&self) -> Value {
        match self {
            InitialSpec::DeltaF => json!("delta-f"),
            InitialSpec::DeltaG => json!("delta-g"),
            InitialSpec::Random { radius } => json!(format!("random:{radius}")),
            InitialSpec::Explicit(v) => v.clone(),
        }
    }

    pub fn build<S: Scalar>(
        &self,
        q: u32,
        seed: u64,
    ) -> Result<(TreeFunction<S>, TreeFunction<S>)> {
        let delta = || TreeFunction::delta(q, &VertexAddress::origin());
        match self {
            InitialSpec::DeltaF => Ok((delta()?, TreeFunction::zero(q))),
            InitialSpec::DeltaG => Ok((TreeFunction::zero(q), delta()?)),
            InitialSpec::Random { radius } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let f = TreeFunction::random_integer(q, *radius, 3, &mut rng)?;
                let g = TreeFunction::random_integer(q, *radius, 3, &mut rng)?;
                Ok((f, g))
            }
            InitialSpec::Explicit(v) => {
                let obj = v
                    .as_object()
                    .ok_or_else(|| Error::usage("initial", "initial data must be a JSON object"))?;
                if let Some(given) = obj.get("q") {
                    if given.as_u64() != Some(q as u64) {
                        return Err(Error::usage(
                            "q",
                            format!("initial data has q = {given}, run uses q = {q}"),
                        ));
                    }
                }
                let part = |key: &str| match obj.get(key) {
                    Some(f) => io::tree_function_from_json(f, Some(q)),
                    None => Ok(TreeFunction::zero(q)),
                };
                Ok((part("f")?, part("g")?))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub q: u32,
    pub steps: u32,
    pub mode: ScalarMode,
    pub solver: SolverChoice,
    pub initial: InitialSpec,
    /// Truncation radius; defaults to `steps + data radius + 2`.
    pub radius: Option<u32>,
    pub schedule: Schedule,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            q: 2,
            steps: 8,
            mode: ScalarMode::Exact,
            solver: SolverChoice::Both,
            initial: InitialSpec::DeltaF,
            radius: None,
            schedule: Schedule::Sqrt,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        check_q(self.q).map_err(|_| Error::usage("q", format!("need q ≥ 2, got {}", self.q)))?;
        if self.steps == 0 {
            return Err(Error::usage("steps", "need at least one time step"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "q": self.q,
            "steps": self.steps,
            "mode": self.mode.to_string(),
            "solver": self.solver.to_string(),
            "initial": self.initial.to_json(),
            "radius": self.radius,
            "schedule": self.schedule.to_string(),
            "seed": self.seed,
        })
    }
}

/// Initial data and a solved trajectory for `config`.
pub fn prepare<S: Scalar>(
    config: &ExperimentConfig,
    solver: SolverMode,
) -> Result<WaveTrajectory<S>> {
    config.validate()?;
    let (f, g) = config.initial.build::<S>(config.q, config.seed)?;
    let data = f
        .support_radius()
        .unwrap_or(0)
        .max(g.support_radius().unwrap_or(0));
    let radius = config.radius.unwrap_or(config.steps + data + 2);
    let ball = Ball::new(config.q, radius)?;
    let steps = config.steps as i64;
    solve(&f, &g, -steps..=steps, solver, &ball)
}

fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

/// Writes `snapshots/u_<n>.csv`, `energy.csv`, `equipartition.csv`,
/// `huygens.csv` and `manifest.json` under `out`, and returns the manifest.
///
/// Everything except `wall_time_seconds` is byte-stable for a fixed config.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<Value> {
    config.validate()?;
    match config.mode {
        ScalarMode::Exact => run_typed::<QSurd>(config, out),
        ScalarMode::Float64 => run_typed::<f64>(config, out),
    }
}

fn run_typed<S: Scalar>(config: &ExperimentConfig, out: &Path) -> Result<Value> {
    let start = Instant::now();
    let primary_mode = match config.solver {
        SolverChoice::Recurrence => SolverMode::Recurrence,
        _ => SolverMode::ClosedForm,
    };
    let u = prepare::<S>(config, primary_mode)?;
    let agreement = match config.solver {
        SolverChoice::Both => {
            let v = prepare::<S>(config, SolverMode::Recurrence)?;
            Some(agreement(&u, &v)?)
        }
        _ => None,
    };

    fs::create_dir_all(out.join("snapshots"))?;
    let mut files: Vec<PathBuf> = Vec::new();
    for (n, un) in u.snapshots() {
        let path = out.join("snapshots").join(format!("u_{n}.csv"));
        io::write_snapshot_csv(un, fs::File::create(&path)?)?;
        files.push(path);
    }

    let energy = energy_table(&u)?;
    let closed = total_energy_closed_form(u.f(), u.g())?;
    let conserved = match S::MODE {
        ScalarMode::Exact => energy.iter().all(|r| r.total == closed),
        ScalarMode::Float64 => {
            let scale = closed.abs_f64().max(f64::MIN_POSITIVE);
            energy
                .iter()
                .all(|r| (r.total.clone() - &closed).abs_f64() <= 1e-10 * scale)
        }
    };
    let path = out.join("energy.csv");
    io::write_energy_csv(&energy, fs::File::create(&path)?)?;
    files.push(path);

    let interior: Vec<i64> = energy.iter().map(|r| r.n).collect();
    let gaps = interior
        .iter()
        .map(|&n| equipartition_gap(&u, n))
        .collect::<Result<Vec<_>>>()?;
    let path = out.join("equipartition.csv");
    io::write_gap_csv(&gaps, fs::File::create(&path)?)?;
    files.push(path);

    let huygens = interior
        .iter()
        .map(|&n| huygens_report(&u, n, config.schedule.margin(n)))
        .collect::<Result<Vec<_>>>()?;
    let path = out.join("huygens.csv");
    io::write_huygens_csv(&huygens, fs::File::create(&path)?)?;
    files.push(path);

    let mut checksums = serde_json::Map::new();
    for path in &files {
        let rel = path
            .strip_prefix(out)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/");
        checksums.insert(rel, Value::String(sha256_file(path)?));
    }
    let range = u.range();
    let manifest = json!({
        "config": config.to_json(),
        "mode": S::MODE.to_string(),
        "solver": u.solver().to_string(),
        "truncation_radius": u.ball().radius(),
        "data_radius": u.data_radius(),
        "snapshot_count": u.snapshots().count(),
        "snapshot_range": [range.start(), range.end()],
        "agreement": agreement,
        "total_energy": closed.to_json(),
        "energy_conserved": conserved,
        "checksums": checksums,
        "wall_time_seconds": start.elapsed().as_secs_f64(),
    });
    fs::write(
        out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(manifest)
}

/// `"exact"` or `"mismatch"` in exact mode; the largest deviation in float mode.
pub fn agreement<S: Scalar>(a: &WaveTrajectory<S>, b: &WaveTrajectory<S>) -> Result<Value> {
    match S::MODE {
        ScalarMode::Exact => Ok(json!(if a == b { "exact" } else { "mismatch" })),
        ScalarMode::Float64 => {
            let mut worst: f64 = 0.0;
            for (n, un) in a.snapshots() {
                worst = worst.max(un.try_sub(b.snapshot(n)?)?.sup_norm());
            }
            Ok(json!({ "max_abs_difference": worst }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_run_writes_everything() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = run_experiment(&ExperimentConfig::default(), dir.path()).unwrap();
        assert_eq!(manifest["snapshot_count"], 17);
        assert_eq!(manifest["agreement"], "exact");
        assert_eq!(manifest["energy_conserved"], true);
        let energy = fs::read_to_string(dir.path().join("energy.csv")).unwrap();
        let mut lines = energy.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let e = header.iter().position(|c| *c == "E_a").unwrap();
        for line in lines {
            assert_eq!(line.split(',').nth(e), Some("5/16"));
        }
        assert!(dir.path().join("snapshots/u_-8.csv").exists());
        assert_eq!(manifest["checksums"].as_object().unwrap().len(), 17 + 3);
    }

    #[test]
    fn outputs_are_byte_stable() {
        let config = ExperimentConfig {
            q: 3,
            steps: 4,
            initial: InitialSpec::Random { radius: 1 },
            seed: 42,
            ..ExperimentConfig::default()
        };
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ma = run_experiment(&config, a.path()).unwrap();
        let mb = run_experiment(&config, b.path()).unwrap();
        assert_eq!(ma["checksums"], mb["checksums"]);
    }

    #[test]
    fn small_radius_is_a_truncation_error() {
        let config = ExperimentConfig {
            radius: Some(5),
            ..ExperimentConfig::default()
        };
        let err = run_experiment(&config, tempfile::tempdir().unwrap().path()).unwrap_err();
        assert!(
            matches!(&err, Error::Truncation(m) if m.contains("n = -8")),
            "{err}"
        );
    }

    #[test]
    fn invalid_config_names_the_field() {
        let dir = tempfile::tempdir().unwrap();
        for (config, name) in [
            (
                ExperimentConfig {
                    q: 1,
                    ..Default::default()
                },
                "q",
            ),
            (
                ExperimentConfig {
                    steps: 0,
                    ..Default::default()
                },
                "steps",
            ),
        ] {
            match run_experiment(&config, dir.path()) {
                Err(Error::Usage { field, .. }) => assert_eq!(field, name),
                other => panic!("expected usage error, got {other:?}"),
            }
        }
    }

    #[test]
    fn float_mode_reports_deviation() {
        let config = ExperimentConfig {
            mode: ScalarMode::Float64,
            q: 3,
            steps: 6,
            ..Default::default()
        };
        let manifest = run_experiment(&config, tempfile::tempdir().unwrap().path()).unwrap();
        assert!(
            manifest["agreement"]["max_abs_difference"]
                .as_f64()
                .unwrap()
                < 1e-12
        );
        assert_eq!(manifest["energy_conserved"], true);
    }

    #[test]
    fn initial_spec_parsing() {
        assert_eq!(InitialSpec::parse("delta-g").unwrap(), InitialSpec::DeltaG);
        assert_eq!(
            InitialSpec::parse("random:3").unwrap(),
            InitialSpec::Random { radius: 3 }
        );
        let spec =
            InitialSpec::parse(r#"{"f":{"entries":[{"vertex":"","value":{"a":"2"}}]}}"#).unwrap();
        let (f, g) = spec.build::<QSurd>(2, 0).unwrap();
        assert_eq!(f.get(&VertexAddress::origin()), QSurd::from_i64(2, 2));
        assert!(g.is_zero());
        let wrong_q = InitialSpec::parse(r#"{"q":3}"#).unwrap();
        assert!(matches!(
            wrong_q.build::<QSurd>(2, 0),
            Err(Error::Usage { .. })
        ));
        assert!(InitialSpec::parse("/no/such/file.json").is_err());
    }
}
