use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use treewave::energy::{energy_table, equipartition_gap, huygens_report, Schedule};
use treewave::experiment::{prepare, run_experiment, ExperimentConfig, InitialSpec, SolverChoice};
use treewave::io;
use treewave::transforms::{
    abel, abel_inverse, dual_abel_inverse, dual_abel_profile, spherical_transform, Method,
};
use treewave::verify::{verify_suite, VerifyConfig};
use treewave::wave::SolverMode;
use treewave::{Ball, Error, QSurd, RadialProfile, Result, Scalar, ScalarMode};

/// Shifted wave equation on homogeneous trees: propagation, energies, transforms.
#[derive(Parser)]
#[command(name = "treewave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and write snapshot, energy and Huygens CSVs plus a manifest.
    Propagate(RunArgs),
    /// Kinetic, potential and total energy per time step.
    Energy(RunArgs),
    /// K(n) − P(n) by direct sums and by the operator identities.
    Equipartition(RunArgs),
    /// Interior sums inside the shell |x| < |n| − N_n.
    Huygens(RunArgs),
    /// Abel, dual Abel and spherical transforms of a radial profile.
    Transforms(RunArgs),
    /// Run the seeded property suite; exits nonzero on any failure.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 2)]
    q: u32,
    #[arg(long, default_value_t = 8)]
    steps: u32,
    /// exact | float
    #[arg(long, default_value = "exact")]
    mode: String,
    /// closed | recurrence | both
    #[arg(long, default_value = "both")]
    solver: String,
    /// delta-f | delta-g | random[:R] | inline JSON | path to JSON
    #[arg(long, default_value = "delta-f")]
    initial: String,
    /// Huygens shell width N_n: `sqrt` or a constant
    #[arg(long, default_value = "sqrt")]
    schedule: String,
    /// Truncation radius; defaults to steps + data radius + 2
    #[arg(long)]
    radius: Option<u32>,
    #[arg(long, env = "TREEWAVE_OUT", default_value = "treewave-out")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated branching numbers
    #[arg(long, value_delimiter = ',', default_values_t = [2u32, 3])]
    q: Vec<u32>,
    #[arg(long, default_value_t = 8)]
    steps: u32,
    /// Radius of the random initial data
    #[arg(long, default_value_t = 2)]
    radius: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the report to this directory
    #[arg(long, env = "TREEWAVE_OUT")]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        Ok(ExperimentConfig {
            q: self.q,
            steps: self.steps,
            mode: self.mode.parse()?,
            solver: self.solver.parse()?,
            initial: InitialSpec::parse(&self.initial)?,
            radius: self.radius,
            schedule: self
                .schedule
                .parse::<Schedule>()
                .map_err(|e| Error::Usage {
                    field: "schedule".into(),
                    message: e.to_string(),
                })?,
            seed: self.seed,
        })
    }
}

fn single_solver(config: &ExperimentConfig) -> SolverMode {
    match config.solver {
        SolverChoice::Recurrence => SolverMode::Recurrence,
        _ => SolverMode::ClosedForm,
    }
}

fn create(dir: &Path, name: &str) -> Result<fs::File> {
    fs::create_dir_all(dir)?;
    Ok(fs::File::create(dir.join(name))?)
}

fn energy<S: Scalar>(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let u = prepare::<S>(config, single_solver(config))?;
    let rows = energy_table(&u)?;
    io::write_energy_csv(&rows, create(out, "energy.csv")?)?;
    for r in &rows {
        println!(
            "n={:>4}  K={}  P={}  E={}",
            r.n, r.kinetic, r.potential, r.total
        );
    }
    Ok(())
}

fn equipartition<S: Scalar>(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let u = prepare::<S>(config, single_solver(config))?;
    let r = u.range();
    let rows = (r.start() + 1..*r.end())
        .map(|n| equipartition_gap(&u, n))
        .collect::<Result<Vec<_>>>()?;
    io::write_gap_csv(&rows, create(out, "equipartition.csv")?)?;
    for g in &rows {
        let agree = if g.routes_agree() { "agree" } else { "DIFFER" };
        println!(
            "n={:>4}  K-P={}  operator route {agree}  bound={:.3e}",
            g.n, g.direct, g.bound
        );
    }
    Ok(())
}

fn huygens<S: Scalar>(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let u = prepare::<S>(config, single_solver(config))?;
    let r = u.range();
    let rows = (r.start() + 1..*r.end())
        .map(|n| huygens_report(&u, n, config.schedule.margin(n)))
        .collect::<Result<Vec<_>>>()?;
    io::write_huygens_csv(&rows, create(out, "huygens.csv")?)?;
    for h in &rows {
        println!(
            "n={:>4}  N={}  mass={}  gradient={}  kinetic={}",
            h.n, h.margin, h.interior_mass, h.interior_gradient, h.interior_kinetic
        );
    }
    Ok(())
}

/// A radial profile: `delta`, `random`, inline JSON or a JSON file.
fn profile<S: Scalar>(spec: &str, q: u32, top: u32, seed: u64) -> Result<RadialProfile<S>> {
    match spec {
        "delta" | "delta-f" => Ok(RadialProfile::from_pairs(q, [(0, S::one(q))])),
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(RadialProfile::from_pairs(
                q,
                (0..=top).map(|n| (n, S::from_i64(rng.gen_range(-3..=3), q))),
            ))
        }
        s => {
            let text = if s.trim_start().starts_with('{') {
                s.to_string()
            } else {
                fs::read_to_string(s)?
            };
            io::profile_from_json(&serde_json::from_str(&text)?, Some(q))
        }
    }
}

fn transforms<S: Scalar>(args: &RunArgs, out: &Path) -> Result<()> {
    let q = args.q;
    let p = profile::<S>(&args.initial, q, args.steps, args.seed)?;
    let top = p.max_key().unwrap_or(0).max(args.steps);
    let ball = Ball::new(q, top)?;
    let a = abel(&p, Method::Closed, &ball)?;
    io::write_sequence_csv(
        "h",
        a.iter().map(|(h, v)| (*h, v.clone())),
        create(out, "abel.csv")?,
    )?;
    let back = abel_inverse(&a)?;
    io::write_sequence_csv(
        "n",
        back.iter().map(|(n, v)| (*n, v.clone())),
        create(out, "abel_inverse.csv")?,
    )?;
    let dual = dual_abel_profile(&a, top, Method::Closed, &ball)?;
    io::write_sequence_csv(
        "n",
        dual.iter().map(|(n, v)| (*n, v.clone())),
        create(out, "dual_abel.csv")?,
    )?;
    let inv = dual_abel_inverse(&p, top);
    io::write_sequence_csv(
        "h",
        inv.iter().map(|(h, v)| (*h, v.clone())),
        create(out, "dual_abel_inverse.csv")?,
    )?;

    let pf = p.to_float();
    let tau = 2.0 * std::f64::consts::PI / (q as f64).ln();
    let mut w = create(out, "spherical_transform.csv")?;
    use std::io::Write;
    writeln!(w, "lambda,re,im")?;
    for i in 0..100 {
        let lambda = tau / 2.0 * i as f64 / 99.0;
        let z = spherical_transform(&pf, lambda)?;
        writeln!(w, "{lambda},{},{}", z.re, z.im)?;
    }
    println!(
        "A p: {} nonzero heights; A^-1 A p = p: {}",
        a.iter().count(),
        back == p
    );
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Propagate(args) => {
            let config = args.config()?;
            let manifest = run_experiment(&config, &args.out)?;
            println!("{}", serde_json::to_string_pretty(&manifest)?);
            Ok(manifest["agreement"] != "mismatch" && manifest["energy_conserved"] == true)
        }
        Command::Energy(args) => {
            let config = args.config()?;
            match config.mode {
                ScalarMode::Exact => energy::<QSurd>(&config, &args.out)?,
                ScalarMode::Float64 => energy::<f64>(&config, &args.out)?,
            }
            Ok(true)
        }
        Command::Equipartition(args) => {
            let config = args.config()?;
            match config.mode {
                ScalarMode::Exact => equipartition::<QSurd>(&config, &args.out)?,
                ScalarMode::Float64 => equipartition::<f64>(&config, &args.out)?,
            }
            Ok(true)
        }
        Command::Huygens(args) => {
            let config = args.config()?;
            match config.mode {
                ScalarMode::Exact => huygens::<QSurd>(&config, &args.out)?,
                ScalarMode::Float64 => huygens::<f64>(&config, &args.out)?,
            }
            Ok(true)
        }
        Command::Transforms(args) => {
            match args.mode.parse::<ScalarMode>()? {
                ScalarMode::Exact => transforms::<QSurd>(&args, &args.out)?,
                ScalarMode::Float64 => transforms::<f64>(&args, &args.out)?,
            }
            Ok(true)
        }
        Command::Verify(args) => {
            let report = verify_suite(&VerifyConfig {
                qs: args.q,
                seed: args.seed,
                data_radius: args.radius,
                steps: args.steps,
                corrupt_weight: None,
            });
            let text = report.render();
            print!("{text}");
            if let Some(dir) = &args.out {
                fs::create_dir_all(dir)?;
                fs::write(dir.join("verify.txt"), &text)?;
            }
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("treewave: {e}");
            match e {
                Error::Usage { .. } | Error::Parse(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
