//! Seeded property suite behind the `verify` subcommand.
//!
//! Every check runs in exact arithmetic except the Fourier multipliers, which
//! need complex exponentials. The rendered report has no timings, so a fixed
//! configuration always produces the same bytes.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{
    energies, equipartition_gap, plus_operators, total_energy, total_energy_closed_form,
};
use crate::error::Result;
use crate::function::{HeightSequence, RadialProfile, TreeFunction};
use crate::scalar::{QSurd, Scalar};
use crate::transforms::{
    abel, abel_inverse, cos_q, dual_abel, dual_abel_inverse, fourier_height, sin_ratio, Method,
};
use crate::tree::{Ball, VertexAddress};
use crate::wave::{
    asgeirsson_field, asgeirsson_verify, cos_propagator, sin_propagator, solve,
    solve_with_weight_factor, SolverMode, WaveTrajectory,
};

type F = TreeFunction<QSurd>;

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub qs: Vec<u32>,
    pub seed: u64,
    /// Radius of the random initial data.
    pub data_radius: u32,
    /// Time steps solved in each direction.
    pub steps: u32,
    /// Multiplies the recurrence weight `q^{−1/2}` by `num/den` in the trajectory
    /// used for the energy checks. Negative control only.
    pub corrupt_weight: Option<(i64, i64)>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            qs: vec![2, 3],
            seed: 0,
            data_radius: 2,
            steps: 8,
            corrupt_weight: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub q: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{tag} q={} {}: {}", c.q, c.name, c.detail);
        }
        let failed = self.failures().count();
        let _ = writeln!(out, "{} checks, {} failed", self.checks.len(), failed);
        out
    }
}

struct Recorder<'a> {
    q: u32,
    report: &'a mut VerifyReport,
}

impl Recorder<'_> {
    fn record(&mut self, name: &'static str, outcome: Result<(bool, String)>) {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        self.report.checks.push(Check {
            q: self.q,
            name,
            passed,
            detail,
        });
    }
}

fn random_profile(q: u32, top: u32, rng: &mut ChaCha8Rng) -> RadialProfile<QSurd> {
    RadialProfile::from_pairs(
        q,
        (0..=top).map(|n| {
            (
                n,
                QSurd::from_ratio(rng.gen_range(-5..=5), rng.gen_range(1..=3), q),
            )
        }),
    )
}

fn random_even(q: u32, top: i64, rng: &mut ChaCha8Rng) -> HeightSequence<QSurd> {
    let mut s = HeightSequence::new(q);
    for h in 0..=top {
        let v = QSurd::from_ratio(rng.gen_range(-5..=5), rng.gen_range(1..=3), q);
        s.set(h, v.clone());
        s.set(-h, v);
    }
    s
}

pub fn verify_suite(config: &VerifyConfig) -> VerifyReport {
    let mut report = VerifyReport::default();
    for &q in &config.qs {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ ((q as u64) << 32));
        let mut rec = Recorder {
            q,
            report: &mut report,
        };
        check_q_value(config, q, &mut rng, &mut rec);
    }
    report
}

fn check_q_value(config: &VerifyConfig, q: u32, rng: &mut ChaCha8Rng, rec: &mut Recorder<'_>) {
    let steps = config.steps as i64;
    let data = F::random_integer(q, config.data_radius, 3, rng)
        .and_then(|f| Ok((f, F::random_integer(q, config.data_radius, 3, rng)?)));
    let (f, g) = match data {
        Ok(d) => d,
        Err(e) => {
            rec.record("initial data", Err(e));
            return;
        }
    };
    let ball = match Ball::new(q, config.data_radius + config.steps + 2) {
        Ok(b) => b,
        Err(e) => {
            rec.record("truncation ball", Err(e));
            return;
        }
    };

    let closed = solve(&f, &g, -steps..=steps, SolverMode::ClosedForm, &ball);
    let recurrence = match config.corrupt_weight {
        None => solve(&f, &g, -steps..=steps, SolverMode::Recurrence, &ball),
        Some((num, den)) => solve_with_weight_factor(
            &f,
            &g,
            -steps..=steps,
            &ball,
            &QSurd::from_ratio(num, den, q),
        ),
    };
    let (closed, recurrence) = match (closed, recurrence) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            rec.record("solvers", Err(e));
            return;
        }
    };

    rec.record(
        "closed form equals leapfrog recurrence",
        Ok((
            closed == recurrence,
            format!("|n| ≤ {steps}, data radius {}", config.data_radius),
        )),
    );
    rec.record("energy conservation", check_conservation(&recurrence));
    rec.record(
        "total energy from initial data",
        check_closed_energy(&closed),
    );
    rec.record(
        "potential energy forms agree and P ≥ 0",
        check_potential(&closed),
    );
    rec.record("equipartition gap", check_gap(&closed));
    rec.record("finite propagation speed", check_speed(&closed));
    rec.record("amplitude decay of the δ_0 solution", check_decay(q, steps));
    rec.record("Abel transform", check_abel(q, rng));
    rec.record("dual Abel transform", check_dual_abel(q, rng));
    rec.record(
        "Asgeirsson mean value property",
        check_asgeirsson(&closed, rng),
    );
    rec.record("plus-operator identities", check_plus(q));
    rec.record("Fourier multipliers of C_n and S_n", check_multipliers(q));
}

fn check_conservation(u: &WaveTrajectory<QSurd>) -> Result<(bool, String)> {
    let balance = total_energy(u)?;
    let first = &balance.rows[0].total;
    let ok = balance.rows.iter().all(|r| r.total == *first);
    let bad = balance.rows.iter().filter(|r| r.total != *first).count();
    Ok((
        ok,
        format!(
            "E(n) = {first} at {} times, {bad} deviating",
            balance.rows.len()
        ),
    ))
}

fn check_closed_energy(u: &WaveTrajectory<QSurd>) -> Result<(bool, String)> {
    let e0 = energies(u, 0)?.total;
    let closed = total_energy_closed_form(u.f(), u.g())?;
    Ok((
        e0 == closed,
        format!("E(0) = {e0}, ¼⟨(1−C_2)f,f⟩ + ½‖g‖² = {closed}"),
    ))
}

fn check_potential(u: &WaveTrajectory<QSurd>) -> Result<(bool, String)> {
    let rows = total_energy(u)?.rows;
    let ok = rows.iter().all(|r| {
        r.potential == r.potential_pairs
            && r.potential.cmp_zero() != std::cmp::Ordering::Less
            && r.kinetic.cmp_zero() != std::cmp::Ordering::Less
    });
    Ok((ok, format!("{} times", rows.len())))
}

fn check_gap(u: &WaveTrajectory<QSurd>) -> Result<(bool, String)> {
    let r = u.range();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for n in r.start() + 1..*r.end() {
        let gap = equipartition_gap(u, n)?;
        ok &= gap.routes_agree() && gap.within_bound();
        if n != 0 {
            worst = worst.max(gap.direct.abs_f64() / gap.bound);
        }
    }
    Ok((
        ok,
        format!("direct = operator route, max |gap|/bound = {worst:.3e}"),
    ))
}

fn check_speed(u: &WaveTrajectory<QSurd>) -> Result<(bool, String)> {
    let rows = crate::energy::propagation_bounds(u);
    let ok = rows.iter().all(|r| r.inside_light_cone);
    Ok((ok, format!("supp u(·,n) ⊆ B(0, |n| + {})", u.data_radius())))
}

fn check_decay(q: u32, steps: i64) -> Result<(bool, String)> {
    let d = F::delta(q, &VertexAddress::origin())?;
    let u = solve(
        &d,
        &F::zero(q),
        -steps..=steps,
        SolverMode::ClosedForm,
        &Ball::new(q, steps as u32 + 2)?,
    )?;
    let target = (q as f64 - 1.0) / 2.0;
    let ok = crate::energy::propagation_bounds(&u).iter().all(|r| {
        r.support_radius == Some(r.n.unsigned_abs() as u32)
            && (r.n.abs() < 2 || (r.scaled_amplitude - target).abs() <= 1e-12 * target)
    });
    Ok((
        ok,
        format!("max|u|·q^(|n|/2) = {target} for 2 ≤ |n| ≤ {steps}"),
    ))
}

fn check_abel(q: u32, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let ball = Ball::new(q, 6)?;
    let p = random_profile(q, 6, rng);
    let brute = abel(&p, Method::Brute, &ball)?;
    let closed = abel(&p, Method::Closed, &ball)?;
    let s = random_even(q, 6, rng);
    let ok = brute == closed
        && abel_inverse(&closed)? == p
        && abel(&abel_inverse(&s)?, Method::Closed, &ball)? == s;
    Ok((
        ok,
        "brute = closed form, both round trips, support ≤ 6".into(),
    ))
}

fn check_dual_abel(q: u32, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let ball = Ball::new(q, 6)?;
    let s = random_even(q, 6, rng);
    let mut ok = true;
    let mut means = RadialProfile::new(q);
    for n in 0..=6 {
        let b = dual_abel(&s, n, Method::Brute, &ball)?;
        ok &= b == dual_abel(&s, n, Method::Closed, &ball)?;
        means.set(n, b);
    }
    ok &= dual_abel_inverse(&means, 6) == s;
    let m = random_profile(q, 6, rng);
    let g = dual_abel_inverse(&m, 6);
    for n in 0..=6 {
        ok &= dual_abel(&g, n, Method::Closed, &ball)? == m.get(n);
    }
    Ok((
        ok,
        "brute = closed form, both round trips, support ≤ 6".into(),
    ))
}

fn check_asgeirsson(u: &WaveTrajectory<QSurd>, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let q = u.q();
    let steps = *u.range().end() as u32;
    let field_ball = Ball::new(q, steps)?;
    let field = asgeirsson_field(u, &field_ball)?;
    let depth = steps.saturating_sub(3) / 2;
    let reach = steps - 2 * depth;
    let mut ok = true;
    let pairs = 5;
    for _ in 0..pairs {
        let x = VertexAddress::random(q, depth, rng);
        let y = VertexAddress::random(q, depth, rng);
        let (lx, ly) = field.laplacians(&x, &y)?;
        ok &= lx == ly;
        let m = rng.gen_range(0..=reach.min(3));
        let n = rng.gen_range(0..=reach.min(3));
        let (lhs, rhs) = asgeirsson_verify(&field, &x, &y, m, n)?;
        ok &= lhs == rhs;
    }
    Ok((
        ok,
        format!("hypothesis and double-sphere symmetry at {pairs} random pairs"),
    ))
}

fn check_plus(q: u32) -> Result<(bool, String)> {
    let d = F::delta(q, &VertexAddress::origin())?;
    let ball = Ball::new(q, 4)?;
    let quarter_damp = d
        .try_sub(&cos_propagator(2, &d, &ball)?)?
        .scale(&QSurd::from_ratio(1, 4, q));
    let half = d.scale(&QSurd::from_ratio(1, 2, q));
    let mut ok = true;
    for n in 0..=6 {
        let (u, v, w) = plus_operators(n, &d)?;
        ok &= u == quarter_damp && v == half && w.is_zero();
    }
    Ok((ok, "U⁺ = ¼(1−C_2), V⁺ = ½, W⁺ = 0 on δ_0, 0 ≤ n ≤ 6".into()))
}

/// `max |F(A(C_n δ_0))(λ) − cos_q(nλ)|` and the `S_n` analogue over `n ≤ max_n`
/// and 100 points of `[0, τ/2]`.
pub fn multiplier_errors(q: u32, max_n: i64) -> Result<(f64, f64)> {
    let d = TreeFunction::<f64>::delta(q, &VertexAddress::origin())?;
    let ball = Ball::new(q, max_n as u32 + 2)?;
    let tau = 2.0 * std::f64::consts::PI / (q as f64).ln();
    let (mut cos_err, mut sin_err): (f64, f64) = (0.0, 0.0);
    for n in 0..=max_n {
        let c = abel(
            &cos_propagator(n, &d, &ball)?.to_radial()?,
            Method::Closed,
            &ball,
        )?;
        let s = abel(
            &sin_propagator(n, &d, &ball)?.to_radial()?,
            Method::Closed,
            &ball,
        )?;
        for i in 0..100 {
            let lambda = tau / 2.0 * i as f64 / 99.0;
            cos_err =
                cos_err.max((fourier_height(&c, lambda)? - cos_q(q, n as f64 * lambda)).norm());
            sin_err = sin_err.max((fourier_height(&s, lambda)? - sin_ratio(q, n, lambda)).norm());
        }
    }
    Ok((cos_err, sin_err))
}

fn check_multipliers(q: u32) -> Result<(bool, String)> {
    let (c, s) = multiplier_errors(q, 6)?;
    Ok((
        c <= 1e-10 && s <= 1e-10,
        format!("max error {c:.1e} (C_n), {s:.1e} (S_n), n ≤ 6"),
    ))
}
