//! Kinetic, potential and total energy of a solution, the equipartition gap
//! `K − P`, and the interior sums of the asymptotic Huygens principle.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::function::TreeFunction;
use crate::laplacian::{two_step_laplacian, SpectralConstants};
use crate::scalar::Scalar;
use crate::tree::{sphere_around, Ball};
use crate::wave::{cos_propagator, sin_propagator, WaveTrajectory};

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport<S> {
    pub n: i64,
    pub kinetic: S,
    /// `((q+1)/8) Σ (L̃ − γ̃)u·u`.
    pub potential: S,
    /// `(1/4q) Σ_{d(x,y)=2} |(u(x) − u(y))/2|² − ((q−1)²/8q) Σ |u|²`.
    pub potential_pairs: S,
    pub total: S,
    pub gap: S,
}

/// `Σ_x Σ_{y ∈ S(x,2)} (u(x) − u(y))²`, optionally only over `|x|, |y| < below`.
fn two_step_differences<S: Scalar>(
    u: &TreeFunction<S>,
    ball: &Ball,
    below: Option<u32>,
) -> Result<S> {
    let q = u.q();
    let Some(radius) = u.support_radius() else {
        return Ok(S::zero(q));
    };
    let reach = match below {
        Some(0) => return Ok(S::zero(q)),
        Some(r) => (radius + 2).min(r - 1),
        None => {
            ball.require(radius, 2, "two-step difference sum")?;
            radius + 2
        }
    };
    let table = TreeFunction::tabulate(q, u.resolution(), reach, |x| {
        let ux = u.get(x);
        sphere_around(q, x, 2)
            .iter()
            .filter(|y| below.is_none_or(|r| y.depth() < r))
            .fold(S::zero(q), |acc, y| acc + (ux.clone() - u.get(y)).square())
    });
    Ok(table.sum_by_site(|_, v| v.clone()))
}

/// `K(n)`, `P(n)` in both forms, `E(n)` and `K(n) − P(n)`.
pub fn energies<S: Scalar>(u: &WaveTrajectory<S>, n: i64) -> Result<EnergyReport<S>> {
    let q = u.q();
    let qi = q as i64;
    let ball = u.ball();
    let now = u.snapshot(n)?;
    let velocity = u.snapshot(n + 1)?.try_sub(u.snapshot(n - 1)?)?;
    let kinetic = velocity.norm_squared() * S::from_ratio(1, 8, q);

    let consts = SpectralConstants::<S>::new(q);
    let mass = now.norm_squared();
    let potential = (two_step_laplacian(now, ball)?.inner(now)? - consts.gamma_tilde * &mass)
        * S::from_ratio(qi + 1, 8, q);
    let potential_pairs = two_step_differences(now, ball, None)? * S::from_ratio(1, 16 * qi, q)
        - mass * S::from_ratio((qi - 1) * (qi - 1), 8 * qi, q);

    Ok(EnergyReport {
        n,
        total: kinetic.clone() + &potential,
        gap: kinetic.clone() - &potential,
        kinetic,
        potential,
        potential_pairs,
    })
}

/// Energies at every `n` whose neighbours `n ± 1` are solved.
pub fn energy_table<S: Scalar>(u: &WaveTrajectory<S>) -> Result<Vec<EnergyReport<S>>> {
    let r = u.range();
    (r.start() + 1..=r.end() - 1)
        .map(|n| energies(u, n))
        .collect()
}

/// A ball large enough for `C_k`, `S_k` with `|k| ≤ reach` applied twice to the data.
fn working_ball(q: u32, data_radius: u32, reach: u64) -> Result<Ball> {
    Ball::new(q, data_radius + 2 * reach as u32 + 4)
}

fn one_minus_c2<S: Scalar>(f: &TreeFunction<S>, ball: &Ball) -> Result<TreeFunction<S>> {
    f.try_sub(&cos_propagator(2, f, ball)?)
}

/// `E = ¼ Σ (1 − C_2)f·f + ½ Σ |g|²`, from the initial data alone.
pub fn total_energy_closed_form<S: Scalar>(f: &TreeFunction<S>, g: &TreeFunction<S>) -> Result<S> {
    let q = f.q();
    let radius = f
        .support_radius()
        .unwrap_or(0)
        .max(g.support_radius().unwrap_or(0));
    let ball = working_ball(q, radius, 1)?;
    Ok(one_minus_c2(f, &ball)?.inner(f)? * S::from_ratio(1, 4, q)
        + g.norm_squared() * S::from_ratio(1, 2, q))
}

/// Per-`n` energies and the conserved total.
#[derive(Clone, Debug)]
pub struct EnergyBalance<S> {
    pub rows: Vec<EnergyReport<S>>,
    pub closed_form: S,
}

impl<S: Scalar> EnergyBalance<S> {
    /// `max_n |E(n) − E_closed|`, zero exactly in exact mode.
    pub fn max_drift(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.total.clone() - &self.closed_form).abs_f64())
            .fold(0.0, f64::max)
    }

    pub fn is_exactly_conserved(&self) -> bool {
        self.rows.iter().all(|r| r.total == self.closed_form)
    }
}

pub fn total_energy<S: Scalar>(u: &WaveTrajectory<S>) -> Result<EnergyBalance<S>> {
    Ok(EnergyBalance {
        rows: energy_table(u)?,
        closed_form: total_energy_closed_form(u.f(), u.g())?,
    })
}

/// The gap `K(n) − P(n)` through the operators
/// `U⁻ = −¼(1 − C_2)C_{2n}`, `V⁻ = ½C_{2n}`, `W⁻ = −¼(1 − C_2)S_{2n}`:
/// `⟨U⁻f, f⟩ + ⟨V⁻g, g⟩ + 2⟨W⁻f, g⟩`.
pub fn gap_operator_route<S: Scalar>(
    f: &TreeFunction<S>,
    g: &TreeFunction<S>,
    n: i64,
) -> Result<S> {
    let q = f.q();
    let radius = f
        .support_radius()
        .unwrap_or(0)
        .max(g.support_radius().unwrap_or(0));
    let ball = working_ball(q, radius, 2 * n.unsigned_abs() + 2)?;
    let c2n_f = cos_propagator(2 * n, f, &ball)?;
    let u_term = one_minus_c2(&c2n_f, &ball)?.inner(f)? * S::from_ratio(-1, 4, q);
    let v_term = cos_propagator(2 * n, g, &ball)?.inner(g)? * S::from_ratio(1, 2, q);
    let s2n_f = sin_propagator(2 * n, f, &ball)?;
    let w_term = one_minus_c2(&s2n_f, &ball)?.inner(g)? * S::from_ratio(-1, 2, q);
    Ok(u_term + v_term + w_term)
}

/// Both routes to `K(n) − P(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GapReport<S> {
    pub n: i64,
    pub direct: S,
    pub operator: S,
    /// `C(f, g)·q^{−|n|}`, valid for `|n| ≥ 1`.
    pub bound: f64,
}

impl<S: Scalar> GapReport<S> {
    pub fn routes_agree(&self) -> bool {
        self.direct == self.operator
    }

    pub fn within_bound(&self) -> bool {
        self.n == 0 || self.direct.abs_f64() <= self.bound * (1.0 + 1e-12)
    }
}

/// `C(f, g)` with `|K(n) − P(n)| ≤ C(f, g)·q^{−|n|}` for `|n| ≥ 1`.
///
/// Combines `‖C_{2n} h‖_∞ ≤ ((q−1)/2) q^{−|n|} ‖h‖_1`,
/// `‖S_{2n} h‖_∞ ≤ q^{1/2} q^{−|n|} ‖h‖_1` and
/// `‖(1 − C_2) h‖_1 ≤ ((q − q^{−1})/2 + 2) ‖h‖_1`.
pub fn gap_bound_constant<S: Scalar>(f: &TreeFunction<S>, g: &TreeFunction<S>) -> f64 {
    let q = f.q() as f64;
    let b = (q - 1.0 / q) / 2.0 + 2.0;
    let (nf, ng) = (f.l1_norm(), g.l1_norm());
    let c = (q - 1.0) / 2.0;
    0.25 * c * b * nf * nf + 0.5 * c * ng * ng + 0.5 * q.sqrt() * b * nf * ng
}

pub fn equipartition_gap<S: Scalar>(u: &WaveTrajectory<S>, n: i64) -> Result<GapReport<S>> {
    let direct = energies(u, n)?.gap;
    let operator = gap_operator_route(u.f(), u.g(), n)?;
    let bound = gap_bound_constant(u.f(), u.g()) * (u.q() as f64).powi(-(n.abs() as i32));
    Ok(GapReport {
        n,
        direct,
        operator,
        bound,
    })
}

/// `(U_n^+ h, V_n^+ h, W_n^+ h)`, assembled from `C_{n±1}`, `S_{n±1}`, `C_n`, `S_n`.
pub fn plus_operators<S: Scalar>(
    n: i64,
    h: &TreeFunction<S>,
) -> Result<(TreeFunction<S>, TreeFunction<S>, TreeFunction<S>)> {
    let q = h.q();
    let ball = working_ball(q, h.support_radius().unwrap_or(0), n.unsigned_abs() + 2)?;
    let dc = |v: &TreeFunction<S>| -> Result<TreeFunction<S>> {
        cos_propagator(n + 1, v, &ball)?.try_sub(&cos_propagator(n - 1, v, &ball)?)
    };
    let ds = |v: &TreeFunction<S>| -> Result<TreeFunction<S>> {
        sin_propagator(n + 1, v, &ball)?.try_sub(&sin_propagator(n - 1, v, &ball)?)
    };
    let cn = |v: &TreeFunction<S>| cos_propagator(n, v, &ball);
    let sn = |v: &TreeFunction<S>| sin_propagator(n, v, &ball);
    let damp = |v: &TreeFunction<S>| one_minus_c2(v, &ball);
    let eighth = S::from_ratio(1, 8, q);
    let quarter = S::from_ratio(1, 4, q);
    let combine =
        |a: TreeFunction<S>, b: TreeFunction<S>| a.scale(&eighth).try_add(&b.scale(&quarter));
    let u = combine(dc(&dc(h)?)?, damp(&cn(&cn(h)?)?)?)?;
    let v = combine(ds(&ds(h)?)?, damp(&sn(&sn(h)?)?)?)?;
    let w = combine(dc(&ds(h)?)?, damp(&cn(&sn(h)?)?)?)?;
    Ok((u, v, w))
}

/// `N_n`, the width of the shell around `|x| = |n|` excluded from the interior sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// `⌊√|n|⌋`.
    Sqrt,
    Constant(u32),
}

impl Schedule {
    pub fn margin(&self, n: i64) -> u32 {
        match self {
            Schedule::Sqrt => n.unsigned_abs().isqrt() as u32,
            Schedule::Constant(k) => *k,
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Sqrt => f.write_str("sqrt"),
            Schedule::Constant(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt" => Ok(Schedule::Sqrt),
            other => other.parse().map(Schedule::Constant).map_err(|_| {
                Error::Parse(format!(
                    "schedule must be `sqrt` or an integer, got `{other}`"
                ))
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HuygensReport<S> {
    pub n: i64,
    pub margin: u32,
    /// `Σ_{|x| < |n| − N} |u(x,n)|²`.
    pub interior_mass: S,
    /// `Σ_{|x|,|y| < |n| − N, d(x,y) = 2} |u(x,n) − u(y,n)|²`.
    pub interior_gradient: S,
    /// `Σ_{|x| < |n| − N} |u(x,n+1) − u(x,n−1)|²`.
    pub interior_kinetic: S,
}

pub fn huygens_report<S: Scalar>(
    u: &WaveTrajectory<S>,
    n: i64,
    margin: u32,
) -> Result<HuygensReport<S>> {
    let q = u.q();
    let now = u.snapshot(n)?;
    let velocity = u.snapshot(n + 1)?.try_sub(u.snapshot(n - 1)?)?;
    let r = (n.unsigned_abs() as i64 - margin as i64).max(0) as u32;
    let inside = |f: &TreeFunction<S>| f.restrict(|site| site.radius() < r).norm_squared();
    Ok(HuygensReport {
        n,
        margin,
        interior_mass: inside(now),
        interior_gradient: if r == 0 {
            S::zero(q)
        } else {
            two_step_differences(now, u.ball(), Some(r))?
        },
        interior_kinetic: inside(&velocity),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropagationRow {
    pub n: i64,
    pub support_radius: Option<u32>,
    /// `max_x |u(x,n)|·q^{|n|/2}`.
    pub scaled_amplitude: f64,
    /// Whether `supp u(·,n) ⊆ B(0, |n| + R)`.
    pub inside_light_cone: bool,
}

pub fn propagation_bounds<S: Scalar>(u: &WaveTrajectory<S>) -> Vec<PropagationRow> {
    let q = u.q() as f64;
    let data = u.data_radius();
    u.snapshots()
        .map(|(n, un)| {
            let support_radius = un.support_radius();
            PropagationRow {
                n,
                support_radius,
                scaled_amplitude: un.sup_norm() * q.powf(n.abs() as f64 / 2.0),
                inside_light_cone: support_radius
                    .is_none_or(|r| r as u64 <= n.unsigned_abs() + data as u64),
            }
        })
        .collect()
}
