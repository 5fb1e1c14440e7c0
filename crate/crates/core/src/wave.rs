//! The shifted wave equation `γ L^ℤ_n u = (L^T_x − 1 + γ) u` on `T_q`.
//!
//! Two independent solvers: the closed-form propagators `u(·, n) = C_n f + S_n g`
//! built from the spherical sums `M_n`, and the leapfrog recurrence
//! `u(n+1) + u(n−1) = q^{−1/2} Σ_{S(x,1)} u(n)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::TreeFunction;
use crate::laplacian::{laplacian_at, neighbor_sum};
use crate::scalar::Scalar;
use crate::tree::{sphere, Ball, VertexAddress};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverMode {
    ClosedForm,
    Recurrence,
}

impl fmt::Display for SolverMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverMode::ClosedForm => "closed",
            SolverMode::Recurrence => "recurrence",
        })
    }
}

impl FromStr for SolverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" | "closed-form" => Ok(SolverMode::ClosedForm),
            "recurrence" | "leapfrog" => Ok(SolverMode::Recurrence),
            other => Err(Error::Parse(format!("unknown solver `{other}`"))),
        }
    }
}

/// `M_n f(x) = q^{−n/2} Σ_{d(x,y) ≤ n, n − d(x,y) even} f(y)`, with `M_{−1} = 0`.
pub fn m_operator<S: Scalar>(n: i64, f: &TreeFunction<S>, ball: &Ball) -> Result<TreeFunction<S>> {
    let q = f.q();
    if n < -1 {
        return Err(Error::Parameter(format!(
            "M_n is defined for n ≥ −1, got {n}"
        )));
    }
    if n == -1 {
        return Ok(TreeFunction::zero(q));
    }
    let Some(radius) = f.support_radius() else {
        return Ok(TreeFunction::zero(q));
    };
    let n = n as u32;
    ball.require(radius, n, &format!("M_{n}"))?;
    if n == 0 {
        return Ok(f.clone());
    }
    let scale = S::q_pow_half(-(n as i64), q);
    Ok(TreeFunction::tabulate(q, f.resolution(), radius + n, |x| {
        let sum = f
            .distance_histogram(x)
            .into_iter()
            .filter(|(d, _)| *d <= n && (n - d).is_multiple_of(2))
            .fold(S::zero(q), |acc, (_, v)| acc + v);
        sum * &scale
    }))
}

/// `C_n = (M_{|n|} − M_{|n|−2})/2`, and `C_0 = I`.
pub fn cos_propagator<S: Scalar>(
    n: i64,
    f: &TreeFunction<S>,
    ball: &Ball,
) -> Result<TreeFunction<S>> {
    if n == 0 {
        return Ok(f.clone());
    }
    let m = n.abs();
    let diff = m_operator(m, f, ball)?.try_sub(&m_operator(m - 2, f, ball)?)?;
    Ok(diff.scale(&S::from_ratio(1, 2, f.q())))
}

/// `S_n = sign(n)·M_{|n|−1}`, and `S_0 = 0`.
pub fn sin_propagator<S: Scalar>(
    n: i64,
    g: &TreeFunction<S>,
    ball: &Ball,
) -> Result<TreeFunction<S>> {
    if n == 0 {
        return Ok(TreeFunction::zero(g.q()));
    }
    let m = m_operator(n.abs() - 1, g, ball)?;
    Ok(if n < 0 {
        m.scale(&S::from_i64(-1, g.q()))
    } else {
        m
    })
}

/// `u(·, n) = C_n f + S_n g`.
pub fn propagate<S: Scalar>(
    n: i64,
    f: &TreeFunction<S>,
    g: &TreeFunction<S>,
    ball: &Ball,
) -> Result<TreeFunction<S>> {
    cos_propagator(n, f, ball)?.try_add(&sin_propagator(n, g, ball)?)
}

/// `u_next = q^{−1/2}·Σ_{S(x,1)} u_curr − u_prev`. Run backwards by swapping roles.
pub fn step_recurrence<S: Scalar>(
    u_prev: &TreeFunction<S>,
    u_curr: &TreeFunction<S>,
    ball: &Ball,
) -> Result<TreeFunction<S>> {
    step_weighted(u_prev, u_curr, ball, &S::q_pow_half(-1, u_curr.q()))
}

fn step_weighted<S: Scalar>(
    u_prev: &TreeFunction<S>,
    u_curr: &TreeFunction<S>,
    ball: &Ball,
    weight: &S,
) -> Result<TreeFunction<S>> {
    neighbor_sum(u_curr, ball)?.scale(weight).try_sub(u_prev)
}

/// Snapshots `n ↦ u(·, n)` of one solution together with its initial data.
#[derive(Clone, Debug)]
pub struct WaveTrajectory<S> {
    f: TreeFunction<S>,
    g: TreeFunction<S>,
    solver: SolverMode,
    ball: Ball,
    snapshots: BTreeMap<i64, TreeFunction<S>>,
}

impl<S: Scalar> WaveTrajectory<S> {
    pub fn q(&self) -> u32 {
        self.f.q()
    }

    pub fn f(&self) -> &TreeFunction<S> {
        &self.f
    }

    pub fn g(&self) -> &TreeFunction<S> {
        &self.g
    }

    pub fn solver(&self) -> SolverMode {
        self.solver
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    /// Radius of the smallest origin-centred ball carrying `f` and `g`.
    pub fn data_radius(&self) -> u32 {
        data_radius(&self.f, &self.g)
    }

    pub fn range(&self) -> RangeInclusive<i64> {
        let lo = *self
            .snapshots
            .keys()
            .next()
            .expect("trajectories are never empty");
        let hi = *self
            .snapshots
            .keys()
            .next_back()
            .expect("trajectories are never empty");
        lo..=hi
    }

    pub fn snapshot(&self, n: i64) -> Result<&TreeFunction<S>> {
        self.snapshots.get(&n).ok_or_else(|| {
            let r = self.range();
            Error::Truncation(format!(
                "u(·, {n}) not solved; trajectory covers {}..={}",
                r.start(),
                r.end()
            ))
        })
    }

    pub fn snapshots(&self) -> impl Iterator<Item = (i64, &TreeFunction<S>)> {
        self.snapshots.iter().map(|(n, u)| (*n, u))
    }

    pub fn to_float(&self) -> WaveTrajectory<f64> {
        WaveTrajectory {
            f: self.f.to_float(),
            g: self.g.to_float(),
            solver: self.solver,
            ball: self.ball,
            snapshots: self
                .snapshots
                .iter()
                .map(|(n, u)| (*n, u.to_float()))
                .collect(),
        }
    }
}

impl<S: Scalar> PartialEq for WaveTrajectory<S> {
    /// Compares the solutions, not the way they were obtained.
    fn eq(&self, other: &Self) -> bool {
        self.f == other.f && self.g == other.g && self.snapshots == other.snapshots
    }
}

fn data_radius<S: Scalar>(f: &TreeFunction<S>, g: &TreeFunction<S>) -> u32 {
    f.support_radius()
        .unwrap_or(0)
        .max(g.support_radius().unwrap_or(0))
}

fn check_inputs<S: Scalar>(
    f: &TreeFunction<S>,
    g: &TreeFunction<S>,
    range: &RangeInclusive<i64>,
    ball: &Ball,
) -> Result<()> {
    if f.q() != g.q() || f.q() != ball.q() {
        return Err(Error::Parameter(format!(
            "branching parameters disagree: f has q = {}, g has q = {}, ball has q = {}",
            f.q(),
            g.q(),
            ball.q()
        )));
    }
    if range.is_empty() {
        return Err(Error::Parameter("empty time range".into()));
    }
    let worst = if range.start().abs() >= range.end().abs() {
        *range.start()
    } else {
        *range.end()
    };
    let need = worst.unsigned_abs() + data_radius(f, g) as u64 + 2;
    if need > ball.radius() as u64 {
        return Err(Error::Truncation(format!(
            "n = {worst} needs truncation radius {need}, ball has radius {}",
            ball.radius()
        )));
    }
    Ok(())
}

/// Solves the Cauchy problem `u(·,0) = f`, `(u(·,1) − u(·,−1))/2 = g` for `n ∈ range`.
///
/// The ball must have radius at least `max|n| + R + 2`, `R` the data radius.
pub fn solve<S: Scalar>(
    f: &TreeFunction<S>,
    g: &TreeFunction<S>,
    range: RangeInclusive<i64>,
    solver: SolverMode,
    ball: &Ball,
) -> Result<WaveTrajectory<S>> {
    check_inputs(f, g, &range, ball)?;
    let snapshots = match solver {
        SolverMode::ClosedForm => range
            .clone()
            .into_par_iter()
            .map(|n| propagate(n, f, g, ball).map(|u| (n, u)))
            .collect::<Result<BTreeMap<_, _>>>()?,
        SolverMode::Recurrence => leapfrog(f, g, &range, ball, &S::q_pow_half(-1, f.q()))?,
    };
    Ok(WaveTrajectory {
        f: f.clone(),
        g: g.clone(),
        solver,
        ball: *ball,
        snapshots,
    })
}

/// The recurrence solver with its `q^{−1/2}` weight multiplied by `factor`.
///
/// Only meant for negative controls: any `factor ≠ 1` produces a sequence that
/// is not a solution, and conservation checks must notice.
#[doc(hidden)]
pub fn solve_with_weight_factor<S: Scalar>(
    f: &TreeFunction<S>,
    g: &TreeFunction<S>,
    range: RangeInclusive<i64>,
    ball: &Ball,
    factor: &S,
) -> Result<WaveTrajectory<S>> {
    check_inputs(f, g, &range, ball)?;
    let weight = S::q_pow_half(-1, f.q()) * factor;
    Ok(WaveTrajectory {
        f: f.clone(),
        g: g.clone(),
        solver: SolverMode::Recurrence,
        ball: *ball,
        snapshots: leapfrog(f, g, &range, ball, &weight)?,
    })
}

fn leapfrog<S: Scalar>(
    f: &TreeFunction<S>,
    g: &TreeFunction<S>,
    range: &RangeInclusive<i64>,
    ball: &Ball,
    weight: &S,
) -> Result<BTreeMap<i64, TreeFunction<S>>> {
    let q = f.q();
    // u(±1) = C_1 f ± g, with C_1 f = (weight/2)·Σ_{S(x,1)} f
    let c1f = neighbor_sum(f, ball)?.scale(&(weight.clone() * S::from_ratio(1, 2, q)));
    let mut all = BTreeMap::new();
    all.insert(0, f.clone());
    all.insert(1, c1f.try_add(g)?);
    all.insert(-1, c1f.try_sub(g)?);
    let (lo, hi) = (*range.start().min(&0), *range.end().max(&0));
    for n in 1..hi {
        let next = step_weighted(&all[&(n - 1)], &all[&n], ball, weight)?;
        all.insert(n + 1, next);
    }
    for n in (lo + 1..=-1).rev() {
        let next = step_weighted(&all[&(n + 1)], &all[&n], ball, weight)?;
        all.insert(n - 1, next);
    }
    all.retain(|n, _| range.contains(n));
    Ok(all)
}

/// `U(x, y) = q^{h(y)/2}·u(x, h(y))`, a function on pairs of vertices of `ball`.
pub struct AsgeirssonField<'a, S> {
    u: &'a WaveTrajectory<S>,
    ball: Ball,
}

pub fn asgeirsson_field<'a, S: Scalar>(
    u: &'a WaveTrajectory<S>,
    ball: &Ball,
) -> Result<AsgeirssonField<'a, S>> {
    if ball.q() != u.q() {
        return Err(Error::Parameter(
            "ball and trajectory use different q".into(),
        ));
    }
    let r = ball.radius() as i64;
    let range = u.range();
    if *range.start() > -r || *range.end() < r {
        return Err(Error::Truncation(format!(
            "heights in B(0, {r}) span −{r}..={r}, trajectory covers {}..={}",
            range.start(),
            range.end()
        )));
    }
    Ok(AsgeirssonField { u, ball: *ball })
}

impl<S: Scalar> AsgeirssonField<'_, S> {
    pub fn q(&self) -> u32 {
        self.u.q()
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn value(&self, x: &VertexAddress, y: &VertexAddress) -> Result<S> {
        for v in [x, y] {
            if !self.ball.contains(v) {
                return Err(Error::Truncation(format!(
                    "vertex {v} outside B(0, {})",
                    self.ball.radius()
                )));
            }
        }
        let h = y.height();
        Ok(S::q_pow_half(h, self.q()) * self.u.snapshot(h)?.get(x))
    }

    /// `(L^T_x U(x, y), L^T_y U(x, y))`; the hypothesis of the mean value theorem
    /// asks for equality.
    pub fn laplacians(&self, x: &VertexAddress, y: &VertexAddress) -> Result<(S, S)> {
        self.ball
            .require(x.depth().max(y.depth()), 1, "Laplacian of U")?;
        for h in y.height() - 1..=y.height() + 1 {
            self.u.snapshot(h)?;
        }
        let q = self.q();
        let at = |a: &VertexAddress, b: &VertexAddress| {
            self.value(a, b).expect("neighbourhood checked above")
        };
        Ok((
            laplacian_at(q, x, |x2| at(x2, y)),
            laplacian_at(q, y, |y2| at(x, y2)),
        ))
    }

    /// `Σ_{x' ∈ S(x, m)} Σ_{y' ∈ S(y, n)} U(x', y')`.
    ///
    /// The inner sum over `x'` is read off the distance histogram of one
    /// snapshot per height occurring on `S(y, n)`.
    pub fn double_sphere_sum(
        &self,
        x: &VertexAddress,
        y: &VertexAddress,
        m: u32,
        n: u32,
    ) -> Result<S> {
        let q = self.q();
        self.ball.require(x.depth(), m, "sphere around x")?;
        let mut heights: BTreeMap<i64, i64> = BTreeMap::new();
        for y2 in sphere(y, n, &self.ball)? {
            *heights.entry(y2.height()).or_default() += 1;
        }
        let mut total = S::zero(q);
        for (h, count) in heights {
            let inner = self
                .u
                .snapshot(h)?
                .distance_histogram(x)
                .remove(&m)
                .unwrap_or_else(|| S::zero(q));
            total = total + S::from_i64(count, q) * S::q_pow_half(h, q) * inner;
        }
        Ok(total)
    }
}

/// Both sides of `Σ_{S(x,m)} Σ_{S(y,n)} U = Σ_{S(x,n)} Σ_{S(y,m)} U`.
pub fn asgeirsson_verify<S: Scalar>(
    field: &AsgeirssonField<'_, S>,
    x: &VertexAddress,
    y: &VertexAddress,
    m: u32,
    n: u32,
) -> Result<(S, S)> {
    Ok((
        field.double_sphere_sum(x, y, m, n)?,
        field.double_sphere_sum(x, y, n, m)?,
    ))
}
