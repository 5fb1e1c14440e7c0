//! Abel transform, dual Abel transform, their inverses, and the Fourier
//! transform on `ℤ` that completes the radial Fourier diagram `H = F ∘ A`.
//!
//! Both Abel transforms come in two flavours: `Brute` sums over explicitly
//! enumerated vertices (the definition), `Closed` uses the explicit formulas.
//! Agreement of the two is what validates the height convention.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::function::{HeightSequence, RadialProfile};
use crate::scalar::{Scalar, ScalarMode};
use crate::tree::{sphere, sphere_volume, Ball};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Sum over the vertices of a truncation ball.
    Brute,
    /// Closed-form expression in the profile values.
    Closed,
}

fn qf<S: Scalar>(q: u32) -> S {
    S::from_i64(q as i64, q)
}

/// `A f(h) = q^{h/2} Σ_{h(x) = h} f(|x|)`.
///
/// `ball` is consulted by the brute method only and must cover the support of `p`.
pub fn abel<S: Scalar>(
    p: &RadialProfile<S>,
    method: Method,
    ball: &Ball,
) -> Result<HeightSequence<S>> {
    let q = p.q();
    let Some(top) = p.max_key() else {
        return Ok(HeightSequence::new(q));
    };
    match method {
        Method::Brute => {
            ball.require(0, top, "Abel transform")?;
            let mut out = HeightSequence::new(q);
            for n in 0..=top {
                let value = p.get(n);
                if value.is_zero() {
                    continue;
                }
                for x in sphere(&crate::tree::VertexAddress::origin(), n, ball)? {
                    let h = x.height();
                    let term = S::q_pow_half(h, q) * &value;
                    out.set(h, out.get(h) + term);
                }
            }
            Ok(out)
        }
        Method::Closed => {
            let weight = S::from_ratio(q as i64 - 1, q as i64, q);
            let top = top as i64;
            Ok(HeightSequence::from_pairs(
                q,
                (-top..=top).map(|h| {
                    let a = h.unsigned_abs() as u32;
                    let mut tail = S::zero(q);
                    let mut k = 1;
                    while a + 2 * k <= top as u32 {
                        tail = tail + S::q_pow_half(a as i64 + 2 * k as i64, q) * p.get(a + 2 * k);
                        k += 1;
                    }
                    (
                        h,
                        S::q_pow_half(a as i64, q) * p.get(a) + weight.clone() * tail,
                    )
                }),
            ))
        }
    }
}

/// `A^{-1} f(n) = q^{−n/2} f(n) − (q − 1) Σ_{k ≥ 1} q^{−n/2 − k} f(n + 2k)`.
///
/// Fails with a domain error unless `s` is even.
pub fn abel_inverse<S: Scalar>(s: &HeightSequence<S>) -> Result<RadialProfile<S>> {
    if !s.is_even() {
        return Err(Error::Domain(
            "inverse Abel transform needs an even sequence".into(),
        ));
    }
    let q = s.q();
    let Some(top) = s.support_bound() else {
        return Ok(RadialProfile::new(q));
    };
    let top = top as i64;
    let qm1 = S::from_i64(q as i64 - 1, q);
    Ok(RadialProfile::from_pairs(
        q,
        (0..=top).map(|n| {
            let mut tail = S::zero(q);
            let mut k = 1;
            while n + 2 * k <= top {
                tail = tail + S::q_pow_half(-n - 2 * k, q) * s.get(n + 2 * k);
                k += 1;
            }
            (
                n as u32,
                S::q_pow_half(-n, q) * s.get(n) - qm1.clone() * tail,
            )
        }),
    ))
}

/// `A* f(n) = δ(n)^{−1} Σ_{|x| = n} q^{h(x)/2} f(h(x))`.
///
/// The closed form only sees the even part `(f(k) + f(−k))/2` of `f`, which
/// is all the definition depends on.
pub fn dual_abel<S: Scalar>(
    s: &HeightSequence<S>,
    n: u32,
    method: Method,
    ball: &Ball,
) -> Result<S> {
    let q = s.q();
    match method {
        Method::Brute => {
            let origin = crate::tree::VertexAddress::origin();
            let sum = sphere(&origin, n, ball)?
                .into_iter()
                .fold(S::zero(q), |acc, x| {
                    let h = x.height();
                    acc + S::q_pow_half(h, q) * s.get(h)
                });
            sum.checked_div(&S::from_bigint(&sphere_volume(q, n), q))
        }
        Method::Closed => {
            if n == 0 {
                return Ok(s.get(0));
            }
            let qi = q as i64;
            let half = S::from_ratio(1, 2, q);
            let even = |k: i64| (s.get(k) + s.get(-k)) * &half;
            let n = n as i64;
            let scale = S::q_pow_half(-n, q);
            let mut inner = S::zero(q);
            let mut k = -n + 2;
            while k < n {
                inner = inner + even(k);
                k += 2;
            }
            Ok(scale.clone() * S::from_ratio(2 * qi, qi + 1, q) * even(n)
                + scale * S::from_ratio(qi - 1, qi + 1, q) * inner)
        }
    }
}

/// `n ↦ A* f(n)` for `0 ≤ n ≤ up_to`.
pub fn dual_abel_profile<S: Scalar>(
    s: &HeightSequence<S>,
    up_to: u32,
    method: Method,
    ball: &Ball,
) -> Result<RadialProfile<S>> {
    let mut out = RadialProfile::new(s.q());
    for n in 0..=up_to {
        out.set(n, dual_abel(s, n, method, ball)?);
    }
    Ok(out)
}

/// `(A*)^{-1}` on `ℕ`-indexed data, evaluated for `0 ≤ h ≤ h_max` and extended evenly.
///
/// The result is not finitely supported in general, hence the explicit range.
pub fn dual_abel_inverse<S: Scalar>(m: &RadialProfile<S>, h_max: u32) -> HeightSequence<S> {
    let q = m.q();
    let mut out = HeightSequence::new(q);
    for h in 0..=h_max {
        let v = dual_abel_inverse_at(m, h);
        out.set(h as i64, v.clone());
        out.set(-(h as i64), v);
    }
    out
}

/// A single value of `(A*)^{-1} m` at `h ≥ 0`.
pub fn dual_abel_inverse_at<S: Scalar>(m: &RadialProfile<S>, h: u32) -> S {
    let q = m.q();
    if h == 0 {
        return m.get(0);
    }
    let hi = h as i64;
    let half = S::from_ratio(1, 2, q);
    let q_minus_inv = qf::<S>(q) - S::q_pow_half(-2, q);
    let lead =
        (S::q_pow_half(1, q) + S::q_pow_half(-1, q)) * &half * S::q_pow_half(hi - 1, q) * m.get(h);
    // Σ over 0 < k < h with k ≡ h (mod 2) of q^k m(k)
    let mut tail = S::zero(q);
    let mut k = if h % 2 == 1 { 1 } else { 2 };
    while k < h {
        tail = tail + S::q_pow_half(2 * k as i64, q) * m.get(k);
        k += 2;
    }
    let tail_term = q_minus_inv * &half * S::q_pow_half(-hi, q) * tail;
    if h % 2 == 1 {
        lead - tail_term
    } else {
        let origin_term = (S::q_pow_half(1, q) - S::q_pow_half(-1, q))
            * &half
            * S::q_pow_half(-(hi - 1), q)
            * m.get(0);
        lead - origin_term - tail_term
    }
}

/// `F f(λ) = Σ_h q^{iλh} f(h)`. Only available for floating-point sequences.
pub fn fourier_height<S: Scalar>(s: &HeightSequence<S>, lambda: f64) -> Result<Complex64> {
    if S::MODE != ScalarMode::Float64 {
        return Err(Error::Mode(
            "the Fourier transform needs float data; convert with to_float() first".into(),
        ));
    }
    let lq = (s.q() as f64).ln();
    Ok(s.iter().fold(Complex64::new(0.0, 0.0), |acc, (h, v)| {
        acc + Complex64::from_polar(v.to_f64(), lambda * lq * *h as f64)
    }))
}

/// The spherical transform `H = F ∘ A` of a radial profile.
pub fn spherical_transform<S: Scalar>(p: &RadialProfile<S>, lambda: f64) -> Result<Complex64> {
    if S::MODE != ScalarMode::Float64 {
        return Err(Error::Mode(
            "the spherical transform needs float data".into(),
        ));
    }
    let ball = Ball::new(p.q(), 0)?;
    fourier_height(&abel(p, Method::Closed, &ball)?, lambda)
}

/// `cos_q λ = (q^{iλ} + q^{−iλ})/2`.
pub fn cos_q(q: u32, lambda: f64) -> f64 {
    (lambda * (q as f64).ln()).cos()
}

/// `sin_q λ = (q^{iλ} − q^{−iλ})/(2i)`.
pub fn sin_q(q: u32, lambda: f64) -> f64 {
    (lambda * (q as f64).ln()).sin()
}

/// `sin_q(nλ)/sin_q(λ)`, continued at the zeros of `sin_q λ` through the
/// Chebyshev recurrence `U_{k+1} = 2c·U_k − U_{k−1}` with `c = cos_q λ`.
pub fn sin_ratio(q: u32, n: i64, lambda: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let c = cos_q(q, lambda);
    let (mut prev, mut cur) = (0.0, 1.0);
    for _ in 1..n.unsigned_abs() {
        let next = 2.0 * c * cur - prev;
        prev = cur;
        cur = next;
    }
    cur * n.signum() as f64
}
