//! Laplace-type operators on `ℤ` and `T_q`, and the spectral constants.

use crate::error::Result;
use crate::function::{HeightSequence, RadialProfile, TreeFunction};
use crate::scalar::Scalar;
use crate::tree::{sphere_around, Ball, VertexAddress};

/// `γ = 2/(q^{1/2} + q^{−1/2})`, `γ̃ = (q − 1)²/(q(q + 1))` and the period `τ = 2π/log q`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralConstants<S> {
    pub gamma: S,
    pub gamma_tilde: S,
    pub tau: f64,
}

impl<S: Scalar> SpectralConstants<S> {
    pub fn new(q: u32) -> Self {
        let denom = S::q_pow_half(1, q) + S::q_pow_half(-1, q);
        let gamma = S::from_i64(2, q)
            .checked_div(&denom)
            .expect("q^{1/2} + q^{-1/2} is positive");
        let qi = q as i64;
        SpectralConstants {
            gamma,
            gamma_tilde: S::from_ratio((qi - 1) * (qi - 1), qi * (qi + 1), q),
            tau: 2.0 * std::f64::consts::PI / (q as f64).ln(),
        }
    }
}

/// `f(n) − (f(n + 1) + f(n − 1))/2` on `ℤ`.
pub fn laplacian_line<S: Scalar>(f: &HeightSequence<S>) -> HeightSequence<S> {
    let q = f.q();
    let half = S::from_ratio(1, 2, q);
    let (Some(lo), Some(hi)) = (f.min_key(), f.max_key()) else {
        return HeightSequence::new(q);
    };
    HeightSequence::from_pairs(
        q,
        (lo - 1..=hi + 1).map(|n| (n, f.get(n) - (f.get(n + 1) + f.get(n - 1)) * &half)),
    )
}

/// `L^T` on functions of the horocyclic height:
/// `f(h) − q/(q + 1)·f(h − 1) − 1/(q + 1)·f(h + 1)`.
pub fn horocyclic_laplacian<S: Scalar>(f: &HeightSequence<S>) -> HeightSequence<S> {
    let q = f.q();
    let qi = q as i64;
    let down = S::from_ratio(qi, qi + 1, q);
    let up = S::from_ratio(1, qi + 1, q);
    let (Some(lo), Some(hi)) = (f.min_key(), f.max_key()) else {
        return HeightSequence::new(q);
    };
    HeightSequence::from_pairs(
        q,
        (lo - 1..=hi + 1).map(|h| (h, f.get(h) - f.get(h - 1) * &down - f.get(h + 1) * &up)),
    )
}

/// Radial part of `L^T`: `f(0) − f(1)` at 0 and
/// `f(n) − f(n − 1)/(q + 1) − q·f(n + 1)/(q + 1)` for `n ≥ 1`.
pub fn radial_laplacian<S: Scalar>(p: &RadialProfile<S>) -> RadialProfile<S> {
    let q = p.q();
    let Some(hi) = p.max_key() else {
        return RadialProfile::new(q);
    };
    RadialProfile::from_pairs(
        q,
        (0..=hi + 1).map(|n| (n, radial_laplacian_at(q, n, |k| p.get(k)))),
    )
}

/// `(rad L)_n` applied to an arbitrary sequence given pointwise.
pub fn radial_laplacian_at<S: Scalar, F: Fn(u32) -> S>(q: u32, n: u32, f: F) -> S {
    if n == 0 {
        f(0) - f(1)
    } else {
        let qi = q as i64;
        f(n) - f(n - 1) * S::from_ratio(1, qi + 1, q) - f(n + 1) * S::from_ratio(qi, qi + 1, q)
    }
}

/// `L^T f(x)` for a function given pointwise.
pub fn laplacian_at<S: Scalar, F: Fn(&VertexAddress) -> S>(q: u32, x: &VertexAddress, f: F) -> S {
    let sum = x.neighbors(q).iter().fold(S::zero(q), |acc, y| acc + f(y));
    f(x) - sum * S::from_ratio(1, q as i64 + 1, q)
}

fn local_operator<S, F>(
    f: &TreeFunction<S>,
    reach: u32,
    ball: &Ball,
    what: &str,
    op: F,
) -> Result<TreeFunction<S>>
where
    S: Scalar,
    F: Fn(&VertexAddress) -> S + Sync,
{
    let Some(radius) = f.support_radius() else {
        return Ok(TreeFunction::zero(f.q()));
    };
    ball.require(radius, reach, what)?;
    Ok(TreeFunction::tabulate(
        f.q(),
        f.resolution(),
        radius + reach,
        op,
    ))
}

/// `Σ_{y ∈ S(x, 1)} f(y)` as a function of `x`.
pub fn neighbor_sum<S: Scalar>(f: &TreeFunction<S>, ball: &Ball) -> Result<TreeFunction<S>> {
    let q = f.q();
    local_operator(f, 1, ball, "neighbour sum", |x| {
        x.neighbors(q)
            .iter()
            .fold(S::zero(q), |acc, y| acc + f.get(y))
    })
}

/// `L^T f(x) = f(x) − (q + 1)^{−1} Σ_{y ∈ S(x, 1)} f(y)`.
pub fn laplacian_tree<S: Scalar>(f: &TreeFunction<S>, ball: &Ball) -> Result<TreeFunction<S>> {
    let q = f.q();
    local_operator(f, 1, ball, "tree Laplacian", |x| {
        laplacian_at(q, x, |y| f.get(y))
    })
}

/// The 2-step Laplacian `f(x) − (q(q + 1))^{−1} Σ_{y ∈ S(x, 2)} f(y)`.
pub fn two_step_laplacian<S: Scalar>(f: &TreeFunction<S>, ball: &Ball) -> Result<TreeFunction<S>> {
    let q = f.q();
    let qi = q as i64;
    let w = S::from_ratio(1, qi * (qi + 1), q);
    local_operator(f, 2, ball, "2-step Laplacian", |x| {
        let sum = sphere_around(q, x, 2)
            .iter()
            .fold(S::zero(q), |acc, y| acc + f.get(y));
        f.get(x) - sum * &w
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{RadialProfile, Site};
    use crate::scalar::QSurd;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::cmp::Ordering;

    type F = TreeFunction<QSurd>;

    fn r(n: i64, d: i64, q: u32) -> QSurd {
        QSurd::from_ratio(n, d, q)
    }

    fn random_function(q: u32, radius: u32, rng: &mut ChaCha8Rng) -> F {
        let verts = Ball::new(q, radius).unwrap().vertices();
        F::from_entries(
            q,
            verts
                .into_iter()
                .map(|x| (x, r(rng.gen_range(-4..=4), 1, q))),
        )
        .unwrap()
    }

    #[test]
    fn spectral_constants() {
        let c = SpectralConstants::<QSurd>::new(2);
        assert_eq!(c.gamma, QSurd::q_pow_half(1, 2) * r(2, 3, 2));
        assert_eq!(c.gamma_tilde, r(1, 6, 2));
        for q in [2, 3, 4, 7] {
            let c = SpectralConstants::<QSurd>::new(q);
            assert_eq!(c.gamma.cmp_zero(), Ordering::Greater);
            assert_eq!((QSurd::one(q) - &c.gamma).cmp_zero(), Ordering::Greater);
            assert_eq!(
                (QSurd::one(q) - &c.gamma_tilde).cmp_zero(),
                Ordering::Greater
            );
            assert!((c.tau - 2.0 * std::f64::consts::PI / (q as f64).ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn line_laplacian_of_delta() {
        let q = 2;
        let d = HeightSequence::from_pairs(q, [(0, QSurd::one(q))]);
        let l = laplacian_line(&d);
        assert_eq!(l.get(0), QSurd::one(q));
        assert_eq!(l.get(1), r(-1, 2, q));
        assert_eq!(l.get(-1), r(-1, 2, q));
        let constant = HeightSequence::from_pairs(q, (-5..=5).map(|h| (h, r(3, 1, q))));
        let lc = laplacian_line(&constant);
        for h in -4..=4 {
            assert!(lc.get(h).is_zero());
        }
    }

    #[test]
    fn horocyclic_identity() {
        for q in [2, 3, 5] {
            let gamma = SpectralConstants::<QSurd>::new(q).gamma;
            for center in -3..=3 {
                let f = HeightSequence::from_pairs(
                    q,
                    [(center, QSurd::one(q)), (center + 2, r(-2, 3, q))],
                );
                let direct = horocyclic_laplacian(&f);
                let conj = HeightSequence::from_pairs(
                    q,
                    f.iter()
                        .map(|(h, v)| (*h, v.clone() * QSurd::q_pow_half(-h, q))),
                );
                let line = laplacian_line(&conj);
                for h in center - 3..=center + 5 {
                    let rhs = gamma.clone() * QSurd::q_pow_half(h, q) * line.get(h)
                        + (QSurd::one(q) - &gamma) * f.get(h);
                    assert_eq!(direct.get(h), rhs, "q {q} h {h}");
                }
            }
        }
    }

    #[test]
    fn tree_laplacian_on_horocyclic_functions() {
        let q = 3;
        let f =
            HeightSequence::from_pairs(q, [(-1, r(2, 1, q)), (0, r(1, 1, q)), (2, r(-5, 2, q))]);
        let lf = horocyclic_laplacian(&f);
        for x in Ball::new(q, 3).unwrap().vertices() {
            let v = laplacian_at(q, &x, |y| f.get(y.height()));
            assert_eq!(v, lf.get(x.height()), "{x}");
        }
    }

    #[test]
    fn tree_laplacian_examples() {
        let q = 2;
        let ball = Ball::new(q, 5).unwrap();
        let o = VertexAddress::origin();
        let l = laplacian_tree(&F::delta(q, &o).unwrap(), &ball).unwrap();
        assert_eq!(l.get(&o), QSurd::one(q));
        for y in sphere_around(q, &o, 1) {
            assert_eq!(l.get(&y), r(-1, 3, q));
        }
        assert_eq!(l.site_count(), 2);
        let c = F::from_entries(
            q,
            Ball::new(q, 3)
                .unwrap()
                .vertices()
                .into_iter()
                .map(|x| (x, r(4, 1, q))),
        )
        .unwrap();
        let lc = laplacian_tree(&c, &ball).unwrap();
        for x in Ball::new(q, 2).unwrap().vertices() {
            assert!(lc.get(&x).is_zero());
        }
        assert!(laplacian_tree(&c, &Ball::new(q, 3).unwrap()).is_err());
    }

    #[test]
    fn radial_laplacian_examples() {
        let q = 2;
        let d = RadialProfile::from_pairs(q, [(0, QSurd::one(q))]);
        let l = radial_laplacian(&d);
        assert_eq!(l.get(0), QSurd::one(q));
        assert_eq!(l.get(1), r(-1, 3, q));
        let c = RadialProfile::from_pairs(q, (0..8).map(|n| (n, r(5, 1, q))));
        let lc = radial_laplacian(&c);
        for n in 0..7 {
            assert!(lc.get(n).is_zero());
        }
    }

    #[test]
    fn tree_laplacian_preserves_radiality() {
        for q in [2, 3] {
            let ball = Ball::new(q, 8).unwrap();
            let p = RadialProfile::from_pairs(
                q,
                [(0, r(1, 1, q)), (1, r(-2, 1, q)), (3, QSurd::sqrt_q(q))],
            );
            let lt = laplacian_tree(&F::from_radial(&p), &ball).unwrap();
            assert_eq!(lt.to_radial().unwrap(), radial_laplacian(&p));
        }
    }

    #[test]
    fn spherical_means_commute_with_laplacian() {
        use crate::function::spherical_mean;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for q in [2, 3] {
            let ball = Ball::new(q, 10).unwrap();
            let f = random_function(q, 2, &mut rng);
            let lf = laplacian_tree(&f, &ball).unwrap();
            for x in Ball::new(q, 2).unwrap().vertices().iter().step_by(3) {
                for n in 0..=4 {
                    let lhs = spherical_mean(&lf, x, n, &ball).unwrap();
                    let rhs =
                        radial_laplacian_at(q, n, |k| spherical_mean(&f, x, k, &ball).unwrap());
                    assert_eq!(lhs, rhs, "q {q} x {x} n {n}");
                }
            }
        }
    }

    #[test]
    fn two_step_examples_and_identity() {
        let q = 2;
        let ball = Ball::new(q, 6).unwrap();
        let o = VertexAddress::origin();
        let d = F::delta(q, &o).unwrap();
        let lt = two_step_laplacian(&d, &ball).unwrap();
        assert_eq!(lt.get(&o), QSurd::one(q));
        for y in sphere_around(q, &o, 2) {
            assert_eq!(lt.get(&y), r(-1, 6, q));
        }
        for y in sphere_around(q, &o, 1) {
            assert!(lt.get(&y).is_zero());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for q in [2, 3, 4] {
            let ball = Ball::new(q, 6).unwrap();
            let f = random_function(q, 2, &mut rng);
            let l = laplacian_tree(&f, &ball).unwrap();
            let two_minus_l = &f.scale(&r(2, 1, q)) - &l;
            let rhs =
                laplacian_tree(&two_minus_l, &ball)
                    .unwrap()
                    .scale(&r(q as i64 + 1, q as i64, q));
            assert_eq!(two_step_laplacian(&f, &ball).unwrap(), rhs);
        }
    }

    #[test]
    fn rayleigh_quotients_and_self_adjointness() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for q in [2, 3, 4] {
            let ball = Ball::new(q, 6).unwrap();
            let c = SpectralConstants::<QSurd>::new(q);
            let upper_tilde = r(q as i64 + 1, q as i64, q);
            for _ in 0..4 {
                let f = random_function(q, 2, &mut rng);
                let g = random_function(q, 2, &mut rng);
                let ff = f.norm_squared();
                if ff.is_zero() {
                    continue;
                }
                let lf = laplacian_tree(&f, &ball).unwrap();
                let num = lf.inner(&f).unwrap();
                let lo = QSurd::one(q) - &c.gamma;
                let hi = QSurd::one(q) + &c.gamma;
                assert_ne!((num.clone() - lo * &ff).cmp_zero(), Ordering::Less);
                assert_ne!((hi * &ff - &num).cmp_zero(), Ordering::Less);
                let tf = two_step_laplacian(&f, &ball).unwrap();
                let num2 = tf.inner(&f).unwrap();
                assert_ne!(
                    (num2.clone() - c.gamma_tilde.clone() * &ff).cmp_zero(),
                    Ordering::Less
                );
                assert_ne!(
                    (upper_tilde.clone() * &ff - &num2).cmp_zero(),
                    Ordering::Less
                );
                let lg = laplacian_tree(&g, &ball).unwrap();
                assert_eq!(lf.inner(&g).unwrap(), f.inner(&lg).unwrap());
                let tg = two_step_laplacian(&g, &ball).unwrap();
                assert_eq!(tf.inner(&g).unwrap(), f.inner(&tg).unwrap());
            }
        }
    }

    #[test]
    fn compressed_operator_matches_explicit_vertices() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = 2;
        let ball = Ball::new(q, 7).unwrap();
        let f = random_function(q, 2, &mut rng);
        let l = two_step_laplacian(&laplacian_tree(&f, &ball).unwrap(), &ball).unwrap();
        for x in Ball::new(q, 5).unwrap().vertices() {
            let lx = laplacian_at(q, &x, |y| f.get(y));
            let direct = {
                let s2: QSurd = sphere_around(q, &x, 2)
                    .iter()
                    .fold(QSurd::zero(q), |acc, y| {
                        acc + laplacian_at(q, y, |z| f.get(z))
                    });
                lx - s2 * r(1, 6, q)
            };
            assert_eq!(l.get(&x), direct, "{x}");
        }
        assert!(l
            .sites()
            .all(|(s, _)| !matches!(s, Site::Cone { depth: 0, .. })));
    }
}
