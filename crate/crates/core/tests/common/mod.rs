//! Dense oracle: one value per vertex of a ball, no orbit compression.

#![allow(dead_code)]

use std::collections::BTreeMap;

use treewave::{Ball, QSurd, Scalar, TreeFunction, VertexAddress};

pub type Dense = BTreeMap<VertexAddress, QSurd>;

pub fn densify(f: &TreeFunction<QSurd>, ball: &Ball) -> Dense {
    ball.vertices()
        .into_iter()
        .map(|x| (x.clone(), f.get(&x)))
        .collect()
}

fn neighbour_sum(u: &Dense, x: &VertexAddress, q: u32) -> QSurd {
    x.neighbors(q)
        .iter()
        .filter_map(|y| u.get(y))
        .fold(QSurd::zero(q), |acc, v| acc + v)
}

/// Leapfrog `u(n+1) = q^{-1/2} Σ_{y~x} u(n)(y) − u(n−1)` for `n = 0..=steps`.
/// Values outside the ball are taken as zero, so the ball must hold the light cone.
pub fn leapfrog(f: &Dense, g: &Dense, q: u32, steps: usize) -> Vec<Dense> {
    let w = QSurd::q_pow_half(-1, q);
    let half_w = w.clone() * &QSurd::from_ratio(1, 2, q);
    let first: Dense = f
        .keys()
        .map(|x| (x.clone(), half_w.clone() * &neighbour_sum(f, x, q) + &g[x]))
        .collect();
    let mut out = vec![f.clone(), first];
    while out.len() <= steps {
        let (prev, curr) = (&out[out.len() - 2], &out[out.len() - 1]);
        let next: Dense = curr
            .keys()
            .map(|x| (x.clone(), w.clone() * &neighbour_sum(curr, x, q) - &prev[x]))
            .collect();
        out.push(next);
    }
    out.truncate(steps + 1);
    out
}

pub fn norm_squared(u: &Dense, q: u32) -> QSurd {
    u.values()
        .fold(QSurd::zero(q), |acc, v| acc + &(v.clone() * v))
}

/// `Σ_x Σ_{d(x,y)=2} (u(x) − u(y))²` by walking two edges from every vertex.
pub fn two_step_pairs(u: &Dense, q: u32) -> QSurd {
    let zero = QSurd::zero(q);
    let mut total = QSurd::zero(q);
    for (x, ux) in u {
        for m in x.neighbors(q) {
            for y in m.neighbors(q) {
                if &y == x {
                    continue;
                }
                let d = ux.clone() - u.get(&y).unwrap_or(&zero);
                total = total + &(d.clone() * &d);
            }
        }
    }
    total
}

/// `(K, P)` with `K = ‖u(n+1) − u(n−1)‖²/8` and the pair form of `P`.
pub fn kinetic_potential(prev: &Dense, now: &Dense, next: &Dense, q: u32) -> (QSurd, QSurd) {
    let qi = q as i64;
    let diff: Dense = next
        .iter()
        .map(|(x, v)| (x.clone(), v.clone() - &prev[x]))
        .collect();
    let kinetic = norm_squared(&diff, q) * &QSurd::from_ratio(1, 8, q);
    let potential = two_step_pairs(now, q) * &QSurd::from_ratio(1, 16 * qi, q)
        - &(norm_squared(now, q) * &QSurd::from_ratio((qi - 1) * (qi - 1), 8 * qi, q));
    (kinetic, potential)
}
