//! Vertex addressing, metric and horocyclic height on `T_q`.
//!
//! A vertex is the label word of the geodesic from the origin to it. The first
//! label picks one of the `q + 1` neighbours of the origin, every later label
//! one of the `q` children of the current vertex, so words never backtrack and
//! `|x|` is the word length.
//!
//! The distinguished geodesic ray `ω(k)` is the all-zero word of length `k`,
//! and heights increase along it: `h(x) = 2·(leading zero labels) − |x|`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Label = u32;

pub(crate) fn check_q(q: u32) -> Result<()> {
    if q < 2 {
        Err(Error::Parameter(format!(
            "branching parameter must be at least 2, got {q}"
        )))
    } else {
        Ok(())
    }
}

/// A vertex of `T_q`, given by its backtrack-free label word from the origin.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexAddress(Vec<Label>);

impl VertexAddress {
    pub fn origin() -> Self {
        VertexAddress(Vec::new())
    }

    pub fn new(q: u32, labels: Vec<Label>) -> Result<Self> {
        check_q(q)?;
        for (i, &l) in labels.iter().enumerate() {
            let limit = if i == 0 { q } else { q - 1 };
            if l > limit {
                return Err(Error::Parameter(format!(
                    "label {l} at position {i} exceeds {limit} for q = {q}"
                )));
            }
        }
        Ok(VertexAddress(labels))
    }

    pub(crate) fn from_labels(labels: Vec<Label>) -> Self {
        VertexAddress(labels)
    }

    /// A vertex with depth uniform in `0..=max_depth` and uniform labels.
    pub fn random<R: rand::Rng + ?Sized>(q: u32, max_depth: u32, rng: &mut R) -> Self {
        let depth = rng.gen_range(0..=max_depth);
        VertexAddress(
            (0..depth)
                .map(|i| {
                    if i == 0 {
                        rng.gen_range(0..=q)
                    } else {
                        rng.gen_range(0..q)
                    }
                })
                .collect(),
        )
    }

    /// `ω(k)`, the point at distance `k` along the distinguished ray.
    pub fn geodesic(k: u32) -> Self {
        VertexAddress(vec![0; k as usize])
    }

    /// Parses `"0,1,0"`; the empty string is the origin.
    pub fn parse(q: u32, s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return VertexAddress::new(q, Vec::new());
        }
        let labels = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<Label>()
                    .map_err(|_| Error::Parse(format!("bad vertex label `{t}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        VertexAddress::new(q, labels)
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    /// Distance `|x|` to the origin.
    pub fn depth(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn is_origin(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parent(&self) -> Option<Self> {
        if self.0.is_empty() {
            None
        } else {
            Some(VertexAddress(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn child(&self, label: Label) -> Self {
        let mut v = self.0.clone();
        v.push(label);
        VertexAddress(v)
    }

    pub fn prefix(&self, len: u32) -> Self {
        VertexAddress(self.0[..len as usize].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Self) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn common_prefix_len(&self, other: &Self) -> u32 {
        self.0
            .iter()
            .zip(&other.0)
            .take_while(|(a, b)| a == b)
            .count() as u32
    }

    /// Graph distance `|x| + |y| − 2·lcp(x, y)`.
    pub fn distance(&self, other: &Self) -> u32 {
        self.depth() + other.depth() - 2 * self.common_prefix_len(other)
    }

    /// Horocyclic height with respect to the end of `ω`.
    pub fn height(&self) -> i64 {
        let zeros = self.0.iter().take_while(|&&l| l == 0).count() as i64;
        2 * zeros - self.0.len() as i64
    }

    /// Number of children (neighbours farther from the origin).
    pub fn child_count(&self, q: u32) -> u32 {
        if self.is_origin() {
            q + 1
        } else {
            q
        }
    }

    /// The `q + 1` neighbours, parent first, then children in label order.
    pub fn neighbors(&self, q: u32) -> Vec<Self> {
        let mut out = Vec::with_capacity(q as usize + 1);
        if let Some(p) = self.parent() {
            out.push(p);
        }
        for l in 0..self.child_count(q) {
            out.push(self.child(l));
        }
        out
    }

    /// All descendants at relative depth `k`, in lexicographic order.
    pub fn descendants(&self, q: u32, k: u32) -> Vec<Self> {
        let mut layer = vec![self.clone()];
        for _ in 0..k {
            layer = layer
                .iter()
                .flat_map(|v| (0..v.child_count(q)).map(move |l| v.child(l)))
                .collect();
        }
        layer
    }
}

impl fmt::Display for VertexAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// `δ(n) = |S(x, n)|`: 1 for `n = 0`, `(q + 1)·q^{n−1}` otherwise.
pub fn sphere_volume(q: u32, n: u32) -> BigInt {
    if n == 0 {
        BigInt::one()
    } else {
        BigInt::from(q + 1) * num_traits::pow(BigInt::from(q), n as usize - 1)
    }
}

/// The truncation domain `B(0, R)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ball {
    q: u32,
    radius: u32,
}

impl Ball {
    pub fn new(q: u32, radius: u32) -> Result<Self> {
        check_q(q)?;
        Ok(Ball { q, radius })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn contains(&self, x: &VertexAddress) -> bool {
        x.depth() <= self.radius
    }

    /// `1 + Σ_{n=1}^{R} (q + 1)·q^{n−1}`.
    pub fn vertex_count(&self) -> BigInt {
        (0..=self.radius).fold(BigInt::zero(), |acc, n| acc + sphere_volume(self.q, n))
    }

    /// Fails unless every vertex within `reach` of a vertex at depth `depth`
    /// stays inside the ball.
    pub fn require(&self, depth: u32, reach: u32, what: &str) -> Result<()> {
        if depth + reach > self.radius {
            Err(Error::Truncation(format!(
                "{what} reaches depth {} beyond truncation radius {}",
                depth + reach,
                self.radius
            )))
        } else {
            Ok(())
        }
    }

    /// Every vertex of the ball, sphere by sphere, lexicographic within a sphere.
    pub fn vertices(&self) -> Vec<VertexAddress> {
        (0..=self.radius)
            .flat_map(|n| sphere_around(self.q, &VertexAddress::origin(), n))
            .collect()
    }
}

/// `S(center, n)` in lexicographic order. Fails if the sphere leaves `ball`.
pub fn sphere(center: &VertexAddress, n: u32, ball: &Ball) -> Result<Vec<VertexAddress>> {
    ball.require(center.depth(), n, &format!("sphere S({center}, {n})"))?;
    Ok(sphere_around(ball.q, center, n))
}

/// Untruncated sphere enumeration.
pub(crate) fn sphere_around(q: u32, center: &VertexAddress, n: u32) -> Vec<VertexAddress> {
    let depth = center.depth();
    let mut out = Vec::new();
    for up in 0..=n.min(depth) {
        let ancestor = center.prefix(depth - up);
        let down = n - up;
        if down == 0 {
            out.push(ancestor);
            continue;
        }
        let blocked = (up > 0).then(|| center.labels()[(depth - up) as usize]);
        for l in 0..ancestor.child_count(q) {
            if Some(l) == blocked {
                continue;
            }
            out.extend(ancestor.child(l).descendants(q, down - 1));
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{HashMap, VecDeque};

    fn v(q: u32, s: &str) -> VertexAddress {
        VertexAddress::parse(q, s).unwrap()
    }

    /// Breadth-first distances over explicit parent/child edges of a ball.
    fn bfs(q: u32, ball: &Ball, from: &VertexAddress) -> HashMap<VertexAddress, u32> {
        let mut dist = HashMap::new();
        let mut queue = VecDeque::new();
        dist.insert(from.clone(), 0);
        queue.push_back(from.clone());
        while let Some(x) = queue.pop_front() {
            let d = dist[&x];
            for y in x.neighbors(q) {
                if ball.contains(&y) && !dist.contains_key(&y) {
                    dist.insert(y.clone(), d + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    #[test]
    fn distance_examples() {
        assert_eq!(
            VertexAddress::origin().distance(&VertexAddress::origin()),
            0
        );
        assert_eq!(v(2, "0").distance(&v(2, "0,0")), 1);
        assert_eq!(v(2, "0,1").distance(&v(2, "1")), 3);
        let ball = Ball::new(2, 3).unwrap();
        assert_eq!(bfs(2, &ball, &v(2, "0,1"))[&v(2, "1")], 3);
    }

    #[test]
    fn labels_are_validated() {
        assert!(VertexAddress::new(2, vec![2, 1]).is_ok());
        assert!(VertexAddress::new(2, vec![3]).is_err());
        assert!(VertexAddress::new(2, vec![0, 2]).is_err());
        assert!(VertexAddress::parse(2, "0,x").is_err());
        assert_eq!(v(3, ""), VertexAddress::origin());
        assert_eq!(v(3, "0,2,1").to_string(), "0,2,1");
    }

    #[test]
    fn height_examples() {
        assert_eq!(VertexAddress::origin().height(), 0);
        assert_eq!(v(2, "0,0,0").height(), 3);
        assert_eq!(v(2, "1").height(), -1);
        let ball = Ball::new(2, 1).unwrap();
        let s1 = sphere(&VertexAddress::origin(), 1, &ball).unwrap();
        assert_eq!(s1.iter().filter(|x| x.height() == 1).count(), 1);
        assert_eq!(s1.iter().filter(|x| x.height() == -1).count(), 2);
    }

    #[test]
    fn height_is_limit_of_busemann_differences() {
        let q = 3;
        for x in Ball::new(q, 4).unwrap().vertices() {
            let k = 20;
            let limit = k as i64 - x.distance(&VertexAddress::geodesic(k)) as i64;
            assert_eq!(x.height(), limit, "{x}");
        }
    }

    #[test]
    fn sphere_volumes() {
        let o = VertexAddress::origin();
        let ball = Ball::new(2, 2).unwrap();
        assert_eq!(sphere(&o, 0, &ball).unwrap().len(), 1);
        assert_eq!(sphere(&o, 1, &ball).unwrap().len(), 3);
        assert_eq!(sphere(&o, 2, &ball).unwrap().len(), 6);
        let ball = Ball::new(3, 6).unwrap();
        for x in Ball::new(3, 3).unwrap().vertices() {
            assert_eq!(sphere(&x, 2, &ball).unwrap().len(), 12, "{x}");
        }
    }

    #[test]
    fn sphere_outside_ball_is_an_error() {
        let ball = Ball::new(2, 2).unwrap();
        assert!(matches!(
            sphere(&v(2, "0"), 2, &ball),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn ball_count_matches_spheres() {
        for q in [2, 3, 4] {
            let ball = Ball::new(q, 4).unwrap();
            assert_eq!(BigInt::from(ball.vertices().len()), ball.vertex_count());
            let total: BigInt = (0..=4).map(|n| sphere_volume(q, n)).sum();
            assert_eq!(total, ball.vertex_count());
        }
    }

    #[test]
    fn metric_agrees_with_bfs() {
        for q in [2, 3] {
            let ball = Ball::new(q, 4).unwrap();
            let verts = ball.vertices();
            for x in verts.iter().step_by(7) {
                let d = bfs(q, &ball, x);
                for y in &verts {
                    assert_eq!(x.distance(y), d[y], "{x} {y}");
                    assert_eq!(x.distance(y), y.distance(x));
                }
            }
        }
    }

    #[test]
    fn triangle_inequality() {
        let verts = Ball::new(2, 3).unwrap().vertices();
        for x in &verts {
            for y in verts.iter().step_by(3) {
                for z in verts.iter().step_by(5) {
                    assert!(x.distance(z) <= x.distance(y) + y.distance(z));
                }
            }
        }
    }

    #[test]
    fn spheres_match_bfs_levels() {
        let q = 2;
        let ball = Ball::new(q, 6).unwrap();
        for x in Ball::new(q, 2).unwrap().vertices() {
            let d = bfs(q, &ball, &x);
            for n in 0..=4 {
                let mut expected: Vec<_> = d
                    .iter()
                    .filter(|(_, &dd)| dd == n)
                    .map(|(y, _)| y.clone())
                    .collect();
                expected.sort();
                assert_eq!(sphere(&x, n, &ball).unwrap(), expected);
            }
        }
    }

    #[test]
    fn height_partition_of_spheres() {
        for q in [2, 3] {
            let ball = Ball::new(q, 5).unwrap();
            for n in 0..=5u32 {
                let s = sphere(&VertexAddress::origin(), n, &ball).unwrap();
                let mut heights: Vec<i64> = s.iter().map(|x| x.height()).collect();
                heights.sort();
                heights.dedup();
                let expected: Vec<i64> = (0..=n as i64).map(|k| -(n as i64) + 2 * k).collect();
                assert_eq!(heights, expected);
                assert_eq!(BigInt::from(s.len()), sphere_volume(q, n));
            }
        }
    }

    #[test]
    fn one_neighbor_up_q_down() {
        for q in [2, 3] {
            for x in Ball::new(q, 3).unwrap().vertices() {
                let h = x.height();
                let nb = x.neighbors(q);
                assert_eq!(nb.iter().filter(|y| y.height() == h + 1).count(), 1);
                assert_eq!(
                    nb.iter().filter(|y| y.height() == h - 1).count(),
                    q as usize
                );
            }
        }
    }

    #[test]
    fn geodesic_is_isometric() {
        for j in 0..6 {
            for k in 0..6 {
                let d = VertexAddress::geodesic(j).distance(&VertexAddress::geodesic(k));
                assert_eq!(d as i64, (j as i64 - k as i64).abs());
            }
        }
    }
}
