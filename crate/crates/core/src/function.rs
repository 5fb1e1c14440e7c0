//! Finitely supported functions on `T_q`, radial profiles and height sequences.
//!
//! A [`TreeFunction`] supported in `B(0, R)` is invariant under every tree
//! automorphism fixing `B(0, R)` pointwise, and so are its images under the
//! radial convolution operators used throughout the crate (Laplacians,
//! spherical sums, wave propagators). Such a function is stored on the orbits
//! of that group, called [`Site`]s here: one value per vertex of `B(0, R)`
//! plus one value per *cone*, the set of descendants at a fixed depth below a
//! vertex of `S(0, R)`. Storage is linear in the radius instead of
//! exponential, and every sum over `T_q` becomes a finite sum of
//! `multiplicity × value`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tree::{check_q, sphere_around, sphere_volume, Ball, VertexAddress};

/// An orbit of the automorphisms fixing `B(0, R)` pointwise.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Site {
    /// A single vertex with `|x| ≤ R`.
    Vertex(VertexAddress),
    /// All descendants of `apex` (with `|apex| = R`) at relative depth `depth ≥ 1`.
    Cone { apex: VertexAddress, depth: u32 },
}

impl Site {
    /// Distance to the origin of every vertex in the site.
    pub fn radius(&self) -> u32 {
        match self {
            Site::Vertex(x) => x.depth(),
            Site::Cone { apex, depth } => apex.depth() + depth,
        }
    }

    /// A vertex of the site; cones use the all-zero continuation of the apex.
    pub fn representative(&self) -> VertexAddress {
        match self {
            Site::Vertex(x) => x.clone(),
            Site::Cone { apex, depth } => {
                let mut labels = apex.labels().to_vec();
                labels.extend(std::iter::repeat_n(0, *depth as usize));
                VertexAddress::from_labels(labels)
            }
        }
    }

    /// Number of vertices in the site.
    pub fn multiplicity(&self, q: u32) -> BigInt {
        match self {
            Site::Vertex(_) => BigInt::one(),
            Site::Cone { apex, depth } => {
                BigInt::from(apex.child_count(q))
                    * num_traits::pow(BigInt::from(q), *depth as usize - 1)
            }
        }
    }

    /// Parses `"0,1"` (a vertex) or `"0,1,*,*"` (a cone below `0,1` at depth 2).
    pub fn parse(q: u32, s: &str) -> Result<Self> {
        let s = s.trim();
        let stars = s.split(',').filter(|t| t.trim() == "*").count();
        if stars == 0 {
            return Ok(Site::Vertex(VertexAddress::parse(q, s)?));
        }
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let split = parts.len() - stars;
        if parts[split..].iter().any(|t| *t != "*") {
            return Err(Error::Parse(format!(
                "wildcards must trail the apex labels in `{s}`"
            )));
        }
        let apex = VertexAddress::parse(q, &parts[..split].join(","))?;
        Ok(Site::Cone {
            apex,
            depth: stars as u32,
        })
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Vertex(x) => write!(f, "{x}"),
            Site::Cone { apex, depth } => {
                write!(f, "{apex}")?;
                for i in 0..*depth {
                    if i > 0 || !apex.is_origin() {
                        f.write_str(",")?;
                    }
                    f.write_str("*")?;
                }
                Ok(())
            }
        }
    }
}

/// All sites of resolution `resolution` lying within `radius` of the origin.
pub fn sites_within(q: u32, resolution: u32, radius: u32) -> Vec<Site> {
    let origin = VertexAddress::origin();
    let mut out: Vec<Site> = (0..=resolution.min(radius))
        .flat_map(|n| sphere_around(q, &origin, n))
        .map(Site::Vertex)
        .collect();
    if radius > resolution {
        for apex in sphere_around(q, &origin, resolution) {
            for depth in 1..=radius - resolution {
                out.push(Site::Cone {
                    apex: apex.clone(),
                    depth,
                });
            }
        }
    }
    out
}

/// Number of descendants of `apex` at relative depth `k` lying at each
/// distance from `x`.
pub(crate) fn cone_distance_counts(
    q: u32,
    x: &VertexAddress,
    apex: &VertexAddress,
    k: u32,
) -> Vec<(u32, BigInt)> {
    let qb = BigInt::from(q);
    let pow = |e: u32| num_traits::pow(qb.clone(), e as usize);
    let c0 = apex.child_count(q);
    if !apex.is_prefix_of(x) {
        return vec![(x.distance(apex) + k, BigInt::from(c0) * pow(k - 1))];
    }
    let j = x.depth() - apex.depth();
    let mut out = Vec::with_capacity(j.min(k) as usize + 1);
    for l in 0..j.min(k) {
        let choices = if l == 0 { c0 } else { q };
        out.push((j + k - 2 * l, BigInt::from(choices - 1) * pow(k - l - 1)));
    }
    if k <= j {
        out.push((j - k, BigInt::one()));
    } else if j == 0 {
        out.push((k, BigInt::from(c0) * pow(k - 1)));
    } else {
        out.push((k - j, pow(k - j)));
    }
    out
}

/// A finitely supported function `T_q → S`, stored per [`Site`].
#[derive(Clone, Debug)]
pub struct TreeFunction<S> {
    q: u32,
    resolution: u32,
    values: BTreeMap<Site, S>,
}

impl<S: Scalar> TreeFunction<S> {
    pub fn zero(q: u32) -> Self {
        TreeFunction {
            q,
            resolution: 0,
            values: BTreeMap::new(),
        }
    }

    /// Builds a function from explicit vertex values; repeated vertices add up.
    pub fn from_entries<I>(q: u32, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexAddress, S)>,
    {
        check_q(q)?;
        let mut values: BTreeMap<Site, S> = BTreeMap::new();
        let mut resolution = 0;
        for (x, v) in entries {
            VertexAddress::new(q, x.labels().to_vec())?;
            resolution = resolution.max(x.depth());
            let slot = values.entry(Site::Vertex(x)).or_insert_with(|| S::zero(q));
            *slot = slot.clone() + &v;
        }
        values.retain(|_, v| !v.is_zero());
        Ok(TreeFunction {
            q,
            resolution,
            values,
        })
    }

    /// Builds a function directly from site values at a given resolution.
    pub fn from_sites<I>(q: u32, resolution: u32, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Site, S)>,
    {
        check_q(q)?;
        let mut values = BTreeMap::new();
        for (site, v) in entries {
            let ok = match &site {
                Site::Vertex(x) => x.depth() <= resolution,
                Site::Cone { apex, depth } => apex.depth() == resolution && *depth >= 1,
            };
            if !ok {
                return Err(Error::Parameter(format!(
                    "site `{site}` does not belong to resolution {resolution}"
                )));
            }
            if !v.is_zero() {
                values.insert(site, v);
            }
        }
        Ok(TreeFunction {
            q,
            resolution,
            values,
        })
    }

    /// The indicator of a single vertex.
    pub fn delta(q: u32, x: &VertexAddress) -> Result<Self> {
        Self::from_entries(q, [(x.clone(), S::one(q))])
    }

    /// The radial function `x ↦ profile(|x|)`.
    pub fn from_radial(profile: &RadialProfile<S>) -> Self {
        let q = profile.q();
        let values = profile
            .iter()
            .map(|(&n, v)| {
                let site = if n == 0 {
                    Site::Vertex(VertexAddress::origin())
                } else {
                    Site::Cone {
                        apex: VertexAddress::origin(),
                        depth: n,
                    }
                };
                (site, v.clone())
            })
            .collect();
        TreeFunction {
            q,
            resolution: 0,
            values,
        }
    }

    /// Evaluates `value(x)` on every site within `radius` at the given resolution.
    ///
    /// `value` must be constant on sites; this holds for images of site-invariant
    /// functions under radial operators.
    pub fn tabulate<F>(q: u32, resolution: u32, radius: u32, value: F) -> Self
    where
        F: Fn(&VertexAddress) -> S + Sync,
    {
        let values = sites_within(q, resolution, radius)
            .into_par_iter()
            .filter_map(|site| {
                let v = value(&site.representative());
                (!v.is_zero()).then_some((site, v))
            })
            .collect();
        TreeFunction {
            q,
            resolution,
            values,
        }
    }

    /// Integer values drawn uniformly from `-max_abs..=max_abs` on every vertex of `B(0, radius)`.
    pub fn random_integer<R: rand::Rng + ?Sized>(
        q: u32,
        radius: u32,
        max_abs: i64,
        rng: &mut R,
    ) -> Result<Self> {
        let vertices = Ball::new(q, radius)?.vertices();
        Self::from_entries(
            q,
            vertices
                .into_iter()
                .map(|x| (x, S::from_i64(rng.gen_range(-max_abs..=max_abs), q)))
                .collect::<Vec<_>>(),
        )
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Nonzero sites with their values, in canonical order.
    pub fn sites(&self) -> impl Iterator<Item = (&Site, &S)> {
        self.values.iter()
    }

    pub fn site_count(&self) -> usize {
        self.values.len()
    }

    /// The site containing `x` at this function's resolution.
    pub fn site_of(&self, x: &VertexAddress) -> Site {
        if x.depth() <= self.resolution {
            Site::Vertex(x.clone())
        } else {
            Site::Cone {
                apex: x.prefix(self.resolution),
                depth: x.depth() - self.resolution,
            }
        }
    }

    pub fn get(&self, x: &VertexAddress) -> S {
        self.values
            .get(&self.site_of(x))
            .cloned()
            .unwrap_or_else(|| S::zero(self.q))
    }

    /// Largest `|x|` in the support, `None` for the zero function.
    pub fn support_radius(&self) -> Option<u32> {
        self.values.keys().map(Site::radius).max()
    }

    /// The same function stored at a finer resolution.
    pub fn refine(&self, resolution: u32) -> Self {
        if resolution <= self.resolution {
            return self.clone();
        }
        let extra = resolution - self.resolution;
        let mut values = BTreeMap::new();
        for (site, v) in &self.values {
            match site {
                Site::Vertex(_) => {
                    values.insert(site.clone(), v.clone());
                }
                Site::Cone { apex, depth } if *depth <= extra => {
                    for y in apex.descendants(self.q, *depth) {
                        values.insert(Site::Vertex(y), v.clone());
                    }
                }
                Site::Cone { apex, depth } => {
                    for p in apex.descendants(self.q, extra) {
                        values.insert(
                            Site::Cone {
                                apex: p,
                                depth: depth - extra,
                            },
                            v.clone(),
                        );
                    }
                }
            }
        }
        TreeFunction {
            q: self.q,
            resolution,
            values,
        }
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        let r = self.resolution.max(other.resolution);
        (self.refine(r), other.refine(r))
    }

    fn check_same_q(&self, other: &Self) -> Result<()> {
        if self.q == other.q {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "functions on T_{} and T_{} cannot be combined",
                self.q, other.q
            )))
        }
    }

    fn combine(&self, other: &Self, sign: bool) -> Self {
        let (mut a, b) = self.aligned(other);
        for (site, v) in b.values {
            let slot = a.values.entry(site).or_insert_with(|| S::zero(self.q));
            *slot = if sign {
                slot.clone() + &v
            } else {
                slot.clone() - &v
            };
        }
        a.values.retain(|_, v| !v.is_zero());
        a
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_q(other)?;
        Ok(self.combine(other, true))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_q(other)?;
        Ok(self.combine(other, false))
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut values = BTreeMap::new();
        if !c.is_zero() {
            for (site, v) in &self.values {
                values.insert(site.clone(), v.clone() * c);
            }
        }
        TreeFunction {
            q: self.q,
            resolution: self.resolution,
            values,
        }
    }

    /// `Σ_x φ(x, f(x))` over the support, where `φ` is evaluated once per site.
    pub fn sum_by_site<F>(&self, phi: F) -> S
    where
        F: Fn(&Site, &S) -> S,
    {
        self.values.iter().fold(S::zero(self.q), |acc, (site, v)| {
            acc + S::from_bigint(&site.multiplicity(self.q), self.q) * phi(site, v)
        })
    }

    /// Real inner product `Σ_x f(x)·g(x)`.
    pub fn inner(&self, other: &Self) -> Result<S> {
        self.check_same_q(other)?;
        let (a, b) = self.aligned(other);
        Ok(a.sum_by_site(|site, v| match b.values.get(site) {
            Some(w) => v.clone() * w,
            None => S::zero(self.q),
        }))
    }

    /// `Σ_x |f(x)|²`.
    pub fn norm_squared(&self) -> S {
        self.sum_by_site(|_, v| v.square())
    }

    /// `Σ_x |f(x)|` in floating point.
    pub fn l1_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|(site, v)| {
                num_traits::ToPrimitive::to_f64(&site.multiplicity(self.q)).unwrap_or(f64::INFINITY)
                    * v.abs_f64()
            })
            .sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values
            .values()
            .map(Scalar::abs_f64)
            .fold(0.0, f64::max)
    }

    pub fn to_float(&self) -> TreeFunction<f64> {
        TreeFunction {
            q: self.q,
            resolution: self.resolution,
            values: self
                .values
                .iter()
                .map(|(s, v)| (s.clone(), v.to_f64()))
                .filter(|(_, v)| *v != 0.0)
                .collect(),
        }
    }

    /// Keeps only the sites accepted by `keep`.
    pub fn restrict<F: Fn(&Site) -> bool>(&self, keep: F) -> Self {
        TreeFunction {
            q: self.q,
            resolution: self.resolution,
            values: self
                .values
                .iter()
                .filter(|(s, _)| keep(s))
                .map(|(s, v)| (s.clone(), v.clone()))
                .collect(),
        }
    }

    /// The profile of a radial function; fails if `f` is not radial.
    pub fn to_radial(&self) -> Result<RadialProfile<S>> {
        let mut by_radius: BTreeMap<u32, Vec<(&Site, &S)>> = BTreeMap::new();
        for (site, v) in &self.values {
            by_radius.entry(site.radius()).or_default().push((site, v));
        }
        let mut profile = RadialProfile::new(self.q);
        for (n, entries) in by_radius {
            let count: BigInt = entries.iter().map(|(s, _)| s.multiplicity(self.q)).sum();
            let value = entries[0].1;
            if count != sphere_volume(self.q, n) || entries.iter().any(|(_, v)| *v != value) {
                return Err(Error::Domain(format!(
                    "function is not constant on the sphere of radius {n}"
                )));
            }
            profile.set(n, value.clone());
        }
        Ok(profile)
    }

    /// `Σ_{y : d(x, y) = d} f(y)` for every distance `d` that occurs.
    pub fn distance_histogram(&self, x: &VertexAddress) -> BTreeMap<u32, S> {
        let mut hist: BTreeMap<u32, S> = BTreeMap::new();
        let q = self.q;
        let mut bump = |d: u32, v: S| {
            let slot = hist.entry(d).or_insert_with(|| S::zero(q));
            *slot = slot.clone() + &v;
        };
        for (site, v) in &self.values {
            match site {
                Site::Vertex(y) => bump(x.distance(y), v.clone()),
                Site::Cone { apex, depth } => {
                    for (d, count) in cone_distance_counts(q, x, apex, *depth) {
                        bump(d, S::from_bigint(&count, q) * v);
                    }
                }
            }
        }
        hist
    }
}

impl<S: Scalar> PartialEq for TreeFunction<S> {
    fn eq(&self, other: &Self) -> bool {
        if self.q != other.q {
            return false;
        }
        if self.resolution == other.resolution {
            return self.values == other.values;
        }
        let (a, b) = self.aligned(other);
        a.values == b.values
    }
}

impl<S: Scalar> Add for &TreeFunction<S> {
    type Output = TreeFunction<S>;

    /// Panics on mismatched `q`; see [`TreeFunction::try_add`].
    fn add(self, rhs: Self) -> TreeFunction<S> {
        self.try_add(rhs).expect("mismatched branching parameters")
    }
}

impl<S: Scalar> Sub for &TreeFunction<S> {
    type Output = TreeFunction<S>;

    fn sub(self, rhs: Self) -> TreeFunction<S> {
        self.try_sub(rhs).expect("mismatched branching parameters")
    }
}

/// Spherical mean `f_x^♯(n) = δ(n)^{−1} Σ_{y ∈ S(x, n)} f(y)`.
pub fn spherical_mean<S: Scalar>(
    f: &TreeFunction<S>,
    x: &VertexAddress,
    n: u32,
    ball: &Ball,
) -> Result<S> {
    ball.require(x.depth(), n, &format!("spherical mean around {x}"))?;
    let q = f.q();
    let sum = f
        .distance_histogram(x)
        .remove(&n)
        .unwrap_or_else(|| S::zero(q));
    sum.checked_div(&S::from_bigint(&sphere_volume(q, n), q))
}

/// A finitely supported sequence indexed by `K`; absent keys are zero.
#[derive(Clone, Debug)]
pub struct Sequence<K, S> {
    q: u32,
    values: BTreeMap<K, S>,
}

/// `n ↦ f(n)` on `ℕ`, standing for the radial function `x ↦ f(|x|)`.
pub type RadialProfile<S> = Sequence<u32, S>;

/// `h ↦ f(h)` on `ℤ`, e.g. a function of the horocyclic height.
pub type HeightSequence<S> = Sequence<i64, S>;

impl<K: Ord + Copy, S: Scalar> Sequence<K, S> {
    pub fn new(q: u32) -> Self {
        Sequence {
            q,
            values: BTreeMap::new(),
        }
    }

    pub fn from_pairs<I: IntoIterator<Item = (K, S)>>(q: u32, pairs: I) -> Self {
        let mut s = Self::new(q);
        for (k, v) in pairs {
            let v = s.get(k) + &v;
            s.set(k, v);
        }
        s
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn get(&self, k: K) -> S {
        self.values
            .get(&k)
            .cloned()
            .unwrap_or_else(|| S::zero(self.q))
    }

    pub fn set(&mut self, k: K, v: S) {
        if v.is_zero() {
            self.values.remove(&k);
        } else {
            self.values.insert(k, v);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &S)> {
        self.values.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min_key(&self) -> Option<K> {
        self.values.keys().next().copied()
    }

    pub fn max_key(&self) -> Option<K> {
        self.values.keys().next_back().copied()
    }

    pub fn to_float(&self) -> Sequence<K, f64> {
        Sequence {
            q: self.q,
            values: self
                .values
                .iter()
                .map(|(k, v)| (*k, v.to_f64()))
                .filter(|(_, v)| *v != 0.0)
                .collect(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::from_pairs(self.q, self.values.iter().map(|(k, v)| (*k, v.clone() * c)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.values {
            out.set(*k, out.get(*k) + v);
        }
        out
    }
}

impl<K: Ord, S: PartialEq> PartialEq for Sequence<K, S> {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.values == other.values
    }
}

impl<S: Scalar> HeightSequence<S> {
    /// Whether `f(h) = f(−h)` for all `h`.
    pub fn is_even(&self) -> bool {
        self.values.iter().all(|(h, v)| self.get(-h) == *v)
    }

    /// Largest `|h|` in the support.
    pub fn support_bound(&self) -> Option<u64> {
        self.values.keys().map(|h| h.unsigned_abs()).max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::QSurd;

    type F = TreeFunction<QSurd>;

    fn v(q: u32, s: &str) -> VertexAddress {
        VertexAddress::parse(q, s).unwrap()
    }

    #[test]
    fn site_strings() {
        let q = 3;
        for s in ["", "0,2", "*", "*,*", "0,1,*,*"] {
            assert_eq!(Site::parse(q, s).unwrap().to_string(), s);
        }
        assert!(Site::parse(q, "*,0").is_err());
        assert_eq!(
            Site::parse(q, "*,*").unwrap().multiplicity(q),
            BigInt::from(12)
        );
        assert_eq!(
            Site::parse(q, "1,*,*").unwrap().multiplicity(q),
            BigInt::from(9)
        );
    }

    #[test]
    fn sites_partition_the_ball() {
        for q in [2, 3] {
            for res in 0..3 {
                let total: BigInt = sites_within(q, res, 5)
                    .iter()
                    .map(|s| s.multiplicity(q))
                    .sum();
                assert_eq!(total, Ball::new(q, 5).unwrap().vertex_count());
            }
        }
    }

    #[test]
    fn cone_counts_match_enumeration() {
        let q = 2;
        let ball = Ball::new(q, 7).unwrap();
        for apex in sphere_around(q, &VertexAddress::origin(), 1)
            .into_iter()
            .chain([VertexAddress::origin()])
        {
            for k in 1..=3 {
                let members = apex.descendants(q, k);
                for x in ball.vertices().iter().filter(|x| x.depth() <= 4) {
                    let mut brute: BTreeMap<u32, BigInt> = BTreeMap::new();
                    for y in &members {
                        *brute.entry(x.distance(y)).or_default() += 1;
                    }
                    let fast: BTreeMap<u32, BigInt> =
                        cone_distance_counts(q, x, &apex, k).into_iter().collect();
                    assert_eq!(fast, brute, "apex {apex} k {k} x {x}");
                }
            }
        }
    }

    #[test]
    fn spherical_mean_examples() {
        let q = 2;
        let ball = Ball::new(q, 6).unwrap();
        let o = VertexAddress::origin();
        let d = F::delta(q, &o).unwrap();
        assert_eq!(spherical_mean(&d, &o, 0, &ball).unwrap(), QSurd::one(q));
        for n in 1..4 {
            assert!(spherical_mean(&d, &o, n, &ball).unwrap().is_zero());
        }
        assert_eq!(
            spherical_mean(&d, &v(q, "0,1"), 2, &ball).unwrap(),
            QSurd::from_ratio(1, 6, q)
        );
        let c = QSurd::from_ratio(7, 3, q);
        let constant =
            F::from_entries(q, ball.vertices().into_iter().map(|x| (x, c.clone()))).unwrap();
        assert_eq!(spherical_mean(&constant, &v(q, "1"), 3, &ball).unwrap(), c);
        assert!(matches!(
            spherical_mean(&d, &v(q, "1,1"), 5, &ball),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn spherical_mean_of_radial_is_profile() {
        let q = 3;
        let ball = Ball::new(q, 8).unwrap();
        let p = RadialProfile::from_pairs(
            q,
            [
                (0, QSurd::from_i64(2, q)),
                (1, QSurd::sqrt_q(q)),
                (3, QSurd::from_ratio(-1, 4, q)),
            ],
        );
        let f = F::from_radial(&p);
        for n in 0..5 {
            assert_eq!(
                spherical_mean(&f, &VertexAddress::origin(), n, &ball).unwrap(),
                p.get(n)
            );
        }
        assert_eq!(f.to_radial().unwrap(), p);
    }

    #[test]
    fn refinement_preserves_values() {
        let q = 2;
        let p = RadialProfile::from_pairs(
            q,
            [
                (0, QSurd::one(q)),
                (2, QSurd::from_i64(3, q)),
                (4, QSurd::sqrt_q(q)),
            ],
        );
        let f = F::from_radial(&p);
        let g = f.refine(3);
        assert_eq!(g.resolution(), 3);
        for x in Ball::new(q, 5).unwrap().vertices() {
            assert_eq!(f.get(&x), g.get(&x), "{x}");
        }
        assert_eq!(f, g);
        assert_eq!(g.to_radial().unwrap(), p);
    }

    #[test]
    fn arithmetic_and_inner_products() {
        let q = 2;
        let a = F::delta(q, &v(q, "0,1")).unwrap();
        let b = F::from_radial(&RadialProfile::from_pairs(q, [(2, QSurd::from_i64(2, q))]));
        let s = &a + &b;
        assert_eq!(s.get(&v(q, "0,1")), QSurd::from_i64(3, q));
        assert_eq!(s.get(&v(q, "1,1")), QSurd::from_i64(2, q));
        assert!((&s - &s).is_zero());
        assert_eq!(a.inner(&b).unwrap(), QSurd::from_i64(2, q));
        assert_eq!(b.norm_squared(), QSurd::from_i64(24, q));
        assert!(a.try_add(&F::zero(3)).is_err());
        assert!(
            F::from_radial(&RadialProfile::from_pairs(q, [(1, QSurd::one(q))]))
                .try_add(&a)
                .unwrap()
                .to_radial()
                .is_err()
        );
    }
}
