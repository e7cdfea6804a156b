//! Finite-dimensional `ℓp` spaces: vectors, norms, angles, ball sampling
//! and a strict-convexity probe.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::par::{self, tag};

/// Tolerance on the midpoint-norm test of [`ncs_violation_search`].
pub const NCS_TOL: f64 = 1e-9;

/// Pairs of unit vectors closer than this are skipped by the strict-convexity
/// search; for smooth norms the midpoint defect of nearly equal points falls
/// below [`NCS_TOL`] through rounding alone.
pub const NCS_MIN_SEPARATION: f64 = 1e-2;

/// Rejection attempts allowed per point when sampling a non-Euclidean,
/// non-cubic ball from its bounding cube.
pub const MAX_REJECTIONS: usize = 10_000;

/// A point or direction with finite real coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidVector);
        }
        Ok(Self(coords))
    }

    /// Builds a vector without validation. Callers guarantee finiteness.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Self(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim.max(1)])
    }

    /// The `i`-th canonical basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim.max(1)];
        v[i] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.0, &other.0)
    }

    /// Euclidean length, independent of any [`Space`].
    pub fn euclidean_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, k: f64) -> Vector {
        Vector(self.0.iter().map(|c| c * k).collect())
    }

    /// `self + k * other`
    pub fn add_scaled(&self, k: f64, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + k * b).collect())
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add for &Vector {
    type Output = Vector;

    fn add(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;

    fn sub(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Vector {
    type Output = Vector;

    fn neg(self) -> Vector {
        Vector(self.0.iter().map(|c| -c).collect())
    }
}

impl Mul<&Vector> for f64 {
    type Output = Vector;

    fn mul(self, rhs: &Vector) -> Vector {
        rhs.scale(self)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Which `ℓp` norm a [`Space`] carries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NormKind {
    Lp { p: f64 },
    Linf,
}

impl NormKind {
    pub fn lp(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(invalid(format!("p must be a finite real >= 1, got {p}")));
        }
        Ok(NormKind::Lp { p })
    }

    /// Strictly convex exactly for `1 < p < ∞`.
    pub fn is_strictly_convex(&self) -> bool {
        matches!(*self, NormKind::Lp { p } if p > 1.0)
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(*self, NormKind::Lp { p } if p == 2.0)
    }

    pub(crate) fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            NormKind::Linf => x.iter().fold(0.0, |m, c| m.max(c.abs())),
            NormKind::Lp { p: 2.0 } => dot(x, x).sqrt(),
            NormKind::Lp { p: 1.0 } => x.iter().map(|c| c.abs()).sum(),
            NormKind::Lp { p } => {
                let s: f64 = x.iter().map(|c| c.abs().powf(p)).sum();
                s.powf(1.0 / p)
            }
        }
    }

    pub(crate) fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            NormKind::Linf => x.iter().zip(y).fold(0.0, |m, (a, b)| m.max((a - b).abs())),
            NormKind::Lp { p: 2.0 } => x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            NormKind::Lp { p: 1.0 } => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            NormKind::Lp { p } => {
                let s: f64 = x.iter().zip(y).map(|(a, b)| (a - b).abs().powf(p)).sum();
                s.powf(1.0 / p)
            }
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormKind::Lp { p } => write!(f, "l{p}"),
            NormKind::Linf => write!(f, "linf"),
        }
    }
}

/// `ℝ^dim` equipped with an `ℓp` norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Space {
    pub dim: usize,
    pub norm: NormKind,
}

impl Space {
    pub fn new(dim: usize, norm: NormKind) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if let NormKind::Lp { p } = norm {
            NormKind::lp(p)?;
        }
        Ok(Self { dim, norm })
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::new(dim, NormKind::Lp { p: 2.0 })
    }

    pub fn lp(dim: usize, p: f64) -> Result<Self> {
        Self::new(dim, NormKind::lp(p)?)
    }

    pub fn linf(dim: usize) -> Result<Self> {
        Self::new(dim, NormKind::Linf)
    }

    pub fn is_strictly_convex(&self) -> bool {
        self.norm.is_strictly_convex()
    }

    pub fn is_euclidean(&self) -> bool {
        self.norm.is_euclidean()
    }

    pub fn origin(&self) -> Vector {
        Vector::zeros(self.dim)
    }

    pub fn check(&self, v: &Vector) -> Result<()> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.dim() });
        }
        Ok(())
    }

    pub(crate) fn require_euclidean(&self, what: &'static str) -> Result<()> {
        if !self.is_euclidean() {
            return Err(Error::RequiresEuclidean { what, norm: self.norm.to_string() });
        }
        Ok(())
    }

    pub fn norm(&self, v: &Vector) -> Result<f64> {
        self.check(v)?;
        Ok(self.norm.eval(v.coords()))
    }

    pub fn dist(&self, x: &Vector, y: &Vector) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.norm.dist(x.coords(), y.coords()))
    }

    /// A uniformly random direction (Gaussian), scaled to unit norm in this space.
    pub(crate) fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        loop {
            let g: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
            let n = self.norm.eval(&g);
            if n > 1e-300 {
                return Vector::from_raw(g.into_iter().map(|c| c / n).collect());
            }
        }
    }

    /// One point of `B̄(center, r)`; see [`sample_ball`] for the distribution.
    pub(crate) fn sample_ball_point<R: Rng + ?Sized>(&self, center: &[f64], r: f64, rng: &mut R) -> Result<Vector> {
        let d = self.dim;
        let offset: Vec<f64> = match self.norm {
            NormKind::Lp { p: 2.0 } => {
                let u = self.random_unit(rng);
                let rho = r * rng.random::<f64>().powf(1.0 / d as f64);
                u.into_coords().into_iter().map(|c| c * rho).collect()
            }
            NormKind::Linf => (0..d).map(|_| rng.random_range(-r..=r)).collect(),
            NormKind::Lp { .. } => {
                let mut found = None;
                for _ in 0..MAX_REJECTIONS {
                    let c: Vec<f64> = (0..d).map(|_| rng.random_range(-r..=r)).collect();
                    if self.norm.eval(&c) <= r {
                        found = Some(c);
                        break;
                    }
                }
                found.ok_or_else(|| Error::SamplingBudget {
                    attempts: MAX_REJECTIONS,
                    context: format!("ball in dim {d} with norm {}", self.norm),
                })?
            }
        };
        Ok(Vector::from_raw(center.iter().zip(offset).map(|(c, o)| c + o).collect()))
    }
}

/// Standard dot product.
pub fn inner(x: &Vector, y: &Vector) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: y.dim() });
    }
    Ok(x.dot(y))
}

/// Euclidean angle in `[0, π]`; zero when either argument is the zero vector.
pub fn angle(x: &Vector, y: &Vector) -> f64 {
    let nx = x.euclidean_norm();
    let ny = y.euclidean_norm();
    if nx == 0.0 || ny == 0.0 {
        return 0.0;
    }
    (x.dot(y) / (nx * ny)).clamp(-1.0, 1.0).acos()
}

/// A pair of distinct unit vectors whose convex combination stays on the
/// unit sphere.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NcsWitness {
    pub x: Vector,
    pub y: Vector,
    pub lambda: f64,
    /// `‖λx + (1−λ)y‖`
    pub combo_norm: f64,
}

/// Looks for a violation of strict convexity of the unit sphere.
///
/// `ℓ1` and `ℓ∞` get their canonical flat-face witness without sampling. For
/// `1 < p < ∞`, `samples` random pairs of unit vectors (at least
/// [`NCS_MIN_SEPARATION`] apart) are combined with `λ ∈ [1/4, 3/4]` and
/// flagged when the combination has norm `≥ 1 − NCS_TOL`. A flat face of the
/// sphere always contains such a pair with `λ = 1/2`, so the restricted `λ`
/// range loses nothing.
pub fn ncs_violation_search(space: &Space, samples: usize, seed: u64, workers: usize) -> Result<Option<NcsWitness>> {
    if samples == 0 {
        return Err(invalid("ncs search needs at least one sample"));
    }
    if space.dim < 2 {
        return Ok(None);
    }
    let d = space.dim;
    let flat = |x: Vector, y: Vector| {
        let mid = x.scale(0.5).add_scaled(0.5, &y);
        let combo_norm = space.norm.eval(mid.coords());
        NcsWitness { x, y, lambda: 0.5, combo_norm }
    };
    match space.norm {
        NormKind::Linf => {
            let mut x = vec![0.0; d];
            let mut y = vec![0.0; d];
            x[0] = 1.0;
            x[1] = 1.0;
            y[0] = 1.0;
            y[1] = -1.0;
            return Ok(Some(flat(Vector::from_raw(x), Vector::from_raw(y))));
        }
        NormKind::Lp { p: 1.0 } => {
            return Ok(Some(flat(Vector::basis(d, 0), Vector::basis(d, 1))));
        }
        NormKind::Lp { .. } => {}
    }

    let found = par::map_blocks(samples, seed, tag::NCS, workers, |range, rng| {
        for _ in range {
            let x = space.random_unit(rng);
            let y = space.random_unit(rng);
            let lambda: f64 = rng.random_range(0.25..=0.75);
            if space.norm.dist(x.coords(), y.coords()) < NCS_MIN_SEPARATION {
                continue;
            }
            let combo = x.scale(lambda).add_scaled(1.0 - lambda, &y);
            let combo_norm = space.norm.eval(combo.coords());
            if combo_norm >= 1.0 - NCS_TOL {
                return Some(NcsWitness { x, y, lambda, combo_norm });
            }
        }
        None
    });
    Ok(found.into_iter().flatten().next())
}

/// Draws `n` points of `B̄(center, r)`, deterministic in `seed`.
///
/// Euclidean balls are sampled exactly uniformly (Gaussian direction, radius
/// `r·U^(1/dim)`); `ℓ∞` balls are uniform on the cube; other `ℓp` balls use
/// rejection from the bounding cube with at most [`MAX_REJECTIONS`] tries per
/// point, failing with [`Error::SamplingBudget`] beyond that.
pub fn sample_ball(space: &Space, center: &Vector, r: f64, n: usize, seed: u64) -> Result<Vec<Vector>> {
    space.check(center)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("ball radius must be positive, got {r}")));
    }
    let blocks = par::map_blocks(n, seed, tag::BALL, 1, |range, rng| {
        range.map(|_| space.sample_ball_point(center.coords(), r, rng)).collect::<Result<Vec<_>>>()
    });
    let mut out = Vec::with_capacity(n);
    for b in blocks {
        out.extend(b?);
    }
    Ok(out)
}
