//! Motions (surjective isometries) as a linear isometry followed by a
//! translation.
//!
//! Every motion `f` splits uniquely as `f = h ∘ g` where `g(θ) = θ` is the
//! *non-shift* component and `h(x) = x + f(θ)` the *shift* component. Motions
//! here are stored structurally in exactly that form, so [`Motion::decompose`]
//! is exact rather than numerically inferred.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::par::{self, tag};
use crate::report::{AuditReport, Tally};
use crate::space::{dot, Space, Vector};

/// Residual bound used by motion audits.
pub const MOTION_TOL: f64 = 1e-9;

const ORTHO_TOL: f64 = 1e-12;

/// Origin-fixing isometries the crate can represent.
///
/// `PlanarRotation` only makes sense in a Euclidean space. `SignedPermutation`
/// is an isometry of every `ℓp`. `Chain` is what composition produces when
/// two rotations live in different planes; its maps apply first to last.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinearIsometry {
    Identity,
    /// Rotation by `alpha` in the plane spanned by the orthonormal pair
    /// `(e1u, u)`, identity on the orthogonal complement.
    PlanarRotation {
        e1u: Vector,
        u: Vector,
        alpha: f64,
    },
    /// `y[i] = signs[i] * x[perm[i]]`
    SignedPermutation {
        perm: Vec<usize>,
        signs: Vec<i8>,
    },
    Chain {
        maps: Vec<LinearIsometry>,
    },
}

impl LinearIsometry {
    /// Reflection across the hyperplane `x[axis] = 0`.
    pub fn reflection(dim: usize, axis: usize) -> Self {
        let mut signs = vec![1; dim];
        signs[axis] = -1;
        LinearIsometry::SignedPermutation { perm: (0..dim).collect(), signs }
    }

    pub fn validate(&self, space: &Space) -> Result<()> {
        match self {
            LinearIsometry::Identity => Ok(()),
            LinearIsometry::PlanarRotation { e1u, u, alpha } => {
                space.require_euclidean("planar rotation")?;
                space.check(e1u)?;
                space.check(u)?;
                if !alpha.is_finite() {
                    return Err(invalid("rotation angle must be finite"));
                }
                let n1 = e1u.euclidean_norm();
                let n2 = u.euclidean_norm();
                if (n1 - 1.0).abs() > ORTHO_TOL || (n2 - 1.0).abs() > ORTHO_TOL {
                    return Err(invalid("rotation plane vectors must have unit norm"));
                }
                if e1u.dot(u).abs() > ORTHO_TOL {
                    return Err(invalid("rotation plane vectors must be orthogonal"));
                }
                Ok(())
            }
            LinearIsometry::SignedPermutation { perm, signs } => {
                if perm.len() != space.dim || signs.len() != space.dim {
                    return Err(Error::DimensionMismatch { expected: space.dim, found: perm.len().max(signs.len()) });
                }
                let mut seen = vec![false; space.dim];
                for &p in perm {
                    if p >= space.dim || std::mem::replace(&mut seen[p], true) {
                        return Err(invalid("signed permutation is not a permutation"));
                    }
                }
                if signs.iter().any(|&s| s != 1 && s != -1) {
                    return Err(invalid("signed permutation signs must be +1 or -1"));
                }
                Ok(())
            }
            LinearIsometry::Chain { maps } => maps.iter().try_for_each(|m| m.validate(space)),
        }
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        match self {
            LinearIsometry::Identity => x.clone(),
            LinearIsometry::PlanarRotation { e1u, u, alpha } => rotate(x, e1u, u, *alpha),
            LinearIsometry::SignedPermutation { perm, signs } => {
                Vector::from_raw(perm.iter().zip(signs).map(|(&p, &s)| f64::from(s) * x[p]).collect())
            }
            LinearIsometry::Chain { maps } => maps.iter().fold(x.clone(), |acc, m| m.apply(&acc)),
        }
    }

    pub fn apply_inverse(&self, x: &Vector) -> Vector {
        match self {
            LinearIsometry::Identity => x.clone(),
            LinearIsometry::PlanarRotation { e1u, u, alpha } => rotate(x, e1u, u, -alpha),
            LinearIsometry::SignedPermutation { perm, signs } => {
                let mut out = vec![0.0; perm.len()];
                for (i, (&p, &s)) in perm.iter().zip(signs).enumerate() {
                    out[p] = f64::from(s) * x[i];
                }
                Vector::from_raw(out)
            }
            LinearIsometry::Chain { maps } => maps.iter().rev().fold(x.clone(), |acc, m| m.apply_inverse(&acc)),
        }
    }

    pub fn inverse(&self) -> LinearIsometry {
        match self {
            LinearIsometry::Identity => LinearIsometry::Identity,
            LinearIsometry::PlanarRotation { e1u, u, alpha } => {
                LinearIsometry::PlanarRotation { e1u: e1u.clone(), u: u.clone(), alpha: -alpha }
            }
            LinearIsometry::SignedPermutation { perm, signs } => {
                let mut inv = vec![0; perm.len()];
                for (i, &p) in perm.iter().enumerate() {
                    inv[p] = i;
                }
                let signs = inv.iter().map(|&i| signs[i]).collect();
                LinearIsometry::SignedPermutation { perm: inv, signs }
            }
            LinearIsometry::Chain { maps } => {
                LinearIsometry::Chain { maps: maps.iter().rev().map(LinearIsometry::inverse).collect() }
            }
        }
    }

    /// `self` first, then `next`.
    pub fn then(&self, next: &LinearIsometry) -> LinearIsometry {
        let mut flat = Vec::new();
        flatten(self, &mut flat);
        flatten(next, &mut flat);
        let mut merged: Vec<LinearIsometry> = Vec::with_capacity(flat.len());
        for m in flat {
            match (merged.last_mut(), m) {
                (
                    Some(LinearIsometry::SignedPermutation { perm: p1, signs: s1 }),
                    LinearIsometry::SignedPermutation { perm: p2, signs: s2 },
                ) => {
                    let perm: Vec<usize> = p2.iter().map(|&j| p1[j]).collect();
                    let signs: Vec<i8> = s2.iter().zip(&p2).map(|(&s, &j)| s * s1[j]).collect();
                    *p1 = perm;
                    *s1 = signs;
                }
                (_, m) => merged.push(m),
            }
        }
        match merged.len() {
            0 => LinearIsometry::Identity,
            1 => merged.pop().unwrap(),
            _ => LinearIsometry::Chain { maps: merged },
        }
    }
}

fn flatten(m: &LinearIsometry, out: &mut Vec<LinearIsometry>) {
    match m {
        LinearIsometry::Identity => {}
        LinearIsometry::Chain { maps } => maps.iter().for_each(|m| flatten(m, out)),
        other => out.push(other.clone()),
    }
}

fn rotate(x: &Vector, e1u: &Vector, u: &Vector, alpha: f64) -> Vector {
    let x1 = dot(x.coords(), e1u.coords());
    let x2 = dot(x.coords(), u.coords());
    let (s, c) = alpha.sin_cos();
    let d1 = x1 * c - x2 * s - x1;
    let d2 = x1 * s + x2 * c - x2;
    Vector::from_raw(
        x.coords()
            .iter()
            .zip(e1u.coords().iter().zip(u.coords()))
            .map(|(xi, (ei, ui))| xi + d1 * ei + d2 * ui)
            .collect(),
    )
}

/// Anything that maps points to points and can be audited like a motion.
///
/// [`Motion`] is the only isometric implementor in the crate; tests use the
/// trait to push deliberately broken maps through the same audits.
pub trait PointMap: Sync {
    fn map(&self, x: &Vector) -> Vector;
    fn map_inverse(&self, x: &Vector) -> Vector;

    /// The origin-fixing part `x ↦ f(x) − f(θ)`.
    fn map_linear(&self, x: &Vector) -> Vector {
        let o = self.map(&Vector::zeros(x.dim()));
        &self.map(x) - &o
    }
}

/// `x ↦ linear(x) + shift`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Motion {
    pub linear: LinearIsometry,
    pub shift: Vector,
}

impl Motion {
    pub fn identity(dim: usize) -> Self {
        Self { linear: LinearIsometry::Identity, shift: Vector::zeros(dim) }
    }

    pub fn translation(shift: Vector) -> Self {
        Self { linear: LinearIsometry::Identity, shift }
    }

    pub fn linear(linear: LinearIsometry, dim: usize) -> Self {
        Self { linear, shift: Vector::zeros(dim) }
    }

    pub fn new(linear: LinearIsometry, shift: Vector) -> Self {
        Self { linear, shift }
    }

    pub fn dim(&self) -> usize {
        self.shift.dim()
    }

    pub fn validate(&self, space: &Space) -> Result<()> {
        space.check(&self.shift)?;
        self.linear.validate(space)
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        &self.linear.apply(x) + &self.shift
    }

    pub fn apply_inverse(&self, x: &Vector) -> Vector {
        self.linear.apply_inverse(&(x - &self.shift))
    }

    pub fn inverse(&self) -> Motion {
        let linear = self.linear.inverse();
        let shift = -&linear.apply(&self.shift);
        Motion { linear, shift }
    }

    /// `self` after `first`: `x ↦ self(first(x))`.
    pub fn compose(&self, first: &Motion) -> Motion {
        Motion { linear: first.linear.then(&self.linear), shift: &self.linear.apply(&first.shift) + &self.shift }
    }

    /// Splits into `(g, h)` with `g(θ) = θ`, `h` a translation by `self(θ)`,
    /// and `h ∘ g = self`.
    pub fn decompose(&self) -> (Motion, Motion) {
        let g = Motion::linear(self.linear.clone(), self.dim());
        let h = Motion::translation(self.shift.clone());
        (g, h)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.linear, LinearIsometry::Identity) && self.shift.is_zero()
    }
}

impl PointMap for Motion {
    fn map(&self, x: &Vector) -> Vector {
        self.apply(x)
    }

    fn map_inverse(&self, x: &Vector) -> Vector {
        self.apply_inverse(x)
    }

    fn map_linear(&self, x: &Vector) -> Vector {
        self.linear.apply(x)
    }
}

/// The zero-shift motion rotating `e1` onto `e2` inside their common plane.
///
/// Requires a Euclidean space and `‖e1‖ = ‖e2‖ > 0` within `1e-9`. When
/// `e2 = −e1` the plane is not determined; the second axis is then the first
/// canonical basis vector whose component orthogonal to `e1` has length at
/// least `1e-6`.
pub fn planar_rotation_between(space: &Space, e1: &Vector, e2: &Vector) -> Result<Motion> {
    space.require_euclidean("planar rotation")?;
    space.check(e1)?;
    space.check(e2)?;
    let r1 = e1.euclidean_norm();
    let r2 = e2.euclidean_norm();
    if r1 == 0.0 || r2 == 0.0 {
        return Err(invalid("rotation endpoints must be non-zero"));
    }
    if (r1 - r2).abs() > 1e-9 {
        return Err(invalid(format!("rotation endpoints differ in norm: {r1} vs {r2}")));
    }
    let a = e1.scale(1.0 / r1);
    let b = e2.scale(1.0 / r2);
    let cos = a.dot(&b);
    let perp = b.add_scaled(-cos, &a);
    let perp_norm = perp.euclidean_norm();

    if perp_norm < 1e-12 {
        if cos > 0.0 {
            return Ok(Motion::identity(space.dim));
        }
        let u = (0..space.dim)
            .map(|i| {
                let ei = Vector::basis(space.dim, i);
                ei.add_scaled(-a[i], &a)
            })
            .find(|w| w.euclidean_norm() >= 1e-6)
            .ok_or_else(|| invalid("no axis orthogonal to the rotation start in dimension 1"))?;
        let u = orthonormalize(&u, &a);
        let linear = LinearIsometry::PlanarRotation { e1u: a, u, alpha: std::f64::consts::PI };
        return Ok(Motion::linear(linear, space.dim));
    }

    let u = orthonormalize(&perp, &a);
    let alpha = b.dot(&u).atan2(cos);
    Ok(Motion::linear(LinearIsometry::PlanarRotation { e1u: a, u, alpha }, space.dim))
}

/// Gram-Schmidt `w` against unit `a` twice, then normalize.
fn orthonormalize(w: &Vector, a: &Vector) -> Vector {
    let w = w.add_scaled(-w.dot(a), a);
    let w = w.add_scaled(-w.dot(a), a);
    w.scale(1.0 / w.euclidean_norm())
}

/// True when `‖m(x)‖ ≤ ‖x‖ + tol` and `‖m(−x)‖ ≤ ‖x‖ + tol`.
///
/// In a strictly convex space this forces the shift component of `m` to be
/// the zero translation.
pub fn trivial_shift_premise(m: &Motion, space: &Space, x: &Vector, tol: f64) -> Result<bool> {
    space.check(x)?;
    let nx = space.norm.eval(x.coords());
    let plus = space.norm.eval(m.apply(x).coords());
    let minus = space.norm.eval(m.apply(&-x).coords());
    Ok(plus <= nx + tol && minus <= nx + tol)
}

/// Sampling audit of the basic properties of a motion.
///
/// Per sample: isometry `|‖m(x)−m(y)‖ − ‖x−y‖|`, sphere image
/// `|‖m(z)−m(c)‖ − r|` for `z` on `S(c, r)`, ball image
/// `max(0, ‖m(w)−m(c)‖ − r)` for `w` in `B̄(c, r)`, linearity of the zero-shift
/// part `‖g(λx+μy) − λg(x) − μg(y)‖` with `|λ|, |μ| ≤ 2`, and in Euclidean
/// spaces `|⟨g(x), g(y)⟩ − ⟨x, y⟩|`. A sample fails when any residual exceeds
/// [`MOTION_TOL`].
pub fn motion_audit<M: PointMap + ?Sized>(
    m: &M,
    space: &Space,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<AuditReport> {
    if samples == 0 {
        return Err(invalid("motion audit needs at least one sample"));
    }
    let started = Instant::now();
    let origin = space.origin();
    let nrm = |v: &Vector| space.norm.eval(v.coords());
    let euclid = space.is_euclidean();

    type Block = (Tally, [f64; 5]);
    let blocks: Vec<Result<Block>> = par::map_blocks(samples, seed, tag::MOTION, workers, |range, rng| {
        let mut tally = Tally::default();
        let mut comp = [0.0f64; 5];
        for _ in range {
            let x = space.sample_ball_point(origin.coords(), 2.0, rng)?;
            let y = space.sample_ball_point(origin.coords(), 2.0, rng)?;
            let c = space.sample_ball_point(origin.coords(), 1.0, rng)?;
            let r: f64 = rng.random_range(0.05..=2.0);
            let z = c.add_scaled(r, &space.random_unit(rng));
            let w = space.sample_ball_point(c.coords(), r, rng)?;
            let lam: f64 = rng.random_range(-2.0..=2.0);
            let mu: f64 = rng.random_range(-2.0..=2.0);

            let iso = (nrm(&(&m.map(&x) - &m.map(&y))) - nrm(&(&x - &y))).abs();
            let mc = m.map(&c);
            let sphere = (nrm(&(&m.map(&z) - &mc)) - r).abs();
            let ball = (nrm(&(&m.map(&w) - &mc)) - r).max(0.0);
            let gx = m.map_linear(&x);
            let gy = m.map_linear(&y);
            let combo = m.map_linear(&x.scale(lam).add_scaled(mu, &y));
            let lin = nrm(&combo.add_scaled(-lam, &gx).add_scaled(-mu, &gy));
            let ip = if euclid { (gx.dot(&gy) - x.dot(&y)).abs() } else { 0.0 };

            let res = [iso, sphere, ball, lin, ip];
            for (acc, v) in comp.iter_mut().zip(res) {
                *acc = acc.max(v);
            }
            let worst = res.iter().fold(0.0f64, |a, &b| a.max(b));
            tally.residual(worst);
            if worst > MOTION_TOL || worst.is_nan() {
                tally.fail(x);
            }
        }
        Ok((tally, comp))
    });

    let mut tallies = Vec::with_capacity(blocks.len());
    let mut comp = [0.0f64; 5];
    for b in blocks {
        let (t, c) = b?;
        tallies.push(t);
        for (acc, v) in comp.iter_mut().zip(c) {
            *acc = acc.max(v);
        }
    }
    let mut report = AuditReport::from_tally("motion", samples as u64, seed, Tally::merge_all(tallies));
    let names = ["isometry", "sphere_image", "ball_image", "linearity", "inner_product"];
    report.components = names
        .iter()
        .zip(comp)
        .filter(|(n, _)| euclid || **n != "inner_product")
        .map(|(n, v)| (n.to_string(), v))
        .collect::<BTreeMap<_, _>>();
    report.runtime_ms = Some(started.elapsed().as_millis() as u64);
    Ok(report)
}
