//! Membership-testable sets with analytic interior certificates.
//!
//! Every primitive carries a signed *membership score*: non-positive on the
//! set, positive outside, and continuous. Closed sets test membership as
//! `score ≤ tol`. The positive part of the score is the membership defect
//! used by the coverage and antipodal audits.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::motion::Motion;
use crate::par::{self, tag};
use crate::space::{NormKind, Space, Vector, MAX_REJECTIONS};

/// Default membership tolerance.
pub const MEMBER_TOL: f64 = 1e-9;
/// Default interior margin.
pub const INTERIOR_EPS: f64 = 1e-6;

/// Random escape probes tried around a point of a [`Shape::FiniteUnion`].
const UNION_RANDOM_PROBES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vector,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    ClosedBall {
        center: Vector,
        radius: f64,
    },
    OpenBall {
        center: Vector,
        radius: f64,
    },
    Sphere {
        center: Vector,
        radius: f64,
    },
    /// `C(s, e, γ)`: points `x` with `‖x − s‖ ≤ ‖e − s‖` and
    /// `∠(x − s, e − s) ≤ γ`. Euclidean spaces only.
    Ommatidium {
        origin: Vector,
        end: Vector,
        gamma: f64,
    },
    /// Points of `ball` whose coordinate `axis` lies in `[lo, hi]`.
    SlabCap {
        ball: Ball,
        axis: usize,
        lo: f64,
        hi: f64,
    },
    /// `motion(inner)`
    Image {
        inner: Box<Shape>,
        motion: Motion,
    },
    FiniteUnion {
        parts: Vec<Shape>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum InteriorStatus {
    /// The whole ball `B(x, eps)` lies in the set.
    Interior,
    /// `witness` is within `eps` of `x` and outside the set.
    NotInterior { witness: Vector },
    /// Neither certificate could be produced.
    Boundary,
}

impl InteriorStatus {
    pub fn is_interior(&self) -> bool {
        matches!(self, InteriorStatus::Interior)
    }
}

impl Shape {
    pub fn closed_ball(center: Vector, radius: f64) -> Self {
        Shape::ClosedBall { center, radius }
    }

    pub fn ommatidium(origin: Vector, end: Vector, gamma: f64) -> Self {
        Shape::Ommatidium { origin, end, gamma }
    }

    /// Full structural validation against `space`.
    pub fn validate(&self, space: &Space) -> Result<()> {
        let radius_ok = |r: f64| {
            if r > 0.0 && r.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("radius must be positive, got {r}")))
            }
        };
        match self {
            Shape::ClosedBall { center, radius }
            | Shape::OpenBall { center, radius }
            | Shape::Sphere { center, radius } => {
                space.check(center)?;
                radius_ok(*radius)
            }
            Shape::Ommatidium { origin, end, gamma } => {
                space.require_euclidean("ommatidium")?;
                space.check(origin)?;
                space.check(end)?;
                if origin == end {
                    return Err(invalid("ommatidium origin and end must differ"));
                }
                if !(0.0..=PI).contains(gamma) {
                    return Err(invalid(format!("ommatidium angle must lie in [0, π], got {gamma}")));
                }
                Ok(())
            }
            Shape::SlabCap { ball, axis, lo, hi } => {
                space.check(&ball.center)?;
                radius_ok(ball.radius)?;
                if *axis >= space.dim {
                    return Err(invalid(format!("slab axis {axis} out of range")));
                }
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(invalid(format!("slab needs lo <= hi, got [{lo}, {hi}]")));
                }
                Ok(())
            }
            Shape::Image { inner, motion } => {
                motion.validate(space)?;
                inner.validate(space)
            }
            Shape::FiniteUnion { parts } => {
                if parts.is_empty() {
                    return Err(invalid("finite union needs at least one part"));
                }
                parts.iter().try_for_each(|p| p.validate(space))
            }
        }
    }

    fn needs_euclidean(&self) -> bool {
        match self {
            Shape::Ommatidium { .. } => true,
            Shape::Image { inner, .. } => inner.needs_euclidean(),
            Shape::FiniteUnion { parts } => parts.iter().any(Shape::needs_euclidean),
            _ => false,
        }
    }

    fn check_point(&self, space: &Space, x: &Vector) -> Result<()> {
        space.check(x)?;
        if self.needs_euclidean() {
            space.require_euclidean("ommatidium")?;
        }
        Ok(())
    }

    /// Signed membership score: `≤ 0` on the set, `> 0` outside.
    pub fn membership_score(&self, space: &Space, x: &Vector) -> Result<f64> {
        self.check_point(space, x)?;
        Ok(self.score(space, x))
    }

    /// `max(0, score)`
    pub fn membership_defect(&self, space: &Space, x: &Vector) -> Result<f64> {
        Ok(self.membership_score(space, x)?.max(0.0))
    }

    pub fn contains(&self, space: &Space, x: &Vector, tol: f64) -> Result<bool> {
        self.check_point(space, x)?;
        Ok(self.contains_unchecked(space, x, tol))
    }

    pub(crate) fn score(&self, space: &Space, x: &Vector) -> f64 {
        match self {
            Shape::ClosedBall { center, radius } | Shape::OpenBall { center, radius } => {
                space.norm.dist(x.coords(), center.coords()) - radius
            }
            Shape::Sphere { center, radius } => (space.norm.dist(x.coords(), center.coords()) - radius).abs(),
            Shape::Ommatidium { origin, end, gamma } => {
                let g = OmmatidiumGeom::new(origin, end, *gamma, x);
                g.radial().max(g.cone())
            }
            Shape::SlabCap { ball, axis, lo, hi } => {
                let b = space.norm.dist(x.coords(), ball.center.coords()) - ball.radius;
                let t = x[*axis];
                b.max(lo - t).max(t - hi)
            }
            Shape::Image { inner, motion } => inner.score(space, &motion.apply_inverse(x)),
            Shape::FiniteUnion { parts } => parts.iter().map(|p| p.score(space, x)).fold(f64::INFINITY, f64::min),
        }
    }

    pub(crate) fn contains_unchecked(&self, space: &Space, x: &Vector, tol: f64) -> bool {
        match self {
            Shape::OpenBall { .. } => self.score(space, x) < -tol,
            Shape::Image { inner, motion } => inner.contains_unchecked(space, &motion.apply_inverse(x), tol),
            Shape::FiniteUnion { parts } => parts.iter().any(|p| p.contains_unchecked(space, x, tol)),
            _ => self.score(space, x) <= tol,
        }
    }

    /// Decides whether `B(x, eps)` lies inside the set.
    ///
    /// Primitives use analytic margins. When the margin test fails, a
    /// handful of escape directions (outward radial, outward cone normal,
    /// back past an ommatidium apex, along a slab axis) are tried at distance
    /// `eps`; any escape that leaves the set yields `NotInterior`. Unions
    /// certify `Interior` through any part and otherwise probe `2·dim` axis
    /// directions plus 64 seeded random ones.
    pub fn interior_classify(&self, space: &Space, x: &Vector, eps: f64, tol: f64) -> Result<InteriorStatus> {
        self.check_point(space, x)?;
        if eps.is_nan() || eps <= 0.0 {
            return Err(invalid("interior margin must be positive"));
        }
        Ok(self.classify(space, x, eps, tol))
    }

    fn classify(&self, space: &Space, x: &Vector, eps: f64, tol: f64) -> InteriorStatus {
        let escape = |cands: Vec<Vector>| {
            cands
                .into_iter()
                .find(|w| !self.contains_unchecked(space, w, tol))
                .map_or(InteriorStatus::Boundary, |witness| InteriorStatus::NotInterior { witness })
        };
        let radial = |c: &Vector| -> Vector {
            let d = x - c;
            let n = space.norm.eval(d.coords());
            if n > 0.0 {
                x.add_scaled(eps / n, &d)
            } else {
                x.add_scaled(eps, &Vector::basis(space.dim, 0))
            }
        };
        match self {
            Shape::ClosedBall { center, .. } | Shape::OpenBall { center, .. } => {
                if self.score(space, x) <= -eps {
                    return InteriorStatus::Interior;
                }
                escape(vec![x.clone(), radial(center)])
            }
            Shape::Sphere { center, .. } => escape(vec![x.clone(), radial(center)]),
            Shape::Ommatidium { origin, end, gamma } => {
                let g = OmmatidiumGeom::new(origin, end, *gamma, x);
                if g.radial() <= -eps && g.cone() <= -eps {
                    return InteriorStatus::Interior;
                }
                let mut cands = vec![x.clone()];
                let axis = (end - origin).scale(1.0 / g.len);
                let d = x - origin;
                if g.dn > 0.0 {
                    cands.push(x.add_scaled(eps / g.dn, &d));
                }
                if g.b > 0.0 && *gamma < PI {
                    let perp = d.add_scaled(-d.dot(&axis), &axis);
                    let perp = perp.scale(1.0 / perp.euclidean_norm());
                    let normal = perp.scale(gamma.cos()).add_scaled(-gamma.sin(), &axis);
                    cands.push(x.add_scaled(eps, &normal));
                }
                cands.push(x.add_scaled(-eps, &axis));
                escape(cands)
            }
            Shape::SlabCap { ball, axis, lo, hi } => {
                let b = space.norm.dist(x.coords(), ball.center.coords()) - ball.radius;
                let t = x[*axis];
                if b <= -eps && t - lo >= eps && hi - t >= eps {
                    return InteriorStatus::Interior;
                }
                let e = Vector::basis(space.dim, *axis);
                escape(vec![x.clone(), x.add_scaled(-eps, &e), x.add_scaled(eps, &e), radial(&ball.center)])
            }
            Shape::Image { inner, motion } => match inner.classify(space, &motion.apply_inverse(x), eps, tol) {
                InteriorStatus::NotInterior { witness } => {
                    InteriorStatus::NotInterior { witness: motion.apply(&witness) }
                }
                other => other,
            },
            Shape::FiniteUnion { parts } => {
                if parts.iter().any(|p| p.classify(space, x, eps, tol).is_interior()) {
                    return InteriorStatus::Interior;
                }
                let mut cands = vec![x.clone()];
                for i in 0..space.dim {
                    let e = Vector::basis(space.dim, i);
                    cands.push(x.add_scaled(eps, &e));
                    cands.push(x.add_scaled(-eps, &e));
                }
                let mut rng = par::rng_for(0, tag::PROBES, 0);
                for _ in 0..UNION_RANDOM_PROBES {
                    cands.push(x.add_scaled(eps, &space.random_unit(&mut rng)));
                }
                escape(cands)
            }
        }
    }

    /// `motion(self)`. Balls and spheres stay primitive with a moved center;
    /// everything else is wrapped.
    pub fn image(&self, motion: &Motion) -> Shape {
        match self {
            Shape::ClosedBall { center, radius } => Shape::ClosedBall { center: motion.apply(center), radius: *radius },
            Shape::OpenBall { center, radius } => Shape::OpenBall { center: motion.apply(center), radius: *radius },
            Shape::Sphere { center, radius } => Shape::Sphere { center: motion.apply(center), radius: *radius },
            Shape::Image { inner, motion: m0 } => Shape::Image { inner: inner.clone(), motion: motion.compose(m0) },
            other => Shape::Image { inner: Box::new(other.clone()), motion: motion.clone() },
        }
    }

    /// Draws `n` members, deterministic in `seed`. Not uniform for every
    /// variant; ommatidium samples spread evenly in angle rather than solid
    /// angle so the rim gets exercised.
    pub fn sample_members(&self, space: &Space, n: usize, seed: u64) -> Result<Vec<Vector>> {
        self.validate(space)?;
        let blocks = par::map_blocks(n, seed, tag::MEMBERS, 1, |range, rng| {
            range.map(|_| self.sample_member(space, rng)).collect::<Result<Vec<_>>>()
        });
        let mut out = Vec::with_capacity(n);
        for b in blocks {
            out.extend(b?);
        }
        Ok(out)
    }

    pub(crate) fn sample_member<R: Rng + ?Sized>(&self, space: &Space, rng: &mut R) -> Result<Vector> {
        match self {
            Shape::ClosedBall { center, radius } => space.sample_ball_point(center.coords(), *radius, rng),
            Shape::OpenBall { center, radius } => space.sample_ball_point(center.coords(), radius * (1.0 - 1e-6), rng),
            Shape::Sphere { center, radius } => Ok(center.add_scaled(*radius, &space.random_unit(rng))),
            Shape::Ommatidium { origin, end, gamma } => {
                let v = end - origin;
                let len = v.euclidean_norm();
                let axis = v.scale(1.0 / len);
                let dir = if space.dim == 1 {
                    axis
                } else {
                    let perp = loop {
                        let g: Vec<f64> = (0..space.dim).map(|_| rng.sample(StandardNormal)).collect();
                        let g = Vector::from_raw(g);
                        let p = g.add_scaled(-g.dot(&axis), &axis);
                        let n = p.euclidean_norm();
                        if n > 1e-9 {
                            break p.scale(1.0 / n);
                        }
                    };
                    let phi = gamma * rng.random::<f64>();
                    axis.scale(phi.cos()).add_scaled(phi.sin(), &perp)
                };
                let rho = len * rng.random::<f64>().powf(1.0 / space.dim as f64);
                Ok(origin.add_scaled(rho, &dir))
            }
            Shape::SlabCap { ball, axis, lo, hi } => {
                let c = ball.center.coords();
                let r = ball.radius;
                let a_lo = lo.max(c[*axis] - r);
                let a_hi = hi.min(c[*axis] + r);
                if a_lo > a_hi {
                    return Err(invalid("slab cap is empty"));
                }
                if matches!(space.norm, NormKind::Linf) {
                    let coords = (0..space.dim)
                        .map(|j| {
                            if j == *axis {
                                rng.random_range(a_lo..=a_hi)
                            } else {
                                rng.random_range(c[j] - r..=c[j] + r)
                            }
                        })
                        .collect();
                    return Ok(Vector::from_raw(coords));
                }
                for _ in 0..MAX_REJECTIONS {
                    let p = space.sample_ball_point(c, r, rng)?;
                    if (*lo..=*hi).contains(&p[*axis]) {
                        return Ok(p);
                    }
                }
                Err(Error::SamplingBudget { attempts: MAX_REJECTIONS, context: "slab cap members".into() })
            }
            Shape::Image { inner, motion } => Ok(motion.apply(&inner.sample_member(space, rng)?)),
            Shape::FiniteUnion { parts } => {
                let i = rng.random_range(0..parts.len());
                parts[i].sample_member(space, rng)
            }
        }
    }
}

/// Decomposition of `x − s` along and across the ommatidium axis.
struct OmmatidiumGeom {
    /// `‖e − s‖`
    len: f64,
    /// `‖x − s‖`
    dn: f64,
    /// component of `x − s` along the axis
    a: f64,
    /// length of the component across the axis
    b: f64,
    gamma: f64,
}

impl OmmatidiumGeom {
    fn new(origin: &Vector, end: &Vector, gamma: f64, x: &Vector) -> Self {
        let (s, e, x) = (origin.coords(), end.coords(), x.coords());
        let mut vv = 0.0;
        let mut dv = 0.0;
        let mut dd = 0.0;
        for i in 0..s.len() {
            let v = e[i] - s[i];
            let d = x[i] - s[i];
            vv += v * v;
            dv += d * v;
            dd += d * d;
        }
        let t = dv / vv;
        let mut pp = 0.0;
        for i in 0..s.len() {
            let q = (x[i] - s[i]) - t * (e[i] - s[i]);
            pp += q * q;
        }
        let len = vv.sqrt();
        Self { len, dn: dd.sqrt(), a: dv / len, b: pp.sqrt(), gamma }
    }

    fn radial(&self) -> f64 {
        self.dn - self.len
    }

    /// Signed distance to the boundary of the cone `∠(·, e − s) ≤ γ`.
    fn cone(&self) -> f64 {
        if self.gamma >= PI {
            return f64::NEG_INFINITY;
        }
        if self.dn == 0.0 {
            return 0.0;
        }
        let delta = self.b.atan2(self.a) - self.gamma;
        if delta >= FRAC_PI_2 {
            self.dn
        } else if delta <= -FRAC_PI_2 {
            -self.dn
        } else {
            self.b * self.gamma.cos() - self.a * self.gamma.sin()
        }
    }
}
