//! Sampling audits over coverings: coverage, congruence, containment,
//! convexity, the centre-interior dichotomy, the antipodal search, and the
//! `ℓ_{3/2}` parallelogram counterexample.
//!
//! Every audit that samples splits its sample range into fixed blocks with
//! their own random streams, so reports do not depend on `workers`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::covering::{universal_witness, CoverageMode, Covering};
use crate::error::{invalid, Error, Result};
use crate::motion::{motion_audit, PointMap};
use crate::par::{self, tag};
use crate::report::{AuditReport, Tally, Verdict, MAX_WITNESSES};
use crate::shape::{InteriorStatus, Shape, MEMBER_TOL};
use crate::space::{ncs_violation_search, NormKind, Space, Vector};

/// Motion samples drawn per witness inside [`check_congruence`].
pub const WITNESS_MOTION_SAMPLES: usize = 1000;
/// Samples per hypothesis check in [`dichotomy_audit`].
pub const DICHOTOMY_SAMPLES: usize = 10_000;
/// Grid candidates per set handed to the local refiner.
const ANTIPODAL_STARTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditOptions {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub workers: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self { samples: 100_000, seed: 0, tol: MEMBER_TOL, workers: 1 }
    }
}

impl AuditOptions {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, seed, ..Self::default() }
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    fn check(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(invalid("audits need at least one sample"));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(invalid(format!("tolerance must be non-negative, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Samples `B̄(θ, 1)` and counts points no set contains within `tol`.
///
/// Coverings in [`CoverageMode::UniversalWitness`] are checked against the
/// full half-radius family: `x` is covered by `B̄(θ, ½)` when `x = θ` and by
/// `B̄(universal_witness(x), ½)` otherwise. The component
/// `witness_distance_max` then records the largest `‖x − y_x‖`.
pub fn check_coverage(cov: &Covering, opts: &AuditOptions) -> Result<AuditReport> {
    opts.check()?;
    cov.validate()?;
    let space = &cov.space;
    let origin = space.origin();
    let mode = cov.meta.mode;

    let blocks = par::map_blocks(opts.samples, opts.seed, tag::COVERAGE, opts.workers, |range, rng| {
        let mut tally = Tally::default();
        let mut far = 0.0f64;
        for _ in range {
            let x = space.sample_ball_point(origin.coords(), 1.0, rng)?;
            let defect = match mode {
                CoverageMode::Sets => {
                    cov.sets.iter().map(|s| s.score(space, &x)).fold(f64::INFINITY, f64::min).max(0.0)
                }
                CoverageMode::UniversalWitness => {
                    let n = space.norm.eval(x.coords());
                    if n == 0.0 {
                        0.0
                    } else {
                        let y = universal_witness(space, &x)?;
                        let d = space.norm.dist(x.coords(), y.coords());
                        far = far.max(d);
                        (d - 0.5).max(0.0)
                    }
                }
            };
            tally.residual(defect);
            if defect > opts.tol || defect.is_nan() {
                tally.fail(x);
            }
        }
        Ok((tally, far))
    });
    let (tally, far) = collect_blocks(blocks)?;
    let mut report = AuditReport::from_tally("coverage", opts.samples as u64, opts.seed, tally);
    if mode == CoverageMode::UniversalWitness {
        report.components.insert("witness_distance_max".into(), far);
    }
    Ok(report)
}

/// Transports sampled members of `sets[0]` through each witness into
/// `sets[i]` and members of `sets[i]` back through the inverse, then runs
/// [`motion_audit`] on every distinct witness.
///
/// `opts.samples` points are drawn per set and per direction.
pub fn check_congruence(cov: &Covering, opts: &AuditOptions) -> Result<AuditReport> {
    let ws = cov.witnesses.as_ref().ok_or(Error::MissingWitnesses)?;
    check_congruence_with(cov, ws, opts)
}

/// [`check_congruence`] with caller-supplied maps in place of the stored
/// witnesses.
pub fn check_congruence_with<M: PointMap>(cov: &Covering, witnesses: &[M], opts: &AuditOptions) -> Result<AuditReport> {
    opts.check()?;
    cov.validate()?;
    if witnesses.len() != cov.sets.len() {
        return Err(invalid(format!("{} witnesses for {} sets", witnesses.len(), cov.sets.len())));
    }
    let space = &cov.space;
    let per = opts.samples;
    let total = per * cov.sets.len();
    let first = &cov.sets[0];

    let transport = |t: u64, forward: bool| {
        let blocks = par::map_blocks(total, opts.seed, t, opts.workers, |range, rng| {
            let mut tally = Tally::default();
            for k in range {
                let i = k / per;
                let (src, dst) = if forward { (first, &cov.sets[i]) } else { (&cov.sets[i], first) };
                let x = src.sample_member(space, rng)?;
                let y = if forward { witnesses[i].map(&x) } else { witnesses[i].map_inverse(&x) };
                let defect = dst.score(space, &y).max(0.0);
                tally.residual(defect);
                if defect > opts.tol || defect.is_nan() {
                    tally.fail(x);
                }
            }
            Ok((tally, 0.0))
        });
        collect_blocks(blocks).map(|(t, _)| t)
    };
    let fwd = transport(tag::CONGRUENCE_FWD, true)?;
    let inv = transport(tag::CONGRUENCE_INV, false)?;

    let mut motion = Tally::default();
    let mut comps: BTreeMap<String, f64> = BTreeMap::new();
    for w in witnesses {
        let r = motion_audit(w, space, per.min(WITNESS_MOTION_SAMPLES), opts.seed, opts.workers)?;
        let mut t = Tally::default();
        t.residual(r.residual_max);
        t.failures = r.failures;
        t.witnesses = r.witnesses.into_iter().map(Vector::from_raw).collect();
        motion = motion.merge(t);
        for (k, v) in r.components {
            let e = comps.entry(format!("motion_{k}")).or_insert(0.0);
            *e = e.max(v);
        }
    }

    comps.insert("forward".into(), fwd.residual_max);
    comps.insert("inverse".into(), inv.residual_max);
    comps.insert("motion".into(), motion.residual_max);
    let tally = Tally::merge_all([fwd, inv, motion]);
    let mut report = AuditReport::from_tally("congruence", (2 * total) as u64, opts.seed, tally);
    report.components = comps;
    Ok(report)
}

/// Checks that sampled members of every set lie in the covered ball.
pub fn check_containment(cov: &Covering, opts: &AuditOptions) -> Result<AuditReport> {
    opts.check()?;
    cov.validate()?;
    let space = &cov.space;
    let ball = cov.ball();
    let per = opts.samples;
    let total = per * cov.sets.len();
    let blocks = par::map_blocks(total, opts.seed, tag::CONTAINMENT, opts.workers, |range, rng| {
        let mut tally = Tally::default();
        for k in range {
            let x = cov.sets[k / per].sample_member(space, rng)?;
            let defect = ball.score(space, &x).max(0.0);
            tally.residual(defect);
            if defect > opts.tol || defect.is_nan() {
                tally.fail(x);
            }
        }
        Ok((tally, 0.0))
    });
    let (tally, _) = collect_blocks(blocks)?;
    Ok(AuditReport::from_tally("containment", total as u64, opts.seed, tally))
}

/// Draws `opts.samples` member pairs per set and tests their midpoint and a
/// random convex combination for membership.
pub fn check_convexity(cov: &Covering, opts: &AuditOptions) -> Result<AuditReport> {
    opts.check()?;
    cov.validate()?;
    let space = &cov.space;
    let per = opts.samples;
    let total = per * cov.sets.len();
    let blocks = par::map_blocks(total, opts.seed, tag::CONVEXITY, opts.workers, |range, rng| {
        let mut tally = Tally::default();
        for k in range {
            let set = &cov.sets[k / per];
            let x = set.sample_member(space, rng)?;
            let y = set.sample_member(space, rng)?;
            let t: f64 = rng.random_range(0.0..=1.0);
            for lam in [0.5, t] {
                let z = x.scale(lam).add_scaled(1.0 - lam, &y);
                let defect = set.score(space, &z).max(0.0);
                tally.residual(defect);
                if defect > opts.tol || defect.is_nan() {
                    tally.fail(z);
                }
            }
        }
        Ok((tally, 0.0))
    });
    let (tally, _) = collect_blocks(blocks)?;
    Ok(AuditReport::from_tally("convexity", total as u64, opts.seed, tally))
}

fn collect_blocks(blocks: Vec<Result<(Tally, f64)>>) -> Result<(Tally, f64)> {
    let mut tallies = Vec::with_capacity(blocks.len());
    let mut extra = 0.0f64;
    for b in blocks {
        let (t, e) = b?;
        tallies.push(t);
        extra = extra.max(e);
    }
    Ok((Tally::merge_all(tallies), extra))
}

/// Where the centre `θ` sits relative to the interiors of the sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum CenterClassification {
    InAllInteriors,
    InNoInterior,
    /// Labels of the sets whose interior contains `θ`; a non-empty proper
    /// subset of all labels.
    Mixed {
        interior: Vec<usize>,
    },
}

impl std::fmt::Display for CenterClassification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CenterClassification::InAllInteriors => f.write_str("in_all_interiors"),
            CenterClassification::InNoInterior => f.write_str("in_no_interior"),
            CenterClassification::Mixed { interior } => write!(f, "mixed {interior:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterReport {
    pub classification: CenterClassification,
    /// Per set, in set order.
    pub statuses: Vec<InteriorStatus>,
    /// Labels of sets that got neither certificate. They count as
    /// not-interior in `classification`.
    pub boundary: Vec<usize>,
}

/// Classifies `θ` against every set with [`Shape::interior_classify`].
pub fn classify_center(cov: &Covering, eps: f64, tol: f64) -> Result<CenterReport> {
    cov.validate()?;
    let o = cov.space.origin();
    let statuses =
        cov.sets.iter().map(|s| s.interior_classify(&cov.space, &o, eps, tol)).collect::<Result<Vec<_>>>()?;
    let interior: Vec<usize> =
        statuses.iter().enumerate().filter(|(_, s)| s.is_interior()).map(|(i, _)| cov.label(i)).collect();
    let boundary = statuses
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!(s, InteriorStatus::Boundary))
        .map(|(i, _)| cov.label(i))
        .collect();
    let classification = if interior.is_empty() {
        CenterClassification::InNoInterior
    } else if interior.len() == statuses.len() {
        CenterClassification::InAllInteriors
    } else {
        CenterClassification::Mixed { interior }
    };
    Ok(CenterReport { classification, statuses, boundary })
}

/// Tests the all-or-none dichotomy for the centre.
///
/// The audit applies when the space is strictly convex, the covering is a
/// finite family of at most `dim` sets, its witnesses pass
/// [`check_congruence`], and sampling confirms the sets lie in `B̄(θ, 1)`
/// and cover it. Each sampled check uses [`DICHOTOMY_SAMPLES`] points (per
/// set where applicable) and seed 0. The audit then fails exactly when the
/// classification is mixed. Otherwise the verdict is
/// [`Verdict::NotApplicable`] and `detail` names the missing hypothesis
/// together with the observed classification.
pub fn dichotomy_audit(cov: &Covering, eps: f64, tol: f64, workers: usize) -> Result<AuditReport> {
    let center = classify_center(cov, eps, tol)?;
    let observed = center.classification.to_string();
    let not_applicable = |why: &str| {
        let mut r = AuditReport::from_tally("dichotomy", 0, 0, Tally::default());
        r.verdict = Verdict::NotApplicable;
        r.detail = Some(format!("not applicable ({why}): {observed}"));
        r
    };
    if !cov.space.is_strictly_convex() {
        return Ok(not_applicable("non-NCS"));
    }
    if cov.meta.mode == CoverageMode::UniversalWitness {
        return Ok(not_applicable("uncountable family"));
    }
    if cov.sets.len() > cov.space.dim {
        return Ok(not_applicable("more sets than dimensions"));
    }
    if cov.witnesses.is_none() {
        return Ok(not_applicable("no congruence witnesses"));
    }
    let opts = AuditOptions::new(DICHOTOMY_SAMPLES, 0).tol(tol).workers(workers);
    type Audit = fn(&Covering, &AuditOptions) -> Result<AuditReport>;
    let checks: [(Audit, &str); 3] = [
        (check_congruence, "witnesses do not verify"),
        (check_containment, "sets leave the ball"),
        (check_coverage, "sets do not cover the ball"),
    ];
    let mut samples = 0;
    for (check, why) in checks {
        let r = check(cov, &opts)?;
        if !r.passed() {
            return Ok(not_applicable(why));
        }
        samples += r.samples;
    }
    Ok(dichotomy_verdict(cov, &center, samples))
}

fn dichotomy_verdict(cov: &Covering, center: &CenterReport, samples: u64) -> AuditReport {
    let mut tally = Tally::default();
    if let CenterClassification::Mixed { .. } = center.classification {
        tally.fail(cov.space.origin());
        for s in &center.statuses {
            if let InteriorStatus::NotInterior { witness } = s {
                tally.witnesses.push(witness.clone());
            }
        }
        tally.witnesses.truncate(MAX_WITNESSES);
    }
    let mut r = AuditReport::from_tally("dichotomy", samples, 0, tally);
    r.detail = Some(center.classification.to_string());
    r
}

/// A set containing an antipodal pair `x`, `−x` up to `residual`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AntipodalCertificate {
    pub index: usize,
    pub x: Vector,
    /// `max(0, score(x), score(−x))` for `sets[index]`.
    pub residual: f64,
    /// The signed objective `max(score(x), score(−x))`; negative when both
    /// points are strictly inside.
    pub objective: f64,
}

/// Searches `S(θ, radius)` for a set containing an antipodal pair.
///
/// The sphere is probed on a grid (`grid` equally spaced angles in the
/// plane; `grid` seeded random directions plus the `±` axis directions in
/// higher dimensions). Every probe must be covered within `tol`. For each
/// set the best [`ANTIPODAL_STARTS`] probes by `max(score(x), score(−x))`
/// are refined by coordinate steps that are renormalised to the sphere and
/// halved whenever a full sweep makes no progress. The set with the lowest
/// signed objective wins.
pub fn antipodal_search(
    space: &Space,
    sets: &[Shape],
    radius: f64,
    grid: usize,
    refine_iters: usize,
    tol: f64,
) -> Result<AntipodalCertificate> {
    if sets.is_empty() {
        return Err(invalid("antipodal search needs at least one set"));
    }
    if space.dim < 2 {
        return Err(invalid("antipodal search needs dimension at least 2"));
    }
    if sets.len() > space.dim {
        return Err(invalid(format!(
            "{} sets exceed dimension {}; the antipodal guarantee needs at most dim sets",
            sets.len(),
            space.dim
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid(format!("sphere radius must be positive, got {radius}")));
    }
    if grid == 0 {
        return Err(invalid("antipodal search needs a non-empty grid"));
    }
    for s in sets {
        s.validate(space)?;
    }

    let to_sphere = |v: &Vector| v.scale(radius / space.norm.eval(v.coords()));
    let probes: Vec<Vector> = if space.dim == 2 {
        (0..grid)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / grid as f64;
                to_sphere(&Vector::from_raw(vec![t.cos(), t.sin()]))
            })
            .collect()
    } else {
        let mut rng = par::rng_for(0, tag::PROBES, 1);
        let mut p: Vec<Vector> = (0..space.dim)
            .flat_map(|i| {
                let e = Vector::basis(space.dim, i);
                [to_sphere(&e), to_sphere(&-&e)]
            })
            .collect();
        p.extend((0..grid).map(|_| to_sphere(&space.random_unit(&mut rng))));
        p
    };

    for x in &probes {
        let best = sets.iter().map(|s| s.score(space, x)).fold(f64::INFINITY, f64::min);
        if best > tol {
            return Err(Error::CoverageGap { probe: x.coords().to_vec(), defect: best });
        }
    }

    let objective = |s: &Shape, x: &Vector| s.score(space, x).max(s.score(space, &-x));
    let initial_step = if space.dim == 2 { 2.0 * PI / grid as f64 } else { 0.5 } * radius;

    let mut best: Option<AntipodalCertificate> = None;
    for (index, set) in sets.iter().enumerate() {
        let mut ranked: Vec<(f64, usize)> = probes.iter().enumerate().map(|(k, x)| (objective(set, x), k)).collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(start_obj, k) in ranked.iter().take(ANTIPODAL_STARTS) {
            let mut x = probes[k].clone();
            let mut obj = start_obj;
            let mut step = initial_step;
            for _ in 0..refine_iters {
                let mut moved = false;
                for j in 0..space.dim {
                    for sign in [1.0, -1.0] {
                        let mut c = x.clone().into_coords();
                        c[j] += sign * step;
                        let c = Vector::from_raw(c);
                        if space.norm.eval(c.coords()) == 0.0 {
                            continue;
                        }
                        let c = to_sphere(&c);
                        let o = objective(set, &c);
                        if o < obj {
                            x = c;
                            obj = o;
                            moved = true;
                        }
                    }
                }
                if !moved {
                    step *= 0.5;
                }
            }
            if best.as_ref().is_none_or(|b| obj < b.objective) {
                best = Some(AntipodalCertificate { index, x, residual: obj.max(0.0), objective: obj });
            }
        }
    }
    let cert = best.expect("at least one set and one probe");
    if cert.residual > tol {
        return Err(Error::ResidualAboveTolerance {
            index: cert.index,
            point: cert.x.into_coords(),
            residual: cert.residual,
            tol,
        });
    }
    Ok(cert)
}

/// Both sides of the parallelogram-type inequality in `ℓ_{3/2}` on the
/// plane at `x = (1, 0)`, `y = (0, 1)`, `z = (1, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    /// `‖x − y‖² + ‖z‖²`
    pub lhs: f64,
    /// `‖x‖² + ‖y‖² + ‖x − z‖² + ‖y − z‖²`
    pub rhs: f64,
}

impl Counterexample {
    pub fn holds(&self) -> bool {
        self.lhs > self.rhs
    }
}

/// Evaluates the inequality in `ℝ²` with the `ℓ_{3/2}` norm, where it
/// fails: `lhs = 4·2^{1/3} > 4 = rhs`.
pub fn counterexample_r2_32() -> Counterexample {
    let norm = NormKind::Lp { p: 1.5 };
    let sq = |v: [f64; 2]| norm.eval(&v).powi(2);
    let (x, y, z) = ([1.0, 0.0], [0.0, 1.0], [1.0, 1.0]);
    let sub = |a: [f64; 2], b: [f64; 2]| [a[0] - b[0], a[1] - b[1]];
    Counterexample { lhs: sq(sub(x, y)) + sq(z), rhs: sq(x) + sq(y) + sq(sub(x, z)) + sq(sub(y, z)) }
}

/// Strict-convexity audit of the unit sphere. Fails, with the offending
/// pair `[x, y]` as witnesses, when a flat segment is found.
pub fn ncs_audit(space: &Space, samples: usize, seed: u64, workers: usize) -> Result<AuditReport> {
    let found = ncs_violation_search(space, samples, seed, workers)?;
    let mut tally = Tally::default();
    let mut components = BTreeMap::new();
    if let Some(w) = found {
        tally.residual(w.combo_norm);
        tally.fail(w.x);
        tally.witnesses.push(w.y);
        components.insert("lambda".into(), w.lambda);
        components.insert("combo_norm".into(), w.combo_norm);
    }
    let mut r = AuditReport::from_tally("ncs", samples as u64, seed, tally);
    r.components = components;
    r.detail = Some(format!("norm {}", space.norm));
    Ok(r)
}
