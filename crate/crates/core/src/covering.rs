//! Coverings of the closed unit ball `B̄(θ, 1)` by congruent sets, each with
//! the motions that certify congruence.
//!
//! `witnesses[i]` maps `sets[0]` onto `sets[i]`; `witnesses[0]` is the
//! identity. Sets are reported by *label*, `meta.first_label + index`, which
//! lets a family keep its natural numbering (slabs count from 1, the
//! ommatidium family from 0).

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::motion::{planar_rotation_between, LinearIsometry, Motion};
use crate::par::{self, tag};
use crate::shape::{Ball, Shape};
use crate::space::{Space, Vector};

/// Probe directions used to certify a [`DirectionNet`].
pub const NET_PROBES: usize = 4096;
/// Largest net [`direction_net`] will build.
pub const NET_CAP: usize = 2048;
/// Half-angle of every ommatidium in [`ommatidium_covering`].
pub const OMMATIDIUM_ANGLE: f64 = FRAC_PI_4;
/// The ommatidium covering certifies its net at `beta * NET_SAFETY` on the
/// probe set, so gaps between probes cannot open a hole wider than `beta`.
pub const NET_SAFETY: f64 = 0.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageMode {
    /// A point is covered when one of the listed sets contains it.
    #[default]
    Sets,
    /// The listed sets sample an uncountable family of half-radius balls;
    /// coverage is decided per point by [`universal_witness`].
    UniversalWitness,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringMeta {
    #[serde(default = "user_constructor")]
    pub constructor: String,
    /// Parameters as decimal strings; `f64` values use the shortest
    /// representation that parses back to the same bits.
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    #[serde(default)]
    pub first_label: usize,
    #[serde(default)]
    pub mode: CoverageMode,
}

fn user_constructor() -> String {
    "user".into()
}

impl CoveringMeta {
    fn new(constructor: &str, first_label: usize) -> Self {
        Self { constructor: constructor.into(), params: BTreeMap::new(), first_label, mode: CoverageMode::Sets }
    }

    fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.into(), value.to_string());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Covering {
    pub space: Space,
    pub sets: Vec<Shape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<Motion>>,
    pub meta: CoveringMeta,
}

impl Covering {
    /// A covering without congruence witnesses, e.g. for user-supplied sets.
    pub fn new(space: Space, sets: Vec<Shape>) -> Result<Self> {
        let cov = Self { space, sets, witnesses: None, meta: CoveringMeta::new("user", 0) };
        cov.validate()?;
        Ok(cov)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sets.is_empty() {
            return Err(invalid("a covering needs at least one set"));
        }
        for s in &self.sets {
            s.validate(&self.space)?;
        }
        if let Some(ws) = &self.witnesses {
            if ws.len() != self.sets.len() {
                return Err(invalid(format!("{} witnesses for {} sets", ws.len(), self.sets.len())));
            }
            for w in ws {
                w.validate(&self.space)?;
            }
        }
        Ok(())
    }

    /// The covered set, fixed at `B̄(θ, 1)`.
    pub fn ball(&self) -> Shape {
        Shape::closed_ball(self.space.origin(), 1.0)
    }

    pub fn label(&self, index: usize) -> usize {
        self.meta.first_label + index
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("coverings always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cov: Covering = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        cov.validate()?;
        Ok(cov)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_json() + "\n")
            .map_err(|e| Error::Format(format!("{}: {e}", path.as_ref().display())))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Format(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }
}

/// `n` slabs of the `ℓ∞` unit ball in `ℝ^m` cut across the first axis.
///
/// Set `i` (label `i`, 1-based) keeps `x₁ ∈ [−1 + 2(i−1)/n, −1 + 2i/n]`;
/// the witness for set `i` shifts the first coordinate by `2(i−1)/n`. The
/// centre lies in the interior of the middle slab only.
pub fn slab_covering(n: usize, m: usize) -> Result<Covering> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(invalid(format!("slab count must be odd and at least 3, got {n}")));
    }
    if m < n {
        return Err(invalid(format!("dimension {m} is smaller than slab count {n}")));
    }
    let space = Space::linf(m)?;
    let ball = Ball { center: space.origin(), radius: 1.0 };
    let width = 2.0 / n as f64;
    let mut sets = Vec::with_capacity(n);
    let mut witnesses = Vec::with_capacity(n);
    for i in 0..n {
        sets.push(Shape::SlabCap {
            ball: ball.clone(),
            axis: 0,
            lo: (2.0 * i as f64 - n as f64) / n as f64,
            hi: (2.0 * (i + 1) as f64 - n as f64) / n as f64,
        });
        let mut shift = vec![0.0; m];
        shift[0] = width * i as f64;
        witnesses.push(Motion::translation(Vector::from_raw(shift)));
    }
    let meta = CoveringMeta::new("slab", 1).param("n", n).param("dim", m);
    Ok(Covering { space, sets, witnesses: Some(witnesses), meta })
}

/// The half-radius ball centre covering `x`: `x / (2‖x‖)`.
///
/// `‖x − y_x‖ = |‖x‖ − ½| ≤ ½` whenever `0 < ‖x‖ ≤ 1`.
pub fn universal_witness(space: &Space, x: &Vector) -> Result<Vector> {
    let n = space.norm(x)?;
    if n == 0.0 {
        return Err(invalid("the centre is covered by the central ball and has no witness"));
    }
    Ok(x.scale(1.0 / (2.0 * n)))
}

/// `B̄(θ, ½)` followed by `k` balls `B̄(y, ½)` with `y` drawn from `S(θ, ½)`.
///
/// A finite `k` does not cover the ball; the covering is tagged
/// [`CoverageMode::UniversalWitness`] so audits consult [`universal_witness`]
/// for the full family.
pub fn universal_covering(space: &Space, k: usize, seed: u64) -> Result<Covering> {
    if k == 0 {
        return Err(invalid("universal covering needs at least one outer ball"));
    }
    let centers = par::map_blocks(k, seed, tag::UNIVERSAL, 1, |range, rng| {
        range.map(|_| space.random_unit(rng).scale(0.5)).collect::<Vec<_>>()
    });
    let mut sets = vec![Shape::closed_ball(space.origin(), 0.5)];
    let mut witnesses = vec![Motion::identity(space.dim)];
    for y in centers.into_iter().flatten() {
        sets.push(Shape::closed_ball(y.clone(), 0.5));
        witnesses.push(Motion::translation(y));
    }
    let mut meta = CoveringMeta::new("universal", 0)
        .param("dim", space.dim)
        .param("k", k)
        .param("seed", seed)
        .param("norm", space.norm);
    meta.mode = CoverageMode::UniversalWitness;
    Ok(Covering { space: *space, sets, witnesses: Some(witnesses), meta })
}

/// Unit directions whose angular neighbourhoods of radius `beta` cover the
/// probe set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionNet {
    pub dirs: Vec<Vector>,
    pub beta: f64,
    /// Largest angle from a probe to its nearest net direction.
    pub certificate: f64,
    pub probes: usize,
}

/// Greedy farthest-point net on the unit sphere of `ℝ^dim`.
///
/// Starts from the first basis vector and repeatedly adds the probe
/// direction farthest (in angle) from the net until all [`NET_PROBES`]
/// seeded probes lie within `beta`. The sequence of added directions does
/// not depend on `beta`, so a smaller `beta` only extends the net.
pub fn direction_net(dim: usize, beta: f64, seed: u64) -> Result<DirectionNet> {
    greedy_net(dim, beta, seed, NET_PROBES, NET_CAP)
}

fn greedy_net(dim: usize, beta: f64, seed: u64, probes: usize, cap: usize) -> Result<DirectionNet> {
    if dim < 2 {
        return Err(invalid("direction nets need dimension at least 2"));
    }
    if !(beta > 0.0 && beta <= PI) {
        return Err(invalid(format!("net angle must lie in (0, π], got {beta}")));
    }
    let space = Space::euclidean(dim)?;
    let probe_dirs: Vec<Vector> = par::map_blocks(probes, seed, tag::NET, 1, |range, rng| {
        range.map(|_| space.random_unit(rng)).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();

    let cos_beta = beta.cos();
    let first = Vector::basis(dim, 0);
    let mut best_cos: Vec<f64> = probe_dirs.iter().map(|p| p.dot(&first)).collect();
    let mut dirs = vec![first];
    loop {
        let (far, &worst) =
            best_cos.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("probe set is non-empty");
        if worst >= cos_beta || beta >= PI {
            let certificate = worst.clamp(-1.0, 1.0).acos();
            return Ok(DirectionNet { dirs, beta, certificate, probes });
        }
        if dirs.len() >= cap {
            return Err(Error::NetTooLarge { cap, beta });
        }
        let d = probe_dirs[far].clone();
        for (bc, p) in best_cos.iter_mut().zip(&probe_dirs) {
            *bc = bc.max(p.dot(&d));
        }
        dirs.push(d);
    }
}

/// Covering of the Euclidean unit ball by congruent convex ommatidia.
///
/// `sets[0] = C(−½d₁, ½d₁, π/4)` contains the centre in its interior; the
/// remaining sets are `C(θ, dᵢ, π/4)` for the directions of a net certified
/// at `beta · NET_SAFETY`. Every set has radius 1 and half-angle π/4. The
/// witness for set `i` is `x ↦ R(x + ½d₁)` with `R` the planar rotation
/// taking `d₁` to `dᵢ`.
pub fn ommatidium_covering(dim: usize, beta: f64, seed: u64) -> Result<Covering> {
    if !(beta > 0.0 && beta <= OMMATIDIUM_ANGLE) {
        return Err(invalid(format!("net angle must lie in (0, π/4], got {beta}")));
    }
    let space = Space::euclidean(dim)?;
    let net = direction_net(dim, beta * NET_SAFETY, seed)?;
    let d1 = net.dirs[0].clone();
    let half = d1.scale(0.5);

    let mut sets = vec![Shape::ommatidium(-&half, half.clone(), OMMATIDIUM_ANGLE)];
    let mut witnesses = vec![Motion::identity(dim)];
    for d in &net.dirs {
        sets.push(Shape::ommatidium(space.origin(), d.clone(), OMMATIDIUM_ANGLE));
        let rot = planar_rotation_between(&space, &d1, d)?;
        witnesses.push(rot.compose(&Motion::translation(half.clone())));
    }
    let meta = CoveringMeta::new("ommatidium", 0)
        .param("dim", dim)
        .param("beta", beta)
        .param("seed", seed)
        .param("net_certificate", net.certificate);
    Ok(Covering { space, sets, witnesses: Some(witnesses), meta })
}

/// The Euclidean unit ball split by the hyperplane `x₁ = 0` into two closed
/// halves, congruent through the reflection of the first axis.
pub fn halfball_covering(dim: usize) -> Result<Covering> {
    if dim < 2 {
        return Err(invalid("half-ball covering needs dimension at least 2"));
    }
    let space = Space::euclidean(dim)?;
    let ball = Ball { center: space.origin(), radius: 1.0 };
    let sets = vec![
        Shape::SlabCap { ball: ball.clone(), axis: 0, lo: -1.0, hi: 0.0 },
        Shape::SlabCap { ball, axis: 0, lo: 0.0, hi: 1.0 },
    ];
    let witnesses = vec![Motion::identity(dim), Motion::linear(LinearIsometry::reflection(dim, 0), dim)];
    let meta = CoveringMeta::new("halfball", 1).param("dim", dim);
    Ok(Covering { space, sets, witnesses: Some(witnesses), meta })
}

/// Pads a covering to `n` sets by repeating its last set together with that
/// set's witness.
pub fn duplicate_extend(cov: &Covering, n: usize) -> Result<Covering> {
    if n < cov.sets.len() {
        return Err(invalid(format!("cannot extend {} sets down to {n}", cov.sets.len())));
    }
    let mut out = cov.clone();
    let last = cov.sets.last().cloned().ok_or_else(|| invalid("empty covering"))?;
    out.sets.resize(n, last);
    if let Some(ws) = out.witnesses.as_mut() {
        let w = ws.last().cloned().expect("witness count matches set count");
        ws.resize(n, w);
    }
    out.meta.params.insert("extended_to".into(), n.to_string());
    Ok(out)
}
