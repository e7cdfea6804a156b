use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::space::Vector;

/// At most this many failure witnesses are kept, lowest sample index first.
pub const MAX_WITNESSES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The audit's hypotheses do not hold for this input.
    NotApplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "not applicable",
        })
    }
}

/// Machine-readable outcome of one audit.
///
/// `failures == 0` exactly when the verdict is not [`Verdict::Fail`], and
/// `witnesses` is non-empty exactly when `failures > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub kind: String,
    pub verdict: Verdict,
    pub samples: u64,
    pub seed: u64,
    pub failures: u64,
    pub residual_max: f64,
    pub witnesses: Vec<Vec<f64>>,
    /// Wall-clock time. Left out of deterministic output.
    pub runtime_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub components: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl AuditReport {
    pub(crate) fn from_tally(kind: &str, samples: u64, seed: u64, tally: Tally) -> Self {
        let verdict = if tally.failures == 0 { Verdict::Pass } else { Verdict::Fail };
        Self {
            kind: kind.to_string(),
            verdict,
            samples,
            seed,
            failures: tally.failures,
            residual_max: tally.residual_max,
            witnesses: tally.witnesses.into_iter().map(Vector::into_coords).collect(),
            runtime_ms: None,
            components: BTreeMap::new(),
            detail: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    /// Drops the wall-clock field so reports compare byte for byte.
    pub fn without_timing(mut self) -> Self {
        self.runtime_ms = None;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Order-independent reduction of per-block audit results.
#[derive(Clone, Debug, Default)]
pub(crate) struct Tally {
    pub failures: u64,
    pub residual_max: f64,
    pub witnesses: Vec<Vector>,
}

impl Tally {
    pub fn residual(&mut self, r: f64) {
        if r > self.residual_max || r.is_nan() {
            self.residual_max = if r.is_nan() { f64::INFINITY } else { r };
        }
    }

    pub fn fail(&mut self, w: Vector) {
        self.failures += 1;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(w);
        }
    }

    /// Blocks must be merged in sample-index order to keep the first
    /// witnesses.
    pub fn merge(mut self, other: Tally) -> Tally {
        self.failures += other.failures;
        self.residual(other.residual_max);
        for w in other.witnesses {
            if self.witnesses.len() >= MAX_WITNESSES {
                break;
            }
            self.witnesses.push(w);
        }
        self
    }

    pub fn merge_all(parts: impl IntoIterator<Item = Tally>) -> Tally {
        parts.into_iter().fold(Tally::default(), Tally::merge)
    }
}
