//! Coverings of normed-space balls by congruent sets, with sampling audits
//! for their geometric properties.
//!
//! ```
//! use ballcover::{classify_center, slab_covering, CenterClassification, INTERIOR_EPS, MEMBER_TOL};
//!
//! let cov = slab_covering(3, 3).unwrap();
//! let center = classify_center(&cov, INTERIOR_EPS, MEMBER_TOL).unwrap();
//! assert_eq!(center.classification, CenterClassification::Mixed { interior: vec![2] });
//! ```

pub mod covering;
pub mod error;
pub mod motion;
mod par;
pub mod report;
pub mod shape;
pub mod space;
pub mod verify;

pub use covering::{
    direction_net, duplicate_extend, halfball_covering, ommatidium_covering, slab_covering, universal_covering,
    universal_witness, CoverageMode, Covering, CoveringMeta, DirectionNet,
};
pub use error::{Error, Result};
pub use motion::{motion_audit, planar_rotation_between, trivial_shift_premise, LinearIsometry, Motion, PointMap};
pub use report::{AuditReport, Verdict};
pub use shape::{Ball, InteriorStatus, Shape, INTERIOR_EPS, MEMBER_TOL};
pub use space::{angle, inner, ncs_violation_search, sample_ball, NcsWitness, NormKind, Space, Vector};
pub use verify::{
    antipodal_search, check_congruence, check_congruence_with, check_containment, check_convexity, check_coverage,
    classify_center, counterexample_r2_32, dichotomy_audit, ncs_audit, AntipodalCertificate, AuditOptions,
    CenterClassification, CenterReport, Counterexample,
};

/// Rust snippets in the guide under `book/` compile and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/spaces.md")]
    struct Spaces;
    #[doc = include_str!("../../../book/src/motions.md")]
    struct Motions;
    #[doc = include_str!("../../../book/src/ommatidia.md")]
    struct Ommatidia;
    #[doc = include_str!("../../../book/src/coverings.md")]
    struct Coverings;
    #[doc = include_str!("../../../book/src/audits.md")]
    struct Audits;
}
