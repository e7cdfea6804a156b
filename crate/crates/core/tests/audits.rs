use std::f64::consts::FRAC_PI_4;

use ballcover::*;

fn v(c: &[f64]) -> Vector {
    Vector::new(c.to_vec()).unwrap()
}

fn opts(samples: usize, seed: u64) -> AuditOptions {
    AuditOptions::new(samples, seed)
}

fn center(cov: &Covering) -> CenterReport {
    classify_center(cov, INTERIOR_EPS, MEMBER_TOL).unwrap()
}

#[test]
fn slab_coverage_and_center() {
    for n in [3, 5, 7] {
        let cov = slab_covering(n, n).unwrap();
        let r = check_coverage(&cov, &opts(100_000, 1)).unwrap();
        assert_eq!(r.failures, 0, "n = {n}");
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(center(&cov).classification, CenterClassification::Mixed { interior: vec![1 + n / 2] });
        let c = check_congruence(&cov, &opts(1000, 1)).unwrap();
        assert!(c.passed() && c.residual_max <= 1e-9, "{c:?}");
    }
}

#[test]
fn slab_with_middle_removed_leaves_gap_near_center() {
    let mut cov = slab_covering(3, 3).unwrap();
    cov.sets.remove(1);
    cov.witnesses = None;
    let r = check_coverage(&cov, &opts(20_000, 4)).unwrap();
    assert!(r.failures > 0);
    assert_eq!(r.verdict, Verdict::Fail);
    // every uncovered point has |x₁| < 1/3
    for w in &r.witnesses {
        assert!(w[0].abs() < 1.0 / 3.0, "{w:?}");
    }
    // failure witnesses re-test as uncovered
    for w in &r.witnesses {
        let x = Vector::new(w.clone()).unwrap();
        assert!(!cov.sets.iter().any(|s| s.contains(&cov.space, &x, MEMBER_TOL).unwrap()));
    }
}

#[test]
fn halfball_audits() {
    for dim in [2, 3, 8] {
        let cov = halfball_covering(dim).unwrap();
        assert_eq!(check_coverage(&cov, &opts(100_000, 2)).unwrap().failures, 0);
        let c = check_congruence(&cov, &opts(1000, 2)).unwrap();
        assert!(c.passed() && c.residual_max <= 1e-9);
        assert_eq!(center(&cov).classification, CenterClassification::InNoInterior);
        let d = dichotomy_audit(&cov, INTERIOR_EPS, MEMBER_TOL, 1).unwrap();
        assert_eq!(d.verdict, Verdict::Pass, "{d:?}");
        assert_eq!(d.detail.as_deref(), Some("in_no_interior"));
    }
}

#[test]
fn ommatidium_covering_audits() {
    for dim in [2, 3, 4] {
        let cov = ommatidium_covering(dim, FRAC_PI_4, 7).unwrap();
        let r = check_coverage(&cov, &opts(100_000, 3)).unwrap();
        assert_eq!(r.failures, 0, "dim {dim}: {r:?}");
        let c = center(&cov);
        assert_eq!(c.classification, CenterClassification::Mixed { interior: vec![0] });
        for s in &c.statuses[1..] {
            assert!(matches!(s, InteriorStatus::NotInterior { .. }), "{s:?}");
        }
        let g = check_congruence(&cov, &opts(200, 3)).unwrap();
        assert!(g.passed() && g.residual_max <= 1e-9, "{g:?}");
        let k = check_containment(&cov, &opts(1000, 3)).unwrap();
        assert!(k.passed() && k.residual_max <= 1e-9);
        let x = check_convexity(&cov, &opts(200, 3)).unwrap();
        assert!(x.passed(), "{x:?}");
    }
}

#[test]
fn dichotomy_not_applicable_cases() {
    let slab = slab_covering(3, 3).unwrap();
    let d = dichotomy_audit(&slab, INTERIOR_EPS, MEMBER_TOL, 1).unwrap();
    assert_eq!(d.verdict, Verdict::NotApplicable);
    assert_eq!(d.detail.as_deref(), Some("not applicable (non-NCS): mixed [2]"));
    assert!(d.passed());

    let omm = ommatidium_covering(4, FRAC_PI_4, 1).unwrap();
    let d = dichotomy_audit(&omm, INTERIOR_EPS, MEMBER_TOL, 1).unwrap();
    assert_eq!(d.verdict, Verdict::NotApplicable);
    assert!(d.detail.unwrap().ends_with("mixed [0]"));
}

#[test]
fn dichotomy_needs_a_covering_of_the_ball() {
    // θ is interior to the first ball only; the second leaves the ball
    let s = Space::euclidean(2).unwrap();
    let a = Shape::closed_ball(s.origin(), 1.0);
    let b = Shape::closed_ball(v(&[1.0, 0.0]), 1.0);
    let mut cov = Covering::new(s, vec![a, b]).unwrap();
    cov.witnesses = Some(vec![Motion::identity(2), Motion::translation(v(&[1.0, 0.0]))]);
    let d = dichotomy_audit(&cov, INTERIOR_EPS, MEMBER_TOL, 1).unwrap();
    assert_eq!(d.verdict, Verdict::NotApplicable);
    assert_eq!(d.detail.as_deref(), Some("not applicable (sets leave the ball): mixed [0]"));

    // inside the ball but not covering it
    let a = Shape::closed_ball(s.origin(), 0.5);
    let b = Shape::closed_ball(v(&[0.5, 0.0]), 0.5);
    let mut cov = Covering::new(s, vec![a, b]).unwrap();
    cov.witnesses = Some(vec![Motion::identity(2), Motion::translation(v(&[0.5, 0.0]))]);
    let d = dichotomy_audit(&cov, INTERIOR_EPS, MEMBER_TOL, 1).unwrap();
    assert_eq!(d.detail.as_deref(), Some("not applicable (sets do not cover the ball): mixed [0]"));

    let u = universal_covering(&s, 1, 0).unwrap();
    let d = dichotomy_audit(&u, INTERIOR_EPS, MEMBER_TOL, 1).unwrap();
    assert_eq!(d.detail.as_deref(), Some("not applicable (uncountable family): mixed [0]"));
}

#[test]
fn dichotomy_with_broken_witnesses_is_not_applicable() {
    let mut cov = halfball_covering(3).unwrap();
    cov.witnesses.as_mut().unwrap()[1] = Motion::identity(3);
    let d = dichotomy_audit(&cov, INTERIOR_EPS, MEMBER_TOL, 1).unwrap();
    assert_eq!(d.verdict, Verdict::NotApplicable);
    assert!(d.detail.unwrap().contains("witnesses do not verify"));
}

#[test]
fn universal_witness_mode() {
    let s = Space::euclidean(3).unwrap();
    let cov = universal_covering(&s, 64, 1).unwrap();
    let r = check_coverage(&cov, &opts(100_000, 5)).unwrap();
    assert_eq!(r.failures, 0);
    assert!(r.components["witness_distance_max"] <= 0.5 + 1e-12);
    let c = check_congruence(&cov, &opts(500, 5)).unwrap();
    assert!(c.passed());
    assert_eq!(center(&cov).classification, CenterClassification::Mixed { interior: vec![0] });

    let l15 = Space::lp(4, 1.5).unwrap();
    let cov = universal_covering(&l15, 8, 2).unwrap();
    assert_eq!(check_coverage(&cov, &opts(20_000, 5)).unwrap().failures, 0);
}

struct Scaled(Motion, f64);

impl PointMap for Scaled {
    fn map(&self, x: &Vector) -> Vector {
        self.0.apply(x).scale(self.1)
    }
    fn map_inverse(&self, x: &Vector) -> Vector {
        self.0.apply_inverse(&x.scale(1.0 / self.1))
    }
}

#[test]
fn scaled_witness_fails_congruence() {
    let cov = ommatidium_covering(2, FRAC_PI_4, 0).unwrap();
    let ws: Vec<Scaled> = cov.witnesses.clone().unwrap().into_iter().map(|m| Scaled(m, 1.05)).collect();
    let r = check_congruence_with(&cov, &ws, &opts(500, 1)).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.components["motion_isometry"] >= 1e-2);
}

#[test]
fn duplicate_extend_keeps_audits() {
    let cov = slab_covering(3, 3).unwrap();
    let ext = duplicate_extend(&cov, 6).unwrap();
    let a = check_coverage(&cov, &opts(30_000, 9)).unwrap();
    let b = check_coverage(&ext, &opts(30_000, 9)).unwrap();
    assert_eq!(a.failures, b.failures);
    assert!(check_congruence(&ext, &opts(500, 9)).unwrap().passed());
    assert_eq!(center(&ext).classification, center(&cov).classification);
}

#[test]
fn congruence_requires_witnesses() {
    let s = Space::euclidean(2).unwrap();
    let cov = Covering::new(s, vec![Shape::closed_ball(s.origin(), 1.0)]).unwrap();
    assert_eq!(check_congruence(&cov, &opts(10, 0)), Err(Error::MissingWitnesses));
}

#[test]
fn reports_do_not_depend_on_workers() {
    let cov = ommatidium_covering(3, FRAC_PI_4, 1).unwrap();
    let o = opts(20_000, 11);
    let a = check_coverage(&cov, &o.workers(1)).unwrap().to_json();
    let b = check_coverage(&cov, &o.workers(4)).unwrap().to_json();
    assert_eq!(a, b);
    let o = opts(300, 11);
    let a = check_congruence(&cov, &o.workers(1)).unwrap().without_timing().to_json();
    let b = check_congruence(&cov, &o.workers(4)).unwrap().without_timing().to_json();
    assert_eq!(a, b);
}

#[test]
fn counterexample_values() {
    let c = counterexample_r2_32();
    assert!((c.lhs - 4.0 * 2f64.cbrt()).abs() <= 1e-12);
    assert!((c.lhs - 5.039_684_199_579_493).abs() <= 1e-12);
    assert_eq!(c.rhs, 4.0);
    assert!(c.lhs - c.rhs > 1.0);
    assert!(c.holds());
}

#[test]
fn ncs_audit_verdicts() {
    for dim in [2, 5] {
        for p in [1.5, 2.0, 3.0] {
            let r = ncs_audit(&Space::lp(dim, p).unwrap(), 100_000, 1, 1).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "p {p} dim {dim}");
        }
        let r = ncs_audit(&Space::lp(dim, 1.0).unwrap(), 100_000, 1, 1).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.witnesses.len(), 2);
        let r = ncs_audit(&Space::linf(dim).unwrap(), 100_000, 1, 1).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
    }
}

fn arc(from_deg: f64, to_deg: f64) -> Shape {
    let mid = (from_deg + to_deg).to_radians() / 2.0;
    let half = (to_deg - from_deg).to_radians() / 2.0;
    Shape::ommatidium(Vector::zeros(2), v(&[mid.cos(), mid.sin()]), half)
}

fn at(deg: f64) -> Vector {
    let t = deg.to_radians();
    v(&[t.cos(), t.sin()])
}

/// Best signed antipodal objective per set over a 0.1° sweep of the circle.
fn sweep(space: &Space, sets: &[Shape]) -> Vec<f64> {
    sets.iter()
        .map(|s| {
            (0..3600)
                .map(|k| {
                    let x = at(k as f64 / 10.0);
                    let a = s.membership_score(space, &x).unwrap();
                    let b = s.membership_score(space, &-&x).unwrap();
                    a.max(b)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

#[test]
fn antipodal_two_arcs() {
    let s = Space::euclidean(2).unwrap();
    for delta in [5.0, 20.0, 60.0] {
        let sets = [arc(0.0, 180.0 + delta), arc(180.0, 360.0)];
        let cert = antipodal_search(&s, &sets, 1.0, 360, 60, 1e-6).unwrap();
        let oracle = sweep(&s, &sets);
        let best = if oracle[0] <= oracle[1] { 0 } else { 1 };
        assert_eq!(cert.index, best, "delta {delta}");
        assert_eq!(cert.index, 0);
        assert!(cert.residual <= 1e-6);
        let sc = &sets[cert.index];
        assert!(sc.contains(&s, &cert.x, 1e-6).unwrap());
        assert!(sc.contains(&s, &-&cert.x, 1e-6).unwrap());
        assert!((s.norm(&cert.x).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn antipodal_full_circle_and_errors() {
    let s = Space::euclidean(2).unwrap();
    let full = [Shape::closed_ball(s.origin(), 1.0)];
    let cert = antipodal_search(&s, &full, 1.0, 16, 5, 1e-9).unwrap();
    assert_eq!(cert.residual, 0.0);

    let gap = [arc(0.0, 90.0)];
    assert!(matches!(antipodal_search(&s, &gap, 1.0, 64, 5, 1e-9), Err(Error::CoverageGap { .. })));
    let three = [arc(0.0, 200.0), arc(180.0, 360.0), arc(0.0, 10.0)];
    assert!(antipodal_search(&s, &three, 1.0, 64, 5, 1e-9).is_err());
}

/// Three unions of caps around octant centres covering `S²`.
fn octant_sets() -> Vec<Shape> {
    let gamma = (1.0 / 3f64.sqrt()).acos() + 0.01;
    let cap = |s: [f64; 3]| Shape::ommatidium(Vector::zeros(3), v(&s).scale(1.0 / 3f64.sqrt()), gamma);
    let union = |signs: &[[f64; 3]]| Shape::FiniteUnion { parts: signs.iter().map(|&s| cap(s)).collect() };
    vec![
        union(&[[1.0, 1.0, 1.0], [1.0, 1.0, -1.0], [1.0, -1.0, -1.0]]),
        union(&[[-1.0, -1.0, -1.0], [-1.0, -1.0, 1.0], [-1.0, 1.0, 1.0]]),
        union(&[[1.0, -1.0, 1.0], [-1.0, 1.0, -1.0]]),
    ]
}

#[test]
fn antipodal_on_two_sphere() {
    let s = Space::euclidean(3).unwrap();
    let sets = octant_sets();
    let started = std::time::Instant::now();
    let cert = antipodal_search(&s, &sets, 1.0, 2000, 40, 1e-3).unwrap();
    assert!(started.elapsed().as_secs_f64() < 10.0);
    assert!(cert.residual <= 1e-3);
    // 2° grid oracle: the certificate is at least as good as the best grid pair
    let mut grid_best = f64::INFINITY;
    for i in 0..=90 {
        let th = (i as f64 * 2.0).to_radians();
        for j in 0..180 {
            let ph = (j as f64 * 2.0).to_radians();
            let x = v(&[th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]);
            for set in &sets {
                let o = set.membership_score(&s, &x).unwrap().max(set.membership_score(&s, &-&x).unwrap());
                grid_best = grid_best.min(o);
            }
        }
    }
    assert!(cert.objective <= grid_best + 1e-9, "{} vs {grid_best}", cert.objective);
    let set = &sets[cert.index];
    assert!(set.contains(&s, &cert.x, 1e-3).unwrap() && set.contains(&s, &-&cert.x, 1e-3).unwrap());
}

#[test]
fn antipodal_rejects_too_many_sets() {
    let s = Space::euclidean(2).unwrap();
    let sets = vec![Shape::closed_ball(s.origin(), 1.0); 3];
    assert!(matches!(antipodal_search(&s, &sets, 1.0, 8, 1, 1e-9), Err(Error::InvalidParameter(_))));
}
