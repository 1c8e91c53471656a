use super::*;
use proptest::prelude::*;

const PARAM_SETS: [(f64, f64); 3] = [(0.0, 2.0), (1.0, 2.0), (3.0, 1.0)];

fn params(alpha: f64, beta: f64, eps: f64) -> PhysParams<f64> {
    PhysParams::new(alpha, beta, eps).unwrap()
}

/// `n` points with `|mu r|` log-spaced in `[1e-3, 50]`, both signs.
fn sweep(p: &PhysParams<f64>, n: usize) -> Vec<f64> {
    let half = n / 2;
    let (lo, hi) = (1e-3f64.ln(), 50f64.ln());
    let mut out = Vec::with_capacity(n);
    for i in 0..half {
        let x = (lo + (hi - lo) * i as f64 / (half - 1) as f64).exp() / p.mu();
        out.push(x);
        out.push(-x);
    }
    out
}

#[test]
fn rejects_invalid_params() {
    assert!(PhysParams::new(-2.0, 1.0, 0.1).is_err());
    assert!(PhysParams::new(1.0, 0.0, 0.1).is_err());
    assert!(PhysParams::new(1.0, 2.0, 0.0).is_err());
    assert!(PhysParams::new(1.0, 2.0, 0.6).is_err());
    assert!(PhysParams::new(f64::NAN, 2.0, 0.1).is_err());
    assert!(MapKind::map_ii(f64::INFINITY).is_err());
}

#[test]
fn mu_matches_definition() {
    let p = params(1.0, 2.0, 0.1);
    assert_eq!(p.mu(), 3f64.sqrt() / 0.1);
}

#[test]
fn map_ii_at_origin_is_north_pole() {
    let p = params(0.0, 2.0, 0.1);
    let v = eval_map(&p, MapKind::MapII { k: 0.0 }, 0.0).unwrap();
    assert!(v.v1.abs() < 1e-15 && v.v2.abs() < 1e-15);
    assert!((v.v3 - 1.0).abs() < 1e-15);
}

#[test]
fn map_i_unit_norm_example() {
    let v = eval_map(&params(1.0, 2.0, 0.1), MapKind::MapI, 0.3).unwrap();
    assert!((v.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn map_ii_converges_at_positive_r() {
    let k = std::f64::consts::FRAC_PI_4;
    let target = Spin::new(k.cos(), k.sin(), 0.0);
    let mut prev = [f64::INFINITY; 3];
    for eps in [0.2, 0.1, 0.05] {
        let v = eval_map(&params(0.0, 2.0, eps), MapKind::MapII { k }, 0.1).unwrap();
        let err = [
            (v.v1 - target.v1).abs(),
            (v.v2 - target.v2).abs(),
            (v.v3 - target.v3).abs(),
        ];
        for i in 0..3 {
            assert!(err[i] < prev[i], "component {i} at eps {eps}");
        }
        prev = err;
    }
}

#[test]
fn unit_norm_and_strict_pole_avoidance_over_sweep() {
    for (a, b) in PARAM_SETS {
        for eps in [0.2, 0.1, 0.05] {
            let p = params(a, b, eps);
            for kind in [MapKind::MapI, MapKind::MapII { k: 0.7 }] {
                for r in sweep(&p, 1000) {
                    let v = eval_map(&p, kind, r).unwrap();
                    assert!((v.norm() - 1.0).abs() <= 1e-12, "{kind:?} r={r}");
                    if kind == MapKind::MapI {
                        assert!(v.v3.abs() < 1.0);
                    }
                }
            }
        }
    }
}

#[test]
fn survives_extreme_arguments() {
    let p = params(0.0, 2.0, 0.01);
    for r in [-50.0, -5.0, 5.0, 50.0] {
        for kind in [MapKind::MapI, MapKind::MapII { k: 0.0 }] {
            let jet = map_jet(&p, kind, r).unwrap();
            assert!((jet.value.norm() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn wronskian_identities() {
    for (a, b) in PARAM_SETS {
        for eps in [0.2, 0.1, 0.05] {
            let p = params(a, b, eps);
            let expected = -p.mu() * (eps * eps).sin();
            for r in [-1.0, 0.0, 1.0] {
                let w = map_jet(&p, MapKind::MapI, r).unwrap().wronskian();
                assert!(((w - expected) / expected).abs() < 1e-8, "r={r} w={w}");
                let w2 = map_jet(&p, MapKind::MapII { k: 1.1 }, r)
                    .unwrap()
                    .wronskian();
                assert_eq!(w2, 0.0);
            }
        }
    }
}

#[test]
fn closed_forms_match_finite_differences() {
    for (a, b) in PARAM_SETS {
        for eps in [0.2, 0.1, 0.05] {
            let p = params(a, b, eps);
            for kind in [MapKind::MapI, MapKind::MapII { k: 0.3 }] {
                for r in [-0.4, -0.05, 0.0, 0.02, 0.3] {
                    let check = verify_derivatives(&p, kind, r).unwrap();
                    assert!(check.rel_first < 1e-6, "{kind:?} r={r}: {check:?}");
                    assert!(check.rel_second < 1e-6, "{kind:?} r={r}: {check:?}");
                }
            }
        }
    }
}

#[test]
fn residuals_vanish_for_map_i() {
    let p = params(1.0, 2.0, 0.1);
    for r in [-0.5, 0.0, 0.5] {
        let res = ode_residuals(&p, MapKind::MapI, r).unwrap();
        assert!(
            res.relative1() <= 1e-6 && res.relative2() <= 1e-6,
            "{res:?}"
        );
    }
}

#[test]
fn residuals_hold_at_large_mu_r() {
    let p = params(0.0, 2.0, 0.05);
    let res = ode_residuals(&p, MapKind::MapI, 1.0).unwrap();
    assert!(res.res1.is_finite() && res.res2.is_finite());
    assert!(
        res.relative1() <= 1e-5 && res.relative2() <= 1e-5,
        "{res:?}"
    );
}

#[test]
fn residuals_from_finite_differences_agree() {
    // substitute the numerical derivatives into the profile system
    let p = params(1.0, 2.0, 0.1);
    for r in [-0.5, 0.0, 0.5] {
        let v = eval_map(&p, MapKind::MapI, r).unwrap();
        let f = |x: f64| eval_map(&p, MapKind::MapI, x).unwrap().to_array();
        let h = 1e-4 * p.epsilon();
        let d1 = richardson::first(f, r, h, 2);
        let d2 = richardson::second(f, r, 1e-3 * p.epsilon(), 2);
        let grad_sq = d1.iter().map(|d| d * d).sum::<f64>();
        let force = p.anisotropy_force(v.v3, 1.0 - v.v3 * v.v3);
        let res1 = v.v2 * d2[0] - v.v1 * d2[1];
        let res2 = d2[2] + grad_sq * v.v3 - force;
        let scale = (v.v2 * d2[0]).abs().max(d2[2].abs()).max(force.abs());
        assert!(
            res1.abs() / scale < 1e-6 && res2.abs() / scale < 1e-6,
            "r={r}"
        );
    }
}

#[test]
fn map_ii_first_residual_is_exactly_zero() {
    let p = params(0.0, 2.0, 0.1);
    let res = ode_residuals(&p, MapKind::MapII { k: 0.0 }, 0.2).unwrap();
    assert_eq!(res.res1, 0.0);
    let res = ode_residuals(&p, MapKind::MapII { k: 0.9 }, 0.2).unwrap();
    assert_eq!(res.res1, 0.0);
    assert!(res.relative2() < 1e-6);
}

#[test]
fn pole_is_reported() {
    let p = params(0.0, 2.0, 0.1);
    let err = ode_residuals(&p, MapKind::MapII { k: 0.0 }, 0.0).unwrap_err();
    assert!(matches!(err, Error::DegeneratePole { .. }));
}

#[test]
fn critical_point_symmetric_case_is_origin() {
    for eps in [0.3, 0.1, 0.02] {
        let p = params(0.0, 2.0, eps);
        assert!(critical_point_v3(&p).abs() < 1e-15);
        let dv3 = eval_map_derivatives(&p, MapKind::MapI, 0.0).unwrap().dv[2];
        assert!(dv3.abs() <= 1e-10 * p.mu());
    }
}

fn bisect_dv3(p: &PhysParams<f64>, mut lo: f64, mut hi: f64) -> f64 {
    let g = |r: f64| eval_map_derivatives(p, MapKind::MapI, r).unwrap().dv[2];
    let glo = g(lo);
    assert!(glo * g(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) * glo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn critical_point_matches_bisection() {
    let p = params(1.0, 2.0, 0.1);
    let r_star = critical_point_v3(&p);
    let root = bisect_dv3(&p, -1.0, 1.0);
    assert!(
        (r_star - root).abs() <= 1e-10 * p.epsilon(),
        "{r_star} vs {root}"
    );
    let dv3 = eval_map_derivatives(&p, MapKind::MapI, r_star).unwrap().dv[2];
    assert!(dv3.abs() <= 1e-10 * p.mu());
}

#[test]
fn critical_point_shrinks_with_eps() {
    let mut prev = f64::INFINITY;
    for eps in [0.2, 0.1, 0.05] {
        let r = critical_point_v3(&params(1.0, 2.0, eps)).abs();
        assert!(r < prev);
        assert!(r <= eps * (0.25f64 * 4.0).ln().abs() / (4.0 * 3f64.sqrt()) + eps * eps);
        prev = r;
    }
}

#[test]
fn map_ii_critical_point_is_the_pole() {
    let p = params(1.0, 3.0, 0.1);
    let r = critical_point_v3_map_ii(&p);
    let jet = map_jet(&p, MapKind::MapII { k: 0.0 }, r).unwrap();
    assert!(jet.d1[2].abs() < 1e-10 * p.mu());
    assert!((jet.value.v3 - 1.0).abs() < 1e-12);
}

#[test]
fn front_value_examples() {
    let a = front_value(&params(0.0, 2.0, 0.1));
    assert!(a.v1 == 0.0 && a.v2.abs() < 1e-15 && (a.v3 - 1.0).abs() < 1e-15);
    for (al, b) in PARAM_SETS {
        assert!((front_value(&params(al, b, 0.1)).norm() - 1.0).abs() < 1e-12);
    }
    let p = params(1.0, 2.0, 0.01);
    let v = eval_map(&p, MapKind::MapI, 0.0).unwrap();
    let a = front_value(&p);
    assert!(v.distance(a) < 5e-3);
    assert!((v.v1 - a.v1).abs() < 5e-3 && (v.v2 - a.v2).abs() < 5e-3);
}

#[test]
fn map_i_limit_signs_follow_direct_evaluation() {
    let p = params(1.0, 2.0, 0.02);
    for r in [-0.1, 0.1] {
        let v = eval_map(&p, MapKind::MapI, r).unwrap();
        let lim = limit_value(&p, MapKind::MapI, r);
        assert!(v.distance(lim) < 1e-2, "r={r} v={v:?}");
    }
}

#[test]
fn transcription_error_is_detected() {
    // a deliberately wrong closed form must trip the same tolerance check
    let p = params(1.0, 2.0, 0.1);
    let numeric = fd_derivatives(&p, MapKind::MapI, 0.2).unwrap();
    let closed = eval_map_derivatives(&p, MapKind::MapI, 0.2).unwrap();
    let wrong = closed.dv[2] * (1.0 + 1e-3);
    assert!(((wrong - numeric.dv[2]) / numeric.dv[2]).abs() > TRANSCRIPTION_TOLERANCE);
}

#[test]
fn single_precision_is_usable() {
    let p = PhysParams::<f32>::new(1.0, 2.0, 0.1).unwrap();
    let v = eval_map(&p, MapKind::MapI, 0.3f32).unwrap();
    assert!((v.norm() - 1.0).abs() < 1e-5);
}

proptest! {
    #[test]
    fn unit_norm_everywhere(
        alpha in -0.9f64..4.0,
        beta in 1.0f64..4.0,
        eps in 0.02f64..0.5,
        mu_r in -50.0f64..50.0,
        k in -3.2f64..3.2,
    ) {
        let p = params(alpha, beta, eps);
        let r = mu_r / p.mu();
        for kind in [MapKind::MapI, MapKind::MapII { k }] {
            let v = eval_map(&p, kind, r).unwrap();
            prop_assert!((v.norm() - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn residuals_vanish_over_sweep() {
    for (a, b) in PARAM_SETS {
        for eps in [0.2, 0.1, 0.05] {
            let p = params(a, b, eps);
            for kind in [MapKind::MapI, MapKind::MapII { k: 0.4 }] {
                for r in sweep(&p, 1000) {
                    let res = ode_residuals(&p, kind, r).unwrap();
                    assert!(
                        res.relative1() <= 1e-6,
                        "{kind:?} a={a} eps={eps} r={r} {res:?}"
                    );
                    assert!(
                        res.relative2() <= 1e-6,
                        "{kind:?} a={a} eps={eps} r={r} {res:?}"
                    );
                }
            }
        }
    }
}
