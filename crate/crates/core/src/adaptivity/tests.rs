use proptest::prelude::*;

use super::*;
use crate::problems::LinearScalar;
use crate::tableau::{load_builtin, load_inner};

fn est(slow: f64, fast: f64) -> ErrorEstimate {
    ErrorEstimate { slow, fast, fast_available: true }
}

#[test]
fn slow_error_of_identical_solutions_is_zero() {
    assert_eq!(estimate_slow_error(&[1.0, 2.0], &[1.0, 2.0], &[1e-6], 1e-4), 0.0);
}

#[test]
fn slow_error_at_the_absolute_tolerance_is_one() {
    assert_eq!(estimate_slow_error(&[1.25], &[1.0], &[0.25], 0.0), 1.0);
}

#[test]
fn slow_error_vector_case() {
    let e = estimate_slow_error(&[1.0, 2.0, -3.0], &[1.1, 2.0, -2.9], &[0.1], 0.1);
    assert!((e - 0.31051428824586713).abs() < 1e-15);
    let e = estimate_slow_error(&[1.0, 2.0], &[1.0, 2.5], &[0.1, 1.0], 0.0);
    assert!((e - (0.125f64).sqrt()).abs() < 1e-15);
}

#[test]
fn non_finite_slow_error_is_infinite() {
    assert_eq!(estimate_slow_error(&[f64::NAN], &[1.0], &[1e-6], 1e-4), f64::INFINITY);
    assert_eq!(estimate_slow_error(&[f64::INFINITY], &[1.0], &[1e-6], 1e-4), f64::INFINITY);
}

#[test]
fn lasa_mean() {
    assert_eq!(accumulate_fast_error(&[0.3; 7]), Some(0.3));
    assert_eq!(accumulate_fast_error(&[0.7]), Some(0.7));
    let stages = [vec![1.0, 3.0], vec![2.0]];
    assert_eq!(accumulate_fast_error(&stages.concat()), Some(2.0));
    assert_eq!(accumulate_fast_error(&[]), None);
}

#[test]
fn controller_fixed_point() {
    let st = ControllerState { safety: 1.0, ..ControllerState::new(3, 3) };
    let d = controller_update(&st, &est(1.0, 1.0), 0.25, 17).unwrap();
    assert!(d.accept);
    assert_eq!(d.h_next, 0.25);
    assert_eq!(d.m_next, 17);
}

#[test]
fn controller_growth_on_small_slow_error() {
    let st = ControllerState { safety: 1.0, ..ControllerState::new(2, 2) };
    let d = controller_update(&st, &est(0.5, 1.0), 1.0, 10).unwrap();
    assert!((d.h_next - 1.1019051158766107).abs() < 1e-14);
    assert_eq!(d.m_next, 12);
}

#[test]
fn fast_rejection_always_refines_the_fast_step() {
    // Slow error small enough to grow H, fast error slightly above 1.
    let st = ControllerState::new(2, 2);
    let (h, m) = (5.6e-3, 3);
    let d = controller_update(&st, &est(0.47, 1.36), h, m).unwrap();
    assert!(!d.accept);
    assert!(d.h_next / (d.m_next as f64) < h / (m as f64));
}

#[test]
fn controller_rejects_and_shrinks() {
    let st = ControllerState::new(2, 2);
    let d = controller_update(&st, &est(4.0, 0.5), 1.0, 10).unwrap();
    assert!(!d.accept && d.h_next < 1.0);
    let d = controller_update(&st, &est(0.5, 4.0), 1.0, 10).unwrap();
    assert!(!d.accept && d.m_next > 10);
}

#[test]
fn controller_limits() {
    let st = ControllerState::new(2, 2);
    let d = controller_update(&st, &est(0.0, 0.0), 1.0, 10).unwrap();
    assert_eq!(d.h_next, 5.0);
    let d = controller_update(&st, &est(f64::INFINITY, 1.0), 1.0, 10).unwrap();
    assert!((d.h_next - 0.1).abs() < 1e-15);
    let d = controller_update(&st, &est(1.0, 1e300), 1.0, 500_000).unwrap();
    assert_eq!(d.m_next, 1_000_000);
    let d = controller_update(&st, &est(1.0, 1e-300), 1.0, 1).unwrap();
    assert_eq!(d.m_next, 1);
    assert!(matches!(controller_update(&st, &est(10.0, 1.0), 1e-12, 4), Err(Error::StepSizeTooSmall(_))));
}

#[test]
fn missing_fast_estimate_keeps_the_fast_step_ratio() {
    let st = ControllerState::new(2, 2);
    let e = ErrorEstimate { slow: 0.3, fast: 0.0, fast_available: false };
    assert_eq!(controller_update(&st, &e, 1.0, 8).unwrap().m_next, 8);
}

#[test]
fn invalid_controller_rejected() {
    assert!(ControllerState { safety: 1.5, ..ControllerState::new(2, 2) }.validate().is_err());
    assert!(ControllerState { m_min: 0, ..ControllerState::new(2, 2) }.validate().is_err());
    assert!(ControllerState::new(2, 2).validate().is_ok());
}

proptest! {
    #[test]
    fn controller_is_scale_free(s in 1e-3f64..1e3, f in 1e-3f64..1e3, h in 1e-3f64..1.0, scale in 1e-3f64..1e3) {
        let st = ControllerState::new(3, 3);
        let a = controller_update(&st, &est(s, f), h, 20).unwrap();
        let b = controller_update(&st, &est(s, f), h * scale, 20).unwrap();
        prop_assert!((b.h_next - scale * a.h_next).abs() <= 1e-12 * b.h_next);
        prop_assert_eq!(a.m_next, b.m_next);
    }

    #[test]
    fn acceptance_depends_only_on_estimates(s in 0f64..2.0, f in 0f64..2.0, h in 1e-3f64..1.0, m in 1usize..1000) {
        let st = ControllerState::new(2, 3);
        let d = controller_update(&st, &est(s, f), h, m).unwrap();
        prop_assert_eq!(d.accept, s <= 1.0 && f <= 1.0);
    }
}

fn linear_run(tol: f64, samples: &[f64]) -> AdaptiveRun {
    let p = LinearScalar::new(-1.0, -0.5, -0.2);
    let t = load_builtin("imex-mri-sr32").unwrap();
    let inner = load_inner("bogacki-shampine").unwrap();
    let mut cfg = AdaptiveConfig::new(tol);
    cfg.h0 = Some(0.05);
    integrate_adaptive(&p, &t, &inner, 2.0, &ControllerState::new(3, 3), &cfg, samples).unwrap()
}

#[test]
fn nonstiff_linear_run_accepts_every_step() {
    let run = linear_run(1e-3, &[]);
    assert!(run.record.failure.is_none());
    assert_eq!(run.record.rejected, 0);
    assert_eq!(run.record.times, vec![0.0, 2.0]);
    assert_eq!(run.log.len(), run.record.accepted);
    let err = (run.record.states[1][0] - (-3.4f64).exp()).abs();
    assert!(err < 1e-3, "{err}");
}

#[test]
fn sample_times_are_hit_exactly() {
    let samples = [0.3, 0.7, 1.1, 2.0];
    let run = linear_run(1e-6, &samples);
    assert_eq!(run.record.times, samples.to_vec());
    let mut t = 0.0;
    for e in run.log.iter().filter(|e| e.accepted) {
        assert_eq!(e.t, t);
        t += e.h;
    }
    assert!((t - 2.0).abs() < 1e-12);
}

#[test]
fn tighter_tolerance_is_more_accurate_and_costlier() {
    let exact = (-3.4f64).exp();
    let loose = linear_run(1e-3, &[2.0]);
    let tight = linear_run(1e-7, &[2.0]);
    let err = |r: &AdaptiveRun| (r.record.states[0][0] - exact).abs();
    assert!(err(&tight) < err(&loose));
    assert!(tight.record.stats.fast_f_evals > loose.record.stats.fast_f_evals);
    assert!(tight.record.accepted > loose.record.accepted);
}

#[test]
fn methods_without_embeddings_are_rejected() {
    let p = LinearScalar::new(-1.0, 0.0, 0.0);
    let t = load_builtin("imex-mri-sr21").unwrap();
    let rk4 = load_inner("rk4").unwrap();
    let cfg = AdaptiveConfig::new(1e-4);
    let st = ControllerState::new(2, 4);
    assert!(matches!(integrate_adaptive(&p, &t, &rk4, 1.0, &st, &cfg, &[]), Err(Error::Config(_))));
}

#[test]
fn step_log_csv() {
    let run = linear_run(1e-3, &[]);
    let csv = run.log_csv();
    assert!(csv.starts_with("t,H,M,epsS,epsF,accepted\n"));
    assert_eq!(csv.lines().count(), run.log.len() + 1);
    let dir = tempfile::tempdir().unwrap();
    run.write(dir.path(), "lin").unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("lin.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["tol"], 1e-3);
    assert_eq!(json["record"]["accepted"], run.record.accepted);
}
