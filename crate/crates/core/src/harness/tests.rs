use super::*;
use crate::stability::{ScanKind, SectorSpec, Window};

fn quick_convergence(method: &str, kmin: i32, kmax: i32) -> ExperimentConfig {
    ExperimentConfig {
        methods: vec![method.to_string()],
        kmin: Some(kmin),
        kmax: Some(kmax),
        ..ExperimentConfig::new(ExperimentKind::Convergence)
    }
}

fn without_runtime(csv: &str) -> String {
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "runtimeSeconds").unwrap();
    csv.lines()
        .map(|l| l.split(',').enumerate().filter(|(i, _)| *i != col).map(|(_, v)| v).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn slope_fit_recovers_power_law() {
    for p in [1.0, 2.0, 3.09, 4.0, 5.0] {
        let pts: Vec<(f64, f64)> = (0..8).map(|k| {
            let h = 0.1 * 2f64.powi(-k);
            (h, 3.7 * h.powf(p))
        }).collect();
        assert!((fit_slope(&pts).unwrap() - p).abs() < 1e-10);
    }
}

#[test]
fn slope_fit_needs_two_distinct_points() {
    assert_eq!(fit_slope(&[]), None);
    assert_eq!(fit_slope(&[(0.1, 1.0)]), None);
    assert_eq!(fit_slope(&[(0.1, 1.0), (0.1, 2.0)]), None);
    assert_eq!(fit_slope(&[(0.1, 0.0), (0.2, 1.0)]), None);
}

#[test]
fn fit_skips_failed_and_floor_rows() {
    let row = |h: f64, e: Option<f64>, fail: bool| ExperimentRow {
        k: None,
        h: Some(h),
        tol: None,
        max_error: e,
        runtime_seconds: 0.0,
        fast_f_evals: 0,
        implicit_solves: 0,
        accepted: 0,
        rejected: 0,
        failure: fail.then(|| "x".to_string()),
        in_fit: false,
    };
    let mut rows = vec![
        row(0.4, None, true),
        row(0.2, Some(0.04), false),
        row(0.1, Some(0.01), false),
        row(0.05, Some(1e-13), false),
    ];
    let s = finish_rows(&mut rows, 1e-12, |r| r.h).unwrap();
    assert!((s - 2.0).abs() < 1e-12);
    assert_eq!(rows.iter().map(|r| r.in_fit).collect::<Vec<_>>(), [false, true, true, false]);
}

#[test]
fn config_defaults_follow_experiment_kind() {
    let c = ExperimentConfig::new(ExperimentKind::Convergence);
    assert_eq!(c.problem_name(), "kpr");
    assert_eq!(c.schedule("imex-mri-sr32"), (std::f64::consts::PI, 4, 11));
    assert_eq!(c.schedule("merk5"), (std::f64::consts::PI, 2, 9));
    assert_eq!(c.method_names().len(), 7);
    let e = ExperimentConfig::new(ExperimentKind::Efficiency);
    assert_eq!(e.problem_name(), "brusselator-201");
    assert_eq!(e.schedule("sr43"), (0.1, 0, 10));
    let a = ExperimentConfig::new(ExperimentKind::Adaptive);
    assert_eq!(a.problem_name(), "brusselator-tv-101");
    assert_eq!(a.method_names(), ["imex-mri-sr21", "imex-mri-sr32", "imex-mri-sr43"]);
    assert_eq!(a.tolerances(), [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]);
    assert_eq!(c.inner_name("sr43").unwrap(), "zonneveld");
}

#[test]
fn config_round_trips_through_json() {
    let mut c = quick_convergence("sr21", 3, 5);
    c.overrides.insert("beta".into(), 10.0);
    c.inner.insert("sr21".into(), "rk4".into());
    let back = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
    assert_eq!(back, c);
    let partial = ExperimentConfig::from_json(r#"{"kind":"efficiency","methods":["sr32"],"m":20}"#).unwrap();
    assert_eq!(partial.kind, ExperimentKind::Efficiency);
    assert_eq!(partial.m, 20);
    assert_eq!(partial.samples, 10);
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(quick_convergence("sr99", 4, 5).validate().is_err());
    assert!(quick_convergence("sr21", 6, 5).validate().is_err());
    let mut c = quick_convergence("sr21", 4, 5);
    c.problem = Some("nope".into());
    assert!(c.validate().is_err());
    let mut c = quick_convergence("sr21", 4, 5);
    c.m = 0;
    assert!(c.validate().is_err());
    let mut c = quick_convergence("sr21", 4, 5);
    c.inner.insert("imex-mri-sr21".into(), "nope".into());
    assert!(c.validate().is_err());
    let mut s = ExperimentConfig::new(ExperimentKind::Stability);
    s.stability.window.n_re = 0;
    assert!(s.validate().is_err());
    let mut a = ExperimentConfig::new(ExperimentKind::Adaptive);
    a.tols = vec![1e-3, 0.0];
    assert!(a.validate().is_err());
}

#[test]
fn kpr_convergence_record_has_expected_shape() {
    let recs = run_convergence(&quick_convergence("sr21", 4, 7)).unwrap();
    let r = &recs[0];
    assert_eq!(r.method, "imex-mri-sr21");
    assert_eq!(r.rows.len(), 4);
    assert!(r.reference.is_none());
    assert_eq!(r.floor, 0.0);
    assert!(r.rows.windows(2).all(|w| w[0].h.unwrap() == 2.0 * w[1].h.unwrap()));
    assert!(r.rows.iter().all(|x| !x.failed() && x.in_fit && x.fast_f_evals > 0 && x.implicit_solves > 0));
    assert!(r.rows.windows(2).all(|w| w[0].fast_f_evals < w[1].fast_f_evals));
    let s = r.slope.unwrap();
    assert!((s - 2.0).abs() < 0.3, "slope {s}");
}

#[test]
fn outputs_are_deterministic_apart_from_runtime() {
    let a = run_convergence(&quick_convergence("merk3", 2, 4)).unwrap();
    let b = run_convergence(&quick_convergence("merk3", 2, 4)).unwrap();
    assert_eq!(without_runtime(&a[0].to_csv()), without_runtime(&b[0].to_csv()));
    assert_eq!(a[0].slope, b[0].slope);
}

#[test]
fn records_are_written_with_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = quick_convergence("sr21", 4, 5);
    c.out = Some(dir.path().to_path_buf());
    let recs = run_convergence(&c).unwrap();
    let stem = recs[0].stem();
    let csv = std::fs::read_to_string(dir.path().join(format!("{stem}.csv"))).unwrap();
    assert!(csv.starts_with("k,H,maxError,runtimeSeconds,fastFEvals,implicitSolves,accepted,rejected,failed,inFit\n"));
    assert_eq!(csv.lines().count(), 3);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("{stem}.json"))).unwrap()).unwrap();
    assert_eq!(json["config"]["methods"][0], "sr21");
    assert_eq!(json["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn adaptive_sweep_on_kpr_tightens_with_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let c = ExperimentConfig {
        methods: vec!["sr32".into()],
        problem: Some("kpr".into()),
        tols: vec![1e-3, 1e-5],
        out: Some(dir.path().to_path_buf()),
        ..ExperimentConfig::new(ExperimentKind::Adaptive)
    };
    let r = &run_adaptive(&c).unwrap()[0];
    assert!(!r.any_failed());
    let (loose, tight) = (&r.rows[0], &r.rows[1]);
    assert!(tight.max_error.unwrap() < loose.max_error.unwrap());
    assert!(tight.accepted > loose.accepted);
    assert!(r.to_csv().starts_with("tol,maxError,"));
    let steps = std::fs::read_to_string(dir.path().join(format!("{}_tol1e-3_steps.csv", r.stem()))).unwrap();
    assert!(steps.starts_with("t,H,M,epsS,epsF,accepted\n"));
}

#[test]
fn verify_certifies_every_builtin() {
    let rows = run_verify(&ExperimentConfig::new(ExperimentKind::Verify)).unwrap();
    assert_eq!(rows.len(), 7);
    for r in &rows {
        assert!(r.pass(), "{}: {r:?}", r.method);
        assert!(r.consistency && r.findings.is_empty());
    }
    let merk5 = rows.iter().find(|r| r.method == "merk5").unwrap();
    assert_eq!(merk5.tableau_order, 4);
    assert!(merk5.note.as_deref().unwrap().starts_with("verified to order 4; order 5 out of scope"));
    let merk4 = rows.iter().find(|r| r.method == "merk4").unwrap();
    assert_eq!((merk4.tableau_order, merk4.certified_order), (4, 3));
    let sr21 = rows.iter().find(|r| r.method == "imex-mri-sr21").unwrap();
    assert_eq!((sr21.certified_order, sr21.embedding_order), (2, Some(1)));
    assert!(sr21.c_statistic.is_some_and(|c| c.is_finite() && c > 0.0));
    let sr43 = rows.iter().find(|r| r.method == "imex-mri-sr43").unwrap();
    assert_eq!((sr43.certified_order, sr43.tableau_order, sr43.coupling_order), (4, 4, Some(4)));
    assert!(sr43.c_statistic.is_none());
    let table = verification_table(&rows);
    assert_eq!(table.lines().count(), 8);
    assert!(table.contains("order 5 out of scope"));
}

#[test]
fn verify_reports_corrupted_tableau_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut t = crate::tableau::load_builtin("sr21").unwrap();
    t.name = "broken".into();
    t.c[0] = crate::rational::rat(1, 3);
    let bad = dir.path().join("bad.json");
    crate::tableau::write_tableau(&t, &bad).unwrap();
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{ not json").unwrap();
    let c = ExperimentConfig {
        tableau_files: vec![bad, garbage],
        out: Some(dir.path().join("out")),
        ..ExperimentConfig::new(ExperimentKind::Verify)
    };
    let rows = run_verify(&c).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(!rows[0].pass());
    assert_eq!(rows[0].findings[0].kind, crate::tableau::FindingKind::FirstAbscissa);
    assert!(rows[1].load_error.is_some());
    let json = std::fs::read_to_string(dir.path().join("out/verify.json")).unwrap();
    assert!(json.contains("first-abscissa"));
}

#[test]
fn stability_export_writes_one_scan_per_combination() {
    let dir = tempfile::tempdir().unwrap();
    let c = ExperimentConfig {
        methods: vec!["sr21".into()],
        out: Some(dir.path().to_path_buf()),
        stability: StabilitySettings {
            kind: ScanKind::Implicit,
            fast: vec![SectorSpec { angle: 45.0, radius: 1e2 }, SectorSpec { angle: 10.0, radius: 1.0 }],
            window: Window::new((-1e4, 0.0), (-1e4, 1e4), 8, 8).unwrap(),
            sampling: crate::stability::SectorSampling::coarse(),
            ..Default::default()
        },
        ..ExperimentConfig::new(ExperimentKind::Stability)
    };
    let scans = run_stability_export(&c).unwrap();
    assert_eq!(scans.len(), 2);
    assert!(scans.iter().all(|s| s.all_stable()));
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(files.len(), 4);
    let csv = files.iter().find(|f| f.to_string_lossy().ends_with(".csv")).unwrap();
    let text = std::fs::read_to_string(dir.path().join(csv)).unwrap();
    assert!(text.starts_with("re,im,indicator,maxAbsR\n"));
    assert_eq!(text.lines().count(), 65);
}
