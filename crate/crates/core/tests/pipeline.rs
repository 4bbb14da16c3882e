use edcal::dataio::{
    gen_synthetic, gen_synthetic_with_annotations, initial_guess, load_annotations, load_dataset,
    save_annotations, write_dataset, InitialGuessOptions,
};
use edcal::distributions::weibull_mean_std;
use edcal::edmodel::{extract_kpis, Activity, KpiMode, ScenarioConfig, Tag, Unit};
use edcal::metrics::{evaluate_point, CalibrationTarget, Tolerances};
use edcal::optimizer::{
    Bounds, CalibrationProblem, Granularity, ParamVector, SolveOptions, StopReason,
};

fn stable_reference() -> ParamVector {
    let mut entries = ParamVector::reference().to_entries();
    for e in &mut entries {
        if (e.activity, e.tag, e.unit) == (Activity::Visit, Tag::Yellow, Unit::MU) {
            e.scale = 0.5;
        }
    }
    ParamVector::from_entries(&entries).unwrap()
}

fn two_weeks() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default_scenario();
    cfg.warmup = 72.0;
    cfg.horizon = 72.0 + 14.0 * 24.0;
    cfg
}

#[test]
fn dataset_files_round_trip_through_disk() {
    let cfg = two_weeks();
    let (ds, notes) = gen_synthetic_with_annotations(&stable_reference(), &cfg, 4).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (p, a) = (dir.path().join("ds.csv"), dir.path().join("ann.csv"));
    write_dataset(&p, &ds).unwrap();
    save_annotations(&a, &notes).unwrap();
    let back = load_dataset(&p).unwrap();
    back.validate().unwrap();
    assert_eq!(back.meta, ds.meta);
    assert_eq!(back.records.len(), ds.records.len());
    for (x, y) in back.records.iter().zip(&ds.records) {
        assert_eq!(
            (x.id, x.tag, x.unit, x.outcome),
            (y.id, y.tag, y.unit, y.outcome)
        );
        assert!((x.t0 - y.t0).abs() <= 5e-5);
    }
    assert_eq!(load_annotations(&a).unwrap().len(), notes.len());
}

#[test]
fn initial_guess_tracks_the_visit_laws() {
    let truth = stable_reference();
    let mut cfg = ScenarioConfig::default_scenario();
    cfg.horizon = cfg.warmup + 60.0 * 24.0;
    let (ds, notes) = gen_synthetic_with_annotations(&truth, &cfg, 8).unwrap();
    let guess = initial_guess(&ds, &notes, &cfg, &InitialGuessOptions::default()).unwrap();
    // cells whose visit law puts almost no mass beyond the 4 h request window
    for (tag, unit) in [
        (Tag::White, Unit::MIU),
        (Tag::Green, Unit::MU),
        (Tag::Green, Unit::MIU),
        (Tag::Red, Unit::MU),
    ] {
        let want = weibull_mean_std(&truth.weibull(Activity::Visit, tag, unit).unwrap())
            .unwrap()
            .0;
        let got = weibull_mean_std(&guess.params.weibull(Activity::Visit, tag, unit).unwrap())
            .unwrap()
            .0;
        assert!(
            (got - want).abs() / want < 0.15,
            "{tag}/{unit}: {got} vs {want}"
        );
    }
}

#[test]
fn evaluation_is_deterministic_and_zero_on_own_data() {
    let cfg = two_weeks();
    let truth = stable_reference();
    let ds = gen_synthetic(&truth, &cfg, 6).unwrap();
    let real = extract_kpis(&ds.records, KpiMode::Real).unwrap();
    let target = CalibrationTarget::new(&real, Tolerances::case_study()).unwrap();
    let a = evaluate_point(&truth, &cfg, &target, 3, 99).unwrap();
    let b = evaluate_point(&truth, &cfg, &target, 3, 99).unwrap();
    assert_eq!(a, b);
    let own = evaluate_point(&truth, &cfg, &target, 1, 6).unwrap();
    assert_eq!(own.f, 0.0);
    assert!(own.is_feasible());
}

#[test]
fn short_calibration_improves_a_perturbed_start() {
    let cfg = two_weeks();
    let truth = stable_reference();
    let ds = gen_synthetic(&truth, &cfg, 12).unwrap();
    let real = extract_kpis(&ds.records, KpiMode::Real).unwrap();
    let problem = CalibrationProblem {
        cfg,
        target: CalibrationTarget::new(&real, Tolerances::case_study()).unwrap(),
        n_reps: 3,
        base_seed: 500,
        bounds: Bounds::case_study(truth.keys()),
        granularity: Granularity::default(),
    };
    let g = Granularity::default();
    let start_vals: Vec<f64> = truth
        .keys()
        .iter()
        .zip(truth.values())
        .map(|(k, v)| edcal::optimizer::params::round_to_lattice(v * 1.25, g.delta(k.role)))
        .collect();
    let start = truth
        .with_values(problem.bounds.clamp(&start_vals))
        .unwrap();
    let opts = SolveOptions {
        budget: 120,
        seed: 3,
        ..Default::default()
    };
    let res = problem.run(&start, &opts).unwrap();
    assert_eq!(res.report.stop_reason, StopReason::Budget);
    assert_eq!(res.report.evaluations_used, 120);
    assert_eq!(res.diagnostics.rows.len(), 120);
    let first = res.report.history[0].f;
    assert!(
        res.report.best_f < first,
        "{} vs {first}",
        res.report.best_f
    );
    assert_eq!(res.evaluation.unwrap().f, res.report.best_f);
}
