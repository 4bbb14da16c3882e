use std::path::Path;

use proptest::prelude::*;

use edcal::dataio::dataset::{read_records, write_records};
use edcal::dataio::fit_weibull;
use edcal::distributions::{weibull_sample, RngStream, WeibullParams};
use edcal::edmodel::{hourly_census, Outcome, PatientRecord, ScenarioConfig, Tag};
use edcal::metrics::{ecdf, ecdf_sq_integral, mean_ecdf};
use edcal::optimizer::params::{from_lattice, round_to_lattice, to_lattice};
use edcal::optimizer::{penalty, ParamVector};
use edcal::simcore::run_replications;

fn samples() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..10.0f64, 1..60)
}

proptest! {
    #[test]
    fn ecdf_is_a_cdf(s in samples()) {
        let f = ecdf(&s).unwrap();
        prop_assert!(f.is_cdf());
        prop_assert_eq!(f.terminal(), 1.0);
        let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(f.eval(max), 1.0);
        prop_assert!(f.values().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn integral_is_a_symmetric_nonnegative_distance(a in samples(), b in samples()) {
        let (fa, fb) = (ecdf(&a).unwrap(), ecdf(&b).unwrap());
        let ab = ecdf_sq_integral(&fa, &fb);
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ecdf_sq_integral(&fb, &fa)).abs() <= 1e-12 * (1.0 + ab));
        prop_assert_eq!(ecdf_sq_integral(&fa, &fa), 0.0);
    }

    #[test]
    fn integral_is_bounded_by_the_support(a in samples(), b in samples()) {
        let (fa, fb) = (ecdf(&a).unwrap(), ecdf(&b).unwrap());
        let hi = a.iter().chain(&b).copied().fold(0.0, f64::max);
        prop_assert!(ecdf_sq_integral(&fa, &fb) <= hi + 1e-12);
    }

    #[test]
    fn averaging_copies_changes_nothing(s in samples(), k in 1usize..5) {
        let f = ecdf(&s).unwrap();
        let m = mean_ecdf(&vec![f.clone(); k]).unwrap();
        if k == 1 {
            prop_assert_eq!(&m, &f);
        }
        prop_assert!(ecdf_sq_integral(&f, &m) < 1e-12);
        for t in f.breakpoints() {
            prop_assert!((f.eval(*t) - m.eval(*t)).abs() < 1e-12);
        }
    }

    #[test]
    fn averaged_ecdf_is_a_cdf(a in samples(), b in samples(), c in samples()) {
        let fs = [ecdf(&a).unwrap(), ecdf(&b).unwrap(), ecdf(&c).unwrap()];
        let m = mean_ecdf(&fs).unwrap();
        prop_assert!(m.is_cdf());
        for t in [0.5, 2.0, 7.5] {
            let mean = fs.iter().map(|f| f.eval(t)).sum::<f64>() / 3.0;
            prop_assert!((m.eval(t) - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn lattice_round_trip(ints in prop::collection::vec(1i64..1_000_000, 1..20)) {
        let deltas: Vec<f64> = (0..ints.len()).map(|i| if i % 2 == 0 { 1e-3 } else { 1e-4 }).collect();
        let values = from_lattice(&ints, &deltas);
        prop_assert_eq!(to_lattice(&values, &deltas), ints);
        for (v, d) in values.iter().zip(&deltas) {
            prop_assert_eq!(round_to_lattice(*v, *d), *v);
        }
    }

    #[test]
    fn penalty_grows_as_eps_shrinks(
        f in 0.0..100.0f64,
        c in prop::collection::vec(-1.0..1.0f64, 1..10),
        eps in 1e-6..1.0f64,
    ) {
        let wide = penalty(f, &c, eps);
        let narrow = penalty(f, &c, eps / 2.0);
        if c.iter().any(|v| *v > 0.0) {
            prop_assert!(narrow > wide);
        } else {
            prop_assert_eq!(wide, f);
            prop_assert_eq!(narrow, f);
        }
    }

    #[test]
    fn fit_is_scale_equivariant(shape in 0.5..5.0f64, scale in 0.1..5.0f64, c in 0.5..4.0f64, seed in 0u64..1000) {
        let p = WeibullParams::new(shape, scale).unwrap();
        let mut rng = RngStream::new(seed, 1);
        let xs: Vec<f64> = (0..200).map(|_| weibull_sample(&p, &mut rng).unwrap()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * c).collect();
        let (a, b) = (fit_weibull(&xs).unwrap(), fit_weibull(&ys).unwrap());
        // both fits are rounded onto the lattice
        prop_assert!((a.shape - b.shape).abs() <= 1e-3 + 1e-9);
        prop_assert!((b.scale - c * a.scale).abs() <= 1e-4 * (1.0 + c) + 1e-3 * c * a.scale);
    }

    #[test]
    fn dataset_round_trip(rows in prop::collection::vec(
        (0usize..4, 0.0..700.0f64, prop::option::of(0.0..30.0f64), 0.0..40.0f64, any::<bool>()),
        0..40,
    )) {
        let round = |t: f64| format!("{t:.4}").parse::<f64>().unwrap();
        let records: Vec<PatientRecord> = rows
            .iter()
            .enumerate()
            .map(|(i, &(tag, t0, wait, stay, with_t5))| {
                let tag = Tag::ALL[tag];
                let t0 = round(t0);
                let t2 = wait.map(|w| round(t0 + w));
                let t6 = t2.map(|t| round(t + stay));
                PatientRecord {
                    id: i as u64,
                    tag,
                    unit: tag.units()[0],
                    t0,
                    t2,
                    t5: t2.filter(|_| with_t5).map(|t| round(t + stay / 2.0)),
                    t6,
                    outcome: if t2.is_some() { Outcome::Discharged } else { Outcome::Lwbs },
                }
            })
            .collect();
        let mut buf = Vec::new();
        write_records(&records, &mut buf).unwrap();
        let back = read_records(buf.as_slice(), Path::new("mem.csv")).unwrap();
        prop_assert_eq!(back, records);
    }

    #[test]
    fn census_is_nonnegative_and_bounded(
        stays in prop::collection::vec((0.0..300.0f64, 0.0..50.0f64), 0..30),
    ) {
        let mut log = Vec::new();
        for (a, d) in &stays {
            log.push((*a, 1i8));
            log.push((a + d, -1i8));
        }
        let c = hourly_census(&log, (0.0, 14.0 * 24.0)).unwrap();
        for v in c {
            prop_assert!((-1e-12..=stays.len() as f64 + 1e-12).contains(&v));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn replications_do_not_depend_on_threading(seed in 0u64..1_000_000, reps in 1usize..4) {
        let mut cfg = ScenarioConfig::default_scenario();
        cfg.warmup = 24.0;
        cfg.horizon = 24.0 * 6.0;
        let params = ParamVector::reference();
        let a = run_replications(&cfg, &params, reps, seed, true).unwrap();
        let b = run_replications(&cfg, &params, reps, seed, false).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(&x.records, &y.records);
            prop_assert_eq!(&x.kpis, &y.kpis);
            prop_assert_eq!(&x.tally, &y.tally);
            prop_assert!(x.tally.is_conserved());
        }
    }
}
