//! Tag/unit assignment and the per-patient uniforms that drive a trajectory.

use super::config::ScenarioConfig;
use super::types::{is_feasible, Activity, Tag, Unit};
use crate::distributions::{categorical_index, RngStream, WeibullParams};
use crate::error::{Error, Result};
use crate::optimizer::params::ParamVector;

/// Every uniform a patient may consume, drawn once at creation in this
/// order. Service times are obtained by inversion from these values, so a
/// change of parameters never shifts the random numbers of other patients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatientDraws {
    pub deceased: f64,
    pub tag: f64,
    pub unit: f64,
    pub out_of_scope: f64,
    pub triage_coin: f64,
    pub triage: f64,
    pub lwbs: f64,
    pub pre_queue: f64,
    pub visit: f64,
    pub exams: f64,
    pub removed: f64,
    pub final_wait: f64,
}

impl PatientDraws {
    pub fn draw(rng: &mut RngStream) -> Self {
        PatientDraws {
            deceased: rng.uniform_open(),
            tag: rng.uniform_open(),
            unit: rng.uniform_open(),
            out_of_scope: rng.uniform_open(),
            triage_coin: rng.uniform_open(),
            triage: rng.uniform_open(),
            lwbs: rng.uniform_open(),
            pre_queue: rng.uniform_open(),
            visit: rng.uniform_open(),
            exams: rng.uniform_open(),
            removed: rng.uniform_open(),
            final_wait: rng.uniform_open(),
        }
    }
}

/// Tag and unit from the two uniforms. The day tables apply iff MIU is open.
pub fn assign_with(now: f64, cfg: &ScenarioConfig, u_tag: f64, u_unit: f64) -> (Tag, Unit) {
    let day = cfg.miu_open(now);
    let tw = cfg.tag_weights(day);
    let tag = Tag::ALL[categorical_index(&tw, tw.iter().sum(), u_tag)];
    let uw = cfg.unit_weights(tag, day);
    let unit = tag.units()[categorical_index(&uw, uw.iter().sum(), u_unit)];
    (tag, unit)
}

pub fn assign_tag_and_unit(now: f64, cfg: &ScenarioConfig, rng: &mut RngStream) -> (Tag, Unit) {
    let u_tag = rng.uniform_open();
    let u_unit = rng.uniform_open();
    assign_with(now, cfg, u_tag, u_unit)
}

/// Parameter pair used for `activity` by a (tag, unit) patient. Red/RA
/// borrows Red/MU; Green/MIU triage picks Green/MU or Green/SU by `coin`.
pub fn service_params(
    params: &ParamVector,
    activity: Activity,
    tag: Tag,
    unit: Unit,
    coin: f64,
) -> Result<WeibullParams> {
    if !is_feasible(tag, unit) {
        return Err(Error::Config(format!(
            "{tag}/{unit} is not a feasible assignment"
        )));
    }
    let unit = match (activity, tag, unit) {
        (_, Tag::Red, Unit::RA) => Unit::MU,
        (Activity::Triage, Tag::Green, Unit::MIU) => {
            if coin < 0.5 {
                Unit::MU
            } else {
                Unit::SU
            }
        }
        _ => unit,
    };
    params.weibull(activity, tag, unit).ok_or_else(|| {
        Error::Config(format!(
            "no {} parameters for {tag}/{unit}",
            activity.name()
        ))
    })
}

pub fn triage_duration(
    tag: Tag,
    unit: Unit,
    params: &ParamVector,
    rng: &mut RngStream,
) -> Result<f64> {
    let coin = rng.uniform_open();
    let u = rng.uniform_open();
    Ok(service_params(params, Activity::Triage, tag, unit, coin)?.quantile_of_survival(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::weibull_mean_std;

    #[test]
    fn sunday_night_excludes_white_and_miu() {
        let cfg = ScenarioConfig::default_scenario();
        let mut rng = RngStream::new(1, 0);
        let sunday_3am = 6.0 * 24.0 + 3.0;
        for _ in 0..10_000 {
            let (t, u) = assign_tag_and_unit(sunday_3am, &cfg, &mut rng);
            assert_ne!(t, Tag::White);
            assert_ne!(u, Unit::MIU);
            assert!(is_feasible(t, u));
        }
    }

    #[test]
    fn infeasible_triage_is_config_error() {
        let p = ParamVector::reference();
        let mut rng = RngStream::new(1, 0);
        assert!(matches!(
            triage_duration(Tag::White, Unit::SU, &p, &mut rng),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn green_miu_triage_is_an_even_mixture() {
        let p = ParamVector::reference();
        let mut rng = RngStream::new(3, 0);
        let n = 1_000_000;
        let mean = (0..n)
            .map(|_| triage_duration(Tag::Green, Unit::MIU, &p, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        let mu = weibull_mean_std(&p.weibull(Activity::Triage, Tag::Green, Unit::MU).unwrap())
            .unwrap()
            .0;
        let su = weibull_mean_std(&p.weibull(Activity::Triage, Tag::Green, Unit::SU).unwrap())
            .unwrap()
            .0;
        let expect = 0.5 * mu + 0.5 * su;
        assert!((mean - expect).abs() / expect < 0.01, "{mean} vs {expect}");
    }

    #[test]
    fn red_ra_borrows_red_mu() {
        let p = ParamVector::reference();
        let a = service_params(&p, Activity::Visit, Tag::Red, Unit::RA, 0.0).unwrap();
        let b = p.weibull(Activity::Visit, Tag::Red, Unit::MU).unwrap();
        assert_eq!(a, b);
    }
}
