//! Seeded random-variate generation.
//!
//! Every sampler takes an explicit [`RngStream`]; there is no global
//! generator. Streams are addressed by `(seed, stream_id)` so that a
//! replication, a patient or an activity can own an independent substream.

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HOURS_PER_DAY: f64 = 24.0;
pub const DAYS_PER_WEEK: usize = 7;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Gamma function for `x > 0`.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return pi / ((pi * x).sin() * gamma(1.0 - x));
    }
    ln_gamma(x).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullParams {
    pub shape: f64,
    pub scale: f64,
}

impl WeibullParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        let p = WeibullParams { shape, scale };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shape.is_finite() && self.shape > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "Weibull shape must be positive, got {}",
                self.shape
            )));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "Weibull scale must be positive, got {}",
                self.scale
            )));
        }
        Ok(())
    }

    /// Inverse transform of an open-interval uniform `u ∈ (0, 1)`.
    #[inline]
    pub fn quantile_of_survival(&self, u: f64) -> f64 {
        self.scale * (-u.ln()).powf(1.0 / self.shape)
    }

    pub fn cdf(&self, w: f64) -> f64 {
        if w <= 0.0 {
            0.0
        } else {
            1.0 - (-(w / self.scale).powf(self.shape)).exp()
        }
    }
}

impl fmt::Display for WeibullParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Weib({}, {})", self.shape, self.scale)
    }
}

/// Reproducible generator addressed by `(seed, stream_id)`.
///
/// Backed by ChaCha8 with the stream id mapped onto the cipher's stream
/// counter, so distinct ids never overlap.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on [0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

pub fn weibull_sample(p: &WeibullParams, rng: &mut RngStream) -> Result<f64> {
    p.validate()?;
    Ok(p.quantile_of_survival(rng.uniform_open()))
}

pub fn weibull_mean_std(p: &WeibullParams) -> Result<(f64, f64)> {
    p.validate()?;
    let g1 = gamma(1.0 + 1.0 / p.shape);
    let g2 = gamma(1.0 + 2.0 / p.shape);
    let var = (g2 - g1 * g1).max(0.0);
    Ok((p.scale * g1, p.scale * var.sqrt()))
}

pub fn uniform_sample(lo: f64, hi: f64, rng: &mut RngStream) -> Result<f64> {
    check_interval(lo, hi)?;
    Ok(lo + (hi - lo) * rng.uniform())
}

pub(crate) fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo > hi {
        return Err(Error::ParameterDomain(format!(
            "invalid uniform interval [{lo}, {hi}]"
        )));
    }
    Ok(())
}

pub(crate) fn check_weights(weights: &[f64]) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::ParameterDomain("empty categorical weights".into()));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::ParameterDomain(format!(
            "categorical weights must be finite and nonnegative: {weights:?}"
        )));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::ParameterDomain(
            "categorical weights sum to zero".into(),
        ));
    }
    Ok(total)
}

pub fn categorical_sample(weights: &[f64], rng: &mut RngStream) -> Result<usize> {
    let total = check_weights(weights)?;
    Ok(categorical_index(weights, total, rng.uniform()))
}

/// Index `i` with `cum(i-1) <= u*total < cum(i)`; zero-weight entries are never chosen.
pub(crate) fn categorical_index(weights: &[f64], total: f64, u: f64) -> usize {
    let r = u * total;
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            cum += w;
            last_positive = i;
            if r < cum {
                return i;
            }
        }
    }
    last_positive
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DayOfWeek {
    Mon,
    Tue,
    Wed,
    Thu,
    Fri,
    Sat,
    Sun,
}

impl DayOfWeek {
    pub const ALL: [DayOfWeek; 7] = [
        DayOfWeek::Mon,
        DayOfWeek::Tue,
        DayOfWeek::Wed,
        DayOfWeek::Thu,
        DayOfWeek::Fri,
        DayOfWeek::Sat,
        DayOfWeek::Sun,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> DayOfWeek {
        Self::ALL[i % DAYS_PER_WEEK]
    }

    /// Day of week at `t` hours after midnight of `self`.
    pub fn offset_by_hours(self, t: f64) -> DayOfWeek {
        let days = (t / HOURS_PER_DAY).floor() as i64;
        Self::from_index((self.index() as i64 + days).rem_euclid(7) as usize)
    }
}

/// Piecewise-constant weekly arrival rates: `rates[day][hour]`, arrivals per hour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct RateTable {
    rates: [[f64; 24]; 7],
}

impl RateTable {
    pub fn new(rates: [[f64; 24]; 7]) -> Result<Self> {
        for row in &rates {
            for &r in row {
                if !r.is_finite() || r < 0.0 {
                    return Err(Error::ParameterDomain(format!(
                        "arrival rate must be finite and nonnegative, got {r}"
                    )));
                }
            }
        }
        Ok(RateTable { rates })
    }

    pub fn zeros() -> Self {
        RateTable {
            rates: [[0.0; 24]; 7],
        }
    }

    pub fn constant(rate: f64) -> Result<Self> {
        Self::new([[rate; 24]; 7])
    }

    pub fn get(&self, day: DayOfWeek, hour: usize) -> f64 {
        self.rates[day.index()][hour]
    }

    pub fn set(&mut self, day: DayOfWeek, hour: usize, rate: f64) -> Result<()> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::ParameterDomain(format!(
                "arrival rate must be finite and nonnegative, got {rate}"
            )));
        }
        self.rates[day.index()][hour] = rate;
        Ok(())
    }

    pub fn max_rate(&self) -> f64 {
        self.rates
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0_f64, |a, &b| a.max(b))
    }

    /// Rate in force at `t` hours after midnight of `start_day`.
    pub fn rate_at(&self, start_day: DayOfWeek, t: f64) -> f64 {
        let day = start_day.offset_by_hours(t);
        let hour = (t.floor() as i64).rem_euclid(24) as usize;
        self.rates[day.index()][hour]
    }

    pub fn rows(&self) -> &[[f64; 24]; 7] {
        &self.rates
    }
}

impl TryFrom<Vec<Vec<f64>>> for RateTable {
    type Error = Error;

    fn try_from(v: Vec<Vec<f64>>) -> Result<Self> {
        if v.len() != 7 || v.iter().any(|r| r.len() != 24) {
            return Err(Error::Config("rate table must be a 7x24 array".into()));
        }
        let mut rates = [[0.0; 24]; 7];
        for (d, row) in v.iter().enumerate() {
            rates[d].copy_from_slice(row);
        }
        RateTable::new(rates)
    }
}

impl From<RateTable> for Vec<Vec<f64>> {
    fn from(t: RateTable) -> Self {
        t.rates.iter().map(|r| r.to_vec()).collect()
    }
}

/// Arrival times of a nonhomogeneous Poisson process on `[0, horizon)`,
/// generated by thinning against the table maximum.
pub fn nhpp_arrivals(
    rates: &RateTable,
    start_day: DayOfWeek,
    horizon: f64,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let lambda_max = rates.max_rate();
    let mut out = Vec::new();
    if lambda_max <= 0.0 {
        return Ok(out);
    }
    let mut t = 0.0;
    loop {
        t += -rng.uniform_open().ln() / lambda_max;
        if t >= horizon {
            break;
        }
        let accept = rng.uniform() * lambda_max < rates.rate_at(start_day, t);
        if accept && out.last().map_or(true, |&prev| t > prev) {
            out.push(t);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Stirling series for ln Γ shifted to large argument, then recursed down.
    fn ln_gamma_oracle(x: f64) -> f64 {
        let mut shift = 0.0;
        let mut z = x;
        while z < 30.0 {
            shift += z.ln();
            z += 1.0;
        }
        let z2 = z * z;
        let series = 1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z * z2 * z2)
            - 1.0 / (1680.0 * z * z2 * z2 * z2);
        (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + series - shift
    }

    #[test]
    fn gamma_matches_oracle() {
        for &x in &[0.1, 0.5, 1.0, 1.5, 1.893, 2.613, 3.7, 10.0, 41.0] {
            let rel = (gamma(x) - ln_gamma_oracle(x).exp()).abs() / ln_gamma_oracle(x).exp();
            assert!(rel < 1e-10, "x={x} rel={rel}");
        }
        assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-13);
        assert!((gamma(5.0) - 24.0).abs() < 1e-11);
    }

    #[test]
    fn weibull_mean_std_examples() {
        let (m, s) = weibull_mean_std(&WeibullParams::new(1.0, 1.0).unwrap()).unwrap();
        assert!((m - 1.0).abs() < 1e-12 && (s - 1.0).abs() < 1e-12);
        let (m, s) = weibull_mean_std(&WeibullParams::new(2.0, 1.0).unwrap()).unwrap();
        let root_pi = std::f64::consts::PI.sqrt();
        assert!((m - root_pi / 2.0).abs() < 1e-12);
        assert!((s - (1.0 - std::f64::consts::PI / 4.0).sqrt()).abs() < 1e-12);
        assert!((m - 0.886_226_925).abs() < 1e-9);
        assert!((s - 0.463_251_375).abs() < 1e-8);
        let (m, _) = weibull_mean_std(&WeibullParams::new(1000.0, 0.5).unwrap()).unwrap();
        assert!((m - 0.5).abs() < 1e-3);
    }

    #[test]
    fn invalid_weibull_is_rejected() {
        let mut rng = RngStream::new(1, 0);
        let bad = WeibullParams {
            shape: 0.0,
            scale: 1.0,
        };
        assert!(matches!(
            weibull_sample(&bad, &mut rng),
            Err(Error::ParameterDomain(_))
        ));
        assert!(WeibullParams::new(1.0, -2.0).is_err());
        assert!(weibull_mean_std(&bad).is_err());
    }

    #[test]
    fn exponential_special_case_mean() {
        let p = WeibullParams::new(1.0, 2.0).unwrap();
        let mut rng = RngStream::new(7, 3);
        let n = 1_000_000;
        let mean = (0..n)
            .map(|_| weibull_sample(&p, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 2.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn near_deterministic_weibull() {
        let p = WeibullParams::new(1000.0, 0.5).unwrap();
        let mut rng = RngStream::new(11, 0);
        for _ in 0..100_000 {
            let w = weibull_sample(&p, &mut rng).unwrap();
            assert!((0.45..=0.55).contains(&w));
        }
    }

    #[test]
    fn uniform_examples() {
        let mut rng = RngStream::new(5, 5);
        assert_eq!(uniform_sample(0.0, 0.0, &mut rng).unwrap(), 0.0);
        assert_eq!(uniform_sample(1.0, 1.0, &mut rng).unwrap(), 1.0);
        assert!(uniform_sample(2.0, 1.0, &mut rng).is_err());
        assert!(uniform_sample(-1.0, 1.0, &mut rng).is_err());
        let n = 1_000_000;
        let mean = (0..n)
            .map(|_| uniform_sample(0.0, 2.0, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.01);
    }

    #[test]
    fn categorical_degenerate_cases() {
        let mut rng = RngStream::new(9, 1);
        for _ in 0..1000 {
            assert_eq!(categorical_sample(&[1.0], &mut rng).unwrap(), 0);
            assert_eq!(categorical_sample(&[0.0, 5.0, 0.0], &mut rng).unwrap(), 1);
        }
        assert!(categorical_sample(&[], &mut rng).is_err());
        assert!(categorical_sample(&[0.0, 0.0], &mut rng).is_err());
        assert!(categorical_sample(&[1.0, -1.0], &mut rng).is_err());
        // u at the very top of [0,1) must still land on a positive weight
        assert_eq!(categorical_index(&[0.0, 2.0, 0.0], 2.0, 0.999_999_999), 1);
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let mut a = RngStream::new(42, 1);
        let mut b = RngStream::new(42, 1);
        let mut c = RngStream::new(42, 2);
        let xa: Vec<u64> = (0..16).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..16).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..16).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn nhpp_zero_table_is_empty() {
        let mut rng = RngStream::new(1, 1);
        let v = nhpp_arrivals(&RateTable::zeros(), DayOfWeek::Mon, 24.0, &mut rng).unwrap();
        assert!(v.is_empty());
        assert!(nhpp_arrivals(&RateTable::zeros(), DayOfWeek::Mon, 0.0, &mut rng).is_err());
    }

    #[test]
    fn nhpp_constant_rate_count() {
        let table = RateTable::constant(2.0).unwrap();
        let mut rng = RngStream::new(3, 0);
        let v = nhpp_arrivals(&table, DayOfWeek::Wed, 1000.0, &mut rng).unwrap();
        let sd = 2000f64.sqrt();
        assert!(
            (v.len() as f64 - 2000.0).abs() < 3.0 * sd,
            "count {}",
            v.len()
        );
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert!(v.iter().all(|&t| (0.0..1000.0).contains(&t)));
    }

    #[test]
    fn nhpp_single_slot_support() {
        let mut table = RateTable::zeros();
        table.set(DayOfWeek::Mon, 10, 5.0).unwrap();
        let runs = 4000;
        let mut total = 0usize;
        for r in 0..runs {
            let mut rng = RngStream::new(17, r);
            let v = nhpp_arrivals(&table, DayOfWeek::Mon, 24.0, &mut rng).unwrap();
            assert!(v.iter().all(|&t| (10.0..11.0).contains(&t)));
            total += v.len();
        }
        let mean = total as f64 / runs as f64;
        // sd of the mean = sqrt(5/4000) ≈ 0.035
        assert!((mean - 5.0).abs() < 0.15, "mean {mean}");
    }

    #[test]
    fn rate_lookup_wraps_days() {
        let mut table = RateTable::zeros();
        table.set(DayOfWeek::Sun, 23, 1.0).unwrap();
        table.set(DayOfWeek::Mon, 0, 2.0).unwrap();
        assert_eq!(table.rate_at(DayOfWeek::Sat, 47.5), 1.0);
        assert_eq!(table.rate_at(DayOfWeek::Sat, 48.0), 2.0);
        assert_eq!(table.rate_at(DayOfWeek::Mon, 7.0 * 24.0), 2.0);
    }
}
