//! Coordinate search on the parameter lattice with an exterior ℓ1 penalty.

use std::num::NonZeroUsize;

use lru::LruCache;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::params::{from_lattice, Bounds};
use crate::error::{Error, Result};

/// Objective value and constraint values (feasible iff all ≤ 0).
#[derive(Debug, Clone, PartialEq)]
pub struct PointValue {
    pub f: f64,
    pub constraints: Vec<f64>,
}

/// f + (1/eps)·Σ max(0, c).
pub fn penalty(f: f64, constraints: &[f64], eps: f64) -> f64 {
    f + constraints.iter().map(|c| c.max(0.0)).sum::<f64>() / eps
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub budget: usize,
    pub seed: u64,
    pub initial_eps: f64,
    /// eps is multiplied by this when the incumbent is stationary but infeasible.
    pub eps_factor: f64,
    pub min_eps: f64,
    /// Initial step, in lattice units.
    pub initial_step: i64,
    /// Double a coordinate's step after a successful move.
    pub expand: bool,
    pub feasibility_tol: f64,
    pub cache_size: usize,
    /// Known lower bound of f; a feasible incumbent reaching it stops the search.
    pub f_lower_bound: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            budget: 3000,
            seed: 0,
            initial_eps: 1.0,
            eps_factor: 0.1,
            min_eps: 1e-12,
            initial_step: 128,
            expand: true,
            feasibility_tol: 1e-6,
            cache_size: 100_000,
            f_lower_bound: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Budget,
    /// Feasible and no unit lattice move improves the penalized value.
    Stationary,
    LowerBound,
    /// Stationary and infeasible with eps already at its floor.
    EpsFloor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub eval: usize,
    pub f: f64,
    pub max_violation: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub best_point: Vec<f64>,
    pub best_lattice: Vec<i64>,
    pub best_f: f64,
    pub best_max_violation: f64,
    pub best_constraints: Vec<f64>,
    pub evaluations_used: usize,
    pub final_eps: f64,
    pub stop_reason: StopReason,
    pub history: Vec<HistoryEntry>,
}

impl SolveReport {
    pub fn is_feasible(&self, tol: f64) -> bool {
        self.best_max_violation <= tol
    }

    pub fn history_csv(&self) -> String {
        let mut s = String::from("eval,f,max_violation,accepted\n");
        for h in &self.history {
            s.push_str(&format!(
                "{},{},{},{}\n",
                h.eval, h.f, h.max_violation, h.accepted
            ));
        }
        s
    }
}

#[derive(Debug, Clone)]
struct Cached {
    f: f64,
    violation_sum: f64,
    max_violation: f64,
    constraints: Vec<f64>,
}

impl Cached {
    fn failed() -> Self {
        Cached {
            f: f64::INFINITY,
            violation_sum: f64::INFINITY,
            max_violation: f64::INFINITY,
            constraints: Vec::new(),
        }
    }

    fn penalized(&self, eps: f64) -> f64 {
        if self.f.is_infinite() || self.violation_sum.is_infinite() {
            return f64::INFINITY;
        }
        self.f + self.violation_sum / eps
    }
}

struct Search<'a, E> {
    eval: E,
    deltas: &'a [f64],
    cache: LruCache<Vec<i64>, Cached>,
    budget: usize,
    used: usize,
    history: Vec<HistoryEntry>,
}

impl<'a, E: FnMut(&[f64]) -> Result<PointValue>> Search<'a, E> {
    /// Cached value of `x`, or None when the budget is spent.
    fn value(&mut self, x: &[i64]) -> Option<Cached> {
        if let Some(c) = self.cache.get(x) {
            return Some(c.clone());
        }
        if self.used >= self.budget {
            return None;
        }
        self.used += 1;
        let point = from_lattice(x, self.deltas);
        let c = match (self.eval)(&point) {
            Ok(v) if !v.f.is_nan() && v.constraints.iter().all(|c| !c.is_nan()) => {
                let violation_sum = v.constraints.iter().map(|c| c.max(0.0)).sum();
                let max_violation = v.constraints.iter().fold(0.0_f64, |m, c| m.max(*c));
                Cached {
                    f: v.f,
                    violation_sum,
                    max_violation,
                    constraints: v.constraints,
                }
            }
            Ok(_) => {
                log::warn!("evaluation {} returned NaN; treated as +inf", self.used);
                Cached::failed()
            }
            Err(e) => {
                log::warn!("evaluation {} failed: {e}", self.used);
                Cached::failed()
            }
        };
        self.history.push(HistoryEntry {
            eval: self.used,
            f: c.f,
            max_violation: c.max_violation,
            accepted: false,
        });
        self.cache.put(x.to_vec(), c.clone());
        Some(c)
    }

    fn mark_accepted(&mut self) {
        if let Some(h) = self.history.last_mut() {
            h.accepted = true;
        }
    }
}

fn lattice_bounds(bounds: &Bounds, deltas: &[f64]) -> Result<(Vec<i64>, Vec<i64>)> {
    let mut lo = Vec::with_capacity(deltas.len());
    let mut hi = Vec::with_capacity(deltas.len());
    for ((l, u), d) in bounds.lower.iter().zip(&bounds.upper).zip(deltas) {
        let a = (l / d - 1e-9).ceil() as i64;
        let b = (u / d + 1e-9).floor() as i64;
        if a > b {
            return Err(Error::Config(format!(
                "no lattice point in [{l}, {u}] at spacing {d}"
            )));
        }
        lo.push(a);
        hi.push(b);
    }
    Ok((lo, hi))
}

/// Minimizes `eval` over the lattice `deltas · ℤⁿ` within `bounds`.
///
/// The start is rounded to the lattice and clamped into the box. Each
/// evaluator call consumes one unit of budget; cached points are free.
pub fn solve<E>(
    eval: E,
    start: &[f64],
    bounds: &Bounds,
    deltas: &[f64],
    opts: &SolveOptions,
) -> Result<SolveReport>
where
    E: FnMut(&[f64]) -> Result<PointValue>,
{
    let n = start.len();
    if deltas.len() != n || bounds.lower.len() != n || bounds.upper.len() != n {
        return Err(Error::Config(
            "start, bounds and granularity differ in length".into(),
        ));
    }
    if n == 0 {
        return Err(Error::Config("empty decision vector".into()));
    }
    if opts.budget == 0 {
        return Err(Error::Config("budget must be at least 1".into()));
    }
    if !(opts.initial_eps > 0.0 && opts.eps_factor > 0.0 && opts.eps_factor < 1.0) {
        return Err(Error::Config("invalid penalty parameters".into()));
    }
    let (lo, hi) = lattice_bounds(bounds, deltas)?;
    let mut x: Vec<i64> = start
        .iter()
        .zip(deltas)
        .enumerate()
        .map(|(i, (v, d))| ((v / d).round() as i64).clamp(lo[i], hi[i]))
        .collect();

    let cache_cap = NonZeroUsize::new(opts.cache_size.max(1)).expect("nonzero");
    let mut s = Search {
        eval,
        deltas,
        cache: LruCache::new(cache_cap),
        budget: opts.budget,
        used: 0,
        history: Vec::new(),
    };
    let mut eps = opts.initial_eps;
    let mut cur = s.value(&x).expect("budget >= 1");
    s.mark_accepted();
    let init_step = opts.initial_step.max(1);
    let max_step = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| b - a)
        .max()
        .unwrap_or(1)
        .max(1);
    let mut step = vec![init_step; n];
    let mut unit_fail = vec![false; n];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let stop = 'outer: loop {
        if let Some(lb) = opts.f_lower_bound {
            if cur.max_violation <= opts.feasibility_tol && cur.f <= lb {
                break StopReason::LowerBound;
            }
        }
        if unit_fail.iter().all(|&u| u) {
            if cur.max_violation <= opts.feasibility_tol {
                break StopReason::Stationary;
            }
            if eps * opts.eps_factor < opts.min_eps {
                break StopReason::EpsFloor;
            }
            eps *= opts.eps_factor;
            log::debug!("penalty parameter reduced to {eps:e}");
            step.fill(init_step);
            unit_fail.fill(false);
        }
        order.shuffle(&mut rng);
        for &i in &order {
            if unit_fail[i] {
                continue;
            }
            let p_cur = cur.penalized(eps);
            let mut moved = false;
            for dir in [1i64, -1] {
                let target = (x[i] + dir * step[i]).clamp(lo[i], hi[i]);
                if target == x[i] {
                    continue;
                }
                let mut y = x.clone();
                y[i] = target;
                let Some(c) = s.value(&y) else {
                    break 'outer StopReason::Budget;
                };
                if c.penalized(eps) < p_cur {
                    s.mark_accepted();
                    x = y;
                    cur = c;
                    moved = true;
                    break;
                }
            }
            if moved {
                unit_fail.fill(false);
                if opts.expand {
                    step[i] = (step[i] * 2).min(max_step);
                }
            } else if step[i] == 1 {
                unit_fail[i] = true;
            } else {
                step[i] = (step[i] / 2).max(1);
            }
        }
    };

    Ok(SolveReport {
        best_point: from_lattice(&x, deltas),
        best_lattice: x,
        best_f: cur.f,
        best_max_violation: cur.max_violation,
        best_constraints: cur.constraints,
        evaluations_used: s.used,
        final_eps: eps,
        stop_reason: stop,
        history: s.history,
    })
}
