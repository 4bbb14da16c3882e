use crate::error::{Error, Result};

/// Right-continuous step function on [0, ∞): zero before the first
/// breakpoint, `values[j]` on `[breakpoints[j], breakpoints[j + 1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::ParameterDomain(
                "breakpoints and values differ in length".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::ParameterDomain(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if breakpoints.first().is_some_and(|b| !(*b >= 0.0)) {
            return Err(Error::ParameterDomain(
                "breakpoints must be nonnegative".into(),
            ));
        }
        Ok(StepFunction {
            breakpoints,
            values,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> f64 {
        // index of the last breakpoint <= t
        let k = self.breakpoints.partition_point(|&b| b <= t);
        if k == 0 {
            0.0
        } else {
            self.values[k - 1]
        }
    }

    /// Value beyond the last breakpoint.
    pub fn terminal(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Nondecreasing, within [0, 1], ending at 1.
    pub fn is_cdf(&self) -> bool {
        let mut prev = 0.0;
        for &v in &self.values {
            if !(v >= prev && v <= 1.0) {
                return false;
            }
            prev = v;
        }
        self.terminal() == 1.0
    }
}

/// Empirical CDF: jump of (multiplicity)/k at each distinct sample.
pub fn ecdf(samples: &[f64]) -> Result<StepFunction> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(bad) = samples.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::ParameterDomain(format!(
            "ECDF samples must be finite and nonnegative, got {bad}"
        )));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len() as f64;
    let mut bp = Vec::new();
    let mut vals = Vec::new();
    for (i, &x) in s.iter().enumerate() {
        if i + 1 < s.len() && s[i + 1] == x {
            continue;
        }
        bp.push(x);
        vals.push((i + 1) as f64 / k);
    }
    Ok(StepFunction {
        breakpoints: bp,
        values: vals,
    })
}

/// Merged, sorted, deduplicated breakpoints.
fn merged_grid<'a>(fs: impl IntoIterator<Item = &'a StepFunction>) -> Vec<f64> {
    let mut grid: Vec<f64> = fs
        .into_iter()
        .flat_map(|f| f.breakpoints.iter().copied())
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Values of `f` at each point of the sorted `grid`.
fn sample_on(f: &StepFunction, grid: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut k = 0;
    let mut cur = 0.0;
    for &x in grid {
        while k < f.breakpoints.len() && f.breakpoints[k] <= x {
            cur = f.values[k];
            k += 1;
        }
        out.push(cur);
    }
    out
}

/// Pointwise mean on the union of the breakpoints.
pub fn mean_ecdf(fs: &[StepFunction]) -> Result<StepFunction> {
    if fs.is_empty() {
        return Err(Error::EmptySample);
    }
    if fs.len() == 1 {
        return Ok(fs[0].clone());
    }
    let grid = merged_grid(fs);
    let mut sum = vec![0.0; grid.len()];
    for f in fs {
        for (s, v) in sum.iter_mut().zip(sample_on(f, &grid)) {
            *s += v;
        }
    }
    let n = fs.len() as f64;
    let values = sum.into_iter().map(|s| s / n).collect();
    Ok(StepFunction {
        breakpoints: grid,
        values,
    })
}

/// Exact ∫₀^∞ (F1 − F2)² dt. Infinite when the terminal values differ.
pub fn ecdf_sq_integral(f1: &StepFunction, f2: &StepFunction) -> f64 {
    if f1.terminal() != f2.terminal() {
        return f64::INFINITY;
    }
    let grid = merged_grid([f1, f2]);
    let a = sample_on(f1, &grid);
    let b = sample_on(f2, &grid);
    let mut total = 0.0;
    for k in 0..grid.len().saturating_sub(1) {
        let d = a[k] - b[k];
        total += d * d * (grid[k + 1] - grid[k]);
    }
    total
}
