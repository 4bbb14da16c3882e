use statrs::distribution::{ContinuousCDF, StudentsT};

/// Mean and 95% Student-t interval (n − 1 degrees of freedom). The interval
/// is `None` for fewer than two values.
pub fn mean_ci(values: &[f64]) -> (f64, Option<(f64, f64)>) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    let half = t * (var / n as f64).sqrt();
    (mean, Some((mean - half, mean + half)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value_has_no_interval() {
        assert_eq!(mean_ci(&[3.0]), (3.0, None));
    }

    #[test]
    fn two_values() {
        // t_{0.975, 1} = 12.7062, s = sqrt(2), half width = 12.7062
        let (m, ci) = mean_ci(&[1.0, 3.0]);
        let (lo, hi) = ci.unwrap();
        assert_eq!(m, 2.0);
        assert!((hi - 2.0 - 12.706_204_736).abs() < 1e-6);
        assert!((2.0 - lo - 12.706_204_736).abs() < 1e-6);
    }

    #[test]
    fn constant_values_collapse() {
        let (m, ci) = mean_ci(&[4.0; 5]);
        assert_eq!((m, ci), (4.0, Some((4.0, 4.0))));
    }
}
