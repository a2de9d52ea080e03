//! Small summation helpers shared by the scoring and ranking code.

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean with compensated summation; `NaN` for an empty input.
pub fn exact_mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut n = 0usize;
    let sum = compensated_sum(values.into_iter().inspect(|_| n += 1));
    sum / n as f64
}

/// Population (divide-by-N) standard deviation.
pub fn population_std(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mean = exact_mean(values.iter().copied());
    let var = exact_mean(values.iter().map(|v| (v - mean) * (v - mean)));
    var.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_recovers_decimal_means() {
        assert_ne!([0.1; 10].iter().sum::<f64>() / 10.0, 0.1);
        assert_eq!(exact_mean([0.1; 10]), 0.1);
        assert_eq!(exact_mean([0.1, 0.2, 0.6]), 0.3);
        assert_eq!(compensated_sum([1e16, 1.0, -1e16]), 1.0);
    }

    #[test]
    fn population_std_cases() {
        assert_eq!(population_std(&[3.0, 5.0]), 1.0);
        assert_eq!(population_std(&[4.0]), 0.0);
        assert_eq!(population_std(&[2.0, 2.0, 2.0]), 0.0);
        assert!(population_std(&[]).is_nan());
    }
}
