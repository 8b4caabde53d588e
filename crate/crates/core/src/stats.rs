//! Batch-means error estimation.

/// Mean with a batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn new(value: f64, se: f64) -> Self {
        Estimate { value, se }
    }

    /// `|value - target| / se`, infinite when `se == 0` and the values differ.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.value - target).abs();
        if self.se > 0.0 {
            d / self.se
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn within(&self, target: f64, n_se: f64, allowance: f64) -> bool {
        (self.value - target).abs() <= n_se * self.se + allowance
    }
}

/// Minimum number of batches used for error bars.
pub const MIN_BATCHES: usize = 20;

/// Splits `values` into `n_batches` contiguous batches and returns the grand
/// mean with the standard error of the batch means.
pub fn batch_means(values: &[f64], n_batches: usize) -> Estimate {
    let n = values.len();
    if n == 0 {
        return Estimate::new(f64::NAN, f64::NAN);
    }
    let nb = n_batches.clamp(1, n);
    let size = n / nb;
    let batches: Vec<f64> = (0..nb)
        .map(|b| {
            let lo = b * size;
            let hi = if b + 1 == nb { n } else { lo + size };
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    let mean = values.iter().sum::<f64>() / n as f64;
    Estimate::new(mean, standard_error(&batches))
}

/// Batch-means estimate of a ratio `sum(num) / sum(den)`, with the error
/// taken from the spread of per-batch ratios.
pub fn batch_ratio(num: &[f64], den: &[f64], n_batches: usize) -> Estimate {
    assert_eq!(num.len(), den.len());
    let n = num.len();
    if n == 0 {
        return Estimate::new(f64::NAN, f64::NAN);
    }
    let nb = n_batches.clamp(1, n);
    let size = n / nb;
    let ratios: Vec<f64> = (0..nb)
        .map(|b| {
            let lo = b * size;
            let hi = if b + 1 == nb { n } else { lo + size };
            let s: f64 = num[lo..hi].iter().sum();
            let d: f64 = den[lo..hi].iter().sum();
            s / d
        })
        .collect();
    let total = num.iter().sum::<f64>() / den.iter().sum::<f64>();
    Estimate::new(total, standard_error(&ratios))
}

fn standard_error(batches: &[f64]) -> f64 {
    let nb = batches.len();
    if nb < 2 {
        return f64::INFINITY;
    }
    let m = batches.iter().sum::<f64>() / nb as f64;
    let var = batches.iter().map(|b| (b - m).powi(2)).sum::<f64>() / (nb - 1) as f64;
    (var / nb as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_has_zero_error() {
        let v = vec![2.5; 100];
        let e = batch_means(&v, 20);
        assert_eq!(e.value, 2.5);
        assert_eq!(e.se, 0.0);
        assert_eq!(e.z_score(2.5), 0.0);
    }

    #[test]
    fn alternating_series_error_matches_hand_computation() {
        // Batches of 5 alternating 0/1 values have means 0.4 or 0.6 alternately.
        let v: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
        let e = batch_means(&v, 20);
        assert!((e.value - 0.5).abs() < 1e-15);
        let sd = (20.0f64 * 0.01 / 19.0).sqrt();
        assert!((e.se - sd / 20f64.sqrt()).abs() < 1e-12);
    }
}
