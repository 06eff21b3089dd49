//! Small order-statistic and regression helpers shared across modules.

/// Linear-interpolation quantile of already-sorted data (the "type 7" rule:
/// position `(n - 1) * p`).
///
/// Returns `None` for empty input.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Option<f64> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    let p = p.clamp(0.0, 1.0);
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    Some(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// Median with the midpoint convention for even-length input.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

/// Lower median: the `ceil(n / 2)`-th smallest value.
///
/// Unlike the midpoint median this is always an observed value, and for
/// even `n` it stays inside the lower half of the sample.
pub fn low_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(v[(v.len() - 1) / 2])
}

/// Result of a simple linear regression `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Residual sum of squares.
    pub rss: f64,
    /// Total sum of squares around the mean of `y`.
    pub tss: f64,
    /// Standard error of the slope; zero when fewer than three points.
    pub slope_std_err: f64,
}

impl LinearFit {
    /// Coefficient of determination. When `y` is constant the value is 1 for
    /// a perfect fit and 0 otherwise.
    pub fn r_squared(&self) -> f64 {
        r_squared(self.rss, self.tss)
    }
}

/// `1 - rss / tss` with the constant-response convention of [`LinearFit::r_squared`].
pub fn r_squared(rss: f64, tss: f64) -> f64 {
    if tss > 0.0 {
        1.0 - rss / tss
    } else if rss == 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Ordinary least squares of `y` on `x`. Returns `None` when fewer than two
/// points are given or `x` has no spread.
pub fn ols(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut tss = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        sxy += dx * dy;
        tss += dy * dy;
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - (intercept + slope * xi);
            r * r
        })
        .sum();
    let slope_std_err = if n > 2 { (rss / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Some(LinearFit {
        slope,
        intercept,
        rss,
        tss,
        slope_std_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_one_to_hundred() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(median(&v), Some(50.5));
        assert_eq!(low_median(&v), Some(50.0));
    }

    #[test]
    fn quantile_endpoints() {
        let v = [1.0, 2.0, 3.0];
        assert_eq!(quantile_sorted(&v, 0.0), Some(1.0));
        assert_eq!(quantile_sorted(&v, 1.0), Some(3.0));
        assert_eq!(quantile_sorted(&[], 0.5), None);
    }

    #[test]
    fn ols_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let fit = ols(&x, &y).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!(fit.rss < 1e-20);
        assert_eq!(fit.r_squared(), 1.0);
    }

    #[test]
    fn ols_rejects_constant_x() {
        assert!(ols(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }
}
