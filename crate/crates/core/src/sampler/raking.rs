use serde::Serialize;

use super::{BinAssignment, Result, SamplerError};

/// Stopping rule for [`rake`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct RakeOptions {
    /// Maximum accepted L1 distance between any attribute's weighted marginal and its target.
    pub tolerance: f64,
    /// Maximum number of full attribute cycles.
    pub max_iterations: usize,
}

impl Default for RakeOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 1000,
        }
    }
}

/// Per-record sampling weights produced by raking.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibratedWeights {
    /// Nonnegative, sums to one.
    pub weight: Vec<f64>,
    /// Full attribute cycles performed.
    pub iterations_used: usize,
    /// Largest per-attribute L1 deviation from target after the last cycle.
    pub max_marginal_deviation: f64,
    pub converged: bool,
    /// Final L1 deviation per attribute, in cycle order.
    pub attribute_deviation: Vec<(String, f64)>,
    /// `max_marginal_deviation` after each cycle.
    pub deviation_history: Vec<f64>,
}

impl CalibratedWeights {
    /// Wraps externally computed weights (normalized here).
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(SamplerError::InvalidWeight);
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(SamplerError::NoPositiveWeight);
        }
        Ok(Self {
            weight: weights.iter().map(|w| w / total).collect(),
            iterations_used: 0,
            max_marginal_deviation: 0.0,
            converged: true,
            attribute_deviation: Vec::new(),
            deviation_history: Vec::new(),
        })
    }
}

/// Weighted mass per bin.
pub fn weighted_marginal(bins: &BinAssignment, weights: &[f64]) -> Vec<f64> {
    let mut mass = vec![0.0; bins.bin_count()];
    for (&b, &w) in bins.bin_of_record.iter().zip(weights) {
        mass[b] += w;
    }
    mass
}

/// L1 distance of the weighted marginal from uniform over nonempty bins.
pub fn marginal_deviation(bins: &BinAssignment, weights: &[f64]) -> f64 {
    let target = uniform_target(bins);
    l1(&weighted_marginal(bins, weights), &target)
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn uniform_target(bins: &BinAssignment) -> Vec<f64> {
    let counts = bins.counts();
    let nonempty = counts.iter().filter(|&&c| c > 0).count();
    counts.iter().map(|&c| if c > 0 { 1.0 / nonempty as f64 } else { 0.0 }).collect()
}

/// Rakes toward uniform marginals over each attribute's nonempty bins.
///
/// One iteration is a full cycle over `bins` in the given order; each step
/// multiplies every record's weight by `target mass / current mass` of its
/// bin. Iteration stops once every attribute is within `tolerance` (L1) of
/// its target, or after `max_iterations` cycles with `converged = false`.
pub fn rake(bins: &[BinAssignment], tolerance: f64, max_iterations: usize) -> Result<CalibratedWeights> {
    validate(bins)?;
    let targets: Vec<Vec<f64>> = bins.iter().map(uniform_target).collect();
    rake_validated(bins, &targets, RakeOptions { tolerance, max_iterations })
}

/// Rakes toward caller-supplied marginals, one probability vector per attribute.
pub fn rake_with_targets(bins: &[BinAssignment], targets: &[Vec<f64>], options: RakeOptions) -> Result<CalibratedWeights> {
    validate(bins)?;
    if targets.len() != bins.len() {
        return Err(SamplerError::InvalidTarget {
            attribute: String::new(),
            reason: format!("{} targets for {} attributes", targets.len(), bins.len()),
        });
    }
    for (b, t) in bins.iter().zip(targets) {
        let bad = |reason: String| SamplerError::InvalidTarget {
            attribute: b.attribute.clone(),
            reason,
        };
        if t.len() != b.bin_count() {
            return Err(bad(format!("{} entries for {} bins", t.len(), b.bin_count())));
        }
        if t.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(bad("entries must be finite and nonnegative".into()));
        }
        if (t.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(bad("entries must sum to 1".into()));
        }
        if b.counts().iter().zip(t).any(|(&c, &x)| c == 0 && x > 0.0) {
            return Err(bad("positive target on an empty bin".into()));
        }
    }
    rake_validated(bins, targets, options)
}

fn validate(bins: &[BinAssignment]) -> Result<()> {
    let first = bins.first().ok_or(SamplerError::NoAttributes)?;
    let n = first.record_count();
    for b in bins {
        if b.record_count() != n {
            return Err(SamplerError::LengthMismatch {
                attribute: b.attribute.clone(),
                expected: n,
                found: b.record_count(),
            });
        }
        let k = b.bin_count();
        if let Some(record) = b.bin_of_record.iter().position(|&i| i >= k) {
            return Err(SamplerError::Unassigned {
                attribute: b.attribute.clone(),
                record,
            });
        }
        if n == 0 || k == 0 {
            return Err(SamplerError::NoNonemptyBin(b.attribute.clone()));
        }
    }
    Ok(())
}

fn rake_validated(bins: &[BinAssignment], targets: &[Vec<f64>], options: RakeOptions) -> Result<CalibratedWeights> {
    if !(options.tolerance > 0.0) || options.max_iterations == 0 {
        return Err(SamplerError::InvalidOptions);
    }
    let n = bins[0].record_count();
    let mut w = vec![1.0 / n as f64; n];
    let mut history = Vec::new();
    let mut deviations = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iterations {
        iterations += 1;
        for (b, target) in bins.iter().zip(targets) {
            let mass = weighted_marginal(b, &w);
            let mut factor = vec![0.0; mass.len()];
            for (j, (&m, &t)) in mass.iter().zip(target).enumerate() {
                if t > 0.0 {
                    if !(m > 0.0) {
                        return Err(SamplerError::WeightsCollapsed);
                    }
                    factor[j] = t / m;
                }
            }
            for (wi, &bin) in w.iter_mut().zip(&b.bin_of_record) {
                *wi *= factor[bin];
            }
        }
        let total: f64 = w.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(SamplerError::WeightsCollapsed);
        }
        w.iter_mut().for_each(|x| *x /= total);
        deviations = bins
            .iter()
            .zip(targets)
            .map(|(b, t)| l1(&weighted_marginal(b, &w), t))
            .collect::<Vec<f64>>();
        let worst = deviations.iter().copied().fold(0.0, f64::max);
        history.push(worst);
        if worst <= options.tolerance {
            converged = true;
            break;
        }
    }
    Ok(CalibratedWeights {
        weight: w,
        iterations_used: iterations,
        max_marginal_deviation: *history.last().expect("at least one iteration"),
        converged,
        attribute_deviation: bins.iter().map(|b| b.attribute.clone()).zip(deviations).collect(),
        deviation_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_attribute_closes_in_one_pass() {
        let mut idx = vec![0; 90];
        idx.extend(vec![1; 10]);
        let b = BinAssignment::from_indices("sensor", 2, idx);
        let w = rake(&[b], 1e-6, 1000).unwrap();
        assert!(w.converged);
        assert_eq!(w.iterations_used, 1);
        assert!((w.weight[0] - 0.5 / 90.0).abs() < 1e-15);
        assert!((w.weight[95] - 0.5 / 10.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_catalog_is_fixed_point() {
        let a = BinAssignment::from_indices("a", 2, vec![0, 1, 0, 1]);
        let b = BinAssignment::from_indices("b", 2, vec![0, 0, 1, 1]);
        let w = rake(&[a, b], 1e-6, 1000).unwrap();
        assert_eq!(w.iterations_used, 1);
        assert!(w.weight.iter().all(|&x| (x - 0.25).abs() < 1e-15));
    }

    #[test]
    fn empty_bins_get_zero_target() {
        let b = BinAssignment::from_indices("a", 3, vec![0, 0, 2]);
        let w = rake(std::slice::from_ref(&b), 1e-9, 10).unwrap();
        let m = weighted_marginal(&b, &w.weight);
        assert!((m[0] - 0.5).abs() < 1e-12 && m[1] == 0.0 && (m[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unassigned_record_is_error() {
        let b = BinAssignment::from_indices("a", 2, vec![0, 5]);
        assert!(matches!(rake(&[b], 1e-6, 10), Err(SamplerError::Unassigned { record: 1, .. })));
    }

    #[test]
    fn no_attributes_is_error() {
        assert_eq!(rake(&[], 1e-6, 10), Err(SamplerError::NoAttributes));
    }

    #[test]
    fn length_mismatch_is_error() {
        let a = BinAssignment::from_indices("a", 2, vec![0, 1]);
        let b = BinAssignment::from_indices("b", 2, vec![0, 1, 1]);
        assert!(matches!(rake(&[a, b], 1e-6, 10), Err(SamplerError::LengthMismatch { .. })));
    }

    #[test]
    fn zero_target_mass_collapses() {
        let a = BinAssignment::from_indices("a", 2, vec![0, 1]);
        let err = rake_with_targets(&[a.clone(), a], &[vec![0.0, 1.0], vec![1.0, 0.0]], RakeOptions::default()).unwrap_err();
        assert_eq!(err, SamplerError::WeightsCollapsed);
    }

    #[test]
    fn non_convergence_reported() {
        // infeasible: a and b are identical but demand different marginals
        let a = BinAssignment::from_indices("a", 2, vec![0, 0, 0, 1]);
        let b = BinAssignment::from_indices("b", 2, vec![0, 0, 0, 1]);
        let w = rake_with_targets(
            &[a, b],
            &[vec![0.5, 0.5], vec![0.9, 0.1]],
            RakeOptions {
                tolerance: 1e-9,
                max_iterations: 5,
            },
        )
        .unwrap();
        assert!(!w.converged);
        assert_eq!(w.iterations_used, 5);
        assert!(w.max_marginal_deviation > 1e-9);
    }

    #[test]
    fn custom_targets_are_matched() {
        let a = BinAssignment::from_indices("a", 2, vec![0, 0, 1, 1, 1]);
        let w = rake_with_targets(std::slice::from_ref(&a), &[vec![0.25, 0.75]], RakeOptions::default()).unwrap();
        let m = weighted_marginal(&a, &w.weight);
        assert!((m[0] - 0.25).abs() < 1e-12);
    }
}
