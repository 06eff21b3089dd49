use rand::Rng;

use super::{CalibratedWeights, Result, SamplerError};
use crate::seed::rng_from_seed;

/// Weighted random order without replacement.
///
/// Every record draws `u ~ U(0, 1]` (in index order, one draw per record)
/// and gets key `ln(u) / w`; records are sorted by descending key with ties
/// broken by ascending index. The resulting order has the same distribution
/// as repeated weighted draws without replacement. Zero-weight records
/// follow all positive-weight records, in index order.
pub fn weighted_permutation(weights: &CalibratedWeights, seed: u64) -> Result<Vec<usize>> {
    weighted_permutation_from(&weights.weight, &mut rng_from_seed(seed))
}

pub fn weighted_permutation_from<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<Vec<usize>> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(SamplerError::InvalidWeight);
    }
    if !weights.iter().any(|&w| w > 0.0) {
        return Err(SamplerError::NoPositiveWeight);
    }
    let mut keyed = Vec::with_capacity(weights.len());
    let mut zero = Vec::new();
    for (i, &w) in weights.iter().enumerate() {
        let u = 1.0 - rng.random::<f64>();
        if w > 0.0 {
            keyed.push((u.ln() / w, i));
        } else {
            zero.push(i);
        }
    }
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut order: Vec<usize> = keyed.into_iter().map(|(_, i)| i).collect();
    order.extend(zero);
    Ok(order)
}
