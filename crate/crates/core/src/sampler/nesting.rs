use serde::Serialize;

use super::{Result, SamplerError};

/// Nested subsets taken as prefixes of one draw order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetChain {
    pub ordering: Vec<usize>,
    pub sizes: Vec<usize>,
    /// Record indices of each subset, in draw order.
    pub subsets: Vec<Vec<usize>>,
}

impl SubsetChain {
    /// True when every subset is contained in the next one.
    pub fn is_nested(&self) -> bool {
        self.subsets.windows(2).all(|w| {
            let larger: std::collections::HashSet<usize> = w[1].iter().copied().collect();
            w[0].iter().all(|i| larger.contains(i))
        })
    }
}

pub fn nested_subsets(ordering: &[usize], sizes: &[usize]) -> Result<SubsetChain> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SamplerError::SizesNotAscending);
    }
    if let Some(&size) = sizes.iter().find(|&&s| s > ordering.len()) {
        return Err(SamplerError::SizeTooLarge {
            size,
            available: ordering.len(),
        });
    }
    Ok(SubsetChain {
        ordering: ordering.to_vec(),
        sizes: sizes.to_vec(),
        subsets: sizes.iter().map(|&s| ordering[..s].to_vec()).collect(),
    })
}
