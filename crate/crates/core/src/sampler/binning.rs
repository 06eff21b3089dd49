use std::collections::BTreeSet;

use serde::Serialize;

use super::{Result, SamplerError};
use crate::catalog::{AttributeKind, Catalog};
use crate::stats::quantile_sorted;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BinEdges {
    /// Interior cut points; bin `j` holds values in `(edges[j-1], edges[j]]`.
    Numeric(Vec<f64>),
    /// One bin per category, in sorted order.
    Categorical(Vec<String>),
}

/// Bin membership of every record for one attribute.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinAssignment {
    pub attribute: String,
    pub edges: BinEdges,
    pub bin_of_record: Vec<usize>,
}

impl BinAssignment {
    pub fn bin_count(&self) -> usize {
        match &self.edges {
            BinEdges::Numeric(e) => e.len() + 1,
            BinEdges::Categorical(c) => c.len(),
        }
    }

    pub fn record_count(&self) -> usize {
        self.bin_of_record.len()
    }

    /// Number of records per bin.
    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.bin_count()];
        for &b in &self.bin_of_record {
            if b < counts.len() {
                counts[b] += 1;
            }
        }
        counts
    }

    /// Builds an assignment directly from bin indices (bins `0..bins`).
    pub fn from_indices(attribute: &str, bins: usize, bin_of_record: Vec<usize>) -> Self {
        Self {
            attribute: attribute.to_string(),
            edges: BinEdges::Categorical((0..bins).map(|b| b.to_string()).collect()),
            bin_of_record,
        }
    }
}

/// Quantile bins for a numeric attribute present on every record.
///
/// Edges sit at the `1/k, .., (k-1)/k` linear-interpolation quantiles.
/// Duplicate edges collapse, and an edge whose upper bin would hold no
/// record is dropped, so the effective bin count can be below `k` and every
/// bin is nonempty.
pub fn quantile_bin(catalog: &Catalog, attribute: &str, k: usize) -> Result<BinAssignment> {
    if k < 1 {
        return Err(SamplerError::ZeroBins);
    }
    let values = catalog
        .records
        .iter()
        .map(|r| {
            r.numeric_attrs
                .get(attribute)
                .copied()
                .ok_or_else(|| SamplerError::MissingAttribute {
                    attribute: attribute.to_string(),
                    record: r.id.clone(),
                })
        })
        .collect::<Result<Vec<f64>>>()?;
    quantile_bin_values(attribute, &values, k)
}

/// [`quantile_bin`] over raw values.
pub fn quantile_bin_values(attribute: &str, values: &[f64], k: usize) -> Result<BinAssignment> {
    if k < 1 {
        return Err(SamplerError::ZeroBins);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut edges: Vec<f64> = Vec::with_capacity(k.saturating_sub(1));
    if !sorted.is_empty() {
        for j in 1..k {
            let q = quantile_sorted(&sorted, j as f64 / k as f64).expect("non-empty");
            if edges.last() != Some(&q) {
                edges.push(q);
            }
        }
    }
    // Drop edges whose upper bin is empty: no value in (edge, next edge].
    let mut kept = Vec::with_capacity(edges.len());
    for (j, &e) in edges.iter().enumerate() {
        let next = edges.get(j + 1).copied().unwrap_or(f64::INFINITY);
        let first_above = sorted.partition_point(|&v| v <= e);
        if first_above < sorted.len() && sorted[first_above] <= next {
            kept.push(e);
        }
    }
    let bin_of_record = values.iter().map(|&v| kept.partition_point(|&e| e < v)).collect();
    Ok(BinAssignment {
        attribute: attribute.to_string(),
        edges: BinEdges::Numeric(kept),
        bin_of_record,
    })
}

/// One bin per distinct category value (sorted).
pub fn category_bin(catalog: &Catalog, attribute: &str) -> Result<BinAssignment> {
    let values = catalog
        .records
        .iter()
        .map(|r| {
            r.categorical_attrs
                .get(attribute)
                .map(String::as_str)
                .ok_or_else(|| SamplerError::MissingAttribute {
                    attribute: attribute.to_string(),
                    record: r.id.clone(),
                })
        })
        .collect::<Result<Vec<&str>>>()?;
    let categories: Vec<String> = values
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(String::from)
        .collect();
    let bin_of_record = values
        .iter()
        .map(|v| {
            categories
                .binary_search_by(|c| c.as_str().cmp(v))
                .expect("category collected above")
        })
        .collect();
    Ok(BinAssignment {
        attribute: attribute.to_string(),
        edges: BinEdges::Categorical(categories),
        bin_of_record,
    })
}

/// Bins every balancing attribute of the catalog's schema, in declaration order.
pub fn bins_for_schema(catalog: &Catalog, default_numeric_bins: usize) -> Result<Vec<BinAssignment>> {
    catalog
        .schema
        .attributes
        .iter()
        .filter(|a| a.balance)
        .map(|a| match a.kind {
            AttributeKind::Numeric => quantile_bin(catalog, &a.name, a.bins.unwrap_or(default_numeric_bins)),
            AttributeKind::Categorical => category_bin(catalog, &a.name),
        })
        .collect()
}
