//! Label-invariant equivalence of label maps.
//!
//! Two label maps describe the same labeling when they group cells
//! identically, whatever the label values are. The canonical form maps
//! every cell to the minimum linear index of its label class, which makes
//! equivalence a plain array comparison.

use std::collections::HashMap;

use ccl_core::LabelMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimMismatch(u32, u32, u32, u32),
}

/// Canonical component decomposition of a label map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    width: u32,
    height: u32,
    labels: Vec<u32>,
    components: usize,
}

impl Partition {
    /// Per-cell canonical labels: the minimum cell index of each class.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    /// Index of the first cell where two partitions disagree.
    pub fn first_difference(&self, other: &Partition) -> Option<usize> {
        self.labels
            .iter()
            .zip(&other.labels)
            .position(|(a, b)| a != b)
    }
}

/// Canonicalize a label map: every cell is mapped to the minimum cell
/// index among the cells sharing its label value.
///
/// Label values are treated as opaque class tokens — two cells belong to
/// the same class exactly when they carry the same value. Labelers flatten
/// before comparison, so values at that point are class representatives;
/// token grouping also keeps arbitrary arrays (out-of-range values, cyclic
/// parent structures) safe to canonicalize.
pub fn canonicalize(labels: &LabelMap) -> Partition {
    let values = labels.to_vec();
    let mut class_min: HashMap<u32, u32> = HashMap::new();
    for (cell, &label) in values.iter().enumerate() {
        class_min
            .entry(label)
            .and_modify(|m| *m = (*m).min(cell as u32))
            .or_insert(cell as u32);
    }
    let canonical = values.iter().map(|l| class_min[l]).collect();
    Partition {
        width: labels.width(),
        height: labels.height(),
        labels: canonical,
        components: class_min.len(),
    }
}

/// True when the two label maps induce identical partitions.
pub fn equivalent(a: &LabelMap, b: &LabelMap) -> Result<bool, VerifyError> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(VerifyError::DimMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    Ok(canonicalize(a).labels == canonicalize(b).labels)
}
