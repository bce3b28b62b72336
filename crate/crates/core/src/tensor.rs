//! Tensor shapes with a symbolic batch dimension.

use std::fmt;

use serde::{Deserialize, Serialize};

/// One dimension of an activation tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dim {
    /// The symbolic batch axis.
    Batch,
    /// A statically known extent, always `>= 1`.
    Known(u64),
    Unknown,
}

impl Dim {
    pub fn known(self) -> Option<u64> {
        match self {
            Dim::Known(n) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::Batch => f.write_str("B"),
            Dim::Known(n) => write!(f, "{n}"),
            Dim::Unknown => f.write_str("?"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TensorShape {
    pub dims: Vec<Dim>,
}

impl TensorShape {
    pub fn new(dims: Vec<Dim>) -> Self {
        TensorShape { dims }
    }

    /// `[B, d1, d2, ...]` from known non-batch extents.
    pub fn batched(extents: &[u64]) -> Self {
        let mut dims = Vec::with_capacity(extents.len() + 1);
        dims.push(Dim::Batch);
        dims.extend(extents.iter().map(|&e| Dim::Known(e)));
        TensorShape { dims }
    }

    /// `[B, ?, ?, ...]` of the given total rank.
    pub fn unknown_of_rank(rank: usize) -> Self {
        let mut dims = vec![Dim::Unknown; rank.max(1)];
        dims[0] = Dim::Batch;
        TensorShape { dims }
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn non_batch(&self) -> &[Dim] {
        match self.dims.first() {
            Some(Dim::Batch) => &self.dims[1..],
            _ => &self.dims,
        }
    }

    /// Product of the non-batch dims, `None` if any is unknown or the product overflows.
    pub fn element_count(&self) -> Option<u64> {
        self.non_batch()
            .iter()
            .try_fold(1u64, |acc, d| d.known().and_then(|n| acc.checked_mul(n)))
    }

    pub fn is_fully_known(&self) -> bool {
        self.non_batch().iter().all(|d| matches!(d, Dim::Known(_)))
    }
}

impl fmt::Display for TensorShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, d) in self.dims.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str("]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn element_count_skips_batch() {
        assert_eq!(TensorShape::batched(&[24, 24, 32]).element_count(), Some(18432));
        let s = TensorShape::new(vec![Dim::Batch, Dim::Unknown, Dim::Known(3)]);
        assert_eq!(s.element_count(), None);
        assert_eq!(s.to_string(), "[B, ?, 3]");
    }

    #[test]
    fn overflow_is_unknown() {
        let s = TensorShape::batched(&[u64::MAX, 2]);
        assert_eq!(s.element_count(), None);
    }
}
