use serde::{Deserialize, Serialize};

use super::model::{distance, Position};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceReceiverPair {
    pub id: usize,
    pub source: Position,
    pub receiver: Position,
}

impl SourceReceiverPair {
    pub fn offset(&self) -> f64 {
        distance(self.source, self.receiver)
    }
}

/// Finite set of source-receiver pairs, none co-located.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pairs: Vec<SourceReceiverPair>,
}

impl Geometry {
    /// Builds a geometry with ids `0..n` in the given order.
    pub fn new(pairs: impl IntoIterator<Item = (Position, Position)>) -> Result<Self> {
        let pairs = pairs
            .into_iter()
            .enumerate()
            .map(|(id, (source, receiver))| SourceReceiverPair { id, source, receiver })
            .collect();
        Geometry::from_pairs(pairs)
    }

    pub fn from_pairs(pairs: Vec<SourceReceiverPair>) -> Result<Self> {
        for p in &pairs {
            if !(p.source.iter().chain(&p.receiver).all(|v| v.is_finite())) {
                return invalid(format!("pair {} has non-finite coordinates", p.id));
            }
            if p.offset() <= 0.0 {
                return invalid(format!("pair {} has co-located source and receiver", p.id));
            }
        }
        let mut ids: Vec<usize> = pairs.iter().map(|p| p.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return invalid("duplicate pair ids");
        }
        Ok(Geometry { pairs })
    }

    pub fn pairs(&self) -> &[SourceReceiverPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Copy with every position moved by `shift`.
    pub fn translated(&self, shift: Position) -> Geometry {
        let mv = |p: Position| [p[0] + shift[0], p[1] + shift[1]];
        Geometry {
            pairs: self
                .pairs
                .iter()
                .map(|p| SourceReceiverPair { id: p.id, source: mv(p.source), receiver: mv(p.receiver) })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_colocated_pairs() {
        assert!(Geometry::new([([0.0, 0.0], [0.0, 0.0])]).is_err());
        let g = Geometry::new([([0.0, 0.0], [3.0, 4.0])]).unwrap();
        assert_eq!(g.pairs()[0].offset(), 5.0);
    }

    #[test]
    fn rejects_duplicate_ids() {
        let p = SourceReceiverPair { id: 1, source: [0.0, 0.0], receiver: [1.0, 0.0] };
        assert!(Geometry::from_pairs(vec![p, p]).is_err());
    }
}
