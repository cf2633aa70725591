use std::collections::BTreeMap;

use crate::error::{AwiError, Result};
use crate::signal::{TimeAxis, Trace};

/// Traces keyed by pair id, all on one time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Gather {
    axis: TimeAxis,
    traces: BTreeMap<usize, Trace>,
}

impl Gather {
    pub fn new(axis: TimeAxis, traces: impl IntoIterator<Item = (usize, Trace)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (id, t) in traces {
            if !axis.matches(&t) {
                return Err(AwiError::InvalidArgument(format!(
                    "trace {id} is not on the gather time axis"
                )));
            }
            if map.insert(id, t).is_some() {
                return Err(AwiError::InvalidArgument(format!("duplicate trace id {id}")));
            }
        }
        Ok(Gather { axis, traces: map })
    }

    pub fn axis(&self) -> TimeAxis {
        self.axis
    }

    pub fn get(&self, id: usize) -> Option<&Trace> {
        self.traces.get(&id)
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.traces.keys().copied()
    }

    /// Traces in ascending pair-id order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Trace)> {
        self.traces.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Gather {
        Gather {
            axis: self.axis,
            traces: self.traces.iter().map(|(k, t)| (*k, t.scaled(factor))).collect(),
        }
    }

    /// Pairs `(id, self trace, other trace)` after checking that both gathers
    /// hold the same ids on the same axis.
    pub fn zip<'a>(&'a self, other: &'a Gather) -> Result<Vec<(usize, &'a Trace, &'a Trace)>> {
        if self.axis != other.axis {
            return Err(AwiError::PairMismatch("gathers have different time axes".into()));
        }
        if !self.traces.keys().eq(other.traces.keys()) {
            return Err(AwiError::PairMismatch(format!(
                "pair ids differ: {:?} vs {:?}",
                self.traces.keys().collect::<Vec<_>>(),
                other.traces.keys().collect::<Vec<_>>()
            )));
        }
        Ok(self
            .traces
            .iter()
            .zip(other.traces.values())
            .map(|((id, a), b)| (*id, a, b))
            .collect())
    }
}
