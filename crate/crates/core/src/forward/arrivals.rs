use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    pub amplitude: f64,
    pub tau: f64,
    /// Number of caustic touches; the event carries `H^p` of the wavelet.
    #[serde(default)]
    pub caustic_index: u32,
}

/// Arrivals of one trace, sorted by time. The first has not touched a caustic.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalSet {
    arrivals: Vec<Arrival>,
}

impl ArrivalSet {
    pub fn new(mut arrivals: Vec<Arrival>) -> Result<Self> {
        if arrivals.is_empty() {
            return invalid("arrival set is empty");
        }
        for a in &arrivals {
            if !(a.amplitude > 0.0) || !a.amplitude.is_finite() {
                return invalid(format!("arrival amplitude must be positive, got {}", a.amplitude));
            }
            if !a.tau.is_finite() {
                return invalid("arrival time must be finite");
            }
        }
        arrivals.sort_by(|a, b| a.tau.total_cmp(&b.tau));
        if arrivals.windows(2).any(|w| w[0].tau == w[1].tau) {
            return invalid("arrival times must be distinct");
        }
        if arrivals[0].caustic_index != 0 {
            return invalid("the earliest arrival cannot have touched a caustic");
        }
        Ok(ArrivalSet { arrivals })
    }

    pub fn single(amplitude: f64, tau: f64) -> Result<Self> {
        ArrivalSet::new(vec![Arrival { amplitude, tau, caustic_index: 0 }])
    }

    pub fn arrivals(&self) -> &[Arrival] {
        &self.arrivals
    }

    pub fn first(&self) -> &Arrival {
        &self.arrivals[0]
    }

    pub fn len(&self) -> usize {
        self.arrivals.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}
