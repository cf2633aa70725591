//! Synthetic transmission gathers: leading-term single arrivals, a smooth
//! remainder kernel, and explicit multi-arrival traces.

mod arrivals;
mod gather;
mod synth;

pub use arrivals::{Arrival, ArrivalSet};
pub use gather::Gather;
pub use synth::{
    leading_term_trace, model_gather, multi_arrival_trace, remainder_trace, GatherOptions,
    RemainderSpec,
};
