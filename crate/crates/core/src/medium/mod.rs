//! Velocity models, acquisition geometry and first-arrival travel times.

mod eikonal;
mod geometry;
mod model;
mod traveltime;

pub use eikonal::{eikonal_solve, TravelTimeField, SOURCE_RADIUS, SWEEP_TOLERANCE};
pub use geometry::{Geometry, SourceReceiverPair};
pub use model::{distance, Axis, MediumKind, MediumModel, Position, VelocityGrid};
pub use traveltime::{
    amplitude, gradient_travel_time, pair_travel_times, travel_time, AmplitudeModel,
    DEFAULT_LOG_AMPLITUDE_BOUND,
};
