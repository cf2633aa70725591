//! Time series, wavelet families and spectral operators.

mod ops;
mod spectrum;
mod trace;
mod wavelet;

pub use ops::{
    apply_t, apply_t_eps, convolve, cross_correlate, delay_onto, envelope, hilbert_power,
    peak_time, pulse_width, rms_frequency, t_eps_multiplier, time_bandwidth,
};
pub use spectrum::{bin_omega, FourierSign, Spectrum};
pub(crate) use spectrum::{forward_padded, inverse_real};
pub use trace::{TimeAxis, Trace};
pub use wavelet::{make_mother_wavelet, scale_wavelet, Wavelet, WaveletKind};
