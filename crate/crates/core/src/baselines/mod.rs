//! Classical comparison baselines: sliding-window spatial filters and an FFT
//! log-magnitude spectrum view.

mod fft;
mod filter;

pub use fft::{fft_2d, fft_in_place, fft_log_magnitude, SpectrumView};
pub use filter::{spatial_filter, FilterKind, KernelSpec};
