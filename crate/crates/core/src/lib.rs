//! Channel sounding from FMCW radar mutual interference.
//!
//! The crate covers four stages that together form a closed validation loop:
//!
//! - [`scene_rt`]: a geometrical-optics (image method) ray tracer that produces
//!   the reference tap-delay channel for a scene of plates and point scatterers.
//! - [`frame_synth`]: synthesis of the victim radar's raw ADC frame, where an
//!   aggressor radar with a slightly different chirp slope leaks into some
//!   chirps as a "ghost target" carrying the bistatic channel.
//! - [`extraction`]: the chain that turns a raw frame back into a channel
//!   impulse response: static filtering, interference chirp selection and
//!   alignment, module/phase correlation, chirp clustering, Hamming auto-clutter
//!   reduction, zoomed inverse chirp-z refinement, cluster realignment and
//!   averaging.
//! - [`analysis`]: power delay profile, RMS delay spread, elevation angle map
//!   and tap matching against the ray-traced reference.
//!
//! [`cli_io`] wires all of it behind the `isac-sounder` command line tool.

pub mod analysis;
pub mod cli_io;
pub mod extraction;
pub mod frame_synth;
pub mod scene_rt;
pub mod units;

pub use num_complex::{Complex32, Complex64};
