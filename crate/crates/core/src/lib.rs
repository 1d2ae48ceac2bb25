//! Signal-level simulation of multi-user TH-PAM ultra-wideband links and a
//! two-stage timing synchronizer: a coarse dirty-template (TDT) search over
//! the symbol period followed by a windowed fine scan.
//!
//! The pipeline is `waveform` (pulse, TH code, symbols, transmit waveform)
//! → `channel` (CM1 multipath, delay, superposition, AWGN) → `sync`
//! (coarse and fine estimators) → `harness` (seeded Monte Carlo sweeps).

pub mod channel;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod rng;
pub mod scenario;
pub mod selftest;
pub mod signal;
pub mod sync;
pub mod waveform;

pub use error::{Error, Result};
pub use geometry::FrameGeometry;
pub use signal::SampledSignal;
