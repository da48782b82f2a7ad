//! Synthesis toolkit for time-approximation FIR filters: a filter
//! specification becomes a clock-quantized two-level pattern, is fine-tuned
//! by coordinate descent against spectral losses, simulated against a
//! behavioral model of the counter-based time-interleaved hardware, and the
//! circuit itself is sized through an MLP surrogate with linear transfer
//! learning and multi-start gradient search.
//!
//! Start with the runnable examples, one per capability:
//!
//! ```text
//! cargo run --example design_pattern      # spec -> FIR -> pulse train -> pattern
//! cargo run --example intrinsic_error     # constant-amplitude encoding error sweep
//! cargo run --example tune_full_band      # coordinate-descent tuning, full-band loss
//! cargo run --example tune_notch          # notch-deepening with the band loss
//! cargo run --example hardware_sim        # serializer, chopping, time interleaving
//! cargo run --example qam_spectra         # lowpass/bandpass spectra of a QAM stream
//! cargo run --example surrogate_sizing    # sample -> train -> transfer -> search
//! ```
//!
//! The same flow is scriptable through the thin `taf` binary
//! (`taf design|tune|simulate|surrogate ...`); see the README for file
//! formats.

pub mod cli;
pub mod error;
pub mod filter;
pub mod pattern;
pub mod provenance;
pub mod sim;
pub mod surrogate;
pub mod tuner;
pub mod spectral;

pub use error::{Error, Result};
