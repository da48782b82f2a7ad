//! From filter specification to clock-quantized two-level pattern.
//!
//! Designs an 8-tap lowpass prototype, encodes it as constant-amplitude
//! pulses with matched area and position, and quantizes the pulse edges to
//! the clock grid.
//!
//! ```bash
//! cargo run --example design_pattern
//! ```

use taf::filter::{design_fir, zoh_interpolate, FilterMode, FilterSpec, LossKindSelector};
use taf::pattern::{approximate, quantize};
use taf::spectral::intrinsic_error_db;

fn main() {
    let spec = FilterSpec {
        mode: FilterMode::Lowpass,
        num_taps: 8,
        tap_interval: 1.0,
        clock_period: 0.125, // grid factor 8 -> 64 pattern slots
        band_edges: vec![0.05, 0.25],
        loss: LossKindSelector::FullBand,
        loss_grid_points: None,
        min_stopband_atten_db: None,
    };
    spec.validate().unwrap();
    println!(
        "spec: {} taps, T_tap = {} s, T_clk = {} s (grid factor {})",
        spec.num_taps,
        spec.tap_interval,
        spec.clock_period,
        spec.grid_factor()
    );

    let h = design_fir(&spec).unwrap();
    println!("\nFIR prototype (max|h| normalized to 1):");
    for (n, c) in h.coeffs.iter().enumerate() {
        println!("  h[{n}] = {c:+.6}");
    }

    let train = approximate(&zoh_interpolate(&h), 1.0).unwrap();
    println!("\npulse train (width, center, sign):");
    for p in &train.pulses {
        println!("  width {:.4} s  center {:.2} s  sign {:+}", p.width, p.center, p.sign);
    }
    let a_min = train.min_width_fraction().unwrap();
    println!("smallest pulse fraction a_min = {a_min:.4}");

    let quantized = quantize(&train, spec.clock_period).unwrap();
    println!("\nquantized pattern ({} slots):", quantized.pattern.len());
    println!("  {}", quantized.pattern.to_line());
    if !quantized.collapsed_taps.is_empty() {
        println!("  collapsed taps (pulse narrower than half a slot): {:?}",
                 quantized.collapsed_taps);
    }

    println!("\nconstant-amplitude encoding error at a few frequencies:");
    for f in [0.05, 0.15, 0.25, 0.35, 0.45] {
        let err = intrinsic_error_db(a_min, spec.tap_interval, f).unwrap();
        println!("  f = {f:.2} Hz -> {err:+.2} dB");
    }
}
