//! Coordinate-descent fine tuning against the full-band loss: the quantized
//! pattern is walked pulse by pulse (edges and position, one slot at a time)
//! and a move is kept only when it strictly reduces the mean magnitude
//! mismatch against the target response over the whole band.
//!
//! ```bash
//! cargo run --example tune_full_band
//! ```

use taf::filter::{design_fir, zoh_interpolate, FilterMode, FilterSpec, LossKindSelector};
use taf::pattern::{approximate, quantize};
use taf::spectral::fir_spectrum;
use taf::tuner::{fine_tune, IdealEvaluator, TuneConfig};

fn main() {
    let spec = FilterSpec {
        mode: FilterMode::Lowpass,
        num_taps: 8,
        tap_interval: 1.0,
        clock_period: 0.125,
        band_edges: vec![0.05, 0.25],
        loss: LossKindSelector::FullBand,
        loss_grid_points: Some(1024),
        min_stopband_atten_db: None,
    };
    let h = design_fir(&spec).unwrap();
    let initial = quantize(&approximate(&zoh_interpolate(&h), 1.0).unwrap(), spec.clock_period)
        .unwrap()
        .pattern;

    let mut cfg = TuneConfig::new(spec.loss_spec().unwrap());
    cfg.target = Some(fir_spectrum(&h, &cfg.loss.grid()));
    cfg.max_sweeps = 50;

    let evaluator = IdealEvaluator { amplitude: 1.0 };
    let (tuned, report) = fine_tune(&initial, &cfg, &evaluator).unwrap();

    println!("initial pattern: {}", initial.to_line());
    println!("tuned pattern:   {}", tuned.to_line());
    println!();
    println!("initial loss: {:.6}", report.initial_loss);
    println!("final loss:   {:.6}", report.final_loss);
    println!(
        "improvement:  {:.2}x over {} accepted moves in {} sweeps",
        report.initial_loss / report.final_loss,
        report.accepted_moves,
        report.sweeps_run
    );
    println!("\nloss after each accepted move:");
    for (i, l) in report.loss_trace.iter().enumerate() {
        println!("  {:>3}  {l:.6}", i + 1);
    }
}
