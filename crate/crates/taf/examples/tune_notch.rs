//! Deepening a notch with the band loss: the loss trades mean magnitude in a
//! suppressed band against the signal band, so coordinate descent moves
//! pulse edges until a response null lands in the target band.
//!
//! ```bash
//! cargo run --example tune_notch
//! ```

use taf::filter::{design_fir, zoh_interpolate, FilterMode, FilterSpec, LossKindSelector};
use taf::pattern::{approximate, pattern_to_ct, quantize, TafPattern};
use taf::spectral::{ct_response_spectrum, integrate_band};
use taf::tuner::{fine_tune, IdealEvaluator, TuneConfig};

fn main() {
    let (b1, f0, b2) = (0.06, 0.35, 0.1);
    let spec = FilterSpec {
        mode: FilterMode::BandpassTarget,
        num_taps: 4,
        tap_interval: 1.0,
        clock_period: 0.125,
        band_edges: vec![b1, f0, b2],
        loss: LossKindSelector::BandNotch,
        loss_grid_points: Some(1024),
        min_stopband_atten_db: None,
    };
    let h = design_fir(&spec).unwrap();
    let initial = quantize(&approximate(&zoh_interpolate(&h), 1.0).unwrap(), spec.clock_period)
        .unwrap()
        .pattern;

    let mut cfg = TuneConfig::new(spec.loss_spec().unwrap());
    cfg.max_sweeps = 60;
    let (tuned, report) = fine_tune(&initial, &cfg, &IdealEvaluator { amplitude: 1.0 }).unwrap();

    let grid = cfg.loss.grid();
    let band_mean = |p: &TafPattern, lo: f64, hi: f64| -> f64 {
        let s = ct_response_spectrum(&pattern_to_ct(p, 1.0), &grid).dc_normalized();
        let mags = s.magnitudes();
        integrate_band(&s.freqs, &mags, lo, hi).unwrap() / (hi - lo)
    };

    println!("signal band [0, {b1}] Hz, suppressed band [{f0}, {}] Hz", f0 + b2);
    println!("initial pattern: {}", initial.to_line());
    println!("tuned pattern:   {}", tuned.to_line());
    println!();
    println!(
        "loss: {:.4} -> {:.4} ({} accepted moves)",
        report.initial_loss, report.final_loss, report.accepted_moves
    );

    let before_notch = band_mean(&initial, f0, f0 + b2);
    let after_notch = band_mean(&tuned, f0, f0 + b2);
    let before_sig = band_mean(&initial, 0.0, b1);
    let after_sig = band_mean(&tuned, 0.0, b1);
    println!(
        "suppressed-band mean magnitude: {before_notch:.4} -> {after_notch:.4} \
         ({:+.2} dB)",
        20.0 * (after_notch / before_notch).log10()
    );
    println!(
        "signal-band mean magnitude:     {before_sig:.4} -> {after_sig:.4} \
         ({:+.2} dB)",
        20.0 * (after_sig / before_sig).log10()
    );
}
