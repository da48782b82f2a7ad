//! Dual-mode filtering of a 256-QAM symbol stream: the same pattern filters
//! at baseband (lowpass mode) or around the chop frequency (bandpass mode).
//! Writes trace and spectrum CSVs for both modes into `taf_demo_out/`.
//!
//! ```bash
//! cargo run --example qam_spectra
//! ```

use taf::filter::{design_fir, zoh_interpolate, FilterMode, FilterSpec, LossKindSelector};
use taf::pattern::{approximate, quantize};
use taf::sim::stimulus::StimulusSpec;
use taf::sim::{peak_bin, simulate_filter, trace_spectrum, HwConfig, HwMode};

fn main() {
    let spec = FilterSpec {
        mode: FilterMode::Lowpass,
        num_taps: 8,
        tap_interval: 1.0,
        clock_period: 0.125,
        band_edges: vec![0.05, 0.25],
        loss: LossKindSelector::FullBand,
        loss_grid_points: None,
        min_stopband_atten_db: None,
    };
    let h = design_fir(&spec).unwrap();
    let pattern = quantize(&approximate(&zoh_interpolate(&h), 1.0).unwrap(), spec.clock_period)
        .unwrap()
        .pattern;

    let stimulus = StimulusSpec::Qam {
        order: 256,
        num_symbols: 256,
        samples_per_symbol: 2,
        seed: 11,
    };

    let out_dir = std::path::Path::new("taf_demo_out");
    std::fs::create_dir_all(out_dir).unwrap();

    for mode in [HwMode::Lowpass, HwMode::Bandpass] {
        let hw = HwConfig {
            mode,
            chop_divisor: 4,
            oversample: 2,
            ..HwConfig::embodiment(spec.clock_period)
        };
        let input = stimulus.generate(hw.input_period()).unwrap();
        let trace = simulate_filter(&input, &pattern, &hw).unwrap();
        let spectrum = trace_spectrum(&trace).unwrap();

        let tag = match mode {
            HwMode::Lowpass => "lowpass",
            HwMode::Bandpass => "bandpass",
        };
        let mut trace_csv = Vec::new();
        trace.write_csv(&mut trace_csv).unwrap();
        std::fs::write(out_dir.join(format!("qam_{tag}_trace.csv")), trace_csv).unwrap();
        let mut spec_csv = Vec::new();
        spectrum.write_csv(&mut spec_csv).unwrap();
        std::fs::write(out_dir.join(format!("qam_{tag}_spectrum.csv")), spec_csv).unwrap();

        let peak = peak_bin(&spectrum);
        println!(
            "{tag:>8}: {} samples, strongest non-DC bin at {:.4} Hz \
             (chop frequency {:.4} Hz)",
            trace.samples.len(),
            spectrum.freqs[peak],
            hw.chop_freq()
        );
    }
    println!("\nCSV files written to {}", out_dir.display());
}
