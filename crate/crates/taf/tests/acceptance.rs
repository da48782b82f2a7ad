//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (run with `cargo test --test acceptance -- --nocapture` to see
//! them). Tolerances are pinned in the asserts.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use taf::filter::{design_fir, zoh_interpolate, FilterMode, FilterSpec, LossKindSelector};
use taf::pattern::{approximate, pattern_to_ct, quantize, TafPattern};
use taf::sim::synth::{EvalVariant, PostlayoutTransform, SynthEval};
use taf::sim::{
    chop, peak_bin, ring_counter_phases, serialize_pattern, simulate_channel, simulate_filter,
    trace_spectrum, HwConfig, HwMode, TransientTrace,
};
use taf::spectral::{ct_response_spectrum, fir_spectrum, integrate_band, intrinsic_error_db, sinc, LossSpec};
use taf::surrogate::dataset::sample_dataset;
use taf::surrogate::mlp::{mean_relative_error_of, train_mlp, MlpModel, TrainConfig};
use taf::surrogate::search::{search_params, Regressor, SearchConfig, TargetSpec};
use taf::surrogate::transfer::transfer_train;
use taf::tuner::{evaluate_candidate, fine_tune, IdealEvaluator, TuneConfig};

fn lowpass_spec(num_taps: usize, g: usize, edges: Vec<f64>) -> FilterSpec {
    FilterSpec {
        mode: FilterMode::Lowpass,
        num_taps,
        tap_interval: 1.0,
        clock_period: 1.0 / g as f64,
        band_edges: edges,
        loss: LossKindSelector::FullBand,
        loss_grid_points: None,
        min_stopband_atten_db: None,
    }
}

// ---------------------------------------------------------------------------
// 1. Intrinsic-error formula equivalence
// ---------------------------------------------------------------------------

#[test]
fn acceptance_1_intrinsic_error_equivalence() {
    let start = Instant::now();
    let tap_interval = 1.0;
    let mut checked = 0;
    for ai in 1..=10 {
        let a_min = ai as f64 / 10.0;
        for fi in 1..=5 {
            let f = 0.09 * fi as f64; // 0.09 .. 0.45, inside (0, 1/(2 T))
            let formula = intrinsic_error_db(a_min, tap_interval, f).unwrap();

            // Independent route: transform magnitudes of centered pulses of
            // width a_min*T and T with matched areas.
            let pulse = |width: f64| {
                taf::filter::CtResponse {
                    segments: vec![taf::filter::CtSegment {
                        start: 0.5 - width / 2.0,
                        end: 0.5 + width / 2.0,
                        level: 1.0 / width,
                    }],
                    total_duration: 1.0,
                }
            };
            let narrow = ct_response_spectrum(&pulse(a_min * tap_interval), &[f]);
            let full = ct_response_spectrum(&pulse(tap_interval), &[f]);
            let spectral = 20.0 * (narrow.values[0].norm() / full.values[0].norm()).log10();
            assert!(
                (formula - spectral).abs() < 1e-9,
                "a_min={a_min} f={f}: formula {formula} vs spectral {spectral}"
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 50);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("criterion 1 (intrinsic-error equivalence, 50 points, <1s): PASS ({elapsed:?})");
}

// ---------------------------------------------------------------------------
// 2. Analytic spectrum vs oversampled FFT
// ---------------------------------------------------------------------------

fn oversampled_fft(pattern: &TafPattern, oversample: usize, zero_pad: usize) -> (Vec<f64>, Vec<Complex64>) {
    let dt = pattern.clock_period() / oversample as f64;
    let n = pattern.len() * oversample * zero_pad;
    let mut buf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n];
    for (slot, &b) in pattern.bits().iter().enumerate() {
        for i in 0..oversample {
            buf[slot * oversample + i] = Complex64::new(b as f64, 0.0);
        }
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mut freqs = Vec::with_capacity(n / 2);
    let mut values = Vec::with_capacity(n / 2);
    for (k, bin) in buf.iter().take(n / 2).enumerate() {
        let f = k as f64 / (n as f64 * dt);
        // Each sample holds for dt: fold the hold envelope in so the bin is
        // the exact transform of the sampled-and-held waveform.
        let hold = Complex64::from_polar(dt * sinc(f * dt), -std::f64::consts::PI * f * dt);
        freqs.push(f);
        values.push(bin * hold);
    }
    (freqs, values)
}

#[test]
fn acceptance_2_analytic_vs_fft_spectrum() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce55);
    let quarter = 0.25; // 1/(4 T_clk) with T_clk = 1
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let bits: Vec<i8> = (0..64).map(|_| rng.random_range(-1..=1)).collect();
        let pattern = TafPattern::new(bits, 1.0).unwrap();
        let (freqs, fft_values) = oversampled_fft(&pattern, 64, 4);
        let below: Vec<f64> = freqs.iter().copied().take_while(|&f| f < quarter).collect();
        let analytic = ct_response_spectrum(&pattern_to_ct(&pattern, 1.0), &below);
        for (i, _) in below.iter().enumerate() {
            let mag = analytic.values[i].norm();
            if mag == 0.0 {
                continue;
            }
            let rel = (fft_values[i] - analytic.values[i]).norm() / mag;
            worst = worst.max(rel);
            assert!(
                rel < 1e-6,
                "bin {i} ({} Hz): relative error {rel}",
                below[i]
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "criterion 2 (analytic vs FFT, 100 patterns, <1e-6 rel, <30s): PASS \
         (worst {worst:.3e}, {elapsed:?})"
    );
}

// ---------------------------------------------------------------------------
// 3. Tuner monotonicity and small-scale optimality
// ---------------------------------------------------------------------------

struct SmallFixture {
    name: &'static str,
    initial: TafPattern,
    cfg: TuneConfig,
    single_pulse: bool,
}

fn full_band_cfg(target_coeffs: &[f64], grid_points: usize) -> TuneConfig {
    let loss = LossSpec::FullBand {
        b: 0.5,
        grid_points,
    };
    let h = taf::filter::ImpulseResponse {
        coeffs: target_coeffs.to_vec(),
        tap_interval: 1.0,
    };
    let target = fir_spectrum(&h, &loss.grid());
    TuneConfig::new(loss).with_target(target)
}

fn quantized_from(coeffs: &[f64], g: usize) -> TafPattern {
    let h = taf::filter::ImpulseResponse {
        coeffs: coeffs.to_vec(),
        tap_interval: 1.0,
    };
    quantize(&approximate(&zoh_interpolate(&h), 1.0).unwrap(), 1.0 / g as f64)
        .unwrap()
        .pattern
}

#[test]
fn acceptance_3_tuner_monotone_and_exhaustive_optimality() {
    let start = Instant::now();
    let fixtures = vec![
        SmallFixture {
            name: "single pulse, narrow start",
            initial: TafPattern::new(vec![0, 0, 1, 1, 1, 1, 0, 0], 0.125).unwrap(),
            cfg: full_band_cfg(&[1.0], 512),
            single_pulse: true,
        },
        SmallFixture {
            name: "single pulse, already optimal",
            initial: quantized_from(&[1.0], 8),
            cfg: full_band_cfg(&[1.0], 512),
            single_pulse: true,
        },
        SmallFixture {
            name: "two taps 1.0/0.6",
            initial: quantized_from(&[1.0, 0.6], 4),
            cfg: full_band_cfg(&[1.0, 0.6], 512),
            single_pulse: false,
        },
        SmallFixture {
            name: "two taps signed 1.0/-0.5",
            initial: quantized_from(&[1.0, -0.5], 4),
            cfg: full_band_cfg(&[1.0, -0.5], 512),
            single_pulse: false,
        },
    ];

    let eval = IdealEvaluator { amplitude: 1.0 };
    for fixture in &fixtures {
        let (_, report) = fine_tune(&fixture.initial, &fixture.cfg, &eval).unwrap();
        for w in report.loss_trace.windows(2) {
            assert!(w[1] < w[0], "{}: trace not strictly decreasing", fixture.name);
        }
        assert!(report.final_loss <= report.initial_loss);

        // Exhaustive oracle over all 3^8 sign-slot configurations.
        let clk = fixture.initial.clock_period();
        let slots = fixture.initial.len();
        assert_eq!(slots, 8, "exhaustive fixtures are 8 slots");
        let mut best = f64::INFINITY;
        let mut bits = vec![0i8; slots];
        for code in 0..3usize.pow(8) {
            let mut c = code;
            for b in bits.iter_mut() {
                *b = (c % 3) as i8 - 1;
                c /= 3;
            }
            let p = TafPattern::new(bits.clone(), clk).unwrap();
            let loss = evaluate_candidate(&p, &fixture.cfg, &eval).unwrap();
            if loss < best {
                best = loss;
            }
        }
        let gap = report.final_loss - best;
        assert!(
            gap >= -1e-12,
            "{}: descent beat exhaustive optimum (gap {gap})",
            fixture.name
        );
        if fixture.single_pulse {
            assert!(
                gap.abs() <= 1e-12,
                "{}: single-pulse gap must be zero, got {gap}",
                fixture.name
            );
        }
        println!(
            "  fixture '{}': final {:.6}, optimum {:.6}, gap {:.2e}",
            fixture.name, report.final_loss, best, gap
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!("criterion 3 (monotonicity + exhaustive optimality, <60s): PASS ({elapsed:?})");
}

// ---------------------------------------------------------------------------
// 4. Fine tuning strictly improves on the knowledge-based initial point
// ---------------------------------------------------------------------------

#[test]
fn acceptance_4_hybrid_improvement() {
    // (a) 8-tap lowpass, grid factor 8, full-band loss.
    let spec = lowpass_spec(8, 8, vec![0.05, 0.25]);
    let h = design_fir(&spec).unwrap();
    let initial = quantize(&approximate(&zoh_interpolate(&h), 1.0).unwrap(), spec.clock_period)
        .unwrap()
        .pattern;
    let loss = spec.loss_spec().unwrap();
    let mut cfg = TuneConfig::new(loss);
    cfg.target = Some(fir_spectrum(&h, &cfg.loss.grid()));
    let eval = IdealEvaluator { amplitude: 1.0 };
    let (_, report) = fine_tune(&initial, &cfg, &eval).unwrap();
    assert!(
        report.final_loss < report.initial_loss,
        "full-band tuning did not strictly improve: {} -> {}",
        report.initial_loss,
        report.final_loss
    );
    println!(
        "  full-band fixture: loss {:.6} -> {:.6} ({:.2}x)",
        report.initial_loss,
        report.final_loss,
        report.initial_loss / report.final_loss
    );

    // (b) 4-tap fixture under the band-notch loss: the suppressed band's mean
    // magnitude must deepen by at least 3 dB.
    let (b1, f0, b2) = (0.06, 0.35, 0.1);
    let notch_spec = FilterSpec {
        mode: FilterMode::BandpassTarget,
        num_taps: 4,
        tap_interval: 1.0,
        clock_period: 0.125,
        band_edges: vec![b1, f0, b2],
        loss: LossKindSelector::BandNotch,
        loss_grid_points: Some(1024),
        min_stopband_atten_db: None,
    };
    let h = design_fir(&notch_spec).unwrap();
    let initial = quantize(
        &approximate(&zoh_interpolate(&h), 1.0).unwrap(),
        notch_spec.clock_period,
    )
    .unwrap()
    .pattern;
    let mut cfg = TuneConfig::new(notch_spec.loss_spec().unwrap());
    cfg.max_sweeps = 60;
    let (tuned, report) = fine_tune(&initial, &cfg, &eval).unwrap();
    assert!(report.final_loss < report.initial_loss);

    let grid = cfg.loss.grid();
    let notch_mean = |p: &TafPattern| -> f64 {
        let s = ct_response_spectrum(&pattern_to_ct(p, 1.0), &grid).dc_normalized();
        let mags = s.magnitudes();
        integrate_band(&s.freqs, &mags, f0, f0 + b2).unwrap() / b2
    };
    let before = notch_mean(&initial);
    let after = notch_mean(&tuned);
    let deepened_db = 20.0 * (before / after).log10();
    assert!(
        deepened_db >= 3.0,
        "notch deepened only {deepened_db:.2} dB (need >= 3 dB)"
    );
    println!(
        "  band-notch fixture: loss {:.4} -> {:.4}, notch mean deepened {deepened_db:.2} dB",
        report.initial_loss, report.final_loss
    );
    println!("criterion 4 (tuning beats knowledge-based start, notch >= 3 dB): PASS");
}

// ---------------------------------------------------------------------------
// 5. Hardware simulator exactness
// ---------------------------------------------------------------------------

#[test]
fn acceptance_5_hardware_simulator_exactness() {
    let start = Instant::now();
    let hw = HwConfig::embodiment(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let bits: Vec<i8> = (0..64).map(|_| rng.random_range(-1..=1)).collect();
    let pattern = TafPattern::new(bits, 1.0).unwrap();

    // Serializer stream index identity over three full cycles.
    let stream = serialize_pattern(pattern.bits(), &hw, 1 + 3 * 64).unwrap();
    for (k, &s) in stream.iter().enumerate().skip(1) {
        assert_eq!(s, pattern.bits()[(k - 1) % 64], "serializer slot {k}");
    }

    // Time-interleaved reconstruction equals the full simulation bit for bit.
    let input: Vec<f64> = (0..24).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut fast_hw = hw.clone();
    fast_hw.oversample = 2;
    let full = simulate_filter(&input, &pattern, &fast_hw).unwrap();
    let mut acc = vec![0.0f64; full.samples.len()];
    for c in 0..fast_hw.num_channels {
        let partial = simulate_channel(&input, &pattern, &fast_hw, c).unwrap();
        for (k, &v) in partial.samples.iter().enumerate() {
            acc[k] += v;
        }
    }
    assert_eq!(acc, full.samples, "TI reconstruction not bit-exact");

    // One-hot ring counter covers every slot.
    let phases = ring_counter_phases(&hw, 64);
    for k in 0..64 {
        assert_eq!(phases.iter().filter(|p| p[k]).count(), 1);
    }

    // Chopped constant input peaks at the configured chop bin.
    let mut chop_hw = hw.clone();
    chop_hw.mode = HwMode::Bandpass;
    chop_hw.chop_divisor = 4;
    let chopped = chop(&vec![1i8; 1024], &chop_hw);
    let trace = TransientTrace {
        sample_period: chop_hw.clock_period,
        samples: chopped.iter().map(|&b| b as f64).collect(),
    };
    let spectrum = trace_spectrum(&trace).unwrap();
    let peak = peak_bin(&spectrum);
    assert_eq!(peak, 1024 / 8, "chop fundamental at the wrong bin");
    assert!(
        (spectrum.freqs[peak] - chop_hw.chop_freq()).abs() < 1e-12,
        "peak bin frequency mismatch"
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!("criterion 5 (serializer/TI/chop exactness, <10s): PASS ({elapsed:?})");
}

// ---------------------------------------------------------------------------
// 6. Surrogate gradient check at the production architecture
// ---------------------------------------------------------------------------

#[test]
fn acceptance_6_gradient_check() {
    let start = Instant::now();
    let model = MlpModel::new_seeded(&[10, 128, 256, 128, 2], 66).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(67);
    let xs: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..10).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let ys: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..2).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let (_, grads) = model.batch_loss_and_gradients(&xs, &ys);

    let h = 1e-6;
    for l in 0..model.weights.len() {
        for _ in 0..10 {
            let k = rng.random_range(0..model.weights[l].len());
            let mut plus = model.clone();
            plus.weights[l][k] += h;
            let mut minus = model.clone();
            minus.weights[l][k] -= h;
            let numeric = (plus.batch_loss(&xs, &ys) - minus.batch_loss(&xs, &ys)) / (2.0 * h);
            let analytic = grads.weights[l][k];
            let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-8);
            assert!(
                rel < 1e-5,
                "layer {l} weight {k}: backprop {analytic} vs central diff {numeric} (rel {rel})"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("criterion 6 (backprop vs finite differences, <5s): PASS ({elapsed:?})");
}

// ---------------------------------------------------------------------------
// 7. Linear-transfer-learning sample efficiency
// ---------------------------------------------------------------------------

#[test]
fn acceptance_7_transfer_learning_sample_efficiency() {
    let start = Instant::now();

    // One schematic core, reused for both sub-checks (the schematic map does
    // not depend on the post-layout transform).
    let core_cfg = TrainConfig {
        hidden_dims: vec![32, 64, 32],
        learning_rate: 0.1,
        momentum: 0.9,
        epochs: 900,
        seed: 7,
        train_frac: 0.9,
        early_stop_patience: Some(150),
    };
    let layout_eval = SynthEval::default(); // affine + bounded perturbation
    let schematic_data = sample_dataset(1500, EvalVariant::Schematic, 7, &layout_eval).unwrap();
    let (core, core_report) = train_mlp(&schematic_data, &core_cfg).unwrap();
    println!(
        "  core: test rel err {:.4}",
        core_report.test_rel_err.unwrap()
    );

    // Shared fresh layout test set.
    let layout_test = sample_dataset(1000, EvalVariant::Postlayout, 777, &layout_eval).unwrap();

    // (a) 200 layout samples, 5 seeds: transfer beats from-scratch 5/5.
    let mut wins = 0;
    for seed in 0..5u64 {
        let layout_train =
            sample_dataset(200, EvalVariant::Postlayout, 1000 + seed, &layout_eval).unwrap();
        let transfer_cfg = TrainConfig {
            hidden_dims: vec![],
            learning_rate: 0.1,
            momentum: 0.9,
            epochs: 1500,
            seed,
            train_frac: 0.9,
            early_stop_patience: Some(200),
        };
        let (transfer_model, _) = transfer_train(&core, &layout_train, &transfer_cfg).unwrap();
        let scratch_cfg = TrainConfig {
            hidden_dims: vec![32, 64, 32],
            learning_rate: 0.1,
            momentum: 0.9,
            epochs: 900,
            seed,
            train_frac: 0.9,
            early_stop_patience: Some(150),
        };
        let (scratch_model, _) = train_mlp(&layout_train, &scratch_cfg).unwrap();

        let transfer_err = mean_relative_error_of(
            |x| transfer_model.predict(x),
            &layout_test.inputs,
            &layout_test.targets,
        );
        let scratch_err = mean_relative_error_of(
            |x| scratch_model.predict(x),
            &layout_test.inputs,
            &layout_test.targets,
        );
        println!(
            "  seed {seed}: transfer {transfer_err:.4} vs from-scratch {scratch_err:.4}"
        );
        if transfer_err < scratch_err {
            wins += 1;
        }
    }
    assert_eq!(wins, 5, "transfer must beat from-scratch on all 5 seeds");

    // (b) Exact-affine configuration: <1% relative error from 100 samples.
    let affine_eval = SynthEval::with_postlayout(PostlayoutTransform::exact_affine());
    let affine_train = sample_dataset(100, EvalVariant::Postlayout, 4242, &affine_eval).unwrap();
    let affine_test = sample_dataset(1000, EvalVariant::Postlayout, 4343, &affine_eval).unwrap();
    let transfer_cfg = TrainConfig {
        hidden_dims: vec![],
        learning_rate: 0.1,
        momentum: 0.9,
        epochs: 3000,
        seed: 2,
        train_frac: 0.9,
        early_stop_patience: None,
    };
    let (affine_model, _) = transfer_train(&core, &affine_train, &transfer_cfg).unwrap();
    let affine_err = mean_relative_error_of(
        |x| affine_model.predict(x),
        &affine_test.inputs,
        &affine_test.targets,
    );
    assert!(
        affine_err < 0.01,
        "exact-affine transfer error {affine_err} (need < 1%)"
    );
    println!("  exact-affine transfer on 100 samples: rel err {affine_err:.4}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!("criterion 7 (transfer sample efficiency 5/5 + <1% exact-affine, <5min): PASS ({elapsed:?})");
}

// ---------------------------------------------------------------------------
// 8. Search throughput with feasibility by construction
// ---------------------------------------------------------------------------

#[test]
fn acceptance_8_search_throughput() {
    // Model quality is not the point here; a compact core keeps setup fast.
    let eval = SynthEval::default();
    let data = sample_dataset(800, EvalVariant::Schematic, 88, &eval).unwrap();
    let cfg = TrainConfig {
        hidden_dims: vec![24, 24],
        learning_rate: 0.1,
        momentum: 0.9,
        epochs: 400,
        seed: 88,
        train_frac: 0.9,
        early_stop_patience: Some(80),
    };
    let (model, _) = train_mlp(&data, &cfg).unwrap();

    // 10 spec sets, each feasible by construction: take the model's own
    // prediction at a sampled point and relax it slightly.
    let mut rng = ChaCha8Rng::seed_from_u64(89);
    let mut targets = Vec::new();
    for _ in 0..10 {
        let mut p = [0.0f64; 10];
        for (i, v) in p.iter_mut().enumerate() {
            let (lo, hi) = eval.ranges.0[i];
            *v = rng.random_range(lo..=hi);
        }
        let pred = model.predict_metrics(&p);
        targets.push(TargetSpec {
            max_power_mw: pred[0] + 0.2,
            min_sfdr_db: pred[1] - 0.5,
        });
    }

    let start = Instant::now();
    for (i, target) in targets.iter().enumerate() {
        let cfg = SearchConfig {
            target: *target,
            num_restarts: 64,
            max_iters: 200,
            learning_rate: 1.0,
            rng_seed: 90 + i as u64,
            param_ranges: eval.ranges,
        };
        let outcome = search_params(&model, &cfg).unwrap();
        assert!(
            outcome.feasible,
            "spec set {i} ({target:?}) found no satisfying candidate"
        );
        assert_eq!(outcome.candidates.len(), 64);
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "10 spec sets x 64 restarts took {elapsed:?}"
    );
    println!("criterion 8 (10 spec sets x 64 restarts, all feasible, <60s): PASS ({elapsed:?})");
}

// ---------------------------------------------------------------------------
// 9. End-to-end determinism (byte-identical replay)
// ---------------------------------------------------------------------------

#[test]
fn acceptance_9_end_to_end_determinism() {
    use std::process::Command;

    let bin = env!("CARGO_BIN_EXE_taf");
    let root = tempfile::tempdir().unwrap();
    let spec_path = root.path().join("spec.json");
    std::fs::write(
        &spec_path,
        r#"{
  "mode": "lowpass",
  "num_taps": 8,
  "tap_interval_s": 1.0,
  "clock_period_s": 0.125,
  "band_edges_hz": [0.05, 0.25],
  "loss": "full_band",
  "loss_grid_points": 512
}"#,
    )
    .unwrap();
    let hw_path = root.path().join("hw.json");
    std::fs::write(
        &hw_path,
        r#"{"num_channels": 8, "pattern_len": 64, "clock_period_s": 0.125,
            "mode": "bandpass", "chop_divisor": 4, "oversample": 2}"#,
    )
    .unwrap();
    let stim_path = root.path().join("stim.json");
    std::fs::write(
        &stim_path,
        r#"{"kind": "qam", "order": 16, "num_symbols": 16, "samples_per_symbol": 2, "seed": 5}"#,
    )
    .unwrap();
    let train_path = root.path().join("train.json");
    std::fs::write(
        &train_path,
        r#"{"hidden_dims": [8], "learning_rate": 0.05, "momentum": 0.9,
            "epochs": 60, "train_frac": 0.9, "early_stop_patience": null}"#,
    )
    .unwrap();
    let search_path = root.path().join("search.json");
    std::fs::write(
        &search_path,
        r#"{"targets": [{"max_power_mw": 9.0, "min_sfdr_db": 40.0},
                        {"max_power_mw": 8.0, "min_sfdr_db": 45.0}],
            "num_restarts": 8, "max_iters": 50, "learning_rate": 1.0, "rng_seed": 3}"#,
    )
    .unwrap();

    let run_pipeline = |out_root: &std::path::Path| {
        let run = |args: &[&str]| {
            let output = Command::new(bin).args(args).output().unwrap();
            assert!(
                output.status.success(),
                "command {args:?} failed: {}",
                String::from_utf8_lossy(&output.stderr)
            );
        };
        let d = out_root.join("design");
        let t = out_root.join("tune");
        let s = out_root.join("sim");
        let m = out_root.join("model");
        run(&[
            "design",
            "--spec",
            spec_path.to_str().unwrap(),
            "--out",
            d.to_str().unwrap(),
            "--seed",
            "1",
        ]);
        run(&[
            "tune",
            "--pattern",
            d.join("pattern.taf").to_str().unwrap(),
            "--spec",
            spec_path.to_str().unwrap(),
            "--out",
            t.to_str().unwrap(),
            "--seed",
            "2",
        ]);
        run(&[
            "simulate",
            "--pattern",
            t.join("tuned.taf").to_str().unwrap(),
            "--config",
            hw_path.to_str().unwrap(),
            "--stimulus",
            stim_path.to_str().unwrap(),
            "--out",
            s.to_str().unwrap(),
        ]);
        run(&[
            "surrogate",
            "sample",
            "--n",
            "150",
            "--seed",
            "4",
            "--variant",
            "schematic",
            "--out",
            m.to_str().unwrap(),
        ]);
        run(&[
            "surrogate",
            "train",
            "--data",
            m.join("dataset.csv").to_str().unwrap(),
            "--config",
            train_path.to_str().unwrap(),
            "--seed",
            "4",
            "--out",
            m.to_str().unwrap(),
        ]);
        run(&[
            "surrogate",
            "search",
            "--model",
            m.join("model.txt").to_str().unwrap(),
            "--config",
            search_path.to_str().unwrap(),
            "--out",
            m.to_str().unwrap(),
        ]);
    };

    let run_a = root.path().join("a");
    let run_b = root.path().join("b");
    run_pipeline(&run_a);
    run_pipeline(&run_b);

    let mut compared = 0;
    for rel in [
        "design/fir.json",
        "design/pattern.taf",
        "design/initial_spectrum.csv",
        "tune/tuned.taf",
        "tune/tune_report.json",
        "tune/loss_trace.csv",
        "sim/trace.csv",
        "sim/spectrum.csv",
        "model/dataset.csv",
        "model/model.txt",
        "model/train_report.json",
        "model/search_results.json",
    ] {
        let a = std::fs::read(run_a.join(rel)).unwrap();
        let b = std::fs::read(run_b.join(rel)).unwrap();
        assert_eq!(a, b, "{rel} differs between replays");
        compared += 1;
    }
    assert_eq!(compared, 12);
    println!("criterion 9 (byte-identical replay of the full pipeline, 12 files): PASS");
}
