//! The full circuit-sizing loop at desk scale: sample the schematic
//! evaluator, train the parameter-to-metric network, adapt it to post-layout
//! data with linear transfer learning, then search for spec-satisfying
//! parameters with parallel multi-start gradient descent.
//!
//! ```bash
//! cargo run --release --example surrogate_sizing
//! ```

use taf::sim::synth::{EvalVariant, SynthEval, PARAM_NAMES};
use taf::surrogate::dataset::sample_dataset;
use taf::surrogate::mlp::{mean_relative_error_of, train_mlp, TrainConfig};
use taf::surrogate::search::{search_params, Regressor, SearchConfig, TargetSpec};
use taf::surrogate::transfer::transfer_train;

fn main() {
    let eval = SynthEval::default();

    // Step 1: schematic-level model.
    println!("step 1: sampling 1500 schematic points and training the core model...");
    let schematic = sample_dataset(1500, EvalVariant::Schematic, 7, &eval).unwrap();
    let core_cfg = TrainConfig {
        hidden_dims: vec![32, 64, 32],
        learning_rate: 0.1,
        momentum: 0.9,
        epochs: 800,
        seed: 7,
        train_frac: 0.9,
        early_stop_patience: Some(120),
    };
    let (core, report) = train_mlp(&schematic, &core_cfg).unwrap();
    println!(
        "  core test relative error: {:.2}% after {} epochs",
        100.0 * report.test_rel_err.unwrap(),
        report.epochs_run
    );

    // Step 2: post-layout adaptation from few samples (frozen core, linear
    // input/output wrappers only).
    println!("\nstep 2: transfer learning on 200 post-layout samples...");
    let layout = sample_dataset(200, EvalVariant::Postlayout, 1000, &eval).unwrap();
    let transfer_cfg = TrainConfig {
        hidden_dims: vec![],
        learning_rate: 0.1,
        momentum: 0.9,
        epochs: 1500,
        seed: 1,
        train_frac: 0.9,
        early_stop_patience: Some(200),
    };
    let (layout_model, _) = transfer_train(&core, &layout, &transfer_cfg).unwrap();

    let layout_test = sample_dataset(1000, EvalVariant::Postlayout, 777, &eval).unwrap();
    let transfer_err = mean_relative_error_of(
        |x| layout_model.predict(x),
        &layout_test.inputs,
        &layout_test.targets,
    );
    let core_err = mean_relative_error_of(
        |x| core.predict(x),
        &layout_test.inputs,
        &layout_test.targets,
    );
    println!(
        "  on fresh post-layout data: core alone {:.2}%, transferred {:.2}%",
        100.0 * core_err,
        100.0 * transfer_err
    );

    // Step 3: spec-driven parameter search.
    println!("\nstep 3: searching parameters for three spec sets...");
    let targets = [
        TargetSpec { max_power_mw: 8.0, min_sfdr_db: 55.0 },
        TargetSpec { max_power_mw: 7.0, min_sfdr_db: 58.0 },
        TargetSpec { max_power_mw: 9.5, min_sfdr_db: 62.0 },
    ];
    for target in targets {
        let cfg = SearchConfig {
            target,
            num_restarts: 64,
            max_iters: 200,
            learning_rate: 1.0,
            rng_seed: 99,
            param_ranges: eval.ranges,
        };
        let started = std::time::Instant::now();
        let outcome = search_params(&layout_model, &cfg).unwrap();
        let satisfying = outcome.candidates.iter().filter(|c| c.loss == 0.0).count();
        let best = &outcome.candidates[0];
        println!(
            "  power <= {:.1} mW, sfdr >= {:.1} dB: {} ({} candidates, {:.0} ms)",
            target.max_power_mw,
            target.min_sfdr_db,
            if outcome.feasible { "feasible" } else { "infeasible" },
            satisfying,
            started.elapsed().as_secs_f64() * 1e3
        );
        println!(
            "    best prediction: {:.2} mW, {:.2} dB (spec loss {:.3})",
            best.predicted.power_mw, best.predicted.sfdr_db, best.loss
        );
        if outcome.feasible {
            print!("    parameters:");
            for (name, v) in PARAM_NAMES.iter().zip(best.params.0.iter()) {
                print!(" {name}={v:.2}");
            }
            println!();
        }
        let check = eval
            .eval(&best.params, EvalVariant::Postlayout)
            .unwrap();
        println!(
            "    evaluator check at those parameters: {:.2} mW, {:.2} dB",
            check.power_mw, check.sfdr_db
        );
    }
}
