//! Command-line pipeline: `design` (spec to quantized pattern), `tune`
//! (coordinate-descent refinement), `simulate` (behavioral hardware run on a
//! stimulus), and `surrogate sample|train|transfer|search` (circuit sizing).
//!
//! Every command is deterministic given its configuration and seed; every
//! output file carries the tool version, a configuration hash, and the seed.
//! Exit codes: 0 success, 1 infeasible result, 2 configuration/schema error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{design_fir, zoh_interpolate, FilterSpec, LossKindSelector};
use crate::pattern::{approximate, pattern_to_ct, quantize, PatternFile, PatternHeader};
use crate::provenance::Provenance;
use crate::sim::stimulus::StimulusSpec;
use crate::sim::synth::{EvalVariant, ParamRanges, PostlayoutTransform, SynthEval};
use crate::sim::{simulate_filter, trace_spectrum, BehavioralEvaluator, HwConfig, HwMode};
use crate::spectral::{ct_response_spectrum, fir_spectrum, LossSpec};
use crate::surrogate::mlp::{train_mlp, MlpModel, TrainConfig, TrainReport};
use crate::surrogate::search::{search_params, Regressor, SearchOutcome, TargetSpec};
use crate::surrogate::transfer::{transfer_train, TransferModel};
use crate::surrogate::{sample_dataset, Dataset};
use crate::tuner::{evaluate_candidate, fine_tune, IdealEvaluator, SpectrumEvaluator, TuneConfig, TuneMove, TuneReport};

#[derive(Parser)]
#[command(
    name = "taf",
    version,
    about = "Time-approximation FIR filter synthesis, tuning, simulation and sizing"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design the FIR prototype and emit the quantized pattern.
    Design {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fine-tune a pattern by coordinate descent against a spectral loss.
    Tune {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        /// Tuning parameters (JSON); defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = EvaluatorKind::Ideal)]
        evaluator: EvaluatorKind,
        /// Override the loss selected in the filter spec.
        #[arg(long, value_enum)]
        loss: Option<LossArg>,
        /// Hardware config for the behavioral evaluator.
        #[arg(long)]
        hw: Option<PathBuf>,
        /// Overrides the tuner's shuffle seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the behavioral hardware simulation on a stimulus.
    Simulate {
        #[arg(long)]
        pattern: PathBuf,
        /// Hardware configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        stimulus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the stimulus seed (QAM streams).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Surrogate modeling and parameter search.
    Surrogate {
        #[command(subcommand)]
        cmd: SurrogateCmd,
    },
}

#[derive(Subcommand)]
enum SurrogateCmd {
    /// Sample labeled (parameters, metrics) pairs from the circuit evaluator.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = VariantArg::Schematic)]
        variant: VariantArg,
        /// Evaluator configuration (JSON); defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the parameter-to-metric network on a dataset CSV.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train linear input/output wrappers on post-layout data.
    Transfer {
        #[arg(long)]
        core: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search parameters meeting target specs with multi-start descent.
    Search {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvaluatorKind {
    Ideal,
    Behavioral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LossArg {
    FullBand,
    BandNotch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Schematic,
    Postlayout,
}

impl From<VariantArg> for EvalVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Schematic => EvalVariant::Schematic,
            VariantArg::Postlayout => EvalVariant::Postlayout,
        }
    }
}

enum Outcome {
    Success,
    Infeasible,
}

/// Parses arguments from the process environment, executes, and returns the
/// process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::Infeasible) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Infeasible { .. } => 1,
                _ => 2,
            }
        }
    }
}

fn execute(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Design { spec, out, seed } => cmd_design(&spec, &out, seed),
        Command::Tune {
            pattern,
            spec,
            config,
            out,
            evaluator,
            loss,
            hw,
            seed,
        } => cmd_tune(
            &pattern,
            &spec,
            config.as_deref(),
            &out,
            evaluator,
            loss,
            hw.as_deref(),
            seed,
        ),
        Command::Simulate {
            pattern,
            config,
            stimulus,
            out,
            seed,
        } => cmd_simulate(&pattern, &config, &stimulus, &out, seed),
        Command::Surrogate { cmd } => match cmd {
            SurrogateCmd::Sample {
                n,
                seed,
                variant,
                config,
                out,
            } => cmd_surrogate_sample(n, seed, variant, config.as_deref(), &out),
            SurrogateCmd::Train {
                data,
                config,
                seed,
                out,
            } => cmd_surrogate_train(&data, config.as_deref(), seed, &out),
            SurrogateCmd::Transfer {
                core,
                data,
                config,
                seed,
                out,
            } => cmd_surrogate_transfer(&core, &data, config.as_deref(), seed, &out),
            SurrogateCmd::Search {
                model,
                config,
                seed,
                out,
            } => cmd_surrogate_search(&model, &config, seed, &out),
        },
    }
}

// ---------------------------------------------------------------------------
// design
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct FirFile<'a> {
    coeffs: &'a [f64],
    tap_interval_s: f64,
    /// Smallest nonzero pulse width as a fraction of the tap interval.
    a_min: Option<f64>,
    /// Taps whose pulse collapsed to zero width during quantization.
    collapsed_taps: Vec<usize>,
    provenance: Provenance,
}

fn cmd_design(spec_path: &Path, out: &Path, seed: u64) -> Result<Outcome> {
    let spec_bytes = fs::read(spec_path)?;
    let spec: FilterSpec = serde_json::from_slice(&spec_bytes)?;
    spec.validate()?;
    let provenance = Provenance::new(&[&spec_bytes], seed);
    fs::create_dir_all(out)?;

    let h = design_fir(&spec)?;
    let train = approximate(&zoh_interpolate(&h), 1.0)?;
    let quantized = quantize(&train, spec.clock_period)?;

    let fir = FirFile {
        coeffs: &h.coeffs,
        tap_interval_s: h.tap_interval,
        a_min: train.min_width_fraction(),
        collapsed_taps: quantized.collapsed_taps.clone(),
        provenance: provenance.clone(),
    };
    write_json(&out.join("fir.json"), &fir)?;

    let pattern_file = PatternFile {
        header: PatternHeader {
            clock_period_s: spec.clock_period,
            amplitude: 1.0,
            num_taps: spec.num_taps,
            grid_factor: spec.grid_factor(),
            provenance: Some(provenance.clone()),
        },
        pattern: quantized.pattern.clone(),
    };
    pattern_file.write(&out.join("pattern.taf"))?;

    let loss = spec.loss_spec()?;
    let grid = loss.grid();
    let spectrum = ct_response_spectrum(&pattern_to_ct(&quantized.pattern, 1.0), &grid);
    write_spectrum_csv(&out.join("initial_spectrum.csv"), &spectrum, &provenance)?;

    if !quantized.collapsed_taps.is_empty() {
        eprintln!(
            "warning: taps collapsed to zero width during quantization: {:?}",
            quantized.collapsed_taps
        );
    }
    Ok(Outcome::Success)
}

// ---------------------------------------------------------------------------
// tune
// ---------------------------------------------------------------------------

/// Tuner options file (all fields optional).
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
struct TuneFileConfig {
    #[serde(default)]
    max_sweeps: Option<usize>,
    #[serde(default)]
    move_set: Option<Vec<TuneMove>>,
    #[serde(default)]
    step: Option<usize>,
    #[serde(default)]
    rng_seed: Option<u64>,
    #[serde(default)]
    shuffle_sweeps: Option<bool>,
    #[serde(default)]
    bounded_mode: Option<bool>,
}

#[derive(Serialize)]
struct TuneReportFile {
    #[serde(flatten)]
    report: TuneReport,
    evaluator: String,
    provenance: Provenance,
}

#[allow(clippy::too_many_arguments)]
fn cmd_tune(
    pattern_path: &Path,
    spec_path: &Path,
    config_path: Option<&Path>,
    out: &Path,
    evaluator: EvaluatorKind,
    loss_override: Option<LossArg>,
    hw_path: Option<&Path>,
    seed: Option<u64>,
) -> Result<Outcome> {
    let pattern_bytes = fs::read(pattern_path)?;
    let spec_bytes = fs::read(spec_path)?;
    let config_bytes = match config_path {
        Some(p) => fs::read(p)?,
        None => Vec::new(),
    };
    let hw_bytes = match hw_path {
        Some(p) => fs::read(p)?,
        None => Vec::new(),
    };

    let pattern_file = PatternFile::parse(std::str::from_utf8(&pattern_bytes).map_err(|_| {
        Error::Parse("pattern file is not valid UTF-8".into())
    })?)?;
    let mut spec: FilterSpec = serde_json::from_slice(&spec_bytes)?;
    spec.validate()?;
    if let Some(l) = loss_override {
        spec.loss = match l {
            LossArg::FullBand => LossKindSelector::FullBand,
            LossArg::BandNotch => LossKindSelector::BandNotch,
        };
    }
    let file_cfg: TuneFileConfig = if config_bytes.is_empty() {
        TuneFileConfig::default()
    } else {
        serde_json::from_slice(&config_bytes)?
    };

    let loss = spec.loss_spec()?;
    let mut cfg = TuneConfig::new(loss);
    if loss_needs_target(&cfg.loss) {
        let h = design_fir(&spec)?;
        cfg.target = Some(fir_spectrum(&h, &cfg.loss.grid()));
    }
    if let Some(v) = file_cfg.max_sweeps {
        cfg.max_sweeps = v;
    }
    if let Some(v) = file_cfg.move_set.clone() {
        cfg.move_set = v;
    }
    if let Some(v) = file_cfg.step {
        cfg.step = v;
    }
    cfg.rng_seed = seed.or(file_cfg.rng_seed).unwrap_or(0);
    cfg.shuffle_sweeps = file_cfg.shuffle_sweeps.unwrap_or(false);
    cfg.bounded_mode = file_cfg.bounded_mode.unwrap_or(false);
    if cfg.bounded_mode {
        cfg.tap_window_slots = Some(pattern_file.header.grid_factor);
    }

    let provenance = Provenance::new(
        &[&pattern_bytes, &spec_bytes, &config_bytes, &hw_bytes],
        cfg.rng_seed,
    );
    fs::create_dir_all(out)?;

    let amplitude = pattern_file.header.amplitude;
    let (tuned, report, evaluator_name) = match evaluator {
        EvaluatorKind::Ideal => {
            let eval = IdealEvaluator { amplitude };
            let (tuned, report) = fine_tune(&pattern_file.pattern, &cfg, &eval)?;
            (tuned, report, "ideal")
        }
        EvaluatorKind::Behavioral => {
            let hw = match hw_path {
                Some(_) => serde_json::from_slice::<HwConfig>(&hw_bytes)?,
                None => HwConfig {
                    num_channels: pattern_file.header.num_taps,
                    pattern_len: pattern_file.pattern.len(),
                    clock_period: pattern_file.header.clock_period_s,
                    mode: HwMode::Lowpass,
                    chop_divisor: 4,
                    dac_settling_tau: 0.0,
                    dac_inl_coeffs: Vec::new(),
                    oversample: 16,
                },
            };
            hw.validate()?;
            let eval = BehavioralEvaluator { hw, amplitude };
            let (tuned, report) = fine_tune(&pattern_file.pattern, &cfg, &eval)?;
            (tuned, report, "behavioral")
        }
    };

    let tuned_file = PatternFile {
        header: PatternHeader {
            provenance: Some(provenance.clone()),
            ..pattern_file.header.clone()
        },
        pattern: tuned,
    };
    tuned_file.write(&out.join("tuned.taf"))?;

    write_json(
        &out.join("tune_report.json"),
        &TuneReportFile {
            report: report.clone(),
            evaluator: evaluator_name.to_string(),
            provenance: provenance.clone(),
        },
    )?;

    let mut csv = provenance.csv_comment();
    csv.push_str("accepted_move,loss\n");
    for (i, l) in report.loss_trace.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", i + 1, l));
    }
    fs::write(out.join("loss_trace.csv"), csv)?;
    Ok(Outcome::Success)
}

fn loss_needs_target(loss: &LossSpec) -> bool {
    loss.needs_target()
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn cmd_simulate(
    pattern_path: &Path,
    hw_path: &Path,
    stimulus_path: &Path,
    out: &Path,
    seed: Option<u64>,
) -> Result<Outcome> {
    let pattern_bytes = fs::read(pattern_path)?;
    let hw_bytes = fs::read(hw_path)?;
    let stim_bytes = fs::read(stimulus_path)?;

    let pattern_file = PatternFile::parse(std::str::from_utf8(&pattern_bytes).map_err(|_| {
        Error::Parse("pattern file is not valid UTF-8".into())
    })?)?;
    let hw: HwConfig = serde_json::from_slice(&hw_bytes)?;
    hw.validate()?;
    let mut stim: StimulusSpec = serde_json::from_slice(&stim_bytes)?;
    if let (Some(s), StimulusSpec::Qam { seed, .. }) = (seed, &mut stim) {
        *seed = s;
    }

    let provenance = Provenance::new(
        &[&pattern_bytes, &hw_bytes, &stim_bytes],
        seed.unwrap_or(0),
    );
    fs::create_dir_all(out)?;

    let input = stim.generate(hw.input_period())?;
    let trace = simulate_filter(&input, &pattern_file.pattern, &hw)?;

    let mut csv = provenance.csv_comment().into_bytes();
    trace.write_csv(&mut csv)?;
    fs::write(out.join("trace.csv"), csv)?;

    if !trace.samples.is_empty() {
        let spectrum = trace_spectrum(&trace)?;
        write_spectrum_csv(&out.join("spectrum.csv"), &spectrum, &provenance)?;
    }
    Ok(Outcome::Success)
}

// ---------------------------------------------------------------------------
// surrogate
// ---------------------------------------------------------------------------

/// Synthetic evaluator options file.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SynthFileConfig {
    #[serde(default)]
    ranges: Option<ParamRanges>,
    #[serde(default)]
    postlayout: Option<PostlayoutTransform>,
}

fn load_synth_eval(config_path: Option<&Path>) -> Result<(SynthEval, Vec<u8>)> {
    let bytes = match config_path {
        Some(p) => fs::read(p)?,
        None => Vec::new(),
    };
    let mut eval = SynthEval::default();
    if !bytes.is_empty() {
        let cfg: SynthFileConfig = serde_json::from_slice(&bytes)?;
        if let Some(r) = cfg.ranges {
            eval.ranges = r;
        }
        if let Some(t) = cfg.postlayout {
            eval.postlayout = t;
        }
    }
    Ok((eval, bytes))
}

fn cmd_surrogate_sample(
    n: usize,
    seed: u64,
    variant: VariantArg,
    config_path: Option<&Path>,
    out: &Path,
) -> Result<Outcome> {
    let (eval, config_bytes) = load_synth_eval(config_path)?;
    let provenance = Provenance::new(&[&config_bytes, format!("n={n}").as_bytes()], seed);
    fs::create_dir_all(out)?;
    let dataset = sample_dataset(n, variant.into(), seed, &eval)?;
    let mut csv = provenance.csv_comment().into_bytes();
    dataset.write_csv(&mut csv)?;
    fs::write(out.join("dataset.csv"), csv)?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct TrainReportFile {
    #[serde(flatten)]
    report: TrainReport,
    provenance: Provenance,
}

fn load_train_config(config_path: Option<&Path>, seed: Option<u64>) -> Result<(TrainConfig, Vec<u8>)> {
    let bytes = match config_path {
        Some(p) => fs::read(p)?,
        None => Vec::new(),
    };
    let mut cfg: TrainConfig = if bytes.is_empty() {
        TrainConfig::default()
    } else {
        serde_json::from_slice(&bytes)?
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok((cfg, bytes))
}

fn cmd_surrogate_train(
    data_path: &Path,
    config_path: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
) -> Result<Outcome> {
    let data_bytes = fs::read(data_path)?;
    let (cfg, config_bytes) = load_train_config(config_path, seed)?;
    let dataset = Dataset::parse_csv(std::str::from_utf8(&data_bytes).map_err(|_| {
        Error::Parse("dataset is not valid UTF-8".into())
    })?)?;
    let provenance = Provenance::new(&[&data_bytes, &config_bytes], cfg.seed);
    fs::create_dir_all(out)?;

    let (model, report) = train_mlp(&dataset, &cfg)?;
    model.save(&out.join("model.txt"))?;
    write_json(
        &out.join("train_report.json"),
        &TrainReportFile {
            report,
            provenance,
        },
    )?;
    Ok(Outcome::Success)
}

fn cmd_surrogate_transfer(
    core_path: &Path,
    data_path: &Path,
    config_path: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
) -> Result<Outcome> {
    let core_bytes = fs::read(core_path)?;
    let data_bytes = fs::read(data_path)?;
    let (cfg, config_bytes) = load_train_config(config_path, seed)?;
    let core = MlpModel::parse(std::str::from_utf8(&core_bytes).map_err(|_| {
        Error::Parse("core checkpoint is not valid UTF-8".into())
    })?)?;
    let dataset = Dataset::parse_csv(std::str::from_utf8(&data_bytes).map_err(|_| {
        Error::Parse("dataset is not valid UTF-8".into())
    })?)?;
    let provenance = Provenance::new(&[&core_bytes, &data_bytes, &config_bytes], cfg.seed);
    fs::create_dir_all(out)?;

    let (model, report) = transfer_train(&core, &dataset, &cfg)?;
    model.save(&out.join("transfer_model.txt"))?;
    write_json(
        &out.join("transfer_report.json"),
        &TrainReportFile {
            report,
            provenance,
        },
    )?;
    Ok(Outcome::Success)
}

/// Search options file: one or more target spec sets plus descent settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SearchFileConfig {
    targets: Vec<TargetSpec>,
    #[serde(default = "default_restarts")]
    num_restarts: usize,
    #[serde(default = "default_max_iters")]
    max_iters: usize,
    #[serde(default = "default_search_lr")]
    learning_rate: f64,
    #[serde(default)]
    rng_seed: u64,
    #[serde(default)]
    param_ranges: Option<ParamRanges>,
}

fn default_restarts() -> usize {
    64
}
fn default_max_iters() -> usize {
    200
}
fn default_search_lr() -> f64 {
    1.0
}

#[derive(Serialize)]
struct SearchResultEntry {
    target: TargetSpec,
    #[serde(flatten)]
    outcome: SearchOutcome,
}

#[derive(Serialize)]
struct SearchResultsFile {
    results: Vec<SearchResultEntry>,
    provenance: Provenance,
}

fn load_regressor(path: &Path) -> Result<(Box<dyn Regressor>, Vec<u8>)> {
    let bytes = fs::read(path)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| Error::Parse("model checkpoint is not valid UTF-8".into()))?;
    let model: Box<dyn Regressor> = if text.starts_with("taf-transfer") {
        Box::new(TransferModel::parse(text)?)
    } else {
        Box::new(MlpModel::parse(text)?)
    };
    Ok((model, bytes))
}

fn cmd_surrogate_search(
    model_path: &Path,
    config_path: &Path,
    seed: Option<u64>,
    out: &Path,
) -> Result<Outcome> {
    let (model, model_bytes) = load_regressor(model_path)?;
    let config_bytes = fs::read(config_path)?;
    let mut file_cfg: SearchFileConfig = serde_json::from_slice(&config_bytes)?;
    if let Some(s) = seed {
        file_cfg.rng_seed = s;
    }
    if file_cfg.targets.is_empty() {
        return Err(Error::InvalidSpec("search config has no targets".into()));
    }
    let provenance = Provenance::new(&[&model_bytes, &config_bytes], file_cfg.rng_seed);
    fs::create_dir_all(out)?;

    let started = std::time::Instant::now();
    let mut results = Vec::new();
    let mut all_feasible = true;
    for target in &file_cfg.targets {
        let cfg = crate::surrogate::search::SearchConfig {
            target: *target,
            num_restarts: file_cfg.num_restarts,
            max_iters: file_cfg.max_iters,
            learning_rate: file_cfg.learning_rate,
            rng_seed: file_cfg.rng_seed,
            param_ranges: file_cfg.param_ranges.unwrap_or_default(),
        };
        let outcome = search_params(model.as_ref(), &cfg)?;
        all_feasible &= outcome.feasible;
        results.push(SearchResultEntry {
            target: *target,
            outcome,
        });
    }
    // Timing goes to stderr only: output files must replay byte-identically.
    eprintln!(
        "search: {} spec set(s) x {} restarts in {:.3} s",
        results.len(),
        file_cfg.num_restarts,
        started.elapsed().as_secs_f64()
    );

    write_json(
        &out.join("search_results.json"),
        &SearchResultsFile {
            results,
            provenance,
        },
    )?;
    Ok(if all_feasible {
        Outcome::Success
    } else {
        Outcome::Infeasible
    })
}

// ---------------------------------------------------------------------------
// shared output helpers
// ---------------------------------------------------------------------------

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_spectrum_csv(
    path: &Path,
    spectrum: &crate::spectral::Spectrum,
    provenance: &Provenance,
) -> Result<()> {
    let mut buf = provenance.csv_comment().into_bytes();
    spectrum.write_csv(&mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

// Used by integration tests to evaluate a pattern file's loss exactly as the
// tuner does.
#[doc(hidden)]
pub fn pattern_loss_for_spec(
    pattern_file: &PatternFile,
    spec: &FilterSpec,
) -> Result<f64> {
    let loss = spec.loss_spec()?;
    let mut cfg = TuneConfig::new(loss);
    if cfg.loss.needs_target() {
        let h = design_fir(spec)?;
        cfg.target = Some(fir_spectrum(&h, &cfg.loss.grid()));
    }
    let eval: Box<dyn SpectrumEvaluator> = Box::new(IdealEvaluator {
        amplitude: pattern_file.header.amplitude,
    });
    evaluate_candidate(&pattern_file.pattern, &cfg, eval.as_ref())
}
