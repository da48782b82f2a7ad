//! Coordinate-descent fine tuning of a quantized pattern.
//!
//! The quantized pattern is the initial point. Each pulse (maximal run of
//! equal-sign slots) exposes discrete coordinates: move the leading edge, the
//! trailing edge, or the whole pulse by a fixed number of grid slots. A move
//! is accepted only if it strictly decreases the selected loss, so the loss
//! trace is strictly decreasing and the walk terminates. Sweeps repeat until
//! a full sweep accepts nothing or `max_sweeps` is reached.
//!
//! Moves that would overlap another pulse, merge with an equal-sign neighbor,
//! leave the pattern, or (in bounded mode) leave the pulse's original tap
//! window are skipped, never applied.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::{pattern_to_ct, TafPattern};
use crate::spectral::{ct_response_spectrum, LossSpec, Spectrum};

/// Maps a candidate pattern to the spectrum the loss is computed on.
///
/// The ideal evaluator uses the pattern's own piecewise-constant waveform;
/// the behavioral evaluator (see the simulator module) feeds back the
/// simulated transient response of the hardware instead.
pub trait SpectrumEvaluator {
    fn spectrum(&self, pattern: &TafPattern, freqs: &[f64]) -> Result<Spectrum>;
}

/// Identity mapping: the pattern waveform itself.
#[derive(Debug, Clone, Copy)]
pub struct IdealEvaluator {
    pub amplitude: f64,
}

impl SpectrumEvaluator for IdealEvaluator {
    fn spectrum(&self, pattern: &TafPattern, freqs: &[f64]) -> Result<Spectrum> {
        Ok(ct_response_spectrum(
            &pattern_to_ct(pattern, self.amplitude),
            freqs,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuneMove {
    EdgeLeft,
    EdgeRight,
    ShiftPulse,
    /// Experimental: reassign a single slot to any other value. May create,
    /// delete, merge or split pulses; incompatible with bounded mode.
    ToggleSlot,
}

#[derive(Debug, Clone)]
pub struct TuneConfig {
    pub loss: LossSpec,
    /// Target spectrum for the full-band loss (raw or normalized; it is
    /// dc-normalized internally). Must be sampled on `loss.grid()`.
    pub target: Option<Spectrum>,
    pub max_sweeps: usize,
    pub move_set: Vec<TuneMove>,
    /// Grid slots per move.
    pub step: usize,
    /// Used only to shuffle the pulse sweep order when enabled.
    pub rng_seed: u64,
    pub shuffle_sweeps: bool,
    /// Confine every pulse to the tap window it starts in.
    pub bounded_mode: bool,
    /// Slots per tap window (the grid factor); required in bounded mode.
    pub tap_window_slots: Option<usize>,
}

impl TuneConfig {
    pub fn new(loss: LossSpec) -> Self {
        TuneConfig {
            loss,
            target: None,
            max_sweeps: 50,
            move_set: vec![TuneMove::EdgeLeft, TuneMove::EdgeRight, TuneMove::ShiftPulse],
            step: 1,
            rng_seed: 0,
            shuffle_sweeps: false,
            bounded_mode: false,
            tap_window_slots: None,
        }
    }

    pub fn with_target(mut self, target: Spectrum) -> Self {
        self.target = Some(target);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_sweeps < 1 {
            return Err(Error::InvalidSpec("max_sweeps must be >= 1".into()));
        }
        if self.step < 1 {
            return Err(Error::InvalidSpec("step must be >= 1".into()));
        }
        if self.loss.needs_target() && self.target.is_none() {
            return Err(Error::Evaluator(
                "full_band loss requires a target spectrum".into(),
            ));
        }
        if self.bounded_mode && self.tap_window_slots.is_none() {
            return Err(Error::InvalidSpec(
                "bounded_mode requires tap_window_slots (the grid factor)".into(),
            ));
        }
        if self.bounded_mode && self.move_set.contains(&TuneMove::ToggleSlot) {
            return Err(Error::InvalidSpec(
                "toggle_slot creates pulses with no original tap window; \
                 disable bounded_mode to use it"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a tuning run. `loss_trace` holds one entry per accepted move
/// and is strictly decreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub initial_loss: f64,
    pub final_loss: f64,
    pub accepted_moves: usize,
    pub sweeps_run: usize,
    pub loss_trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Run {
    start: usize,
    len: usize,
    sign: i8,
    /// Slot bounds of the original tap window (bounded mode only).
    window: Option<(usize, usize)>,
}

impl Run {
    fn end(&self) -> usize {
        self.start + self.len
    }
}

fn extract_runs(bits: &[i8], window_slots: Option<usize>) -> Vec<Run> {
    let mut runs = Vec::new();
    let mut i = 0;
    while i < bits.len() {
        if bits[i] == 0 {
            i += 1;
            continue;
        }
        let sign = bits[i];
        let start = i;
        while i < bits.len() && bits[i] == sign {
            i += 1;
        }
        let len = i - start;
        let window = window_slots.map(|g| {
            let center = start as f64 + len as f64 / 2.0;
            let w = ((center / g as f64) as usize).min(bits.len() / g - 1);
            (w * g, (w + 1) * g)
        });
        runs.push(Run {
            start,
            len,
            sign,
            window,
        });
    }
    runs
}

/// The six edge/shift coordinates in their fixed sweep order.
const PULSE_MOVES: [(TuneMove, i64); 6] = [
    (TuneMove::EdgeLeft, -1),
    (TuneMove::EdgeLeft, 1),
    (TuneMove::EdgeRight, -1),
    (TuneMove::EdgeRight, 1),
    (TuneMove::ShiftPulse, -1),
    (TuneMove::ShiftPulse, 1),
];

fn propose(run: &Run, mv: TuneMove, dir: i64, step: usize, pattern_len: usize) -> Option<Run> {
    let step = step as i64;
    let (start, len) = (run.start as i64, run.len as i64);
    let (new_start, new_len) = match (mv, dir) {
        (TuneMove::EdgeLeft, -1) => (start - step, len + step),
        (TuneMove::EdgeLeft, 1) => (start + step, len - step),
        (TuneMove::EdgeRight, -1) => (start, len - step),
        (TuneMove::EdgeRight, 1) => (start, len + step),
        (TuneMove::ShiftPulse, d) => (start + d * step, len),
        _ => return None,
    };
    if new_len < 1 || new_start < 0 || new_start + new_len > pattern_len as i64 {
        return None;
    }
    Some(Run {
        start: new_start as usize,
        len: new_len as usize,
        sign: run.sign,
        window: run.window,
    })
}

fn is_valid(candidate: &Run, idx: usize, runs: &[Run], bounded: bool) -> bool {
    if bounded {
        if let Some((lo, hi)) = candidate.window {
            if candidate.start < lo || candidate.end() > hi {
                return false;
            }
        }
    }
    if idx > 0 {
        let prev = &runs[idx - 1];
        if prev.end() > candidate.start {
            return false; // overlap
        }
        if prev.end() == candidate.start && prev.sign == candidate.sign {
            return false; // would merge into one run
        }
    }
    if idx + 1 < runs.len() {
        let next = &runs[idx + 1];
        if candidate.end() > next.start {
            return false;
        }
        if candidate.end() == next.start && candidate.sign == next.sign {
            return false;
        }
    }
    true
}

fn write_run(bits: &mut [i8], old: &Run, new: &Run) {
    for slot in old.start..old.end() {
        bits[slot] = 0;
    }
    for slot in new.start..new.end() {
        bits[slot] = new.sign;
    }
}

struct LossContext<'a> {
    loss: &'a LossSpec,
    grid: Vec<f64>,
    target: Option<Spectrum>,
    evaluator: &'a dyn SpectrumEvaluator,
    clock_period: f64,
}

impl<'a> LossContext<'a> {
    fn new(
        cfg: &'a TuneConfig,
        evaluator: &'a dyn SpectrumEvaluator,
        clock_period: f64,
    ) -> LossContext<'a> {
        LossContext {
            loss: &cfg.loss,
            grid: cfg.loss.grid(),
            target: cfg.target.as_ref().map(|t| t.dc_normalized()),
            evaluator,
            clock_period,
        }
    }

    fn eval(&self, bits: &[i8]) -> Result<f64> {
        let pattern = TafPattern::new(bits.to_vec(), self.clock_period)?;
        let spectrum = self
            .evaluator
            .spectrum(&pattern, &self.grid)?
            .dc_normalized();
        let loss = self.loss.evaluate(self.target.as_ref(), &spectrum)?;
        if !loss.is_finite() {
            return Err(Error::Evaluator(format!("non-finite loss {loss}")));
        }
        Ok(loss)
    }
}

/// Single loss evaluation of a candidate pattern under the configured loss
/// and evaluator (the same path `fine_tune` uses for every decision).
pub fn evaluate_candidate(
    p: &TafPattern,
    cfg: &TuneConfig,
    evaluator: &dyn SpectrumEvaluator,
) -> Result<f64> {
    cfg.validate()?;
    LossContext::new(cfg, evaluator, p.clock_period()).eval(p.bits())
}

/// Runs coordinate descent from `p0` and returns the tuned pattern with its
/// report. Deterministic for a fixed configuration and seed.
pub fn fine_tune(
    p0: &TafPattern,
    cfg: &TuneConfig,
    evaluator: &dyn SpectrumEvaluator,
) -> Result<(TafPattern, TuneReport)> {
    cfg.validate()?;
    let ctx = LossContext::new(cfg, evaluator, p0.clock_period());
    let pattern_len = p0.len();
    let mut bits = p0.bits().to_vec();

    let initial_loss = ctx.eval(&bits)?;
    let mut current = initial_loss;
    let mut trace = Vec::new();
    let mut accepted_moves = 0usize;
    let mut sweeps_run = 0usize;

    let window_slots = if cfg.bounded_mode {
        cfg.tap_window_slots
    } else {
        None
    };
    let mut runs = extract_runs(&bits, window_slots);
    let use_toggle = cfg.move_set.contains(&TuneMove::ToggleSlot);
    let pulse_moves: Vec<(TuneMove, i64)> = PULSE_MOVES
        .iter()
        .copied()
        .filter(|(mv, _)| cfg.move_set.contains(mv))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);

    for _ in 0..cfg.max_sweeps {
        sweeps_run += 1;
        let mut improved = false;

        let mut order: Vec<usize> = (0..runs.len()).collect();
        if cfg.shuffle_sweeps {
            order.shuffle(&mut rng);
        }

        for &ri in &order {
            for &(mv, dir) in &pulse_moves {
                // Walk this coordinate greedily while it keeps improving.
                loop {
                    let Some(candidate) = propose(&runs[ri], mv, dir, cfg.step, pattern_len)
                    else {
                        break;
                    };
                    if !is_valid(&candidate, ri, &runs, cfg.bounded_mode) {
                        break;
                    }
                    let old = runs[ri];
                    write_run(&mut bits, &old, &candidate);
                    let loss = ctx.eval(&bits)?;
                    if loss < current {
                        current = loss;
                        trace.push(loss);
                        accepted_moves += 1;
                        runs[ri] = candidate;
                        improved = true;
                    } else {
                        write_run(&mut bits, &candidate, &old);
                        break;
                    }
                }
            }
        }

        if use_toggle {
            let mut toggled = false;
            for slot in 0..pattern_len {
                for alt in [-1i8, 0, 1] {
                    if alt == bits[slot] {
                        continue;
                    }
                    let old = bits[slot];
                    bits[slot] = alt;
                    let loss = ctx.eval(&bits)?;
                    if loss < current {
                        current = loss;
                        trace.push(loss);
                        accepted_moves += 1;
                        improved = true;
                        toggled = true;
                        break;
                    } else {
                        bits[slot] = old;
                    }
                }
            }
            if toggled {
                runs = extract_runs(&bits, window_slots);
            }
        }

        if !improved {
            break;
        }
    }

    let report = TuneReport {
        initial_loss,
        final_loss: current,
        accepted_moves,
        sweeps_run,
        loss_trace: trace,
    };
    Ok((TafPattern::new(bits, p0.clock_period())?, report))
}
