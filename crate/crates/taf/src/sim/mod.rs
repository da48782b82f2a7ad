//! Behavioral simulation of the counter-based filter hardware.
//!
//! The modeled datapath: a pattern memory is serialized into a 1-bit stream
//! by a counter+MUX with a retiming DFF ([`serialize_pattern`]), optionally
//! chopped by a ±1 square wave to move the response to a bandpass center
//! ([`chop`]), and distributed over time-interleaved channels by a ring
//! counter ([`ring_counter_phases`]). Each channel holds one input sample and
//! plays the full pattern scaled by it; channel outputs sum at the DAC node
//! ([`simulate_filter`]). Input samples arrive every
//! `pattern_len / num_channels` clock slots, so consecutive samples of one
//! channel are exactly back to back.
//!
//! DAC non-idealities: an odd-order polynomial nonlinearity applied per
//! channel and first-order exponential settling on the summed output. With
//! `dac_settling_tau = 0` and no nonlinearity the trace equals the exact
//! discrete convolution of the input with the pattern waveform at grid
//! resolution.

pub mod stimulus;
pub mod synth;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{CtResponse, CtSegment};
use crate::pattern::TafPattern;
use crate::spectral::{ct_response_spectrum, sinc, Norm, Spectrum};
use crate::tuner::SpectrumEvaluator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HwMode {
    Lowpass,
    Bandpass,
}

/// Hardware configuration of the time-interleaved filter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HwConfig {
    pub num_channels: usize,
    pub pattern_len: usize,
    #[serde(rename = "clock_period_s")]
    pub clock_period: f64,
    pub mode: HwMode,
    /// Chop frequency = 1 / (2 · chop_divisor · T_clk).
    #[serde(default = "default_chop_divisor")]
    pub chop_divisor: usize,
    /// First-order DAC settling time constant; 0 means ideal zero-order hold.
    #[serde(default)]
    pub dac_settling_tau: f64,
    /// Odd-order nonlinearity: coeffs[k] multiplies v^(2k+3).
    #[serde(default)]
    pub dac_inl_coeffs: Vec<f64>,
    /// Trace samples per clock slot.
    #[serde(default = "default_oversample")]
    pub oversample: usize,
}

fn default_chop_divisor() -> usize {
    4
}

fn default_oversample() -> usize {
    16
}

impl HwConfig {
    /// The 8-channel, 64-bit configuration used throughout the examples.
    pub fn embodiment(clock_period: f64) -> Self {
        HwConfig {
            num_channels: 8,
            pattern_len: 64,
            clock_period,
            mode: HwMode::Lowpass,
            chop_divisor: 4,
            dac_settling_tau: 0.0,
            dac_inl_coeffs: Vec::new(),
            oversample: 16,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_channels < 1 || self.pattern_len < 1 {
            return Err(Error::InvalidSpec(
                "num_channels and pattern_len must be >= 1".into(),
            ));
        }
        if self.pattern_len % self.num_channels != 0 {
            return Err(Error::InvalidSpec(format!(
                "pattern_len {} not divisible by num_channels {}",
                self.pattern_len, self.num_channels
            )));
        }
        if !(self.clock_period > 0.0) {
            return Err(Error::InvalidSpec("clock_period_s must be positive".into()));
        }
        if self.chop_divisor < 1 {
            return Err(Error::InvalidSpec("chop_divisor must be >= 1".into()));
        }
        if self.dac_settling_tau < 0.0 {
            return Err(Error::InvalidSpec(
                "dac_settling_tau must be nonnegative".into(),
            ));
        }
        if self.oversample < 1 {
            return Err(Error::InvalidSpec("oversample must be >= 1".into()));
        }
        Ok(())
    }

    /// Clock slots between consecutive input samples.
    pub fn slots_per_input(&self) -> usize {
        self.pattern_len / self.num_channels
    }

    /// Seconds between consecutive input samples.
    pub fn input_period(&self) -> f64 {
        self.slots_per_input() as f64 * self.clock_period
    }

    /// Chop frequency in Hz.
    pub fn chop_freq(&self) -> f64 {
        1.0 / (2.0 * self.chop_divisor as f64 * self.clock_period)
    }

    fn chop_sign(&self, slot: usize) -> i8 {
        match self.mode {
            HwMode::Lowpass => 1,
            HwMode::Bandpass => {
                if (slot / self.chop_divisor) % 2 == 0 {
                    1
                } else {
                    -1
                }
            }
        }
    }
}

/// Oversampled output waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct TransientTrace {
    #[allow(missing_docs)]
    pub sample_period: f64,
    pub samples: Vec<f64>,
}

impl TransientTrace {
    /// CSV export with columns `time_s,value`.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "time_s,value")?;
        for (i, v) in self.samples.iter().enumerate() {
            writeln!(w, "{},{}", i as f64 * self.sample_period, v)?;
        }
        Ok(())
    }

    /// Piecewise-constant view of the trace (equal consecutive samples
    /// merged), suitable for exact spectral evaluation.
    pub fn to_ct_response(&self) -> CtResponse {
        let dt = self.sample_period;
        let mut segments: Vec<CtSegment> = Vec::new();
        for (i, &v) in self.samples.iter().enumerate() {
            match segments.last_mut() {
                Some(seg) if seg.level == v => seg.end = (i + 1) as f64 * dt,
                _ => segments.push(CtSegment {
                    start: i as f64 * dt,
                    end: (i + 1) as f64 * dt,
                    level: v,
                }),
            }
        }
        CtResponse {
            segments,
            total_duration: self.samples.len() as f64 * dt,
        }
    }
}

/// Serializes the stored pattern into a 1-bit stream at clock rate: the
/// pattern cycles indefinitely and the retiming DFF delays it by exactly one
/// clock (one value per slot, glitch-free by construction).
pub fn serialize_pattern(bits: &[i8], hw: &HwConfig, num_slots: usize) -> Result<Vec<i8>> {
    hw.validate()?;
    if bits.len() != hw.pattern_len {
        return Err(Error::InvalidSpec(format!(
            "pattern length {} does not match configured pattern_len {}",
            bits.len(),
            hw.pattern_len
        )));
    }
    let mut stream = Vec::with_capacity(num_slots);
    for k in 0..num_slots {
        if k == 0 {
            stream.push(0); // DFF reset value before the first clock edge
        } else {
            stream.push(bits[(k - 1) % hw.pattern_len]);
        }
    }
    Ok(stream)
}

/// Multiplies the stream by the ±1 chop square wave (bandpass mode);
/// lowpass mode passes the stream through unchanged.
pub fn chop(stream: &[i8], hw: &HwConfig) -> Vec<i8> {
    stream
        .iter()
        .enumerate()
        .map(|(k, &b)| b * hw.chop_sign(k))
        .collect()
}

/// One-hot channel enables from the ring counter: channel c is enabled on
/// slots congruent to c modulo the channel count.
pub fn ring_counter_phases(hw: &HwConfig, num_slots: usize) -> Vec<Vec<bool>> {
    (0..hw.num_channels)
        .map(|c| (0..num_slots).map(|k| k % hw.num_channels == c).collect())
        .collect()
}

/// Full time-interleaved simulation; see [`simulate_channel`] for the
/// per-channel decomposition.
pub fn simulate_filter(
    input: &[f64],
    pattern: &TafPattern,
    hw: &HwConfig,
) -> Result<TransientTrace> {
    simulate_masked(input, pattern, hw, None)
}

/// Simulation with only one channel contributing (all other channels held at
/// zero). Summing the per-channel traces in channel order reproduces
/// [`simulate_filter`] bit for bit with an ideal DAC.
pub fn simulate_channel(
    input: &[f64],
    pattern: &TafPattern,
    hw: &HwConfig,
    channel: usize,
) -> Result<TransientTrace> {
    if channel >= hw.num_channels {
        return Err(Error::InvalidSpec(format!(
            "channel {channel} out of range (num_channels {})",
            hw.num_channels
        )));
    }
    simulate_masked(input, pattern, hw, Some(channel))
}

fn simulate_masked(
    input: &[f64],
    pattern: &TafPattern,
    hw: &HwConfig,
    only_channel: Option<usize>,
) -> Result<TransientTrace> {
    hw.validate()?;
    if pattern.len() != hw.pattern_len {
        return Err(Error::InvalidSpec(format!(
            "pattern length {} does not match configured pattern_len {}",
            pattern.len(),
            hw.pattern_len
        )));
    }
    if (pattern.clock_period() - hw.clock_period).abs() > 1e-9 * hw.clock_period {
        return Err(Error::InvalidSpec(
            "pattern clock period does not match hardware clock".into(),
        ));
    }
    let sample_period = hw.clock_period / hw.oversample as f64;
    if input.is_empty() {
        return Ok(TransientTrace {
            sample_period,
            samples: Vec::new(),
        });
    }

    let bits = pattern.bits();
    let slots_per_input = hw.slots_per_input() as i64;
    let channels = hw.num_channels as i64;
    let num_slots = input.len() * hw.slots_per_input() + hw.pattern_len;

    // Combined DAC level per clock slot, channels accumulated in index order.
    let mut levels = vec![0.0f64; num_slots];
    for (k, level) in levels.iter_mut().enumerate() {
        let chop_sign = hw.chop_sign(k) as f64;
        let newest = k as i64 / slots_per_input;
        for c in 0..channels {
            if let Some(only) = only_channel {
                if c != only as i64 {
                    continue;
                }
            }
            // The one sample channel c is holding at slot k.
            let m = newest - (((newest - c) % channels) + channels) % channels;
            if m < 0 || m as usize >= input.len() {
                continue;
            }
            let j = (k as i64 - m * slots_per_input) as usize;
            if j >= bits.len() {
                continue; // channel idle (playback finished)
            }
            let v = input[m as usize] * bits[j] as f64 * chop_sign;
            *level += apply_inl(v, &hw.dac_inl_coeffs);
        }
    }

    // Oversampled trace with optional first-order settling.
    let mut samples = Vec::with_capacity(num_slots * hw.oversample);
    if hw.dac_settling_tau == 0.0 {
        for &v in &levels {
            for _ in 0..hw.oversample {
                samples.push(v);
            }
        }
    } else {
        let alpha = 1.0 - (-sample_period / hw.dac_settling_tau).exp();
        let mut y = 0.0f64;
        for &v in &levels {
            for _ in 0..hw.oversample {
                y += (v - y) * alpha;
                samples.push(y);
            }
        }
    }

    Ok(TransientTrace {
        sample_period,
        samples,
    })
}

fn apply_inl(v: f64, coeffs: &[f64]) -> f64 {
    if coeffs.is_empty() {
        return v;
    }
    let v2 = v * v;
    let mut term = v * v2; // v^3
    let mut out = v;
    for &c in coeffs {
        out += c * term;
        term *= v2;
    }
    out
}

/// DFT-based spectrum of a trace, scaled so each bin equals the exact
/// continuous-time transform of the sampled-and-held waveform at the bin
/// frequency. Bins cover [0, 1/(2·sample_period)).
pub fn trace_spectrum(trace: &TransientTrace) -> Result<Spectrum> {
    let n = trace.samples.len();
    if n == 0 {
        return Err(Error::InvalidSpec("cannot transform an empty trace".into()));
    }
    let mut buf: Vec<Complex64> = trace
        .samples
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let dt = trace.sample_period;
    let half = n / 2 + 1;
    let mut freqs = Vec::with_capacity(half);
    let mut values = Vec::with_capacity(half);
    for (k, bin) in buf.iter().take(half).enumerate() {
        let f = k as f64 / (n as f64 * dt);
        // Each sample is a width-dt box: fold in the hold envelope so the bin
        // equals the exact transform of the piecewise-constant waveform.
        let hold = Complex64::from_polar(dt * sinc(f * dt), -std::f64::consts::PI * f * dt);
        freqs.push(f);
        values.push(bin * hold);
    }
    Ok(Spectrum {
        freqs,
        values,
        norm: Norm::Raw,
    })
}

/// Index of the strongest non-DC bin.
pub fn peak_bin(spectrum: &Spectrum) -> usize {
    let mags = spectrum.magnitudes();
    (1..mags.len())
        .max_by(|&a, &b| mags[a].total_cmp(&mags[b]))
        .unwrap_or(0)
}

/// Tuner evaluator that feeds back the simulated transient response of the
/// hardware (unit-impulse input scaled to the pattern amplitude) instead of
/// the ideal pattern waveform, closing the circuit-aware tuning loop.
#[derive(Debug, Clone)]
pub struct BehavioralEvaluator {
    pub hw: HwConfig,
    pub amplitude: f64,
}

impl SpectrumEvaluator for BehavioralEvaluator {
    fn spectrum(&self, pattern: &TafPattern, freqs: &[f64]) -> Result<Spectrum> {
        let trace = simulate_filter(&[self.amplitude], pattern, &self.hw)?;
        Ok(ct_response_spectrum(&trace.to_ct_response(), freqs))
    }
}

/// Convenience impulse response of the hardware as a piecewise-constant
/// waveform (what the pattern realizes through the real datapath).
pub fn hardware_impulse_response(
    pattern: &TafPattern,
    hw: &HwConfig,
    amplitude: f64,
) -> Result<CtResponse> {
    Ok(simulate_filter(&[amplitude], pattern, hw)?.to_ct_response())
}
