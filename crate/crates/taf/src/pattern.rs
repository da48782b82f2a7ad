//! Pulse-width/position encoding of an FIR response and its clock-grid
//! quantization.
//!
//! [`approximate`] turns a zero-order-hold waveform into a [`PulseTrain`]: one
//! constant-amplitude pulse per nonzero tap, width chosen so the pulse area
//! equals the tap area, centered in the tap window. [`quantize`] snaps widths
//! and positions to the clock grid, producing a three-valued [`TafPattern`]
//! (sign is realized in hardware by passing or chopping; the abstract pattern
//! keeps it explicit). [`pattern_to_ct`] is the inverse view used by spectral
//! evaluation and simulation.
//!
//! Quantization rounds the width to the nearest whole number of slots (ties
//! away from zero) and then places the run so its center is as close as
//! possible to the unquantized pulse center (ties toward earlier time). Width
//! error is at most half a clock period per pulse; pulses narrower than half
//! a slot collapse and are reported, not forced to one slot, since forcing a
//! minimum width changes the DC gain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{CtResponse, CtSegment};
use crate::provenance::Provenance;

const REL_TOL: f64 = 1e-9;

/// One constant-amplitude pulse: width, center time and sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub width: f64,
    pub center: f64,
    pub sign: i8,
}

/// Pulse-train view of a filter response before grid quantization.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain {
    pub pulses: Vec<Pulse>,
    /// Constant pulse level A.
    pub amplitude: f64,
    pub tap_interval: f64,
    /// Tap count of the originating response, including zero taps that
    /// produced no pulse. Fixes the quantized pattern length.
    pub num_taps: usize,
}

impl PulseTrain {
    /// Smallest nonzero pulse width as a fraction of the tap interval
    /// (the `a_min` consumed by the intrinsic-error estimate).
    pub fn min_width_fraction(&self) -> Option<f64> {
        self.pulses
            .iter()
            .map(|p| p.width / self.tap_interval)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Signed pulse area sum: Σ sign·width·amplitude.
    pub fn signed_area(&self) -> f64 {
        self.pulses
            .iter()
            .map(|p| p.sign as f64 * p.width * self.amplitude)
            .sum()
    }
}

/// Clock-grid pattern over {-1, 0, +1}. Length is fixed at creation.
#[derive(Debug, Clone, PartialEq)]
pub struct TafPattern {
    bits: Vec<i8>,
    clock_period: f64,
}

impl TafPattern {
    pub fn new(bits: Vec<i8>, clock_period: f64) -> Result<Self> {
        if !(clock_period > 0.0) {
            return Err(Error::InvalidSpec("clock period must be positive".into()));
        }
        if bits.is_empty() {
            return Err(Error::InvalidSpec("pattern must not be empty".into()));
        }
        if let Some(&b) = bits.iter().find(|&&b| !(-1..=1).contains(&b)) {
            return Err(Error::InvalidSpec(format!(
                "pattern bits must be -1, 0 or +1 (got {b})"
            )));
        }
        Ok(TafPattern { bits, clock_period })
    }

    pub fn bits(&self) -> &[i8] {
        &self.bits
    }

    pub fn clock_period(&self) -> f64 {
        self.clock_period
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Serializes the bits as one character per slot over {+, 0, -}.
    pub fn to_line(&self) -> String {
        self.bits
            .iter()
            .map(|&b| match b {
                1 => '+',
                -1 => '-',
                _ => '0',
            })
            .collect()
    }

    pub fn from_line(line: &str, clock_period: f64) -> Result<Self> {
        let bits = line
            .trim()
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                '0' => Ok(0),
                other => Err(Error::Parse(format!("invalid pattern character '{other}'"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        TafPattern::new(bits, clock_period)
    }
}

/// Quantization result: the grid pattern plus the taps whose pulse collapsed
/// to zero width.
#[derive(Debug, Clone)]
pub struct Quantized {
    pub pattern: TafPattern,
    pub collapsed_taps: Vec<usize>,
}

/// Encodes a zero-order-hold response as constant-amplitude pulses with
/// matched per-tap area and centroid.
pub fn approximate(ct: &CtResponse, amplitude: f64) -> Result<PulseTrain> {
    if !(amplitude > 0.0) {
        return Err(Error::InvalidSpec("amplitude must be positive".into()));
    }
    if ct.segments.is_empty() {
        return Err(Error::InvalidSpec("response has no segments".into()));
    }
    let tap_interval = ct.segments[0].end - ct.segments[0].start;
    for (n, seg) in ct.segments.iter().enumerate() {
        let width = seg.end - seg.start;
        if (width - tap_interval).abs() > REL_TOL * tap_interval {
            return Err(Error::InvalidSpec(
                "response is not a uniform zero-order-hold waveform".into(),
            ));
        }
        let expected_start = n as f64 * tap_interval;
        if (seg.start - expected_start).abs() > REL_TOL * tap_interval {
            return Err(Error::InvalidSpec(
                "segments must be contiguous from t = 0".into(),
            ));
        }
    }

    let mut pulses = Vec::new();
    for (n, seg) in ct.segments.iter().enumerate() {
        let h = seg.level;
        if h == 0.0 {
            continue;
        }
        let mut width = h.abs() * tap_interval / amplitude;
        if width > tap_interval {
            if width > tap_interval * (1.0 + REL_TOL) {
                return Err(Error::Normalization(format!(
                    "tap {n} level {h} exceeds amplitude {amplitude}; \
                     pulse would be wider than the tap interval"
                )));
            }
            width = tap_interval;
        }
        pulses.push(Pulse {
            width,
            center: (n as f64 + 0.5) * tap_interval,
            sign: if h > 0.0 { 1 } else { -1 },
        });
    }
    Ok(PulseTrain {
        pulses,
        amplitude,
        tap_interval,
        num_taps: ct.segments.len(),
    })
}

/// Snaps pulse widths and positions to the clock grid.
pub fn quantize(pt: &PulseTrain, clock_period: f64) -> Result<Quantized> {
    if !(clock_period > 0.0) {
        return Err(Error::InvalidSpec("clock period must be positive".into()));
    }
    let ratio = pt.tap_interval / clock_period;
    let g = ratio.round();
    if (ratio - g).abs() > REL_TOL * ratio || g < 1.0 {
        return Err(Error::InvalidSpec(
            "clock period must divide the tap interval".into(),
        ));
    }
    let g = g as usize;
    let len = pt.num_taps * g;
    let mut bits = vec![0i8; len];
    let mut collapsed = Vec::new();

    for pulse in &pt.pulses {
        let tap = ((pulse.center / pt.tap_interval) as usize).min(pt.num_taps - 1);
        let slots = (pulse.width / clock_period).round() as i64;
        if slots == 0 {
            collapsed.push(tap);
            continue;
        }
        let slots = slots.min(len as i64);
        // Place the run so its center lands nearest the unquantized center;
        // on a tie take the earlier position.
        let center_slots = pulse.center / clock_period;
        let lo = (center_slots - slots as f64 / 2.0).floor() as i64;
        let start = if (lo as f64 + slots as f64 / 2.0 - center_slots).abs()
            <= ((lo + 1) as f64 + slots as f64 / 2.0 - center_slots).abs()
        {
            lo
        } else {
            lo + 1
        };
        let start = start.clamp(0, len as i64 - slots) as usize;
        for slot in start..start + slots as usize {
            if bits[slot] != 0 {
                return Err(Error::InvalidSpec(format!(
                    "quantized pulses overlap at slot {slot}"
                )));
            }
            bits[slot] = pulse.sign;
        }
    }

    Ok(Quantized {
        pattern: TafPattern::new(bits, clock_period)?,
        collapsed_taps: collapsed,
    })
}

/// Piecewise-constant waveform of a pattern at a given amplitude, with
/// consecutive equal-level slots merged into single segments.
pub fn pattern_to_ct(p: &TafPattern, amplitude: f64) -> CtResponse {
    let t = p.clock_period;
    let mut segments: Vec<CtSegment> = Vec::new();
    for (i, &b) in p.bits.iter().enumerate() {
        let level = amplitude * b as f64;
        match segments.last_mut() {
            Some(seg) if seg.level == level => seg.end = (i + 1) as f64 * t,
            _ => segments.push(CtSegment {
                start: i as f64 * t,
                end: (i + 1) as f64 * t,
                level,
            }),
        }
    }
    CtResponse {
        segments,
        total_duration: p.bits.len() as f64 * t,
    }
}

// ---------------------------------------------------------------------------
// Pattern file format
// ---------------------------------------------------------------------------

/// JSON header stored on the first line of a pattern file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternHeader {
    pub clock_period_s: f64,
    pub amplitude: f64,
    pub num_taps: usize,
    pub grid_factor: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

/// On-disk pattern: a one-line JSON header followed by one line of
/// {+, 0, -} characters (the sequence the pattern memory would load).
#[derive(Debug, Clone)]
pub struct PatternFile {
    pub header: PatternHeader,
    pub pattern: TafPattern,
}

impl PatternFile {
    pub fn to_file_string(&self) -> String {
        let header = serde_json::to_string(&self.header).expect("header serializes");
        format!("{}\n{}\n", header, self.pattern.to_line())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header_line = lines
            .next()
            .ok_or_else(|| Error::Parse("empty pattern file".into()))?;
        let header: PatternHeader = serde_json::from_str(header_line)?;
        let pattern_line = lines
            .next()
            .ok_or_else(|| Error::Parse("pattern file missing bit line".into()))?;
        let pattern = TafPattern::from_line(pattern_line, header.clock_period_s)?;
        let expected = header.num_taps * header.grid_factor;
        if pattern.len() != expected {
            return Err(Error::Parse(format!(
                "pattern length {} does not match num_taps*grid_factor = {}",
                pattern.len(),
                expected
            )));
        }
        Ok(PatternFile { header, pattern })
    }

    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_file_string())?;
        Ok(())
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }
}
