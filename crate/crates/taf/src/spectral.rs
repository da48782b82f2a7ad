//! Frequency-response evaluation and spectral loss functions.
//!
//! Piecewise-constant waveforms have a closed-form continuous-time Fourier
//! transform: each constant segment of width `w`, center `c` and level `A`
//! contributes `A·w·sinc(w·f)·exp(-j·2π·f·c)`. [`ct_response_spectrum`]
//! evaluates that sum exactly at arbitrary frequencies; [`fir_spectrum`] is
//! the equivalent tap-domain route (DTFT times the zero-order-hold envelope).
//!
//! Two loss functions drive pattern tuning: [`loss_full_band`] integrates the
//! absolute magnitude difference against a target response over `[0, B]`, and
//! [`loss_band_notch`] trades mean in-band magnitude against mean magnitude in
//! a suppressed band, oriented so that lower loss means a deeper notch.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{CtResponse, ImpulseResponse};

/// Normalized sinc: sin(πx)/(πx), with sinc(0) = 1.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Norm {
    Raw,
    DcNormalized,
}

/// Sampled complex frequency response on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub values: Vec<Complex64>,
    pub norm: Norm,
}

impl Spectrum {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Scales the spectrum so the lowest-frequency bin has unit magnitude.
    ///
    /// A spectrum whose lowest bin is exactly zero (e.g. an all-zero pattern)
    /// cannot be scaled and is passed through unchanged apart from the tag, so
    /// that losses degrade gracefully instead of dividing by zero.
    pub fn dc_normalized(&self) -> Spectrum {
        let scale = self.values.first().map(|v| v.norm()).unwrap_or(0.0);
        let values = if scale > 0.0 {
            self.values.iter().map(|v| v / scale).collect()
        } else {
            self.values.clone()
        };
        Spectrum {
            freqs: self.freqs.clone(),
            values,
            norm: Norm::DcNormalized,
        }
    }

    /// CSV export with columns `freq_hz,re,im,mag_db`.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "freq_hz,re,im,mag_db")?;
        for (f, v) in self.freqs.iter().zip(&self.values) {
            let mag_db = 20.0 * v.norm().max(1e-20).log10();
            writeln!(w, "{},{},{},{}", f, v.re, v.im, mag_db)?;
        }
        Ok(())
    }
}

/// Exact continuous-time Fourier transform of a piecewise-constant waveform.
pub fn ct_response_spectrum(ct: &CtResponse, freqs: &[f64]) -> Spectrum {
    let values = freqs
        .iter()
        .map(|&f| {
            let mut acc = Complex64::new(0.0, 0.0);
            for seg in &ct.segments {
                if seg.level == 0.0 {
                    continue;
                }
                let width = seg.end - seg.start;
                let center = 0.5 * (seg.start + seg.end);
                let mag = seg.level * width * sinc(width * f);
                let phase = -2.0 * std::f64::consts::PI * f * center;
                acc += Complex64::from_polar(mag, phase);
            }
            acc
        })
        .collect();
    Spectrum {
        freqs: freqs.to_vec(),
        values,
        norm: Norm::Raw,
    }
}

/// Tap-domain route to the same response: DTFT of the coefficients times the
/// zero-order-hold envelope. Equals `ct_response_spectrum(zoh_interpolate(h))`
/// to floating-point precision.
pub fn fir_spectrum(h: &ImpulseResponse, freqs: &[f64]) -> Spectrum {
    let t = h.tap_interval;
    let values = freqs
        .iter()
        .map(|&f| {
            let mut dtft = Complex64::new(0.0, 0.0);
            for (n, &c) in h.coeffs.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let phase = -2.0 * std::f64::consts::PI * f * n as f64 * t;
                dtft += Complex64::from_polar(c, phase);
            }
            dtft * Complex64::from_polar(t * sinc(f * t), -std::f64::consts::PI * f * t)
        })
        .collect();
    Spectrum {
        freqs: freqs.to_vec(),
        values,
        norm: Norm::Raw,
    }
}

/// First-order error of encoding an amplitude-varying tap as a constant-
/// amplitude pulse: `20·log10(|sinc(a_min·T_tap·f)| / |sinc(T_tap·f)|)` dB.
///
/// `a_min` is the smallest nonzero pulse width as a fraction of the tap
/// interval. Frequencies at a null of the reference sinc are poles.
pub fn intrinsic_error_db(a_min: f64, tap_interval: f64, freq: f64) -> Result<f64> {
    if !(a_min > 0.0 && a_min <= 1.0) {
        return Err(Error::InvalidSpec(format!(
            "a_min must lie in (0, 1], got {a_min}"
        )));
    }
    let x = tap_interval * freq;
    if x != 0.0 && (x - x.round()).abs() < 1e-9 {
        return Err(Error::SincPole { freq_hz: freq });
    }
    let num = sinc(a_min * x).abs();
    let den = sinc(x).abs();
    if den == 0.0 {
        return Err(Error::SincPole { freq_hz: freq });
    }
    Ok(20.0 * (num / den).log10())
}

/// Loss selection for pattern tuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    /// Mean absolute magnitude difference against a target response over
    /// `[0, B]`, both spectra dc-normalized.
    FullBand { b: f64, grid_points: usize },
    /// Mean magnitude over the suppressed band `[f0, f0+B2]` minus mean
    /// magnitude over the signal band `[0, B1]`; lower is a deeper notch.
    /// `printed_sign` flips to the opposite orientation (in-band minus
    /// suppressed band).
    BandNotch {
        b1: f64,
        b2: f64,
        f0: f64,
        grid_points: usize,
        #[serde(default)]
        printed_sign: bool,
    },
}

impl LossSpec {
    pub fn grid_points(&self) -> usize {
        match *self {
            LossSpec::FullBand { grid_points, .. } => grid_points,
            LossSpec::BandNotch { grid_points, .. } => grid_points,
        }
    }

    /// Highest frequency the evaluation grid must reach.
    pub fn max_freq(&self) -> f64 {
        match *self {
            LossSpec::FullBand { b, .. } => b,
            LossSpec::BandNotch { b2, f0, .. } => f0 + b2,
        }
    }

    /// Uniform evaluation grid from DC to `max_freq()`.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points().max(2);
        let fmax = self.max_freq();
        (0..n).map(|i| fmax * i as f64 / (n - 1) as f64).collect()
    }

    pub fn validate(&self, grid_nyquist: f64) -> Result<()> {
        match *self {
            LossSpec::FullBand { b, grid_points } => {
                if !(b > 0.0) {
                    return Err(Error::InvalidSpec("full_band loss requires B > 0".into()));
                }
                if grid_points < 2 {
                    return Err(Error::InvalidSpec("grid_points must be >= 2".into()));
                }
            }
            LossSpec::BandNotch {
                b1,
                b2,
                f0,
                grid_points,
                ..
            } => {
                if !(b1 > 0.0 && b2 > 0.0) {
                    return Err(Error::InvalidSpec(
                        "band_notch loss requires B1 > 0 and B2 > 0".into(),
                    ));
                }
                if !(f0 > b1) {
                    return Err(Error::InvalidSpec(
                        "band_notch loss requires f0 > B1".into(),
                    ));
                }
                if f0 + b2 > grid_nyquist * (1.0 + 1e-12) {
                    return Err(Error::InvalidSpec(format!(
                        "band_notch loss requires f0 + B2 <= {grid_nyquist} Hz"
                    )));
                }
                if grid_points < 2 {
                    return Err(Error::InvalidSpec("grid_points must be >= 2".into()));
                }
            }
        }
        Ok(())
    }

    /// Whether this loss needs a target spectrum.
    pub fn needs_target(&self) -> bool {
        matches!(self, LossSpec::FullBand { .. })
    }

    /// Evaluates the loss for a candidate spectrum (and target, if required).
    /// Both spectra must already be dc-normalized and share the grid.
    pub fn evaluate(&self, target: Option<&Spectrum>, candidate: &Spectrum) -> Result<f64> {
        match *self {
            LossSpec::FullBand { b, .. } => {
                let target = target.ok_or_else(|| {
                    Error::Evaluator("full_band loss requires a target spectrum".into())
                })?;
                loss_full_band(target, candidate, b)
            }
            LossSpec::BandNotch {
                b1,
                b2,
                f0,
                printed_sign,
                ..
            } => {
                let v = loss_band_notch(candidate, b1, b2, f0)?;
                Ok(if printed_sign { -v } else { v })
            }
        }
    }
}

/// Mean absolute difference of dc-normalized magnitudes over `[0, B]`,
/// computed by the composite trapezoid rule on the shared grid.
pub fn loss_full_band(target: &Spectrum, candidate: &Spectrum, b: f64) -> Result<f64> {
    if target.norm != Norm::DcNormalized || candidate.norm != Norm::DcNormalized {
        return Err(Error::Normalization(
            "full-band loss requires dc-normalized spectra".into(),
        ));
    }
    if target.freqs != candidate.freqs {
        return Err(Error::GridMismatch(
            "target and candidate must share a frequency grid".into(),
        ));
    }
    let diffs: Vec<f64> = target
        .values
        .iter()
        .zip(&candidate.values)
        .map(|(t, c)| (t.norm() - c.norm()).abs())
        .collect();
    let integral = integrate_band(&target.freqs, &diffs, 0.0, b)?;
    Ok(integral / b)
}

/// Mean magnitude over `[f0, f0+B2]` minus mean magnitude over `[0, B1]`
/// (lower is a deeper notch relative to the in-band level).
pub fn loss_band_notch(candidate: &Spectrum, b1: f64, b2: f64, f0: f64) -> Result<f64> {
    if candidate.norm != Norm::DcNormalized {
        return Err(Error::Normalization(
            "band-notch loss requires a dc-normalized spectrum".into(),
        ));
    }
    let mags = candidate.magnitudes();
    let in_band = integrate_band(&candidate.freqs, &mags, 0.0, b1)? / b1;
    let notch = integrate_band(&candidate.freqs, &mags, f0, f0 + b2)? / b2;
    Ok(notch - in_band)
}

/// Trapezoid integral of grid samples over `[lo, hi]`, linearly interpolating
/// at band edges that fall inside a grid cell.
pub fn integrate_band(freqs: &[f64], values: &[f64], lo: f64, hi: f64) -> Result<f64> {
    if freqs.len() != values.len() || freqs.len() < 2 {
        return Err(Error::GridMismatch(
            "band integration needs at least two grid samples".into(),
        ));
    }
    let f_first = freqs[0];
    let f_last = *freqs.last().unwrap();
    let span = f_last - f_first;
    if lo < f_first - 1e-12 * span || hi > f_last + 1e-12 * span {
        return Err(Error::GridCoverage(format!(
            "band [{lo}, {hi}] outside grid [{f_first}, {f_last}]"
        )));
    }
    let lo = lo.max(f_first);
    let hi = hi.min(f_last);
    let mut acc = 0.0;
    for i in 0..freqs.len() - 1 {
        let (fa, fb) = (freqs[i], freqs[i + 1]);
        if fb <= lo || fa >= hi {
            continue;
        }
        let a = fa.max(lo);
        let b = fb.min(hi);
        let va = lerp(fa, fb, values[i], values[i + 1], a);
        let vb = lerp(fa, fb, values[i], values[i + 1], b);
        acc += 0.5 * (va + vb) * (b - a);
    }
    Ok(acc)
}

fn lerp(fa: f64, fb: f64, va: f64, vb: f64, f: f64) -> f64 {
    if fb == fa {
        return va;
    }
    va + (vb - va) * (f - fa) / (fb - fa)
}
