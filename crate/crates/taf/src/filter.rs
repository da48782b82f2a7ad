//! Discrete-time FIR prototype design and zero-order-hold conversion.
//!
//! A [`FilterSpec`] describes the desired filter (mode, tap count, timing and
//! band edges). [`design_fir`] produces a linear-phase prototype
//! ([`ImpulseResponse`]) via frequency-sampling least squares, falling back to
//! a Hamming-windowed sinc for very short filters. [`zoh_interpolate`] turns
//! the coefficients into a piecewise-constant continuous-time response.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::LossSpec;

/// Relative tolerance used when checking that the clock divides the tap
/// interval and that edges lie inside valid bands.
const REL_TOL: f64 = 1e-9;

/// Filter lengths below this use the windowed-sinc fallback instead of the
/// least-squares design (too few degrees of freedom for a banded fit).
const MIN_TAPS_FOR_LEAST_SQUARES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterMode {
    Lowpass,
    /// Lowpass prototype intended for notch shaping: the band edges carry the
    /// signal band B1, the suppressed band start f0 and its width B2.
    BandpassTarget,
}

/// Loss selector embedded in the filter spec JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LossKindSelector {
    #[default]
    FullBand,
    BandNotch,
}

/// User-facing description of the desired filter.
///
/// JSON schema (see the repo README): `mode`, `num_taps`, `tap_interval_s`,
/// `clock_period_s`, `band_edges_hz`, optional `loss` selector, optional
/// `loss_grid_points`, optional `min_stopband_atten_db`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterSpec {
    pub mode: FilterMode,
    pub num_taps: usize,
    #[serde(rename = "tap_interval_s")]
    pub tap_interval: f64,
    #[serde(rename = "clock_period_s")]
    pub clock_period: f64,
    /// Lowpass: `[passband_edge]` or `[passband_edge, stopband_edge]`.
    /// Bandpass-target: `[B1, f0, B2]` (signal band, suppressed band start,
    /// suppressed band width).
    #[serde(rename = "band_edges_hz")]
    pub band_edges: Vec<f64>,
    #[serde(default)]
    pub loss: LossKindSelector,
    #[serde(default)]
    pub loss_grid_points: Option<usize>,
    #[serde(default)]
    pub min_stopband_atten_db: Option<f64>,
}

impl FilterSpec {
    /// Grid factor G: clock slots per tap interval.
    pub fn grid_factor(&self) -> usize {
        (self.tap_interval / self.clock_period).round() as usize
    }

    /// Reference band B = 1/(2·T_tap), the discrete-time Nyquist frequency.
    pub fn nyquist(&self) -> f64 {
        1.0 / (2.0 * self.tap_interval)
    }

    /// Nyquist frequency of the clock grid, 1/(2·T_clk).
    pub fn grid_nyquist(&self) -> f64 {
        1.0 / (2.0 * self.clock_period)
    }

    /// Pattern length L = num_taps · G.
    pub fn pattern_len(&self) -> usize {
        self.num_taps * self.grid_factor()
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_taps < 1 {
            return Err(Error::InvalidSpec("num_taps must be >= 1".into()));
        }
        if !(self.tap_interval > 0.0) || !(self.clock_period > 0.0) {
            return Err(Error::InvalidSpec(
                "tap_interval_s and clock_period_s must be positive".into(),
            ));
        }
        let ratio = self.tap_interval / self.clock_period;
        let g = ratio.round();
        if (ratio - g).abs() > REL_TOL * ratio || g < 2.0 {
            return Err(Error::InvalidSpec(format!(
                "clock_period_s must divide tap_interval_s with integer grid factor >= 2 \
                 (got ratio {ratio})"
            )));
        }
        if self.band_edges.is_empty() {
            return Err(Error::InvalidSpec("band_edges_hz must not be empty".into()));
        }
        let fmax = self.grid_nyquist();
        for &f in &self.band_edges {
            if !(f > 0.0) || f >= fmax * (1.0 + REL_TOL) {
                return Err(Error::InvalidSpec(format!(
                    "band edge {f} Hz outside (0, {fmax} Hz)"
                )));
            }
        }
        match self.mode {
            FilterMode::Lowpass => {
                if self.band_edges.len() > 2 {
                    return Err(Error::InvalidSpec(
                        "lowpass mode takes 1 or 2 band edges".into(),
                    ));
                }
            }
            FilterMode::BandpassTarget => {
                if self.band_edges.len() != 3 {
                    return Err(Error::InvalidSpec(
                        "bandpass-target mode takes exactly 3 band edges [B1, f0, B2]".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Passband and stopband edges used by the prototype design.
    ///
    /// With a single lowpass edge the stopband edge defaults to
    /// `min(2·f_pass, (f_pass + nyquist)/2)`. In bandpass-target mode the
    /// prototype passes the signal band `[0, B1]` and treats `f0` (the start
    /// of the suppressed band) as the stopband edge.
    pub fn design_edges(&self) -> (f64, f64) {
        match self.mode {
            FilterMode::Lowpass => {
                let fp = self.band_edges[0];
                let fs = self
                    .band_edges
                    .get(1)
                    .copied()
                    .unwrap_or_else(|| (2.0 * fp).min(0.5 * (fp + self.nyquist())));
                (fp, fs)
            }
            FilterMode::BandpassTarget => (self.band_edges[0], self.band_edges[1]),
        }
    }

    /// Builds the loss specification selected by this spec.
    pub fn loss_spec(&self) -> Result<LossSpec> {
        let grid_points = self.loss_grid_points.unwrap_or(2048);
        let loss = match self.loss {
            LossKindSelector::FullBand => LossSpec::FullBand {
                b: self.nyquist(),
                grid_points,
            },
            LossKindSelector::BandNotch => {
                if self.band_edges.len() != 3 {
                    return Err(Error::InvalidSpec(
                        "band_notch loss requires band_edges_hz = [B1, f0, B2]".into(),
                    ));
                }
                LossSpec::BandNotch {
                    b1: self.band_edges[0],
                    f0: self.band_edges[1],
                    b2: self.band_edges[2],
                    grid_points,
                    printed_sign: false,
                }
            }
        };
        loss.validate(self.grid_nyquist())?;
        Ok(loss)
    }
}

/// Designed FIR coefficients h[n] on the tap grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImpulseResponse {
    pub coeffs: Vec<f64>,
    #[serde(rename = "tap_interval_s")]
    pub tap_interval: f64,
}

impl ImpulseResponse {
    pub fn validate(&self) -> Result<()> {
        if self.coeffs.is_empty() || !self.coeffs.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidSpec(
                "impulse response must be nonempty and finite".into(),
            ));
        }
        if self.coeffs.iter().all(|&c| c == 0.0) {
            return Err(Error::InvalidSpec(
                "impulse response must have a nonzero coefficient".into(),
            ));
        }
        if !(self.tap_interval > 0.0) {
            return Err(Error::InvalidSpec("tap_interval_s must be positive".into()));
        }
        Ok(())
    }
}

/// One piecewise-constant segment of a continuous-time response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtSegment {
    pub start: f64,
    pub end: f64,
    pub level: f64,
}

/// Piecewise-constant continuous-time waveform (contiguous, ordered segments).
#[derive(Debug, Clone, PartialEq)]
pub struct CtResponse {
    pub segments: Vec<CtSegment>,
    pub total_duration: f64,
}

impl CtResponse {
    /// Time integral of the waveform (sum of segment areas).
    pub fn integral(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.level * (s.end - s.start))
            .sum()
    }
}

/// Designs the discrete-time FIR prototype for a specification.
///
/// Lowpass (and the bandpass-target prototype, which is a lowpass over the
/// signal band) uses a frequency-sampling least-squares fit of the
/// linear-phase amplitude response; filters shorter than
/// `MIN_TAPS_FOR_LEAST_SQUARES` taps use a Hamming-windowed sinc. The result
/// is symmetric and normalized so that max|h[n]| = 1.
pub fn design_fir(spec: &FilterSpec) -> Result<ImpulseResponse> {
    spec.validate()?;
    let n = spec.num_taps;
    let t = spec.tap_interval;
    let nyq = spec.nyquist();
    let (f_pass, f_stop) = spec.design_edges();
    if f_pass >= f_stop || f_stop > nyq * (1.0 + REL_TOL) {
        return Err(Error::InvalidSpec(format!(
            "prototype band edges must satisfy 0 < f_pass < f_stop <= {nyq} Hz \
             (got {f_pass}, {f_stop})"
        )));
    }

    let mut coeffs = if n < MIN_TAPS_FOR_LEAST_SQUARES {
        windowed_sinc(n, t, 0.5 * (f_pass + f_stop))
    } else {
        least_squares_lowpass(n, t, f_pass, f_stop, nyq)?
    };

    // Normalize so the constant pulse amplitude maps to the largest tap.
    let peak = coeffs.iter().fold(0.0f64, |m, &c| m.max(c.abs()));
    if peak == 0.0 {
        return Err(Error::InvalidSpec(
            "design produced an all-zero impulse response".into(),
        ));
    }
    for c in &mut coeffs {
        *c /= peak;
        if *c == -0.0 {
            *c = 0.0;
        }
    }

    let h = ImpulseResponse {
        coeffs,
        tap_interval: t,
    };

    if let Some(requested) = spec.min_stopband_atten_db {
        let achieved = stopband_attenuation_db(&h, f_pass, f_stop, nyq);
        if achieved < requested {
            return Err(Error::Infeasible {
                requested_atten_db: requested,
                achieved_atten_db: achieved,
            });
        }
    }
    Ok(h)
}

/// Converts tap coefficients to a piecewise-constant waveform: segment n
/// spans [n·T_tap, (n+1)·T_tap) at level h[n].
pub fn zoh_interpolate(h: &ImpulseResponse) -> CtResponse {
    let t = h.tap_interval;
    let segments = h
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, &level)| CtSegment {
            start: n as f64 * t,
            end: (n + 1) as f64 * t,
            level,
        })
        .collect();
    CtResponse {
        segments,
        total_duration: h.coeffs.len() as f64 * t,
    }
}

/// Achieved stopband attenuation in dB: peak passband magnitude over peak
/// stopband magnitude of the DTFT, evaluated on a dense grid.
pub fn stopband_attenuation_db(h: &ImpulseResponse, f_pass: f64, f_stop: f64, nyq: f64) -> f64 {
    let grid = 4096;
    let mut max_pass = 0.0f64;
    let mut max_stop = 0.0f64;
    for i in 0..=grid {
        let f = nyq * i as f64 / grid as f64;
        let mag = dtft_magnitude(&h.coeffs, h.tap_interval, f);
        if f <= f_pass {
            max_pass = max_pass.max(mag);
        } else if f >= f_stop {
            max_stop = max_stop.max(mag);
        }
    }
    if max_stop == 0.0 {
        return f64::INFINITY;
    }
    20.0 * (max_pass / max_stop).log10()
}

fn dtft_magnitude(coeffs: &[f64], t: f64, f: f64) -> f64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (n, &c) in coeffs.iter().enumerate() {
        let phase = -2.0 * std::f64::consts::PI * f * n as f64 * t;
        re += c * phase.cos();
        im += c * phase.sin();
    }
    (re * re + im * im).sqrt()
}

fn windowed_sinc(n: usize, t: f64, fc: f64) -> Vec<f64> {
    let nc = (n as f64 - 1.0) / 2.0;
    (0..n)
        .map(|i| {
            let x = 2.0 * fc * t * (i as f64 - nc);
            let w = if n == 1 {
                1.0
            } else {
                0.54 - 0.46 * (2.0 * std::f64::consts::PI * i as f64 / (n as f64 - 1.0)).cos()
            };
            2.0 * fc * t * crate::spectral::sinc(x) * w
        })
        .collect()
}

/// Least-squares fit of the linear-phase amplitude response to the ideal
/// brick wall (1 in the passband, 0 in the stopband, transition band ignored).
fn least_squares_lowpass(
    n: usize,
    t: f64,
    f_pass: f64,
    f_stop: f64,
    nyq: f64,
) -> Result<Vec<f64>> {
    let odd = n % 2 == 1;
    let m = if odd { (n - 1) / 2 + 1 } else { n / 2 };
    let grid = (16 * n).max(256);

    // Basis functions of the real amplitude response:
    //   odd n:  A(f) = c0 + sum_k c_k cos(2*pi*f*k*T)
    //   even n: A(f) = sum_k c_k cos(2*pi*f*(k - 1/2)*T)
    let basis = |k: usize, f: f64| -> f64 {
        let arg = if odd { k as f64 } else { k as f64 + 0.5 };
        (2.0 * std::f64::consts::PI * f * arg * t).cos()
    };

    let mut gram = vec![vec![0.0f64; m]; m];
    let mut rhs = vec![0.0f64; m];
    for i in 0..=grid {
        let f = nyq * i as f64 / grid as f64;
        let desired = if f <= f_pass {
            1.0
        } else if f >= f_stop {
            0.0
        } else {
            continue; // transition band: don't care
        };
        for a in 0..m {
            let pa = basis(a, f);
            rhs[a] += pa * desired;
            for b in a..m {
                gram[a][b] += pa * basis(b, f);
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            gram[a][b] = gram[b][a];
        }
    }

    let c = solve_dense(gram, rhs).ok_or_else(|| {
        Error::InvalidSpec("least-squares design system is singular".into())
    })?;

    let mut h = vec![0.0f64; n];
    if odd {
        let nc = (n - 1) / 2;
        h[nc] = c[0];
        for k in 1..m {
            h[nc - k] = 0.5 * c[k];
            h[nc + k] = 0.5 * c[k];
        }
    } else {
        let half = n / 2;
        for k in 0..m {
            h[half - 1 - k] = 0.5 * c[k];
            h[half + k] = 0.5 * c[k];
        }
    }
    Ok(h)
}

/// Gaussian elimination with partial pivoting for the small normal-equation
/// systems used by the design (at most ~33 unknowns).
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0f64; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}
