//! Input stimulus generators for the behavioral simulator, configured from
//! JSON: impulse, single tone, two-tone, and a held QAM symbol stream (the
//! in-phase component, rectangular pulse shaping).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StimulusSpec {
    Impulse {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    Tone {
        freq_hz: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        num_samples: usize,
    },
    TwoTone {
        freq1_hz: f64,
        freq2_hz: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        num_samples: usize,
    },
    Qam {
        /// Square constellation order (4, 16, 64, 256).
        order: usize,
        num_symbols: usize,
        #[serde(default = "default_sps")]
        samples_per_symbol: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn default_amplitude() -> f64 {
    1.0
}

fn default_sps() -> usize {
    4
}

impl StimulusSpec {
    /// Generates input samples at the given sample period.
    pub fn generate(&self, sample_period: f64) -> Result<Vec<f64>> {
        match *self {
            StimulusSpec::Impulse { amplitude } => Ok(vec![amplitude]),
            StimulusSpec::Tone {
                freq_hz,
                amplitude,
                num_samples,
            } => Ok((0..num_samples)
                .map(|m| {
                    amplitude
                        * (2.0 * std::f64::consts::PI * freq_hz * m as f64 * sample_period).sin()
                })
                .collect()),
            StimulusSpec::TwoTone {
                freq1_hz,
                freq2_hz,
                amplitude,
                num_samples,
            } => Ok((0..num_samples)
                .map(|m| {
                    let t = m as f64 * sample_period;
                    0.5 * amplitude
                        * ((2.0 * std::f64::consts::PI * freq1_hz * t).sin()
                            + (2.0 * std::f64::consts::PI * freq2_hz * t).sin())
                })
                .collect()),
            StimulusSpec::Qam {
                order,
                num_symbols,
                samples_per_symbol,
                seed,
            } => {
                let side = (order as f64).sqrt().round() as usize;
                if side * side != order || side < 2 {
                    return Err(Error::InvalidSpec(format!(
                        "QAM order must be a square >= 4, got {order}"
                    )));
                }
                if samples_per_symbol == 0 {
                    return Err(Error::InvalidSpec(
                        "samples_per_symbol must be >= 1".into(),
                    ));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let norm = (side - 1) as f64;
                let mut samples = Vec::with_capacity(num_symbols * samples_per_symbol);
                for _ in 0..num_symbols {
                    let idx = rng.random_range(0..side);
                    let level = (2.0 * idx as f64 - norm) / norm.max(1.0);
                    for _ in 0..samples_per_symbol {
                        samples.push(level);
                    }
                }
                Ok(samples)
            }
        }
    }
}
