//! Deterministic synthetic circuit evaluator.
//!
//! Stands in for schematic-level and post-layout circuit simulation of the
//! filter channel: a smooth closed-form map from ten design parameters to
//! (power, SFDR). The post-layout variant is a configurable affine transform
//! of the schematic map's inputs and outputs plus a bounded smooth
//! perturbation, which makes the linear-transfer-learning hypothesis directly
//! testable: with the perturbation at zero the post-layout map is exactly
//! representable by linear input/output wrappers around the schematic model.
//!
//! This is an explicit synthetic function, not a claim about silicon; it
//! exists so the modeling/search pipeline is runnable and falsifiable at desk
//! scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_PARAMS: usize = 10;
pub const NUM_METRICS: usize = 2;

/// Design-parameter names (driver strengths, unit capacitor, biases, drive
/// settings and swing of the channel datapath).
pub const PARAM_NAMES: [&str; NUM_PARAMS] = [
    "drv_strength",
    "cap_unit_ff",
    "dac_bias_ua",
    "mux_drive",
    "dff_drive",
    "clk_buf_drive",
    "ring_bias_ua",
    "chop_drive",
    "out_swing_v",
    "tail_current_ua",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams(pub [f64; NUM_PARAMS]);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitMetrics {
    pub power_mw: f64,
    pub sfdr_db: f64,
}

impl CircuitMetrics {
    pub fn as_array(&self) -> [f64; NUM_METRICS] {
        [self.power_mw, self.sfdr_db]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalVariant {
    Schematic,
    Postlayout,
}

/// Per-parameter [min, max] ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges(pub [(f64, f64); NUM_PARAMS]);

impl Default for ParamRanges {
    fn default() -> Self {
        ParamRanges([
            (1.0, 16.0),  // drv_strength
            (0.5, 8.0),   // cap_unit_ff
            (5.0, 80.0),  // dac_bias_ua
            (1.0, 8.0),   // mux_drive
            (1.0, 8.0),   // dff_drive
            (1.0, 12.0),  // clk_buf_drive
            (2.0, 40.0),  // ring_bias_ua
            (1.0, 8.0),   // chop_drive
            (0.2, 1.0),   // out_swing_v
            (10.0, 200.0) // tail_current_ua
        ])
    }
}

impl ParamRanges {
    pub fn contains(&self, p: &CircuitParams) -> Result<()> {
        for (i, &(lo, hi)) in self.0.iter().enumerate() {
            let v = p.0[i];
            let eps = 1e-9 * (hi - lo);
            if !(v >= lo - eps && v <= hi + eps) {
                return Err(Error::OutOfRange(format!(
                    "{} = {v} outside [{lo}, {hi}]",
                    PARAM_NAMES[i]
                )));
            }
        }
        Ok(())
    }

    /// Normalizes each parameter to [0, 1] over its range.
    pub fn normalize(&self, p: &CircuitParams) -> [f64; NUM_PARAMS] {
        let mut z = [0.0; NUM_PARAMS];
        for i in 0..NUM_PARAMS {
            let (lo, hi) = self.0[i];
            z[i] = (p.0[i] - lo) / (hi - lo);
        }
        z
    }

    pub fn clamp(&self, p: &mut CircuitParams) {
        for i in 0..NUM_PARAMS {
            let (lo, hi) = self.0[i];
            p.0[i] = p.0[i].clamp(lo, hi);
        }
    }
}

/// Affine input/output remapping plus bounded smooth perturbation that turns
/// the schematic map into the post-layout map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostlayoutTransform {
    pub in_scale: [f64; NUM_PARAMS],
    pub in_offset: [f64; NUM_PARAMS],
    pub out_scale: [f64; NUM_METRICS],
    pub out_offset: [f64; NUM_METRICS],
    /// Scale of the smooth non-affine perturbation; 0 makes the post-layout
    /// map an exact affine transform of the schematic map.
    pub perturbation: f64,
}

impl PostlayoutTransform {
    /// Post-layout equals schematic exactly.
    pub fn identity() -> Self {
        PostlayoutTransform {
            in_scale: [1.0; NUM_PARAMS],
            in_offset: [0.0; NUM_PARAMS],
            out_scale: [1.0; NUM_METRICS],
            out_offset: [0.0; NUM_METRICS],
            perturbation: 0.0,
        }
    }

    /// Affine-only layout model (no perturbation): exactly representable by
    /// linear input/output wrappers.
    pub fn exact_affine() -> Self {
        PostlayoutTransform {
            perturbation: 0.0,
            ..Self::default_layout()
        }
    }

    /// Default layout model: routing parasitics load the drivers (input
    /// shrink/offset), raise power and cost a few dB, plus a small smooth
    /// residual.
    pub fn default_layout() -> Self {
        PostlayoutTransform {
            in_scale: [0.96, 1.02, 0.95, 0.97, 1.03, 0.94, 0.98, 1.01, 0.95, 0.97],
            in_offset: [
                0.02, -0.01, 0.03, 0.01, -0.02, 0.04, 0.01, -0.01, 0.02, 0.02,
            ],
            out_scale: [1.08, 0.97],
            out_offset: [0.35, -1.5],
            perturbation: 1.0,
        }
    }
}

/// The synthetic parameter-to-metric evaluator.
#[derive(Debug, Clone, Copy)]
pub struct SynthEval {
    pub ranges: ParamRanges,
    pub postlayout: PostlayoutTransform,
}

impl Default for SynthEval {
    fn default() -> Self {
        SynthEval {
            ranges: ParamRanges::default(),
            postlayout: PostlayoutTransform::default_layout(),
        }
    }
}

impl SynthEval {
    pub fn with_postlayout(postlayout: PostlayoutTransform) -> Self {
        SynthEval {
            ranges: ParamRanges::default(),
            postlayout,
        }
    }

    pub fn eval(&self, params: &CircuitParams, variant: EvalVariant) -> Result<CircuitMetrics> {
        self.ranges.contains(params)?;
        let z = self.ranges.normalize(params);
        Ok(match variant {
            EvalVariant::Schematic => schematic_map(&z),
            EvalVariant::Postlayout => {
                let t = &self.postlayout;
                let mut zt = [0.0; NUM_PARAMS];
                for i in 0..NUM_PARAMS {
                    zt[i] = t.in_scale[i] * z[i] + t.in_offset[i];
                }
                let m = schematic_map(&zt);
                let mut power = t.out_scale[0] * m.power_mw + t.out_offset[0];
                let mut sfdr = t.out_scale[1] * m.sfdr_db + t.out_offset[1];
                if t.perturbation != 0.0 {
                    power += t.perturbation * 0.25 * (2.1 * z[0] - 1.3 * z[3] + 0.7 * z[7]).sin();
                    sfdr += t.perturbation * 2.0 * (1.7 * z[1] + 0.9 * z[5] - 1.1 * z[8]).sin();
                }
                CircuitMetrics {
                    power_mw: power,
                    sfdr_db: sfdr,
                }
            }
        })
    }

    /// Bound on |postlayout - affine part| given the configured perturbation.
    pub fn perturbation_bound(&self) -> (f64, f64) {
        let p = self.postlayout.perturbation.abs();
        (0.25 * p, 2.0 * p)
    }
}

/// Smooth schematic-level map over range-normalized parameters. Power grows
/// with drive strengths and bias currents; SFDR saturates with drive and
/// bias, trades against loading, and shares its strongest knobs with power.
fn schematic_map(z: &[f64; NUM_PARAMS]) -> CircuitMetrics {
    let power_mw = 0.8
        + 2.2 * z[0]
        + 1.1 * z[1]
        + 1.6 * z[2]
        + 0.4 * z[3]
        + 0.4 * z[4]
        + 0.9 * z[5]
        + 0.7 * z[6]
        + 0.3 * z[7]
        + 0.5 * z[8] * z[9]
        + 0.8 * z[9]
        + 0.3 * z[0] * z[5];

    let sfdr_db = 36.0
        + 18.0 * (1.6 * z[0] + 1.1 * z[2] - 0.9).tanh()
        + 8.0 * z[1] * (1.0 - 0.45 * z[1])
        + 6.0 * (2.2 * z[8]).tanh()
        + 4.0 * z[4] * z[5]
        + 3.0 * z[6]
        + 2.0 * z[7]
        - 5.0 * (z[3] - 0.6) * (z[3] - 0.6)
        + 1.5 * (2.0 * z[9]).sin();

    CircuitMetrics { power_mw, sfdr_db }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_params(rng: &mut ChaCha8Rng, ranges: &ParamRanges) -> CircuitParams {
        let mut p = [0.0; NUM_PARAMS];
        for i in 0..NUM_PARAMS {
            let (lo, hi) = ranges.0[i];
            p[i] = rng.random_range(lo..=hi);
        }
        CircuitParams(p)
    }

    #[test]
    fn evaluation_is_deterministic() {
        let eval = SynthEval::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_params(&mut rng, &eval.ranges);
        let a = eval.eval(&p, EvalVariant::Schematic).unwrap();
        let b = eval.eval(&p, EvalVariant::Schematic).unwrap();
        assert_eq!(a, b);
        let c = eval.eval(&p, EvalVariant::Postlayout).unwrap();
        let d = eval.eval(&p, EvalVariant::Postlayout).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn identity_transform_matches_schematic_exactly() {
        let eval = SynthEval::with_postlayout(PostlayoutTransform::identity());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let p = random_params(&mut rng, &eval.ranges);
            let s = eval.eval(&p, EvalVariant::Schematic).unwrap();
            let l = eval.eval(&p, EvalVariant::Postlayout).unwrap();
            assert_eq!(s, l);
        }
    }

    #[test]
    fn perturbation_is_bounded_and_nonzero() {
        // Identity affine + pure perturbation: the difference to schematic is
        // exactly the perturbation term, bounded by the configured scale.
        let mut t = PostlayoutTransform::identity();
        t.perturbation = 0.5;
        let eval = SynthEval::with_postlayout(t);
        let (bound_p, bound_s) = eval.perturbation_bound();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut nonzero = 0;
        for _ in 0..100 {
            let p = random_params(&mut rng, &eval.ranges);
            let s = eval.eval(&p, EvalVariant::Schematic).unwrap();
            let l = eval.eval(&p, EvalVariant::Postlayout).unwrap();
            let dp = (l.power_mw - s.power_mw).abs();
            let ds = (l.sfdr_db - s.sfdr_db).abs();
            assert!(dp <= bound_p + 1e-12, "power diff {dp} beyond bound {bound_p}");
            assert!(ds <= bound_s + 1e-12, "sfdr diff {ds} beyond bound {bound_s}");
            if dp > 0.0 || ds > 0.0 {
                nonzero += 1;
            }
        }
        assert!(nonzero >= 99, "perturbation vanished on {}/100 points", 100 - nonzero);
    }

    #[test]
    fn out_of_range_parameters_are_rejected() {
        let eval = SynthEval::default();
        let mut p = CircuitParams([2.0, 1.0, 10.0, 2.0, 2.0, 2.0, 5.0, 2.0, 0.5, 50.0]);
        eval.eval(&p, EvalVariant::Schematic).unwrap();
        p.0[0] = 100.0;
        assert!(matches!(
            eval.eval(&p, EvalVariant::Schematic),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn metrics_stay_in_plausible_envelopes() {
        let eval = SynthEval::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let p = random_params(&mut rng, &eval.ranges);
            for variant in [EvalVariant::Schematic, EvalVariant::Postlayout] {
                let m = eval.eval(&p, variant).unwrap();
                assert!(m.power_mw > 0.0 && m.power_mw < 15.0, "power {}", m.power_mw);
                assert!(m.sfdr_db > 5.0 && m.sfdr_db < 90.0, "sfdr {}", m.sfdr_db);
            }
        }
    }
}
